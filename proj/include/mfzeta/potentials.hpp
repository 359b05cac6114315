#pragma once

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "symbolic.hpp"

namespace mfzeta {

enum class PotentialKind { LocallyConstant, Enclosed };

// ---------------------------------------------------------------------------
// Potential: a function on path space that is either locally constant of
// depth m (determined by the first m edges) or enclosed between two such
// tables. Values are in nats. Tables are indexed by the admissible words of
// length m in lexicographic order.
// ---------------------------------------------------------------------------

class Potential {
  public:
    static Potential locally_constant(const GdSystem& sys, int depth,
                                      std::function<double(const PathWord&)> f) {
        Potential p(sys, depth);
        p.kind_ = PotentialKind::LocallyConstant;
        for (std::size_t i = 0; i < p.shape_->words.size(); ++i) {
            double v = f(p.shape_->words[i]);
            p.lo_[i] = v;
            p.hi_[i] = v;
        }
        return p;
    }

    static Potential enclosed(const GdSystem& sys, int depth,
                              std::function<double(const PathWord&)> lower,
                              std::function<double(const PathWord&)> upper) {
        Potential p(sys, depth);
        p.kind_ = PotentialKind::Enclosed;
        for (std::size_t i = 0; i < p.shape_->words.size(); ++i) {
            p.lo_[i] = lower(p.shape_->words[i]);
            p.hi_[i] = upper(p.shape_->words[i]);
            if (p.lo_[i] > p.hi_[i])
                throw Error("enclosed potential has lower > upper on a cylinder");
        }
        return p;
    }

    static Potential from_table(const GdSystem& sys, int depth,
                                const std::map<PathWord, double>& table) {
        return locally_constant(sys, depth, [&](const PathWord& w) {
            auto it = table.find(w);
            if (it == table.end())
                throw Error("potential table misses word '" + sys.word_id(w) + "'");
            return it->second;
        });
    }

    PotentialKind kind() const { return kind_; }
    int depth() const { return depth_; }
    const std::vector<PathWord>& words() const { return shape_->words; }
    double table_lo(std::size_t i) const { return lo_[i]; }
    double table_hi(std::size_t i) const { return hi_[i]; }

    double lo(const PathWord& w) const { return lo_[index(w)]; }
    double hi(const PathWord& w) const { return hi_[index(w)]; }

    // Depth-1 fast path: table slot of an edge.
    std::size_t edge_slot(int e) const {
        return static_cast<std::size_t>(shape_->edge_slot[static_cast<std::size_t>(e)]);
    }

    // Value interval on the cylinder of the first `depth` edges of a longer
    // word, starting at offset k.
    Interval at_window(const PathWord& w, int k) const {
        if (depth_ == 1) {
            std::size_t i = edge_slot(w.edges[static_cast<std::size_t>(k)]);
            return {lo_[i], hi_[i]};
        }
        PathWord win;
        win.edges.assign(w.edges.begin() + k, w.edges.begin() + k + depth_);
        std::size_t i = index(win);
        return {lo_[i], hi_[i]};
    }

    double min_lo() const {
        double m = lo_[0];
        for (double v : lo_) m = std::min(m, v);
        return m;
    }
    double max_hi() const {
        double m = hi_[0];
        for (double v : hi_) m = std::max(m, v);
        return m;
    }
    // Largest table spread; zero for constants.
    double spread() const { return max_hi() - min_lo(); }

    bool strictly_negative() const { return max_hi() < 0.0; }
    bool strictly_positive() const { return min_lo() > 0.0; }

    // Pointwise linear combination; all terms must share depth and system.
    static Potential combine(const std::vector<std::pair<double, const Potential*>>& terms,
                             double constant = 0.0) {
        if (terms.empty()) throw Error("combine: no terms");
        const Potential& first = *terms.front().second;
        Potential out = first;
        for (std::size_t i = 0; i < out.shape_->words.size(); ++i) {
            double lo = constant, hi = constant;
            for (auto [c, p] : terms) {
                if (p->depth() != first.depth() ||
                    p->shape_->words.size() != first.shape_->words.size())
                    throw DepthMismatch("combined potentials must share one table");
                double a = c * p->lo_[i], b = c * p->hi_[i];
                lo += std::min(a, b);
                hi += std::max(a, b);
            }
            out.lo_[i] = lo;
            out.hi_[i] = hi;
            if (lo != hi) out.kind_ = PotentialKind::Enclosed;
        }
        return out;
    }

  private:
    // The table shape (word list and index) is immutable and shared between
    // copies; linear combinations of potentials are built in hot loops.
    struct Shape {
        int depth = 1;
        std::vector<PathWord> words;
        std::map<PathWord, std::size_t> index;
        std::vector<int> edge_slot;  // depth-1 only: edge index -> table slot
    };

    Potential(const GdSystem& sys, int depth) : depth_(depth) {
        if (depth_ < 1) throw Error("potential depth must be >= 1");
        auto shape = std::make_shared<Shape>();
        shape->depth = depth;
        shape->words = admissible_words(sys, depth_);
        for (std::size_t i = 0; i < shape->words.size(); ++i)
            shape->index[shape->words[i]] = i;
        if (depth == 1) {
            shape->edge_slot.assign(static_cast<std::size_t>(sys.edge_count()), -1);
            for (std::size_t i = 0; i < shape->words.size(); ++i)
                shape->edge_slot[static_cast<std::size_t>(
                    shape->words[i].edges[0])] = static_cast<int>(i);
        }
        shape_ = std::move(shape);
        lo_.assign(shape_->words.size(), 0.0);
        hi_.assign(shape_->words.size(), 0.0);
    }

    std::size_t index(const PathWord& w) const {
        auto it = shape_->index.find(w);
        if (it == shape_->index.end())
            throw Error("word is outside the potential's table");
        return it->second;
    }

    PotentialKind kind_ = PotentialKind::LocallyConstant;
    int depth_ = 1;
    std::shared_ptr<const Shape> shape_;
    std::vector<double> lo_, hi_;
};

// Scaling potential of the system: depth-1 table of log contraction ratios.
inline Potential builtin_lambda(const GdSystem& sys) {
    return Potential::locally_constant(sys, 1, [&](const PathWord& w) {
        return std::log(sys.edge(w.edges[0]).ratio);
    });
}

// Weight potential of the system: depth-1 table of log edge probabilities.
inline Potential builtin_phi(const GdSystem& sys) {
    return Potential::locally_constant(sys, 1, [&](const PathWord& w) {
        return std::log(sys.edge(w.edges[0]).prob);
    });
}

// ---------------------------------------------------------------------------
// Birkhoff sums over a cylinder.
//
// For a depth-m potential and a word of length n, the summand at shift k is
// pinned by the word alone while k + m <= n; the remaining summands depend
// on the continuation, which is maximized/minimized jointly over all
// admissible continuations of length m-1 from the terminal vertex.
// ---------------------------------------------------------------------------

inline Interval cylinder_sup_birkhoff(const GdSystem& sys, const Potential& pot,
                                      const PathWord& word) {
    const int n = word.length();
    const int m = pot.depth();
    if (n < 1) throw Error("cylinder_sup_birkhoff: empty word");

    if (m == 1) {
        double lo = 0.0, hi = 0.0;
        for (int e : word.edges) {
            std::size_t i = pot.edge_slot(e);
            lo += pot.table_lo(i);
            hi += pot.table_hi(i);
        }
        return {lo, hi};
    }

    double base_lo = 0.0, base_hi = 0.0;
    for (int k = 0; k + m <= n; ++k) {
        Interval v = pot.at_window(word, k);
        base_lo += v.lo;
        base_hi += v.hi;
    }

    // Boundary: shifts k with k + m > n. Enumerate continuations of length
    // m-1 and optimize the joint boundary sum.
    const int boundary = std::min(n, m - 1);
    double best_hi = neg_inf();
    double best_lo = pos_inf();
    std::function<void(PathWord&, int)> rec = [&](PathWord& cont, int left) {
        if (left == 0) {
            PathWord extended = concat(word, cont);
            double s_lo = 0.0, s_hi = 0.0;
            for (int k = n - boundary; k < n; ++k) {
                Interval v = pot.at_window(extended, k);
                s_lo += v.lo;
                s_hi += v.hi;
            }
            best_hi = std::max(best_hi, s_hi);
            best_lo = std::min(best_lo, s_lo);
            return;
        }
        int at = cont.empty() ? sys.word_term(word) : sys.edge(cont.edges.back()).to;
        for (int e : sys.out_edges(at)) {
            cont.edges.push_back(e);
            rec(cont, left - 1);
            cont.edges.pop_back();
        }
    };
    PathWord cont;
    rec(cont, m - 1);
    return {base_lo + best_lo, base_hi + best_hi};
}

// ---------------------------------------------------------------------------
// RatioMap: the functional mu -> (integral of numerator)/(integral of
// denominator); the denominator is required strictly negative.
// ---------------------------------------------------------------------------

struct RatioMap {
    Potential numerator;
    Potential denominator;

    RatioMap(Potential num, Potential den)
        : numerator(std::move(num)), denominator(std::move(den)) {
        if (!denominator.strictly_negative()) throw DenominatorSignViolation();
    }
};

// Interval containing the set of ratio values over the cylinder of `word`:
// Birkhoff bounds of the numerator divided by those of the denominator. An
// exact point when both potentials are depth-1.
inline Interval u_enclosure(const GdSystem& sys, const RatioMap& u,
                            const PathWord& word) {
    Interval num = cylinder_sup_birkhoff(sys, u.numerator, word);
    Interval den = cylinder_sup_birkhoff(sys, u.denominator, word);
    return interval_divide_negative(num, den);
}

// ---------------------------------------------------------------------------
// Enclosure discretization of an externally tabulated function. The caller
// supplies one sample value per depth-m cylinder plus (constant, exponent)
// Holder data with respect to the path-space metric; the cylinder diameter
// gamma^m then brackets the function on each cylinder.
// ---------------------------------------------------------------------------

inline Potential discretize(const GdSystem& sys, int depth,
                            const std::function<double(const PathWord&)>& sample,
                            double holder_constant, double holder_exponent,
                            const MetricGamma& metric) {
    if (!(holder_constant >= 0.0))
        throw BadHolderData("constant must be nonnegative");
    if (!(holder_exponent > 0.0)) throw BadHolderData("exponent must be positive");
    const double radius =
        holder_constant * std::pow(std::pow(metric.gamma, depth), holder_exponent);
    return Potential::enclosed(
        sys, depth, [&](const PathWord& w) { return sample(w) - radius; },
        [&](const PathWord& w) { return sample(w) + radius; });
}

// ---------------------------------------------------------------------------
// Vector potentials
// ---------------------------------------------------------------------------

struct VectorPotential {
    std::vector<Potential> components;

    explicit VectorPotential(std::vector<Potential> comps)
        : components(std::move(comps)) {
        if (components.empty()) throw Error("vector potential has no components");
        for (const Potential& p : components)
            if (p.words().size() != components.front().words().size())
                throw DepthMismatch("vector potential components must share a system");
    }

    int dim() const { return static_cast<int>(components.size()); }
};

// ---------------------------------------------------------------------------
// CSV table I/O: rows "word,value" or "word,lo,hi"; word is a dot-separated
// list of edge ids.
// ---------------------------------------------------------------------------

inline PathWord parse_word_id(const GdSystem& sys, const std::string& text) {
    PathWord w;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, '.')) {
        int e = sys.edge_index(part);
        if (e < 0) throw ConfigError("unknown edge id '" + part + "'");
        w.edges.push_back(e);
    }
    if (w.edges.empty()) throw ConfigError("empty word in table");
    return w;
}

inline Potential load_potential_csv(const GdSystem& sys, std::istream& in) {
    std::map<PathWord, double> lo, hi;
    int depth = -1;
    bool enclosed = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.rfind("word,", 0) == 0) continue;  // header
        std::stringstream ss(line);
        std::string word_text, a, b;
        if (!std::getline(ss, word_text, ','))
            throw ConfigError("table line " + std::to_string(lineno) + ": no word");
        if (!std::getline(ss, a, ','))
            throw ConfigError("table line " + std::to_string(lineno) + ": no value");
        PathWord w = parse_word_id(sys, word_text);
        if (depth < 0) depth = w.length();
        if (w.length() != depth)
            throw ConfigError("table line " + std::to_string(lineno) +
                              ": inconsistent word length");
        if (std::getline(ss, b, ',')) {
            enclosed = true;
            lo[w] = std::stod(a);
            hi[w] = std::stod(b);
        } else {
            lo[w] = std::stod(a);
            hi[w] = std::stod(a);
        }
    }
    if (depth < 0) throw ConfigError("empty potential table");
    auto look = [](const std::map<PathWord, double>& t, const GdSystem& s) {
        return [&t, &s](const PathWord& w) {
            auto it = t.find(w);
            if (it == t.end())
                throw ConfigError("table misses word '" + s.word_id(w) + "'");
            return it->second;
        };
    };
    if (enclosed)
        return Potential::enclosed(sys, depth, look(lo, sys), look(hi, sys));
    return Potential::locally_constant(sys, depth, look(lo, sys));
}

}  // namespace mfzeta
