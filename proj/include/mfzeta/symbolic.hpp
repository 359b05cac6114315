#pragma once

#include <map>
#include <numeric>
#include <ostream>
#include <vector>

#include "graph.hpp"

namespace mfzeta {

struct MetricGamma {
    double gamma = kDefaultGamma;
    explicit MetricGamma(double g = kDefaultGamma) : gamma(g) {
        if (!(gamma > 0.0 && gamma < 1.0))
            throw Error("metric parameter must lie in (0,1)");
    }
};

// ---------------------------------------------------------------------------
// Eventually periodic points of the path space, stored as (preperiod,
// period) and kept in canonical form: the period is minimal, and no suffix
// of the preperiod can be absorbed into the cycle.
// ---------------------------------------------------------------------------

class SymbolicPoint {
  public:
    SymbolicPoint(const GdSystem& sys, PathWord preperiod, PathWord period)
        : pre_(std::move(preperiod)), per_(std::move(period)) {
        if (per_.empty()) throw Error("symbolic point needs a nonempty period");
        PathWord joined = concat(pre_, per_);
        if (!sys.word_admissible(joined))
            throw Error("symbolic point word is not admissible");
        if (sys.word_term(per_) != sys.word_init(per_))
            throw Error("period word is not cyclic");
        if (!pre_.empty() && sys.edge(pre_.edges.back()).to != sys.word_init(per_))
            throw Error("preperiod does not feed into the period");
        canonicalize();
    }

    const PathWord& preperiod() const { return pre_; }
    const PathWord& period() const { return per_; }

    // Edge at position k (0-based) of the infinite string.
    int edge_at(std::size_t k) const {
        if (k < pre_.edges.size()) return pre_.edges[k];
        return per_.edges[(k - pre_.edges.size()) % per_.edges.size()];
    }

    SymbolicPoint shifted(const GdSystem& sys) const {
        if (!pre_.empty()) {
            PathWord p{std::vector<int>(pre_.edges.begin() + 1, pre_.edges.end())};
            return SymbolicPoint(sys, p, per_);
        }
        PathWord rot;
        rot.edges.assign(per_.edges.begin() + 1, per_.edges.end());
        rot.edges.push_back(per_.edges.front());
        return SymbolicPoint(sys, {}, rot);
    }

    PathWord prefix(std::size_t len) const {
        PathWord w;
        w.edges.reserve(len);
        for (std::size_t k = 0; k < len; ++k) w.edges.push_back(edge_at(k));
        return w;
    }

    bool operator==(const SymbolicPoint& o) const {
        return pre_ == o.pre_ && per_ == o.per_;
    }

  private:
    void canonicalize() {
        // Minimal period: check proper divisors of the period length.
        const std::size_t len = per_.edges.size();
        for (std::size_t d = 1; d < len; ++d) {
            if (len % d != 0) continue;
            bool repeats = true;
            for (std::size_t k = d; k < len && repeats; ++k)
                repeats = per_.edges[k] == per_.edges[k % d];
            if (repeats) {
                per_.edges.resize(d);
                break;
            }
        }
        // Absorb preperiod tail into the cycle where possible.
        while (!pre_.empty() && pre_.edges.back() == per_.edges.back()) {
            pre_.edges.pop_back();
            per_.edges.insert(per_.edges.begin(), per_.edges.back());
            per_.edges.pop_back();
        }
    }

    PathWord pre_;
    PathWord per_;
};

// Length of the longest common prefix; equal points are signalled by -1.
inline long common_prefix_length(const SymbolicPoint& a, const SymbolicPoint& b) {
    const std::size_t bound = std::max(a.preperiod().edges.size(),
                                       b.preperiod().edges.size()) +
                              a.period().edges.size() * b.period().edges.size() /
                                  std::gcd(a.period().edges.size(),
                                           b.period().edges.size()) +
                              1;
    for (std::size_t k = 0; k < bound; ++k)
        if (a.edge_at(k) != b.edge_at(k)) return static_cast<long>(k);
    return -1;
}

inline double dgamma(const SymbolicPoint& a, const SymbolicPoint& b,
                     const MetricGamma& metric) {
    long m = common_prefix_length(a, b);
    if (m < 0) return 0.0;
    return std::pow(metric.gamma, static_cast<double>(m));
}

// ---------------------------------------------------------------------------
// CylinderMeasure: a probability measure described by its cylinder masses up
// to a fixed depth. Masses of absent words are zero.
// ---------------------------------------------------------------------------

class CylinderMeasure {
  public:
    CylinderMeasure(int depth, std::map<PathWord, double> masses,
                    bool truncated_tail = true)
        : depth_(depth), mass_(std::move(masses)), truncated_(truncated_tail) {
        if (depth_ < 0) throw Error("cylinder depth must be >= 0");
    }

    int depth() const { return depth_; }
    bool truncated_tail() const { return truncated_; }
    const std::map<PathWord, double>& masses() const { return mass_; }

    double mass(const PathWord& w) const {
        if (w.empty()) return 1.0;
        auto it = mass_.find(w);
        return it == mass_.end() ? 0.0 : it->second;
    }

    // Telescoping check: each word's mass equals the sum over its stored
    // one-edge extensions, and everything is nonnegative.
    void validate(const GdSystem& sys, double tol = 1e-12) const {
        std::map<PathWord, double> child_sum;
        double level1 = 0.0;
        for (const auto& [w, m] : mass_) {
            if (m < -tol) throw Error("negative cylinder mass");
            if (w.length() > depth_) throw Error("cylinder word beyond depth");
            if (!sys.word_admissible(w)) throw Error("inadmissible cylinder word");
            if (w.length() == 1) level1 += m;
            if (w.length() >= 2) {
                PathWord parent{std::vector<int>(w.edges.begin(), w.edges.end() - 1)};
                child_sum[parent] += m;
            }
        }
        if (depth_ >= 1 && std::abs(level1 - 1.0) > tol)
            throw Error("depth-1 masses do not sum to 1");
        for (const auto& [w, m] : mass_) {
            if (w.length() >= depth_) continue;
            auto it = child_sum.find(w);
            const double s = it == child_sum.end() ? 0.0 : it->second;
            if (std::abs(s - m) > tol)
                throw Error("cylinder masses do not telescope at '" + sys.word_id(w) +
                            "'");
        }
    }

    void write_csv(const GdSystem& sys, std::ostream& os) const {
        os << "word,mass\n";
        for (const auto& [w, m] : mass_) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.15g", m);
            os << sys.word_id(w) << "," << buf << "\n";
        }
    }

  private:
    int depth_;
    std::map<PathWord, double> mass_;
    bool truncated_;
};

// Occupation measure of the first n shifts of a point, carried to cylinder
// depth D. Every mass is an exact integer multiple of 1/n.
inline CylinderMeasure occupation_L(const GdSystem& sys, const SymbolicPoint& point,
                                    int n, int depth) {
    if (n < 1) throw Error("occupation measure needs n >= 1");
    std::map<PathWord, long> counts;
    for (int k = 0; k < n; ++k) {
        PathWord w;
        w.edges.reserve(static_cast<std::size_t>(depth));
        for (int d = 1; d <= depth; ++d) {
            w.edges.push_back(point.edge_at(static_cast<std::size_t>(k + d - 1)));
            ++counts[w];
        }
    }
    std::map<PathWord, double> masses;
    for (const auto& [w, c] : counts)
        masses[w] = static_cast<double>(c) / static_cast<double>(n);
    return CylinderMeasure(depth, std::move(masses));
}

// The periodic completion of a finite word: the point repeating
// word . return_word(word) forever.
inline SymbolicPoint periodic_completion(const GdSystem& sys, const PathWord& word) {
    PathWord cycle = concat(word, return_word(sys, word));
    return SymbolicPoint(sys, {}, cycle);
}

// Occupation measure of the periodic completion over one full cycle. The
// result is shift invariant; masses are exact multiples of 1/(n + |return|).
inline CylinderMeasure occupation_M(const GdSystem& sys, const PathWord& word,
                                    int depth) {
    if (word.empty()) throw Error("occupation_M: empty word");
    const int cycle_len =
        word.length() + return_word(sys, word).length();
    return occupation_L(sys, periodic_completion(sys, word), cycle_len, depth);
}

// ---------------------------------------------------------------------------
// Lipschitz-dual distance between two cylinder measures.
//
// The path-space metric is an ultrametric, so the dual distance equals the
// optimal-transport cost on its tree realization: the node of each word w
// hangs below its parent by an edge of length (gamma^{|w|-1} - gamma^{|w|})/2,
// and the cost is the sum over tree edges of length times |mu[w] - nu[w]|.
// Truncating at depth D discards at most gamma^D of cost, which is added to
// the upper endpoint.
// ---------------------------------------------------------------------------

inline Interval ldistance(const CylinderMeasure& mu, const CylinderMeasure& nu,
                          const MetricGamma& metric, int depth) {
    if (mu.depth() < depth || nu.depth() < depth)
        throw DepthMismatch("measures are carried to depth below the requested one");
    const double g = metric.gamma;
    double sum = 0.0;
    auto it_a = mu.masses().begin();
    auto it_b = nu.masses().begin();
    auto edge_len = [g](int k) {
        return 0.5 * (std::pow(g, k - 1) - std::pow(g, k));
    };
    while (it_a != mu.masses().end() || it_b != nu.masses().end()) {
        if (it_b == nu.masses().end() ||
            (it_a != mu.masses().end() && it_a->first < it_b->first)) {
            if (it_a->first.length() <= depth)
                sum += edge_len(it_a->first.length()) * std::abs(it_a->second);
            ++it_a;
        } else if (it_a == mu.masses().end() || it_b->first < it_a->first) {
            if (it_b->first.length() <= depth)
                sum += edge_len(it_b->first.length()) * std::abs(it_b->second);
            ++it_b;
        } else {
            if (it_a->first.length() <= depth)
                sum += edge_len(it_a->first.length()) *
                       std::abs(it_a->second - it_b->second);
            ++it_a;
            ++it_b;
        }
    }
    const double tail = std::pow(g, depth);
    return {sum, sum + tail};
}

}  // namespace mfzeta
