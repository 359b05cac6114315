#pragma once

#include <optional>

#include "thermo.hpp"

namespace mfzeta {

// ---------------------------------------------------------------------------
// Target sets: finite unions of closed boxes. Inflation by r acts in the
// max-norm (componentwise). In one dimension, containment of a query
// interval is decided against the merged union, which makes the test exact;
// in higher dimensions a query box must fit inside a single member box.
// ---------------------------------------------------------------------------

struct TargetSet {
    int dim = 1;
    std::vector<std::vector<Interval>> boxes;

    static TargetSet interval(double lo, double hi) {
        TargetSet t;
        t.dim = 1;
        t.boxes.push_back({Interval{lo, hi}});
        return t;
    }

    static TargetSet point(double x) { return interval(x, x); }

    static TargetSet box(std::vector<Interval> b) {
        TargetSet t;
        t.dim = static_cast<int>(b.size());
        t.boxes.push_back(std::move(b));
        return t;
    }

    void add_box(std::vector<Interval> b) {
        if (static_cast<int>(b.size()) != dim)
            throw Error("target box dimension mismatch");
        boxes.push_back(std::move(b));
    }

    TargetSet inflated(double r) const {
        TargetSet t;
        t.dim = dim;
        for (const auto& b : boxes) {
            std::vector<Interval> nb;
            for (const Interval& iv : b) nb.push_back(iv.inflated(r));
            t.boxes.push_back(std::move(nb));
        }
        return t;
    }

    bool contains_point(const std::vector<double>& x) const {
        for (const auto& b : boxes) {
            bool in = true;
            for (std::size_t k = 0; k < b.size() && in; ++k)
                in = b[k].contains(x[k]);
            if (in) return true;
        }
        return false;
    }

    bool contains_point1(double x) const { return contains_point({x}); }

    std::vector<Interval> merged_1d() const {
        std::vector<Interval> ivs;
        for (const auto& b : boxes) ivs.push_back(b[0]);
        std::sort(ivs.begin(), ivs.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        for (const Interval& iv : ivs) {
            if (!merged.empty() && iv.lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, iv.hi);
            else
                merged.push_back(iv);
        }
        return merged;
    }

    bool contains_box(const std::vector<Interval>& q) const {
        if (dim == 1) {
            for (const Interval& iv : merged_1d())
                if (iv.contains(q[0])) return true;
            return false;
        }
        for (const auto& b : boxes) {
            bool in = true;
            for (std::size_t k = 0; k < b.size() && in; ++k)
                in = b[k].contains(q[k]);
            if (in) return true;
        }
        return false;
    }

    bool contains_interval(const Interval& q) const { return contains_box({q}); }
};

// ---------------------------------------------------------------------------
// Vertex-simple cycles (each vertex visited at most once). Their
// edge-average values bound the attainable means of depth-1 potentials over
// stationary measures, which gives exact attainability ranges.
// ---------------------------------------------------------------------------

inline std::vector<PathWord> simple_cycles(const GdSystem& sys) {
    std::vector<PathWord> cycles;
    const int n = sys.vertex_count();
    for (int root = 0; root < n; ++root) {
        // Only cycles whose minimal vertex is `root`, to visit each once.
        std::vector<char> used(static_cast<std::size_t>(n), 0);
        PathWord path;
        std::function<void(int)> rec = [&](int v) {
            used[static_cast<std::size_t>(v)] = 1;
            for (int e : sys.out_edges(v)) {
                int w = sys.edge(e).to;
                if (w == root) {
                    path.edges.push_back(e);
                    cycles.push_back(path);
                    path.edges.pop_back();
                } else if (w > root && !used[static_cast<std::size_t>(w)]) {
                    path.edges.push_back(e);
                    rec(w);
                    path.edges.pop_back();
                }
            }
            used[static_cast<std::size_t>(v)] = 0;
        };
        rec(root);
    }
    return cycles;
}

// Attainable range of (sum num)/(sum den) over cycles; with depth-1 tables
// this is exactly the range of the ratio functional over stationary
// measures (minimum/maximum cycle ratio).
inline Interval ratio_cycle_range(const GdSystem& sys, const RatioMap& u) {
    double lo = pos_inf(), hi = neg_inf();
    for (const PathWord& c : simple_cycles(sys)) {
        Interval num = cylinder_sup_birkhoff(sys, u.numerator, c);
        Interval den = cylinder_sup_birkhoff(sys, u.denominator, c);
        Interval q = interval_divide_negative(num, den);
        lo = std::min(lo, q.lo);
        hi = std::max(hi, q.hi);
    }
    return {lo, hi};
}

// Lipschitz bound of the ratio functional with respect to the dual distance
// on measures, for depth-1 tables: |U(mu) - U(nu)| <= K * ldistance(mu, nu).
// Combined with the occupation closeness bound this yields an inflation
// radius under which the L- and M-selected word sets provably nest.
inline double ratio_lipschitz_bound(const RatioMap& u) {
    if (u.numerator.depth() != 1 || u.denominator.depth() != 1)
        throw DepthMismatch("lipschitz bound needs depth-1 tables");
    const double lip_num = u.numerator.spread();
    const double lip_den = u.denominator.spread();
    const double num_absmax =
        std::max(std::abs(u.numerator.min_lo()), std::abs(u.numerator.max_hi()));
    const double den_absmin = -u.denominator.max_hi();  // > 0
    const double den_absmax = -u.denominator.min_lo();
    return (lip_num * den_absmax + num_absmax * lip_den) /
           (den_absmin * den_absmin);
}

// The occupation closeness bound at length n (no truncation tail): distance
// between the n-shift occupation of any continuation and the cycle
// occupation of the length-n prefix.
inline double occupation_closeness_bound(const GdSystem& sys, int n, double gamma) {
    return 1.0 / (n * (1.0 - gamma)) + 2.0 * sys.vertex_count() / static_cast<double>(n);
}

// Attainable range of the mean of a depth-1 potential over stationary
// measures: cycle averages.
inline Interval mean_cycle_range(const GdSystem& sys, const Potential& f) {
    double lo = pos_inf(), hi = neg_inf();
    for (const PathWord& c : simple_cycles(sys)) {
        Interval s = cylinder_sup_birkhoff(sys, f, c);
        lo = std::min(lo, s.lo / c.length());
        hi = std::max(hi, s.hi / c.length());
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// The temperature function beta(q): the unique t with
// P(q*phi + t*lambda) = 0, evaluated through the pressure-root machinery.
// Its derivative comes from the means of the achieving Gibbs state.
// ---------------------------------------------------------------------------

class BetaFunction {
  public:
    BetaFunction(const GdSystem& sys, Potential phi, Potential lambda)
        : sys_(&sys), phi_(std::move(phi)), lambda_(std::move(lambda)) {
        if (!lambda_.strictly_negative()) throw NotNegative();
        alpha_range_ = ratio_cycle_range(sys, RatioMap(phi_, lambda_));
    }

    static BetaFunction standard(const GdSystem& sys) {
        return BetaFunction(sys, builtin_phi(sys), builtin_lambda(sys));
    }

    const GdSystem& system() const { return *sys_; }
    const Potential& phi() const { return phi_; }
    const Potential& lambda() const { return lambda_; }
    Interval alpha_range() const { return alpha_range_; }

    double operator()(double q) const {
        auto it = cache_.find(q);
        if (it != cache_.end()) return it->second;
        Potential tilt = Potential::combine({{q, &phi_}});
        double t = pressure_root_in_t(*sys_, tilt, lambda_);
        cache_[q] = t;
        return t;
    }

    // alpha(q) = -beta'(q): the ratio of phi- and lambda-means at the Gibbs
    // state of q*phi + beta(q)*lambda. Exact for depth-1 tables.
    double alpha(double q) const {
        double b = (*this)(q);
        Potential tilted = Potential::combine({{q, &phi_}, {b, &lambda_}});
        MarkovMeasure mu = gibbs_markov(*sys_, tilted);
        return mu.mean_value(phi_) / mu.mean_value(lambda_);
    }

    // Gibbs state at parameter q.
    MarkovMeasure gibbs(double q) const {
        double b = (*this)(q);
        Potential tilted = Potential::combine({{q, &phi_}, {b, &lambda_}});
        return gibbs_markov(*sys_, tilted);
    }

  private:
    const GdSystem* sys_;
    Potential phi_;
    Potential lambda_;
    Interval alpha_range_{0, 0};
    mutable std::map<double, double> cache_;
};

// ---------------------------------------------------------------------------
// Legendre transform of beta: f(alpha) = inf_q (alpha q + beta(q)). The
// infimum is located through the tangency condition alpha(q) = alpha, which
// is exact at interior points; outside the attainable range the infimum
// diverges and the value is empty.
// ---------------------------------------------------------------------------

struct LegendreValue {
    bool empty = true;
    double value = 0.0;
    double tangent_q = 0.0;
    double width = 0.0;  // local sensitivity of the achieved infimum
};

inline LegendreValue legendre(const BetaFunction& beta, double alpha,
                              double q_limit = 1024.0) {
    LegendreValue out;
    Interval range = beta.alpha_range();
    if (alpha < range.lo || alpha > range.hi) return out;  // empty

    auto h = [&](double q) { return alpha - beta.alpha(q); };  // increasing in q

    double h0 = h(0.0);
    double qa = 0.0, qb = 0.0, ha = h0, hb = h0;
    if (std::abs(h0) > 1e-13) {
        double step = 1.0;
        if (h0 < 0.0) {
            // Need larger q.
            qb = step;
            hb = h(qb);
            while (hb < 0.0) {
                qa = qb;
                ha = hb;
                step *= 2.0;
                qb = step;
                if (qb > q_limit) return out;
                hb = h(qb);
            }
        } else {
            qa = -step;
            ha = h(qa);
            while (ha > 0.0) {
                qb = qa;
                hb = ha;
                step *= 2.0;
                qa = -step;
                if (qa < -q_limit) return out;
                ha = h(qa);
            }
        }
        // Degenerate (affine beta): the tangency never moves.
        if (ha == hb) return out;
        while (qb - qa > 1e-13) {
            double qm = 0.5 * (qa + qb);
            double hm = h(qm);
            if (std::abs(hm) < 1e-14) {
                qa = qb = qm;
                break;
            }
            if (hm < 0.0) {
                qa = qm;
                ha = hm;
            } else {
                qb = qm;
                hb = hm;
            }
        }
    }
    double q_star = 0.5 * (qa + qb);
    double f = alpha * q_star + beta(q_star);
    out.empty = false;
    out.value = f;
    out.tangent_q = q_star;
    // The infimum is flat to second order; probing one step out gives an
    // honest width for the achieved value.
    double probe = std::max(1e-7, std::abs(q_star) * 1e-7);
    double f1 = alpha * (q_star + probe) + beta(q_star + probe);
    double f2 = alpha * (q_star - probe) + beta(q_star - probe);
    out.width = std::max({f1 - f, f2 - f, 0.0});
    return out;
}

// ---------------------------------------------------------------------------
// Spectrum curves
// ---------------------------------------------------------------------------

struct SpectrumSample {
    double alpha = 0.0;
    double value = 0.0;
    double width = 0.0;
    bool empty = true;
};

struct SpectrumCurve {
    std::vector<SpectrumSample> samples;
    bool concave = true;  // second differences of finite stretches <= 1e-9

    void check_concavity(double tol = 1e-9) {
        concave = true;
        for (std::size_t i = 0; i + 2 < samples.size(); ++i) {
            if (samples[i].empty || samples[i + 1].empty || samples[i + 2].empty)
                continue;
            double d2 = samples[i].value - 2.0 * samples[i + 1].value +
                        samples[i + 2].value;
            if (d2 > tol) concave = false;
        }
    }
};

inline SpectrumCurve spectrum_curve(const BetaFunction& beta,
                                    const std::vector<double>& alphas) {
    SpectrumCurve curve;
    for (double a : alphas) {
        LegendreValue v = legendre(beta, a);
        SpectrumSample s;
        s.alpha = a;
        s.empty = v.empty;
        if (!v.empty) {
            s.value = v.value;
            s.width = v.width;
        }
        curve.samples.push_back(s);
    }
    curve.check_concavity();
    return curve;
}

// ---------------------------------------------------------------------------
// Constraint evaluation for restricted (multifractally relevant) sums.
//
//  - Source::L     : the cylinder enclosure of the ratio functional must be
//                    contained in the target (sound, conservative).
//  - Source::M     : the ratio evaluated at the occupation measure of the
//                    word's periodic completion must lie in the target.
//  - Source::Diam  : the point log(weight)/log(diam) of the word must lie in
//                    the target.
// ---------------------------------------------------------------------------

enum class ConstraintSource { L, M, Diam };

// Mean of a depth-m potential along the cycle word . return_word(word),
// with cyclic windows.
inline Interval cycle_mean(const GdSystem& sys, const Potential& pot,
                           const PathWord& word) {
    PathWord cycle = concat(word, return_word(sys, word));
    const int L = cycle.length();
    const int m = pot.depth();
    PathWord doubled = cycle;
    for (int k = 0; k < m - 1; ++k)
        doubled.edges.push_back(cycle.edges[static_cast<std::size_t>(k % L)]);
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < L; ++k) {
        Interval v = pot.at_window(doubled, k);
        lo += v.lo;
        hi += v.hi;
    }
    return {lo / L, hi / L};
}

inline bool word_qualifies(const GdSystem& sys, const RatioMap& u,
                           const TargetSet& target, const PathWord& word,
                           ConstraintSource source) {
    switch (source) {
        case ConstraintSource::L: {
            Interval box = u_enclosure(sys, u, word);
            return target.contains_interval(box);
        }
        case ConstraintSource::M: {
            Interval num = cycle_mean(sys, u.numerator, word);
            Interval den = cycle_mean(sys, u.denominator, word);
            Interval q = interval_divide_negative(num, den);
            if (q.width() == 0.0) return target.contains_point1(q.lo);
            return target.contains_interval(q);
        }
        case ConstraintSource::Diam: {
            double p = sys.word_log_weight(word) / sys.word_log_diam(word);
            return target.contains_point1(p);
        }
    }
    return false;
}

// Log of the restricted partition sum: over words of length n whose
// constraint value lies in the target, summing the chosen Birkhoff branch
// of phi. -inf when no word qualifies.
inline double log_restricted_sum(const GdSystem& sys, const Potential& phi,
                                 const TargetSet& target, const RatioMap& u, int n,
                                 ConstraintSource source,
                                 Branch branch = Branch::Sup,
                                 double cap = enumeration_cap()) {
    LogSumExp lse;
    for_each_word(
        sys, n,
        [&](const PathWord& w) {
            if (!word_qualifies(sys, u, target, w, source)) return;
            Interval b = cylinder_sup_birkhoff(sys, phi, w);
            lse.add(branch == Branch::Sup ? b.hi : b.lo);
        },
        cap);
    return lse.value();
}

inline double restricted_sum(const GdSystem& sys, const Potential& phi,
                             const TargetSet& target, const RatioMap& u, int n,
                             ConstraintSource source, Branch branch = Branch::Sup,
                             double cap = enumeration_cap()) {
    double lz = log_restricted_sum(sys, phi, target, u, n, source, branch, cap);
    return lz == neg_inf() ? 0.0 : std::exp(lz);
}

// ---------------------------------------------------------------------------
// Finite-n multifractal pressure sequences
// ---------------------------------------------------------------------------

struct MfPressureSequence {
    std::vector<int> ladder;
    std::vector<double> values;      // (1/n) log Z_n, -inf when empty
    std::vector<char> empty_flags;
    double extrapolant = neg_inf();  // bias-corrected limit estimate
    bool all_empty = true;
};

// Two-point extrapolation of v_n = P + c/n over the largest nonempty rungs.
inline double ladder_extrapolant(const std::vector<int>& ladder,
                                 const std::vector<double>& values) {
    int n1 = -1, n2 = -1;
    double v1 = 0.0, v2 = 0.0;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (values[i] == neg_inf()) continue;
        n1 = n2;
        v1 = v2;
        n2 = ladder[i];
        v2 = values[i];
    }
    if (n2 < 0) return neg_inf();
    if (n1 < 0 || n1 == n2) return v2;
    return (n2 * v2 - n1 * v1) / (n2 - n1);
}

inline MfPressureSequence mf_pressure(const GdSystem& sys, const Potential& phi,
                                      const TargetSet& target, const RatioMap& u,
                                      const std::vector<int>& ladder,
                                      Branch branch = Branch::Sup,
                                      ConstraintSource source = ConstraintSource::L,
                                      double cap = enumeration_cap()) {
    MfPressureSequence seq;
    seq.ladder = ladder;
    for (int n : ladder) {
        double lz = log_restricted_sum(sys, phi, target, u, n, source, branch, cap);
        seq.values.push_back(lz == neg_inf() ? neg_inf() : lz / n);
        seq.empty_flags.push_back(lz == neg_inf());
        if (lz != neg_inf()) seq.all_empty = false;
    }
    seq.extrapolant = ladder_extrapolant(seq.ladder, seq.values);
    return seq;
}

// Same sequence across an inflation ladder, with the exact monotonicity
// in r that holds at each fixed n (larger targets select more words).
struct MfPressureFamily {
    std::vector<double> radii;
    std::vector<MfPressureSequence> sequences;
    bool monotone_in_r = true;
};

inline MfPressureFamily mf_pressure_family(const GdSystem& sys, const Potential& phi,
                                           const TargetSet& target, const RatioMap& u,
                                           const std::vector<int>& ladder,
                                           const std::vector<double>& radii,
                                           Branch branch = Branch::Sup,
                                           ConstraintSource source = ConstraintSource::L,
                                           double cap = enumeration_cap()) {
    MfPressureFamily fam;
    fam.radii = radii;
    for (double r : radii)
        fam.sequences.push_back(
            mf_pressure(sys, phi, target.inflated(r), u, ladder, branch, source, cap));
    for (std::size_t i = 0; i + 1 < fam.sequences.size(); ++i) {
        // radii are expected descending or ascending; compare pointwise.
        for (std::size_t k = 0; k < ladder.size(); ++k) {
            double a = fam.sequences[i].values[k];
            double b = fam.sequences[i + 1].values[k];
            bool bigger_first = fam.radii[i] >= fam.radii[i + 1];
            double big = bigger_first ? a : b;
            double small = bigger_first ? b : a;
            if (small > big + 1e-12) fam.monotone_in_r = false;
        }
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Restricted Bowen solvers.
//
// For phi = t * Lambda with depth-1 tables the qualifying word set does not
// depend on t, so each rung of the ladder is enumerated once and the root in
// t is found on cached Birkhoff sums.
// ---------------------------------------------------------------------------

namespace detail {

struct RestrictedRung {
    int n = 0;
    std::vector<double> lambda_sums;  // Birkhoff direction-sums of qualifiers
};

inline RestrictedRung collect_rung(const GdSystem& sys, const Potential& direction,
                                   const TargetSet& target, const RatioMap& u, int n,
                                   ConstraintSource source, Branch branch,
                                   double cap) {
    RestrictedRung rung;
    rung.n = n;
    for_each_word(
        sys, n,
        [&](const PathWord& w) {
            if (!word_qualifies(sys, u, target, w, source)) return;
            Interval b = cylinder_sup_birkhoff(sys, direction, w);
            rung.lambda_sums.push_back(branch == Branch::Sup ? b.hi : b.lo);
        },
        cap);
    return rung;
}

inline double rung_log_sum(const RestrictedRung& rung, double t) {
    LogSumExp lse;
    for (double s : rung.lambda_sums) lse.add(t * s);
    return lse.value();
}

// Root in t of a strictly decreasing finite-n pressure estimate. The value
// at the largest nonempty rung is used, with an optional (log n)/(2n)
// prefactor correction: a constraint window that excludes words pinches the
// sum to a lattice slice whose count carries a 1/sqrt(n) local-limit
// prefactor, which this term removes. Unconstrained sums have an order-one
// prefactor and are used raw.
inline std::optional<double> rung_root(const RestrictedRung& rung, bool corrected) {
    if (rung.lambda_sums.empty()) return std::nullopt;
    const double bias = corrected ? 0.5 * std::log(static_cast<double>(rung.n)) : 0.0;
    auto value = [&](double t) { return (rung_log_sum(rung, t) + bias) / rung.n; };

    double lo = 0.0, hi = 0.0;
    double v0 = value(0.0);
    if (v0 == 0.0) return 0.0;
    double step = 1.0;
    if (v0 > 0.0) {
        hi = step;
        while (value(hi) > 0.0) {
            lo = hi;
            step *= 2.0;
            hi = step;
            if (hi > 1e6) return std::nullopt;
        }
    } else {
        lo = -step;
        hi = 0.0;
        while (value(lo) < 0.0) {
            hi = lo;
            step *= 2.0;
            lo = -step;
            if (lo < -1e6) return std::nullopt;
        }
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (value(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

struct RestrictedRoot {
    bool empty = true;
    int n = 0;
    double root = neg_inf();      // prefactor-corrected when pinched
    double raw_root = neg_inf();  // plain finite-n root
};

inline RestrictedRoot solve_restricted_root(const GdSystem& sys,
                                            std::vector<RestrictedRung>& rungs) {
    RestrictedRoot out;
    const RestrictedRung* best = nullptr;
    for (const auto& r : rungs)
        if (!r.lambda_sums.empty() && (!best || r.n > best->n)) best = &r;
    if (!best) return out;
    const bool pinched =
        static_cast<double>(best->lambda_sums.size()) < word_count(sys, best->n);
    std::optional<double> raw = rung_root(*best, false);
    std::optional<double> cor = pinched ? rung_root(*best, true) : raw;
    if (!raw || !cor) return out;
    out.empty = false;
    out.n = best->n;
    out.root = *cor;
    out.raw_root = *raw;
    return out;
}

}  // namespace detail

struct ShrinkingTargetResult {
    std::vector<double> radii;
    std::vector<double> roots;       // corrected root per radius; -inf if empty
    std::vector<double> raw_roots;   // uncorrected finite-n roots
    std::vector<char> empty_flags;
    bool empty = true;               // no radius produced a finite root
    double estimate = neg_inf();     // corrected root at the smallest radius
    Interval enclosure{0, 0};        // raw-vs-corrected spread at that radius
    double reference = neg_inf();    // duality value beta*(alpha)
    bool reference_empty = true;
};

inline ShrinkingTargetResult shrinking_target_root(
    const BetaFunction& beta, double alpha, const std::vector<double>& r_ladder,
    const std::vector<int>& n_ladder, ConstraintSource source = ConstraintSource::L,
    double cap = enumeration_cap()) {
    const GdSystem& sys = beta.system();
    RatioMap u(beta.phi(), beta.lambda());
    ShrinkingTargetResult res;
    res.radii = r_ladder;

    LegendreValue ref = legendre(beta, alpha);
    res.reference_empty = ref.empty;
    if (!ref.empty) res.reference = ref.value;

    double min_r = pos_inf();
    for (double r : r_ladder) {
        TargetSet c = TargetSet::interval(alpha - r, alpha + r);
        std::vector<detail::RestrictedRung> rungs;
        for (int n : n_ladder)
            rungs.push_back(detail::collect_rung(sys, beta.lambda(), c, u, n, source,
                                                 Branch::Sup, cap));
        detail::RestrictedRoot root = detail::solve_restricted_root(sys, rungs);
        res.roots.push_back(root.empty ? neg_inf() : root.root);
        res.raw_roots.push_back(root.empty ? neg_inf() : root.raw_root);
        res.empty_flags.push_back(root.empty);
        if (!root.empty) {
            res.empty = false;
            if (r < min_r) {
                min_r = r;
                res.estimate = root.root;
                res.enclosure = {std::min(root.raw_root, root.root),
                                 std::max(root.raw_root, root.root)};
            }
        }
    }
    return res;
}

struct FixedTargetResult {
    double root = neg_inf();
    double raw_root = neg_inf();
    double reference = neg_inf();  // sup of beta* over the target
    double reference_alpha = 0.0;
};

inline FixedTargetResult fixed_target_root(const BetaFunction& beta,
                                           const Interval& target_box,
                                           const std::vector<int>& n_ladder,
                                           double cap = enumeration_cap()) {
    const GdSystem& sys = beta.system();
    Interval attainable = beta.alpha_range();
    // Interior condition: the open interior of the box must meet the
    // attainable values of the ratio functional.
    if (!(target_box.lo < target_box.hi) || target_box.hi <= attainable.lo ||
        target_box.lo >= attainable.hi)
        throw DegenerateTarget();

    RatioMap u(beta.phi(), beta.lambda());
    TargetSet c = TargetSet::interval(target_box.lo, target_box.hi);
    std::vector<detail::RestrictedRung> rungs;
    for (int n : n_ladder)
        rungs.push_back(detail::collect_rung(sys, beta.lambda(), c, u, n,
                                             ConstraintSource::L, Branch::Sup, cap));
    detail::RestrictedRoot root = detail::solve_restricted_root(sys, rungs);

    FixedTargetResult res;
    if (!root.empty) {
        res.root = root.root;
        res.raw_root = root.raw_root;
    }

    // Reference: maximize the concave beta* over the clipped box by golden
    // section.
    double a = std::max(target_box.lo, attainable.lo);
    double b = std::min(target_box.hi, attainable.hi);
    auto f = [&](double x) {
        LegendreValue v = legendre(beta, x);
        return v.empty ? neg_inf() : v.value;
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        }
    }
    res.reference_alpha = 0.5 * (a + b);
    res.reference = f(res.reference_alpha);
    return res;
}

// ---------------------------------------------------------------------------
// Radius of convergence of the restricted zeta function, from the root test
// on the restricted coefficients (sharpened by the same two-point
// extrapolation used elsewhere when at least two rungs are nonempty).
// ---------------------------------------------------------------------------

struct RestrictedZetaRadius {
    bool empty = true;     // no coefficient was nonzero: infinite radius
    double sigma = pos_inf();
    double neg_log_sigma = neg_inf();
};

inline RestrictedZetaRadius restricted_zeta_radius(
    const GdSystem& sys, const Potential& phi, const TargetSet& target,
    const RatioMap& u, int n_max, ConstraintSource source = ConstraintSource::L,
    double cap = enumeration_cap()) {
    RestrictedZetaRadius res;
    std::vector<int> ladder;
    std::vector<double> values;
    for (int n = 1; n <= n_max; ++n) {
        double lz = log_restricted_sum(sys, phi, target, u, n, source, Branch::Sup, cap);
        if (lz == neg_inf()) continue;
        ladder.push_back(n);
        values.push_back(lz / n);
    }
    if (ladder.empty()) return res;
    // Extrapolate across the widest pair in the tail half; adjacent rungs of
    // a pinched window often share one lattice slice and carry no slope
    // information.
    std::size_t start = ladder.size() / 2;
    const int n1 = ladder[start], n2 = ladder.back();
    const double v1 = values[start], v2 = values.back();
    double est = (n1 == n2) ? v2 : (n2 * v2 - n1 * v1) / (n2 - n1);
    res.empty = false;
    res.neg_log_sigma = est;
    res.sigma = std::exp(-est);
    return res;
}

}  // namespace mfzeta
