#pragma once

#include "multifractal.hpp"

namespace mfzeta {

// Random edge-Markov measure with exponential weights, deterministic under
// the stream.
inline MarkovMeasure random_markov_measure(const GdSystem& sys, Rng& rng) {
    std::vector<double> pi(static_cast<std::size_t>(sys.edge_count()), 0.0);
    for (int v = 0; v < sys.vertex_count(); ++v) {
        double total = 0.0;
        for (int e : sys.out_edges(v)) {
            pi[static_cast<std::size_t>(e)] = -std::log(1.0 - rng.next_double());
            total += pi[static_cast<std::size_t>(e)];
        }
        for (int e : sys.out_edges(v)) pi[static_cast<std::size_t>(e)] /= total;
    }
    return MarkovMeasure(sys, pi);
}

// ---------------------------------------------------------------------------
// MomentSet: sampled attainable moment vectors of a family of depth-1
// potentials over stationary measures. Contains the maximal-entropy point
// and every vertex-simple deterministic cycle; random Markov measures fill
// the interior.
// ---------------------------------------------------------------------------

struct MomentSet {
    std::vector<std::vector<double>> points;
    std::vector<Interval> box;  // componentwise bounding box of the points
    std::vector<Interval> cycle_box;  // exact attainable range per component

    bool box_contains(const std::vector<double>& x, double slack = 0.0) const {
        for (std::size_t k = 0; k < box.size(); ++k)
            if (x[k] < cycle_box[k].lo - slack || x[k] > cycle_box[k].hi + slack)
                return false;
        return true;
    }
};

inline MomentSet moment_set(const GdSystem& sys,
                            const std::vector<Potential>& components, int samples,
                            std::uint64_t seed) {
    if (samples < 1) throw Error("moment_set needs at least one sample");
    for (const Potential& p : components)
        if (p.depth() != 1) throw DepthMismatch("moment_set needs depth-1 tables");
    MomentSet ms;
    const std::size_t dim = components.size();

    auto push_measure = [&](const MarkovMeasure& mu) {
        std::vector<double> pt(dim);
        for (std::size_t k = 0; k < dim; ++k)
            pt[k] = mu.mean_value(components[k]);
        ms.points.push_back(std::move(pt));
    };

    push_measure(parry(sys).measure);
    for (const PathWord& c : simple_cycles(sys)) {
        std::vector<double> pt(dim);
        for (std::size_t k = 0; k < dim; ++k)
            pt[k] = cylinder_sup_birkhoff(sys, components[k], c).mid() / c.length();
        ms.points.push_back(std::move(pt));
    }
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) push_measure(random_markov_measure(sys, rng));

    ms.box.assign(dim, Interval{pos_inf(), neg_inf()});
    for (const auto& pt : ms.points)
        for (std::size_t k = 0; k < dim; ++k) {
            ms.box[k].lo = std::min(ms.box[k].lo, pt[k]);
            ms.box[k].hi = std::max(ms.box[k].hi, pt[k]);
        }
    for (std::size_t k = 0; k < dim; ++k)
        ms.cycle_box.push_back(mean_cycle_range(sys, components[k]));
    return ms;
}

// ---------------------------------------------------------------------------
// Constrained-spectrum values through Lagrangian duality: the spectrum at a
// moment vector alpha is inf over multipliers q of the Bowen root t(q) of
// the tilted potential sum_l q_l (f_l - alpha_l) + t * Lambda. The achieving
// Gibbs state provides an independent lower bound and certifies the dual.
// ---------------------------------------------------------------------------

struct DualPoint {
    std::vector<double> q;
    double t = 0.0;
    double gibbs_residual = 0.0;   // |h + <q, m - alpha> + t mean(Lambda)|
    std::vector<double> achieved;  // moments of the achieving Gibbs state
    double lower_bound = 0.0;      // -h/mean(Lambda) at that state
};

struct SpectrumValue {
    bool empty = true;
    double value = 0.0;
    DualPoint dual;
};

namespace detail {

struct DualProblem {
    const GdSystem* sys;
    const std::vector<Potential>* f;
    const Potential* lambda;
    std::vector<double> alpha;

    Potential tilt(const std::vector<double>& q) const {
        std::vector<std::pair<double, const Potential*>> terms;
        double constant = 0.0;
        for (std::size_t l = 0; l < q.size(); ++l) {
            terms.push_back({q[l], &(*f)[l]});
            constant -= q[l] * alpha[l];
        }
        if (terms.empty()) terms.push_back({0.0, lambda});
        return Potential::combine(terms, constant);
    }

    double t_of(const std::vector<double>& q) const {
        return pressure_root_in_t(*sys, tilt(q), *lambda);
    }

    MarkovMeasure gibbs_at(const std::vector<double>& q, double t) const {
        Potential psi = tilt(q);
        Potential full = Potential::combine({{1.0, &psi}, {t, lambda}});
        return gibbs_markov(*sys, full);
    }
};

// Golden-section minimization of a convex function along one coordinate,
// with doubling bracket expansion. Returns false when the minimum escapes
// the expansion range (the constraint point is at or beyond the boundary of
// the attainable set).
inline bool golden_min_coord(const std::function<double(double)>& f, double& x,
                             double span_limit = 512.0) {
    double step = 1.0;
    double a = x - step, b = x + step;
    double fa = f(a), fm = f(x), fb = f(b);
    while (fa < fm || fb < fm) {
        if (fa < fm) {
            b = x;
            fb = fm;
            x = a;
            fm = fa;
            step *= 2.0;
            a = x - step;
            fa = f(a);
        } else {
            a = x;
            fa = fm;
            x = b;
            fm = fb;
            step *= 2.0;
            b = x + step;
            fb = f(b);
        }
        if (b - a > 4.0 * span_limit) return false;
    }
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > 1e-11) {
        if (f1 > f2) {
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
    x = 0.5 * (a + b);
    return true;
}

}  // namespace detail

// Spectrum of Birkhoff averages of a vector of depth-1 potentials at the
// moment vector alpha. Empty when alpha is outside the attainable set.
inline SpectrumValue birkhoff_spectrum_point(const GdSystem& sys,
                                             const std::vector<Potential>& f,
                                             const std::vector<double>& alpha,
                                             const Potential& lambda) {
    if (f.empty() || f.size() != alpha.size())
        throw Error("component/alpha dimension mismatch");
    for (const Potential& p : f)
        if (p.depth() != 1)
            throw DepthMismatch("spectrum points need depth-1 components");

    SpectrumValue out;
    // Exact attainability pre-check, componentwise.
    for (std::size_t l = 0; l < f.size(); ++l) {
        Interval r = mean_cycle_range(sys, f[l]);
        if (alpha[l] < r.lo - 1e-12 || alpha[l] > r.hi + 1e-12) return out;
    }

    detail::DualProblem prob{&sys, &f, &lambda, alpha};
    std::vector<double> q(f.size(), 0.0);
    double t = prob.t_of(q);

    // Cyclic coordinate descent on the jointly convex dual. Feasible
    // constraints keep the value nonnegative; a value sinking below zero
    // certifies an infeasible moment vector and ends the descent early.
    const int max_sweeps = 40;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double t_before = t;
        for (std::size_t l = 0; l < q.size(); ++l) {
            auto line = [&](double ql) {
                std::vector<double> qq = q;
                qq[l] = ql;
                return prob.t_of(qq);
            };
            if (!detail::golden_min_coord(line, q[l])) return out;  // boundary
            t = line(q[l]);
        }
        if (t < -0.1) return out;  // dual unbounded below: no such measure
        if (std::abs(t_before - t) < 1e-12 && sweep > 0) break;
    }

    // Certify with the achieving Gibbs state.
    MarkovMeasure mu = prob.gibbs_at(q, t);
    std::vector<double> achieved(f.size());
    double drift = 0.0;
    for (std::size_t l = 0; l < f.size(); ++l) {
        achieved[l] = mu.mean_value(f[l]);
        drift = std::max(drift, std::abs(achieved[l] - alpha[l]));
    }
    if (drift > 1e-6) return out;  // boundary or duality gap: report empty

    double mean_lambda = mu.mean_value(lambda);
    DualPoint dual;
    dual.q = q;
    dual.t = t;
    dual.achieved = achieved;
    dual.lower_bound = -mu.entropy() / mean_lambda;
    double resid = mu.entropy() + t * mean_lambda;
    for (std::size_t l = 0; l < f.size(); ++l)
        resid += q[l] * (achieved[l] - alpha[l]);
    dual.gibbs_residual = std::abs(resid);

    out.empty = false;
    out.value = t;
    out.dual = std::move(dual);
    return out;
}

inline SpectrumValue birkhoff_spectrum_point(const GdSystem& sys,
                                             const std::vector<Potential>& f,
                                             const std::vector<double>& alpha) {
    return birkhoff_spectrum_point(sys, f, alpha, builtin_lambda(sys));
}

// Spectrum of the ratio of two Birkhoff averages at level alpha, for a
// denominator of constant sign: linearize the constraint to
// mean(f - alpha g) = 0 and reuse the vector dual.
inline SpectrumValue ratio_spectrum_point(const GdSystem& sys, const Potential& f,
                                          const Potential& g, double alpha,
                                          const Potential& lambda) {
    if (f.depth() != 1 || g.depth() != 1)
        throw DepthMismatch("ratio spectrum needs depth-1 tables");
    if (!g.strictly_positive() && !g.strictly_negative()) throw SignViolation();

    SpectrumValue out;
    // Attainable ratio range over cycles.
    double lo = pos_inf(), hi = neg_inf();
    for (const PathWord& c : simple_cycles(sys)) {
        double num = cylinder_sup_birkhoff(sys, f, c).mid();
        double den = cylinder_sup_birkhoff(sys, g, c).mid();
        lo = std::min(lo, num / den);
        hi = std::max(hi, num / den);
    }
    if (alpha < lo - 1e-12 || alpha > hi + 1e-12) return out;

    Potential linear = Potential::combine({{1.0, &f}, {-alpha, &g}});
    return birkhoff_spectrum_point(sys, {linear}, {0.0}, lambda);
}

inline SpectrumValue ratio_spectrum_point(const GdSystem& sys, const Potential& f,
                                          const Potential& g, double alpha) {
    return ratio_spectrum_point(sys, f, g, alpha, builtin_lambda(sys));
}

// ---------------------------------------------------------------------------
// Spectra of Holder-type combinations prod mean(f_l)^{s_l} / prod
// mean(g_l)^{t_l}: the level set Q = alpha is gridded inside the moment
// bounding box and the vector dual is evaluated at each node on the set.
// The result is a lower-bound style estimate; the node spacing is reported.
// ---------------------------------------------------------------------------

struct HolderSpectrumValue {
    bool empty = true;
    double value = 0.0;
    double grid_spacing = 0.0;   // largest node spacing among the components
    int nodes_on_level_set = 0;
    std::vector<double> best_node;
};

inline HolderSpectrumValue holder_spectrum_point(
    const GdSystem& sys, const std::vector<Potential>& fs,
    const std::vector<Potential>& gs, const std::vector<double>& s_exp,
    const std::vector<double>& t_exp, double alpha, int grid_points = 33) {
    if (fs.size() != gs.size() || fs.size() != s_exp.size() ||
        fs.size() != t_exp.size())
        throw Error("holder spectrum: dimension mismatch");
    for (const Potential& p : fs)
        if (!p.strictly_positive()) throw PositivityViolation();
    for (const Potential& p : gs)
        if (!p.strictly_positive()) throw PositivityViolation();
    for (double e : s_exp)
        if (!(e > 0.0)) throw Error("holder exponents must be positive");
    for (double e : t_exp)
        if (!(e > 0.0)) throw Error("holder exponents must be positive");

    const std::size_t M = fs.size();
    std::vector<Potential> all;
    for (const Potential& p : fs) all.push_back(p);
    for (const Potential& p : gs) all.push_back(p);

    std::vector<Interval> box;
    for (const Potential& p : all) box.push_back(mean_cycle_range(sys, p));

    auto q_of = [&](const std::vector<double>& x) {
        double v = 0.0;
        for (std::size_t l = 0; l < M; ++l) v += s_exp[l] * std::log(x[l]);
        for (std::size_t l = 0; l < M; ++l) v -= t_exp[l] * std::log(x[M + l]);
        return std::exp(v);
    };

    HolderSpectrumValue out;
    std::vector<double> spacing(box.size(), 0.0);
    for (std::size_t k = 0; k < box.size(); ++k) {
        spacing[k] = box[k].width() / std::max(1, grid_points - 1);
        out.grid_spacing = std::max(out.grid_spacing, spacing[k]);
    }

    // Walk the grid; keep nodes whose Q-value is within the local
    // first-order band of alpha.
    std::vector<int> idx(box.size(), 0);
    std::vector<double> node(box.size());
    Potential lambda = builtin_lambda(sys);
    while (true) {
        for (std::size_t k = 0; k < box.size(); ++k)
            node[k] = box[k].width() == 0.0
                          ? box[k].lo
                          : box[k].lo + idx[k] * spacing[k];
        double qv = q_of(node);
        double band = 0.0;
        for (std::size_t k = 0; k < box.size(); ++k) {
            if (spacing[k] == 0.0) continue;
            // |dQ/dx_k| * h/2, with the log-derivative of Q.
            double coeff = (k < M ? s_exp[k] : t_exp[k - M]) / node[k];
            band += std::abs(qv) * coeff * 0.5 * spacing[k];
        }
        if (std::abs(qv - alpha) <= band + 1e-15) {
            SpectrumValue v = birkhoff_spectrum_point(sys, all, node, lambda);
            if (!v.empty) {
                ++out.nodes_on_level_set;
                if (out.empty || v.value > out.value) {
                    out.empty = false;
                    out.value = v.value;
                    out.best_node = node;
                }
            }
        }
        // Advance the mixed-radix counter.
        std::size_t k = 0;
        for (; k < box.size(); ++k) {
            if (box[k].width() == 0.0) continue;
            if (++idx[k] < grid_points) break;
            idx[k] = 0;
        }
        if (k == box.size()) break;
    }
    return out;
}

// Max of a pointwise spectrum over the part of the target covered by the
// grid; monotone under grid refinement.
inline SpectrumValue target_spectrum(
    const std::function<SpectrumValue(const std::vector<double>&)>& evaluator,
    const TargetSet& target, const std::vector<std::vector<double>>& grid) {
    SpectrumValue best;
    for (const auto& node : grid) {
        if (!target.contains_point(node)) continue;
        SpectrumValue v = evaluator(node);
        if (v.empty) continue;
        if (best.empty || v.value > best.value) best = v;
    }
    return best;
}

}  // namespace mfzeta
