#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "potentials.hpp"

namespace mfzeta {

// ---------------------------------------------------------------------------
// TransferMatrix: the finite-dimensional reduction of a depth-m locally
// constant potential. States are vertices for m = 1 and admissible words of
// length m-1 otherwise, both in lexicographic order. Entries are
// exp(potential) summed over parallel transitions; a common log factor is
// split off so that extreme potentials (large |q| tilts) stay finite.
// ---------------------------------------------------------------------------

struct TransferMatrix {
    int dim = 0;
    std::vector<double> a;   // scaled entries, row-major: true A = exp(log_shift) * a
    double log_shift = 0.0;
    std::vector<PathWord> states;  // empty for the vertex-indexed case

    double entry(int i, int j) const {
        return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) +
                 static_cast<std::size_t>(j)];
    }
};

enum class Branch { Sup, Inf };

inline TransferMatrix build_transfer(const GdSystem& sys, const Potential& pot,
                                     Branch branch = Branch::Sup) {
    auto value = [&](std::size_t i) {
        return branch == Branch::Sup ? pot.table_hi(i) : pot.table_lo(i);
    };
    TransferMatrix M;
    const int m = pot.depth();
    double shift = neg_inf();
    for (std::size_t i = 0; i < pot.words().size(); ++i)
        shift = std::max(shift, value(i));
    M.log_shift = shift;

    if (m == 1) {
        M.dim = sys.vertex_count();
        M.a.assign(static_cast<std::size_t>(M.dim) * M.dim, 0.0);
        for (std::size_t i = 0; i < pot.words().size(); ++i) {
            const Edge& e = sys.edge(pot.words()[i].edges[0]);
            M.a[static_cast<std::size_t>(e.from) * M.dim +
                static_cast<std::size_t>(e.to)] += std::exp(value(i) - shift);
        }
        return M;
    }

    std::vector<PathWord> states = admissible_words(sys, m - 1);
    std::map<PathWord, int> index;
    for (std::size_t i = 0; i < states.size(); ++i)
        index[states[i]] = static_cast<int>(i);
    M.dim = static_cast<int>(states.size());
    M.states = states;
    M.a.assign(static_cast<std::size_t>(M.dim) * M.dim, 0.0);
    for (std::size_t i = 0; i < pot.words().size(); ++i) {
        const PathWord& w = pot.words()[i];
        PathWord head{std::vector<int>(w.edges.begin(), w.edges.end() - 1)};
        PathWord tail{std::vector<int>(w.edges.begin() + 1, w.edges.end())};
        M.a[static_cast<std::size_t>(index.at(head)) * M.dim +
            static_cast<std::size_t>(index.at(tail))] += std::exp(value(i) - shift);
    }
    return M;
}

// Adjacency-count matrix as a TransferMatrix (the zero potential).
inline TransferMatrix count_matrix(const GdSystem& sys) {
    TransferMatrix M;
    M.dim = sys.vertex_count();
    M.log_shift = 0.0;
    M.a = sys.adjacency_counts();
    return M;
}

// ---------------------------------------------------------------------------
// Perron data with a Collatz-Wielandt certificate. Power iteration runs on
// the matrix plus a positive diagonal shift, which is primitive whenever the
// matrix is irreducible, so periodic graphs converge too.
// ---------------------------------------------------------------------------

struct PerronData {
    double lambda = 0.0;          // spectral radius of the scaled matrix
    Interval lambda_box{0, 0};    // Collatz-Wielandt enclosure of `lambda`
    double log_lambda = 0.0;      // log of the true (unscaled) spectral radius
    Interval log_lambda_box{0, 0};
    std::vector<double> u;  // left eigenvector, sum(u) = 1
    std::vector<double> v;  // right eigenvector, sum(u_i v_i) = 1
    long iterations = 0;
};

namespace detail {

inline void check_irreducible(const TransferMatrix& M) {
    const int n = M.dim;
    auto reach = [&](bool fwd) {
        std::vector<char> seen(static_cast<std::size_t>(n), 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            for (int y = 0; y < n; ++y) {
                double w = fwd ? M.entry(x, y) : M.entry(y, x);
                if (w > 0.0 && !seen[static_cast<std::size_t>(y)]) {
                    seen[static_cast<std::size_t>(y)] = 1;
                    stack.push_back(y);
                }
            }
        }
        return seen;
    };
    auto f = reach(true), b = reach(false);
    for (int x = 0; x < n; ++x)
        if (!f[static_cast<std::size_t>(x)] || !b[static_cast<std::size_t>(x)])
            throw NotIrreducible();
}

inline std::vector<double> power_vector(const TransferMatrix& M, bool transpose,
                                        double diag_shift, double tol,
                                        Interval* box_out, long* iters_out) {
    const int n = M.dim;
    std::vector<double> v(static_cast<std::size_t>(n), 1.0);
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    Interval box{0.0, pos_inf()};
    long it = 0;
    double best_width = pos_inf();
    long stall = 0;
    const long max_iter = 2000000;
    for (; it < max_iter; ++it) {
        double lo = pos_inf(), hi = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = diag_shift * v[static_cast<std::size_t>(i)];
            for (int j = 0; j < n; ++j)
                s += (transpose ? M.entry(j, i) : M.entry(i, j)) *
                     v[static_cast<std::size_t>(j)];
            w[static_cast<std::size_t>(i)] = s;
            double ratio = s / v[static_cast<std::size_t>(i)];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        box = {lo - diag_shift, hi - diag_shift};
        double norm = 0.0;
        for (double x : w) norm += x;
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / norm;
        double width = hi - lo;
        if (width <= tol * std::max(1.0, hi)) break;
        if (width < best_width * (1.0 - 1e-12)) {
            best_width = width;
            stall = 0;
        } else if (++stall > 200) {
            break;  // roundoff floor reached
        }
    }
    if (box_out) *box_out = box;
    if (iters_out) *iters_out = it;
    return v;
}

}  // namespace detail

inline PerronData perron(const TransferMatrix& M, double tol = 1e-14) {
    if (M.dim == 0) throw Error("empty transfer matrix");
    detail::check_irreducible(M);

    double max_row = 0.0;
    for (int i = 0; i < M.dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < M.dim; ++j) s += M.entry(i, j);
        max_row = std::max(max_row, s);
    }
    const double shift = 0.5 * max_row + 1e-300;

    PerronData out;
    Interval box_r, box_l;
    long it_r = 0, it_l = 0;
    std::vector<double> v = detail::power_vector(M, false, shift, tol, &box_r, &it_r);
    std::vector<double> u = detail::power_vector(M, true, shift, tol, &box_l, &it_l);
    out.iterations = it_r + it_l;

    out.lambda_box = {std::max(box_r.lo, box_l.lo), std::min(box_r.hi, box_l.hi)};
    if (out.lambda_box.lo > out.lambda_box.hi)
        out.lambda_box = box_r;  // certificates disagree at roundoff level
    out.lambda = out.lambda_box.mid();
    out.log_lambda = M.log_shift + std::log(out.lambda);
    out.log_lambda_box = {M.log_shift + std::log(out.lambda_box.lo),
                          M.log_shift + std::log(out.lambda_box.hi)};

    double su = 0.0;
    for (double x : u) su += x;
    for (double& x : u) x /= su;
    double cross = 0.0;
    for (int i = 0; i < M.dim; ++i)
        cross += u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    for (double& x : v) x /= cross;
    out.u = std::move(u);
    out.v = std::move(v);
    return out;
}

// ---------------------------------------------------------------------------
// Pressure
// ---------------------------------------------------------------------------

enum class PressureMethod { ExactMatrix, FiniteN };

struct PressureEstimate {
    double value = 0.0;
    Interval box{0, 0};
    PressureMethod method = PressureMethod::ExactMatrix;
    int n = 0;  // only for finite-n estimates

    double width() const { return box.width(); }
};

// Log spectral radius with its Collatz-Wielandt enclosure, from one power
// iteration (no eigenvectors); the workhorse behind pressure evaluations.
inline Interval spectral_log_radius(const TransferMatrix& M, double tol = 1e-14) {
    if (M.dim == 1) {
        double v = M.log_shift + std::log(M.a[0]);
        return {v, v};
    }
    double max_row = 0.0;
    for (int i = 0; i < M.dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < M.dim; ++j) s += M.entry(i, j);
        max_row = std::max(max_row, s);
    }
    Interval box;
    long iters = 0;
    detail::power_vector(M, false, 0.5 * max_row + 1e-300, tol, &box, &iters);
    return {M.log_shift + std::log(box.lo), M.log_shift + std::log(box.hi)};
}

inline PressureEstimate pressure_exact(const GdSystem& sys, const Potential& pot) {
    PressureEstimate est;
    est.method = PressureMethod::ExactMatrix;
    if (pot.kind() == PotentialKind::LocallyConstant) {
        est.box = spectral_log_radius(build_transfer(sys, pot, Branch::Sup));
        est.value = est.box.mid();
    } else {
        Interval lo = spectral_log_radius(build_transfer(sys, pot, Branch::Inf));
        Interval hi = spectral_log_radius(build_transfer(sys, pot, Branch::Sup));
        est.box = {lo.lo, hi.hi};
        est.value = est.box.mid();
    }
    return est;
}

// Log partition values log Z_n for n = 1..N, computed from matrix powers
// (never enumeration). Z_n sums, over all admissible words of length n, the
// chosen Birkhoff branch (sup by default) of the potential over the cylinder.
inline std::vector<double> log_partition_sequence(const GdSystem& sys,
                                                  const Potential& pot, int N,
                                                  Branch branch = Branch::Sup) {
    std::vector<double> out(static_cast<std::size_t>(N) + 1, neg_inf());
    const int m = pot.depth();
    TransferMatrix M = build_transfer(sys, pot, branch);
    const int dim = M.dim;

    // Small lengths where the boundary dominates: direct enumeration (the
    // word count here is at most the potential's own table size).
    for (int n = 1; n < std::min(m, N + 1); ++n) {
        LogSumExp lse;
        for_each_word(sys, n, [&](const PathWord& w) {
            Interval b = cylinder_sup_birkhoff(sys, pot, w);
            lse.add(branch == Branch::Sup ? b.hi : b.lo);
        });
        out[static_cast<std::size_t>(n)] = lse.value();
    }
    if (N < m) return out;

    // Boundary weights per terminal state: the optimized joint sum over the
    // last m-1 shifts. For depth 1 there is no boundary and states are
    // vertices.
    std::vector<double> boundary_log(static_cast<std::size_t>(dim), 0.0);
    if (m >= 2) {
        for (int s = 0; s < dim; ++s) {
            const PathWord& w = M.states[static_cast<std::size_t>(s)];
            Interval total = cylinder_sup_birkhoff(sys, pot, w);
            // The word itself has length m-1 < m, so its Birkhoff bounds are
            // exactly the boundary optimum for that state.
            boundary_log[static_cast<std::size_t>(s)] =
                branch == Branch::Sup ? total.hi : total.lo;
        }
    }

    // y starts as the boundary vector; after k applications of the transfer
    // matrix, 1' y accumulates words of length (m-1) + k.
    std::vector<double> y(static_cast<std::size_t>(dim));
    double log_offset = 0.0;
    {
        double mx = neg_inf();
        for (double b : boundary_log) mx = std::max(mx, b);
        log_offset = mx;
        for (int s = 0; s < dim; ++s)
            y[static_cast<std::size_t>(s)] =
                std::exp(boundary_log[static_cast<std::size_t>(s)] - mx);
    }
    std::vector<double> tmp(static_cast<std::size_t>(dim));
    int words_len = m - 1;
    // For m == 1 the starting vector is all ones over vertices (length 0).
    if (m == 1) {
        std::fill(y.begin(), y.end(), 1.0);
        log_offset = 0.0;
        words_len = 0;
    }
    while (words_len < N) {
        for (int i = 0; i < dim; ++i) {
            double s = 0.0;
            for (int j = 0; j < dim; ++j)
                s += M.entry(i, j) * y[static_cast<std::size_t>(j)];
            tmp[static_cast<std::size_t>(i)] = s;
        }
        y.swap(tmp);
        log_offset += M.log_shift;
        double norm = 0.0;
        for (double x : y) norm += x;
        if (norm > 0.0) {
            for (double& x : y) x /= norm;
            log_offset += std::log(norm);
        }
        ++words_len;
        if (words_len >= std::max(1, m)) {
            double total = 0.0;
            for (double x : y) total += x;
            out[static_cast<std::size_t>(words_len)] =
                log_offset + std::log(total);
        }
        if (words_len > N) break;
    }
    return out;
}

inline PressureEstimate pressure_finite(const GdSystem& sys, const Potential& pot,
                                        int n, Branch branch = Branch::Sup,
                                        double cap = enumeration_cap()) {
    LogSumExp lse;
    for_each_word(
        sys, n,
        [&](const PathWord& w) {
            Interval b = cylinder_sup_birkhoff(sys, pot, w);
            lse.add(branch == Branch::Sup ? b.hi : b.lo);
        },
        cap);
    PressureEstimate est;
    est.method = PressureMethod::FiniteN;
    est.n = n;
    est.value = lse.value() / n;
    est.box = Interval::point(est.value);
    return est;
}

// ---------------------------------------------------------------------------
// Dynamical zeta function: partial sums and radius of convergence.
// ---------------------------------------------------------------------------

inline std::complex<double> zeta_partial(const GdSystem& sys, const Potential& pot,
                                         std::complex<double> z, int N,
                                         Branch branch = Branch::Sup) {
    if (z == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
    std::vector<double> logz = log_partition_sequence(sys, pot, N, branch);
    const double log_abs_z = std::log(std::abs(z));
    const double arg_z = std::arg(z);
    std::complex<double> sum{0.0, 0.0};
    for (int n = 1; n <= N; ++n) {
        double log_mag = n * log_abs_z + logz[static_cast<std::size_t>(n)] -
                         std::log(static_cast<double>(n));
        sum += std::polar(std::exp(log_mag), n * arg_z);
    }
    return sum;
}

struct ZetaRadiusEstimate {
    double sigma = 0.0;        // estimated radius of convergence
    double neg_log_sigma = 0;  // pressure estimate implied by the radius
    Interval pressure_box{0, 0};
    std::vector<double> root_test;  // (log Z_n)/n over the tail window
};

// Radius of convergence of the zeta series via the coefficient root test,
// sharpened by Richardson extrapolation of (log Z_n)/n, whose 1/n bias is
// an artifact of the constant prefactor in Z_n.
inline ZetaRadiusEstimate zeta_radius(const GdSystem& sys, const Potential& pot,
                                      int N, Branch branch = Branch::Sup) {
    if (N < 8) throw Error("zeta_radius needs N >= 8");
    std::vector<double> logz = log_partition_sequence(sys, pot, N, branch);
    ZetaRadiusEstimate est;
    double root_max = neg_inf();
    for (int n = N / 2; n <= N; ++n) {
        double x = logz[static_cast<std::size_t>(n)] / n;
        est.root_test.push_back(x);
        root_max = std::max(root_max, x);
    }
    const int k = N / 2;
    const double xN = logz[static_cast<std::size_t>(N)] / N;
    const double xk = logz[static_cast<std::size_t>(k)] / k;
    // (N xN - k xk)/(N - k) cancels the additive constant in log Z_n.
    const double rich = (N * xN - k * xk) / (N - k);
    est.neg_log_sigma = rich;
    est.sigma = std::exp(-rich);
    est.pressure_box = {std::min(rich, root_max), std::max(rich, root_max)};
    return est;
}

// ---------------------------------------------------------------------------
// Root of t -> P(psi + t * direction) with a strictly negative direction:
// bracket by doubling, bisect to width 1e-13, then one secant polish.
// Monotonicity is asserted on the bracket rather than assumed.
// ---------------------------------------------------------------------------

inline double pressure_root_in_t(const GdSystem& sys, const Potential& psi,
                                 const Potential& direction) {
    if (!direction.strictly_negative()) throw NotNegative();
    auto pressure_at = [&](double t) {
        Potential combined =
            Potential::combine({{1.0, &psi}, {t, &direction}});
        return pressure_exact(sys, combined).value;
    };

    double lo = 0.0, hi = 0.0;
    double p0 = pressure_at(0.0);
    if (p0 == 0.0) return 0.0;
    if (p0 > 0.0) {
        double step = 1.0;
        hi = step;
        while (pressure_at(hi) > 0.0) {
            lo = hi;
            step *= 2.0;
            hi = step;
            if (hi > 1e8) throw Error("pressure root bracket exceeded range");
        }
    } else {
        double step = 1.0;
        lo = -step;
        hi = 0.0;
        while (pressure_at(lo) < 0.0) {
            hi = lo;
            step *= 2.0;
            lo = -step;
            if (lo < -1e8) throw Error("pressure root bracket exceeded range");
        }
    }

    double plo = pressure_at(lo), phi = pressure_at(hi);
    if (!(plo >= 0.0 && phi <= 0.0))
        throw Error("pressure is not decreasing on the bracket");
    while (hi - lo > 1e-13) {
        double mid = 0.5 * (lo + hi);
        double pm = pressure_at(mid);
        if (!(pm <= plo + 1e-12 && pm >= phi - 1e-12))
            throw Error("pressure is not monotone inside the bracket");
        if (pm > 0.0) {
            lo = mid;
            plo = pm;
        } else {
            hi = mid;
            phi = pm;
        }
    }
    // One secant step inside the final bracket.
    double root = hi;
    if (phi != plo) {
        double s = lo + plo * (hi - lo) / (plo - phi);
        if (s >= lo && s <= hi) root = s;
    }
    return root;
}

// Unique s with P(s * phi) = 0 for strictly negative phi.
inline double bowen_root(const GdSystem& sys, const Potential& phi) {
    if (!phi.strictly_negative()) throw NotNegative();
    Potential zero = Potential::combine({{0.0, &phi}});
    return pressure_root_in_t(sys, zero, phi);
}

// ---------------------------------------------------------------------------
// Markov measures: stationary edge chains with entropy and means.
// ---------------------------------------------------------------------------

class MarkovMeasure {
  public:
    MarkovMeasure(const GdSystem& sys, std::vector<double> edge_probs)
        : sys_(&sys), pi_(std::move(edge_probs)) {
        if (pi_.size() != static_cast<std::size_t>(sys.edge_count()))
            throw Error("edge probability vector has wrong length");
        for (int v = 0; v < sys.vertex_count(); ++v) {
            double row = 0.0;
            for (int e : sys.out_edges(v)) {
                if (pi_[static_cast<std::size_t>(e)] < 0.0)
                    throw Error("negative transition weight");
                row += pi_[static_cast<std::size_t>(e)];
            }
            if (std::abs(row - 1.0) > 1e-9)
                throw BadProbabilityVector(sys.vertex(v).id);
            for (int e : sys.out_edges(v)) pi_[static_cast<std::size_t>(e)] /= row;
        }
        compute_stationary();
        compute_entropy();
    }

    const GdSystem& system() const { return *sys_; }
    double edge_prob(int e) const { return pi_[static_cast<std::size_t>(e)]; }
    const std::vector<double>& edge_probs() const { return pi_; }
    double stationary(int v) const { return stat_[static_cast<std::size_t>(v)]; }
    const std::vector<double>& stationary() const { return stat_; }
    double entropy() const { return h_; }

    double mass(const PathWord& w) const {
        if (w.empty()) return 1.0;
        double p = stat_[static_cast<std::size_t>(sys_->word_init(w))];
        for (int e : w.edges) p *= pi_[static_cast<std::size_t>(e)];
        return p;
    }

    double log_mass(const PathWord& w) const {
        if (w.empty()) return 0.0;
        double s = std::log(stat_[static_cast<std::size_t>(sys_->word_init(w))]);
        for (int e : w.edges) s += std::log(pi_[static_cast<std::size_t>(e)]);
        return s;
    }

    // Integral of a depth-m potential: exact for locally constant tables,
    // an interval for enclosed ones.
    Interval mean(const Potential& pot) const {
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < pot.words().size(); ++i) {
            double m = mass(pot.words()[i]);
            lo += m * pot.table_lo(i);
            hi += m * pot.table_hi(i);
        }
        return {lo, hi};
    }

    double mean_value(const Potential& pot) const { return mean(pot).mid(); }

    // Stationarity defect: max over vertices of |sum_in - stat|.
    double stationarity_residual() const {
        std::vector<double> in(stat_.size(), 0.0);
        for (int e = 0; e < sys_->edge_count(); ++e) {
            const Edge& ed = sys_->edge(e);
            in[static_cast<std::size_t>(ed.to)] +=
                stat_[static_cast<std::size_t>(ed.from)] *
                pi_[static_cast<std::size_t>(e)];
        }
        double r = 0.0;
        for (std::size_t v = 0; v < stat_.size(); ++v)
            r = std::max(r, std::abs(in[v] - stat_[v]));
        return r;
    }

    PathWord sample_word(Rng& rng, int n) const {
        PathWord w;
        w.edges.reserve(static_cast<std::size_t>(n));
        double x = rng.next_double();
        int v = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < stat_.size(); ++i) {
            acc += stat_[i];
            if (x < acc) {
                v = static_cast<int>(i);
                break;
            }
            v = static_cast<int>(i);
        }
        for (int k = 0; k < n; ++k) {
            double y = rng.next_double();
            const std::vector<int>& outs = sys_->out_edges(v);
            int chosen = outs.back();
            double c = 0.0;
            for (int e : outs) {
                c += pi_[static_cast<std::size_t>(e)];
                if (y < c) {
                    chosen = e;
                    break;
                }
            }
            w.edges.push_back(chosen);
            v = sys_->edge(chosen).to;
        }
        return w;
    }

  private:
    void compute_stationary() {
        // Solve x' P = x', sum x = 1 by Gaussian elimination on the vertex
        // chain; immune to periodicity.
        const int n = sys_->vertex_count();
        std::vector<double> P(static_cast<std::size_t>(n) * n, 0.0);
        for (int e = 0; e < sys_->edge_count(); ++e) {
            const Edge& ed = sys_->edge(e);
            P[static_cast<std::size_t>(ed.from) * n +
              static_cast<std::size_t>(ed.to)] += pi_[static_cast<std::size_t>(e)];
        }
        // Rows of A: (P^T - I) x = 0, with the last row replaced by sum = 1.
        std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> b(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] =
                    P[static_cast<std::size_t>(j) * n + static_cast<std::size_t>(i)] -
                    (i == j ? 1.0 : 0.0);
        for (int j = 0; j < n; ++j)
            A[static_cast<std::size_t>(n - 1) * n + static_cast<std::size_t>(j)] = 1.0;
        b[static_cast<std::size_t>(n - 1)] = 1.0;

        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::abs(A[static_cast<std::size_t>(r) * n + col]) >
                    std::abs(A[static_cast<std::size_t>(piv) * n + col]))
                    piv = r;
            for (int j = 0; j < n; ++j)
                std::swap(A[static_cast<std::size_t>(col) * n + j],
                          A[static_cast<std::size_t>(piv) * n + j]);
            std::swap(b[static_cast<std::size_t>(col)],
                      b[static_cast<std::size_t>(piv)]);
            double d = A[static_cast<std::size_t>(col) * n + col];
            if (std::abs(d) < 1e-300) throw Error("singular stationary system");
            for (int r = 0; r < n; ++r) {
                if (r == col) continue;
                double f = A[static_cast<std::size_t>(r) * n + col] / d;
                if (f == 0.0) continue;
                for (int j = 0; j < n; ++j)
                    A[static_cast<std::size_t>(r) * n + j] -=
                        f * A[static_cast<std::size_t>(col) * n + j];
                b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
            }
        }
        stat_.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i)
            stat_[static_cast<std::size_t>(i)] =
                b[static_cast<std::size_t>(i)] /
                A[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(i)];
    }

    void compute_entropy() {
        double h = 0.0;
        for (int e = 0; e < sys_->edge_count(); ++e) {
            double p = pi_[static_cast<std::size_t>(e)];
            if (p <= 0.0) continue;
            h -= stat_[static_cast<std::size_t>(sys_->edge(e).from)] * p * std::log(p);
        }
        h_ = h;
    }

    const GdSystem* sys_;
    std::vector<double> pi_;
    std::vector<double> stat_;
    double h_ = 0.0;
};

// Measure of maximal entropy, built from the Perron eigen-data of the
// adjacency-count matrix. Its entropy equals the log spectral radius.
struct ParryMeasure {
    MarkovMeasure measure;
    PerronData perron;

    double lambda() const { return perron.lambda; }
    double log_lambda() const { return perron.log_lambda; }

    // Closed-form cylinder mass u_{i(w)} v_{t(w)} lambda^{-n}.
    double cylinder_mass(const GdSystem& sys, const PathWord& w) const {
        return perron.u[static_cast<std::size_t>(sys.word_init(w))] *
               perron.v[static_cast<std::size_t>(sys.word_term(w))] *
               std::pow(perron.lambda, -w.length());
    }
};

inline ParryMeasure parry(const GdSystem& sys) {
    PerronData pd = perron(count_matrix(sys));
    std::vector<double> pi(static_cast<std::size_t>(sys.edge_count()));
    for (int e = 0; e < sys.edge_count(); ++e) {
        const Edge& ed = sys.edge(e);
        pi[static_cast<std::size_t>(e)] =
            pd.v[static_cast<std::size_t>(ed.to)] /
            (pd.v[static_cast<std::size_t>(ed.from)] * pd.lambda);
    }
    return ParryMeasure{MarkovMeasure(sys, std::move(pi)), std::move(pd)};
}

// Gibbs state of a depth-1 potential: an edge-Markov measure built from the
// Perron data of the weighted transfer matrix. Satisfies
// h + mean(phi) = P(phi).
inline MarkovMeasure gibbs_markov(const GdSystem& sys, const Potential& phi) {
    if (phi.depth() != 1) throw DepthMismatch("gibbs_markov needs a depth-1 potential");
    TransferMatrix M = build_transfer(sys, phi, Branch::Sup);
    PerronData pd = perron(M);
    std::vector<double> pi(static_cast<std::size_t>(sys.edge_count()));
    for (std::size_t i = 0; i < phi.words().size(); ++i) {
        const int e = phi.words()[i].edges[0];
        const Edge& ed = sys.edge(e);
        pi[static_cast<std::size_t>(e)] =
            std::exp(phi.table_hi(i) - M.log_shift) *
            pd.v[static_cast<std::size_t>(ed.to)] /
            (pd.v[static_cast<std::size_t>(ed.from)] * pd.lambda);
    }
    return MarkovMeasure(sys, std::move(pi));
}

}  // namespace mfzeta
