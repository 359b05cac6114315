#include <catch_amalgamated.hpp>

#include <mfzeta/thermo.hpp>

#include "test_systems.hpp"

using namespace mfzeta;

namespace {

Potential random_depth1(const GdSystem& sys, Rng& rng, double scale = 1.0) {
    std::vector<double> vals;
    for (int e = 0; e < sys.edge_count(); ++e)
        vals.push_back(scale * (2.0 * rng.next_double() - 1.0));
    return Potential::locally_constant(
        sys, 1, [&](const PathWord& w) { return vals[w.edges[0]]; });
}

MarkovMeasure random_markov(const GdSystem& sys, Rng& rng) {
    std::vector<double> pi(sys.edge_count(), 0.0);
    for (int v = 0; v < sys.vertex_count(); ++v) {
        double total = 0.0;
        for (int e : sys.out_edges(v)) {
            pi[e] = -std::log(1.0 - rng.next_double());  // exponential weights
            total += pi[e];
        }
        for (int e : sys.out_edges(v)) pi[e] /= total;
    }
    return MarkovMeasure(sys, pi);
}

}  // namespace

TEST_CASE("perron data with certificates") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("1x1 count matrix") {
        PerronData pd = perron(count_matrix(a));
        REQUIRE(pd.lambda == 2.0);
        REQUIRE(pd.u.size() == 1);
        REQUIRE_THAT(pd.u[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
        REQUIRE_THAT(pd.v[0], Catch::Matchers::WithinAbs(1.0, 1e-14));
    }

    SECTION("golden-mean count matrix") {
        PerronData pd = perron(count_matrix(b));
        REQUIRE_THAT(pd.lambda, Catch::Matchers::WithinAbs(kGolden, 1e-13));
        REQUIRE(pd.lambda_box.width() <= 1e-12);
        // u and v are proportional to (golden, 1).
        REQUIRE_THAT(pd.v[0] / pd.v[1], Catch::Matchers::WithinAbs(kGolden, 1e-11));
        REQUIRE_THAT(pd.u[0] / pd.u[1], Catch::Matchers::WithinAbs(kGolden, 1e-11));
        double su = pd.u[0] + pd.u[1];
        REQUIRE_THAT(su, Catch::Matchers::WithinAbs(1.0, 1e-13));
        REQUIRE_THAT(pd.u[0] * pd.v[0] + pd.u[1] * pd.v[1],
                     Catch::Matchers::WithinAbs(1.0, 1e-13));
    }

    SECTION("relabeling permutes the eigenvectors consistently") {
        std::vector<Vertex> v{{"z"}, {"y"}};  // sorts to (y, z)
        std::vector<Edge> e{
            {"e1", 0, 0, 1.0 / 3.0, 0.5},
            {"e2", 0, 1, 1.0 / 3.0, 0.5},
            {"e3", 1, 0, 1.0 / 3.0, 1.0},
        };
        GdSystem sys(v, e);
        PerronData pd = perron(count_matrix(sys));
        REQUIRE_THAT(pd.lambda, Catch::Matchers::WithinAbs(kGolden, 1e-12));
        // "y" (the old vertex 2) now sorts first.
        int yi = sys.vertex_index("y"), zi = sys.vertex_index("z");
        REQUIRE_THAT(pd.v[zi] / pd.v[yi], Catch::Matchers::WithinAbs(kGolden, 1e-11));
    }

    SECTION("periodic graphs still converge") {
        std::vector<Vertex> v{{"1"}, {"2"}};
        std::vector<Edge> e{
            {"a", 0, 1, 0.5, 1.0},
            {"b", 1, 0, 0.25, 1.0},
        };
        GdSystem sys(v, e);
        PerronData pd = perron(count_matrix(sys));
        REQUIRE_THAT(pd.lambda, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("exact pressure") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();
    Potential zero_a =
        Potential::locally_constant(a, 1, [](const PathWord&) { return 0.0; });
    Potential zero_b =
        Potential::locally_constant(b, 1, [](const PathWord&) { return 0.0; });

    PressureEstimate pa = pressure_exact(a, zero_a);
    REQUIRE_THAT(pa.value, Catch::Matchers::WithinAbs(std::log(2.0), 1e-13));
    REQUIRE(pa.width() <= 1e-12);

    PressureEstimate pb = pressure_exact(b, zero_b);
    REQUIRE_THAT(pb.value, Catch::Matchers::WithinAbs(std::log(kGolden), 1e-13));
    REQUIRE(pb.width() <= 1e-12);

    // Probabilities sum to one, so the weight potential has zero pressure.
    PressureEstimate pw = pressure_exact(a, builtin_phi(a));
    REQUIRE_THAT(pw.value, Catch::Matchers::WithinAbs(0.0, 1e-13));

    SECTION("enclosed potentials give pressure intervals") {
        Potential enc = Potential::enclosed(
            a, 1, [](const PathWord&) { return -0.1; },
            [](const PathWord&) { return 0.1; });
        PressureEstimate pe = pressure_exact(a, enc);
        REQUIRE(pe.box.lo <= std::log(2.0) - 0.1 + 1e-12);
        REQUIRE(pe.box.hi >= std::log(2.0) + 0.1 - 1e-12);
    }
}

TEST_CASE("finite-n pressure") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();
    Potential zero_a =
        Potential::locally_constant(a, 1, [](const PathWord&) { return 0.0; });
    Potential zero_b =
        Potential::locally_constant(b, 1, [](const PathWord&) { return 0.0; });

    REQUIRE_THAT(pressure_finite(a, zero_a, 10).value,
                 Catch::Matchers::WithinAbs(std::log(2.0), 1e-13));

    // Count the golden-mean words directly and compare.
    double expect = std::log(word_count(b, 12)) / 12.0;
    PressureEstimate pf = pressure_finite(b, zero_b, 12);
    REQUIRE_THAT(pf.value, Catch::Matchers::WithinAbs(expect, 1e-13));
    REQUIRE(std::abs(pf.value - std::log(kGolden)) < 0.06);

    // The weight potential telescopes at every n.
    for (int n : {1, 4, 9})
        REQUIRE_THAT(pressure_finite(a, builtin_phi(a), n).value,
                     Catch::Matchers::WithinAbs(0.0, 1e-13));

    SECTION("error decays like 1/n") {
        Rng rng(5);
        for (int rep = 0; rep < 5; ++rep) {
            Potential phi = random_depth1(b, rng);
            double exact = pressure_exact(b, phi).value;
            double e8 = std::abs(pressure_finite(b, phi, 8).value - exact);
            double e16 = std::abs(pressure_finite(b, phi, 16).value - exact);
            REQUIRE(e16 / e8 > 0.3);
            REQUIRE(e16 / e8 < 0.7);
        }
    }
}

TEST_CASE("matrix-power partition values agree with enumeration") {
    GdSystem b = make_sys_b();
    Rng rng(11);

    SECTION("depth-1 potential") {
        Potential phi = random_depth1(b, rng);
        auto logz = log_partition_sequence(b, phi, 9);
        for (int n = 1; n <= 9; ++n) {
            LogSumExp lse;
            for_each_word(b, n, [&](const PathWord& w) {
                lse.add(cylinder_sup_birkhoff(b, phi, w).hi);
            });
            REQUIRE_THAT(logz[n], Catch::Matchers::WithinAbs(lse.value(), 1e-10));
        }
    }

    SECTION("depth-2 potential with joint boundary optimization") {
        std::map<PathWord, double> table;
        for (const PathWord& w : admissible_words(b, 2))
            table[w] = 2.0 * rng.next_double() - 1.0;
        Potential pot = Potential::from_table(b, 2, table);
        auto logz = log_partition_sequence(b, pot, 9);
        for (int n = 1; n <= 9; ++n) {
            LogSumExp lse;
            for_each_word(b, n, [&](const PathWord& w) {
                lse.add(cylinder_sup_birkhoff(b, pot, w).hi);
            });
            REQUIRE_THAT(logz[n], Catch::Matchers::WithinAbs(lse.value(), 1e-10));
        }
    }
}

TEST_CASE("zeta partial sums") {
    GdSystem a = make_sys_a();
    Potential zero =
        Potential::locally_constant(a, 1, [](const PathWord&) { return 0.0; });

    REQUIRE(zeta_partial(a, zero, {0.0, 0.0}, 10) == std::complex<double>(0.0, 0.0));

    // At z = 1/4 the series telescopes to -log(1 - 1/2).
    std::complex<double> s = zeta_partial(a, zero, {0.25, 0.0}, 40);
    REQUIRE_THAT(s.real(), Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
    REQUIRE_THAT(s.imag(), Catch::Matchers::WithinAbs(0.0, 1e-14));

    // At the radius itself the partial sums diverge and the radius estimator
    // flags the boundary.
    ZetaRadiusEstimate zr = zeta_radius(a, zero, 64);
    REQUIRE_THAT(zr.sigma, Catch::Matchers::WithinAbs(0.5, 1e-12));
    REQUIRE(std::abs(0.5) >= zr.sigma - 1e-12);  // |z| = sigma: outside the disc
}

TEST_CASE("zeta radius matches pressure") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("closed forms") {
        Potential zero_a =
            Potential::locally_constant(a, 1, [](const PathWord&) { return 0.0; });
        REQUIRE_THAT(zeta_radius(a, zero_a, 64).sigma,
                     Catch::Matchers::WithinAbs(0.5, 1e-13));

        // At the dimension the radius is exactly one.
        const double t = std::log(2.0) / std::log(3.0);
        Potential lam = builtin_lambda(a);
        Potential tl = Potential::combine({{t, &lam}});
        REQUIRE_THAT(zeta_radius(a, tl, 64).sigma,
                     Catch::Matchers::WithinAbs(1.0, 1e-12));

        Potential zero_b =
            Potential::locally_constant(b, 1, [](const PathWord&) { return 0.0; });
        REQUIRE_THAT(zeta_radius(b, zero_b, 64).sigma,
                     Catch::Matchers::WithinAbs(1.0 / kGolden, 1e-12));
    }

    SECTION("random potentials: radius error small and decreasing in N") {
        Rng rng(31);
        for (const GdSystem* sys : {&a, &b}) {
            for (int rep = 0; rep < 10; ++rep) {
                Potential phi = random_depth1(*sys, rng);
                double exact = pressure_exact(*sys, phi).value;
                double prev = pos_inf();
                for (int N : {24, 48, 96, 200}) {
                    double err =
                        std::abs(zeta_radius(*sys, phi, N).neg_log_sigma - exact);
                    if (N == 200) REQUIRE(err <= 5e-3);
                    if (N > 24) REQUIRE(err <= prev + 1e-12);
                    prev = err;
                }
            }
        }
    }
}

TEST_CASE("bowen roots") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    REQUIRE_THAT(bowen_root(a, builtin_lambda(a)),
                 Catch::Matchers::WithinAbs(std::log(2.0) / std::log(3.0), 1e-12));
    REQUIRE_THAT(bowen_root(b, builtin_lambda(b)),
                 Catch::Matchers::WithinAbs(std::log(kGolden) / std::log(3.0), 1e-12));

    SECTION("single loop with ratio 1/2 has a point attractor") {
        std::vector<Vertex> v{{"a"}};
        std::vector<Edge> e{{"loop", 0, 0, 0.5, 1.0}};
        GdSystem s(v, e);
        REQUIRE_THAT(bowen_root(s, builtin_lambda(s)),
                     Catch::Matchers::WithinAbs(0.0, 1e-12));
    }

    SECTION("positive potentials are rejected") {
        Potential pos =
            Potential::locally_constant(a, 1, [](const PathWord&) { return 0.5; });
        REQUIRE_THROWS_AS(bowen_root(a, pos), NotNegative);
    }

    SECTION("the root zeroes the pressure") {
        double s = bowen_root(b, builtin_lambda(b));
        Potential lam = builtin_lambda(b);
        Potential sl = Potential::combine({{s, &lam}});
        REQUIRE(std::abs(pressure_exact(b, sl).value) < 1e-12);
    }

    SECTION("pressure in t is convex and strictly decreasing") {
        Potential lam = builtin_lambda(b);
        std::vector<double> ps;
        for (int k = 0; k <= 10; ++k) {
            double t = -1.0 + 0.3 * k;
            Potential tl = Potential::combine({{t, &lam}});
            ps.push_back(pressure_exact(b, tl).value);
        }
        for (std::size_t i = 0; i + 1 < ps.size(); ++i) REQUIRE(ps[i] > ps[i + 1]);
        for (std::size_t i = 0; i + 2 < ps.size(); ++i)
            REQUIRE(ps[i] - 2 * ps[i + 1] + ps[i + 2] >= -1e-9);
    }
}

TEST_CASE("parry measure") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("full shift reduces to fair coin flips") {
        ParryMeasure p = parry(a);
        REQUIRE_THAT(p.measure.edge_prob(0), Catch::Matchers::WithinAbs(0.5, 1e-13));
        REQUIRE_THAT(p.measure.edge_prob(1), Catch::Matchers::WithinAbs(0.5, 1e-13));
        REQUIRE_THAT(p.measure.entropy(),
                     Catch::Matchers::WithinAbs(std::log(2.0), 1e-12));
    }

    SECTION("golden identities") {
        ParryMeasure p = parry(b);
        REQUIRE_THAT(p.measure.edge_prob(b.edge_index("e1")),
                     Catch::Matchers::WithinAbs(1.0 / kGolden, 1e-12));
        REQUIRE_THAT(p.measure.edge_prob(b.edge_index("e2")),
                     Catch::Matchers::WithinAbs(1.0 / (kGolden * kGolden), 1e-12));
        REQUIRE_THAT(p.measure.edge_prob(b.edge_index("e3")),
                     Catch::Matchers::WithinAbs(1.0, 1e-12));
        double row = p.measure.edge_prob(0) + p.measure.edge_prob(1);
        REQUIRE_THAT(row, Catch::Matchers::WithinAbs(1.0, 1e-12));
        REQUIRE_THAT(p.measure.entropy(),
                     Catch::Matchers::WithinAbs(std::log(kGolden), 1e-11));
        REQUIRE(p.measure.stationarity_residual() < 1e-12);
    }

    SECTION("cylinder law from the eigen-data") {
        ParryMeasure p = parry(b);
        for (int n = 1; n <= 6; ++n) {
            double total = 0.0;
            for (const PathWord& w : admissible_words(b, n)) {
                double closed = p.cylinder_mass(b, w);
                double chained = p.measure.mass(w);
                REQUIRE_THAT(chained, Catch::Matchers::WithinAbs(closed, 1e-12));
                total += chained;
            }
            REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("gibbs states of depth-1 potentials") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("zero potential reduces to the parry measure") {
        Potential zero =
            Potential::locally_constant(b, 1, [](const PathWord&) { return 0.0; });
        MarkovMeasure g = gibbs_markov(b, zero);
        ParryMeasure p = parry(b);
        for (int e = 0; e < b.edge_count(); ++e)
            REQUIRE_THAT(g.edge_prob(e),
                         Catch::Matchers::WithinAbs(p.measure.edge_prob(e), 1e-12));
    }

    SECTION("weight potential gives the Bernoulli measure") {
        MarkovMeasure g = gibbs_markov(a, builtin_phi(a));
        REQUIRE_THAT(g.edge_prob(0), Catch::Matchers::WithinAbs(0.2, 1e-13));
        REQUIRE_THAT(g.edge_prob(1), Catch::Matchers::WithinAbs(0.8, 1e-13));
        REQUIRE_THAT(g.entropy(), Catch::Matchers::WithinAbs(entropy2(0.2), 1e-12));
    }

    SECTION("adding a constant leaves the transition weights unchanged") {
        Potential phi = builtin_phi(a);
        Potential lam = builtin_lambda(a);
        MarkovMeasure g1 = gibbs_markov(a, phi);
        // lambda is constant on this system, so q*phi + 0*lambda and
        // q*phi + c share Gibbs weights.
        Potential shifted = Potential::combine({{1.0, &phi}, {0.0, &lam}}, 0.37);
        MarkovMeasure g2 = gibbs_markov(a, shifted);
        for (int e = 0; e < a.edge_count(); ++e)
            REQUIRE_THAT(g1.edge_prob(e),
                         Catch::Matchers::WithinAbs(g2.edge_prob(e), 1e-13));
    }

    SECTION("variational identity h + mean = pressure") {
        Rng rng(101);
        for (const GdSystem* sys : {&a, &b}) {
            for (int rep = 0; rep < 25; ++rep) {
                Potential phi = random_depth1(*sys, rng);
                MarkovMeasure g = gibbs_markov(*sys, phi);
                double lhs = g.entropy() + g.mean_value(phi);
                double rhs = pressure_exact(*sys, phi).value;
                REQUIRE_THAT(lhs, Catch::Matchers::WithinAbs(rhs, 1e-9));
            }
        }
    }

    SECTION("candidate measures never beat the pressure") {
        Rng rng(202);
        for (const GdSystem* sys : {&a, &b}) {
            for (int rep = 0; rep < 100; ++rep) {
                Potential phi = random_depth1(*sys, rng);
                MarkovMeasure mu = random_markov(*sys, rng);
                double lhs = mu.entropy() + mu.mean_value(phi);
                REQUIRE(lhs <= pressure_exact(*sys, phi).value + 1e-9);
            }
        }
    }
}

TEST_CASE("markov measure mechanics") {
    GdSystem b = make_sys_b();
    Rng rng(303);
    for (int rep = 0; rep < 20; ++rep) {
        MarkovMeasure mu = random_markov(b, rng);
        REQUIRE(mu.stationarity_residual() < 1e-12);
        // Entropy formula cross-check.
        double h = 0.0;
        for (int e = 0; e < b.edge_count(); ++e) {
            double p = mu.edge_prob(e);
            if (p > 0)
                h -= mu.stationary(b.edge(e).from) * p * std::log(p);
        }
        REQUIRE_THAT(mu.entropy(), Catch::Matchers::WithinAbs(h, 1e-12));
        // Depth-2 cylinder masses sum to one.
        double total = 0.0;
        for (const PathWord& w : admissible_words(b, 2)) total += mu.mass(w);
        REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}
