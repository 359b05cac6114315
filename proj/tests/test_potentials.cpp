#include <catch_amalgamated.hpp>

#include <mfzeta/potentials.hpp>

#include <sstream>

#include "test_systems.hpp"

using namespace mfzeta;

TEST_CASE("builtin tables read straight from the system") {
    GdSystem a = make_sys_a();
    Potential lam = builtin_lambda(a);
    REQUIRE_THAT(lam.lo(PathWord{{0}}),
                 Catch::Matchers::WithinAbs(std::log(1.0 / 3.0), 1e-15));
    REQUIRE_THAT(lam.lo(PathWord{{1}}),
                 Catch::Matchers::WithinAbs(std::log(1.0 / 3.0), 1e-15));
    REQUIRE(lam.strictly_negative());

    Potential phi = builtin_phi(a);
    REQUIRE_THAT(phi.lo(PathWord{{0}}),
                 Catch::Matchers::WithinAbs(std::log(0.2), 1e-15));
    REQUIRE_THAT(phi.lo(PathWord{{1}}),
                 Catch::Matchers::WithinAbs(std::log(0.8), 1e-15));

    GdSystem b = make_sys_b();
    Potential phib = builtin_phi(b);
    REQUIRE(phib.lo(PathWord{{b.edge_index("e3")}}) == 0.0);  // p = 1
    Potential lamb = builtin_lambda(b);
    for (int e = 0; e < 3; ++e)
        REQUIRE_THAT(lamb.lo(PathWord{{e}}),
                     Catch::Matchers::WithinAbs(std::log(1.0 / 3.0), 1e-15));

    SECTION("a ratio of 0.9 still gives a negative entry") {
        std::vector<Vertex> v{{"a"}};
        std::vector<Edge> e{{"loop", 0, 0, 0.9, 1.0}};
        GdSystem s(v, e);
        REQUIRE(builtin_lambda(s).lo(PathWord{{0}}) == std::log(0.9));
        REQUIRE(builtin_lambda(s).strictly_negative());
    }
}

TEST_CASE("cylinder Birkhoff bounds") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("depth-1 sums are exact") {
        Potential phi = builtin_phi(a);
        Interval s = cylinder_sup_birkhoff(a, phi, PathWord{{0, 1}});
        REQUIRE(s.lo == s.hi);
        REQUIRE_THAT(s.lo, Catch::Matchers::WithinAbs(std::log(0.2) + std::log(0.8),
                                                      1e-14));
    }

    SECTION("boundary shifts maximize jointly over continuations") {
        std::map<PathWord, double> table{
            {PathWord{{0, 0}}, 0.0},  // e1e1
            {PathWord{{0, 1}}, 1.0},  // e1e2
            {PathWord{{1, 2}}, 5.0},  // e2e3
            {PathWord{{2, 0}}, 0.0},  // e3e1
            {PathWord{{2, 1}}, 0.0},  // e3e2
        };
        Potential pot = Potential::from_table(b, 2, table);
        Interval s = cylinder_sup_birkhoff(b, pot, PathWord{{0}});  // word e1
        REQUIRE(s.hi == 1.0);  // max over e1e1, e1e2
        REQUIRE(s.lo == 0.0);
    }

    SECTION("constant tables give n times the constant") {
        Potential c = Potential::locally_constant(b, 2,
                                                  [](const PathWord&) { return 2.5; });
        for (const PathWord& w : admissible_words(b, 5)) {
            Interval s = cylinder_sup_birkhoff(b, c, w);
            REQUIRE_THAT(s.lo, Catch::Matchers::WithinAbs(5 * 2.5, 1e-12));
            REQUIRE(s.lo == s.hi);
        }
    }

    SECTION("interval soundness against realized continuations") {
        Rng rng(404);
        std::map<PathWord, double> table;
        for (const PathWord& w : admissible_words(b, 2))
            table[w] = 2.0 * rng.next_double() - 1.0;
        Potential pot = Potential::from_table(b, 2, table);
        int checked = 0;
        auto words = admissible_words(b, 10);
        while (checked < 500) {
            int n = 2 + static_cast<int>(rng.next_u64() % 5);
            const PathWord& full = words[rng.next_u64() % words.size()];
            PathWord head{std::vector<int>(full.edges.begin(), full.edges.begin() + n)};
            // Realized Birkhoff sum along the concrete continuation.
            double sum = 0.0;
            for (int k = 0; k < n; ++k) {
                PathWord win{std::vector<int>(full.edges.begin() + k,
                                              full.edges.begin() + k + 2)};
                sum += table.at(win);
            }
            Interval bound = cylinder_sup_birkhoff(b, pot, head);
            REQUIRE(sum >= bound.lo - 1e-12);
            REQUIRE(sum <= bound.hi + 1e-12);
            ++checked;
        }
    }

    SECTION("subadditivity of the upper bound under concatenation") {
        Rng rng(777);
        std::map<PathWord, double> table;
        for (const PathWord& w : admissible_words(b, 2))
            table[w] = 2.0 * rng.next_double() - 1.0;
        Potential pot = Potential::from_table(b, 2, table);
        const double spread = pot.spread();
        const int m = 2;
        for (const PathWord& x : admissible_words(b, 3)) {
            for (const PathWord& y : admissible_words(b, 3)) {
                PathWord xy = concat(x, y);
                if (!b.word_admissible(xy)) continue;
                Interval sx = cylinder_sup_birkhoff(b, pot, x);
                Interval sy = cylinder_sup_birkhoff(b, pot, y);
                Interval sxy = cylinder_sup_birkhoff(b, pot, xy);
                REQUIRE(sxy.hi <= sx.hi + sy.hi + 1e-12);
                REQUIRE(sxy.hi >= sx.lo + sy.lo - (2 * m - 2) * spread - 1e-12);
            }
        }
    }
}

TEST_CASE("ratio enclosures") {
    GdSystem a = make_sys_a();
    RatioMap u(builtin_phi(a), builtin_lambda(a));

    SECTION("depth-1 words give exact points") {
        Interval v = u_enclosure(a, u, PathWord{{0, 1}});
        REQUIRE(v.lo == v.hi);
        const double expect =
            (std::log(0.2) + std::log(0.8)) / (2.0 * std::log(1.0 / 3.0));
        REQUIRE_THAT(v.lo, Catch::Matchers::WithinAbs(expect, 1e-14));
        REQUIRE_THAT(v.lo, Catch::Matchers::WithinAbs(0.83404, 1e-5));
    }

    SECTION("homogeneous words are length independent") {
        const double expect = std::log(0.8) / std::log(1.0 / 3.0);
        for (int n : {1, 3, 9}) {
            PathWord w{std::vector<int>(static_cast<std::size_t>(n), 1)};
            Interval v = u_enclosure(a, u, w);
            REQUIRE_THAT(v.lo, Catch::Matchers::WithinRel(expect, 1e-13));
        }
    }

    SECTION("zero numerator collapses to a point") {
        Potential zero =
            Potential::locally_constant(a, 1, [](const PathWord&) { return 0.0; });
        RatioMap u0(zero, builtin_lambda(a));
        Interval v = u_enclosure(a, u0, PathWord{{0, 0, 1}});
        REQUIRE(v.lo == 0.0);
        REQUIRE(v.hi == 0.0);
    }

    SECTION("denominators touching zero are rejected") {
        GdSystem b = make_sys_b();
        // p = 1 on one edge makes the weight potential only nonpositive.
        REQUIRE_THROWS_AS(RatioMap(builtin_phi(b), builtin_phi(b)),
                          DenominatorSignViolation);
    }
}

TEST_CASE("enclosure discretization") {
    GdSystem a = make_sys_a();
    MetricGamma half(0.5);

    SECTION("zero Holder constant reproduces the table") {
        auto f = [](const PathWord& w) { return static_cast<double>(w.edges[0]); };
        Potential p = discretize(a, 2, f, 0.0, 1.0, half);
        for (std::size_t i = 0; i < p.words().size(); ++i)
            REQUIRE(p.table_lo(i) == p.table_hi(i));
    }

    SECTION("constant functions stay within the claimed band") {
        const double c = 1.7, H = 3.0;
        const int m = 3;
        Potential p =
            discretize(a, m, [&](const PathWord&) { return c; }, H, 1.0, half);
        const double band = H * std::pow(half.gamma, m) / (1.0 - half.gamma);
        for (std::size_t i = 0; i < p.words().size(); ++i) {
            REQUIRE(p.table_lo(i) >= c - band);
            REQUIRE(p.table_hi(i) <= c + band);
        }
    }

    SECTION("distance-to-a-point function: brackets verified on a refinement") {
        // f(i) = d_gamma(i, fixed point of the first loop) is 1-Lipschitz;
        // sample every depth-3 cylinder at its periodic completion.
        SymbolicPoint fixed(a, {}, PathWord{{0}});
        auto f = [&](const SymbolicPoint& p) { return dgamma(p, fixed, half); };
        auto sample3 = [&](const PathWord& w) {
            return f(periodic_completion(a, w));
        };
        Potential p = discretize(a, 3, sample3, 1.0, 1.0, half);
        for (std::size_t i = 0; i < p.words().size(); ++i)
            REQUIRE(p.table_hi(i) - p.table_lo(i) <= 0.25 + 1e-15);
        // Depth-6 refinement: finer samples stay inside the coarse brackets.
        for (const PathWord& w : admissible_words(a, 6)) {
            double v = f(periodic_completion(a, w));
            PathWord head{std::vector<int>(w.edges.begin(), w.edges.begin() + 3)};
            REQUIRE(v >= p.lo(head) - 1e-15);
            REQUIRE(v <= p.hi(head) + 1e-15);
        }
    }

    SECTION("bad Holder data is rejected") {
        auto f = [](const PathWord&) { return 0.0; };
        REQUIRE_THROWS_AS(discretize(a, 2, f, -1.0, 1.0, half), BadHolderData);
        REQUIRE_THROWS_AS(discretize(a, 2, f, 1.0, 0.0, half), BadHolderData);
    }
}

TEST_CASE("potential tables load from CSV") {
    GdSystem b = make_sys_b();
    std::istringstream in("word,value\ne1,0.25\ne2,-1\ne3,4\n");
    Potential p = load_potential_csv(b, in);
    REQUIRE(p.depth() == 1);
    REQUIRE(p.lo(PathWord{{b.edge_index("e3")}}) == 4.0);

    std::istringstream enc("word,lo,hi\ne1,0,1\ne2,0,1\ne3,0,1\n");
    Potential q = load_potential_csv(b, enc);
    REQUIRE(q.kind() == PotentialKind::Enclosed);

    std::istringstream missing("word,value\ne1,0.25\n");
    REQUIRE_THROWS_AS(load_potential_csv(b, missing), ConfigError);
}
