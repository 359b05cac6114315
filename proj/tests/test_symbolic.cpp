#include <catch_amalgamated.hpp>

#include <mfzeta/symbolic.hpp>

#include <sstream>

#include "test_systems.hpp"

using namespace mfzeta;

namespace {

SymbolicPoint random_point(const GdSystem& sys, Rng& rng, int max_pre, int min_per) {
    // Random admissible preperiod, then a period that closes a cycle.
    const int pre_len = static_cast<int>(rng.next_u64() % (max_pre + 1));
    PathWord pre;
    int v = static_cast<int>(rng.next_u64() % sys.vertex_count());
    for (int k = 0; k < pre_len; ++k) {
        const auto& outs = sys.out_edges(v);
        int e = outs[rng.next_u64() % outs.size()];
        pre.edges.push_back(e);
        v = sys.edge(e).to;
    }
    // Walk until we can close the cycle at the starting vertex of the period.
    const int start = v;
    PathWord per;
    for (int k = 0; k < 64; ++k) {
        const auto& outs = sys.out_edges(v);
        int e = outs[rng.next_u64() % outs.size()];
        per.edges.push_back(e);
        v = sys.edge(e).to;
        if (v == start && per.length() >= min_per && (rng.next_u64() & 1)) break;
    }
    while (v != start) {  // force closure via the return machinery
        PathWord back = return_word(sys, per);
        per = concat(per, back);
        v = sys.word_term(per);
    }
    return SymbolicPoint(sys, pre, per);
}

}  // namespace

TEST_CASE("symbolic points canonicalize") {
    GdSystem a = make_sys_a();
    // e1e1 . (e1)^inf is the fixed point of e1.
    SymbolicPoint p(a, PathWord{{0, 0}}, PathWord{{0}});
    REQUIRE(p.preperiod().empty());
    REQUIRE(p.period().length() == 1);

    // Period e1e2e1e2 reduces to e1e2.
    SymbolicPoint q(a, {}, PathWord{{0, 1, 0, 1}});
    REQUIRE(q.period().length() == 2);

    // Rotated representations collapse to the same canonical form.
    SymbolicPoint r1(a, {}, PathWord{{0, 1}});
    SymbolicPoint r2(a, PathWord{{0}}, PathWord{{1, 0}});
    REQUIRE(r1 == r2);

    GdSystem b = make_sys_b();
    REQUIRE_THROWS(SymbolicPoint(b, {}, PathWord{{b.edge_index("e2")}}));
}

TEST_CASE("metric on path space") {
    GdSystem a = make_sys_a();
    MetricGamma half(0.5);

    SymbolicPoint i(a, {}, PathWord{{0}});
    SymbolicPoint j(a, {}, PathWord{{1}});
    REQUIRE(dgamma(i, i, half) == 0.0);
    REQUIRE(dgamma(i, j, half) == 1.0);

    SymbolicPoint k(a, PathWord{{0, 0}}, PathWord{{1}});
    REQUIRE(dgamma(k, i, half) == 0.25);  // common prefix e1e1

    REQUIRE_THROWS(MetricGamma(1.0));
    REQUIRE_THROWS(MetricGamma(0.0));
}

TEST_CASE("occupation measures carry exact multiples of 1/n") {
    GdSystem a = make_sys_a();

    SECTION("single atom") {
        SymbolicPoint i(a, {}, PathWord{{0, 1}});
        CylinderMeasure d = occupation_L(a, i, 1, 3);
        REQUIRE(d.mass(PathWord{{0}}) == 1.0);
        REQUIRE(d.mass(PathWord{{0, 1}}) == 1.0);
        REQUIRE(d.mass(PathWord{{1}}) == 0.0);
        d.validate(a);
    }

    SECTION("two shifts of the period-2 point") {
        SymbolicPoint i(a, {}, PathWord{{0, 1}});
        CylinderMeasure m = occupation_L(a, i, 2, 1);
        REQUIRE(m.mass(PathWord{{0}}) == 0.5);
        REQUIRE(m.mass(PathWord{{1}}) == 0.5);
    }

    SECTION("depth zero is just normalization") {
        SymbolicPoint i(a, {}, PathWord{{0}});
        CylinderMeasure m = occupation_L(a, i, 5, 0);
        REQUIRE(m.mass(PathWord{}) == 1.0);
    }

    SECTION("masses are integer multiples of 1/n") {
        Rng rng(7);
        for (int rep = 0; rep < 20; ++rep) {
            SymbolicPoint p = random_point(a, rng, 4, 1);
            int n = 1 + static_cast<int>(rng.next_u64() % 12);
            CylinderMeasure m = occupation_L(a, p, n, 6);
            for (const auto& [w, mass] : m.masses()) {
                double scaled = mass * n;
                REQUIRE(scaled == std::round(scaled));
            }
            m.validate(a);
        }
    }
}

TEST_CASE("periodic-completion occupation measures") {
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();

    SECTION("fixed point of a loop") {
        CylinderMeasure m = occupation_M(a, PathWord{{0}}, 1);
        REQUIRE(m.mass(PathWord{{0}}) == 1.0);
    }

    SECTION("word e2 on the two-vertex system closes through e3") {
        PathWord e2{{b.edge_index("e2")}};
        CylinderMeasure m = occupation_M(b, e2, 1);
        REQUIRE(m.mass(PathWord{{b.edge_index("e2")}}) == 0.5);
        REQUIRE(m.mass(PathWord{{b.edge_index("e3")}}) == 0.5);
    }

    SECTION("two cyclic shifts of e1e2") {
        CylinderMeasure m = occupation_M(a, PathWord{{0, 1}}, 2);
        REQUIRE(m.mass(PathWord{{0, 1}}) == 0.5);
        REQUIRE(m.mass(PathWord{{1, 0}}) == 0.5);
        m.validate(a);
    }

    SECTION("shift invariance on the cycle") {
        for (const PathWord& w : admissible_words(b, 3)) {
            CylinderMeasure m = occupation_M(b, w, 2);
            m.validate(b);
            // Depth-1 masses equal edge frequencies along the cycle; the
            // measure of a length-2 cylinder telescopes through its head.
            double total = 0.0;
            for (const auto& [word, mass] : m.masses())
                if (word.length() == 1) total += mass;
            REQUIRE_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
    }
}

TEST_CASE("lipschitz-dual distance encloses the point metric") {
    GdSystem a = make_sys_a();
    MetricGamma half(0.5);
    const int D = 12;

    SECTION("identical measures have zero lower endpoint") {
        SymbolicPoint i(a, {}, PathWord{{0}});
        CylinderMeasure m = occupation_L(a, i, 4, D);
        Interval d = ldistance(m, m, half, D);
        REQUIRE(d.lo == 0.0);
        REQUIRE(d.hi <= std::pow(0.5, D) + 1e-15);
    }

    SECTION("two distinct atoms reproduce the metric") {
        SymbolicPoint i(a, {}, PathWord{{0}});
        SymbolicPoint j(a, {}, PathWord{{1}});
        CylinderMeasure mi = occupation_L(a, i, 1, 4);
        CylinderMeasure mj = occupation_L(a, j, 1, 4);
        Interval d = ldistance(mi, mj, half, 4);
        REQUIRE(d.lo <= 1.0);
        REQUIRE(d.hi >= 1.0);
        REQUIRE(d.width() <= 0.0625 + 1e-15);
    }

    SECTION("kantorovich consistency over random atom pairs") {
        GdSystem b = make_sys_b();
        Rng rng(20240601);
        int cases = 0;
        while (cases < 200) {
            const GdSystem& sys = (rng.next_u64() & 1) ? a : b;
            SymbolicPoint p = random_point(sys, rng, 5, 1);
            SymbolicPoint q = random_point(sys, rng, 5, 1);
            CylinderMeasure mp = occupation_L(sys, p, 1, D);
            CylinderMeasure mq = occupation_L(sys, q, 1, D);
            Interval d = ldistance(mp, mq, half, D);
            double exact = dgamma(p, q, half);
            REQUIRE(d.lo <= exact + 1e-15);
            REQUIRE(d.hi >= exact - 1e-15);
            ++cases;
        }
    }

    SECTION("depth mismatch is rejected") {
        SymbolicPoint i(a, {}, PathWord{{0}});
        CylinderMeasure shallow = occupation_L(a, i, 1, 2);
        CylinderMeasure deep = occupation_L(a, i, 1, 6);
        REQUIRE_THROWS_AS(ldistance(shallow, deep, half, 6), DepthMismatch);
    }
}

TEST_CASE("occupation closeness bound for L versus M") {
    // For words u of length n and arbitrary continuations k, l, the distance
    // between the n-shift occupation of u.k and the cycle occupation of u
    // is at most 1/(n(1-gamma)) + 2|V|/n plus the truncation tail.
    GdSystem a = make_sys_a();
    GdSystem b = make_sys_b();
    MetricGamma half(0.5);
    const int D = 16;
    Rng rng(99);
    for (const GdSystem* sys : {&a, &b}) {
        for (int n : {4, 8, 16, 32}) {
            for (int rep = 0; rep < 25; ++rep) {
                // Random admissible u of length n with a random continuation.
                SymbolicPoint uk = random_point(*sys, rng, n + 4, 1);
                PathWord u = uk.prefix(static_cast<std::size_t>(n));
                CylinderMeasure lm = occupation_L(*sys, uk, n, D);
                CylinderMeasure mm = occupation_M(*sys, u, D);
                Interval d = ldistance(lm, mm, half, D);
                double bound = 1.0 / (n * (1.0 - half.gamma)) +
                               2.0 * sys->vertex_count() / static_cast<double>(n) +
                               std::pow(half.gamma, D) / (1.0 - half.gamma);
                REQUIRE(d.hi <= bound);
            }
        }
    }
}

TEST_CASE("cylinder measure CSV output") {
    GdSystem a = make_sys_a();
    CylinderMeasure m = occupation_M(a, PathWord{{0, 1}}, 2);
    std::ostringstream os;
    m.write_csv(a, os);
    REQUIRE(os.str().rfind("word,mass\n", 0) == 0);
    REQUIRE(os.str().find("e1.e2,0.5") != std::string::npos);
}
