#pragma once

// Shared fixtures: the two reference systems used across the suite.
//
//  sys_a: one vertex, two self-loops with ratio 1/3 and probabilities
//         (0.2, 0.8) -- the full 2-shift.
//  sys_b: two vertices, edges e1: 1->1, e2: 1->2, e3: 2->1, all ratios 1/3,
//         probabilities (0.5, 0.5, 1) -- the golden-mean shift.

#include <mfzeta/graph.hpp>

inline mfzeta::GdSystem make_sys_a() {
    using namespace mfzeta;
    std::vector<Vertex> v{{"a"}};
    std::vector<Edge> e{
        {"e1", 0, 0, 1.0 / 3.0, 0.2},
        {"e2", 0, 0, 1.0 / 3.0, 0.8},
    };
    return GdSystem(v, e);
}

inline mfzeta::GdSystem make_sys_b() {
    using namespace mfzeta;
    std::vector<Vertex> v{{"1"}, {"2"}};
    std::vector<Edge> e{
        {"e1", 0, 0, 1.0 / 3.0, 0.5},
        {"e2", 0, 1, 1.0 / 3.0, 0.5},
        {"e3", 1, 0, 1.0 / 3.0, 1.0},
    };
    return GdSystem(v, e);
}

inline const double kGolden = 0.5 * (1.0 + std::sqrt(5.0));

// Binary Shannon entropy in nats.
inline double entropy2(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}
