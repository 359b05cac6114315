#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace mfzeta {

struct Vertex {
    std::string id;
};

struct Edge {
    std::string id;
    int from = -1;   // index of the initial vertex
    int to = -1;     // index of the terminal vertex
    double ratio = 0.0;  // contraction ratio, in (0,1)
    double prob = 0.0;   // transition probability, in (0,1]
};

// A finite admissible edge path. Edges are stored as indices into
// GdSystem::edges(), which are sorted lexicographically by edge id; every
// enumeration and matrix indexing in the library inherits that order.
struct PathWord {
    std::vector<int> edges;

    int length() const { return static_cast<int>(edges.size()); }
    bool empty() const { return edges.empty(); }
    bool operator==(const PathWord& o) const { return edges == o.edges; }
    bool operator<(const PathWord& o) const { return edges < o.edges; }
};

inline PathWord concat(const PathWord& a, const PathWord& b) {
    PathWord w = a;
    w.edges.insert(w.edges.end(), b.edges.begin(), b.edges.end());
    return w;
}

// ---------------------------------------------------------------------------
// GdSystem: a strongly connected directed multigraph with a contraction
// ratio and a probability on every edge. Immutable after construction; all
// operations on it are pure.
// ---------------------------------------------------------------------------

class GdSystem {
  public:
    GdSystem(std::vector<Vertex> vertices, std::vector<Edge> edges,
             std::vector<double> vertex_diameters = {}, bool osc_declared = false)
        : vertices_(std::move(vertices)),
          edges_(std::move(edges)),
          diameters_(std::move(vertex_diameters)),
          osc_declared_(osc_declared) {
        if (diameters_.empty()) diameters_.assign(vertices_.size(), 1.0);
        validate();
        build_adjacency();
    }

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Vertex>& vertices() const { return vertices_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<std::size_t>(e)]; }
    const Vertex& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
    double vertex_diameter(int v) const { return diameters_[static_cast<std::size_t>(v)]; }
    bool osc_declared() const { return osc_declared_; }

    // Out-edges of a vertex, in lexicographic edge-id order.
    const std::vector<int>& out_edges(int v) const {
        return out_[static_cast<std::size_t>(v)];
    }

    int vertex_index(const std::string& id) const {
        auto it = vertex_index_.find(id);
        return it == vertex_index_.end() ? -1 : it->second;
    }
    int edge_index(const std::string& id) const {
        auto it = edge_index_.find(id);
        return it == edge_index_.end() ? -1 : it->second;
    }

    // Vertex-indexed adjacency counts: entry (i,j) is the number of edges
    // from i to j, row-major.
    std::vector<double> adjacency_counts() const {
        const std::size_t n = vertices_.size();
        std::vector<double> b(n * n, 0.0);
        for (const Edge& e : edges_)
            b[static_cast<std::size_t>(e.from) * n + static_cast<std::size_t>(e.to)] += 1.0;
        return b;
    }

    bool word_admissible(const PathWord& w) const {
        for (std::size_t k = 0; k + 1 < w.edges.size(); ++k)
            if (edge(w.edges[k]).to != edge(w.edges[k + 1]).from) return false;
        return true;
    }

    int word_init(const PathWord& w) const { return edge(w.edges.front()).from; }
    int word_term(const PathWord& w) const { return edge(w.edges.back()).to; }

    double word_weight(const PathWord& w) const {
        double p = 1.0;
        for (int e : w.edges) p *= edge(e).prob;
        return p;
    }
    double word_ratio(const PathWord& w) const {
        double r = 1.0;
        for (int e : w.edges) r *= edge(e).ratio;
        return r;
    }
    double word_log_weight(const PathWord& w) const {
        double s = 0.0;
        for (int e : w.edges) s += std::log(edge(e).prob);
        return s;
    }
    double word_log_ratio(const PathWord& w) const {
        double s = 0.0;
        for (int e : w.edges) s += std::log(edge(e).ratio);
        return s;
    }

    // log diam K_i for the cylinder set of this word: the product of edge
    // ratios times the diameter assigned to the terminal vertex.
    double word_log_diam(const PathWord& w) const {
        return word_log_ratio(w) + std::log(vertex_diameter(word_term(w)));
    }

    std::string word_id(const PathWord& w) const {
        std::string s;
        for (std::size_t k = 0; k < w.edges.size(); ++k) {
            if (k) s += '.';
            s += edge(w.edges[k]).id;
        }
        return s;
    }

  private:
    void validate() {
        if (vertices_.empty()) throw ConfigError("system has no vertices");
        if (edges_.empty()) throw ConfigError("system has no edges");
        if (diameters_.size() != vertices_.size())
            throw ConfigError("vertex_diameters does not match vertex count");

        // Canonical vertex order is lexicographic by id; edge endpoints and
        // diameters given relative to the input order are remapped.
        std::vector<std::size_t> perm(vertices_.size());
        for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
            return vertices_[a].id < vertices_[b].id;
        });
        std::vector<int> new_pos(vertices_.size());
        std::vector<Vertex> sorted_vertices;
        std::vector<double> sorted_diams;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            new_pos[perm[i]] = static_cast<int>(i);
            sorted_vertices.push_back(vertices_[perm[i]]);
            sorted_diams.push_back(diameters_[perm[i]]);
        }
        vertices_ = std::move(sorted_vertices);
        diameters_ = std::move(sorted_diams);
        for (Edge& e : edges_) {
            if (e.from < 0 || e.from >= vertex_count() || e.to < 0 ||
                e.to >= vertex_count())
                throw ConfigError("edge '" + e.id + "' references unknown vertex");
            e.from = new_pos[static_cast<std::size_t>(e.from)];
            e.to = new_pos[static_cast<std::size_t>(e.to)];
        }
        for (std::size_t i = 0; i < vertices_.size(); ++i) {
            if (!vertex_index_.emplace(vertices_[i].id, static_cast<int>(i)).second)
                throw ConfigError("duplicate vertex id '" + vertices_[i].id + "'");
        }
        std::sort(edges_.begin(), edges_.end(),
                  [](const Edge& a, const Edge& b) { return a.id < b.id; });
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const Edge& e = edges_[i];
            if (!edge_index_.emplace(e.id, static_cast<int>(i)).second)
                throw ConfigError("duplicate edge id '" + e.id + "'");
            if (!(e.ratio > 0.0 && e.ratio < 1.0)) throw BadRatio(e.id);
            if (!(e.prob > 0.0 && e.prob <= 1.0))
                throw BadProbabilityVector(vertices_[static_cast<std::size_t>(e.from)].id);
        }
        for (double d : diameters_)
            if (!(d > 0.0)) throw ConfigError("vertex diameters must be positive");

        // Per-vertex stochasticity of the probability vectors.
        std::vector<double> row(vertices_.size(), 0.0);
        std::vector<int> outdeg(vertices_.size(), 0);
        for (const Edge& e : edges_) {
            row[static_cast<std::size_t>(e.from)] += e.prob;
            ++outdeg[static_cast<std::size_t>(e.from)];
        }
        for (std::size_t v = 0; v < vertices_.size(); ++v) {
            if (outdeg[v] == 0) throw NotStronglyConnected();
            if (std::abs(row[v] - 1.0) > 1e-12)
                throw BadProbabilityVector(vertices_[v].id);
        }

        check_strong_connectivity();
    }

    void check_strong_connectivity() const {
        const int n = vertex_count();
        auto reach = [&](bool forward) {
            std::vector<char> seen(static_cast<std::size_t>(n), 0);
            std::vector<int> stack{0};
            seen[0] = 1;
            while (!stack.empty()) {
                int v = stack.back();
                stack.pop_back();
                for (const Edge& e : edges_) {
                    int a = forward ? e.from : e.to;
                    int b = forward ? e.to : e.from;
                    if (a == v && !seen[static_cast<std::size_t>(b)]) {
                        seen[static_cast<std::size_t>(b)] = 1;
                        stack.push_back(b);
                    }
                }
            }
            return seen;
        };
        auto fwd = reach(true);
        auto bwd = reach(false);
        for (int v = 0; v < n; ++v)
            if (!fwd[static_cast<std::size_t>(v)] || !bwd[static_cast<std::size_t>(v)])
                throw NotStronglyConnected();
    }

    void build_adjacency() {
        out_.assign(vertices_.size(), {});
        for (std::size_t i = 0; i < edges_.size(); ++i)
            out_[static_cast<std::size_t>(edges_[i].from)].push_back(static_cast<int>(i));
    }

    std::vector<Vertex> vertices_;
    std::vector<Edge> edges_;
    std::vector<double> diameters_;
    bool osc_declared_ = false;
    std::vector<std::vector<int>> out_;
    std::map<std::string, int> vertex_index_;
    std::map<std::string, int> edge_index_;
};

// ---------------------------------------------------------------------------
// Construction from a JSON description:
//   { "vertices": ["a", ...],
//     "edges": [{"id": "e1", "from": "a", "to": "a",
//                "ratio": 0.3333, "prob": 0.2}, ...],
//     "vertex_diameters": {"a": 1.0},       // optional
//     "osc_declared": true }                 // optional
// ---------------------------------------------------------------------------

inline GdSystem build_system(const nlohmann::json& config) {
    using nlohmann::json;
    if (!config.is_object()) throw ConfigError("top-level config must be an object");
    if (!config.contains("vertices") || !config["vertices"].is_array())
        throw ConfigError("missing key 'vertices'");
    if (!config.contains("edges") || !config["edges"].is_array())
        throw ConfigError("missing key 'edges'");

    std::vector<Vertex> vertices;
    std::map<std::string, int> vid;
    for (const auto& v : config["vertices"]) {
        if (!v.is_string()) throw ConfigError("'vertices' entries must be strings");
        vid[v.get<std::string>()] = static_cast<int>(vertices.size());
        vertices.push_back({v.get<std::string>()});
    }

    std::vector<Edge> edges;
    for (const auto& e : config["edges"]) {
        if (!e.is_object()) throw ConfigError("'edges' entries must be objects");
        for (const char* key : {"id", "from", "to", "ratio", "prob"})
            if (!e.contains(key))
                throw ConfigError(std::string("edge missing key '") + key + "'");
        Edge edge;
        edge.id = e["id"].get<std::string>();
        const std::string from = e["from"].get<std::string>();
        const std::string to = e["to"].get<std::string>();
        if (!vid.count(from))
            throw ConfigError("edge '" + edge.id + "': unknown vertex '" + from + "'");
        if (!vid.count(to))
            throw ConfigError("edge '" + edge.id + "': unknown vertex '" + to + "'");
        edge.from = vid[from];
        edge.to = vid[to];
        edge.ratio = e["ratio"].get<double>();
        edge.prob = e["prob"].get<double>();
        edges.push_back(edge);
    }

    std::vector<double> diameters;
    if (config.contains("vertex_diameters")) {
        diameters.assign(vertices.size(), 1.0);
        for (const auto& [key, val] : config["vertex_diameters"].items()) {
            if (!vid.count(key))
                throw ConfigError("vertex_diameters: unknown vertex '" + key + "'");
            diameters[static_cast<std::size_t>(vid[key])] = val.get<double>();
        }
    }

    bool osc = config.value("osc_declared", false);
    return GdSystem(std::move(vertices), std::move(edges), std::move(diameters), osc);
}

inline GdSystem build_system_from_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(e.what());
    }
    return build_system(j);
}

// ---------------------------------------------------------------------------
// Word enumeration
// ---------------------------------------------------------------------------

inline double enumeration_cap() {
    if (const char* env = std::getenv("MFZETA_CAP")) {
        double cap = std::atof(env);
        if (cap > 0.0) return cap;
    }
    return kDefaultEnumerationCap;
}

// Number of admissible words of length n: the sum of all entries of the n-th
// power of the adjacency-count matrix. Saturates through double, which is
// exact for any count below 2^53.
inline double word_count(const GdSystem& sys, int n) {
    const std::size_t d = static_cast<std::size_t>(sys.vertex_count());
    std::vector<double> b = sys.adjacency_counts();
    std::vector<double> p(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) p[i * d + i] = 1.0;
    std::vector<double> tmp(d * d);
    int e = n;
    while (e > 0) {
        if (e & 1) {
            std::fill(tmp.begin(), tmp.end(), 0.0);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t k = 0; k < d; ++k) {
                    double pik = p[i * d + k];
                    if (pik == 0.0) continue;
                    for (std::size_t j = 0; j < d; ++j)
                        tmp[i * d + j] += pik * b[k * d + j];
                }
            p.swap(tmp);
        }
        std::fill(tmp.begin(), tmp.end(), 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t k = 0; k < d; ++k) {
                double bik = b[i * d + k];
                if (bik == 0.0) continue;
                for (std::size_t j = 0; j < d; ++j)
                    tmp[i * d + j] += bik * b[k * d + j];
            }
        b.swap(tmp);
        e >>= 1;
    }
    double total = 0.0;
    for (double x : p) total += x;
    return total;
}

// Visits every admissible word of length n exactly once, in lexicographic
// edge-id order, without materializing the list. Throws if the count would
// exceed the cap.
template <class Fn>
void for_each_word(const GdSystem& sys, int n, Fn&& fn,
                   double cap = enumeration_cap()) {
    if (n < 1) throw Error("word length must be >= 1");
    const double count = word_count(sys, n);
    if (!(count <= cap)) throw EnumerationCapExceeded(count, cap);

    PathWord w;
    w.edges.reserve(static_cast<std::size_t>(n));
    // Iterative DFS over out-edge choice indices.
    std::vector<std::size_t> choice(static_cast<std::size_t>(n), 0);
    int depth = 0;
    while (depth >= 0) {
        const std::vector<int>* options;
        if (depth == 0) {
            options = nullptr;  // all edges, already lexicographic
        } else {
            options = &sys.out_edges(sys.edge(w.edges.back()).to);
        }
        const std::size_t limit =
            depth == 0 ? static_cast<std::size_t>(sys.edge_count()) : options->size();
        std::size_t& c = choice[static_cast<std::size_t>(depth)];
        if (c >= limit) {
            c = 0;
            --depth;
            if (!w.edges.empty()) w.edges.pop_back();
            if (depth >= 0) ++choice[static_cast<std::size_t>(depth)];
            continue;
        }
        const int e = depth == 0 ? static_cast<int>(c) : (*options)[c];
        w.edges.push_back(e);
        if (depth + 1 == n) {
            fn(static_cast<const PathWord&>(w));
            w.edges.pop_back();
            ++c;
        } else {
            ++depth;
        }
    }
}

inline std::vector<PathWord> admissible_words(const GdSystem& sys, int n,
                                              double cap = enumeration_cap()) {
    std::vector<PathWord> out;
    for_each_word(sys, n, [&](const PathWord& w) { out.push_back(w); }, cap);
    return out;
}

// ---------------------------------------------------------------------------
// Lexicographically least shortest path between two vertices; empty when
// they coincide. Length is at most |V| - 1 by strong connectivity.
// ---------------------------------------------------------------------------

inline PathWord lex_shortest_path(const GdSystem& sys, int src, int dst) {
    if (src == dst) return {};

    const int n = sys.vertex_count();
    const int unreachable = n + 1;
    std::vector<int> dist(static_cast<std::size_t>(n), unreachable);
    dist[static_cast<std::size_t>(src)] = 0;
    for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (const Edge& e : sys.edges()) {
            int du = dist[static_cast<std::size_t>(e.from)];
            if (du + 1 < dist[static_cast<std::size_t>(e.to)]) {
                dist[static_cast<std::size_t>(e.to)] = du + 1;
                changed = true;
            }
        }
        if (!changed) break;
    }

    // Lexicographically least path of the optimal length, built level by
    // level: best[v] holds the least edge-id sequence realizing dist[v].
    std::vector<std::vector<std::string>> best(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> best_edges(static_cast<std::size_t>(n));
    for (int d = 1; d <= dist[static_cast<std::size_t>(dst)]; ++d) {
        for (int v = 0; v < n; ++v) {
            if (dist[static_cast<std::size_t>(v)] != d) continue;
            bool have = false;
            std::vector<std::string> bid;
            std::vector<int> bed;
            for (int ei = 0; ei < sys.edge_count(); ++ei) {
                const Edge& e = sys.edge(ei);
                if (e.to != v) continue;
                if (dist[static_cast<std::size_t>(e.from)] != d - 1) continue;
                std::vector<std::string> cand = best[static_cast<std::size_t>(e.from)];
                cand.push_back(e.id);
                if (!have || cand < bid) {
                    have = true;
                    bid = std::move(cand);
                    bed = best_edges[static_cast<std::size_t>(e.from)];
                    bed.push_back(ei);
                }
            }
            best[static_cast<std::size_t>(v)] = std::move(bid);
            best_edges[static_cast<std::size_t>(v)] = std::move(bed);
        }
    }
    PathWord h;
    h.edges = best_edges[static_cast<std::size_t>(dst)];
    return h;
}

// Return path of a word: the shortest admissible path from t(word) back to
// i(word), empty when they coincide, ties broken lexicographically by edge
// id, so that word . return . word is admissible.
inline PathWord return_word(const GdSystem& sys, const PathWord& word) {
    if (word.empty()) throw Error("return_word: empty word");
    return lex_shortest_path(sys, sys.word_term(word), sys.word_init(word));
}

// ---------------------------------------------------------------------------
// Higher-block recoding: the system whose vertices are admissible words of
// length m-1 and whose edges are admissible words of length m. Each new edge
// carries the ratio and probability of its final original edge, so the block
// system's depth-1 potentials represent depth-m potentials on the original.
// ---------------------------------------------------------------------------

struct BlockRecoding {
    GdSystem system;
    std::vector<PathWord> vertex_words;  // per new vertex, length m-1
    std::vector<PathWord> edge_words;    // per new edge, length m
};

inline BlockRecoding higher_block_system(const GdSystem& sys, int m,
                                         double cap = enumeration_cap()) {
    if (m < 2) throw Error("higher_block_system requires m >= 2");
    std::vector<PathWord> states = admissible_words(sys, m - 1, cap);
    std::map<PathWord, int> state_index;
    std::vector<Vertex> vertices;
    for (std::size_t i = 0; i < states.size(); ++i) {
        state_index[states[i]] = static_cast<int>(i);
        vertices.push_back({sys.word_id(states[i])});
    }
    std::vector<Edge> edges;
    std::vector<PathWord> edge_words;
    for (const PathWord& w : admissible_words(sys, m, cap)) {
        PathWord head{std::vector<int>(w.edges.begin(), w.edges.end() - 1)};
        PathWord tail{std::vector<int>(w.edges.begin() + 1, w.edges.end())};
        const Edge& last = sys.edge(w.edges.back());
        Edge e;
        e.id = sys.word_id(w);
        e.from = state_index.at(head);
        e.to = state_index.at(tail);
        e.ratio = last.ratio;
        e.prob = last.prob;
        edges.push_back(e);
        edge_words.push_back(w);
    }
    GdSystem block(std::move(vertices), std::move(edges), {}, sys.osc_declared());
    // Re-align word lists with the block system's canonical edge order.
    std::vector<PathWord> vw(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        int nv = block.vertex_index(sys.word_id(states[i]));
        vw[static_cast<std::size_t>(nv)] = states[i];
    }
    std::vector<PathWord> ew(edge_words.size());
    for (const PathWord& w : edge_words) {
        int ne = block.edge_index(sys.word_id(w));
        ew[static_cast<std::size_t>(ne)] = w;
    }
    return BlockRecoding{std::move(block), std::move(vw), std::move(ew)};
}

}  // namespace mfzeta
