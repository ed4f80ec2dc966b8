#include "dynsp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dynsp/rng.hpp"

namespace dynsp {

namespace {

struct DisjointSets {
    std::vector<Vertex> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    Vertex find(Vertex v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    bool unite(Vertex a, Vertex b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

}  // namespace

RoadNetwork random_connected_graph(std::size_t n, std::size_t extra_edges, Weight max_weight, std::uint64_t seed) {
    if (max_weight == 0) throw std::invalid_argument("max_weight must be positive");
    Rng rng(seed);
    RoadNetwork g(n);
    std::vector<Vertex> label(n);
    std::iota(label.begin(), label.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(label[i - 1], label[rng.below(i)]);
    auto weight = [&] { return static_cast<Weight>(rng.between(1, max_weight)); };
    for (std::size_t i = 1; i < n; ++i) g.add_edge(label[i], label[rng.below(i)], weight());
    const std::size_t max_edges = n * (n - 1) / 2;
    for (std::size_t added = 0; added < extra_edges && g.edge_count() < max_edges;) {
        const auto u = static_cast<Vertex>(rng.below(n));
        const auto v = static_cast<Vertex>(rng.below(n));
        if (u == v || g.has_edge(u, v)) continue;
        g.add_edge(u, v, weight());
        ++added;
    }
    return g;
}

RoadNetwork grid_graph(std::size_t rows, std::size_t cols, Weight max_weight, std::uint64_t seed) {
    Rng rng(seed);
    RoadNetwork g(rows * cols);
    auto id = [&](std::size_t r, std::size_t c) { return static_cast<Vertex>(r * cols + c); };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) g.add_edge(id(r, c), id(r, c + 1), static_cast<Weight>(rng.between(1, max_weight)));
            if (r + 1 < rows) g.add_edge(id(r, c), id(r + 1, c), static_cast<Weight>(rng.between(1, max_weight)));
        }
    return g;
}

RoadNetwork road_like_graph(std::size_t n, std::uint64_t seed, std::size_t k) {
    Rng rng(seed);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = rng.uniform();
        y[i] = rng.uniform();
    }
    // bucket grid with about two points per cell
    const auto cells = static_cast<std::size_t>(std::max(1.0, std::sqrt(static_cast<double>(n) / 2.0)));
    std::vector<std::vector<Vertex>> bucket(cells * cells);
    auto cell_of = [&](double c) { return std::min(cells - 1, static_cast<std::size_t>(c * cells)); };
    for (Vertex i = 0; i < n; ++i) bucket[cell_of(y[i]) * cells + cell_of(x[i])].push_back(i);
    auto length = [&](Vertex a, Vertex b) {
        const double d = std::hypot(x[a] - x[b], y[a] - y[b]);
        return static_cast<Weight>(std::lround(d * 10000.0) + 1);
    };
    RoadNetwork g(n);
    std::vector<std::pair<double, Vertex>> near;
    for (Vertex i = 0; i < n; ++i) {
        const auto cx = static_cast<long>(cell_of(x[i])), cy = static_cast<long>(cell_of(y[i]));
        for (long ring = 1;; ++ring) {
            near.clear();
            for (long dy = -ring; dy <= ring; ++dy)
                for (long dx = -ring; dx <= ring; ++dx) {
                    const long bx = cx + dx, by = cy + dy;
                    if (bx < 0 || by < 0 || bx >= static_cast<long>(cells) || by >= static_cast<long>(cells)) continue;
                    for (Vertex j : bucket[by * cells + bx])
                        if (j != i) near.push_back({std::hypot(x[i] - x[j], y[i] - y[j]), j});
                }
            if (near.size() >= k || ring >= static_cast<long>(cells)) break;
        }
        const std::size_t take = std::min(k, near.size());
        std::partial_sort(near.begin(), near.begin() + take, near.end());
        for (std::size_t j = 0; j < take; ++j) g.add_edge(i, near[j].second, length(i, near[j].second));
    }
    // stitch components to the component of vertex 0 via the closest pair found by scanning
    DisjointSets ds(n);
    for (const Edge& e : g.edges()) ds.unite(e.u, e.v);
    for (Vertex i = 0; i < n; ++i) {
        if (ds.find(i) == ds.find(0)) continue;
        Vertex best = kNoVertex;
        double best_d = 0;
        for (Vertex j = 0; j < n; ++j) {
            if (ds.find(j) != ds.find(0)) continue;
            const double d = std::hypot(x[i] - x[j], y[i] - y[j]);
            if (best == kNoVertex || d < best_d) {
                best = j;
                best_d = d;
            }
        }
        g.add_edge(i, best, length(i, best));
        ds.unite(i, best);
    }
    return g;
}

}  // namespace dynsp
