// search.hpp - Dijkstra, bidirectional Dijkstra and the generic upward
// bidirectional search used by every contraction-hierarchy style query.
#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/types.hpp"

namespace dynsp {

std::vector<Distance> dijkstra_sssp(const RoadNetwork& g, Vertex source);

Distance bidijkstra(const RoadNetwork& g, Vertex s, Vertex t);

/// Two-sided tentative distance arrays with O(1) reset via version stamps.
/// One instance per thread; see thread_workspace().
class SearchWorkspace {
public:
    void prepare(std::size_t n) {
        if (dist_[0].size() < n) {
            for (int side = 0; side < 2; ++side) {
                dist_[side].resize(n, kInfDist);
                stamp_[side].resize(n, 0);
            }
        }
        if (++version_ == 0) {
            for (int side = 0; side < 2; ++side) std::fill(stamp_[side].begin(), stamp_[side].end(), 0);
            version_ = 1;
        }
    }
    Dist get(int side, Vertex v) const { return stamp_[side][v] == version_ ? dist_[side][v] : kInfDist; }
    void set(int side, Vertex v, Dist d) {
        stamp_[side][v] = version_;
        dist_[side][v] = d;
    }

private:
    std::vector<Dist> dist_[2];
    std::vector<std::uint32_t> stamp_[2];
    std::uint32_t version_ = 0;
};

SearchWorkspace& thread_workspace();

/// Bidirectional Dijkstra over "upward" arcs only (contraction-hierarchy
/// query). `for_each_up(v, fn)` must call fn(u, w) for each upward arc v->u.
/// Each side stops once its smallest key reaches the best meeting distance.
template <typename ForEachUp>
Distance upward_bidirectional_search(std::size_t n, Vertex s, Vertex t, ForEachUp&& for_each_up) {
    if (s == t) return Distance{0};
    using Entry = std::pair<Dist, Vertex>;
    using Heap = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;
    SearchWorkspace& ws = thread_workspace();
    ws.prepare(n);
    Heap heap[2];
    ws.set(0, s, 0);
    ws.set(1, t, 0);
    heap[0].push({0, s});
    heap[1].push({0, t});
    Dist best = kInfDist;
    bool done[2] = {false, false};
    int side = 0;
    while (!done[0] || !done[1]) {
        if (done[side]) side ^= 1;
        Heap& h = heap[side];
        if (h.empty() || h.top().first >= best) {
            done[side] = true;
            side ^= 1;
            continue;
        }
        const auto [d, v] = h.top();
        h.pop();
        if (d > ws.get(side, v)) {
            side ^= 1;
            continue;
        }
        const Dist other = ws.get(side ^ 1, v);
        if (other < kInfDist) best = std::min(best, d + other);
        for_each_up(v, [&](Vertex u, Dist w) {
            const Dist nd = add(d, w);
            if (nd < ws.get(side, u)) {
                ws.set(side, u, nd);
                h.push({nd, u});
            }
        });
        side ^= 1;
    }
    return Distance::from_internal(best);
}

}  // namespace dynsp
