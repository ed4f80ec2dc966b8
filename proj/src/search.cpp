#include "dynsp/search.hpp"

#include <stdexcept>

namespace dynsp {

SearchWorkspace& thread_workspace() {
    thread_local SearchWorkspace ws;
    return ws;
}

std::vector<Distance> dijkstra_sssp(const RoadNetwork& g, Vertex source) {
    if (source >= g.vertex_count()) throw std::out_of_range("dijkstra_sssp: source out of range");
    std::vector<Dist> dist(g.vertex_count(), kInfDist);
    using Entry = std::pair<Dist, Vertex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    dist[source] = 0;
    heap.push({0, source});
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const Arc& a : g.neighbors(v)) {
            const Dist nd = d + a.weight;
            if (nd < dist[a.to]) {
                dist[a.to] = nd;
                heap.push({nd, a.to});
            }
        }
    }
    std::vector<Distance> out(dist.size());
    for (std::size_t i = 0; i < dist.size(); ++i) out[i] = Distance::from_internal(dist[i]);
    return out;
}

Distance bidijkstra(const RoadNetwork& g, Vertex s, Vertex t) {
    if (s >= g.vertex_count() || t >= g.vertex_count()) throw std::out_of_range("bidijkstra: vertex out of range");
    if (s == t) return Distance{0};
    using Entry = std::pair<Dist, Vertex>;
    using Heap = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;
    SearchWorkspace& ws = thread_workspace();
    ws.prepare(g.vertex_count());
    Heap heap[2];
    ws.set(0, s, 0);
    ws.set(1, t, 0);
    heap[0].push({0, s});
    heap[1].push({0, t});
    Dist best = kInfDist;
    while (!heap[0].empty() && !heap[1].empty()) {
        if (heap[0].top().first + heap[1].top().first >= best) break;
        // expand the side with the smaller frontier key
        const int side = heap[0].top().first <= heap[1].top().first ? 0 : 1;
        const auto [d, v] = heap[side].top();
        heap[side].pop();
        if (d > ws.get(side, v)) continue;
        for (const Arc& a : g.neighbors(v)) {
            const Dist nd = d + a.weight;
            if (nd < ws.get(side, a.to)) {
                ws.set(side, a.to, nd);
                heap[side].push({nd, a.to});
                const Dist other = ws.get(side ^ 1, a.to);
                if (other < kInfDist) best = std::min(best, nd + other);
            }
        }
    }
    return Distance::from_internal(best);
}

}  // namespace dynsp
