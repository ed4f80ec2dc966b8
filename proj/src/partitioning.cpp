#include "dynsp/partitioning.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dynsp/rng.hpp"

namespace dynsp {

namespace {

constexpr std::uint32_t kUnassigned = 0xffffffffu;

struct Bounds {
    std::size_t lo;
    std::size_t hi;
};

Bounds balance_bounds(std::size_t n, std::size_t k) {
    const double ideal = static_cast<double>(n) / static_cast<double>(k);
    return {static_cast<std::size_t>(std::floor(0.75 * ideal)), static_cast<std::size_t>(std::ceil(1.25 * ideal))};
}

std::vector<Vertex> farthest_point_seeds(const RoadNetwork& g, std::size_t k, Rng& rng) {
    const std::size_t n = g.vertex_count();
    std::vector<std::size_t> hops(n, SIZE_MAX);
    std::vector<Vertex> seeds;
    std::deque<Vertex> queue;
    Vertex next = static_cast<Vertex>(rng.below(n));
    while (seeds.size() < k) {
        seeds.push_back(next);
        hops[next] = 0;
        queue.push_back(next);
        while (!queue.empty()) {
            const Vertex v = queue.front();
            queue.pop_front();
            for (const Arc& a : g.neighbors(v))
                if (hops[a.to] > hops[v] + 1) {
                    hops[a.to] = hops[v] + 1;
                    queue.push_back(a.to);
                }
        }
        // farthest vertex; unreachable ones count as infinitely far
        next = kNoVertex;
        for (Vertex v = 0; v < n; ++v)
            if (hops[v] != 0 && (next == kNoVertex || hops[v] > hops[next])) next = v;
        if (next == kNoVertex) break;
    }
    return seeds;
}

std::vector<std::uint32_t> grow_regions(const RoadNetwork& g, std::size_t k, Rng& rng) {
    const std::size_t n = g.vertex_count();
    const Bounds b = balance_bounds(n, k);
    const auto seeds = farthest_point_seeds(g, k, rng);
    std::vector<std::uint32_t> part(n, kUnassigned);
    std::vector<std::size_t> size(k, 0);
    std::vector<std::deque<Vertex>> frontier(k);
    auto take = [&](Vertex v, std::uint32_t p) {
        part[v] = p;
        ++size[p];
        for (const Arc& a : g.neighbors(v))
            if (part[a.to] == kUnassigned) frontier[p].push_back(a.to);
    };
    for (std::uint32_t p = 0; p < seeds.size(); ++p) take(seeds[p], p);
    for (;;) {
        std::uint32_t pick = kUnassigned;
        for (std::uint32_t p = 0; p < k; ++p) {
            while (!frontier[p].empty() && part[frontier[p].front()] != kUnassigned) frontier[p].pop_front();
            if (frontier[p].empty() || size[p] >= b.hi) continue;
            if (pick == kUnassigned || size[p] < size[pick]) pick = p;
        }
        if (pick == kUnassigned) break;
        const Vertex v = frontier[pick].front();
        frontier[pick].pop_front();
        take(v, pick);
    }
    // leftovers: attach to the smallest adjacent region, else the smallest region
    for (bool progress = true; progress;) {
        progress = false;
        bool pending = false;
        for (Vertex v = 0; v < n; ++v) {
            if (part[v] != kUnassigned) continue;
            std::uint32_t best = kUnassigned;
            for (const Arc& a : g.neighbors(v)) {
                const std::uint32_t q = part[a.to];
                if (q != kUnassigned && (best == kUnassigned || size[q] < size[best])) best = q;
            }
            if (best == kUnassigned) {
                pending = true;
                continue;
            }
            part[v] = best;
            ++size[best];
            progress = true;
        }
        if (!progress && pending) {
            for (Vertex v = 0; v < n; ++v)
                if (part[v] == kUnassigned) {
                    const auto smallest = static_cast<std::uint32_t>(
                        std::min_element(size.begin(), size.end()) - size.begin());
                    part[v] = smallest;
                    ++size[smallest];
                    progress = true;
                    break;
                }
        }
    }
    return part;
}

/// Neighbour counts of v per partition, as a small sorted list.
void count_neighbour_parts(const RoadNetwork& g, const std::vector<std::uint32_t>& part, Vertex v,
                           std::vector<std::pair<std::uint32_t, std::size_t>>& out) {
    out.clear();
    for (const Arc& a : g.neighbors(v)) {
        const std::uint32_t q = part[a.to];
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == q; });
        if (it == out.end())
            out.push_back({q, 1});
        else
            ++it->second;
    }
}

void rebalance(const RoadNetwork& g, std::size_t k, std::vector<std::uint32_t>& part) {
    const std::size_t n = g.vertex_count();
    const Bounds b = balance_bounds(n, k);
    std::vector<std::size_t> size(k, 0);
    for (auto p : part) ++size[p];
    std::vector<std::pair<std::uint32_t, std::size_t>> counts;
    for (std::size_t guard = 0; guard < n; ++guard) {
        // most violating region
        std::uint32_t worst = kUnassigned;
        bool shrink = false;
        std::size_t excess = 0;
        for (std::uint32_t p = 0; p < k; ++p) {
            if (size[p] > b.hi && size[p] - b.hi > excess) {
                worst = p, shrink = true, excess = size[p] - b.hi;
            } else if (size[p] < b.lo && b.lo - size[p] > excess) {
                worst = p, shrink = false, excess = b.lo - size[p];
            }
        }
        if (worst == kUnassigned) return;
        // best single boundary move out of (or into) `worst`
        long best_gain = 0;
        Vertex best_v = kNoVertex;
        std::uint32_t best_to = kUnassigned;
        for (Vertex v = 0; v < n; ++v) {
            const std::uint32_t p = part[v];
            if (shrink ? p != worst : p == worst) continue;
            count_neighbour_parts(g, part, v, counts);
            std::size_t own = 0;
            for (const auto& [q, c] : counts)
                if (q == p) own = c;
            for (const auto& [q, c] : counts) {
                if (q == p) continue;
                if (shrink ? size[q] + 1 > b.hi : (q != worst || size[p] <= b.lo)) continue;
                const long gain = static_cast<long>(c) - static_cast<long>(own);
                if (best_v == kNoVertex || gain > best_gain) {
                    best_gain = gain;
                    best_v = v;
                    best_to = q;
                }
            }
        }
        if (best_v == kNoVertex) return;  // no legal move; keep the best effort
        --size[part[best_v]];
        ++size[best_to];
        part[best_v] = best_to;
    }
}

void smooth(const RoadNetwork& g, std::size_t k, std::vector<std::uint32_t>& part) {
    const std::size_t n = g.vertex_count();
    const Bounds b = balance_bounds(n, k);
    std::vector<std::size_t> size(k, 0);
    for (auto p : part) ++size[p];
    std::vector<std::pair<std::uint32_t, std::size_t>> counts;
    for (int pass = 0; pass < 4; ++pass) {
        bool moved = false;
        for (Vertex v = 0; v < n; ++v) {
            const std::uint32_t p = part[v];
            count_neighbour_parts(g, part, v, counts);
            std::size_t own = 0;
            for (const auto& [q, c] : counts)
                if (q == p) own = c;
            std::uint32_t to = kUnassigned;
            std::size_t best = own;
            for (const auto& [q, c] : counts)
                if (q != p && c > best && size[q] + 1 <= b.hi && size[p] - 1 >= b.lo && size[p] > 1) {
                    best = c;
                    to = q;
                }
            if (to == kUnassigned) continue;
            part[v] = to;
            --size[p];
            ++size[to];
            moved = true;
        }
        if (!moved) break;
    }
}

std::size_t cut_of(const RoadNetwork& g, const std::vector<std::uint32_t>& part) {
    std::size_t cut = 0;
    for (const Edge& e : g.edges()) cut += part[e.u] != part[e.v];
    return cut;
}

bool balanced(std::size_t n, std::size_t k, const std::vector<std::uint32_t>& part) {
    const Bounds b = balance_bounds(n, k);
    std::vector<std::size_t> size(k, 0);
    for (auto p : part) ++size[p];
    for (auto s : size)
        if (s < b.lo || s > b.hi || s == 0) return false;
    return true;
}

}  // namespace

Partitioning Partitioning::from_assignment(const RoadNetwork& g, std::vector<std::uint32_t> assignment,
                                           std::size_t k) {
    const std::size_t n = g.vertex_count();
    if (assignment.size() != n) throw std::invalid_argument("assignment size does not match graph");
    Partitioning p;
    p.k = k;
    p.members.resize(k);
    p.boundary.resize(k);
    p.intra_edges.resize(k);
    p.is_boundary.assign(n, 0);
    for (Vertex v = 0; v < n; ++v) {
        if (assignment[v] >= k) throw std::invalid_argument("partition id out of range");
        p.members[assignment[v]].push_back(v);
    }
    for (const Edge& e : g.edges()) {
        if (assignment[e.u] == assignment[e.v]) {
            p.intra_edges[assignment[e.u]].push_back({e.u, e.v});
        } else {
            p.inter_edges.push_back({e.u, e.v});
            p.is_boundary[e.u] = p.is_boundary[e.v] = 1;
        }
    }
    for (Vertex v = 0; v < n; ++v)
        if (p.is_boundary[v]) p.boundary[assignment[v]].push_back(v);
    p.assignment = std::move(assignment);
    return p;
}

std::size_t Partitioning::boundary_count() const {
    std::size_t b = 0;
    for (const auto& x : boundary) b += x.size();
    return b;
}

void validate_partitioning(const RoadNetwork& g, const Partitioning& p) {
    const std::size_t n = g.vertex_count();
    if (p.assignment.size() != n) throw std::logic_error("assignment does not cover V");
    std::vector<int> seen(n, 0);
    for (std::size_t i = 0; i < p.k; ++i)
        for (Vertex v : p.members[i]) {
            if (p.assignment[v] != i) throw std::logic_error("member list disagrees with assignment");
            ++seen[v];
        }
    for (Vertex v = 0; v < n; ++v)
        if (seen[v] != 1) throw std::logic_error("vertex sets are not a disjoint cover");
    for (Vertex v = 0; v < n; ++v) {
        bool outside = false;
        for (const Arc& a : g.neighbors(v)) outside |= p.assignment[a.to] != p.assignment[v];
        if (outside != static_cast<bool>(p.is_boundary[v])) throw std::logic_error("boundary flag is wrong");
        const auto& b = p.boundary[p.assignment[v]];
        if (outside != std::binary_search(b.begin(), b.end(), v)) throw std::logic_error("boundary set is wrong");
    }
    std::size_t edges = p.inter_edges.size();
    for (const auto& e : p.inter_edges)
        if (!g.has_edge(e.first, e.second) || p.assignment[e.first] == p.assignment[e.second])
            throw std::logic_error("bad inter edge");
    for (std::size_t i = 0; i < p.k; ++i) {
        edges += p.intra_edges[i].size();
        for (const auto& e : p.intra_edges[i])
            if (!g.has_edge(e.first, e.second) || p.assignment[e.first] != i || p.assignment[e.second] != i)
                throw std::logic_error("bad intra edge");
    }
    if (edges != g.edge_count()) throw std::logic_error("edge classes do not cover E");
}

Partitioning partition_graph(const RoadNetwork& g, std::size_t k, std::uint64_t seed) {
    const std::size_t n = g.vertex_count();
    if (k == 0 || k > n)
        throw std::invalid_argument("partition count " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
    std::vector<std::uint32_t> best;
    if (k == 1) {
        best.assign(n, 0);
    } else if (k == n) {
        best.resize(n);
        for (Vertex v = 0; v < n; ++v) best[v] = v;
    } else {
        Rng rng(seed);
        std::size_t best_cut = SIZE_MAX;
        bool best_balanced = false;
        for (int attempt = 0; attempt < 4; ++attempt) {
            Rng local = rng.fork(static_cast<std::uint64_t>(attempt));
            auto part = grow_regions(g, k, local);
            rebalance(g, k, part);
            smooth(g, k, part);
            const bool ok = balanced(n, k, part);
            const std::size_t cut = cut_of(g, part);
            if (best.empty() || (ok && !best_balanced) || (ok == best_balanced && cut < best_cut)) {
                best = std::move(part);
                best_cut = cut;
                best_balanced = ok;
            }
        }
    }
    return Partitioning::from_assignment(g, std::move(best), k);
}

VertexOrder boundary_first_order(const RoadNetwork& g, const Partitioning& p, InteriorInterleave interleave) {
    const std::size_t n = g.vertex_count();
    std::vector<std::uint8_t> interior(n);
    for (Vertex v = 0; v < n; ++v) interior[v] = !p.is_boundary[v];
    Elimination inner = eliminate(g, interior);
    std::vector<Vertex> sequence;
    sequence.reserve(n);
    if (interleave == InteriorInterleave::Natural) {
        sequence = inner.sequence;
    } else {
        std::vector<std::vector<Vertex>> per(p.k);
        for (Vertex v : inner.sequence) per[p.assignment[v]].push_back(v);
        if (interleave == InteriorInterleave::Sequential) {
            for (const auto& list : per) sequence.insert(sequence.end(), list.begin(), list.end());
        } else {
            for (std::size_t round = 0; sequence.size() < inner.sequence.size(); ++round)
                for (const auto& list : per)
                    if (round < list.size()) sequence.push_back(list[round]);
        }
    }
    DistGraph overlay(n);
    for (const auto& [e, w] : inner.remaining) overlay.set_edge(e.first, e.second, w);
    Elimination outer = eliminate(overlay, p.is_boundary);
    sequence.insert(sequence.end(), outer.sequence.begin(), outer.sequence.end());
    return VertexOrder::from_sequence(std::move(sequence));
}

ClassifiedUpdates classify_updates(const Partitioning& p, const UpdateBatch& batch) {
    ClassifiedUpdates out;
    out.intra.resize(p.k);
    for (const EdgeUpdate& u : batch.updates) {
        if (p.assignment.at(u.u) == p.assignment.at(u.v))
            out.intra[p.assignment[u.u]].push_back(u);
        else
            out.inter.push_back(u);
    }
    return out;
}

TdPartition td_partition(const TreeDecomposition& t, const TdPartitionParams& params) {
    const std::size_t n = t.size();
    TdPartition out;
    out.params = params;
    out.subtree_size.assign(n, 1);
    const auto top_down = t.top_down_order();
    for (auto it = top_down.rbegin(); it != top_down.rend(); ++it)
        if (t.nodes[*it].parent != kNoVertex) out.subtree_size[t.nodes[*it].parent] += out.subtree_size[*it];

    const double unit = params.absolute_bounds ? 1.0 : static_cast<double>(n) / static_cast<double>(params.expected_partitions);
    const double lo = params.beta_lower * unit, hi = params.beta_upper * unit;
    std::vector<Vertex> candidates;
    for (auto it = t.order.sequence.rbegin(); it != t.order.sequence.rend(); ++it) {
        const Vertex v = *it;
        const TreeNode& x = t.nodes[v];
        if (x.parent == kNoVertex) continue;
        const double c = out.subtree_size[v];
        if (x.neighbors.size() <= params.bandwidth && c >= lo && c <= hi) candidates.push_back(v);
    }
    out.candidate_count = candidates.size();
    if (candidates.empty())
        throw std::runtime_error("tree partitioning found no candidate root; increase the bandwidth or widen the beta bounds");

    std::vector<std::uint8_t> admitted(n, 0);
    for (Vertex c : candidates) {
        bool blocked = false;
        for (Vertex a : t.nodes[c].ancestors)
            if (admitted[a]) {
                blocked = true;
                break;
            }
        if (blocked) continue;
        admitted[c] = 1;
        out.roots.push_back(c);
    }
    out.part_of.assign(n, kOverlay);
    out.members.resize(out.roots.size());
    out.boundary.resize(out.roots.size());
    for (std::uint32_t i = 0; i < out.roots.size(); ++i) {
        auto& m = out.members[i];
        m.push_back(out.roots[i]);
        for (std::size_t head = 0; head < m.size(); ++head) {
            out.part_of[m[head]] = i;
            for (Vertex c : t.nodes[m[head]].children) m.push_back(c);
        }
        out.boundary[i] = t.nodes[out.roots[i]].neighbors;
    }
    for (auto it = t.order.sequence.rbegin(); it != t.order.sequence.rend(); ++it)
        if (out.part_of[*it] == kOverlay) out.overlay.push_back(*it);
    return out;
}

void write_partitioning(std::ostream& out, const Partitioning& p) {
    out << "# k=" << p.k << " cut=" << p.cut_size() << " boundary=" << p.boundary_count() << '\n';
    for (Vertex v = 0; v < p.assignment.size(); ++v) out << v << ' ' << p.assignment[v] << '\n';
}

Partitioning read_partitioning(std::istream& in, const RoadNetwork& g) {
    std::vector<std::uint32_t> assignment(g.vertex_count(), kUnassigned);
    std::size_t k = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("k=");
            if (pos != std::string::npos) k = std::stoul(line.substr(pos + 2));
            continue;
        }
        std::istringstream ls(line);
        long long v = -1, part = -1;
        if (!(ls >> v >> part) || v < 0 || part < 0 || static_cast<std::size_t>(v) >= assignment.size())
            throw ParseError(lineno, "expected '<vertex> <partition>'");
        assignment[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(part);
        k = std::max<std::size_t>(k, static_cast<std::size_t>(part) + 1);
    }
    for (auto a : assignment)
        if (a == kUnassigned) throw ParseError(lineno, "partition file does not assign every vertex");
    return Partitioning::from_assignment(g, std::move(assignment), k);
}

void write_td_partition(std::ostream& out, const TdPartition& p) {
    out << "# k=" << p.partition_count() << " overlay=" << p.overlay.size() << " bandwidth=" << p.params.bandwidth
        << " ke=" << p.params.expected_partitions << " beta_l=" << p.params.beta_lower
        << " beta_u=" << p.params.beta_upper << '\n';
    out << "# roots";
    for (Vertex r : p.roots) out << ' ' << r;
    out << "\n# overlay";
    for (Vertex v : p.overlay) out << ' ' << v;
    out << '\n';
    for (Vertex v = 0; v < p.part_of.size(); ++v)
        out << v << ' ' << (p.part_of[v] == kOverlay ? -1 : static_cast<long long>(p.part_of[v])) << '\n';
}

}  // namespace dynsp
