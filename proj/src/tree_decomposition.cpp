#include "dynsp/tree_decomposition.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace dynsp {

VertexOrder VertexOrder::from_sequence(std::vector<Vertex> sequence) {
    VertexOrder o;
    o.rank.assign(sequence.size(), kNoVertex);
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const Vertex v = sequence[i];
        if (v >= sequence.size() || o.rank[v] != kNoVertex)
            throw std::invalid_argument("vertex order is not a bijection");
        o.rank[v] = static_cast<std::uint32_t>(i);
    }
    o.sequence = std::move(sequence);
    return o;
}

int TreeNode::neighbor_index(Vertex u) const {
    for (std::size_t j = 0; j < neighbors.size(); ++j)
        if (neighbors[j] == u) return static_cast<int>(j);
    return -1;
}

// ---------------------------------------------------------------------------
// LCA

void LcaIndex::build(std::span<const TreeNode> nodes, std::span<const Vertex> roots) {
    const std::size_t n = nodes.size();
    first_.assign(n, 0);
    tour_.clear();
    level_.clear();
    tour_.reserve(2 * n + roots.size() + 1);
    level_.reserve(2 * n + roots.size() + 1);
    tour_.push_back(kNoVertex);
    level_.push_back(0);
    // iterative DFS: (vertex, next child index)
    std::vector<std::pair<Vertex, std::size_t>> stack;
    for (Vertex r : roots) {
        stack.push_back({r, 0});
        first_[r] = static_cast<std::uint32_t>(tour_.size());
        tour_.push_back(r);
        level_.push_back(1);
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < nodes[v].children.size()) {
                const Vertex c = nodes[v].children[next++];
                first_[c] = static_cast<std::uint32_t>(tour_.size());
                tour_.push_back(c);
                level_.push_back(nodes[c].depth + 1);
                stack.push_back({c, 0});
            } else {
                stack.pop_back();
                if (!stack.empty()) {
                    const Vertex p = stack.back().first;
                    tour_.push_back(p);
                    level_.push_back(nodes[p].depth + 1);
                }
            }
        }
        tour_.push_back(kNoVertex);
        level_.push_back(0);
    }
    const std::size_t len = tour_.size();
    table_.clear();
    table_.emplace_back(len);
    for (std::size_t i = 0; i < len; ++i) table_[0][i] = static_cast<std::uint32_t>(i);
    for (std::size_t k = 1; (std::size_t{1} << k) <= len; ++k) {
        const std::size_t half = std::size_t{1} << (k - 1);
        const auto& prev = table_[k - 1];
        std::vector<std::uint32_t> cur(len - (std::size_t{1} << k) + 1);
        for (std::size_t i = 0; i < cur.size(); ++i) {
            const std::uint32_t a = prev[i], b = prev[i + half];
            cur[i] = level_[a] <= level_[b] ? a : b;
        }
        table_.push_back(std::move(cur));
    }
}

Vertex LcaIndex::query(Vertex u, Vertex v) const {
    if (u == v) return u;
    std::uint32_t l = first_[u], r = first_[v];
    if (l > r) std::swap(l, r);
    const unsigned k = std::bit_width(static_cast<std::uint32_t>(r - l + 1)) - 1;
    const std::uint32_t a = table_[k][l], b = table_[k][r + 1 - (1u << k)];
    return tour_[level_[a] <= level_[b] ? a : b];
}

// ---------------------------------------------------------------------------
// tree linking

void TreeDecomposition::link(bool keep_parents) {
    const std::size_t n = nodes.size();
    if (order.size() != n) throw std::logic_error("link: order size mismatch");
    for (Vertex v = 0; v < n; ++v) {
        TreeNode& x = nodes[v];
        x.vertex = v;
        x.children.clear();
        if (!keep_parents) {
            x.parent = kNoVertex;
            for (Vertex u : x.neighbors)
                if (x.parent == kNoVertex || order.rank[u] < order.rank[x.parent]) x.parent = u;
        }
    }
    roots.clear();
    // children in decreasing rank so traversal order is deterministic
    for (auto it = order.sequence.rbegin(); it != order.sequence.rend(); ++it) {
        const Vertex v = *it;
        if (nodes[v].parent == kNoVertex)
            roots.push_back(v);
        else
            nodes[nodes[v].parent].children.push_back(v);
    }
    std::size_t reached = 0;
    std::vector<Vertex> queue(roots.begin(), roots.end());
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const Vertex v = queue[head];
        ++reached;
        TreeNode& x = nodes[v];
        if (x.parent == kNoVertex) {
            x.depth = 0;
            x.ancestors.clear();
        } else {
            const TreeNode& p = nodes[x.parent];
            x.depth = p.depth + 1;
            x.ancestors = p.ancestors;
            x.ancestors.push_back(x.parent);
        }
        for (Vertex c : x.children) queue.push_back(c);
    }
    if (reached != n) throw std::runtime_error("tree parent links contain a cycle");
    for (Vertex v = 0; v < n; ++v) {
        TreeNode& x = nodes[v];
        const std::size_t d = x.neighbors.size();
        if (x.shortcuts.size() != d) x.shortcuts.resize(d, kInfDist);
        std::vector<std::size_t> idx(d);
        for (std::size_t j = 0; j < d; ++j) idx[j] = j;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return nodes[x.neighbors[a]].depth < nodes[x.neighbors[b]].depth;
        });
        std::vector<Vertex> nb(d);
        std::vector<Dist> sc(d);
        x.positions.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            nb[j] = x.neighbors[idx[j]];
            sc[j] = x.shortcuts[idx[j]];
            x.positions[j] = nodes[nb[j]].depth;
            if (x.positions[j] >= x.depth || x.ancestors[x.positions[j]] != nb[j])
                throw std::runtime_error("bag neighbour " + std::to_string(nb[j]) + " of " + std::to_string(v) +
                                         " is not an ancestor");
        }
        x.neighbors = std::move(nb);
        x.shortcuts = std::move(sc);
        x.distances.assign(x.depth + 1, kInfDist);
        x.distances[x.depth] = 0;
    }
    lca_index.build(nodes, roots);
}

std::vector<Vertex> TreeDecomposition::top_down_order() const {
    std::vector<Vertex> out(roots.begin(), roots.end());
    out.reserve(nodes.size());
    for (std::size_t head = 0; head < out.size(); ++head)
        for (Vertex c : nodes[out[head]].children) out.push_back(c);
    return out;
}

std::size_t TreeDecomposition::height() const {
    std::size_t h = 0;
    for (const TreeNode& x : nodes) h = std::max<std::size_t>(h, x.depth + 1);
    return h;
}

std::size_t TreeDecomposition::treewidth() const {
    std::size_t w = 0;
    for (const TreeNode& x : nodes) w = std::max(w, x.neighbors.size());
    return w;
}

// ---------------------------------------------------------------------------
// elimination

Elimination eliminate(const RoadNetwork& g, std::span<const std::uint8_t> eligible,
                      const std::vector<Vertex>* pinned) {
    return eliminate(DistGraph::from(g), eligible, pinned);
}

Elimination eliminate(const DistGraph& g, std::span<const std::uint8_t> eligible,
                      const std::vector<Vertex>* pinned) {
    const std::size_t n = g.vertex_count();
    if (eligible.size() != n) throw std::invalid_argument("eliminate: eligibility mask size mismatch");
    std::vector<std::vector<std::pair<Vertex, Dist>>> adj(n);
    for (Vertex v = 0; v < n; ++v) adj[v] = g.neighbors(v);
    Elimination out;
    out.bags.resize(n);
    std::vector<std::uint8_t> gone(n, 0);

    auto contract = [&](Vertex v) {
        gone[v] = 1;
        out.sequence.push_back(v);
        auto bag = std::move(adj[v]);
        adj[v].clear();
        for (const auto& [u, w] : bag) {
            auto& lst = adj[u];
            for (std::size_t i = 0; i < lst.size(); ++i)
                if (lst[i].first == v) {
                    lst[i] = lst.back();
                    lst.pop_back();
                    break;
                }
        }
        for (std::size_t i = 0; i < bag.size(); ++i) {
            for (std::size_t j = i + 1; j < bag.size(); ++j) {
                const auto [a, wa] = bag[i];
                const auto [b, wb] = bag[j];
                const Dist w = add(wa, wb);
                bool found = false;
                for (auto& e : adj[a])
                    if (e.first == b) {
                        found = true;
                        if (w < e.second) {
                            e.second = w;
                            for (auto& f : adj[b])
                                if (f.first == a) f.second = w;
                        }
                        break;
                    }
                if (!found) {
                    adj[a].push_back({b, w});
                    adj[b].push_back({a, w});
                }
            }
        }
        out.bags[v] = std::move(bag);
    };

    if (pinned) {
        for (Vertex v : *pinned) {
            if (v >= n) throw std::invalid_argument("eliminate: pinned vertex out of range");
            if (eligible[v] && !gone[v]) contract(v);
        }
    } else {
        using Entry = std::pair<std::size_t, Vertex>;
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        for (Vertex v = 0; v < n; ++v)
            if (eligible[v]) heap.push({adj[v].size(), v});
        while (!heap.empty()) {
            const auto [d, v] = heap.top();
            heap.pop();
            if (gone[v] || d != adj[v].size()) continue;
            const auto bag_copy = adj[v];
            contract(v);
            for (const auto& [u, w] : bag_copy)
                if (eligible[u] && !gone[u]) heap.push({adj[u].size(), u});
        }
    }
    for (Vertex v = 0; v < n; ++v) {
        if (gone[v]) continue;
        for (const auto& [u, w] : adj[v])
            if (v < u) out.remaining.push_back({{v, u}, w});
    }
    std::sort(out.remaining.begin(), out.remaining.end());
    return out;
}

TreeDecomposition mde_decompose(const RoadNetwork& g, const VertexOrder* pinned) {
    return mde_decompose(DistGraph::from(g), pinned);
}

TreeDecomposition mde_decompose(const DistGraph& g, const VertexOrder* pinned) {
    const std::size_t n = g.vertex_count();
    if (pinned && pinned->size() != n) throw std::invalid_argument("pinned order size does not match graph");
    if (pinned) (void)VertexOrder::from_sequence(pinned->sequence);  // bijection check
    std::vector<std::uint8_t> all(n, 1);
    Elimination e = eliminate(g, all, pinned ? &pinned->sequence : nullptr);
    TreeDecomposition t;
    t.nodes.resize(n);
    for (Vertex v = 0; v < n; ++v) {
        TreeNode& x = t.nodes[v];
        for (const auto& [u, w] : e.bags[v]) {
            x.neighbors.push_back(u);
            x.shortcuts.push_back(w);
        }
    }
    t.order = VertexOrder::from_sequence(std::move(e.sequence));
    t.link();
    return t;
}

// ---------------------------------------------------------------------------
// validation

std::vector<std::string> validate_decomposition(const RoadNetwork& g, const TreeDecomposition& t,
                                                bool check_shortcuts) {
    std::vector<std::string> bad;
    const std::size_t n = g.vertex_count();
    if (t.nodes.size() != n) {
        bad.push_back("property 1: tree has " + std::to_string(t.nodes.size()) + " nodes for " +
                      std::to_string(n) + " vertices");
        return bad;
    }
    // occurrence lists: occ[x] = nodes whose bag contains x
    std::vector<std::vector<Vertex>> occ(n);
    for (Vertex v = 0; v < n; ++v) {
        if (t.nodes[v].vertex != v) bad.push_back("property 1: node " + std::to_string(v) + " has wrong vertex");
        occ[v].push_back(v);
        for (Vertex u : t.nodes[v].neighbors) {
            if (u >= n) {
                bad.push_back("bag of " + std::to_string(v) + " names unknown vertex");
                continue;
            }
            occ[u].push_back(v);
        }
    }
    for (auto& o : occ) std::sort(o.begin(), o.end());
    for (const Edge& e : g.edges()) {
        std::vector<Vertex> both;
        std::set_intersection(occ[e.u].begin(), occ[e.u].end(), occ[e.v].begin(), occ[e.v].end(),
                              std::back_inserter(both));
        if (both.empty())
            bad.push_back("property 2: edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                          ") is in no bag");
    }
    std::vector<std::uint8_t> mark(n, 0);
    for (Vertex x = 0; x < n; ++x) {
        for (Vertex v : occ[x]) mark[v] = 1;
        std::size_t tops = 0;
        for (Vertex v : occ[x]) {
            const Vertex p = t.nodes[v].parent;
            if (p == kNoVertex || p >= n || !mark[p]) ++tops;
        }
        for (Vertex v : occ[x]) mark[v] = 0;
        if (tops != 1)
            bad.push_back("property 3: bags containing " + std::to_string(x) + " form " + std::to_string(tops) +
                          " disconnected pieces");
    }
    if (!check_shortcuts || t.order.size() != n) return bad;

    // sc(v,u) must equal the shortest v-u distance through vertices ranked below v
    std::vector<Dist> dist(n, kInfDist);
    std::vector<Vertex> touched;
    using Entry = std::pair<Dist, Vertex>;
    for (Vertex v = 0; v < n; ++v) {
        const std::uint32_t rv = t.order.rank[v];
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[v] = 0;
        touched.push_back(v);
        heap.push({0, v});
        while (!heap.empty()) {
            const auto [d, x] = heap.top();
            heap.pop();
            if (d > dist[x]) continue;
            if (x != v && t.order.rank[x] > rv) continue;  // higher vertices end paths
            for (const Arc& a : g.neighbors(x)) {
                const Dist nd = d + a.weight;
                if (nd < dist[a.to]) {
                    if (dist[a.to] == kInfDist) touched.push_back(a.to);
                    dist[a.to] = nd;
                    heap.push({nd, a.to});
                }
            }
        }
        std::vector<Vertex> expected;
        for (Vertex x : touched)
            if (t.order.rank[x] > rv) expected.push_back(x);
        std::vector<Vertex> have(t.nodes[v].neighbors);
        std::sort(expected.begin(), expected.end());
        std::sort(have.begin(), have.end());
        if (expected != have) bad.push_back("bag of " + std::to_string(v) + " differs from its contraction neighbourhood");
        const TreeNode& x = t.nodes[v];
        for (std::size_t j = 0; j < x.neighbors.size() && j < x.shortcuts.size(); ++j) {
            const Vertex u = x.neighbors[j];
            if (u < n && x.shortcuts[j] != dist[u])
                bad.push_back("shortcut (" + std::to_string(v) + "," + std::to_string(u) + ") is " +
                              std::to_string(x.shortcuts[j]) + ", preserved distance is " +
                              (dist[u] == kInfDist ? std::string("unreachable") : std::to_string(dist[u])));
        }
        for (Vertex y : touched) dist[y] = kInfDist;
        touched.clear();
    }
    return bad;
}

// ---------------------------------------------------------------------------
// snapshot

namespace {

constexpr std::array<char, 4> kMagic = {'D', 'S', 'P', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
    std::array<char, sizeof(T)> buf;
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(buf.data(), buf.size());
}

template <typename T>
T get(std::istream& in) {
    std::array<unsigned char, sizeof(T)> buf;
    if (!in.read(reinterpret_cast<char*>(buf.data()), buf.size()))
        throw std::runtime_error("snapshot truncated");
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(buf[i]) << (8 * i);
    return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const TreeDecomposition& t, bool with_labels) {
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kSnapshotVersion);
    put<std::uint32_t>(out, with_labels ? 1u : 0u);
    put<std::uint64_t>(out, t.nodes.size());
    for (Vertex v = 0; v < t.nodes.size(); ++v) put<std::uint32_t>(out, t.order.rank[v]);
    for (const TreeNode& x : t.nodes) put<std::uint32_t>(out, x.parent);
    for (const TreeNode& x : t.nodes) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(x.neighbors.size()));
        for (std::size_t j = 0; j < x.neighbors.size(); ++j) {
            put<std::uint32_t>(out, x.neighbors[j]);
            put<std::uint64_t>(out, x.shortcuts[j]);
        }
    }
    if (with_labels) {
        for (const TreeNode& x : t.nodes) {
            put<std::uint32_t>(out, static_cast<std::uint32_t>(x.distances.size()));
            for (Dist d : x.distances) put<std::uint64_t>(out, d);
        }
    }
    if (!out) throw std::runtime_error("snapshot write failed");
}

TreeDecomposition read_snapshot(std::istream& in, bool* has_labels) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw std::runtime_error("not a snapshot file");
    const auto version = get<std::uint32_t>(in);
    if (version != kSnapshotVersion) throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
    const auto flags = get<std::uint32_t>(in);
    const auto n64 = get<std::uint64_t>(in);
    if (n64 > kNoVertex) throw std::runtime_error("snapshot vertex count too large");
    const auto n = static_cast<std::size_t>(n64);
    std::vector<Vertex> sequence(n, kNoVertex);
    for (Vertex v = 0; v < n; ++v) {
        const auto r = get<std::uint32_t>(in);
        if (r >= n || sequence[r] != kNoVertex) throw std::runtime_error("snapshot ranks are not a permutation");
        sequence[r] = v;
    }
    TreeDecomposition t;
    t.order = VertexOrder::from_sequence(std::move(sequence));
    t.nodes.resize(n);
    for (TreeNode& x : t.nodes) {
        x.parent = get<std::uint32_t>(in);
        if (x.parent != kNoVertex && x.parent >= n) throw std::runtime_error("snapshot parent out of range");
    }
    for (TreeNode& x : t.nodes) {
        const auto d = get<std::uint32_t>(in);
        if (d > n) throw std::runtime_error("snapshot bag too large");
        x.neighbors.resize(d);
        x.shortcuts.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            x.neighbors[j] = get<std::uint32_t>(in);
            if (x.neighbors[j] >= n) throw std::runtime_error("snapshot bag vertex out of range");
            x.shortcuts[j] = get<std::uint64_t>(in);
        }
    }
    t.link(true);
    const bool labels = flags & 1u;
    if (labels) {
        for (TreeNode& x : t.nodes) {
            const auto len = get<std::uint32_t>(in);
            if (len != x.depth + 1) throw std::runtime_error("snapshot label length does not match tree depth");
            for (Dist& d : x.distances) d = get<std::uint64_t>(in);
        }
    }
    if (has_labels) *has_labels = labels;
    return t;
}

}  // namespace dynsp
