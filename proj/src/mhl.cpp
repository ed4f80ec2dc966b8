#include "dynsp/mhl.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "dynsp/parallel.hpp"
#include "dynsp/search.hpp"

namespace dynsp {

int bag_index(const TreeDecomposition& t, Vertex v, Vertex u) {
    const TreeNode& x = t.nodes[v];
    const std::uint32_t d = t.nodes[u].depth;
    const auto it = std::lower_bound(x.positions.begin(), x.positions.end(), d);
    if (it == x.positions.end() || *it != d) return -1;
    const auto j = static_cast<std::size_t>(it - x.positions.begin());
    return x.neighbors[j] == u ? static_cast<int>(j) : -1;
}

BaseWeight graph_weights(const RoadNetwork& g) {
    return [&g](Vertex u, Vertex v) -> Dist {
        const auto w = g.weight(u, v);
        return w ? Dist{*w} : kInfDist;
    };
}

void ShortcutSupport::build(const TreeDecomposition& t) {
    const std::size_t n = t.size();
    offset_.assign(n + 1, 0);
    for (Vertex v = 0; v < n; ++v) offset_[v + 1] = offset_[v] + t.nodes[v].neighbors.size();
    std::vector<std::size_t> count(entry_count() + 1, 0);
    auto for_each_pair = [&](auto&& fn) {
        for (Vertex x = 0; x < n; ++x) {
            const auto& nb = t.nodes[x].neighbors;
            for (std::size_t q = 1; q < nb.size(); ++q) {
                const Vertex a = nb[q];  // deeper endpoint owns the entry
                for (std::size_t p = 0; p < q; ++p) {
                    const int j = bag_index(t, a, nb[p]);
                    if (j < 0) throw std::logic_error("bag pair without shortcut entry");
                    fn(entry(a, static_cast<std::size_t>(j)),
                       Supporter{x, static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(p)});
                }
            }
        }
    };
    for_each_pair([&](std::size_t e, const Supporter&) { ++count[e + 1]; });
    begin_.assign(entry_count() + 1, 0);
    for (std::size_t e = 0; e < entry_count(); ++e) begin_[e + 1] = begin_[e] + count[e + 1];
    list_.resize(begin_.back());
    std::vector<std::size_t> fill(begin_.begin(), begin_.end() - 1);
    for_each_pair([&](std::size_t e, const Supporter& s) { list_[fill[e]++] = s; });
}

AffectedSet dch_propagate(TreeDecomposition& t, const ShortcutSupport& support, const BaseWeight& weight,
                          std::span<const std::pair<Vertex, Vertex>> edges) {
    std::vector<std::pair<Vertex, std::uint32_t>> entries;
    entries.reserve(edges.size());
    for (const auto& [u, v] : edges) {
        const Vertex a = t.order.rank[u] < t.order.rank[v] ? u : v;
        const int j = bag_index(t, a, a == u ? v : u);
        if (j < 0) throw std::logic_error("updated edge has no shortcut entry");
        entries.push_back({a, static_cast<std::uint32_t>(j)});
    }
    return dch_propagate_entries(t, support, weight, entries);
}

AffectedSet dch_propagate_entries(TreeDecomposition& t, const ShortcutSupport& support, const BaseWeight& weight,
                                  std::span<const std::pair<Vertex, std::uint32_t>> entries,
                                  const std::function<bool(Vertex)>& in_scope,
                                  std::vector<std::pair<Vertex, std::uint32_t>>* deferred) {
    AffectedSet out;
    if (entries.empty()) return out;
    std::vector<std::uint8_t> dirty(support.entry_count(), 0);
    std::vector<std::uint8_t> queued(t.size(), 0), changed(t.size(), 0);
    using Entry = std::pair<std::uint32_t, Vertex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    auto mark = [&](Vertex a, std::size_t j) {
        if (deferred && in_scope && !in_scope(a)) {
            deferred->push_back({a, static_cast<std::uint32_t>(j)});
            return;
        }
        const std::size_t e = support.entry(a, j);
        if (dirty[e]) return;
        dirty[e] = 1;
        if (!queued[a]) {
            queued[a] = 1;
            heap.push({t.order.rank[a], a});
        }
    };
    for (const auto& [a, j] : entries) mark(a, j);
    while (!heap.empty()) {
        const Vertex a = heap.top().second;
        heap.pop();
        queued[a] = 0;
        TreeNode& x = t.nodes[a];
        for (std::size_t j = 0; j < x.neighbors.size(); ++j) {
            const std::size_t e = support.entry(a, j);
            if (!dirty[e]) continue;
            dirty[e] = 0;
            ++out.shortcut_entries;
            Dist value = weight(a, x.neighbors[j]);
            for (const auto& s : support.supporters(e)) {
                const auto& sc = t.nodes[s.x].shortcuts;
                value = std::min(value, add(sc[s.index_a], sc[s.index_b]));
            }
            if (value == x.shortcuts[j]) continue;
            x.shortcuts[j] = value;
            if (!changed[a]) {
                changed[a] = 1;
                out.shortcut_changed.push_back(a);
            }
            // a supports every pair (N[j], N[k])
            for (std::size_t k = 0; k < x.neighbors.size(); ++k) {
                if (k == j) continue;
                const bool j_deeper = x.positions[j] > x.positions[k];
                const Vertex deep = j_deeper ? x.neighbors[j] : x.neighbors[k];
                const Vertex high = j_deeper ? x.neighbors[k] : x.neighbors[j];
                mark(deep, static_cast<std::size_t>(bag_index(t, deep, high)));
            }
        }
    }
    std::sort(out.shortcut_changed.begin(), out.shortcut_changed.end());
    return out;
}

std::vector<Vertex> highest_nodes(const TreeDecomposition& t, std::span<const Vertex> set) {
    std::vector<std::uint8_t> member(t.size(), 0);
    for (Vertex v : set) member[v] = 1;
    std::vector<Vertex> out;
    for (Vertex v : set) {
        if (member[v] != 1) continue;  // duplicate
        bool covered = false;
        for (Vertex p = t.nodes[v].parent; p != kNoVertex; p = t.nodes[p].parent)
            if (member[p]) {
                covered = true;
                break;
            }
        if (!covered) out.push_back(v);
        member[v] = 2;
    }
    std::sort(out.begin(), out.end());
    return out;
}

Dist label_entry(const TreeDecomposition& t, Vertex v, std::size_t i) {
    const TreeNode& x = t.nodes[v];
    Dist best = kInfDist;
    for (std::size_t k = 0; k < x.neighbors.size(); ++k) {
        const std::uint32_t pk = x.positions[k];
        Dist d;
        if (pk > i)
            d = t.nodes[x.neighbors[k]].distances[i];
        else if (pk == i)
            d = 0;
        else
            d = t.nodes[x.ancestors[i]].distances[pk];
        best = std::min(best, add(x.shortcuts[k], d));
    }
    return best;
}

bool relabel(TreeDecomposition& t, Vertex v) {
    TreeNode& x = t.nodes[v];
    bool changed = false;
    for (std::size_t i = 0; i < x.depth; ++i) {
        const Dist d = label_entry(t, v, i);
        if (d != x.distances[i]) {
            x.distances[i] = d;
            changed = true;
        }
    }
    x.distances[x.depth] = 0;
    return changed;
}

void build_labels(TreeDecomposition& t, std::span<const Vertex> order) {
    for (Vertex v : order) relabel(t, v);
}

void build_labels(TreeDecomposition& t) {
    const auto order = t.top_down_order();
    build_labels(t, order);
}

void dh2h_propagate(TreeDecomposition& t, std::span<const Vertex> seeds, unsigned workers, AffectedSet& out,
                    std::span<const Vertex> preset, const std::vector<std::uint8_t>* external) {
    const std::size_t n = t.size();
    std::vector<std::uint8_t> seed(n, 0), below(n, 0);
    std::vector<Vertex> starts(seeds.begin(), seeds.end());
    for (Vertex s : seeds) seed[s] = 1;
    for (Vertex s : preset) {
        seed[s] = 2;
        starts.push_back(s);
    }
    for (Vertex s : starts)
        for (Vertex v = s; v != kNoVertex && !below[v]; v = t.nodes[v].parent) below[v] = 1;
    out.branch_roots = highest_nodes(t, starts);
    const auto& roots = out.branch_roots;
    std::vector<std::vector<Vertex>> changed(roots.size());
    std::vector<std::uint64_t> entries(roots.size(), 0);
    parallel_for(roots.size(), workers, [&](std::size_t r) {
        std::vector<std::pair<Vertex, bool>> stack{{roots[r], false}};
        while (!stack.empty()) {
            const auto [v, ancestor_changed] = stack.back();
            stack.pop_back();
            bool self_changed = false;
            if (external && (*external)[v]) {
                self_changed = seed[v] == 2;
            } else if (seed[v] || ancestor_changed) {
                self_changed = relabel(t, v);
                entries[r] += t.nodes[v].depth;
            }
            if (self_changed) changed[r].push_back(v);
            const bool pass = ancestor_changed || self_changed;
            for (Vertex c : t.nodes[v].children)
                if (pass || below[c]) stack.push_back({c, pass});
        }
    });
    out.label_changed.clear();
    for (std::size_t r = 0; r < roots.size(); ++r) {
        out.label_changed.insert(out.label_changed.end(), changed[r].begin(), changed[r].end());
        out.label_entries += entries[r];
    }
    std::sort(out.label_changed.begin(), out.label_changed.end());
}

Distance ch_distance(const TreeDecomposition& t, Vertex s, Vertex target) {
    return upward_bidirectional_search(t.size(), s, target, [&](Vertex v, auto&& relax) {
        const TreeNode& x = t.nodes[v];
        for (std::size_t j = 0; j < x.neighbors.size(); ++j) relax(x.neighbors[j], x.shortcuts[j]);
    });
}

Distance h2h_distance(const TreeDecomposition& t, Vertex s, Vertex target, std::uint64_t* evaluated) {
    if (s == target) return Distance{0};
    const Vertex l = t.lca(s, target);
    if (l == kNoVertex) return Distance::unreachable();
    const TreeNode& xs = t.nodes[s];
    const TreeNode& xt = t.nodes[target];
    if (l == s) {
        if (evaluated) ++*evaluated;
        return Distance::from_internal(xt.distances[xs.depth]);
    }
    if (l == target) {
        if (evaluated) ++*evaluated;
        return Distance::from_internal(xs.distances[xt.depth]);
    }
    const TreeNode& xl = t.nodes[l];
    Dist best = add(xs.distances[xl.depth], xt.distances[xl.depth]);
    for (std::uint32_t i : xl.positions) best = std::min(best, add(xs.distances[i], xt.distances[i]));
    if (evaluated) *evaluated += xl.positions.size() + 1;
    return Distance::from_internal(best);
}

std::vector<std::vector<Vertex>> canonical_hubs(const TreeDecomposition& t) {
    std::vector<std::vector<Vertex>> hubs(t.size());
    for (Vertex v = 0; v < t.size(); ++v) {
        const TreeNode& x = t.nodes[v];
        hubs[v].push_back(v);
        for (std::uint32_t du = 0; du < x.depth; ++du) {
            const Dist d = x.distances[du];
            if (d >= kInfDist) continue;
            const TreeNode& xu = t.nodes[x.ancestors[du]];
            bool pruned = false;
            for (std::uint32_t dw = 0; dw < du && !pruned; ++dw)
                pruned = add(x.distances[dw], xu.distances[dw]) == d;
            if (!pruned) hubs[v].push_back(x.ancestors[du]);
        }
        std::sort(hubs[v].begin(), hubs[v].end());
    }
    return hubs;
}

IndexSize tree_size(const TreeDecomposition& t) {
    IndexSize s;
    for (const TreeNode& x : t.nodes) {
        s.entries += x.shortcuts.size() + x.distances.size() + x.boundary_distances.size();
        s.bytes += x.neighbors.size() * (sizeof(Vertex) + sizeof(Dist) + sizeof(std::uint32_t)) +
                   x.distances.size() * sizeof(Dist) + x.ancestors.size() * sizeof(Vertex) +
                   x.boundary_distances.size() * sizeof(Dist) + x.children.size() * sizeof(Vertex);
    }
    return s;
}

// ---------------------------------------------------------------------------

MhlIndex::MhlIndex(RoadNetwork g, const VertexOrder* pinned, bool with_labels)
    : graph_(std::move(g)), with_labels_(with_labels) {
    tree_ = mde_decompose(graph_, pinned);
    support_.build(tree_);
    if (with_labels_) build_labels(tree_);
    marker_.store(stage_count());
}

std::string MhlIndex::stage_name(int stage) const {
    switch (stage) {
        case kEdgeOnly: return "bidijkstra";
        case kShortcutsReady: return "ch";
        case kLabelsReady: return "h2h";
        default: return "unavailable";
    }
}

AffectedSet MhlIndex::dch_update(std::span<const WeightChange> changes) {
    std::vector<std::pair<Vertex, Vertex>> edges;
    for (const WeightChange& c : changes)
        if (c.kind() != UpdateKind::Unchanged) edges.push_back({c.u, c.v});
    return dch_propagate(tree_, support_, graph_weights(graph_), edges);
}

void MhlIndex::dh2h_update(AffectedSet& affected) {
    dh2h_propagate(tree_, affected.shortcut_changed, workers_, affected);
}

StageTimeline MhlIndex::apply_batch(const UpdateBatch& batch, const StageObserver& observer) {
    StageTimeline tl;
    tl.batch_id = batch.batch_id;
    tl.index = std::string(kind());
    const int before = published_stage();
    PassClock clock(tl, marker_, observer);
    double start = clock.now();
    std::vector<WeightChange> changes;
    try {
        changes = apply_updates(graph_, batch);
    } catch (...) {
        marker_.store(before);
        throw;
    }
    clock.record("U1 edges", start, changes.size());
    clock.publish(kEdgeOnly);

    start = clock.now();
    AffectedSet affected = dch_update(changes);
    clock.record("U2 shortcuts", start, affected.shortcut_entries);
    clock.publish(kShortcutsReady);
    tl.counters["shortcut_changed"] = affected.shortcut_changed.size();

    if (with_labels_) {
        start = clock.now();
        dh2h_update(affected);
        clock.record("U3 labels", start, affected.label_entries);
        clock.publish(kLabelsReady);
        tl.counters["label_changed"] = affected.label_changed.size();
    }
    return tl;
}

Distance MhlIndex::answer(int stage, Vertex s, Vertex t) const {
    switch (stage) {
        case kEdgeOnly: return bidijkstra(graph_, s, t);
        case kShortcutsReady: return ch_distance(tree_, s, t);
        default: return h2h_distance(tree_, s, t);
    }
}

}  // namespace dynsp
