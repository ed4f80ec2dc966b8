#include "dynsp/pmhl.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <stdexcept>

#include "dynsp/parallel.hpp"
#include "dynsp/search.hpp"

namespace dynsp {

namespace {

// Decompose a local tree under the global order restricted to its vertices.
void decompose(LocalTree& L, const VertexOrder& global_order) {
    std::vector<Vertex> seq(L.global.size());
    for (Vertex a = 0; a < seq.size(); ++a) seq[a] = a;
    std::sort(seq.begin(), seq.end(), [&](Vertex a, Vertex b) {
        return global_order.rank[L.global[a]] < global_order.rank[L.global[b]];
    });
    const VertexOrder local = VertexOrder::from_sequence(std::move(seq));
    L.tree = mde_decompose(L.graph, &local);
    L.support.build(L.tree);
    build_labels(L.tree);
}

Dist tree_dist(const TreeDecomposition& t, Vertex a, Vertex b) { return h2h_distance(t, a, b).internal(); }

void compare_tree(const TreeDecomposition& a, const TreeDecomposition& b, const std::string& name,
                  std::vector<std::string>& out) {
    if (a.size() != b.size()) {
        out.push_back(name + ": size differs");
        return;
    }
    for (Vertex v = 0; v < a.size(); ++v) {
        const TreeNode& x = a.nodes[v];
        const TreeNode& y = b.nodes[v];
        if (x.neighbors != y.neighbors || x.parent != y.parent)
            out.push_back(name + ": structure differs at " + std::to_string(v));
        else if (x.shortcuts != y.shortcuts)
            out.push_back(name + ": shortcuts differ at " + std::to_string(v));
        else if (x.distances != y.distances)
            out.push_back(name + ": labels differ at " + std::to_string(v));
    }
}

}  // namespace

std::vector<Vertex> cross_update_frontier(const TreeDecomposition& cross, std::span<const Vertex> affected) {
    return highest_nodes(cross, affected);
}

PmhlIndex::PmhlIndex(RoadNetwork g, const PmhlParams& params) : graph_(std::move(g)) {
    partitioning_ = partition_graph(graph_, params.partitions, params.seed);
    order_ = boundary_first_order(graph_, partitioning_, params.interleave);
    build();
}

PmhlIndex::PmhlIndex(RoadNetwork g, Partitioning p, VertexOrder order)
    : graph_(std::move(g)), partitioning_(std::move(p)), order_(std::move(order)) {
    validate_partitioning(graph_, partitioning_);
    if (order_.size() != graph_.vertex_count()) throw std::invalid_argument("order size mismatch");
    build();
}

void PmhlIndex::build() {
    const std::size_t n = graph_.vertex_count();
    const std::size_t k = partitioning_.k;
    boundary_mask_ = partitioning_.is_boundary;
    local_.assign(n, kNoVertex);
    overlay_of_.assign(n, kNoVertex);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t a = 0; a < partitioning_.members[i].size(); ++a)
            local_[partitioning_.members[i][a]] = static_cast<Vertex>(a);
    overlay_.global.clear();
    for (Vertex v = 0; v < n; ++v)
        if (boundary_mask_[v]) {
            overlay_of_[v] = static_cast<Vertex>(overlay_.global.size());
            overlay_.global.push_back(v);
        }
    boundary_local_.assign(k, {});
    for (std::size_t i = 0; i < k; ++i)
        for (Vertex b : partitioning_.boundary[i]) boundary_local_[i].push_back(local_[b]);

    build_steps_.clear();
    const auto begin = std::chrono::steady_clock::now();
    auto since = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count(); };
    auto step = [&](std::string name, double from, std::uint64_t items) {
        build_steps_.push_back({std::move(name), from, since(), items});
    };
    double t0 = since();
    parts_.assign(k, {});
    parallel_for(k, workers_, [&](std::size_t i) { build_partition(i); });
    step("S1 partition indexes", t0, k);
    t0 = since();
    build_overlay_graph();
    step("S2 overlay graph", t0, partitioning_.inter_edges.size());
    t0 = since();
    decompose(overlay_, order_);
    step("S3 overlay index", t0, overlay_.global.size());
    t0 = since();
    all_pairs_.assign(k, {});
    extended_.assign(k, {});
    parallel_for(k, workers_, [&](std::size_t i) { build_extended(i); });
    step("S4-5 extended partition indexes", t0, k);
    t0 = since();
    build_cross();
    step("S6 cross-boundary index", t0, n);
    marker_.store(kCrossBoundary);
}

void PmhlIndex::build_partition(std::size_t i) {
    LocalTree& L = parts_[i];
    L.global = partitioning_.members[i];
    L.graph = DistGraph(L.global.size());
    for (const auto& [u, v] : partitioning_.intra_edges[i]) L.graph.set_edge(local_[u], local_[v], *graph_.weight(u, v));
    decompose(L, order_);
}

Dist PmhlIndex::boundary_shortcut(std::size_t i, Vertex a, std::size_t j) const {
    const LocalTree& L = parts_[i];
    const TreeNode& x = L.tree.nodes[a];
    Dist value = L.graph.weight(a, x.neighbors[j]);
    for (const auto& s : L.support.supporters(L.support.entry(a, j))) {
        if (boundary_mask_[L.global[s.x]]) continue;
        const auto& sc = L.tree.nodes[s.x].shortcuts;
        value = std::min(value, add(sc[s.index_a], sc[s.index_b]));
    }
    return value;
}

void PmhlIndex::build_overlay_graph() {
    overlay_.graph = DistGraph(overlay_.global.size());
    for (const auto& [u, v] : partitioning_.inter_edges)
        overlay_.graph.set_edge(overlay_of_[u], overlay_of_[v], *graph_.weight(u, v));
    for (std::size_t i = 0; i < partitioning_.k; ++i) {
        const LocalTree& L = parts_[i];
        for (Vertex a : boundary_local_[i]) {
            const TreeNode& x = L.tree.nodes[a];
            for (std::size_t j = 0; j < x.neighbors.size(); ++j) {
                const Vertex b = L.global[x.neighbors[j]];
                if (!boundary_mask_[b]) throw std::logic_error("boundary vertex ranked below an interior vertex");
                const Dist w = boundary_shortcut(i, a, j);
                if (w < kInfDist) overlay_.graph.set_edge(overlay_of_[L.global[a]], overlay_of_[b], w);
            }
        }
    }
}

void PmhlIndex::build_extended(std::size_t i) {
    const auto& B = boundary_local_[i];
    const std::size_t nb = B.size();
    const LocalTree& L = parts_[i];
    auto& D = all_pairs_[i];
    D.assign(nb * nb, 0);
    LocalTree& E = extended_[i];
    E.global = L.global;
    E.graph = L.graph;
    for (std::size_t p = 0; p < nb; ++p)
        for (std::size_t q = p + 1; q < nb; ++q) {
            const Dist d = tree_dist(overlay_.tree, overlay_of_[L.global[B[p]]], overlay_of_[L.global[B[q]]]);
            D[p * nb + q] = D[q * nb + p] = d;
            if (d < kInfDist) E.graph.set_edge(B[p], B[q], std::min(d, L.graph.weight(B[p], B[q])));
        }
    decompose(E, order_);
}

void PmhlIndex::build_cross() {
    const std::size_t n = graph_.vertex_count();
    cross_ = TreeDecomposition{};
    cross_.nodes.resize(n);
    cross_.order = order_;
    for (Vertex v = 0; v < n; ++v) {
        const LocalTree& L = boundary_mask_[v] ? overlay_ : parts_[partitioning_.assignment[v]];
        const TreeNode& x = L.tree.nodes[boundary_mask_[v] ? overlay_of_[v] : local_[v]];
        TreeNode& y = cross_.nodes[v];
        y.neighbors.resize(x.neighbors.size());
        for (std::size_t j = 0; j < x.neighbors.size(); ++j) y.neighbors[j] = L.global[x.neighbors[j]];
        y.shortcuts = x.shortcuts;
    }
    cross_.link();
    for (Vertex v : cross_.top_down_order()) {
        if (boundary_mask_[v]) {
            const TreeNode& x = overlay_.tree.nodes[overlay_of_[v]];
            if (x.distances.size() != cross_.nodes[v].distances.size())
                throw std::logic_error("overlay tree is not the top of the cross-boundary tree");
            cross_.nodes[v].distances = x.distances;
        } else {
            relabel(cross_, v);
        }
    }
}

std::string PmhlIndex::stage_name(int stage) const {
    switch (stage) {
        case kEdgeOnly: return "bidijkstra";
        case kPch: return "pch";
        case kNoBoundary: return "no-boundary";
        case kPostBoundary: return "post-boundary";
        case kCrossBoundary: return "cross-boundary";
        default: return "unavailable";
    }
}

IndexSize PmhlIndex::size() const {
    IndexSize s;
    auto add_size = [&](const IndexSize& x) {
        s.entries += x.entries;
        s.bytes += x.bytes;
    };
    for (const auto& L : parts_) add_size(tree_size(L.tree));
    for (const auto& L : extended_) add_size(tree_size(L.tree));
    add_size(tree_size(overlay_.tree));
    add_size(tree_size(cross_));
    for (const auto& D : all_pairs_) add_size({D.size(), D.size() * sizeof(Dist)});
    return s;
}

std::vector<std::pair<std::pair<Vertex, Vertex>, Dist>> PmhlIndex::overlay_edges() const {
    std::vector<std::pair<std::pair<Vertex, Vertex>, Dist>> out;
    for (Vertex a = 0; a < overlay_.global.size(); ++a)
        for (const auto& [b, w] : overlay_.graph.neighbors(a))
            if (a < b) {
                Vertex u = overlay_.global[a], v = overlay_.global[b];
                if (u > v) std::swap(u, v);
                out.push_back({{u, v}, w});
            }
    std::sort(out.begin(), out.end());
    return out;
}

Distance PmhlIndex::overlay_distance(Vertex a, Vertex b) const {
    if (!boundary_mask_[a] || !boundary_mask_[b]) throw std::invalid_argument("not a boundary vertex");
    return h2h_distance(overlay_.tree, overlay_of_[a], overlay_of_[b]);
}

Distance PmhlIndex::pch(Vertex s, Vertex t) const {
    return upward_bidirectional_search(graph_.vertex_count(), s, t, [&](Vertex v, auto&& relax) {
        const bool b = boundary_mask_[v];
        const LocalTree& L = b ? overlay_ : parts_[partitioning_.assignment[v]];
        const TreeNode& x = L.tree.nodes[b ? overlay_of_[v] : local_[v]];
        for (std::size_t j = 0; j < x.neighbors.size(); ++j) relax(L.global[x.neighbors[j]], x.shortcuts[j]);
    });
}

Distance PmhlIndex::concatenate(const std::vector<LocalTree>& trees, Vertex s, Vertex t) const {
    const std::uint32_t i = partitioning_.assignment[s];
    const std::uint32_t j = partitioning_.assignment[t];
    // (boundary vertex, distance from the endpoint inside its partition)
    auto side = [&](Vertex v, std::uint32_t p) {
        std::vector<std::pair<Vertex, Dist>> out;
        if (boundary_mask_[v]) {
            out.push_back({overlay_of_[v], 0});
            return out;
        }
        for (Vertex b : boundary_local_[p]) {
            const Dist d = tree_dist(trees[p].tree, local_[v], b);
            if (d < kInfDist) out.push_back({overlay_of_[trees[p].global[b]], d});
        }
        return out;
    };
    Dist best = i == j ? tree_dist(trees[i].tree, local_[s], local_[t]) : kInfDist;
    const auto from = side(s, i);
    const auto to = side(t, j);
    for (const auto& [a, da] : from)
        for (const auto& [b, db] : to) {
            if (add(da, db) >= best) continue;
            const Dist mid = a == b ? 0 : tree_dist(overlay_.tree, a, b);
            best = std::min(best, add(add(da, mid), db));
        }
    return Distance::from_internal(best);
}

Distance PmhlIndex::answer(int stage, Vertex s, Vertex t) const {
    if (s == t) return Distance{0};
    const bool same = partitioning_.assignment[s] == partitioning_.assignment[t];
    switch (stage) {
        case kEdgeOnly: return bidijkstra(graph_, s, t);
        case kPch: return pch(s, t);
        case kNoBoundary: return concatenate(parts_, s, t);
        case kPostBoundary:
            if (same) return h2h_distance(extended_[partitioning_.assignment[s]].tree, local_[s], local_[t]);
            return concatenate(extended_, s, t);
        default:
            if (same) return h2h_distance(extended_[partitioning_.assignment[s]].tree, local_[s], local_[t]);
            return h2h_distance(cross_, s, t);
    }
}

StageTimeline PmhlIndex::apply_batch(const UpdateBatch& batch, const StageObserver& observer) {
    StageTimeline tl;
    tl.batch_id = batch.batch_id;
    tl.index = std::string(kind());
    const int before = published_stage();
    const std::size_t k = partitioning_.k;
    PassClock clock(tl, marker_, observer);

    // U1
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

    // U2: partition shortcuts in parallel, then the overlay
    start = clock.now();
    std::vector<std::vector<std::pair<Vertex, Vertex>>> intra(k);
    std::vector<std::pair<Vertex, Vertex>> inter;
    for (const WeightChange& c : changes) {
        if (c.kind() == UpdateKind::Unchanged) continue;
        const std::uint32_t p = partitioning_.assignment[c.u];
        if (p == partitioning_.assignment[c.v])
            intra[p].push_back({local_[c.u], local_[c.v]});
        else
            inter.push_back({c.u, c.v});
    }
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < k; ++i)
        if (!intra[i].empty()) touched.push_back(i);
    std::vector<AffectedSet> part_aff(k);
    std::vector<std::vector<std::pair<std::pair<Vertex, Vertex>, Dist>>> induced(k);
    parallel_for(touched.size(), workers_, [&](std::size_t r) {
        const std::size_t i = touched[r];
        LocalTree& L = parts_[i];
        for (const auto& [a, b] : intra[i]) L.graph.set_edge(a, b, *graph_.weight(L.global[a], L.global[b]));
        part_aff[i] = dch_propagate(L.tree, L.support, L.weights(), intra[i]);
        for (Vertex a : boundary_local_[i]) {
            const TreeNode& x = L.tree.nodes[a];
            for (std::size_t j = 0; j < x.neighbors.size(); ++j) {
                const Vertex oa = overlay_of_[L.global[a]];
                const Vertex ob = overlay_of_[L.global[x.neighbors[j]]];
                const Dist w = boundary_shortcut(i, a, j);
                if (w != overlay_.graph.weight(oa, ob)) induced[i].push_back({{oa, ob}, w});
            }
        }
    });
    std::vector<std::pair<Vertex, Vertex>> overlay_changed;
    for (const auto& [u, v] : inter) {
        overlay_.graph.set_edge(overlay_of_[u], overlay_of_[v], *graph_.weight(u, v));
        overlay_changed.push_back({overlay_of_[u], overlay_of_[v]});
    }
    for (const auto& list : induced)
        for (const auto& [e, w] : list) {
            overlay_.graph.set_edge(e.first, e.second, w);
            overlay_changed.push_back(e);
        }
    AffectedSet overlay_aff = dch_propagate(overlay_.tree, overlay_.support, overlay_.weights(), overlay_changed);
    std::uint64_t part_entries = 0;
    for (const auto& a : part_aff) part_entries += a.shortcut_entries;
    clock.record("U2 shortcuts", start, part_entries + overlay_aff.shortcut_entries);
    tl.counters["partition_shortcut_entries"] = part_entries;
    tl.counters["overlay_shortcut_entries"] = overlay_aff.shortcut_entries;
    tl.counters["boundary_shortcut_changes"] = overlay_changed.size() - inter.size();
    clock.publish(kPch);

    // U3: overlay and partition labels in parallel
    start = clock.now();
    std::vector<std::size_t> relabel_parts;
    for (std::size_t i : touched)
        if (!part_aff[i].shortcut_changed.empty()) relabel_parts.push_back(i);
    parallel_for(relabel_parts.size() + 1, workers_, [&](std::size_t r) {
        if (r == relabel_parts.size()) {
            dh2h_propagate(overlay_.tree, overlay_aff.shortcut_changed, 1, overlay_aff);
        } else {
            const std::size_t i = relabel_parts[r];
            dh2h_propagate(parts_[i].tree, part_aff[i].shortcut_changed, 1, part_aff[i]);
        }
    });
    std::uint64_t part_label_entries = 0;
    std::size_t affected_vertices = overlay_aff.label_changed.size();
    for (const auto& a : part_aff) {
        part_label_entries += a.label_entries;
        affected_vertices += a.label_changed.size();
    }
    clock.record("U3 labels", start, part_label_entries + overlay_aff.label_entries);
    tl.counters["partition_label_entries"] = part_label_entries;
    tl.counters["overlay_label_entries"] = overlay_aff.label_entries;
    tl.counters["affected_vertices"] = affected_vertices;
    clock.publish(kNoBoundary);

    // U4: probe boundary pairs of flagged partitions, repair L'_i
    start = clock.now();
    std::vector<std::uint8_t> flagged(k, 0);
    for (std::size_t i : touched) flagged[i] = 1;
    for (Vertex o : overlay_aff.label_changed) flagged[partitioning_.assignment[overlay_.global[o]]] = 1;
    std::vector<std::size_t> probe;
    for (std::size_t i = 0; i < k; ++i)
        if (flagged[i]) probe.push_back(i);
    std::vector<AffectedSet> ext_aff(k);
    std::vector<std::uint64_t> pair_changes(k, 0);
    parallel_for(probe.size(), workers_, [&](std::size_t r) {
        const std::size_t i = probe[r];
        const auto& B = boundary_local_[i];
        const std::size_t nb = B.size();
        const LocalTree& L = parts_[i];
        LocalTree& E = extended_[i];
        auto& D = all_pairs_[i];
        std::vector<std::pair<Vertex, Vertex>> edges;
        std::vector<std::uint32_t> pos(L.global.size(), kNoVertex);
        for (std::size_t p = 0; p < nb; ++p) pos[B[p]] = static_cast<std::uint32_t>(p);
        for (std::size_t p = 0; p < nb; ++p)
            for (std::size_t q = p + 1; q < nb; ++q) {
                const Dist d = tree_dist(overlay_.tree, overlay_of_[L.global[B[p]]], overlay_of_[L.global[B[q]]]);
                if (d == D[p * nb + q]) continue;
                D[p * nb + q] = D[q * nb + p] = d;
                E.graph.set_edge(B[p], B[q], std::min(d, L.graph.weight(B[p], B[q])));
                edges.push_back({B[p], B[q]});
                ++pair_changes[i];
            }
        for (const auto& [a, b] : intra[i]) {
            Dist w = L.graph.weight(a, b);
            if (pos[a] != kNoVertex && pos[b] != kNoVertex) w = std::min(w, D[pos[a] * nb + pos[b]]);
            E.graph.set_edge(a, b, w);
            edges.push_back({a, b});
        }
        ext_aff[i] = dch_propagate(E.tree, E.support, E.weights(), edges);
        dh2h_propagate(E.tree, ext_aff[i].shortcut_changed, 1, ext_aff[i]);
    });
    std::uint64_t ext_entries = 0, pairs_changed = 0;
    for (std::size_t i = 0; i < k; ++i) {
        ext_entries += ext_aff[i].shortcut_entries + ext_aff[i].label_entries;
        pairs_changed += pair_changes[i];
    }
    clock.record("U4 post-boundary", start, ext_entries);
    tl.counters["extended_partitions"] = probe.size();
    tl.counters["boundary_pairs_changed"] = pairs_changed;
    clock.publish(kPostBoundary);

    // U5: refresh L* from L~ and L_i, repair below the branch roots
    start = clock.now();
    std::vector<Vertex> seeds, preset;
    for (std::size_t i : touched) {
        const LocalTree& L = parts_[i];
        for (Vertex a : part_aff[i].shortcut_changed) {
            const Vertex v = L.global[a];
            if (boundary_mask_[v]) continue;
            cross_.nodes[v].shortcuts = L.tree.nodes[a].shortcuts;
            seeds.push_back(v);
        }
        for (Vertex a : part_aff[i].label_changed)
            if (!boundary_mask_[L.global[a]]) seeds.push_back(L.global[a]);
    }
    for (Vertex o : overlay_aff.shortcut_changed) cross_.nodes[overlay_.global[o]].shortcuts = overlay_.tree.nodes[o].shortcuts;
    for (Vertex o : overlay_aff.label_changed) {
        const Vertex v = overlay_.global[o];
        cross_.nodes[v].distances = overlay_.tree.nodes[o].distances;
        preset.push_back(v);
    }
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    AffectedSet cross_aff;
    dh2h_propagate(cross_, seeds, workers_, cross_aff, preset, &boundary_mask_);
    clock.record("U5 cross-boundary", start, cross_aff.label_entries);
    tl.counters["branch_roots"] = cross_aff.branch_roots.size();
    tl.counters["cross_label_changed"] = cross_aff.label_changed.size();
    clock.publish(kCrossBoundary);
    return tl;
}

std::vector<std::vector<std::pair<Vertex, Dist>>> PmhlIndex::flat_cross_labels() const {
    const std::size_t n = graph_.vertex_count();
    std::vector<std::vector<std::pair<Vertex, Dist>>> out(n);
    auto overlay_hubs = [&](Vertex o, auto&& fn) {
        const TreeNode& x = overlay_.tree.nodes[o];
        for (std::size_t d = 0; d < x.depth; ++d) fn(overlay_.global[x.ancestors[d]], x.distances[d]);
        fn(overlay_.global[o], Dist{0});
    };
    for (Vertex v = 0; v < n; ++v) {
        std::map<Vertex, Dist> hubs;
        auto put = [&](Vertex c, Dist d) {
            auto [it, fresh] = hubs.try_emplace(c, d);
            if (!fresh) it->second = std::min(it->second, d);
        };
        if (boundary_mask_[v]) {
            overlay_hubs(overlay_of_[v], put);
        } else {
            const std::size_t i = partitioning_.assignment[v];
            const LocalTree& E = extended_[i];
            const TreeNode& x = E.tree.nodes[local_[v]];
            for (std::size_t d = 0; d < x.depth; ++d) put(E.global[x.ancestors[d]], x.distances[d]);
            put(v, 0);
            for (Vertex b : boundary_local_[i]) {
                const Dist dvb = tree_dist(E.tree, local_[v], b);
                if (dvb >= kInfDist) continue;
                overlay_hubs(overlay_of_[E.global[b]], [&](Vertex c, Dist d) { put(c, add(dvb, d)); });
            }
        }
        out[v].assign(hubs.begin(), hubs.end());
    }
    return out;
}

std::vector<std::string> compare_components(const PmhlIndex& a, const PmhlIndex& b) {
    std::vector<std::string> out;
    if (a.partitioning().k != b.partitioning().k) return {"partition count differs"};
    for (std::size_t i = 0; i < a.partitioning().k; ++i) {
        compare_tree(a.partition(i).tree, b.partition(i).tree, "L_" + std::to_string(i), out);
        compare_tree(a.extended(i).tree, b.extended(i).tree, "L'_" + std::to_string(i), out);
    }
    compare_tree(a.overlay().tree, b.overlay().tree, "overlay", out);
    compare_tree(a.cross(), b.cross(), "cross", out);
    if (a.overlay_edges() != b.overlay_edges()) out.push_back("overlay edges differ");
    return out;
}

}  // namespace dynsp
