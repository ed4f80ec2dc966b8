#include "dynsp/postmhl.hpp"

#include <algorithm>
#include <stdexcept>

#include "dynsp/parallel.hpp"
#include "dynsp/search.hpp"

namespace dynsp {

PostMhlIndex::PostMhlIndex(RoadNetwork g, const TdPartitionParams& params, const VertexOrder* pinned)
    : graph_(std::move(g)) {
    tree_ = mde_decompose(graph_, pinned);
    support_.build(tree_);
    td_ = td_partition(tree_, params);
    // overlay index: decreasing rank puts ancestors first
    for (Vertex v : td_.overlay) relabel(tree_, v);
    const std::size_t k = td_.partition_count();
    tables_.assign(k, {});
    parallel_for(k, workers_, [&](std::size_t i) {
        build_tables(i, tables_[i]);
        for (Vertex v : td_.members[i]) {
            compute_boundary(tree_, tables_[i], i, v);
            compute_post(tree_, i, v);
        }
    });
    parallel_for(k, workers_, [&](std::size_t i) {
        for (Vertex v : td_.members[i]) compute_cross(tree_, v);
    });
    marker_.store(kCrossBoundary);
}

std::string PostMhlIndex::stage_name(int stage) const {
    switch (stage) {
        case kEdgeOnly: return "bidijkstra";
        case kPch: return "pch";
        case kPostBoundary: return "post-boundary";
        case kCrossBoundary: return "cross-boundary";
        default: return "unavailable";
    }
}

IndexSize PostMhlIndex::size() const {
    IndexSize s = tree_size(tree_);
    for (const auto& d : tables_) {
        s.entries += d.size();
        s.bytes += d.size() * sizeof(Dist);
    }
    return s;
}

void PostMhlIndex::build_tables(std::size_t i, std::vector<Dist>& table) const {
    const auto& B = tree_.nodes[td_.roots[i]].neighbors;
    const std::size_t nb = B.size();
    table.assign(nb * nb, 0);
    for (std::size_t p = 0; p < nb; ++p)
        for (std::size_t q = p + 1; q < nb; ++q)
            table[p * nb + q] = table[q * nb + p] = h2h_distance(tree_, B[p], B[q]).internal();
}

bool PostMhlIndex::compute_boundary(TreeDecomposition& t, const std::vector<Dist>& table, std::size_t i,
                                    Vertex v) const {
    const Vertex u = td_.roots[i];
    const std::size_t nb = t.nodes[u].neighbors.size();
    TreeNode& x = t.nodes[v];
    std::vector<Dist> out(nb, kInfDist);
    for (std::size_t k = 0; k < x.neighbors.size(); ++k) {
        const Vertex xk = x.neighbors[k];
        const Dist sc = x.shortcuts[k];
        if (in_overlay(xk)) {
            const auto l = static_cast<std::size_t>(bag_index(t, u, xk));
            for (std::size_t j = 0; j < nb; ++j) out[j] = std::min(out[j], add(sc, table[j * nb + l]));
        } else {
            const auto& b = t.nodes[xk].boundary_distances;
            for (std::size_t j = 0; j < nb; ++j) out[j] = std::min(out[j], add(sc, b[j]));
        }
    }
    if (out == x.boundary_distances) return false;
    x.boundary_distances = std::move(out);
    return true;
}

bool PostMhlIndex::compute_post(TreeDecomposition& t, std::size_t i, Vertex v) const {
    const Vertex u = td_.roots[i];
    TreeNode& x = t.nodes[v];
    bool changed = false;
    for (std::size_t j = 0; j < x.depth; ++j) {
        const Vertex c = x.ancestors[j];
        if (in_overlay(c)) continue;
        const TreeNode& xc = t.nodes[c];
        Dist best = kInfDist;
        for (std::size_t k = 0; k < x.neighbors.size(); ++k) {
            const Vertex xk = x.neighbors[k];
            const std::uint32_t pk = x.positions[k];
            Dist d;
            if (in_overlay(xk))
                d = xc.boundary_distances[static_cast<std::size_t>(bag_index(t, u, xk))];
            else if (pk > j)
                d = t.nodes[xk].distances[j];
            else
                d = xc.distances[pk];
            best = std::min(best, add(x.shortcuts[k], d));
        }
        if (best != x.distances[j]) {
            x.distances[j] = best;
            changed = true;
        }
    }
    x.distances[x.depth] = 0;
    return changed;
}

bool PostMhlIndex::compute_cross(TreeDecomposition& t, Vertex v) const {
    TreeNode& x = t.nodes[v];
    bool changed = false;
    for (std::size_t j = 0; j < x.depth; ++j) {
        if (!in_overlay(x.ancestors[j])) continue;
        const Dist d = label_entry(t, v, j);
        if (d != x.distances[j]) {
            x.distances[j] = d;
            changed = true;
        }
    }
    return changed;
}

std::uint64_t PostMhlIndex::repair_post(std::size_t i, bool force, const std::vector<std::uint8_t>& seed,
                                        std::vector<Vertex>* changed) {
    std::uint64_t entries = 0;
    const Vertex root = td_.roots[i];
    const std::size_t nb = tree_.nodes[root].neighbors.size();
    std::vector<std::uint8_t> pass(tree_.size(), 0);
    for (Vertex v : td_.members[i]) {
        const bool inherited = v != root && pass[tree_.nodes[v].parent];
        bool ch = false;
        if (force || seed[v] || inherited) {
            ch = compute_boundary(tree_, tables_[i], i, v);
            ch = compute_post(tree_, i, v) || ch;
            entries += nb + tree_.nodes[v].depth;
        }
        pass[v] = inherited || ch;
        if (ch && changed) changed->push_back(v);
    }
    return entries;
}

std::uint64_t PostMhlIndex::repair_cross(std::size_t i, bool force, const std::vector<std::uint8_t>& seed,
                                         std::vector<Vertex>* changed) {
    std::uint64_t entries = 0;
    const Vertex root = td_.roots[i];
    std::vector<std::uint8_t> pass(tree_.size(), 0);
    for (Vertex v : td_.members[i]) {
        const bool inherited = v != root && pass[tree_.nodes[v].parent];
        bool ch = false;
        if (force || seed[v] || inherited) {
            ch = compute_cross(tree_, v);
            entries += tree_.nodes[v].depth;
        }
        pass[v] = inherited || ch;
        if (ch && changed) changed->push_back(v);
    }
    return entries;
}

StageTimeline PostMhlIndex::apply_batch(const UpdateBatch& batch, const StageObserver& observer) {
    StageTimeline tl;
    tl.batch_id = batch.batch_id;
    tl.index = std::string(kind());
    const int before = published_stage();
    const std::size_t n = tree_.size();
    const std::size_t k = td_.partition_count();
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

    // U2: in-partition shortcuts per partition, then overlay shortcuts
    start = clock.now();
    std::vector<std::vector<std::pair<Vertex, std::uint32_t>>> part_entries(k), deferred(k);
    std::vector<std::pair<Vertex, std::uint32_t>> overlay_entries;
    for (const WeightChange& c : changes) {
        if (c.kind() == UpdateKind::Unchanged) continue;
        const Vertex a = tree_.order.rank[c.u] < tree_.order.rank[c.v] ? c.u : c.v;
        const int j = bag_index(tree_, a, a == c.u ? c.v : c.u);
        if (j < 0) throw std::logic_error("updated edge has no shortcut entry");
        const std::pair<Vertex, std::uint32_t> e{a, static_cast<std::uint32_t>(j)};
        if (in_overlay(a))
            overlay_entries.push_back(e);
        else
            part_entries[td_.part_of[a]].push_back(e);
    }
    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < k; ++i)
        if (!part_entries[i].empty()) touched.push_back(i);
    const BaseWeight weight = graph_weights(graph_);
    std::vector<AffectedSet> part_aff(k);
    parallel_for(touched.size(), workers_, [&](std::size_t r) {
        const std::size_t i = touched[r];
        part_aff[i] = dch_propagate_entries(
            tree_, support_, weight, part_entries[i],
            [&](Vertex v) { return td_.part_of[v] == i; }, &deferred[i]);
    });
    for (const auto& d : deferred) overlay_entries.insert(overlay_entries.end(), d.begin(), d.end());
    AffectedSet overlay_aff = dch_propagate_entries(tree_, support_, weight, overlay_entries);
    std::uint64_t sc_entries = overlay_aff.shortcut_entries;
    std::vector<std::uint8_t> seed(n, 0);
    std::uint64_t affected_shortcuts = overlay_aff.shortcut_changed.size();
    for (const auto& a : part_aff) {
        sc_entries += a.shortcut_entries;
        affected_shortcuts += a.shortcut_changed.size();
        for (Vertex v : a.shortcut_changed) seed[v] = 1;
    }
    clock.record("U2 shortcuts", start, sc_entries);
    tl.counters["affected_shortcuts"] = affected_shortcuts;
    clock.publish(kPch);

    // U3: overlay labels
    start = clock.now();
    std::vector<std::uint8_t> overlay_pass(n, 0), overlay_changed(n, 0);
    for (Vertex v : overlay_aff.shortcut_changed) seed[v] = 1;
    std::uint64_t overlay_entries_done = 0;
    std::uint32_t lo = UINT32_MAX, hi = 0;
    for (Vertex v : td_.overlay) {
        const Vertex p = tree_.nodes[v].parent;
        const bool inherited = p != kNoVertex && overlay_pass[p];
        bool ch = false;
        if (seed[v] || inherited) {
            ch = relabel(tree_, v);
            overlay_entries_done += tree_.nodes[v].depth;
        }
        overlay_pass[v] = inherited || ch;
        if (ch) {
            overlay_changed[v] = 1;
            lo = std::min(lo, tree_.nodes[v].depth);
            hi = std::max(hi, tree_.nodes[v].depth);
        }
    }
    std::vector<std::size_t> post_parts, cross_parts;
    std::vector<std::uint8_t> probe(k, 0), cross_force(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        const TreeNode& root = tree_.nodes[td_.roots[i]];
        for (Vertex b : root.neighbors) probe[i] = probe[i] || overlay_changed[b];
        for (Vertex a : root.ancestors) cross_force[i] = cross_force[i] || overlay_changed[a];
        const bool shortcuts = !part_aff[i].shortcut_changed.empty();
        if (probe[i] || shortcuts) post_parts.push_back(i);
        if (cross_force[i] || shortcuts) cross_parts.push_back(i);
    }
    clock.record("U3 overlay labels", start, overlay_entries_done);
    tl.counters["overlay_affected_height"] = hi >= lo ? hi - lo + 1 : 0;

    // U4a post-boundary and U4b cross-boundary, independent of each other
    std::vector<std::uint64_t> post_entries(k, 0), cross_entries(k, 0), table_changes(k, 0);
    std::vector<std::vector<Vertex>> post_changed(k), cross_changed(k);
    double post_start = 0, post_end = 0, cross_start = 0, cross_end = 0;
    auto post_phase = [&] {
        post_start = clock.now();
        parallel_for(post_parts.size(), workers_, [&](std::size_t r) {
            const std::size_t i = post_parts[r];
            bool force = false;
            if (probe[i]) {
                std::vector<Dist> fresh;
                build_tables(i, fresh);
                for (std::size_t e = 0; e < fresh.size(); ++e) table_changes[i] += fresh[e] != tables_[i][e];
                force = table_changes[i] > 0;
                tables_[i] = std::move(fresh);
            }
            post_entries[i] = repair_post(i, force, seed, &post_changed[i]);
        });
        post_end = clock.now();
        clock.publish(kPostBoundary);
    };
    auto cross_phase = [&] {
        cross_start = clock.now();
        parallel_for(cross_parts.size(), workers_, [&](std::size_t r) {
            const std::size_t i = cross_parts[r];
            cross_entries[i] = repair_cross(i, cross_force[i] != 0, seed, &cross_changed[i]);
        });
        cross_end = clock.now();
    };
    switch (phase_order_) {
        case PhaseOrder::Parallel: parallel_pair(workers_, post_phase, cross_phase); break;
        case PhaseOrder::PostFirst:
            post_phase();
            cross_phase();
            break;
        case PhaseOrder::CrossFirst:
            cross_phase();
            post_phase();
            break;
    }
    std::uint64_t post_total = 0, cross_total = 0, tables_total = 0, subtree = 0;
    lo = UINT32_MAX, hi = 0;
    for (std::size_t i = 0; i < k; ++i) {
        post_total += post_entries[i];
        cross_total += cross_entries[i];
        tables_total += table_changes[i];
        for (const auto* list : {&post_changed[i], &cross_changed[i]})
            for (Vertex v : *list) {
                lo = std::min(lo, tree_.nodes[v].depth);
                hi = std::max(hi, tree_.nodes[v].depth);
                subtree = std::max<std::uint64_t>(subtree, td_.subtree_size[v]);
            }
    }
    auto& post_rec = clock.record("U4a post-boundary", post_start, post_total);
    post_rec.end = post_end;
    auto& cross_rec = clock.record("U4b cross-boundary", cross_start, cross_total);
    cross_rec.end = cross_end;
    tl.counters["post_partitions"] = post_parts.size();
    tl.counters["cross_partitions"] = cross_parts.size();
    tl.counters["boundary_table_changes"] = tables_total;
    tl.counters["partition_affected_height"] = hi >= lo ? hi - lo + 1 : 0;
    tl.counters["max_affected_subtree"] = subtree;
    clock.publish(kCrossBoundary);
    return tl;
}

Distance PostMhlIndex::post_boundary_distance(Vertex s, Vertex t) const {
    if (s == t) return Distance{0};
    const std::uint32_t ps = td_.part_of[s];
    const std::uint32_t pt = td_.part_of[t];
    const TreeNode& xs = tree_.nodes[s];
    const TreeNode& xt = tree_.nodes[t];
    if (ps == pt && ps != kOverlay) {
        Dist best = kInfDist;
        const Vertex l = tree_.lca(s, t);
        if (l == s) {
            best = xt.distances[xs.depth];
        } else if (l == t) {
            best = xs.distances[xt.depth];
        } else {
            const TreeNode& xl = tree_.nodes[l];
            best = add(xs.distances[xl.depth], xt.distances[xl.depth]);
            for (std::size_t k = 0; k < xl.positions.size(); ++k)
                if (!in_overlay(xl.neighbors[k]))
                    best = std::min(best, add(xs.distances[xl.positions[k]], xt.distances[xl.positions[k]]));
        }
        const auto& D = tables_[ps];
        const std::size_t nb = xs.boundary_distances.size();
        for (std::size_t p = 0; p < nb; ++p) {
            const Dist a = xs.boundary_distances[p];
            if (a >= best) continue;
            for (std::size_t q = 0; q < nb; ++q)
                best = std::min(best, add(add(a, D[p * nb + q]), xt.boundary_distances[q]));
        }
        return Distance::from_internal(best);
    }
    if (ps == kOverlay && pt == kOverlay) return h2h_distance(tree_, s, t);
    auto side = [&](Vertex v, std::uint32_t p) {
        std::vector<std::pair<Vertex, Dist>> out;
        if (p == kOverlay) {
            out.push_back({v, 0});
        } else {
            const auto& B = tree_.nodes[td_.roots[p]].neighbors;
            for (std::size_t j = 0; j < B.size(); ++j)
                if (tree_.nodes[v].boundary_distances[j] < kInfDist)
                    out.push_back({B[j], tree_.nodes[v].boundary_distances[j]});
        }
        return out;
    };
    Dist best = kInfDist;
    const auto from = side(s, ps);
    const auto to = side(t, pt);
    for (const auto& [a, da] : from)
        for (const auto& [b, db] : to) {
            if (add(da, db) >= best) continue;
            best = std::min(best, add(add(da, h2h_distance(tree_, a, b).internal()), db));
        }
    return Distance::from_internal(best);
}

Distance PostMhlIndex::answer(int stage, Vertex s, Vertex t) const {
    switch (stage) {
        case kEdgeOnly: return bidijkstra(graph_, s, t);
        case kPch: return ch_distance(tree_, s, t);
        case kPostBoundary: return post_boundary_distance(s, t);
        default: return h2h_distance(tree_, s, t);
    }
}

std::vector<LabelMismatch> PostMhlIndex::verify_overlay_sufficiency() const {
    TreeDecomposition t = tree_;
    for (std::size_t i = 0; i < td_.partition_count(); ++i)
        for (Vertex v : td_.members[i]) {
            TreeNode& x = t.nodes[v];
            x.boundary_distances.clear();
            std::fill(x.distances.begin(), x.distances.end(), kInfDist);
        }
    std::vector<LabelMismatch> out;
    for (std::size_t i = 0; i < td_.partition_count(); ++i) {
        std::vector<Dist> table;
        build_tables(i, table);
        for (std::size_t e = 0; e < table.size(); ++e)
            if (table[e] != tables_[i][e]) out.push_back({td_.roots[i], "D", e, table[e], tables_[i][e]});
        for (Vertex v : td_.members[i]) {
            compute_boundary(t, table, i, v);
            compute_post(t, i, v);
        }
    }
    for (std::size_t i = 0; i < td_.partition_count(); ++i)
        for (Vertex v : td_.members[i]) compute_cross(t, v);
    for (std::size_t i = 0; i < td_.partition_count(); ++i)
        for (Vertex v : td_.members[i]) {
            const TreeNode& want = t.nodes[v];
            const TreeNode& have = tree_.nodes[v];
            for (std::size_t j = 0; j < want.boundary_distances.size(); ++j) {
                const Dist got = j < have.boundary_distances.size() ? have.boundary_distances[j] : kInfDist;
                if (got != want.boundary_distances[j]) out.push_back({v, "disB", j, want.boundary_distances[j], got});
            }
            for (std::size_t j = 0; j < want.distances.size(); ++j)
                if (have.distances[j] != want.distances[j]) out.push_back({v, "dis", j, want.distances[j], have.distances[j]});
        }
    return out;
}

}  // namespace dynsp
