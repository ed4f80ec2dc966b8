#include <gtest/gtest.h>

#include <set>

#include "dynsp/generators.hpp"
#include "dynsp/pmhl.hpp"
#include "dynsp/rng.hpp"
#include "support/oracles.hpp"

using namespace dynsp;

namespace {

void expect_all_stages_exact(const PmhlIndex& idx, std::size_t pairs, std::uint64_t seed) {
    const auto& g = idx.graph();
    Rng rng(seed);
    for (std::size_t q = 0; q < pairs; ++q) {
        const Vertex s = static_cast<Vertex>(rng.below(g.vertex_count()));
        const Vertex t = static_cast<Vertex>(rng.below(g.vertex_count()));
        const Dist want = oracle::dijkstra(g, s)[t];
        for (int stage = 1; stage <= idx.published_stage(); ++stage)
            ASSERT_EQ(idx.query_stage(stage, s, t).internal(), want) << "stage " << stage << " " << s << "->" << t;
    }
}

}  // namespace

TEST(Pmhl, SinglePartitionDegenerates) {
    const RoadNetwork g = road_like_graph(300, 3);
    const PmhlIndex idx(g, PmhlParams{1, 7});
    EXPECT_EQ(idx.overlay().global.size(), 0u);
    EXPECT_TRUE(idx.overlay_edges().empty());
    const auto& part = idx.partition(0).tree;
    const auto& ext = idx.extended(0).tree;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        EXPECT_EQ(idx.cross().nodes[v].neighbors, part.nodes[v].neighbors);
        EXPECT_EQ(idx.cross().nodes[v].distances, part.nodes[v].distances);
        EXPECT_EQ(ext.nodes[v].distances, part.nodes[v].distances);
    }
    expect_all_stages_exact(idx, 100, 3);
}

TEST(Pmhl, SameVertexIsZeroAtEveryStage) {
    const PmhlIndex idx(road_like_graph(200, 4), PmhlParams{4, 1});
    for (int stage = 1; stage <= 5; ++stage) EXPECT_EQ(idx.query_stage(stage, 17, 17), Distance{0});
}

TEST(Pmhl, OverlayEdgesMatchRestrictedDistances) {
    const RoadNetwork g = road_like_graph(2000, 11);
    const PmhlIndex idx(g, PmhlParams{8, 5});
    const Partitioning& p = idx.partitioning();
    ASSERT_GT(p.boundary_count(), 0u);
    std::size_t intra = 0;
    for (const auto& [e, w] : idx.overlay_edges()) {
        const auto [u, v] = e;
        if (p.assignment[u] != p.assignment[v]) {
            EXPECT_EQ(w, Dist{*g.weight(u, v)});
            continue;
        }
        // paths through interior vertices of the same partition only
        const auto part = p.assignment[u];
        const auto d = oracle::dijkstra(g, u, [&](Vertex x) { return p.assignment[x] == part && !p.is_boundary[x]; });
        EXPECT_EQ(w, d[v]) << u << "-" << v;
        ++intra;
    }
    EXPECT_GT(intra, 0u);
}

TEST(Pmhl, OverlayPreservesBoundaryDistances) {
    const RoadNetwork g = road_like_graph(2000, 11);
    const PmhlIndex idx(g, PmhlParams{8, 5});
    const auto& B = idx.overlay().global;
    for (std::size_t a = 0; a < B.size(); a += 3) {
        const auto d = oracle::dijkstra(g, B[a]);
        for (Vertex b : B) {
            ASSERT_EQ(idx.overlay_distance(B[a], b).internal(), d[b]);
            ASSERT_EQ(idx.query_stage(PmhlIndex::kPch, B[a], b).internal(), d[b]);
        }
    }
}

TEST(Pmhl, AllStagesMatchOracle) {
    const PmhlIndex idx(road_like_graph(2000, 21), PmhlParams{8, 2});
    expect_all_stages_exact(idx, 300, 9);
}

TEST(Pmhl, AggregatedTreeStructure) {
    const RoadNetwork g = random_connected_graph(500, 150, 40, 4);
    const PmhlIndex idx(g, PmhlParams{4, 8});
    const auto& cross = idx.cross();
    const auto& p = idx.partitioning();
    // children of a boundary vertex: overlay children plus its partition's non-boundary children
    for (Vertex v : idx.overlay().global) {
        std::set<Vertex> want;
        for (Vertex c : idx.overlay().tree.nodes[idx.overlay_id(v)].children) want.insert(idx.overlay().global[c]);
        const LocalTree& L = idx.partition(p.assignment[v]);
        for (Vertex c : L.tree.nodes[idx.local_id(v)].children)
            if (!p.is_boundary[L.global[c]]) want.insert(L.global[c]);
        const auto& ch = cross.nodes[v].children;
        EXPECT_EQ(std::set<Vertex>(ch.begin(), ch.end()), want) << v;
        EXPECT_EQ(cross.nodes[v].distances, idx.overlay().tree.nodes[idx.overlay_id(v)].distances);
    }
    Rng rng(1);
    std::size_t checked = 0;
    while (checked < 100) {
        const Vertex s = static_cast<Vertex>(rng.below(500));
        const Vertex t = static_cast<Vertex>(rng.below(500));
        if (p.assignment[s] == p.assignment[t]) continue;
        EXPECT_EQ(h2h_distance(cross, s, t).internal(), oracle::dijkstra(g, s)[t]);
        ++checked;
    }
}

TEST(Pmhl, CanonicalHubsContainedInCrossTree) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const RoadNetwork g = random_connected_graph(60, 30, 9, seed);
        const PmhlIndex idx(g, PmhlParams{3, seed});
        const auto hubs = oracle::canonical_hubs(oracle::floyd_warshall(g), idx.order().rank);
        for (Vertex v = 0; v < 60; ++v)
            for (Vertex u : hubs[v]) EXPECT_TRUE(idx.cross().is_ancestor(u, v)) << u << " hub of " << v;
    }
}

TEST(Pmhl, FlatCrossLabelsCoverAllPairs) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const RoadNetwork g = random_connected_graph(64, 40, 12, seed + 10);
        const PmhlIndex idx(g, PmhlParams{4, seed});
        const auto labels = idx.flat_cross_labels();
        const auto d = oracle::floyd_warshall(g);
        for (Vertex s = 0; s < 64; ++s)
            for (Vertex t = 0; t < 64; ++t) {
                Dist best = kInfDist;
                auto a = labels[s].begin();
                auto b = labels[t].begin();
                while (a != labels[s].end() && b != labels[t].end()) {
                    if (a->first < b->first) {
                        ++a;
                    } else if (b->first < a->first) {
                        ++b;
                    } else {
                        best = std::min(best, add(a->second, b->second));
                        ++a, ++b;
                    }
                }
                ASSERT_EQ(best, d[s][t]) << s << "->" << t;
            }
    }
}

TEST(Pmhl, EmptyBatchRepublishesAllStages) {
    PmhlIndex idx(road_like_graph(300, 2), PmhlParams{4, 3});
    const StageTimeline tl = idx.apply_batch(UpdateBatch{});
    EXPECT_EQ(idx.published_stage(), 5);
    ASSERT_EQ(tl.stages.size(), 5u);
    for (const auto& s : tl.stages) EXPECT_EQ(s.touched, 0u) << s.name;
}

TEST(Pmhl, InterEdgeDecreaseLeavesPartitionsAlone) {
    const RoadNetwork g = road_like_graph(800, 6);
    PmhlIndex idx(g, PmhlParams{6, 4});
    const auto [u, v] = idx.partitioning().inter_edges.front();
    const Weight w = *g.weight(u, v);
    const StageTimeline tl = idx.apply_batch(UpdateBatch{1, {{u, v, std::max<Weight>(1, w / 2)}}});
    EXPECT_EQ(tl.counters.at("partition_shortcut_entries"), 0u);
    EXPECT_EQ(tl.counters.at("partition_label_entries"), 0u);
    EXPECT_GT(tl.counters.at("overlay_shortcut_entries"), 0u);
    const PmhlIndex rebuilt(idx.graph(), idx.partitioning(), idx.order());
    EXPECT_TRUE(compare_components(idx, rebuilt).empty());
}

TEST(Pmhl, UpdatesMatchOracleAndRebuild) {
    PmhlIndex idx(road_like_graph(1000, 17), PmhlParams{6, 9});
    idx.set_workers(2);
    for (std::uint64_t batch = 0; batch < 20; ++batch) {
        const UpdateBatch b = generate_update_batch(idx.graph(), 40, 100 + batch, batch);
        std::vector<int> seen;
        idx.apply_batch(b, [&](int stage) {
            seen.push_back(stage);
            Rng rng(batch * 7 + static_cast<std::uint64_t>(stage));
            for (int q = 0; q < 10; ++q) {
                const Vertex s = static_cast<Vertex>(rng.below(1000));
                const Vertex t = static_cast<Vertex>(rng.below(1000));
                ASSERT_EQ(idx.query_stage(stage, s, t).internal(), oracle::dijkstra(idx.graph(), s)[t])
                    << "batch " << batch << " stage " << stage;
            }
            if (stage < 5) EXPECT_THROW(idx.query_stage(stage + 1, 0, 1), StageError);
        });
        EXPECT_EQ(seen, (std::vector<int>{1, 2, 3, 4, 5}));
        const PmhlIndex rebuilt(idx.graph(), idx.partitioning(), idx.order());
        const auto diff = compare_components(idx, rebuilt);
        ASSERT_TRUE(diff.empty()) << "batch " << batch << ": " << diff.front();
    }
}

TEST(CrossUpdateFrontier, SingleSubtreeGivesOneRoot) {
    const PmhlIndex idx(road_like_graph(300, 8), PmhlParams{4, 1});
    const auto& t = idx.cross();
    const Vertex r = t.roots.front();
    std::vector<Vertex> set{r};
    for (Vertex c : t.nodes[r].children) set.push_back(c);
    EXPECT_EQ(cross_update_frontier(t, set), std::vector<Vertex>{r});
}

TEST(CrossUpdateFrontier, RandomSetsAreCoveredByIndependentRoots) {
    const PmhlIndex idx(road_like_graph(600, 8), PmhlParams{5, 1});
    const auto& t = idx.cross();
    Rng rng(5);
    for (int round = 0; round < 20; ++round) {
        std::vector<Vertex> set;
        for (int i = 0; i < 30; ++i) set.push_back(static_cast<Vertex>(rng.below(600)));
        const auto roots = cross_update_frontier(t, set);
        for (Vertex a : roots)
            for (Vertex b : roots)
                if (a != b) EXPECT_FALSE(t.is_ancestor(a, b));
        for (Vertex v : set) {
            bool covered = false;
            for (Vertex r : roots) covered = covered || t.is_ancestor(r, v);
            EXPECT_TRUE(covered);
        }
    }
}
