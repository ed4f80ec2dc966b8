#include <gtest/gtest.h>

#include "dynsp/generators.hpp"
#include "dynsp/postmhl.hpp"
#include "dynsp/rng.hpp"
#include "support/oracles.hpp"

using namespace dynsp;

namespace {

TdPartitionParams params(std::size_t ke) {
    TdPartitionParams p;
    p.expected_partitions = ke;
    return p;
}

std::vector<std::string> differences(const PostMhlIndex& a, const PostMhlIndex& b) {
    std::vector<std::string> out;
    for (Vertex v = 0; v < a.tree().size(); ++v) {
        const TreeNode& x = a.tree().nodes[v];
        const TreeNode& y = b.tree().nodes[v];
        if (x.shortcuts != y.shortcuts) out.push_back("shortcuts of " + std::to_string(v));
        if (x.distances != y.distances) out.push_back("dis of " + std::to_string(v));
        if (x.boundary_distances != y.boundary_distances) out.push_back("disB of " + std::to_string(v));
    }
    for (std::size_t i = 0; i < a.partition().partition_count(); ++i)
        if (a.boundary_table(i) != b.boundary_table(i)) out.push_back("D of partition " + std::to_string(i));
    return out;
}

void expect_stages_exact(const PostMhlIndex& idx, std::size_t pairs, std::uint64_t seed) {
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

TEST(PostMhl, SinglePartitionReducesToH2H) {
    const RoadNetwork g = road_like_graph(400, 2);
    TdPartitionParams p = params(1);
    p.bandwidth = 1000;
    const PostMhlIndex idx(g, p);
    EXPECT_EQ(idx.partition().partition_count(), 1u);
    const MhlIndex plain(g, &idx.tree().order);
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        EXPECT_EQ(idx.tree().nodes[v].distances, plain.tree().nodes[v].distances);
    expect_stages_exact(idx, 100, 1);
}

TEST(PostMhl, LabelsMatchOracle) {
    const RoadNetwork g = road_like_graph(2000, 31);
    const PostMhlIndex idx(g, params(16));
    const auto& td = idx.partition();
    const auto& t = idx.tree();
    ASSERT_GT(td.partition_count(), 1u);
    // every boundary array entry
    std::vector<std::vector<Dist>> from(g.vertex_count());
    for (std::size_t i = 0; i < td.partition_count(); ++i) {
        const auto& B = t.nodes[td.roots[i]].neighbors;
        for (std::size_t j = 0; j < B.size(); ++j) {
            if (from[B[j]].empty()) from[B[j]] = oracle::dijkstra(g, B[j]);
            for (Vertex v : td.members[i]) {
                ASSERT_EQ(t.nodes[v].boundary_distances.size(), B.size());
                ASSERT_EQ(t.nodes[v].boundary_distances[j], from[B[j]][v]) << v << " to " << B[j];
            }
        }
    }
    for (Vertex v : td.overlay) EXPECT_TRUE(t.nodes[v].boundary_distances.empty());
    // every distance entry: all of them against H2H with the same order, a sample against Dijkstra
    const MhlIndex plain(g, &t.order);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        ASSERT_EQ(t.nodes[v].distances, plain.tree().nodes[v].distances) << v;
        ASSERT_EQ(t.nodes[v].distances.back(), 0u);
    }
    Rng rng(3);
    for (int r = 0; r < 60; ++r) {
        const Vertex v = static_cast<Vertex>(rng.below(g.vertex_count()));
        const auto d = oracle::dijkstra(g, v);
        for (std::size_t j = 0; j < t.nodes[v].depth; ++j)
            EXPECT_EQ(t.nodes[v].distances[j], d[t.nodes[v].ancestors[j]]);
    }
}

TEST(PostMhl, AllStagesMatchOracle) {
    const PostMhlIndex idx(road_like_graph(2000, 5), params(16));
    expect_stages_exact(idx, 300, 4);
}

TEST(PostMhl, BorderQueryCollapsesToBoundaryArray) {
    const PostMhlIndex idx(road_like_graph(1000, 6), params(8));
    const auto& td = idx.partition();
    for (std::size_t i = 0; i < td.partition_count(); ++i) {
        const auto& B = idx.tree().nodes[td.roots[i]].neighbors;
        const Vertex v = td.members[i].back();
        for (std::size_t j = 0; j < B.size(); ++j)
            EXPECT_EQ(idx.query_stage(PostMhlIndex::kPostBoundary, v, B[j]).internal(),
                      idx.tree().nodes[v].boundary_distances[j]);
    }
}

TEST(PostMhl, SameVertexIsZero) {
    const PostMhlIndex idx(road_like_graph(300, 6), params(4));
    for (int stage = 1; stage <= 4; ++stage) EXPECT_EQ(idx.query_stage(stage, 5, 5), Distance{0});
}

TEST(PostMhl, EmptyBatch) {
    PostMhlIndex idx(road_like_graph(300, 6), params(4));
    const StageTimeline tl = idx.apply_batch(UpdateBatch{});
    EXPECT_EQ(idx.published_stage(), 4);
    for (const auto& s : tl.stages) EXPECT_EQ(s.touched, 0u) << s.name;
    EXPECT_TRUE(tl.monotone());
}

TEST(PostMhl, UpdatesMatchOracleAndRebuild) {
    PostMhlIndex idx(road_like_graph(2000, 8), params(16));
    idx.set_workers(2);
    for (std::uint64_t batch = 0; batch < 20; ++batch) {
        const UpdateBatch b = generate_update_batch(idx.graph(), 50, 300 + batch, batch);
        std::vector<int> seen;
        const StageTimeline tl = idx.apply_batch(b, [&](int stage) {
            seen.push_back(stage);
            Rng rng(batch * 13 + static_cast<std::uint64_t>(stage));
            for (int q = 0; q < 8; ++q) {
                const Vertex s = static_cast<Vertex>(rng.below(2000));
                const Vertex t = static_cast<Vertex>(rng.below(2000));
                ASSERT_EQ(idx.query_stage(stage, s, t).internal(), oracle::dijkstra(idx.graph(), s)[t])
                    << "batch " << batch << " stage " << stage;
            }
        });
        EXPECT_EQ(seen, (std::vector<int>{1, 2, 3, 4}));
        EXPECT_TRUE(tl.monotone());
        const PostMhlIndex rebuilt(idx.graph(), params(16), &idx.tree().order);
        const auto diff = differences(idx, rebuilt);
        ASSERT_TRUE(diff.empty()) << "batch " << batch << ": " << diff.front();
    }
}

TEST(PostMhl, OverlaySufficiency) {
    PostMhlIndex idx(road_like_graph(1500, 12), params(12));
    EXPECT_TRUE(idx.verify_overlay_sufficiency().empty());
    for (std::uint64_t batch = 0; batch < 10; ++batch)
        idx.apply_batch(generate_update_batch(idx.graph(), 60, 40 + batch, batch));
    EXPECT_TRUE(idx.verify_overlay_sufficiency().empty());

    const auto& td = idx.partition();
    const Vertex v = td.members[0].back();
    idx.mutable_tree().nodes[v].boundary_distances[0] += 1;
    const auto report = idx.verify_overlay_sufficiency();
    ASSERT_EQ(report.size(), 1u);
    EXPECT_EQ(report[0].vertex, v);
    EXPECT_EQ(report[0].array, "disB");
    EXPECT_EQ(report[0].index, 0u);
    EXPECT_EQ(report[0].actual, report[0].expected + 1);
}

TEST(PostMhl, PhaseOrderDoesNotMatter) {
    const RoadNetwork g = road_like_graph(1200, 14);
    PostMhlIndex parallel(g, params(10)), post_first(g, params(10)), cross_first(g, params(10));
    parallel.set_workers(4);
    post_first.set_phase_order(PostMhlIndex::PhaseOrder::PostFirst);
    cross_first.set_phase_order(PostMhlIndex::PhaseOrder::CrossFirst);
    for (std::uint64_t batch = 0; batch < 6; ++batch) {
        const UpdateBatch b = generate_update_batch(g, 80, 70 + batch, batch);
        parallel.apply_batch(b);
        post_first.apply_batch(b);
        cross_first.apply_batch(b);
        EXPECT_TRUE(differences(parallel, post_first).empty());
        EXPECT_TRUE(differences(parallel, cross_first).empty());
    }
}

TEST(PostMhl, CrossPartitionQueryWorkEqualsH2H) {
    const RoadNetwork g = road_like_graph(1500, 15);
    const PostMhlIndex idx(g, params(12));
    const MhlIndex plain(g, &idx.tree().order);
    const auto& part = idx.partition().part_of;
    Rng rng(2);
    int checked = 0;
    while (checked < 200) {
        const Vertex s = static_cast<Vertex>(rng.below(1500));
        const Vertex t = static_cast<Vertex>(rng.below(1500));
        if (part[s] == part[t] && part[s] != kOverlay) continue;
        std::uint64_t a = 0, b = 0;
        EXPECT_EQ(h2h_distance(idx.tree(), s, t, &a), h2h_distance(plain.tree(), s, t, &b));
        EXPECT_EQ(a, b);
        ++checked;
    }
}
