#include <gtest/gtest.h>

#include <sstream>

#include "dynsp/generators.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/verify.hpp"

using namespace dynsp;

TEST(Verify, AllSuitesPassOnBuiltinGraphs) {
    const auto graphs = builtin_verify_graphs(1);
    for (const std::string& suite : suite_names()) {
        const SuiteResult r = run_suite(suite, graphs, 1);
        EXPECT_EQ(r.graphs, graphs.size());
        EXPECT_GT(r.checks, 0u) << suite;
        EXPECT_TRUE(r.passed()) << suite << ": " << (r.failures.empty() ? "" : r.failures.front());
    }
}

TEST(Verify, InterleavingOnLargerPartitionedGraph) {
    const std::vector<RoadNetwork> g{road_like_graph(200, 4)};
    const SuiteResult r = run_suite("interleaving", g, 3);
    EXPECT_TRUE(r.passed()) << (r.failures.empty() ? "" : r.failures.front());
    EXPECT_GT(r.checks, 400u);
}

TEST(Verify, UnknownSuiteThrows) {
    EXPECT_THROW(run_suite("nope", builtin_verify_graphs(), 1), std::invalid_argument);
}

TEST(Verify, SnapshotRoundTripPasses) {
    const RoadNetwork g = road_like_graph(100, 2);
    const MhlIndex idx(g);
    std::stringstream buf;
    write_snapshot(buf, idx.tree(), true);
    bool labels = false;
    const TreeDecomposition t = read_snapshot(buf, &labels);
    EXPECT_TRUE(labels);
    const SuiteResult r = verify_snapshot(g, t, labels);
    EXPECT_TRUE(r.passed()) << r.failures.front();
}

TEST(Verify, CorruptedSnapshotNamesInvariant) {
    const RoadNetwork g = road_like_graph(100, 2);
    const MhlIndex idx(g);
    TreeDecomposition t = idx.tree();
    Vertex v = 0;
    while (t.nodes[v].shortcuts.empty()) ++v;
    t.nodes[v].shortcuts[0] += 3;
    SuiteResult r = verify_snapshot(g, t, true);
    ASSERT_FALSE(r.passed());
    EXPECT_EQ(r.failures.front().rfind("shortcut-exactness:", 0), 0u) << r.failures.front();

    t = idx.tree();
    Vertex w = 0;
    while (t.nodes[w].depth == 0) ++w;
    t.nodes[w].distances[0] += 1;
    r = verify_snapshot(g, t, true);
    ASSERT_EQ(r.failures.size(), 1u);
    EXPECT_EQ(r.failures.front().rfind("label-exactness:", 0), 0u) << r.failures.front();
}
