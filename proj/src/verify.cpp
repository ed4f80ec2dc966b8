#include "dynsp/verify.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>

#include <json.hpp>

#include "dynsp/engines.hpp"
#include "dynsp/generators.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/pmhl.hpp"
#include "dynsp/postmhl.hpp"

namespace dynsp {

namespace {

constexpr std::size_t kMaxFailuresPerInvariant = 5;
constexpr std::size_t kAllPairsLimit = 300;
constexpr std::size_t kUpdateBatches = 5;

using Matrix = std::vector<std::vector<Dist>>;

class Checker {
public:
    explicit Checker(SuiteResult& r) : r_(r) {}
    bool check(bool ok, const std::string& invariant, const std::function<std::string()>& detail) {
        ++r_.checks;
        if (ok) return true;
        if (++counts_[invariant] <= kMaxFailuresPerInvariant) r_.failures.push_back(invariant + ": " + detail());
        return false;
    }

private:
    SuiteResult& r_;
    std::map<std::string, std::size_t> counts_;
};

Matrix all_pairs(const RoadNetwork& g) {
    const std::size_t n = g.vertex_count();
    Matrix d(n, std::vector<Dist>(n, kInfDist));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const Edge& e : g.edges()) {
        d[e.u][e.v] = std::min<Dist>(d[e.u][e.v], e.weight);
        d[e.v][e.u] = d[e.u][e.v];
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i][k] >= kInfDist) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (d[k][j] < kInfDist) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
        }
    return d;
}

/// Textbook Dijkstra; paths may only pass through vertices with allowed(v).
std::vector<Dist> plain_dijkstra(const RoadNetwork& g, Vertex s, const std::function<bool(Vertex)>& allowed = {}) {
    std::vector<Dist> dist(g.vertex_count(), kInfDist);
    using Item = std::pair<Dist, Vertex>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[s] = 0;
    open.push({0, s});
    while (!open.empty()) {
        const auto [d, v] = open.top();
        open.pop();
        if (d != dist[v]) continue;
        if (v != s && allowed && !allowed(v)) continue;
        for (const Arc& a : g.neighbors(v))
            if (d + a.weight < dist[a.to]) {
                dist[a.to] = d + a.weight;
                open.push({dist[a.to], a.to});
            }
    }
    return dist;
}

/// Contracts vertices in `sequence` order on an explicit adjacency map and
/// returns each vertex's neighbourhood at the moment it is contracted.
std::vector<std::map<Vertex, Dist>> explicit_contraction(const RoadNetwork& g, const std::vector<Vertex>& sequence) {
    std::vector<std::map<Vertex, Dist>> adj(g.vertex_count()), out(g.vertex_count());
    for (const Edge& e : g.edges()) adj[e.u][e.v] = adj[e.v][e.u] = e.weight;
    for (Vertex v : sequence) {
        out[v] = adj[v];
        for (const auto& [a, w] : out[v]) adj[a].erase(v);
        for (const auto& [a, wa] : out[v])
            for (const auto& [b, wb] : out[v]) {
                if (a == b) continue;
                auto it = adj[a].find(b);
                if (it == adj[a].end() || wa + wb < it->second) adj[a][b] = wa + wb;
            }
        adj[v].clear();
    }
    return out;
}

std::vector<std::vector<Vertex>> brute_canonical_hubs(const Matrix& d, const std::vector<std::uint32_t>& rank) {
    const std::size_t n = d.size();
    std::vector<std::vector<Vertex>> hubs(n);
    for (Vertex v = 0; v < n; ++v)
        for (Vertex u = 0; u < n; ++u) {
            if (d[v][u] >= kInfDist) continue;
            bool keep = true;
            for (Vertex w = 0; w < n && keep; ++w)
                if (rank[w] > rank[u] && d[v][w] < kInfDist && d[w][u] < kInfDist && d[v][w] + d[w][u] == d[v][u])
                    keep = false;
            if (keep) hubs[v].push_back(u);
        }
    return hubs;
}

std::string pair_text(Vertex s, Vertex t) { return std::to_string(s) + "->" + std::to_string(t); }

std::vector<std::string> tree_differences(const TreeDecomposition& a, const TreeDecomposition& b) {
    std::vector<std::string> out;
    if (a.size() != b.size()) return {"vertex counts differ"};
    for (Vertex v = 0; v < a.size(); ++v) {
        const TreeNode& x = a.nodes[v];
        const TreeNode& y = b.nodes[v];
        if (x.neighbors != y.neighbors || x.shortcuts != y.shortcuts) out.push_back("sc of " + std::to_string(v));
        if (x.positions != y.positions) out.push_back("pos of " + std::to_string(v));
        if (x.distances != y.distances) out.push_back("dis of " + std::to_string(v));
        if (x.boundary_distances != y.boundary_distances) out.push_back("disB of " + std::to_string(v));
    }
    return out;
}

// Compares every stage of every engine with `truth` on the given pairs.
void check_engines(Checker& c, std::vector<Engine>& engines, const std::vector<std::pair<Vertex, Vertex>>& pairs,
                   const std::function<Dist(Vertex, Vertex)>& truth, const std::string& when) {
    for (Engine& e : engines)
        for (int stage : e.stages)
            for (const auto& [s, t] : pairs) {
                const Dist got = e.index->query_stage(stage, s, t).internal();
                const Dist want = truth(s, t);
                c.check(got == want, "oracle-equivalence", [&] {
                    return e.name + " stage " + std::to_string(stage) + " " + pair_text(s, t) + " " + when + ": got " +
                           std::to_string(got) + ", expected " + std::to_string(want);
                });
            }
}

void suite_oracle(Checker& c, const RoadNetwork& g0, std::uint64_t seed) {
    RoadNetwork g = g0;
    const std::size_t n = g.vertex_count();
    EngineParams params;
    params.partitions = std::max<std::size_t>(2, std::min<std::size_t>(8, n / 16));
    params.seed = seed;
    params.td.expected_partitions = params.partitions;
    std::vector<Engine> engines;
    for (const std::string& name : engine_names()) engines.push_back(make_engine(name, g, params));

    const bool exhaustive = n <= kAllPairsLimit;
    std::vector<std::pair<Vertex, Vertex>> pairs;
    if (exhaustive) {
        for (Vertex s = 0; s < n; ++s)
            for (Vertex t = 0; t < n; ++t) pairs.emplace_back(s, t);
    } else {
        pairs = generate_query_workload(g, 500, seed);
    }
    auto run = [&](const std::string& when) {
        if (exhaustive) {
            const Matrix d = all_pairs(g);
            check_engines(c, engines, pairs, [&](Vertex s, Vertex t) { return d[s][t]; }, when);
        } else {
            std::map<Vertex, std::vector<Dist>> from;
            check_engines(c, engines, pairs,
                          [&](Vertex s, Vertex t) {
                              auto it = from.find(s);
                              if (it == from.end()) it = from.emplace(s, plain_dijkstra(g, s)).first;
                              return it->second[t];
                          },
                          when);
        }
    };
    run("after build");
    for (std::uint64_t b = 0; b < kUpdateBatches; ++b) {
        const UpdateBatch batch = generate_update_batch(g, std::max<std::size_t>(1, g.edge_count() / 10), seed + b, b);
        apply_updates(g, batch);
        for (Engine& e : engines) e.index->apply_batch(batch);
        run("after batch " + std::to_string(b));
    }
}

void suite_contraction(Checker& c, const RoadNetwork& g) {
    const TreeDecomposition t = mde_decompose(g);
    const auto want = explicit_contraction(g, t.order.sequence);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        std::map<Vertex, Dist> got;
        for (std::size_t j = 0; j < t.nodes[v].neighbors.size(); ++j)
            got[t.nodes[v].neighbors[j]] = t.nodes[v].shortcuts[j];
        c.check(got == want[v], "shortcut-equals-contraction", [&] {
            return "vertex " + std::to_string(v) + " has " + std::to_string(got.size()) +
                   " shortcuts, explicit contraction gives " + std::to_string(want[v].size()) + " (or weights differ)";
        });
    }
}

void suite_interleaving(Checker& c, const RoadNetwork& g, std::uint64_t seed) {
    const std::size_t k = std::min<std::size_t>(4, std::max<std::size_t>(2, g.vertex_count() / 8));
    const Partitioning p = partition_graph(g, k, seed);
    const VertexOrder a = boundary_first_order(g, p, InteriorInterleave::Sequential);
    const VertexOrder b = boundary_first_order(g, p, InteriorInterleave::RoundRobin);
    const MhlIndex ia(g, &a), ib(g, &b);
    const auto ha = canonical_hubs(ia.tree());
    const auto hb = canonical_hubs(ib.tree());
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        c.check(ha[v] == hb[v], "canonical-hubs-interleaving-invariant",
                [&] { return "vertex " + std::to_string(v) + " differs between interleavings"; });
    if (g.vertex_count() <= kAllPairsLimit) {
        const auto brute = brute_canonical_hubs(all_pairs(g), a.rank);
        for (Vertex v = 0; v < g.vertex_count(); ++v)
            c.check(ha[v] == brute[v], "canonical-hubs-exact",
                    [&] { return "vertex " + std::to_string(v) + " differs from brute force"; });
    }
    const PmhlIndex pm(g, p, a);
    for (Vertex v = 0; v < g.vertex_count(); ++v)
        for (Vertex u : ha[v])
            c.check(pm.cross().is_ancestor(u, v), "canonical-hubs-contained",
                    [&] { return std::to_string(u) + " is a canonical hub of " + std::to_string(v) + " but not in its label"; });
}

void suite_overlay(Checker& c, const RoadNetwork& g, std::uint64_t seed) {
    const PmhlIndex idx(g, PmhlParams{std::min<std::size_t>(4, std::max<std::size_t>(2, g.vertex_count() / 8)), seed});
    const Partitioning& p = idx.partitioning();
    std::map<Vertex, std::vector<Dist>> full;
    auto from = [&](Vertex s) -> const std::vector<Dist>& {
        auto it = full.find(s);
        if (it == full.end()) it = full.emplace(s, plain_dijkstra(g, s)).first;
        return it->second;
    };
    for (const auto& [e, w] : idx.overlay_edges()) {
        const auto [u, v] = e;
        Dist want;
        if (p.assignment[u] != p.assignment[v]) {
            want = *g.weight(u, v);
        } else {
            const auto part = p.assignment[u];
            want = plain_dijkstra(g, u, [&](Vertex x) { return p.assignment[x] == part && !p.is_boundary[x]; })[v];
        }
        c.check(w == want, "overlay-edge-restricted-exact", [&] {
            return pair_text(u, v) + " weight " + std::to_string(w) + ", restricted distance " + std::to_string(want);
        });
        c.check(w >= from(u)[v], "overlay-edge-lower-bounded",
                [&] { return pair_text(u, v) + " below the graph distance"; });
    }
    const auto& B = idx.overlay().global;
    for (Vertex a : B)
        for (Vertex b : B) {
            const Dist got = idx.overlay_distance(a, b).internal();
            c.check(got == from(a)[b], "overlay-preserves-distances", [&] {
                return pair_text(a, b) + " overlay " + std::to_string(got) + ", graph " + std::to_string(from(a)[b]);
            });
        }
}

TdPartitionParams small_td_params(const RoadNetwork& g) {
    TdPartitionParams p;
    p.expected_partitions = std::min<std::size_t>(16, std::max<std::size_t>(2, g.vertex_count() / 16));
    return p;
}

void report_sufficiency(Checker& c, const PostMhlIndex& idx, const std::string& when) {
    const auto mismatches = idx.verify_overlay_sufficiency();
    c.check(mismatches.empty(), "overlay-sufficiency", [&] {
        const LabelMismatch& m = mismatches.front();
        return std::to_string(mismatches.size()) + " entries " + when + ", first " + m.array + "[" +
               std::to_string(m.index) + "] of " + std::to_string(m.vertex) + ": " + std::to_string(m.actual) +
               " vs " + std::to_string(m.expected);
    });
}

void suite_sufficiency(Checker& c, const RoadNetwork& g0, std::uint64_t seed) {
    PostMhlIndex idx(g0, small_td_params(g0));
    report_sufficiency(c, idx, "after build");
    for (std::uint64_t b = 0; b < kUpdateBatches; ++b) {
        idx.apply_batch(generate_update_batch(idx.graph(), std::max<std::size_t>(1, idx.graph().edge_count() / 10),
                                              seed + b, b));
        report_sufficiency(c, idx, "after batch " + std::to_string(b));
    }
}

void suite_rebuild(Checker& c, const RoadNetwork& g, std::uint64_t seed) {
    MhlIndex mhl(g);
    PmhlIndex pmhl(g, PmhlParams{std::min<std::size_t>(4, std::max<std::size_t>(2, g.vertex_count() / 8)), seed});
    PostMhlIndex post(g, small_td_params(g));
    for (std::uint64_t b = 0; b < kUpdateBatches; ++b) {
        const UpdateBatch batch =
            generate_update_batch(g, std::max<std::size_t>(1, g.edge_count() / 10), seed * 31 + b, b);
        mhl.apply_batch(batch);
        pmhl.apply_batch(batch);
        post.apply_batch(batch);
        const std::string when = " after batch " + std::to_string(b);

        const MhlIndex mhl_fresh(mhl.graph(), &mhl.tree().order);
        const auto dm = tree_differences(mhl.tree(), mhl_fresh.tree());
        c.check(dm.empty(), "update-equals-rebuild", [&] { return "mhl " + dm.front() + when; });

        const PmhlIndex pmhl_fresh(pmhl.graph(), pmhl.partitioning(), pmhl.order());
        const auto dp = compare_components(pmhl, pmhl_fresh);
        c.check(dp.empty(), "update-equals-rebuild", [&] { return "pmhl " + dp.front() + when; });

        const PostMhlIndex post_fresh(post.graph(), small_td_params(g), &post.tree().order);
        auto dq = tree_differences(post.tree(), post_fresh.tree());
        for (std::size_t i = 0; i < post.partition().partition_count(); ++i)
            if (post.boundary_table(i) != post_fresh.boundary_table(i)) dq.push_back("D of partition " + std::to_string(i));
        c.check(dq.empty(), "update-equals-rebuild", [&] { return "postmhl " + dq.front() + when; });
    }
}

}  // namespace

std::string SuiteResult::to_json() const {
    nlohmann::json j{{"schema", "verify-suite/1"}, {"suite", suite},       {"graphs", graphs},
                     {"checks", checks},           {"passed", passed()}, {"failures", failures}};
    return j.dump();
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"oracle", "contraction", "interleaving",
                                                "overlay", "sufficiency", "rebuild"};
    return names;
}

SuiteResult run_suite(std::string_view suite, std::span<const RoadNetwork> graphs, std::uint64_t seed) {
    SuiteResult r;
    r.suite = std::string(suite);
    Checker c(r);
    for (const RoadNetwork& g : graphs) {
        if (g.vertex_count() == 0) continue;
        ++r.graphs;
        if (suite == "oracle") {
            suite_oracle(c, g, seed);
        } else if (suite == "contraction") {
            suite_contraction(c, g);
        } else if (suite == "interleaving") {
            suite_interleaving(c, g, seed);
        } else if (suite == "overlay") {
            suite_overlay(c, g, seed);
        } else if (suite == "sufficiency") {
            suite_sufficiency(c, g, seed);
        } else if (suite == "rebuild") {
            suite_rebuild(c, g, seed);
        } else {
            throw std::invalid_argument("unknown suite '" + std::string(suite) + "'");
        }
    }
    return r;
}

std::vector<RoadNetwork> builtin_verify_graphs(std::uint64_t seed) {
    return {grid_graph(8, 8, 20, seed), random_connected_graph(64, 40, 20, seed), road_like_graph(64, seed)};
}

SuiteResult verify_snapshot(const RoadNetwork& g, const TreeDecomposition& t, bool has_labels) {
    SuiteResult r;
    r.suite = "snapshot";
    r.graphs = 1;
    Checker c(r);
    if (!c.check(t.size() == g.vertex_count(), "snapshot-matches-graph", [&] {
            return "snapshot has " + std::to_string(t.size()) + " vertices, graph " + std::to_string(g.vertex_count());
        }))
        return r;
    for (const std::string& v : validate_decomposition(g, t, false))
        c.check(false, "tree-decomposition", [&] { return v; });
    if (!r.passed()) return r;
    // a shortcut is the distance over paths through lower-ranked vertices only
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        const auto& node = t.nodes[v];
        const auto below = plain_dijkstra(g, v, [&](Vertex x) { return t.order.rank[x] < t.order.rank[v]; });
        for (std::size_t j = 0; j < node.neighbors.size(); ++j)
            c.check(node.shortcuts[j] == below[node.neighbors[j]], "shortcut-exactness", [&] {
                return "sc(" + std::to_string(v) + "," + std::to_string(node.neighbors[j]) + ") = " +
                       std::to_string(node.shortcuts[j]) + ", expected " + std::to_string(below[node.neighbors[j]]);
            });
        if (!has_labels) continue;
        const auto d = plain_dijkstra(g, v);
        if (!c.check(node.distances.size() == node.depth + 1, "label-exactness",
                     [&] { return "dis of " + std::to_string(v) + " has the wrong length"; }))
            continue;
        for (std::size_t j = 0; j < node.depth; ++j)
            c.check(node.distances[j] == d[node.ancestors[j]], "label-exactness", [&] {
                return "dis(" + std::to_string(v) + ")[" + std::to_string(j) + "] = " +
                       std::to_string(node.distances[j]) + ", expected " + std::to_string(d[node.ancestors[j]]);
            });
    }
    return r;
}

}  // namespace dynsp
