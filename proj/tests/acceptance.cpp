// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance [--only 1,2,...] [--horizon periods] [--vertices n]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dynsp/engines.hpp"
#include "dynsp/generators.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/pmhl.hpp"
#include "dynsp/postmhl.hpp"
#include "dynsp/rng.hpp"
#include "dynsp/throughput.hpp"
#include "support/oracles.hpp"

using namespace dynsp;

namespace {

struct Settings {
    std::set<int> only;
    std::size_t horizon = 2;     // periods per throughput probe
    std::size_t vertices = 5000;  // throughput graph
};

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects the first few failure messages of a criterion.
class Failures {
public:
    void add(const std::string& msg) {
        if (++count_ <= 3) messages_.push_back(msg);
    }
    std::size_t count() const { return count_; }
    Outcome outcome(const std::string& ok_detail) const {
        if (count_ == 0) return {true, ok_detail};
        std::string d = std::to_string(count_) + " failure(s); first: ";
        for (std::size_t i = 0; i < messages_.size(); ++i) d += (i ? " | " : "") + messages_[i];
        return {false, d};
    }

private:
    std::size_t count_ = 0;
    std::vector<std::string> messages_;
};

std::string pair_text(Vertex s, Vertex t) { return std::to_string(s) + "->" + std::to_string(t); }

EngineParams small_params(std::size_t n, std::uint64_t seed) {
    EngineParams p;
    p.partitions = std::max<std::size_t>(2, n / 16);
    p.seed = seed;
    p.td.expected_partitions = 4;
    p.td.bandwidth = n;
    return p;
}

std::vector<RoadNetwork> criterion1_graphs() {
    std::vector<RoadNetwork> out;
    Rng rng(20241);
    for (std::uint64_t i = 0; i < 50; ++i) {
        const std::size_t n = rng.between(8, 64);
        const std::size_t extra = rng.between(0, n);
        out.push_back(random_connected_graph(n, extra, 20, 1000 + i));
    }
    return out;
}

std::vector<std::pair<std::string, RoadNetwork>> criterion2_graphs() {
    return {{"road-2000", road_like_graph(2000, 2024)}, {"grid-64x64", grid_graph(64, 64, 20, 2024)}};
}

// ---------------------------------------------------------------------------

Outcome oracle_exhaustive() {
    Failures f;
    std::uint64_t checked = 0;
    const auto graphs = criterion1_graphs();
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        RoadNetwork g = graphs[gi];
        const std::size_t n = g.vertex_count();
        std::vector<Engine> engines;
        try {
            for (const std::string& name : engine_names()) engines.push_back(make_engine(name, g, small_params(n, gi)));
        } catch (const std::exception& e) {
            f.add("graph " + std::to_string(gi) + " build: " + e.what());
            continue;
        }
        for (int round = 0; round <= 10; ++round) {
            if (round > 0) {
                const UpdateBatch b =
                    generate_update_batch(g, std::max<std::size_t>(1, g.edge_count() / 4), gi * 100 + round, round);
                apply_updates(g, b);
                for (Engine& e : engines) e.index->apply_batch(b);
            }
            const auto d = oracle::floyd_warshall(g);
            for (Engine& e : engines)
                for (int stage = 1; stage <= e.index->stage_count(); ++stage)
                    for (Vertex s = 0; s < n; ++s)
                        for (Vertex t = 0; t < n; ++t) {
                            ++checked;
                            const Dist got = e.index->query_stage(stage, s, t).internal();
                            if (got != d[s][t])
                                f.add(e.name + " stage " + std::to_string(stage) + " graph " + std::to_string(gi) +
                                      " round " + std::to_string(round) + " " + pair_text(s, t));
                        }
        }
    }
    return f.outcome("50 graphs, 6 engines, all stages, 11 states, " + std::to_string(checked) + " pairs exact");
}

Outcome oracle_sampled() {
    Failures f;
    std::uint64_t checked = 0;
    for (auto [name, g] : criterion2_graphs()) {
        std::vector<Engine> engines;
        for (const std::string& e : engine_names()) engines.push_back(make_engine(e, g));
        for (int round = 0; round <= 20; ++round) {
            if (round > 0) {
                const UpdateBatch b = generate_update_batch(g, 50, 500 + round, round);
                apply_updates(g, b);
                for (Engine& e : engines) e.index->apply_batch(b);
            }
            const auto pairs = generate_query_workload(g, 500, 900 + round);
            for (const auto& [s, t] : pairs) {
                const Dist want = oracle::dijkstra(g, s)[t];
                for (Engine& e : engines)
                    for (int stage = 1; stage <= e.index->stage_count(); ++stage) {
                        ++checked;
                        if (e.index->query_stage(stage, s, t).internal() != want)
                            f.add(name + " " + e.name + " stage " + std::to_string(stage) + " round " +
                                  std::to_string(round) + " " + pair_text(s, t));
                    }
            }
        }
    }
    return f.outcome("road-2000 and grid-64x64, 21 states, " + std::to_string(checked) + " stage queries exact");
}

Outcome shortcuts_equal_contraction() {
    Failures f;
    std::size_t vertices = 0;
    const auto graphs = criterion1_graphs();
    for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
        const RoadNetwork& g = graphs[gi];
        std::vector<Vertex> shuffled(g.vertex_count());
        for (Vertex v = 0; v < shuffled.size(); ++v) shuffled[v] = v;
        Rng rng(gi);
        for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
        const VertexOrder mde = mde_decompose(g).order;
        for (const VertexOrder& order : {mde, VertexOrder::from_sequence(shuffled)}) {
            const TreeDecomposition t = mde_decompose(g, &order);
            const auto want = oracle::ch_contraction(g, order.sequence);
            for (Vertex v = 0; v < g.vertex_count(); ++v) {
                ++vertices;
                std::map<Vertex, Dist> got;
                for (std::size_t j = 0; j < t.nodes[v].neighbors.size(); ++j)
                    got[t.nodes[v].neighbors[j]] = t.nodes[v].shortcuts[j];
                if (got != want[v]) f.add("graph " + std::to_string(gi) + " vertex " + std::to_string(v));
            }
        }
    }
    return f.outcome("MDE and random pinned orders, " + std::to_string(vertices) + " shortcut arrays equal");
}

Outcome interleavings_and_containment() {
    Failures f;
    std::size_t hubs_checked = 0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const std::size_t n = 80 + 12 * i;
        const RoadNetwork g = i % 2 ? road_like_graph(n, 70 + i) : random_connected_graph(n, n / 2, 20, 70 + i);
        const Partitioning p = partition_graph(g, 4, i + 1);
        const VertexOrder a = boundary_first_order(g, p, InteriorInterleave::Sequential);
        const VertexOrder b = boundary_first_order(g, p, InteriorInterleave::RoundRobin);
        if (a.sequence == b.sequence) f.add("graph " + std::to_string(i) + ": interleavings coincide");
        const auto d = oracle::floyd_warshall(g);
        const auto ha = oracle::canonical_hubs(d, a.rank);
        const auto hb = oracle::canonical_hubs(d, b.rank);
        const MhlIndex ia(g, &a), ib(g, &b);
        const auto la = canonical_hubs(ia.tree()), lb = canonical_hubs(ib.tree());
        const PmhlIndex star(g, p, a);
        for (Vertex v = 0; v < n; ++v) {
            if (ha[v] != hb[v]) f.add("graph " + std::to_string(i) + " vertex " + std::to_string(v) + ": hub sets differ");
            if (la[v] != ha[v] || lb[v] != hb[v])
                f.add("graph " + std::to_string(i) + " vertex " + std::to_string(v) + ": index hubs differ from brute force");
            for (Vertex u : ha[v]) {
                ++hubs_checked;
                if (!star.cross().is_ancestor(u, v))
                    f.add("graph " + std::to_string(i) + ": hub " + std::to_string(u) + " of " + std::to_string(v) +
                          " missing from the cross-boundary label");
            }
        }
    }
    return f.outcome("10 graphs (n 80..188, k=4): identical canonical hubs, " + std::to_string(hubs_checked) +
                     " hubs contained in L*");
}

Outcome overlay_edges() {
    Failures f;
    std::size_t edges = 0, exact_global = 0, pairs = 0;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const std::size_t n = 80 + 12 * i;
        const RoadNetwork g = i % 2 ? road_like_graph(n, 70 + i) : random_connected_graph(n, n / 2, 20, 70 + i);
        const Partitioning p = partition_graph(g, 4, i + 1);
        const PmhlIndex idx(g, p, boundary_first_order(g, p));
        const auto d = oracle::floyd_warshall(g);
        for (const auto& [e, w] : idx.overlay_edges()) {
            const auto [u, v] = e;
            ++edges;
            Dist restricted;
            if (p.assignment[u] != p.assignment[v]) {
                restricted = *g.weight(u, v);
            } else {
                const auto part = p.assignment[u];
                restricted = oracle::dijkstra(g, u, [&](Vertex x) { return p.assignment[x] == part && !p.is_boundary[x]; })[v];
            }
            if (w != restricted) f.add("edge " + pair_text(u, v) + " differs from the restricted oracle");
            if (w < d[u][v]) f.add("edge " + pair_text(u, v) + " below the graph distance");
            if (w == d[u][v]) ++exact_global;
        }
        for (Vertex a : idx.overlay().global)
            for (Vertex b : idx.overlay().global) {
                ++pairs;
                if (idx.overlay_distance(a, b).internal() != d[a][b]) f.add("overlay distance " + pair_text(a, b));
            }
    }
    return f.outcome(std::to_string(edges) + " overlay edges equal the in-partition oracle (" +
                     std::to_string(exact_global) + " also equal d_G), " + std::to_string(pairs) +
                     " boundary pairs preserve d_G");
}

Outcome overlay_sufficiency() {
    Failures f;
    std::size_t runs = 0;
    for (auto [name, g] : criterion2_graphs()) {
        PostMhlIndex idx(g);
        for (int round = 0; round <= 10; ++round) {
            if (round > 0) idx.apply_batch(generate_update_batch(idx.graph(), 50, 700 + round, round));
            ++runs;
            const auto m = idx.verify_overlay_sufficiency();
            if (!m.empty())
                f.add(name + " round " + std::to_string(round) + ": " + std::to_string(m.size()) + " mismatches, first " +
                      m[0].array + " of " + std::to_string(m[0].vertex));
        }
    }
    return f.outcome(std::to_string(runs) + " checks (build + 10 batches on both graphs), zero mismatches");
}

std::vector<std::string> tree_diff(const TreeDecomposition& a, const TreeDecomposition& b) {
    std::vector<std::string> out;
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

Outcome update_equals_rebuild() {
    Failures f;
    std::size_t comparisons = 0;
    for (auto [name, g] : criterion2_graphs()) {
        MhlIndex mhl(g);
        PmhlIndex pmhl(g, PmhlParams{8, 3});
        PostMhlIndex post(g);
        for (int round = 1; round <= 20; ++round) {
            const UpdateBatch b = generate_update_batch(mhl.graph(), 50, 800 + round, round);
            mhl.apply_batch(b);
            pmhl.apply_batch(b);
            post.apply_batch(b);
            const std::string when = name + " batch " + std::to_string(round) + ": ";
            const auto dm = tree_diff(mhl.tree(), MhlIndex(mhl.graph(), &mhl.tree().order).tree());
            if (!dm.empty()) f.add(when + "mhl " + dm.front());
            const auto dp = compare_components(pmhl, PmhlIndex(pmhl.graph(), pmhl.partitioning(), pmhl.order()));
            if (!dp.empty()) f.add(when + "pmhl " + dp.front());
            const PostMhlIndex fresh(post.graph(), TdPartitionParams{}, &post.tree().order);
            auto dq = tree_diff(post.tree(), fresh.tree());
            for (std::size_t i = 0; i < post.partition().partition_count(); ++i)
                if (post.boundary_table(i) != fresh.boundary_table(i)) dq.push_back("D of partition " + std::to_string(i));
            if (!dq.empty()) f.add(when + "postmhl " + dq.front());
            comparisons += 3;
        }
    }
    return f.outcome(std::to_string(comparisons) +
                     " index comparisons (sc, dis, pos, disB, D, L*) equal to pinned rebuilds after every batch");
}

Outcome queueing_fidelity() {
    Failures f;
    const double mean = 0.001, rate = 500;
    WorkloadConfig c;
    c.interval = 100;
    c.horizon = 3;
    c.arrival = rate;
    const SimulationTrace tr = simulate(exponential_model(mean), c);
    const double rho = rate * mean;
    const double predicted = mean + rate * 2 * mean * mean / (2 * (1 - rho));
    const double err = std::abs(tr.mean_response - predicted) / predicted;
    if (tr.query_count < 100000) f.add("only " + std::to_string(tr.query_count) + " queries");
    if (err > 0.10) f.add("mean response off by " + std::to_string(100 * err) + "%");
    if (analytic_bound(0.001, 0, 120, 120, 1) != 0) f.add("t_u = interval does not clamp to 0");
    if (analytic_bound(0.001, 0, 150, 120, 1) != 0) f.add("t_u > interval does not clamp to 0");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu queries, R=%.4g ms vs P-K %.4g ms (%.2f%%); overload clamp 0",
                  static_cast<unsigned long long>(tr.query_count), 1e3 * tr.mean_response, 1e3 * predicted, 100 * err);
    return f.outcome(buf);
}

// Measured rates are bisection results with 5% relative resolution, so
// "a >= b" is read as "a is not below b by more than that resolution".
bool at_least(double a, double b) { return a >= 0.95 * b; }

Outcome throughput_ordering(const Settings& s) {
    Failures f;
    std::ostringstream detail;
    const std::vector<std::string> names{"postmhl", "pmhl", "mhl", "dh2h", "dch"};
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        const RoadNetwork g = road_like_graph(s.vertices, 4000 + seed);
        WorkloadConfig c;
        c.interval = 10;
        c.updates = 100;
        c.qos = 0.5;
        c.horizon = s.horizon;
        c.seed = seed;
        std::map<std::string, double> rate;
        for (const std::string& name : names) {
            Engine e = make_engine(name, g);
            const ServiceModel m = calibrated_model(e, c, {3, 5000});
            const ThroughputReport rep = measure_max_throughput(m, c);
            rate[name] = rep.throughput;
            if (rep.throughput > 1.15 * rep.analytic)
                f.add("seed " + std::to_string(seed) + " " + name + " exceeds its analytic bound by more than 15%");
            WorkloadConfig at = c;
            at.arrival = rep.throughput;
            if (simulate(m, at).causality_violations != 0) f.add(name + " served a query from an unpublished stage");
        }
        const std::vector<std::pair<std::string, std::string>> order{
            {"postmhl", "pmhl"}, {"pmhl", "mhl"}, {"mhl", "dh2h"}, {"pmhl", "dch"}};
        for (const auto& [a, b] : order)
            if (!at_least(rate[a], rate[b]))
                f.add("seed " + std::to_string(seed) + ": " + a + " " + std::to_string(rate[a]) + " < " + b + " " +
                      std::to_string(rate[b]));
        detail << (seed > 1 ? "; " : "") << "seed " << seed << ":";
        for (const std::string& n : names) detail << ' ' << n << '=' << static_cast<long long>(rate[n]);
    }
    const Outcome o = f.outcome("");
    return {o.pass, (o.pass ? std::string() : o.detail + " || ") + "lambda* per engine (queries/s, " +
                        std::to_string(s.vertices) + " vertices, horizon " + std::to_string(s.horizon) +
                        " periods): " + detail.str()};
}

Outcome parallel_speedup(const Settings& s) {
    const RoadNetwork g = road_like_graph(s.vertices, 4001);
    auto median_pass = [&](unsigned workers) {
        PostMhlIndex idx(g);
        idx.set_workers(workers);
        std::vector<double> t;
        for (int run = 0; run < 5; ++run) t.push_back(idx.apply_batch(generate_update_batch(idx.graph(), 1000, 60 + run, run)).total());
        std::sort(t.begin(), t.end());
        return t[2];
    };
    const double one = median_pass(1), eight = median_pass(8);
    const double speedup = one / eight;
    char buf[200];
    std::snprintf(buf, sizeof buf, "median pass p=1 %.4g s, p=8 %.4g s, speedup %.2fx (need 1.5x; %u hardware threads)",
                  one, eight, speedup, std::thread::hardware_concurrency());
    return {speedup >= 1.5, buf};
}

Outcome monotone_and_causal() {
    Failures f;
    std::size_t passes = 0, observed = 0;
    const RoadNetwork g = road_like_graph(1500, 99);
    std::vector<std::unique_ptr<StagedIndex>> indexes;
    indexes.push_back(std::make_unique<MhlIndex>(g));
    indexes.push_back(std::make_unique<PmhlIndex>(g, PmhlParams{6, 2}));
    indexes.push_back(std::make_unique<PostMhlIndex>(g));
    for (auto& idx : indexes) {
        idx->set_workers(2);
        for (int round = 0; round < 10; ++round) {
            std::vector<int> seen;
            const StageTimeline tl = idx->apply_batch(generate_update_batch(idx->graph(), 80, 50 + round, round), [&](int stage) {
                seen.push_back(stage);
                ++observed;
                if (idx->published_stage() != stage) f.add(std::string(idx->kind()) + " marker disagrees with publication");
                idx->query_stage(stage, 0, 1);  // must be legal
                if (stage < idx->stage_count()) {
                    try {
                        idx->query_stage(stage + 1, 0, 1);
                        f.add(std::string(idx->kind()) + " answered from unpublished stage " + std::to_string(stage + 1));
                    } catch (const StageError&) {
                    }
                }
            });
            ++passes;
            if (!tl.monotone() || !std::is_sorted(seen.begin(), seen.end()))
                f.add(std::string(idx->kind()) + " published stages out of order");
            if (seen.empty() || seen.back() != idx->stage_count()) f.add(std::string(idx->kind()) + " pass did not finish");
        }
    }
    // the simulator's own check, on every calibrated engine
    std::uint64_t simulated = 0;
    for (const std::string& name : engine_names()) {
        Engine e = make_engine(name, g);
        WorkloadConfig c;
        c.interval = 0.05;
        c.updates = 50;
        c.horizon = 200;
        c.arrival = 5000;
        const SimulationTrace tr = simulate(calibrated_model(e, c, {3, 500}), c);
        simulated += tr.query_count;
        if (tr.causality_violations)
            f.add(name + ": " + std::to_string(tr.causality_violations) + " simulated causality violations");
    }
    return f.outcome(std::to_string(passes) + " instrumented passes, " + std::to_string(observed) +
                     " publications checked; " + std::to_string(simulated) + " simulated queries causal");
}

}  // namespace

int main(int argc, char** argv) {
    Settings s;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        const std::string value = argv[i + 1];
        if (flag == "--only") {
            std::stringstream in(value);
            std::string item;
            while (std::getline(in, item, ',')) s.only.insert(std::stoi(item));
        } else if (flag == "--horizon") {
            s.horizon = std::stoul(value);
        } else if (flag == "--vertices") {
            s.vertices = std::stoul(value);
        } else {
            std::fprintf(stderr, "unknown flag %s\n", flag.c_str());
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle equivalence, exhaustive", oracle_exhaustive},
        {"oracle equivalence, sampled", oracle_sampled},
        {"shortcuts equal explicit contraction", shortcuts_equal_contraction},
        {"interleaving-invariant canonical hubs, contained in L*", interleavings_and_containment},
        {"overlay edges exact", overlay_edges},
        {"overlay sufficiency", overlay_sufficiency},
        {"update equals rebuild", update_equals_rebuild},
        {"M/G/1 fidelity and overload clamp", queueing_fidelity},
        {"throughput ordering", [&] { return throughput_ordering(s); }},
        {"parallel maintenance speedup", [&] { return parallel_speedup(s); }},
        {"stage monotonicity and causality", monotone_and_causal},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i + 1);
        if (!s.only.empty() && !s.only.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    return failed ? 1 : 0;
}
