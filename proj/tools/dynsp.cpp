// dynsp - build, query, verify and benchmark dynamic shortest-distance indexes.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error (including
// infeasible parameters), 3 I/O error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dynsp/engines.hpp"
#include "dynsp/generators.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/pmhl.hpp"
#include "dynsp/postmhl.hpp"
#include "dynsp/throughput.hpp"
#include "dynsp/tree_decomposition.hpp"
#include "dynsp/verify.hpp"

#ifndef DYNSP_FIXTURE_DIR
#define DYNSP_FIXTURE_DIR "tests/fixtures"
#endif

using namespace dynsp;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kUsage = 2, kIo = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string graph;
    std::string index = "mhl";
    std::string engines;
    std::string snapshot;
    std::string queries;
    std::string batch;
    std::string output;
    std::string method = "region";
    std::string clock = "virtual";
    std::vector<std::string> pairs;
    std::vector<std::string> suites;
    std::size_t partitions = 8;
    std::size_t ke = 16;
    std::size_t bandwidth = 100;
    double beta_l = 0.1;
    double beta_u = 2.0;
    unsigned workers = 1;
    int stage = 0;
    WorkloadConfig workload;
    std::size_t samples = 2000;
    std::size_t calibration_batches = 3;
    std::uint64_t seed = 1;
    bool json = false;
};

// Which tuning flags the user set explicitly.
struct Given {
    bool partitions = false, ke = false, bandwidth = false, beta_l = false, beta_u = false;
    bool td() const { return ke || bandwidth || beta_l || beta_u; }
};

std::string fixture_dir() {
    const char* dir = std::getenv("DYNSP_FIXTURES");
    return dir && *dir ? dir : DYNSP_FIXTURE_DIR;
}

// A path, or a generated graph: road:<n>[:seed], grid:<rows>x<cols>[:seed], random:<n>[:seed].
RoadNetwork load_graph(const std::string& source) {
    if (source.empty()) throw UsageError("--graph is required");
    if (!std::filesystem::exists(source)) {
        const auto colon = source.find(':');
        if (colon != std::string::npos) {
            const std::string kind = source.substr(0, colon);
            std::string rest = source.substr(colon + 1);
            std::uint64_t seed = 1;
            if (const auto c2 = rest.find(':'); c2 != std::string::npos) {
                seed = std::stoull(rest.substr(c2 + 1));
                rest = rest.substr(0, c2);
            }
            try {
                if (kind == "road") return road_like_graph(std::stoull(rest), seed);
                if (kind == "random") {
                    const std::size_t n = std::stoull(rest);
                    return random_connected_graph(n, n / 2, 20, seed);
                }
                if (kind == "grid") {
                    const auto x = rest.find('x');
                    if (x == std::string::npos) throw UsageError("grid graphs are written grid:<rows>x<cols>");
                    return grid_graph(std::stoull(rest.substr(0, x)), std::stoull(rest.substr(x + 1)), 20, seed);
                }
            } catch (const std::logic_error&) {
                throw UsageError("malformed generated graph '" + source + "'");
            }
        }
    }
    try {
        return load_dimacs(source);
    } catch (const std::exception& e) {
        throw IoError(source + ": " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<std::string> requested_engines(const Options& o) {
    std::vector<std::string> names = o.engines.empty() ? std::vector<std::string>{o.index} : split_list(o.engines);
    if (names.empty()) throw UsageError("no engine given");
    for (std::string& n : names) {
        try {
            n = canonical_engine_name(n);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
    return names;
}

// Index-specific flags must match an index that uses them.
void check_tuning(const std::vector<std::string>& engines, const Given& given) {
    const bool pmhl = std::find(engines.begin(), engines.end(), "pmhl") != engines.end();
    const bool post = std::find(engines.begin(), engines.end(), "postmhl") != engines.end();
    if (given.partitions && !pmhl) throw UsageError("--partitions applies to pmhl only");
    if (given.td() && !post) throw UsageError("--ke, --bandwidth, --beta-l and --beta-u apply to postmhl only");
}

EngineParams engine_params(const Options& o) {
    EngineParams p;
    p.partitions = o.partitions;
    p.td.expected_partitions = o.ke;
    p.td.bandwidth = o.bandwidth;
    p.td.beta_lower = o.beta_l;
    p.td.beta_upper = o.beta_u;
    p.workers = o.workers;
    p.seed = o.seed;
    return p;
}

std::string distance_text(Distance d) { return d.reachable() ? std::to_string(d.internal()) : "inf"; }

const TreeDecomposition* snapshot_tree(const Engine& e, bool* labels) {
    *labels = true;
    if (const auto* m = dynamic_cast<const MhlIndex*>(e.index.get())) {
        *labels = e.name != "dch";
        return &m->tree();
    }
    if (const auto* p = dynamic_cast<const PmhlIndex*>(e.index.get())) return &p->cross();
    if (const auto* q = dynamic_cast<const PostMhlIndex*>(e.index.get())) return &q->tree();
    return nullptr;
}

json build_report(const Engine& e) {
    const IndexSize size = e.index->size();
    json j{{"schema", "build-report/1"},
           {"index", e.name},
           {"vertices", e.index->graph().vertex_count()},
           {"edges", e.index->graph().edge_count()},
           {"t_c", e.build_seconds},
           {"entries", size.entries},
           {"bytes", size.bytes},
           {"workers", e.index->workers()}};
    bool labels = false;
    if (const TreeDecomposition* t = snapshot_tree(e, &labels)) {
        j["tree_height"] = t->height();
        j["treewidth"] = t->treewidth();
    }
    if (const auto* p = dynamic_cast<const PmhlIndex*>(e.index.get())) {
        j["partitions"] = p->partitioning().k;
        j["boundary_vertices"] = p->partitioning().boundary_count();
        json steps = json::array();
        for (const StageRecord& s : p->build_steps())
            steps.push_back({{"name", s.name}, {"start", s.start}, {"end", s.end}});
        j["build_steps"] = steps;
    }
    if (const auto* q = dynamic_cast<const PostMhlIndex*>(e.index.get())) {
        j["partitions"] = q->partition().partition_count();
        j["overlay_vertices"] = q->partition().overlay.size();
    }
    return j;
}

void print_fields(const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "schema") continue;
        if (value.is_array()) {
            std::cout << std::left << std::setw(18) << key << '\n';
            for (const auto& item : value) std::cout << "  " << item.dump() << '\n';
        } else {
            std::cout << std::left << std::setw(18) << key << (value.is_string() ? value.get<std::string>() : value.dump())
                      << '\n';
        }
    }
}

int cmd_build(const Options& o, const Given& given) {
    const auto engines = requested_engines(o);
    if (engines.size() != 1) throw UsageError("build takes a single --index");
    check_tuning(engines, given);
    const RoadNetwork g = load_graph(o.graph);
    Engine e = make_engine(engines[0], g, engine_params(o));
    json report = build_report(e);
    if (!o.snapshot.empty()) {
        bool labels = false;
        const TreeDecomposition* t = snapshot_tree(e, &labels);
        if (!t) throw UsageError(e.name + " has no tree to snapshot");
        std::ofstream out(o.snapshot, std::ios::binary);
        if (!out) throw IoError("cannot write " + o.snapshot);
        write_snapshot(out, *t, labels);
        if (!out) throw IoError("write failed: " + o.snapshot);
        report["snapshot"] = o.snapshot;
    }
    if (o.json)
        std::cout << report.dump() << '\n';
    else
        print_fields(report);
    return kOk;
}

std::vector<std::pair<Vertex, Vertex>> query_pairs(const Options& o, std::size_t n) {
    std::vector<std::pair<Vertex, Vertex>> pairs;
    if (!o.queries.empty()) {
        std::ifstream in(o.queries);
        if (!in) throw IoError("cannot open " + o.queries);
        try {
            pairs = read_queries(in);
        } catch (const std::exception& e) {
            throw IoError(o.queries + ": " + e.what());
        }
    }
    for (const std::string& p : o.pairs) {
        const auto parts = split_list(p);
        if (parts.size() != 2) throw UsageError("--pair takes s,t");
        try {
            pairs.emplace_back(static_cast<Vertex>(std::stoul(parts[0])), static_cast<Vertex>(std::stoul(parts[1])));
        } catch (const std::logic_error&) {
            throw UsageError("--pair takes s,t");
        }
    }
    if (pairs.empty()) throw UsageError("no queries: use --queries <file> or --pair s,t");
    for (const auto& [s, t] : pairs)
        if (s >= n || t >= n) throw UsageError("query vertex out of range");
    return pairs;
}

int cmd_query(const Options& o, const Given& given) {
    const RoadNetwork g0 = load_graph(o.graph);
    const auto pairs = query_pairs(o, g0.vertex_count());
    std::vector<std::pair<std::string, Distance>> answers;
    int stage_used = 0;
    if (!o.snapshot.empty()) {
        std::ifstream in(o.snapshot, std::ios::binary);
        if (!in) throw IoError("cannot open " + o.snapshot);
        bool labels = false;
        TreeDecomposition t;
        try {
            t = read_snapshot(in, &labels);
        } catch (const std::exception& e) {
            throw IoError(o.snapshot + ": " + e.what());
        }
        if (t.size() != g0.vertex_count()) throw IoError("snapshot does not match the graph");
        for (const auto& [s, d] : pairs)
            answers.emplace_back("", labels ? h2h_distance(t, s, d) : ch_distance(t, s, d));
    } else {
        const auto engines = requested_engines(o);
        if (engines.size() != 1) throw UsageError("query takes a single --index");
        check_tuning(engines, given);
        Engine e = make_engine(engines[0], g0, engine_params(o));
        if (!o.batch.empty()) {
            std::ifstream in(o.batch);
            if (!in) throw IoError("cannot open " + o.batch);
            UpdateBatch b;
            try {
                b = read_update_batch(in);
            } catch (const std::exception& ex) {
                throw IoError(o.batch + ": " + ex.what());
            }
            try {
                e.index->apply_batch(b);
            } catch (const std::invalid_argument& ex) {
                throw UsageError(std::string("update batch rejected: ") + ex.what());
            }
        }
        stage_used = o.stage == 0 ? e.index->published_stage() : o.stage;
        if (stage_used < 1 || stage_used > e.index->stage_count())
            throw UsageError("--stage must be in 1.." + std::to_string(e.index->stage_count()));
        for (const auto& [s, d] : pairs) answers.emplace_back("", e.index->query_stage(stage_used, s, d));
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto [s, t] = pairs[i];
        const Distance d = answers[i].second;
        if (o.json) {
            json j{{"schema", "query/1"}, {"s", s}, {"t", t}, {"distance", d.reachable() ? json(d.internal()) : json()}};
            if (stage_used) j["stage"] = stage_used;
            std::cout << j.dump() << '\n';
        } else {
            std::cout << s << ' ' << t << ' ' << distance_text(d) << '\n';
        }
    }
    return kOk;
}

std::vector<RoadNetwork> verify_graphs(const Options& o) {
    std::vector<RoadNetwork> graphs;
    const std::filesystem::path dir(fixture_dir());
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("verify_", 0) == 0 && entry.path().extension() == ".gr") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) graphs.push_back(load_graph(f.string()));
    if (graphs.empty()) graphs = builtin_verify_graphs(o.seed);
    if (!o.graph.empty()) {
        RoadNetwork g = load_graph(o.graph);
        if (g.vertex_count() <= 2000)
            graphs.push_back(std::move(g));
        else
            std::cerr << "note: " << o.graph << " has " << g.vertex_count() << " vertices; suites use the fixtures only\n";
    }
    return graphs;
}

bool print_suite(const Options& o, const SuiteResult& r) {
    if (o.json) {
        std::cout << r.to_json() << '\n';
    } else {
        std::cout << (r.passed() ? "PASS " : "FAIL ") << std::left << std::setw(13) << r.suite << " graphs=" << r.graphs
                  << " checks=" << r.checks << '\n';
        for (const std::string& f : r.failures) std::cout << "  " << f << '\n';
    }
    return r.passed();
}

int cmd_verify(const Options& o) {
    bool ok = true;
    if (!o.snapshot.empty()) {
        const RoadNetwork g = load_graph(o.graph);
        std::ifstream in(o.snapshot, std::ios::binary);
        if (!in) throw IoError("cannot open " + o.snapshot);
        SuiteResult r;
        try {
            bool labels = false;
            const TreeDecomposition t = read_snapshot(in, &labels);
            r = verify_snapshot(g, t, labels);
        } catch (const std::runtime_error& e) {
            r.suite = "snapshot";
            r.graphs = 1;
            r.checks = 1;
            r.failures.push_back(std::string("snapshot-format: ") + e.what());
        }
        return print_suite(o, r) ? kOk : kVerifyFailed;
    }
    std::vector<std::string> suites = o.suites.empty() ? suite_names() : o.suites;
    for (const std::string& s : suites)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw UsageError("unknown suite '" + s + "'");
    const auto graphs = verify_graphs(o);
    for (const std::string& s : suites) ok = print_suite(o, run_suite(s, graphs, o.seed)) && ok;
    return ok ? kOk : kVerifyFailed;
}

json stage_summary(const ServiceModel& m) {
    json tq = json::object(), tu = json::object();
    for (const auto& [stage, mean] : m.mean_service) tq[std::to_string(stage)] = mean;
    std::map<std::string, double> sums;
    std::vector<std::string> names;
    for (const StageTimeline& tl : m.timelines)
        for (const StageRecord& r : tl.stages) {
            if (!sums.count(r.name)) names.push_back(r.name);
            sums[r.name] += r.end - r.start;
        }
    for (const std::string& n : names) tu[n] = sums[n] / static_cast<double>(m.timelines.size());
    return {{"t_q", tq}, {"t_u", tu}};
}

int cmd_bench(const Options& o, const Given& given) {
    const auto engines = requested_engines(o);
    check_tuning(engines, given);
    if (o.clock != "virtual" && o.clock != "wall") throw UsageError("--clock is virtual or wall");
    o.workload.validate();
    const RoadNetwork g = load_graph(o.graph);
    if (!o.json) std::cout << "config " << o.workload.to_json() << '\n';
    std::vector<std::pair<std::string, double>> ranking;
    for (const std::string& name : engines) {
        Engine e = make_engine(name, g, engine_params(o));
        json report = build_report(e);
        report["schema"] = "bench-report/1";
        report["clock"] = o.clock;
        report["config"] = json::parse(o.workload.to_json());
        const ServiceModel model = o.clock == "wall" ? live_model(e, o.workload)
                                                     : calibrated_model(e, o.workload, {o.calibration_batches, o.samples});
        if (o.clock == "virtual") report["stages"] = stage_summary(model);
        if (o.workload.arrival > 0) {
            const SimulationTrace tr = simulate(model, o.workload);
            report["arrival"] = o.workload.arrival;
            report["queries"] = tr.query_count;
            report["R_q"] = tr.mean_response;
            report["p95"] = tr.p95_response;
            report["t_q"] = tr.mean_query;
            report["V_q"] = tr.var_query;
            report["t_u"] = tr.mean_update;
            report["t_blocked"] = tr.mean_blocked;
            report["qos_met"] = !tr.overload && tr.mean_response <= o.workload.qos;
            report["overload"] = tr.overload;
            report["causality_violations"] = tr.causality_violations;
        } else {
            const ThroughputReport rep = measure_max_throughput(model, o.workload);
            for (const ProbeRecord& p : rep.probes) {
                if (o.json) {
                    json j = json::parse(p.to_json());
                    j["engine"] = name;
                    std::cout << j.dump() << '\n';
                } else {
                    std::cout << std::left << std::setw(10) << name << " lambda=" << std::setw(12) << p.arrival
                              << (p.pass ? " pass" : " FAIL") << " R=" << p.mean_response << " p95=" << p.p95_response
                              << " t_q=" << p.mean_query << " V_q=" << p.var_query << " t_u=" << p.mean_update << '\n';
                }
            }
            report["lambda_max"] = rep.throughput;
            report["analytic_bound"] = rep.analytic;
            report["qos_violated"] = rep.qos_violated;
            report["overload"] = rep.overload;
            ranking.emplace_back(name, rep.throughput);
        }
        if (o.json)
            std::cout << report.dump() << '\n';
        else
            print_fields(report);
    }
    if (ranking.size() > 1) {
        std::stable_sort(ranking.begin(), ranking.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        json order = json::array();
        for (const auto& [name, rate] : ranking) order.push_back({{"engine", name}, {"lambda_max", rate}});
        if (o.json) {
            std::cout << json{{"schema", "bench-ranking/1"}, {"ranking", order}}.dump() << '\n';
        } else {
            std::cout << "ranking";
            for (const auto& [name, rate] : ranking) std::cout << ' ' << name << '=' << rate;
            std::cout << '\n';
        }
    }
    return kOk;
}

int cmd_partition(const Options& o, const Given& given) {
    if (o.method != "region" && o.method != "td") throw UsageError("--method is region or td");
    if (o.method == "region" && given.td()) throw UsageError("--ke, --bandwidth, --beta-l and --beta-u need --method td");
    if (o.method == "td" && given.partitions) throw UsageError("--partitions needs --method region");
    const RoadNetwork g = load_graph(o.graph);
    std::ofstream file;
    if (!o.output.empty()) {
        file.open(o.output);
        if (!file) throw IoError("cannot write " + o.output);
    }
    std::ostream& out = o.output.empty() ? std::cout : file;
    json summary{{"schema", "partition-report/1"}, {"method", o.method}, {"vertices", g.vertex_count()}};
    if (o.method == "region") {
        const Partitioning p = partition_graph(g, o.partitions, o.seed);
        write_partitioning(out, p);
        summary["k"] = p.k;
        summary["cut"] = p.cut_size();
        summary["boundary"] = p.boundary_count();
    } else {
        TdPartitionParams params;
        params.expected_partitions = o.ke;
        params.bandwidth = o.bandwidth;
        params.beta_lower = o.beta_l;
        params.beta_upper = o.beta_u;
        const TreeDecomposition t = mde_decompose(g);
        const TdPartition p = td_partition(t, params);
        write_td_partition(out, p);
        summary["partitions"] = p.partition_count();
        summary["overlay"] = p.overlay.size();
        summary["candidates"] = p.candidate_count;
    }
    std::cerr << summary.dump() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamic shortest-distance indexes for road networks"};
    app.require_subcommand(1);
    Options o;

    auto graph_opt = [&](CLI::App* c) { c->add_option("--graph", o.graph, "DIMACS .gr file, or road:<n>, grid:<r>x<c>, random:<n>"); };
    auto index_opts = [&](CLI::App* c) {
        c->add_option("--index", o.index, "bidijkstra, ch, h2h, mhl, pmhl or postmhl (dch, dh2h accepted)");
        c->add_option("--partitions", o.partitions, "k, pmhl partitions")->check(CLI::PositiveNumber);
        c->add_option("--ke", o.ke, "expected partition count, postmhl")->check(CLI::PositiveNumber);
        c->add_option("--bandwidth", o.bandwidth, "tau, largest partition boundary, postmhl");
        c->add_option("--beta-l", o.beta_l, "lower subtree size factor, postmhl");
        c->add_option("--beta-u", o.beta_u, "upper subtree size factor, postmhl");
        c->add_option("--workers", o.workers, "maintenance worker threads")->check(CLI::PositiveNumber);
        c->add_option("--seed", o.seed, "seed for partitioning and generated workloads");
    };

    CLI::App* build = app.add_subcommand("build", "build an index and report t_c and |L|");
    graph_opt(build);
    index_opts(build);
    build->add_option("--snapshot", o.snapshot, "write the index tree to this file");
    build->add_flag("--json", o.json, "line-delimited JSON output");

    CLI::App* query = app.add_subcommand("query", "answer distance queries");
    graph_opt(query);
    index_opts(query);
    query->add_option("--queries", o.queries, "file of '<s> <t>' lines");
    query->add_option("--pair", o.pairs, "s,t (repeatable)");
    query->add_option("--batch", o.batch, "update batch applied before querying");
    query->add_option("--stage", o.stage, "query stage (default: freshest)");
    query->add_option("--snapshot", o.snapshot, "answer from a snapshot instead of building");
    query->add_flag("--json", o.json, "line-delimited JSON output");

    CLI::App* verify = app.add_subcommand("verify", "run invariant suites");
    graph_opt(verify);
    verify->add_option("--suite", o.suites, "suite to run (repeatable; default all)");
    verify->add_option("--snapshot", o.snapshot, "check a snapshot against --graph");
    verify->add_option("--seed", o.seed, "seed for partitions and update batches");
    verify->add_flag("--json", o.json, "line-delimited JSON output");

    CLI::App* bench = app.add_subcommand("bench", "measure the maximum sustainable query throughput");
    graph_opt(bench);
    index_opts(bench);
    bench->add_option("--engines", o.engines, "comma-separated engines sharing one workload");
    bench->add_option("--interval", o.workload.interval, "seconds between update batches");
    bench->add_option("--updates", o.workload.updates, "updates per batch");
    bench->add_option("--qos", o.workload.qos, "bound on the mean response time, seconds");
    bench->add_option("--arrival", o.workload.arrival, "fixed arrival rate; skips the throughput search");
    bench->add_option("--horizon", o.workload.horizon, "periods per simulation run");
    bench->add_option("--clock", o.clock, "virtual (calibrated, reproducible) or wall");
    bench->add_option("--samples", o.samples, "timed queries per stage when calibrating");
    bench->add_option("--calibration-batches", o.calibration_batches, "real passes recorded when calibrating");
    bench->add_flag("--json", o.json, "line-delimited JSON output");

    CLI::App* partition = app.add_subcommand("partition", "partition a graph and write the partition file");
    graph_opt(partition);
    partition->add_option("--method", o.method, "region (k partitions) or td (tree-decomposition based)");
    partition->add_option("--partitions", o.partitions, "k")->check(CLI::PositiveNumber);
    partition->add_option("--ke", o.ke, "expected partition count")->check(CLI::PositiveNumber);
    partition->add_option("--bandwidth", o.bandwidth, "tau");
    partition->add_option("--beta-l", o.beta_l, "lower subtree size factor");
    partition->add_option("--beta-u", o.beta_u, "upper subtree size factor");
    partition->add_option("--seed", o.seed, "seed");
    partition->add_option("--output", o.output, "partition file (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    o.workload.seed = o.seed;

    CLI::App* cmd = app.get_subcommands().front();
    Given given;
    auto set = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
    given.partitions = set("--partitions");
    given.ke = set("--ke");
    given.bandwidth = set("--bandwidth");
    given.beta_l = set("--beta-l");
    given.beta_u = set("--beta-u");

    try {
        if (cmd == build) return cmd_build(o, given);
        if (cmd == query) return cmd_query(o, given);
        if (cmd == verify) return cmd_verify(o);
        if (cmd == bench) return cmd_bench(o, given);
        return cmd_partition(o, given);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        // infeasible parameters surface here, e.g. a TD-partitioning without candidates
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
}
