// throughput.hpp - batch-update / Poisson-query simulation.
//
// One server handles both update passes and queries. A batch arrives at the
// start of every period; its pass starts once the in-flight query (and any
// earlier pass) is done. Queries cannot start until the pass publishes its
// first query stage; later maintenance stages run concurrently with queries,
// which use the freshest stage published when they start.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dynsp/engines.hpp"
#include "dynsp/rng.hpp"

namespace dynsp {

struct WorkloadConfig {
    double interval = 120;    // seconds between batches
    std::size_t updates = 1000;
    double qos = 1.0;         // bound on mean response time, seconds
    double arrival = 0;       // queries per second
    std::size_t horizon = 10; // periods
    std::uint64_t seed = 1;
    bool record_queries = false;

    /// Throws std::invalid_argument on a non-positive interval or qos, a zero
    /// horizon or a negative arrival rate.
    void validate() const;
    std::string to_json() const;
};

/// Publications of one maintenance pass: (query stage, offset in seconds).
using PassProfile = std::vector<std::pair<int, double>>;

/// What the simulator needs from an engine.
struct ServiceModel {
    std::string name;
    std::vector<int> stages;      // stages queries may be served from, ascending
    int blocking_stage = 1;       // queries wait until this stage is published
    /// Maintenance pass for period `p` (empty: no pass).
    std::function<PassProfile(std::size_t p)> pass;
    /// Service time in seconds of one query answered from `stage`.
    std::function<double(int stage, Rng& rng)> service;

    // Filled by calibrated_model: the recorded passes and the mean
    // measured service time per served stage.
    std::vector<StageTimeline> timelines;
    std::map<int, double> mean_service;

    int serving_stage(int published) const;
};

struct QueryRecord {
    double arrival;
    double start;
    double completion;
    int stage;
};

struct PassRecord {
    double period_start;
    double start;
    double end;
    PassProfile publications;  // absolute times
};

struct SimulationTrace {
    std::vector<QueryRecord> queries;  // only with record_queries
    std::vector<PassRecord> passes;
    std::uint64_t query_count = 0;
    std::vector<std::uint64_t> stage_queries;  // indexed by stage
    double mean_query = 0;     // t_q
    double var_query = 0;      // V_q
    double mean_update = 0;    // t_u, whole pass
    double mean_blocked = 0;   // part of the pass during which no query may start
    double mean_response = 0;  // R_q
    double p95_response = 0;
    std::uint64_t causality_violations = 0;
    bool overload = false;     // t_u >= interval
};

SimulationTrace simulate(const ServiceModel& model, const WorkloadConfig& cfg);

/// Largest arrival rate with mean response <= r_star under M/G/1 service,
/// capped by the capacity left over after updates. Returns 0 when the QoS
/// is unattainable (r_star <= t_q) or updates take the whole period.
double analytic_bound(double t_q, double v_q, double t_u, double interval, double r_star);

struct ProbeRecord {
    double arrival;
    bool pass;
    std::uint64_t queries;
    double mean_response, p95_response, mean_query, var_query, mean_update, mean_blocked;
    std::string to_json() const;  // schema "probe/1"
};

struct ThroughputReport {
    std::string engine;
    WorkloadConfig config;
    double throughput = 0;  // measured maximum arrival rate
    double analytic = 0;    // bound from the stats of the probe at `throughput`
    bool qos_violated = false;
    bool overload = false;
    std::vector<ProbeRecord> probes;
    std::string to_json() const;  // schema "throughput-report/1"
};

/// Doubles the arrival rate from 1/s until a probe fails (mean response above
/// qos, or overload), then bisects to 5% relative precision. Capped at 1e7/s.
ThroughputReport measure_max_throughput(const ServiceModel& model, WorkloadConfig cfg);

struct CalibrationConfig {
    std::size_t batches = 3;     // real passes recorded, replayed cyclically
    std::size_t samples = 2000;  // timed queries per stage
};

/// Deterministic model: applies `calibration.batches` real batches of
/// cfg.updates to the engine, then times sample queries per served stage.
/// Simulation draws from these recordings only.
ServiceModel calibrated_model(Engine& engine, const WorkloadConfig& cfg, const CalibrationConfig& calibration = {});

/// Wall-clock model: every period applies a real batch and every query runs
/// and is timed on the engine. Not reproducible.
ServiceModel live_model(Engine& engine, const WorkloadConfig& cfg);

/// Static engine with exponential service times; for queueing checks.
ServiceModel exponential_model(double mean_service);
/// Static engine with constant service time and optional zero-length passes.
ServiceModel constant_model(double service);

}  // namespace dynsp
