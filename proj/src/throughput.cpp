#include "dynsp/throughput.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <memory>
#include <stdexcept>

#include <json.hpp>

namespace dynsp {

namespace {

constexpr double kStartRate = 1.0;
constexpr double kMaxRate = 1e7;
constexpr double kPrecision = 0.05;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Running mean and variance. Sums are taken around the first sample, which
// keeps the variance well conditioned without a division per sample.
struct Moments {
    std::uint64_t n = 0;
    double shift = 0, sum = 0, sum_sq = 0;
    void add(double x) {
        if (n == 0) shift = x;
        ++n;
        const double d = x - shift;
        sum += d;
        sum_sq += d * d;
    }
    double mean() const { return n ? shift + sum / static_cast<double>(n) : 0; }
    double variance() const {
        if (n < 2) return 0;
        const double m = sum / static_cast<double>(n);
        return std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
    }
};

// Histogram of positive durations with 64 bins per power of two (about 1%
// relative resolution), indexed straight from the bits of the double.
class DurationHistogram {
public:
    void add(double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof bits);
        const std::uint64_t bin = bits >> 46;  // sign 0, 11 exponent bits, 6 mantissa bits
        if (bin >= counts_.size()) counts_.resize(bin + 1, 0);
        ++counts_[bin];
        ++total_;
    }
    /// Upper edge of the bin holding the q-quantile; 0 if empty.
    double quantile(double q) const {
        if (total_ == 0) return 0;
        const auto target = static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(total_)));
        std::uint64_t seen = 0;
        for (std::size_t b = 0; b < counts_.size(); ++b) {
            seen += counts_[b];
            if (seen >= std::max<std::uint64_t>(target, 1)) {
                const std::uint64_t edge = static_cast<std::uint64_t>(b + 1) << 46;
                double x;
                std::memcpy(&x, &edge, sizeof x);
                return x;
            }
        }
        return 0;
    }

private:
    std::vector<std::uint64_t> counts_;
    std::uint64_t total_ = 0;
};

// Uniform index in [0, n); one multiply instead of a rejection loop.
std::size_t pick(Rng& rng, std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
}

}  // namespace

void WorkloadConfig::validate() const {
    if (!(interval > 0)) throw std::invalid_argument("interval must be positive");
    if (!(qos > 0)) throw std::invalid_argument("qos must be positive");
    if (horizon == 0) throw std::invalid_argument("horizon must be at least one period");
    if (!(arrival >= 0)) throw std::invalid_argument("arrival rate must be non-negative");
}

std::string WorkloadConfig::to_json() const {
    nlohmann::json j{{"interval", interval}, {"updates", updates}, {"qos", qos},
                     {"arrival", arrival},   {"horizon", horizon}, {"seed", seed}};
    return j.dump();
}

int ServiceModel::serving_stage(int published) const {
    int best = 0;
    for (int s : stages)
        if (s <= published) best = s;
    return best;
}

SimulationTrace simulate(const ServiceModel& model, const WorkloadConfig& cfg) {
    cfg.validate();
    if (model.stages.empty()) throw std::invalid_argument("service model without stages");
    const int top = model.stages.back();

    SimulationTrace tr;
    tr.stage_queries.assign(static_cast<std::size_t>(top) + 1, 0);
    Rng root(cfg.seed);
    Rng arrivals = root.fork(1), service = root.fork(2);

    const double end_time = cfg.interval * static_cast<double>(cfg.horizon);
    std::size_t next_period = 0;
    double free = 0;                 // server idle from here on (last query completion)
    double prev_end = -1;            // end of the latest pass
    const PassRecord* current = nullptr;
    Moments pass_time, blocked_time, qtime, response;
    DurationHistogram histogram;

    // Installs every pass whose period started by `c`; returns the earliest
    // instant >= c at which a query may start.
    auto install = [&](double c) {
        while (next_period < cfg.horizon && static_cast<double>(next_period) * cfg.interval <= c) {
            const double period_start = static_cast<double>(next_period) * cfg.interval;
            PassProfile profile = model.pass ? model.pass(next_period) : PassProfile{};
            ++next_period;
            if (profile.empty()) continue;
            PassRecord rec;
            rec.period_start = period_start;
            rec.start = std::max({period_start, free, prev_end});
            double blocked = 0, last = 0;
            for (const auto& [stage, offset] : profile) {
                rec.publications.emplace_back(stage, rec.start + offset);
                last = std::max(last, offset);
                if (stage <= model.blocking_stage) blocked = std::max(blocked, offset);
            }
            rec.end = rec.start + last;
            prev_end = rec.end;
            pass_time.add(last);
            blocked_time.add(blocked);
            c = std::max(c, rec.start + blocked);
            tr.passes.push_back(std::move(rec));
            current = &tr.passes.back();
        }
        return c;
    };
    // Highest stage published at `c` by the latest pass (all stages if it has finished).
    auto published_at = [&](double c) {
        if (current == nullptr || c >= current->end) return top;
        int stage = 0;
        for (const auto& [s, when] : current->publications)
            if (when <= c) stage = std::max(stage, s);
        return stage;
    };
    auto publication_time = [&](int stage) {
        if (current == nullptr) return -std::numeric_limits<double>::infinity();
        double t = std::numeric_limits<double>::infinity();
        for (const auto& [s, when] : current->publications)
            if (s >= stage) t = std::min(t, when);
        return t;
    };

    tr.passes.reserve(cfg.horizon);
    double a = 0;
    const double mean_gap = cfg.arrival > 0 ? 1.0 / cfg.arrival : 0;
    while (cfg.arrival > 0) {
        a += arrivals.exponential(mean_gap);
        if (a >= end_time) break;
        const double c = install(std::max(a, free));
        const int stage = model.serving_stage(published_at(c));
        if (stage == 0 || publication_time(stage) > c) ++tr.causality_violations;
        const double s = model.service(stage, service);
        const double done = c + s;
        free = done;
        qtime.add(s);
        response.add(done - a);
        ++tr.stage_queries[static_cast<std::size_t>(stage)];
        histogram.add(done - a);
        if (cfg.record_queries) tr.queries.push_back({a, c, done, stage});
    }
    install(std::numeric_limits<double>::infinity());

    tr.query_count = qtime.n;
    tr.mean_query = qtime.mean();
    tr.var_query = qtime.variance();
    tr.mean_update = pass_time.mean();
    tr.mean_blocked = blocked_time.mean();
    tr.mean_response = response.mean();
    tr.p95_response = histogram.quantile(0.95);
    tr.overload = pass_time.n > 0 && pass_time.mean() >= cfg.interval;
    return tr;
}

double analytic_bound(double t_q, double v_q, double t_u, double interval, double r_star) {
    if (!(t_q > 0) || v_q < 0 || t_u < 0 || !(interval > 0))
        throw std::invalid_argument("analytic_bound: need t_q > 0, V_q >= 0, t_u >= 0, interval > 0");
    if (r_star <= t_q || t_u >= interval) return 0;
    const double queueing = 2 * (r_star - t_q) / (v_q + 2 * r_star * t_q - t_q * t_q);
    const double capacity = (interval - t_u) / (t_q * interval);
    return std::max(0.0, std::min(queueing, capacity));
}

std::string ProbeRecord::to_json() const {
    nlohmann::json j{{"schema", "probe/1"},          {"arrival", arrival},
                     {"pass", pass},                 {"queries", queries},
                     {"mean_response", mean_response}, {"p95_response", p95_response},
                     {"t_q", mean_query},            {"V_q", var_query},
                     {"t_u", mean_update},           {"t_blocked", mean_blocked}};
    return j.dump();
}

std::string ThroughputReport::to_json() const {
    nlohmann::json j{{"schema", "throughput-report/1"},
                     {"engine", engine},
                     {"config", nlohmann::json::parse(config.to_json())},
                     {"throughput", throughput},
                     {"analytic_bound", analytic},
                     {"qos_violated", qos_violated},
                     {"overload", overload},
                     {"probes", probes.size()}};
    return j.dump();
}

ThroughputReport measure_max_throughput(const ServiceModel& model, WorkloadConfig cfg) {
    cfg.validate();
    cfg.record_queries = false;
    ThroughputReport rep;
    rep.engine = model.name;
    rep.config = cfg;

    auto probe = [&](double rate) {
        WorkloadConfig c = cfg;
        c.arrival = rate;
        const SimulationTrace tr = simulate(model, c);
        ProbeRecord p{rate,           !tr.overload && tr.mean_response <= cfg.qos,
                      tr.query_count, tr.mean_response,
                      tr.p95_response, tr.mean_query,
                      tr.var_query,   tr.mean_update,
                      tr.mean_blocked};
        rep.probes.push_back(p);
        return p;
    };

    const ProbeRecord idle = probe(0);
    if (!idle.pass) {
        rep.overload = true;
        rep.config.arrival = 0;
        return rep;
    }

    std::size_t best = rep.probes.size();  // index of the highest passing probe
    double lo = 0, hi = 0;
    for (double rate = kStartRate; rate <= kMaxRate; rate *= 2) {
        const ProbeRecord p = probe(rate);
        if (!p.pass) {
            hi = rate;
            break;
        }
        lo = rate;
        best = rep.probes.size() - 1;
    }
    if (hi > 0) {
        // updates alone fit (the idle probe passed), so any failure is a QoS violation
        rep.qos_violated = true;
        while (hi - lo > kPrecision * hi && !(lo == 0 && hi < kStartRate * 1e-3)) {
            const double mid = (lo + hi) / 2;
            const ProbeRecord p = probe(mid);
            if (p.pass) {
                lo = mid;
                best = rep.probes.size() - 1;
            } else {
                hi = mid;
            }
        }
    }
    rep.throughput = lo;
    rep.config.arrival = lo;
    const ProbeRecord& stats = best < rep.probes.size() ? rep.probes[best] : rep.probes.back();
    if (stats.mean_query > 0)
        rep.analytic = analytic_bound(stats.mean_query, stats.var_query, stats.mean_blocked, cfg.interval, cfg.qos);
    return rep;
}

ServiceModel calibrated_model(Engine& engine, const WorkloadConfig& cfg, const CalibrationConfig& calibration) {
    cfg.validate();
    StagedIndex& idx = *engine.index;
    auto passes = std::make_shared<std::vector<PassProfile>>();
    std::vector<StageTimeline> timelines;
    for (std::size_t b = 0; b < std::max<std::size_t>(calibration.batches, 1); ++b) {
        const UpdateBatch batch =
            generate_update_batch(idx.graph(), cfg.updates, Rng::splitmix(cfg.seed * 1000003 + b), b);
        timelines.push_back(idx.apply_batch(batch));
        passes->push_back(timelines.back().publications);
    }

    auto table = std::make_shared<std::vector<std::vector<double>>>(engine.stages.back() + 1);
    const auto pairs = generate_query_workload(idx.graph(), std::max<std::size_t>(calibration.samples, 1),
                                               Rng::splitmix(cfg.seed ^ 0x5eed));
    volatile Dist sink = 0;
    for (int stage : engine.stages) {
        auto& times = (*table)[static_cast<std::size_t>(stage)];
        times.reserve(pairs.size());
        for (const auto& [s, t] : pairs) sink = sink + idx.query_stage(stage, s, t).internal();  // warm caches
        for (const auto& [s, t] : pairs) {
            const auto t0 = std::chrono::steady_clock::now();
            sink = sink + idx.query_stage(stage, s, t).internal();
            times.push_back(seconds_since(t0));
        }
    }

    ServiceModel m;
    m.name = engine.name;
    m.stages = engine.stages;
    m.timelines = std::move(timelines);
    for (int stage : engine.stages) {
        const auto& times = (*table)[static_cast<std::size_t>(stage)];
        double sum = 0;
        for (double x : times) sum += x;
        m.mean_service[stage] = sum / static_cast<double>(times.size());
    }
    m.pass = [passes](std::size_t p) { return (*passes)[p % passes->size()]; };
    m.service = [table](int stage, Rng& rng) {
        const auto& times = (*table)[static_cast<std::size_t>(stage)];
        return times[pick(rng, times.size())];
    };
    return m;
}

ServiceModel live_model(Engine& engine, const WorkloadConfig& cfg) {
    cfg.validate();
    StagedIndex* idx = engine.index.get();
    ServiceModel m;
    m.name = engine.name;
    m.stages = engine.stages;
    const std::size_t volume = cfg.updates;
    const std::uint64_t seed = cfg.seed;
    auto batches = std::make_shared<std::uint64_t>(0);
    m.pass = [idx, volume, seed, batches](std::size_t) {
        const std::uint64_t b = (*batches)++;
        return idx->apply_batch(generate_update_batch(idx->graph(), volume, Rng::splitmix(seed * 1000003 + b), b))
            .publications;
    };
    m.service = [idx](int stage, Rng& rng) {
        const auto n = idx->graph().vertex_count();
        const Vertex s = static_cast<Vertex>(rng.below(n));
        const Vertex t = static_cast<Vertex>(rng.below(n));
        const auto t0 = std::chrono::steady_clock::now();
        volatile Dist d = idx->query_stage(stage, s, t).internal();
        (void)d;
        return seconds_since(t0);
    };
    return m;
}

ServiceModel exponential_model(double mean_service) {
    ServiceModel m;
    m.name = "exponential";
    m.stages = {1};
    m.service = [mean_service](int, Rng& rng) { return rng.exponential(mean_service); };
    return m;
}

ServiceModel constant_model(double service) {
    ServiceModel m;
    m.name = "constant";
    m.stages = {1};
    m.service = [service](int, Rng&) { return service; };
    return m;
}

}  // namespace dynsp
