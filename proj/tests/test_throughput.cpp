#include <gtest/gtest.h>

#include <cmath>

#include "dynsp/generators.hpp"
#include "dynsp/throughput.hpp"

using namespace dynsp;

namespace {

WorkloadConfig workload(double interval, std::size_t horizon, double arrival, double qos = 1.0) {
    WorkloadConfig c;
    c.interval = interval;
    c.horizon = horizon;
    c.arrival = arrival;
    c.qos = qos;
    return c;
}

ServiceModel with_fixed_pass(ServiceModel m, PassProfile profile) {
    m.pass = [profile](std::size_t) { return profile; };
    return m;
}

}  // namespace

TEST(AnalyticBound, ClosedForm) {
    const double t = 0.001, r = 1.0;
    const double queueing = 2 * (r - t) / (2 * r * t - t * t);
    EXPECT_NEAR(queueing, 999.5, 0.01);
    EXPECT_NEAR(analytic_bound(t, 0, 0, 120, r), queueing, 1e-9);
    // same value as an exact fraction: 1.998 / 0.001999 = 1998000 / 1999
    EXPECT_NEAR(analytic_bound(0.001, 0, 0, 120, 1), 1998000.0 / 1999.0, 1e-9);
}

TEST(AnalyticBound, Clamps) {
    EXPECT_EQ(analytic_bound(0.001, 0, 120, 120, 1), 0);
    EXPECT_EQ(analytic_bound(0.001, 0, 130, 120, 1), 0);
    EXPECT_EQ(analytic_bound(2, 0, 0, 120, 1), 0);
    EXPECT_LT(analytic_bound(0.001, 1e6, 0, 120, 1), 1e-5);
    // capacity term binds when updates eat most of the period
    EXPECT_NEAR(analytic_bound(0.001, 0, 60, 120, 1), 500, 1e-9);
    EXPECT_THROW(analytic_bound(0, 0, 0, 120, 1), std::invalid_argument);
}

TEST(Simulate, MatchesPollaczekKhinchine) {
    const double mean = 0.001, rate = 500;  // rho = 0.5
    const SimulationTrace tr = simulate(exponential_model(mean), workload(100, 3, rate));
    ASSERT_GE(tr.query_count, 100000u);
    const double rho = rate * mean;
    const double predicted = mean + rate * 2 * mean * mean / (2 * (1 - rho));
    EXPECT_NEAR(tr.mean_response, predicted, 0.1 * predicted);
    EXPECT_NEAR(tr.mean_query, mean, 0.02 * mean);
    EXPECT_NEAR(tr.var_query, mean * mean, 0.05 * mean * mean);
    EXPECT_TRUE(tr.passes.empty());
    // exponential service makes this M/M/1: response ~ Exp(mu - lambda)
    const double p95 = std::log(20.0) / (1 / mean - rate);
    EXPECT_NEAR(tr.p95_response, p95, 0.05 * p95);
}

TEST(Simulate, NoQueriesRecordsOnlyPasses) {
    const auto m = with_fixed_pass(constant_model(0.001), {{1, 0.5}});
    const SimulationTrace tr = simulate(m, workload(10, 4, 0));
    EXPECT_EQ(tr.query_count, 0u);
    ASSERT_EQ(tr.passes.size(), 4u);
    EXPECT_DOUBLE_EQ(tr.mean_update, 0.5);
    EXPECT_DOUBLE_EQ(tr.passes[2].start, 20);
    EXPECT_FALSE(tr.overload);
}

TEST(Simulate, ServerIsNeverShared) {
    ServiceModel m = with_fixed_pass(exponential_model(0.002), {{1, 0.3}, {2, 0.7}, {3, 1.2}});
    m.stages = {1, 2, 3};
    WorkloadConfig c = workload(5, 6, 300);
    c.record_queries = true;
    const SimulationTrace tr = simulate(m, c);
    ASSERT_GT(tr.queries.size(), 5000u);
    EXPECT_EQ(tr.causality_violations, 0u);
    for (std::size_t i = 0; i < tr.queries.size(); ++i) {
        const auto& q = tr.queries[i];
        EXPECT_LE(q.arrival, q.start);
        EXPECT_LE(q.start, q.completion);
        if (i > 0) EXPECT_LE(tr.queries[i - 1].completion, q.start);
        for (const auto& p : tr.passes) {
            const double unblocked = p.publications.front().second;
            EXPECT_FALSE(q.start < unblocked && q.completion > p.start) << "query " << i;
            // a query inside the pass uses a stage already published
            if (q.start >= p.start && q.start < p.end) {
                double published = -1;
                for (const auto& [s, when] : p.publications)
                    if (s == q.stage) published = when;
                EXPECT_GE(q.start, published);
            }
        }
    }
    // stages 2 and 3 both served during passes, stage 3 the rest of the time
    EXPECT_GT(tr.stage_queries[1], 0u);
    EXPECT_GT(tr.stage_queries[2], 0u);
    EXPECT_GT(tr.stage_queries[3], tr.stage_queries[1]);
}

TEST(Simulate, Deterministic) {
    const auto m = with_fixed_pass(exponential_model(0.001), {{1, 0.2}});
    WorkloadConfig c = workload(3, 3, 400);
    c.record_queries = true;
    const auto a = simulate(m, c), b = simulate(m, c);
    ASSERT_EQ(a.queries.size(), b.queries.size());
    for (std::size_t i = 0; i < a.queries.size(); ++i) {
        EXPECT_EQ(a.queries[i].arrival, b.queries[i].arrival);
        EXPECT_EQ(a.queries[i].completion, b.queries[i].completion);
    }
    EXPECT_EQ(a.mean_response, b.mean_response);
    c.seed = 2;
    EXPECT_NE(simulate(m, c).mean_response, a.mean_response);
}

TEST(Simulate, PassesQueueBehindEachOther) {
    const auto m = with_fixed_pass(constant_model(0.001), {{1, 15}});
    const SimulationTrace tr = simulate(m, workload(10, 3, 0));
    ASSERT_EQ(tr.passes.size(), 3u);
    EXPECT_DOUBLE_EQ(tr.passes[1].start, 15);
    EXPECT_DOUBLE_EQ(tr.passes[2].start, 30);
    EXPECT_TRUE(tr.overload);
}

TEST(MaxThroughput, ConstantServiceMatchesBound) {
    const double t = 0.001;
    const ThroughputReport rep = measure_max_throughput(constant_model(t), workload(120, 10, 0, 0.01));
    const double bound = analytic_bound(t, 0, 0, 120, 0.01);
    EXPECT_NEAR(rep.throughput, bound, 0.1 * bound);
    EXPECT_NEAR(rep.analytic, bound, 1e-6 * bound);
    EXPECT_TRUE(rep.qos_violated);
    EXPECT_FALSE(rep.overload);
    ASSERT_GE(rep.probes.size(), 3u);
    EXPECT_EQ(rep.probes[0].arrival, 0);
}

TEST(MaxThroughput, OverloadGivesZero) {
    const auto m = with_fixed_pass(constant_model(0.001), {{1, 12}});
    const ThroughputReport rep = measure_max_throughput(m, workload(10, 3, 0));
    EXPECT_TRUE(rep.overload);
    EXPECT_EQ(rep.throughput, 0);
    EXPECT_EQ(rep.probes.size(), 1u);
}

TEST(MaxThroughput, BlockingUpdatesLowerThroughput) {
    const auto fast = measure_max_throughput(constant_model(0.001), workload(10, 10, 0, 0.05));
    const auto slow =
        measure_max_throughput(with_fixed_pass(constant_model(0.001), {{1, 2.0}}), workload(10, 10, 0, 0.05));
    EXPECT_LT(slow.throughput, fast.throughput);
    EXPECT_LE(slow.throughput, 1.15 * slow.analytic);
}

TEST(Calibrated, RealEnginesRespectCausality) {
    const RoadNetwork g = road_like_graph(1500, 3);
    for (const std::string& name : engine_names()) {
        Engine e = make_engine(name, g);
        WorkloadConfig c = workload(0.05, 6, 2000, 0.5);
        c.updates = 20;
        c.record_queries = true;
        const ServiceModel m = calibrated_model(e, c, {2, 200});
        EXPECT_EQ(m.stages, e.stages);
        const auto a = simulate(m, c);
        EXPECT_EQ(a.causality_violations, 0u) << name;
        EXPECT_EQ(a.passes.size(), 6u);
        for (const auto& p : a.passes) {
            for (std::size_t i = 1; i < p.publications.size(); ++i)
                EXPECT_LE(p.publications[i - 1].first, p.publications[i].first) << name;
            EXPECT_EQ(p.publications.front().first, 1);
        }
        const auto b = simulate(m, c);
        EXPECT_EQ(a.mean_response, b.mean_response) << name;
    }
}

TEST(Engines, UnknownNameThrows) {
    EXPECT_THROW(make_engine("nope", grid_graph(3, 3, 5, 1)), std::invalid_argument);
}
