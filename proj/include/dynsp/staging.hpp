// staging.hpp - the staged-index contract shared by MHL, PMHL and PostMHL.
//
// Query stages are numbered 1..stage_count(); stage 0 means "edges are being
// rewritten, nothing may be queried". A maintenance pass resets the marker
// to 0, then publishes stages in non-decreasing order. Publication uses
// release semantics; readers load with acquire.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/types.hpp"

namespace dynsp {

class StageMarker {
public:
    StageMarker() = default;
    StageMarker(const StageMarker& o) : value_(o.load()) {}
    StageMarker& operator=(const StageMarker& o) {
        value_.store(o.load(), std::memory_order_release);
        return *this;
    }
    int load() const noexcept { return value_.load(std::memory_order_acquire); }
    void store(int v) noexcept { value_.store(v, std::memory_order_release); }

private:
    std::atomic<int> value_{0};
};

struct StageRecord {
    std::string name;
    double start = 0;  // seconds since the pass began
    double end = 0;
    std::uint64_t touched = 0;  // entries rewritten by this stage
};

/// Per-batch maintenance record. Offsets are seconds since the pass began.
struct StageTimeline {
    std::uint64_t batch_id = 0;
    std::string index;
    std::vector<StageRecord> stages;
    std::vector<std::pair<int, double>> publications;  // (query stage, offset), in publication order
    std::map<std::string, std::uint64_t> counters;

    double total() const;
    /// Offset at which `stage` was published; -1 if it never was.
    double published_at(int stage) const;
    /// Publication stages never decrease within the pass.
    bool monotone() const;
    std::string to_json() const;  // one line, schema "stage-timeline/1"
};

struct IndexSize {
    std::uint64_t entries = 0;  // stored distances (shortcuts, labels, boundary arrays, tables)
    std::uint64_t bytes = 0;
};

using StageObserver = std::function<void(int stage)>;

class StagedIndex {
public:
    virtual ~StagedIndex() = default;

    virtual std::string_view kind() const = 0;
    virtual int stage_count() const = 0;
    virtual std::string stage_name(int stage) const = 0;
    int published_stage() const noexcept { return marker_.load(); }

    /// Answers with the algorithm of `stage`. Throws StageError when the
    /// stage is not (yet) published.
    Distance query_stage(int stage, Vertex s, Vertex t) const;
    /// Answers with the freshest published stage.
    Distance query(Vertex s, Vertex t) const { return query_stage(published_stage(), s, t); }

    /// One maintenance pass. `observer(stage)` runs on the maintenance thread
    /// right after each publication, while the index is at exactly that state.
    virtual StageTimeline apply_batch(const UpdateBatch& batch, const StageObserver& observer = {}) = 0;

    virtual IndexSize size() const = 0;
    virtual const RoadNetwork& graph() const = 0;

    void set_workers(unsigned p) { workers_ = p == 0 ? 1 : p; }
    unsigned workers() const noexcept { return workers_; }

protected:
    virtual Distance answer(int stage, Vertex s, Vertex t) const = 0;
    void check_vertices(Vertex s, Vertex t) const;

    StageMarker marker_;
    unsigned workers_ = 1;
};

/// Drives one maintenance pass: times stages and publishes query stages.
class PassClock {
public:
    PassClock(StageTimeline& timeline, StageMarker& marker, const StageObserver& observer);
    double now() const;
    /// Appends a stage record covering [start, now()).
    StageRecord& record(std::string name, double start, std::uint64_t touched);
    void publish(int stage);

private:
    StageTimeline& timeline_;
    StageMarker& marker_;
    const StageObserver& observer_;
    std::chrono::steady_clock::time_point begin_;
};

}  // namespace dynsp
