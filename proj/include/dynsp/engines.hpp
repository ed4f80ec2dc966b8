// engines.hpp - named index configurations used by the CLI and the
// throughput benchmark.
#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/staging.hpp"

namespace dynsp {

/// Index-free engine: one stage, bidirectional Dijkstra on the current graph.
class EdgeOnlyIndex final : public StagedIndex {
public:
    explicit EdgeOnlyIndex(RoadNetwork g);
    std::string_view kind() const override { return "bidijkstra"; }
    int stage_count() const override { return 1; }
    std::string stage_name(int) const override { return "bidijkstra"; }
    StageTimeline apply_batch(const UpdateBatch& batch, const StageObserver& observer = {}) override;
    IndexSize size() const override { return {}; }
    const RoadNetwork& graph() const override { return graph_; }

protected:
    Distance answer(int stage, Vertex s, Vertex t) const override;

private:
    RoadNetwork graph_;
};

struct EngineParams {
    std::size_t partitions = 8;  // PMHL k
    TdPartitionParams td;        // PostMHL
    unsigned workers = 1;
    std::uint64_t seed = 1;
};

struct Engine {
    std::string name;
    std::unique_ptr<StagedIndex> index;
    std::vector<int> stages;  // query stages this engine answers from, ascending
    double build_seconds = 0;

    /// Highest served stage not above `published`; 0 if none.
    int serving_stage(int published) const;
};

/// bidijkstra, dch, dh2h (labels without the CH stage), mhl, pmhl, postmhl.
const std::vector<std::string>& engine_names();
/// Maps the aliases "ch" and "h2h" to "dch" and "dh2h". Throws
/// std::invalid_argument for an unknown name.
std::string canonical_engine_name(std::string_view name);
/// Throws std::invalid_argument for an unknown name.
Engine make_engine(std::string_view name, const RoadNetwork& g, const EngineParams& params = {});

}  // namespace dynsp
