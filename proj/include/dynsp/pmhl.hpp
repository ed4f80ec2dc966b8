// pmhl.hpp - partitioned multi-stage hub labeling.
//
// Components, all kept on TreeDecomposition objects:
//   L_i   per-partition trees over G_i (intra edges only)
//   L~    overlay tree over the boundary vertices; overlay edges are E_inter
//         plus the boundary shortcuts left after contracting the interiors
//   L'_i  trees over G'_i = G_i + all-pair boundary edges weighted by L~
//   L*    the aggregated cross-boundary tree over the whole graph
// Every tree uses the same boundary-first vertex order, restricted to its
// vertex set, so L* coincides with the global contraction hierarchy.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/staging.hpp"
#include "dynsp/tree_decomposition.hpp"

namespace dynsp {

/// A tree over a subgraph with local ids 0..|global|-1.
struct LocalTree {
    std::vector<Vertex> global;  // local -> global id
    DistGraph graph;
    TreeDecomposition tree;
    ShortcutSupport support;

    BaseWeight weights() const {
        return [this](Vertex a, Vertex b) { return graph.weight(a, b); };
    }
};

struct PmhlParams {
    std::size_t partitions = 16;
    std::uint64_t seed = 1;
    InteriorInterleave interleave = InteriorInterleave::Natural;
};

/// Members of `affected` that have no proper ancestor in the set (V_R).
std::vector<Vertex> cross_update_frontier(const TreeDecomposition& cross, std::span<const Vertex> affected);

class PmhlIndex final : public StagedIndex {
public:
    enum Stage : int { kEdgeOnly = 1, kPch = 2, kNoBoundary = 3, kPostBoundary = 4, kCrossBoundary = 5 };

    PmhlIndex(RoadNetwork g, const PmhlParams& params);
    /// Build over a fixed partitioning and vertex order (rebuild oracle).
    PmhlIndex(RoadNetwork g, Partitioning p, VertexOrder order);

    std::string_view kind() const override { return "pmhl"; }
    int stage_count() const override { return 5; }
    std::string stage_name(int stage) const override;

    StageTimeline apply_batch(const UpdateBatch& batch, const StageObserver& observer = {}) override;
    IndexSize size() const override;
    const RoadNetwork& graph() const override { return graph_; }

    const Partitioning& partitioning() const { return partitioning_; }
    const VertexOrder& order() const { return order_; }
    const LocalTree& partition(std::size_t i) const { return parts_[i]; }
    const LocalTree& overlay() const { return overlay_; }
    const LocalTree& extended(std::size_t i) const { return extended_[i]; }
    const TreeDecomposition& cross() const { return cross_; }
    /// Durations of the construction steps of the last build, in seconds.
    const std::vector<StageRecord>& build_steps() const { return build_steps_; }
    /// Local id of v inside its partition tree.
    Vertex local_id(Vertex v) const { return local_[v]; }
    /// Local id of v in the overlay, kNoVertex for non-boundary vertices.
    Vertex overlay_id(Vertex v) const { return overlay_of_[v]; }

    /// Overlay edges as global pairs (u < v) with their current weights.
    std::vector<std::pair<std::pair<Vertex, Vertex>, Dist>> overlay_edges() const;
    /// d over L~ between two boundary vertices.
    Distance overlay_distance(Vertex a, Vertex b) const;

    /// Verification-only flat cross-boundary labels: boundary vertices take
    /// their overlay labels, other vertices their L'_i labels plus, for every
    /// hub c of a boundary vertex b of their partition, min_b d'(v,b)+d~(b,c).
    /// Each list is sorted by hub.
    std::vector<std::vector<std::pair<Vertex, Dist>>> flat_cross_labels() const;

protected:
    Distance answer(int stage, Vertex s, Vertex t) const override;

private:
    void build();
    void build_partition(std::size_t i);
    void build_overlay_graph();
    void build_extended(std::size_t i);
    void build_cross();
    /// Overlay weight of a boundary pair of partition i from L_i: direct edge
    /// or a path through interior vertices only.
    Dist boundary_shortcut(std::size_t i, Vertex a, std::size_t j) const;
    Distance pch(Vertex s, Vertex t) const;
    /// Boundary concatenation through the overlay with per-partition tree
    /// distances taken from `trees` (L_i or L'_i).
    Distance concatenate(const std::vector<LocalTree>& trees, Vertex s, Vertex t) const;

    RoadNetwork graph_;
    Partitioning partitioning_;
    VertexOrder order_;
    std::vector<Vertex> local_;       // global -> local id in its partition
    std::vector<Vertex> overlay_of_;  // global -> overlay id
    std::vector<std::vector<Vertex>> boundary_local_;  // B_i in local ids of partition i
    std::vector<LocalTree> parts_;
    LocalTree overlay_;
    std::vector<std::vector<Dist>> all_pairs_;  // D_i: |B_i| x |B_i| overlay distances
    std::vector<LocalTree> extended_;
    TreeDecomposition cross_;
    std::vector<StageRecord> build_steps_;
    std::vector<std::uint8_t> boundary_mask_;  // per vertex
};

/// Element-wise comparison of every component; returns mismatch descriptions.
std::vector<std::string> compare_components(const PmhlIndex& a, const PmhlIndex& b);

}  // namespace dynsp
