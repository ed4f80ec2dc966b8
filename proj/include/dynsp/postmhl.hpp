// postmhl.hpp - post-partitioned multi-stage hub labeling.
//
// One MDE tree carries every component. After TD-partitioning, overlay
// vertices hold plain H2H labels (the overlay index). An in-partition vertex
// v of partition i, whose root is u, holds
//   disB       distances to the boundary B_i = X(u).N, in that order
//   dis[j]     for in-partition ancestors (post-boundary index) and for
//              overlay ancestors (cross-boundary index)
// and each partition keeps a dense |B_i| x |B_i| table D of overlay distances.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/mhl.hpp"
#include "dynsp/partitioning.hpp"
#include "dynsp/staging.hpp"
#include "dynsp/tree_decomposition.hpp"

namespace dynsp {

struct LabelMismatch {
    Vertex vertex;
    std::string array;  // "disB", "dis" or "D"
    std::size_t index;
    Dist expected;
    Dist actual;
};

class PostMhlIndex final : public StagedIndex {
public:
    enum Stage : int { kEdgeOnly = 1, kPch = 2, kPostBoundary = 3, kCrossBoundary = 4 };
    /// How the post-boundary and cross-boundary repairs are scheduled.
    enum class PhaseOrder { Parallel, PostFirst, CrossFirst };

    explicit PostMhlIndex(RoadNetwork g, const TdPartitionParams& params = {}, const VertexOrder* pinned = nullptr);

    std::string_view kind() const override { return "postmhl"; }
    int stage_count() const override { return 4; }
    std::string stage_name(int stage) const override;

    StageTimeline apply_batch(const UpdateBatch& batch, const StageObserver& observer = {}) override;
    IndexSize size() const override;
    const RoadNetwork& graph() const override { return graph_; }

    const TreeDecomposition& tree() const { return tree_; }
    TreeDecomposition& mutable_tree() { return tree_; }
    const TdPartition& partition() const { return td_; }
    const std::vector<Dist>& boundary_table(std::size_t i) const { return tables_[i]; }
    void set_phase_order(PhaseOrder order) { phase_order_ = order; }

    /// Evaluation used by the post-boundary stage: in-partition entries plus
    /// the boundary detour for same-partition pairs, boundary arrays joined
    /// through the overlay otherwise.
    Distance post_boundary_distance(Vertex s, Vertex t) const;

    /// Recomputes D, the boundary arrays and every in-partition label entry
    /// from the overlay labels alone and lists entries that differ from the
    /// maintained arrays.
    std::vector<LabelMismatch> verify_overlay_sufficiency() const;

protected:
    Distance answer(int stage, Vertex s, Vertex t) const override;

private:
    bool in_overlay(Vertex v) const { return td_.part_of[v] == kOverlay; }
    void build_tables(std::size_t i, std::vector<Dist>& table) const;
    bool compute_boundary(TreeDecomposition& t, const std::vector<Dist>& table, std::size_t i, Vertex v) const;
    bool compute_post(TreeDecomposition& t, std::size_t i, Vertex v) const;
    bool compute_cross(TreeDecomposition& t, Vertex v) const;
    /// Top-down repair of one partition. `force` recomputes every member,
    /// otherwise members flagged in `seed` and everything below a change.
    std::uint64_t repair_post(std::size_t i, bool force, const std::vector<std::uint8_t>& seed,
                              std::vector<Vertex>* changed);
    std::uint64_t repair_cross(std::size_t i, bool force, const std::vector<std::uint8_t>& seed,
                               std::vector<Vertex>* changed);

    RoadNetwork graph_;
    TreeDecomposition tree_;
    ShortcutSupport support_;
    TdPartition td_;
    std::vector<std::vector<Dist>> tables_;  // D per partition, row-major over X(root).N
    PhaseOrder phase_order_ = PhaseOrder::Parallel;
};

}  // namespace dynsp
