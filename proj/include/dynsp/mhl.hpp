// mhl.hpp - CH / DCH, H2H / DH2H and their multi-stage combination (MHL).
//
// All routines work directly on a TreeDecomposition: the shortcut arrays are
// the CH index, the distance arrays are the H2H index. The free functions are
// shared by the partitioned indexes; MhlIndex wraps them into a staged index
// over one whole graph.
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/staging.hpp"
#include "dynsp/tree_decomposition.hpp"

namespace dynsp {

/// For each shortcut entry (a, j) the vertices x whose bag contains both a
/// and b = N(a)[j], with the positions of a and b in N(x). A shortcut equals
/// min(original edge weight, min over x of sc(x,a) + sc(x,b)).
class ShortcutSupport {
public:
    struct Supporter {
        Vertex x;
        std::uint32_t index_a;
        std::uint32_t index_b;
    };

    void build(const TreeDecomposition& t);
    std::size_t entry(Vertex a, std::size_t j) const { return offset_[a] + j; }
    std::size_t entry_count() const { return offset_.empty() ? 0 : offset_.back(); }
    std::span<const Supporter> supporters(std::size_t entry) const {
        return {list_.data() + begin_[entry], list_.data() + begin_[entry + 1]};
    }

private:
    std::vector<std::size_t> offset_;
    std::vector<std::size_t> begin_;
    std::vector<Supporter> list_;
};

/// Weight of an original (non-shortcut) edge, kInfDist if absent.
using BaseWeight = std::function<Dist(Vertex, Vertex)>;
BaseWeight graph_weights(const RoadNetwork& g);

/// Index j of ancestor `u` in N(v), or -1. Binary search by depth.
int bag_index(const TreeDecomposition& t, Vertex v, Vertex u);

struct AffectedSet {
    std::vector<Vertex> shortcut_changed;  // vertices with at least one changed shortcut
    std::vector<Vertex> label_changed;     // V_A: vertices whose distance array changed
    std::vector<Vertex> branch_roots;      // highest affected nodes, none below another
    std::uint64_t shortcut_entries = 0;    // shortcut entries recomputed
    std::uint64_t label_entries = 0;       // label entries recomputed
};

/// Bottom-up shortcut repair after the base weights of `edges` changed.
/// Fills shortcut_changed and shortcut_entries.
AffectedSet dch_propagate(TreeDecomposition& t, const ShortcutSupport& support, const BaseWeight& weight,
                          std::span<const std::pair<Vertex, Vertex>> edges);

/// Shortcut repair starting from dirty entries (owner, index). Only entries
/// owned by vertices with in_scope(v) are processed; marks that land on other
/// vertices are appended to `deferred` (or processed too if it is null).
AffectedSet dch_propagate_entries(TreeDecomposition& t, const ShortcutSupport& support, const BaseWeight& weight,
                                  std::span<const std::pair<Vertex, std::uint32_t>> entries,
                                  const std::function<bool(Vertex)>& in_scope = {},
                                  std::vector<std::pair<Vertex, std::uint32_t>>* deferred = nullptr);

/// Members of `set` that have no proper ancestor in `set`.
std::vector<Vertex> highest_nodes(const TreeDecomposition& t, std::span<const Vertex> set);

/// Recomputes one distance entry dis(v)[i] from v's separator.
Dist label_entry(const TreeDecomposition& t, Vertex v, std::size_t i);
/// Recomputes the whole distance array of v; returns true if it changed.
bool relabel(TreeDecomposition& t, Vertex v);

/// Top-down label construction over `order` (parents before children).
void build_labels(TreeDecomposition& t, std::span<const Vertex> order);
void build_labels(TreeDecomposition& t);

/// Top-down label repair below the vertices in `seeds` (whose shortcuts
/// changed). Runs one task per branch root on up to `workers` threads.
/// Fills label_changed, branch_roots and label_entries of `out`.
/// Vertices flagged in `external` are never relabelled: their arrays are
/// maintained elsewhere and count as changed iff listed in `preset`.
void dh2h_propagate(TreeDecomposition& t, std::span<const Vertex> seeds, unsigned workers, AffectedSet& out,
                    std::span<const Vertex> preset = {}, const std::vector<std::uint8_t>* external = nullptr);

/// Upward bidirectional search over shortcut arrays.
Distance ch_distance(const TreeDecomposition& t, Vertex s, Vertex t_);
/// LCA-based 2-hop evaluation. `evaluated`, if given, is increased by the
/// number of label positions scanned.
Distance h2h_distance(const TreeDecomposition& t, Vertex s, Vertex t_, std::uint64_t* evaluated = nullptr);

/// Canonical hub sets for the tree's order: u is a hub of v iff no vertex
/// ranked above u lies on any shortest v-u path. Requires labels.
std::vector<std::vector<Vertex>> canonical_hubs(const TreeDecomposition& t);

/// Index size of a decomposition: shortcut + label entries.
IndexSize tree_size(const TreeDecomposition& t);

class MhlIndex final : public StagedIndex {
public:
    enum Stage : int { kEdgeOnly = 1, kShortcutsReady = 2, kLabelsReady = 3 };

    /// `with_labels = false` keeps only the CH part (a DCH engine).
    explicit MhlIndex(RoadNetwork g, const VertexOrder* pinned = nullptr, bool with_labels = true);

    std::string_view kind() const override { return with_labels_ ? "mhl" : "dch"; }
    int stage_count() const override { return with_labels_ ? 3 : 2; }
    std::string stage_name(int stage) const override;

    StageTimeline apply_batch(const UpdateBatch& batch, const StageObserver& observer = {}) override;
    IndexSize size() const override { return tree_size(tree_); }
    const RoadNetwork& graph() const override { return graph_; }

    // individual maintenance steps, exposed for testing
    AffectedSet dch_update(std::span<const WeightChange> changes);
    void dh2h_update(AffectedSet& affected);

    const TreeDecomposition& tree() const { return tree_; }
    TreeDecomposition& mutable_tree() { return tree_; }
    bool has_labels() const { return with_labels_; }

protected:
    Distance answer(int stage, Vertex s, Vertex t) const override;

private:
    RoadNetwork graph_;
    TreeDecomposition tree_;
    ShortcutSupport support_;
    bool with_labels_;
};

}  // namespace dynsp
