// tree_decomposition.hpp - minimum degree elimination, the tree of bags it
// induces, and constant-time LCA over that tree.
//
// Every hierarchical index in this library (CH, H2H, MHL, the PSP indexes)
// stores its data on TreeNode: the contraction neighbourhood with shortcut
// weights, the ancestor chain, and per-ancestor distance labels.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/types.hpp"

namespace dynsp {

/// Contraction order: rank[v] in [0, n), sequence[rank] = v. Higher rank
/// means contracted later, i.e. closer to the root.
struct VertexOrder {
    std::vector<std::uint32_t> rank;
    std::vector<Vertex> sequence;

    /// Throws std::invalid_argument unless `sequence` is a permutation of 0..n-1.
    static VertexOrder from_sequence(std::vector<Vertex> sequence);
    std::size_t size() const noexcept { return sequence.size(); }
    friend bool operator==(const VertexOrder&, const VertexOrder&) = default;
};

struct TreeNode {
    Vertex vertex = kNoVertex;
    std::vector<Vertex> neighbors;  // X(v).N, root side first (ascending depth)
    std::vector<Dist> shortcuts;    // X(v).sc, parallel to neighbors
    Vertex parent = kNoVertex;
    std::vector<Vertex> children;
    std::vector<Vertex> ancestors;        // X(v).A, root first, parent last
    std::vector<std::uint32_t> positions;  // X(v).pos[j] = depth of neighbors[j]
    std::vector<Dist> distances;          // X(v).dis, size depth+1, last entry 0
    std::vector<Dist> boundary_distances;  // X(v).disB (PostMHL in-partition nodes only)
    std::uint32_t depth = 0;

    /// Index of `u` in neighbors, or -1.
    int neighbor_index(Vertex u) const;
};

/// Euler tour + sparse table. A virtual super-root joins the trees of a
/// forest; query() reports kNoVertex for vertices in different trees.
class LcaIndex {
public:
    void build(std::span<const TreeNode> nodes, std::span<const Vertex> roots);
    Vertex query(Vertex u, Vertex v) const;

private:
    std::vector<std::uint32_t> first_;   // first tour index of each vertex
    std::vector<Vertex> tour_;           // kNoVertex stands for the super-root
    std::vector<std::uint32_t> level_;   // super-root 0, tree roots 1, ...
    std::vector<std::vector<std::uint32_t>> table_;  // argmin level per power of two
};

struct TreeDecomposition {
    std::vector<TreeNode> nodes;  // indexed by vertex id
    std::vector<Vertex> roots;
    VertexOrder order;
    LcaIndex lca_index;

    std::size_t size() const noexcept { return nodes.size(); }

    /// Derives parent (lowest-rank neighbour), children, depth, ancestors and
    /// positions from `order` and each node's neighbours, sorts neighbours
    /// root side first, sizes distance arrays and rebuilds the LCA index.
    /// If `keep_parents` is set, the parent fields are taken as given
    /// (aggregated trees whose parent is not derived from the bag).
    void link(bool keep_parents = false);

    Vertex lca(Vertex u, Vertex v) const { return lca_index.query(u, v); }
    bool is_ancestor(Vertex a, Vertex v) const {  // reflexive
        const TreeNode& n = nodes[v];
        return nodes[a].depth <= n.depth && (a == v || n.ancestors[nodes[a].depth] == a);
    }
    /// Parents before children (decreasing rank for MDE trees).
    std::vector<Vertex> top_down_order() const;

    std::size_t height() const;     // number of levels
    std::size_t treewidth() const;  // max |X(v).N|
};

/// Result of eliminating an eligible subset of vertices.
struct Elimination {
    std::vector<Vertex> sequence;  // elimination order of eligible vertices
    // For each eliminated vertex, its neighbours and shortcut weights at the
    // time of contraction. Empty for vertices that were not eliminated.
    std::vector<std::vector<std::pair<Vertex, Dist>>> bags;
    // Edges left among the vertices that were not eliminated (u < v).
    std::vector<std::pair<std::pair<Vertex, Vertex>, Dist>> remaining;
};

/// Iterative contraction. Without `pinned`, repeatedly removes an eligible
/// vertex of minimum current degree (ties: smallest id); degrees count the
/// contracted graph including shortcuts. With `pinned`, eligible vertices
/// are removed in that order. Shortcut insertion keeps the minimum weight.
Elimination eliminate(const DistGraph& g, std::span<const std::uint8_t> eligible,
                      const std::vector<Vertex>* pinned = nullptr);
Elimination eliminate(const RoadNetwork& g, std::span<const std::uint8_t> eligible,
                      const std::vector<Vertex>* pinned = nullptr);

/// Full MDE tree decomposition. `pinned` fixes the contraction order.
TreeDecomposition mde_decompose(const DistGraph& g, const VertexOrder* pinned = nullptr);
TreeDecomposition mde_decompose(const RoadNetwork& g, const VertexOrder* pinned = nullptr);

/// Checks the three tree-decomposition properties and, if `check_shortcuts`,
/// that each sc(v,u) equals the distance between v and u over paths whose
/// interior vertices all rank below v. Returns human-readable violations.
std::vector<std::string> validate_decomposition(const RoadNetwork& g, const TreeDecomposition& t,
                                                bool check_shortcuts = true);

// Binary snapshot: little-endian fixed-width records, versioned header.
//   magic "DSPT" | u32 version | u32 flags (bit0: labels) | u64 n
//   n x u32 rank | n x u32 parent (0xffffffff = root)
//   per vertex: u32 |N|, |N| x (u32 neighbour, u64 shortcut)
//   if labels, per vertex: u32 len, len x u64 distance
inline constexpr std::uint32_t kSnapshotVersion = 1;
void write_snapshot(std::ostream& out, const TreeDecomposition& t, bool with_labels);
/// Throws std::runtime_error on truncated or inconsistent input.
TreeDecomposition read_snapshot(std::istream& in, bool* has_labels = nullptr);

}  // namespace dynsp
