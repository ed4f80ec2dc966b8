// partitioning.hpp - vertex partitions, boundary bookkeeping, boundary-first
// orders, update routing and tree-decomposition based partitioning.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/tree_decomposition.hpp"

namespace dynsp {

struct Partitioning {
    std::size_t k = 0;
    std::vector<std::uint32_t> assignment;          // vertex -> partition id
    std::vector<std::vector<Vertex>> members;       // per partition, ascending ids
    std::vector<std::vector<Vertex>> boundary;      // B_i, ascending ids
    std::vector<std::uint8_t> is_boundary;          // per vertex
    std::vector<std::pair<Vertex, Vertex>> inter_edges;               // E_inter (u < v)
    std::vector<std::vector<std::pair<Vertex, Vertex>>> intra_edges;  // E_intra per partition

    /// Derives members, boundaries and edge classes from an assignment.
    static Partitioning from_assignment(const RoadNetwork& g, std::vector<std::uint32_t> assignment, std::size_t k);

    std::size_t cut_size() const noexcept { return inter_edges.size(); }
    std::size_t boundary_count() const;
};

/// Throws std::logic_error if the partition invariants do not hold for g.
void validate_partitioning(const RoadNetwork& g, const Partitioning& p);

/// Seeded multi-start region growing: farthest-point seeds, smallest-region-
/// first BFS accretion under a size cap, rebalancing into [0.75, 1.25] x n/k,
/// then boundary smoothing that moves vertices when it shrinks the cut.
/// Throws std::invalid_argument unless 1 <= k <= n.
Partitioning partition_graph(const RoadNetwork& g, std::size_t k, std::uint64_t seed);

enum class InteriorInterleave {
    Natural,     // elimination order of all interiors contracted together
    Sequential,  // partition 0's interiors, then partition 1's, ...
    RoundRobin,  // one interior from each partition in turn
};

/// Order in which every boundary vertex outranks every non-boundary vertex.
/// Interiors are ranked by MDE within their partition, boundary vertices by
/// MDE over the overlay graph left after contracting all interiors.
VertexOrder boundary_first_order(const RoadNetwork& g, const Partitioning& p,
                                 InteriorInterleave interleave = InteriorInterleave::Natural);

struct ClassifiedUpdates {
    std::vector<std::vector<EdgeUpdate>> intra;  // per partition
    std::vector<EdgeUpdate> inter;
};
ClassifiedUpdates classify_updates(const Partitioning& p, const UpdateBatch& batch);

struct TdPartitionParams {
    std::size_t bandwidth = 100;  // tau: largest admissible |X(root).N|
    std::size_t expected_partitions = 16;  // k_e
    double beta_lower = 0.1;
    double beta_upper = 2.0;
    /// Interpret beta_lower / beta_upper as absolute subtree sizes instead of
    /// multiples of n / k_e.
    bool absolute_bounds = false;
};

inline constexpr std::uint32_t kOverlay = 0xffffffffu;

struct TdPartition {
    TdPartitionParams params;
    std::vector<Vertex> roots;                 // admitted partition roots, decreasing rank
    std::vector<std::uint32_t> part_of;        // partition id per vertex, kOverlay for overlay vertices
    std::vector<Vertex> overlay;               // overlay vertices, decreasing rank
    std::vector<std::vector<Vertex>> members;  // per partition, parents before children
    std::vector<std::vector<Vertex>> boundary;  // per partition: X(root).N in bag order
    std::vector<std::uint32_t> subtree_size;   // cN: nodes in the subtree of each vertex
    std::size_t candidate_count = 0;

    std::size_t partition_count() const noexcept { return roots.size(); }
    bool in_overlay(Vertex v) const { return part_of[v] == kOverlay; }
};

/// Candidate roots are non-root tree nodes whose subtree size lies in
/// [beta_lower, beta_upper] x n / k_e and whose bag has at most `bandwidth`
/// neighbours; they are admitted greedily in decreasing rank unless an
/// admitted root is an ancestor. Vertices outside every admitted subtree
/// form the overlay. Throws std::runtime_error if there is no candidate.
TdPartition td_partition(const TreeDecomposition& t, const TdPartitionParams& params);

// Partition file: "# k=<k> cut=<cut> boundary=<|B|>" then "<vertex> <partition>" lines.
void write_partitioning(std::ostream& out, const Partitioning& p);
Partitioning read_partitioning(std::istream& in, const RoadNetwork& g);
// TD-partition file adds "# roots ..." and "# overlay ..." lines; overlay vertices get id -1.
void write_td_partition(std::ostream& out, const TdPartition& p);

}  // namespace dynsp
