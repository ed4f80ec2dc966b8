// graph.hpp - road network, update batches, workload generation and file IO.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynsp/types.hpp"

namespace dynsp {

struct Arc {
    Vertex to;
    Weight weight;
};

struct Edge {
    Vertex u;
    Vertex v;
    Weight weight;
    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Undirected graph with positive integer weights. Adjacency is symmetric,
/// simple (no loops, no parallel edges) and weights may be changed in place.
class RoadNetwork {
public:
    RoadNetwork() = default;
    explicit RoadNetwork(std::size_t n) : adjacency_(n) {}

    /// Builds from an edge list; parallel edges collapse to the minimum weight.
    static RoadNetwork from_edges(std::size_t n, std::span<const Edge> edges);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }

    const std::vector<Arc>& neighbors(Vertex v) const { return adjacency_[v]; }
    std::size_t degree(Vertex v) const { return adjacency_[v].size(); }

    std::optional<Weight> weight(Vertex u, Vertex v) const;
    bool has_edge(Vertex u, Vertex v) const { return weight(u, v).has_value(); }

    /// Inserts the edge or lowers its weight to w if it already exists.
    void add_edge(Vertex u, Vertex v, Weight w);
    /// Changes an existing edge; returns the previous weight.
    Weight set_weight(Vertex u, Vertex v, Weight w);

    /// Every edge once, with u < v, ordered by (u, v).
    std::vector<Edge> edges() const;

    /// Original ids from the input file (1-based DIMACS ids by default).
    const std::vector<std::uint64_t>& original_ids() const noexcept { return original_ids_; }
    void set_original_ids(std::vector<std::uint64_t> ids) { original_ids_ = std::move(ids); }

    friend bool operator==(const RoadNetwork& a, const RoadNetwork& b);

private:
    std::vector<std::vector<Arc>> adjacency_;
    std::size_t edge_count_ = 0;
    std::vector<std::uint64_t> original_ids_;
};

void validate(const RoadNetwork& g);  // throws std::logic_error on a broken invariant

/// Undirected graph with wide (distance-valued) weights. Used for graphs
/// whose edges are shortcuts: overlay graphs and extended partitions.
class DistGraph {
public:
    using Adjacency = std::vector<std::pair<Vertex, Dist>>;

    DistGraph() = default;
    explicit DistGraph(std::size_t n) : adjacency_(n) {}
    static DistGraph from(const RoadNetwork& g);

    std::size_t vertex_count() const noexcept { return adjacency_.size(); }
    const Adjacency& neighbors(Vertex v) const { return adjacency_[v]; }
    /// kInfDist when there is no edge.
    Dist weight(Vertex u, Vertex v) const;
    /// Inserts the edge or overwrites its weight.
    void set_edge(Vertex u, Vertex v, Dist w);

private:
    std::vector<Adjacency> adjacency_;
};

enum class UpdateKind : std::uint8_t { Increase, Decrease, Unchanged };

struct EdgeUpdate {
    Vertex u;
    Vertex v;
    Weight new_weight;
};

struct UpdateBatch {
    std::uint64_t batch_id = 0;
    std::vector<EdgeUpdate> updates;
};

/// A weight change as applied to a graph; input for every index maintainer.
struct WeightChange {
    Vertex u;
    Vertex v;
    Weight old_weight;
    Weight new_weight;

    UpdateKind kind() const noexcept {
        if (new_weight > old_weight) return UpdateKind::Increase;
        if (new_weight < old_weight) return UpdateKind::Decrease;
        return UpdateKind::Unchanged;
    }
};

/// Applies a batch atomically: if any edge is missing, a duplicate edge
/// appears, or a weight is zero, the graph is left untouched and
/// std::invalid_argument is thrown.
std::vector<WeightChange> apply_updates(RoadNetwork& g, const UpdateBatch& batch);

/// Picks `volume` distinct edges uniformly; each is halved (rounded up, at
/// least 1) or doubled with probability 1/2.
UpdateBatch generate_update_batch(const RoadNetwork& g, std::size_t volume, std::uint64_t seed,
                                  std::uint64_t batch_id = 0);

std::vector<std::pair<Vertex, Vertex>> generate_query_workload(const RoadNetwork& g,
                                                               std::size_t count,
                                                               std::uint64_t seed);

// DIMACS .gr: "c" comments, "p sp <n> <m>", "a <u> <v> <w>" (1-based).
RoadNetwork read_dimacs(std::istream& in);
RoadNetwork load_dimacs(const std::string& path);
void write_dimacs(std::ostream& out, const RoadNetwork& g);

// Update-batch file: "<u> <v> <new_weight>" per line (0-based), "#" comments.
UpdateBatch read_update_batch(std::istream& in, std::uint64_t batch_id = 0);
void write_update_batch(std::ostream& out, const UpdateBatch& batch);

// Query file: "<s> <t>" per line (0-based), "#" comments.
std::vector<std::pair<Vertex, Vertex>> read_queries(std::istream& in);
void write_queries(std::ostream& out, std::span<const std::pair<Vertex, Vertex>> queries);

}  // namespace dynsp
