// generators.hpp - synthetic road-like, grid and random test graphs.
#pragma once

#include <cstdint>

#include "dynsp/graph.hpp"

namespace dynsp {

/// Random spanning tree plus `extra_edges` random chords; weights uniform in
/// [1, max_weight]. Always connected for n >= 1.
RoadNetwork random_connected_graph(std::size_t n, std::size_t extra_edges, Weight max_weight, std::uint64_t seed);

/// rows x cols 4-neighbour grid, weights uniform in [1, max_weight].
RoadNetwork grid_graph(std::size_t rows, std::size_t cols, Weight max_weight, std::uint64_t seed);

/// Points scattered in the unit square, each joined to its `k` nearest
/// neighbours with weight proportional to Euclidean length (sparse and close
/// to planar, like a road network). Components are stitched together.
RoadNetwork road_like_graph(std::size_t n, std::uint64_t seed, std::size_t k = 3);

}  // namespace dynsp
