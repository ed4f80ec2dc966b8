// verify.hpp - invariant suites run by `dynsp verify`.
//
// Each suite checks one family of invariants on a set of graphs against
// reference computations kept in verify.cpp (Floyd-Warshall, a plain
// Dijkstra with vertex filter, explicit contraction, brute-force canonical
// hubs). Failures name the invariant and the offending element.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynsp/graph.hpp"
#include "dynsp/tree_decomposition.hpp"

namespace dynsp {

struct SuiteResult {
    std::string suite;
    std::size_t graphs = 0;
    std::uint64_t checks = 0;
    std::vector<std::string> failures;  // "invariant: detail", at most a few per invariant

    bool passed() const { return failures.empty(); }
    std::string to_json() const;  // schema "verify-suite/1"
};

/// oracle, contraction, interleaving, overlay, sufficiency, rebuild.
const std::vector<std::string>& suite_names();

/// Throws std::invalid_argument for an unknown suite.
SuiteResult run_suite(std::string_view suite, std::span<const RoadNetwork> graphs, std::uint64_t seed = 1);

/// Small graphs used when no graph is supplied: a grid, a sparse random
/// graph and a road-like graph, 64 vertices each.
std::vector<RoadNetwork> builtin_verify_graphs(std::uint64_t seed = 1);

/// Checks a loaded snapshot against its graph: decomposition properties,
/// exact shortcuts, and exact labels when present.
SuiteResult verify_snapshot(const RoadNetwork& g, const TreeDecomposition& t, bool has_labels);

}  // namespace dynsp
