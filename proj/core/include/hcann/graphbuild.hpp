#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcann/vecdata.hpp"

namespace hcann {

/// Directed proximity graph with bounded out-degree and a single entry node.
struct GraphIndex {
    std::uint32_t max_degree = 0;  // R
    NodeId entry_id = 0;
    std::vector<std::vector<NodeId>> adjacency;

    std::size_t size() const { return adjacency.size(); }

    bool operator==(const GraphIndex&) const = default;
};

struct BuildParams {
    std::uint32_t max_degree = 32;      // R
    std::uint32_t build_list_size = 64;  // L_build
    double alpha = 1.2;
    std::uint64_t seed = 0;
};

/// Vamana construction: random R-regular start, then a pass with alpha = 1
/// and a pass with the configured alpha, each running greedy search from the
/// medoid and robust-pruning the visited set. Unreachable nodes are linked
/// from their nearest reachable node afterwards.
GraphIndex build_graph(const VectorDataset& dataset, const BuildParams& params);

/// Point minimizing the summed distance to all others; exact up to 10,000
/// points, otherwise estimated against 1,000 seeded anchors. Ties -> lowest id.
NodeId medoid(const VectorDataset& dataset, std::uint64_t seed = 0);

/// Nodes reachable from `graph.entry_id`, as a membership mask.
std::vector<bool> reachable_from_entry(const GraphIndex& graph);

/// Throws InvariantError describing the first violated structural invariant
/// (degree bound, self loop, duplicate, out-of-range id, unreachable node).
void validate_graph(const GraphIndex& graph);

/// Sidecar layout: magic "GOVG", u32 version, u32 R, u64 n, u64 entry_id,
/// then per node u32 degree followed by degree u32 ids.
void write_graph(const std::string& path, const GraphIndex& graph);
GraphIndex read_graph(const std::string& path);

}  // namespace hcann
