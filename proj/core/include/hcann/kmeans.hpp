#pragma once

#include <cstdint>
#include <vector>

#include "hcann/vecdata.hpp"

namespace hcann {

struct ClusterAssignment {
    std::uint32_t k_clusters = 0;
    std::vector<std::uint32_t> assignment;  // node id -> cluster id
    VectorDataset centroids;                // k_clusters rows
    /// Sum of squared point-to-centroid distances after each update step.
    std::vector<double> distortion_history;

    std::vector<std::vector<NodeId>> members() const;
};

/// Lloyd's k-means with seeded k-means++ initialization. Runs until the
/// assignment reaches a fixpoint or `max_iters` update steps have been made.
/// Clusters that become empty take the point farthest from its own centroid.
/// Shared by PQ codebook training and the similarity layout.
ClusterAssignment kmeans(const VectorDataset& data, std::uint32_t k, std::uint32_t max_iters,
                         std::uint64_t seed);

/// Sum of squared distances of every point to its assigned centroid.
double kmeans_distortion(const VectorDataset& data, const ClusterAssignment& clusters);

}  // namespace hcann
