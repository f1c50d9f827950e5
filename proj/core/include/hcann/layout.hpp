#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcann/kmeans.hpp"
#include "hcann/vecdata.hpp"

namespace hcann {

enum class LayoutKind : std::uint32_t { kInsertion = 0, kSimilarity = 1 };

std::string to_string(LayoutKind kind);
LayoutKind parse_layout_kind(const std::string& text);

struct NodeLocation {
    std::uint32_t cluster_id = 0;
    std::uint64_t rank = 0;  // position in disk order
    std::uint64_t page_id = 0;
    std::uint16_t slot = 0;

    bool operator==(const NodeLocation&) const = default;
};

struct ClusterExtent {
    std::uint64_t first_page = 0;
    std::uint64_t page_count = 0;
    std::uint64_t first_rank = 0;
    std::uint64_t size = 0;
    std::vector<float> centroid;

    std::uint64_t last_page() const { return first_page + page_count - 1; }

    bool operator==(const ClusterExtent&) const = default;
};

/// Placement of every node on disk: its rank in the global order, its page
/// and slot, and the contiguous rank/page span of every cluster.
struct LayoutMap {
    LayoutKind kind = LayoutKind::kInsertion;
    std::uint32_t page_capacity = 1;
    std::uint32_t dim = 0;
    std::vector<NodeId> node_order;        // rank -> node id
    std::vector<NodeLocation> node_loc;    // node id -> location
    std::vector<ClusterExtent> cluster_table;

    std::size_t size() const { return node_order.size(); }
    std::uint64_t total_pages() const {
        return (node_order.size() + page_capacity - 1) / page_capacity;
    }
    /// Node ids stored on `page_id`, in slot order.
    std::span<const NodeId> page_nodes(std::uint64_t page_id) const;

    bool operator==(const LayoutMap&) const = default;
};

/// Members sorted by ascending distance to `centroid`, ties by ascending id.
std::vector<NodeId> order_within_cluster(std::span<const NodeId> members, std::span<const float> centroid,
                                         const VectorDataset& dataset);

/// Greedy nearest-centroid chain starting at the centroid nearest `anchor`
/// (normally the dataset mean). Ties resolve to the lower cluster id.
std::vector<std::uint32_t> order_clusters(const VectorDataset& centroids, std::span<const float> anchor);

/// Concatenates the cluster orders in sequence and fills pages front to back.
/// Clusters are not page aligned. `cluster_orders[c]` and `centroids.row(c)`
/// describe cluster c.
LayoutMap pack_pages(std::span<const std::uint32_t> cluster_sequence,
                     const std::vector<std::vector<NodeId>>& cluster_orders, const VectorDataset& centroids,
                     std::uint32_t page_capacity, LayoutKind kind = LayoutKind::kSimilarity);

/// Identity order; a single cluster whose centroid is the dataset mean.
LayoutMap insertion_layout(const VectorDataset& dataset, std::uint32_t page_capacity);

struct SimilarityLayoutParams {
    std::uint32_t page_capacity = 1;
    std::uint32_t k_clusters = 0;  // 0 -> ceil(n / (4 * page_capacity))
    std::uint32_t max_iters = 25;
    std::uint64_t seed = 0;
};

std::uint32_t default_cluster_count(std::size_t n, std::uint32_t page_capacity);

/// k-means, then centroid-distance order within clusters, then the greedy
/// cluster chain, then page packing.
LayoutMap similarity_layout(const VectorDataset& dataset, const SimilarityLayoutParams& params);

struct ReadInterval {
    std::uint64_t start_page = 0;
    std::uint64_t page_count = 0;

    std::uint64_t end_page() const { return start_page + page_count; }  // exclusive
    bool contains(std::uint64_t page) const { return page >= start_page && page < end_page(); }
    bool operator==(const ReadInterval&) const = default;
};

/// Contiguous run of min(window_pages, total_pages) pages around `target`'s
/// page. Centered on the target page, kept inside the target cluster's pages
/// when the cluster is large enough, otherwise widened to cover the whole
/// cluster and spill into its neighbors, then clamped to the file.
ReadInterval compute_read_interval(NodeId target, std::uint64_t window_pages, const LayoutMap& layout);

/// Mean pairwise l2 distance between nodes that share a page, averaged over
/// all same-page pairs.
double mean_intra_page_distance(const LayoutMap& layout, const VectorDataset& dataset);

/// Throws InvariantError if the map is not a consistent permutation/packing.
void validate_layout(const LayoutMap& layout);

/// Sidecar: magic "GOVL", u32 version, u64 n, u32 k_clusters, u32 page_capacity,
/// u32 dim, u32 kind; n node records (u32 cluster, u64 rank, u64 page, u16 slot);
/// k cluster records (u64 first_page, u64 page_count, u64 first_rank, u64 size,
/// dim f32 centroid). Little-endian.
void write_layout(const std::string& path, const LayoutMap& layout);
LayoutMap read_layout(const std::string& path);

}  // namespace hcann
