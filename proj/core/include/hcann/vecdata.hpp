#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hcann {

using NodeId = std::uint32_t;

/// Dense row-major float vectors with implicit ids 0..n-1.
class VectorDataset {
  public:
    VectorDataset() = default;
    VectorDataset(std::uint32_t dim, std::vector<float> values);

    std::uint32_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const { return values_.empty(); }

    std::span<const float> row(std::size_t i) const {
        return {values_.data() + i * dim_, dim_};
    }
    std::span<const float> values() const { return values_; }

    /// Component-wise mean of all rows (double accumulation).
    std::vector<float> mean() const;

    bool operator==(const VectorDataset&) const = default;

  private:
    std::uint32_t dim_ = 0;
    std::vector<float> values_;
};

/// Exact top-k ids for one query, ascending by distance.
using GroundTruth = std::vector<NodeId>;

VectorDataset load_fvecs(const std::string& path);
void write_fvecs(const std::string& path, const VectorDataset& dataset);

/// ivecs: per row, int32 k followed by k int32 values.
std::vector<std::vector<std::int32_t>> load_ivecs(const std::string& path);
void write_ivecs(const std::string& path, const std::vector<std::vector<std::int32_t>>& rows);

/// Euclidean distance, accumulated in double. Throws DimensionError on length mismatch.
double l2_distance(std::span<const float> a, std::span<const float> b);

/// Squared Euclidean distance without the length check; hot-path helper.
inline double l2_squared_unchecked(const float* a, const float* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += diff * diff;
    }
    return acc;
}

/// Exact k nearest ids by l2, ties broken by ascending id.
GroundTruth ground_truth_topk(const VectorDataset& dataset, std::span<const float> query, std::size_t k);

/// ground_truth_topk for every row of `queries`.
std::vector<GroundTruth> ground_truth_batch(const VectorDataset& dataset, const VectorDataset& queries,
                                            std::size_t k);

/// |result ∩ truth| / k. Both lists must have the same length k > 0.
double recall_at_k(std::span<const NodeId> result, std::span<const NodeId> truth);

}  // namespace hcann
