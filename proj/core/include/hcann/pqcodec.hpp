#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hcann/vecdata.hpp"

namespace hcann {

/// Product-quantization codebook: `m` subspaces of `sub_dim` components, each
/// with `c` centroids (c <= 256 so a code index fits one byte).
struct PQCodebook {
    std::uint32_t dim = 0;
    std::uint32_t m = 0;
    std::uint32_t c = 0;
    std::uint32_t sub_dim = 0;
    std::vector<float> centroids;  // [m][c][sub_dim]

    std::span<const float> centroid(std::uint32_t subspace, std::uint32_t index) const {
        return {centroids.data() + (static_cast<std::size_t>(subspace) * c + index) * sub_dim, sub_dim};
    }

    bool operator==(const PQCodebook&) const = default;
};

struct PQTrainParams {
    std::uint32_t m = 0;
    std::uint32_t c = 256;
    std::uint32_t iterations = 25;
    std::uint64_t seed = 0;
};

/// Largest divisor of `dim` that is <= max(1, dim / 8).
std::uint32_t default_pq_subspaces(std::uint32_t dim);

PQCodebook pq_train(const VectorDataset& dataset, const PQTrainParams& params);

/// Per-subspace nearest centroid, ties to the lowest index.
std::vector<std::uint8_t> pq_encode(std::span<const float> vector, const PQCodebook& codebook);
std::vector<float> pq_decode(std::span<const std::uint8_t> code, const PQCodebook& codebook);

/// Per-query table of squared sub-distances: entry (j, i) = |q_j - centroid_{j,i}|^2.
class DistanceTable {
  public:
    DistanceTable(std::span<const float> query, const PQCodebook& codebook);

    std::uint32_t subspaces() const { return m_; }
    std::uint32_t centroids_per_subspace() const { return c_; }
    float entry(std::uint32_t subspace, std::uint32_t index) const {
        return table_[static_cast<std::size_t>(subspace) * c_ + index];
    }

    /// sqrt of the summed table lookups for `code`.
    float distance(std::span<const std::uint8_t> code) const;

  private:
    std::uint32_t m_;
    std::uint32_t c_;
    std::vector<float> table_;
};

/// Codes for every node of a dataset, stored contiguously by node id.
struct PQCodes {
    std::uint32_t m = 0;
    std::vector<std::uint8_t> bytes;  // [n][m]

    std::size_t size() const { return m == 0 ? 0 : bytes.size() / m; }
    std::span<const std::uint8_t> code(NodeId id) const {
        return {bytes.data() + static_cast<std::size_t>(id) * m, m};
    }

    bool operator==(const PQCodes&) const = default;
};

inline DistanceTable build_distance_table(std::span<const float> query, const PQCodebook& codebook) {
    return DistanceTable(query, codebook);
}

inline float pq_distance(const DistanceTable& table, std::span<const std::uint8_t> code) {
    return table.distance(code);
}

PQCodes pq_encode_all(const VectorDataset& dataset, const PQCodebook& codebook);

/// Sidecar layout: magic "GOVP", u32 version, u32 dim, u32 m, u32 c,
/// centroids (m*c*sub_dim f32), u64 n, codes (n*m u8). Little-endian.
void write_pq(const std::string& path, const PQCodebook& codebook, const PQCodes& codes);
void read_pq(const std::string& path, PQCodebook& codebook, PQCodes& codes);

}  // namespace hcann
