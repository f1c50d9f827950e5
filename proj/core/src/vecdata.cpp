#include "hcann/vecdata.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hcann/binary_io.hpp"
#include "hcann/error.hpp"

namespace hcann {

VectorDataset::VectorDataset(std::uint32_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) {
        throw ArgumentError("dataset dimension must be positive");
    }
    if (values_.size() % dim_ != 0) {
        throw DimensionError("value count " + std::to_string(values_.size()) +
                             " is not a multiple of dim " + std::to_string(dim_));
    }
}

std::vector<float> VectorDataset::mean() const {
    std::vector<double> acc(dim_, 0.0);
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
        auto r = row(i);
        for (std::uint32_t j = 0; j < dim_; ++j) {
            acc[j] += r[j];
        }
    }
    std::vector<float> out(dim_);
    for (std::uint32_t j = 0; j < dim_; ++j) {
        out[j] = n == 0 ? 0.0f : static_cast<float>(acc[j] / static_cast<double>(n));
    }
    return out;
}

VectorDataset load_fvecs(const std::string& path) {
    const auto bytes = binio::read_file(path);
    if (bytes.empty()) {
        throw EmptyDatasetError("empty dataset file: " + path);
    }
    std::vector<float> values;
    std::int32_t dim = 0;
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        if (bytes.size() - offset < 4) {
            throw FormatError(path + ": truncated record header at byte offset " + std::to_string(offset));
        }
        const auto d = binio::load<std::int32_t>(bytes.data() + offset);
        if (d <= 0) {
            throw FormatError(path + ": non-positive dimension " + std::to_string(d) + " at byte offset " +
                              std::to_string(offset));
        }
        if (dim == 0) {
            dim = d;
        } else if (d != dim) {
            throw FormatError(path + ": inconsistent dimension at byte offset " + std::to_string(offset) +
                              ": expected " + std::to_string(dim) + ", found " + std::to_string(d));
        }
        const std::size_t body = static_cast<std::size_t>(d) * 4;
        if (bytes.size() - offset - 4 < body) {
            throw FormatError(path + ": truncated record at byte offset " + std::to_string(offset));
        }
        const std::uint8_t* p = bytes.data() + offset + 4;
        for (std::int32_t j = 0; j < d; ++j) {
            values.push_back(binio::load<float>(p + 4 * static_cast<std::size_t>(j)));
        }
        offset += 4 + body;
    }
    return VectorDataset(static_cast<std::uint32_t>(dim), std::move(values));
}

void write_fvecs(const std::string& path, const VectorDataset& dataset) {
    std::vector<std::uint8_t> out;
    out.reserve(dataset.size() * (4 + 4 * static_cast<std::size_t>(dataset.dim())));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        binio::put<std::int32_t>(out, static_cast<std::int32_t>(dataset.dim()));
        for (float v : dataset.row(i)) {
            binio::put<float>(out, v);
        }
    }
    binio::write_file(path, out);
}

std::vector<std::vector<std::int32_t>> load_ivecs(const std::string& path) {
    const auto bytes = binio::read_file(path);
    if (bytes.empty()) {
        throw EmptyDatasetError("empty ivecs file: " + path);
    }
    std::vector<std::vector<std::int32_t>> rows;
    binio::Cursor cur(bytes, path);
    while (cur.remaining() > 0) {
        const auto k = cur.take<std::int32_t>();
        if (k < 0) {
            throw FormatError(path + ": negative row length at byte offset " + std::to_string(cur.position() - 4));
        }
        std::vector<std::int32_t> row(static_cast<std::size_t>(k));
        for (auto& v : row) {
            v = cur.take<std::int32_t>();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_ivecs(const std::string& path, const std::vector<std::vector<std::int32_t>>& rows) {
    std::vector<std::uint8_t> out;
    for (const auto& row : rows) {
        binio::put<std::int32_t>(out, static_cast<std::int32_t>(row.size()));
        for (auto v : row) {
            binio::put<std::int32_t>(out, v);
        }
    }
    binio::write_file(path, out);
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw DimensionError("l2_distance: length mismatch " + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()));
    }
    return std::sqrt(l2_squared_unchecked(a.data(), b.data(), a.size()));
}

GroundTruth ground_truth_topk(const VectorDataset& dataset, std::span<const float> query, std::size_t k) {
    const std::size_t n = dataset.size();
    if (k == 0 || k > n) {
        throw ArgumentError("ground_truth_topk: k=" + std::to_string(k) + " must be in [1, n=" +
                            std::to_string(n) + "]");
    }
    if (query.size() != dataset.dim()) {
        throw DimensionError("ground_truth_topk: query has " + std::to_string(query.size()) +
                             " components, dataset dim is " + std::to_string(dataset.dim()));
    }
    std::vector<std::pair<double, NodeId>> scored(n);
    for (std::size_t i = 0; i < n; ++i) {
        scored[i] = {l2_squared_unchecked(dataset.row(i).data(), query.data(), query.size()),
                     static_cast<NodeId>(i)};
    }
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end());
    GroundTruth out(k);
    for (std::size_t i = 0; i < k; ++i) {
        out[i] = scored[i].second;
    }
    return out;
}

std::vector<GroundTruth> ground_truth_batch(const VectorDataset& dataset, const VectorDataset& queries,
                                            std::size_t k) {
    std::vector<GroundTruth> out;
    out.reserve(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        out.push_back(ground_truth_topk(dataset, queries.row(i), k));
    }
    return out;
}

double recall_at_k(std::span<const NodeId> result, std::span<const NodeId> truth) {
    if (result.size() != truth.size() || truth.empty()) {
        throw ArgumentError("recall_at_k: result has " + std::to_string(result.size()) +
                            " ids, truth has " + std::to_string(truth.size()));
    }
    std::unordered_set<NodeId> truth_set(truth.begin(), truth.end());
    std::size_t shared = 0;
    std::unordered_set<NodeId> seen;
    for (NodeId id : result) {
        if (truth_set.contains(id) && seen.insert(id).second) {
            ++shared;
        }
    }
    return static_cast<double>(shared) / static_cast<double>(truth.size());
}

}  // namespace hcann
