#include "hcann/kmeans.hpp"

#include <algorithm>
#include <limits>

#include "hcann/error.hpp"
#include "hcann/random.hpp"

namespace hcann {

namespace {

std::vector<float> seed_centers(const VectorDataset& data, std::uint32_t k, Rng& rng) {
    const std::size_t n = data.size();
    const std::size_t dim = data.dim();
    std::vector<float> centers;
    centers.reserve(static_cast<std::size_t>(k) * dim);
    std::vector<bool> chosen(n, false);

    auto take = [&](std::size_t i) {
        chosen[i] = true;
        auto r = data.row(i);
        centers.insert(centers.end(), r.begin(), r.end());
    };

    take(rng.below(n));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::uint32_t c = 1; c < k; ++c) {
        const float* last = centers.data() + static_cast<std::size_t>(c - 1) * dim;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], l2_squared_unchecked(data.row(i).data(), last, dim));
            total += nearest[i];
        }
        if (total <= 0.0) {
            // All remaining points coincide with a center; draw among unchosen rows.
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) rest.push_back(i);
            }
            take(rest[rng.below(rest.size())]);
            continue;
        }
        double target = rng.uniform() * total;
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (nearest[i] <= 0.0) continue;
            pick = i;
            target -= nearest[i];
            if (target < 0.0) break;
        }
        take(pick);
    }
    return centers;
}

// Returns true when any point changed cluster.
bool assign(const VectorDataset& data, const std::vector<float>& centers, std::uint32_t k,
            std::vector<std::uint32_t>& assignment, std::vector<double>& dist) {
    const std::size_t dim = data.dim();
    bool changed = false;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const float* p = data.row(i).data();
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::uint32_t c = 0; c < k; ++c) {
            const double d = l2_squared_unchecked(p, centers.data() + static_cast<std::size_t>(c) * dim, dim);
            if (d < best) {
                best = d;
                best_c = c;
            }
        }
        if (assignment[i] != best_c) {
            assignment[i] = best_c;
            changed = true;
        }
        dist[i] = best;
    }
    return changed;
}

void update(const VectorDataset& data, std::uint32_t k, std::vector<std::uint32_t>& assignment,
            std::vector<float>& centers) {
    const std::size_t n = data.size();
    const std::size_t dim = data.dim();

    auto recompute = [&](std::vector<std::size_t>& counts) {
        std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
        counts.assign(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = assignment[i];
            ++counts[c];
            auto r = data.row(i);
            for (std::size_t j = 0; j < dim; ++j) {
                sums[c * dim + j] += r[j];
            }
        }
        for (std::uint32_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < dim; ++j) {
                centers[c * dim + j] = static_cast<float>(sums[c * dim + j] / static_cast<double>(counts[c]));
            }
        }
    };

    std::vector<std::size_t> counts;
    recompute(counts);
    bool repaired = false;
    for (std::uint32_t c = 0; c < k; ++c) {
        if (counts[c] != 0) continue;
        // Steal the point farthest from its centroid among clusters that can spare one.
        double worst = -1.0;
        std::size_t victim = n;
        for (std::size_t i = 0; i < n; ++i) {
            const auto owner = assignment[i];
            if (counts[owner] < 2) continue;
            const double d =
                l2_squared_unchecked(data.row(i).data(), centers.data() + static_cast<std::size_t>(owner) * dim, dim);
            if (d > worst) {
                worst = d;
                victim = i;
            }
        }
        if (victim == n) {
            throw InvariantError("kmeans: no point available to repair an empty cluster");
        }
        --counts[assignment[victim]];
        assignment[victim] = c;
        counts[c] = 1;
        auto r = data.row(victim);
        std::copy(r.begin(), r.end(), centers.begin() + static_cast<std::ptrdiff_t>(c * dim));
        repaired = true;
    }
    if (repaired) {
        recompute(counts);
    }
}

}  // namespace

std::vector<std::vector<NodeId>> ClusterAssignment::members() const {
    std::vector<std::vector<NodeId>> out(k_clusters);
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        out[assignment[i]].push_back(static_cast<NodeId>(i));
    }
    return out;
}

ClusterAssignment kmeans(const VectorDataset& data, std::uint32_t k, std::uint32_t max_iters, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (k == 0 || k > n) {
        throw ArgumentError("kmeans: k=" + std::to_string(k) + " must be in [1, n=" + std::to_string(n) + "]");
    }
    if (max_iters == 0) {
        throw ArgumentError("kmeans: max_iters must be positive");
    }
    Rng rng(seed);
    std::vector<float> centers = seed_centers(data, k, rng);
    std::vector<std::uint32_t> assignment(n, std::numeric_limits<std::uint32_t>::max());
    std::vector<double> dist(n, 0.0);

    ClusterAssignment out;
    out.k_clusters = k;
    for (std::uint32_t iter = 0; iter < max_iters; ++iter) {
        const bool changed = assign(data, centers, k, assignment, dist);
        if (!changed) break;
        update(data, k, assignment, centers);
        out.assignment = assignment;
        out.centroids = VectorDataset(data.dim(), centers);
        out.distortion_history.push_back(kmeans_distortion(data, out));
    }
    out.assignment = std::move(assignment);
    out.centroids = VectorDataset(data.dim(), std::move(centers));
    return out;
}

double kmeans_distortion(const VectorDataset& data, const ClusterAssignment& clusters) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        total += l2_squared_unchecked(data.row(i).data(), clusters.centroids.row(clusters.assignment[i]).data(),
                                      data.dim());
    }
    return total;
}

}  // namespace hcann
