#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hcann/cache.hpp"
#include "hcann/diskstore.hpp"
#include "hcann/layout.hpp"
#include "hcann/pqcodec.hpp"

namespace hcann {

struct SearchParams {
    std::uint32_t k = 10;
    std::uint32_t l = 100;
    std::uint32_t beam_width = 4;
    /// Fraction of the top-k prefix that must be visited to enter phase 2.
    /// 1.0 reproduces the all-top-k rule.
    double theta = 0.5;
    std::uint32_t window_pages = 2;

    void validate() const;
};

/// A member of the candidate queue.
struct Candidate {
    NodeId id = 0;
    float approx_dist = 0.0f;
    bool visited = false;
    std::optional<double> exact_dist;  // set once expanded

    /// Queue order: approximate distance, then id.
    bool operator<(const Candidate& o) const {
        return approx_dist < o.approx_dist || (approx_dist == o.approx_dist && id < o.id);
    }
};

/// True iff the queue holds at least ceil(theta * k) candidates and all of
/// that prefix is visited. `queue` must be in queue order.
bool detect_transition(std::span<const Candidate> queue, std::size_t k, double theta);

struct TraceRecord {
    std::uint32_t iter = 0;
    NodeId expanded_id = 0;
    double exact_dist = 0.0;
    int phase = 1;
    HitKind hit_kind = HitKind::kMiss;
};

struct SearchStats {
    std::uint32_t iterations = 0;
    std::uint32_t expansions = 0;
    /// Iteration after which the theta rule moved the search into phase 2.
    std::optional<std::uint32_t> transition_iter_theta;
    /// Iteration at which the all-top-k rule (theta = 1) first held.
    std::optional<std::uint32_t> transition_iter_panns;
    /// First iteration that expanded the true nearest neighbor.
    std::optional<std::uint32_t> transition_iter_truth;
    /// Per iteration: smallest exact distance among that iteration's expansions.
    std::vector<double> distance_trace;
    /// Exact-distance range of phase-2 expansions (NaN when phase 2 expanded nothing).
    double d_min = 0.0;
    double d_max = 0.0;
    IoStats io;
    HitStats hits;
    double latency_us = 0.0;
    std::vector<TraceRecord> trace;  // filled when requested
};

struct SearchResult {
    std::vector<NodeId> ids;
    std::vector<double> distances;
    SearchStats stats;
};

struct SearchOptions {
    /// Id of the exact nearest neighbor, enabling transition_iter_truth.
    std::optional<NodeId> true_nearest;
    bool keep_trace = false;
};

/// Beam search over a paged index. Queue order uses PQ distances from
/// in-memory codes; expanded nodes get exact distances, which rank the
/// final result. In phase 1 a miss reads the node's page alone. In phase 2 a
/// miss reads a similarity-aware page interval in one request and admits
/// those pages to the dynamic cache.
class Searcher {
  public:
    /// `cache` may be null (no caching).
    Searcher(const DiskIndex& store, const LayoutMap& layout, const PQCodebook& codebook, const PQCodes& codes,
             HybridCache* cache);

    SearchResult search(std::span<const float> query, const SearchParams& params,
                        const SearchOptions& options = {}) const;

    const DiskIndex& store() const { return store_; }
    const LayoutMap& layout() const { return layout_; }
    HybridCache* cache() const { return cache_; }

  private:
    const DiskIndex& store_;
    const LayoutMap& layout_;
    const PQCodebook& codebook_;
    const PQCodes& codes_;
    HybridCache* cache_;
};

inline SearchResult beam_search(const Searcher& searcher, std::span<const float> query, const SearchParams& params,
                                const SearchOptions& options = {}) {
    return searcher.search(query, params, options);
}

}  // namespace hcann
