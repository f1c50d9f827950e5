#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hcann/search.hpp"
#include "hcann/vecdata.hpp"

namespace hcann {

struct WorkloadOptions {
    std::uint32_t repetitions = 1;
    std::uint32_t workers = 1;
    bool reset_dynamic_per_repetition = true;
};

struct QueryOutcome {
    std::vector<NodeId> ids;
    std::vector<double> distances;
    SearchStats stats;
    std::optional<double> recall;
};

struct WorkloadReport {
    std::size_t query_count = 0;
    std::size_t executed = 0;  // query_count * repetitions
    std::uint32_t workers = 1;
    double wall_seconds = 0.0;
    double qps = 0.0;
    double mean_latency_us = 0.0;
    double p50_latency_us = 0.0;
    double p90_latency_us = 0.0;
    double p99_latency_us = 0.0;
    std::optional<double> mean_recall;
    double mean_io_ops = 0.0;
    double mean_pages_read = 0.0;
    double mean_iterations = 0.0;
    HitStats hits;
    /// Means over queries where the corresponding event happened.
    std::optional<double> mean_transition_theta;
    std::optional<double> mean_transition_panns;
    std::optional<double> mean_transition_truth;
    /// Outcomes of the final repetition, indexed like the query set.
    std::vector<QueryOutcome> outcomes;
};

/// Runs every query `repetitions` times across `workers` threads. Result id
/// lists do not depend on the worker count; cache counters may, because the
/// dynamic cache is shared. `truth` (may be null) enables recall and the
/// true-transition statistic; lists longer than k are truncated to k.
WorkloadReport run_workload(const Searcher& searcher, const VectorDataset& queries, const SearchParams& params,
                            const std::vector<GroundTruth>* truth, const WorkloadOptions& options);

struct CalibrationResult {
    double theta = 0.5;
    bool fallback = false;
    std::vector<std::size_t> sampled;  // query indices
    std::vector<double> ratios;        // clamped per-query t / t'
};

inline constexpr double kThetaFallback = 0.5;
inline constexpr double kThetaClampLow = 0.01;
inline constexpr double kThetaClampHigh = 0.99;

/// t / t' clamped into [kThetaClampLow, kThetaClampHigh].
double transition_ratio(std::uint32_t t, std::uint32_t t_panns);

/// Median of the clamped ratios of (t, t') pairs; the fallback theta when no
/// pair has t < t'.
CalibrationResult theta_from_transitions(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& transitions);

/// Samples ceil(fraction * |queries|) queries (seeded), runs each with
/// ground truth, and forms t / t' where t is the first iteration expanding
/// the true nearest neighbor and t' the iteration at which all top-k queue
/// entries were first visited. Ratios are clamped into (0, 1); theta is
/// their median, or 0.5 when no sample had t < t'.
CalibrationResult calibrate_theta(const Searcher& searcher, const VectorDataset& queries,
                                  const std::vector<GroundTruth>& truth, double fraction, std::uint32_t k,
                                  std::uint32_t l, std::uint64_t seed, const SearchParams& base = {});

}  // namespace hcann
