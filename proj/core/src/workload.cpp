#include "hcann/workload.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "hcann/error.hpp"
#include "hcann/random.hpp"

namespace hcann {

namespace {

double percentile(std::vector<double> sorted_values, double q) {
    if (sorted_values.empty()) return 0.0;
    std::sort(sorted_values.begin(), sorted_values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted_values.size())));
    return sorted_values[std::clamp<std::size_t>(rank, 1, sorted_values.size()) - 1];
}

template <class Get>
std::optional<double> mean_of(const std::vector<QueryOutcome>& all, Get get) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& o : all) {
        if (auto v = get(o)) {
            sum += *v;
            ++count;
        }
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

}  // namespace

WorkloadReport run_workload(const Searcher& searcher, const VectorDataset& queries, const SearchParams& params,
                            const std::vector<GroundTruth>* truth, const WorkloadOptions& options) {
    params.validate();
    if (options.repetitions == 0 || options.workers == 0) {
        throw ArgumentError("run_workload: repetitions and workers must be >= 1");
    }
    if (truth != nullptr) {
        if (truth->size() != queries.size()) {
            throw ArgumentError("run_workload: ground truth has " + std::to_string(truth->size()) +
                                " rows for " + std::to_string(queries.size()) + " queries");
        }
        for (const auto& row : *truth) {
            if (row.size() < params.k) throw ArgumentError("run_workload: ground truth rows shorter than k");
        }
    }
    const std::size_t nq = queries.size();
    WorkloadReport report;
    report.query_count = nq;
    report.workers = options.workers;
    std::vector<QueryOutcome> all;
    all.reserve(nq * options.repetitions);

    double wall = 0.0;
    for (std::uint32_t rep = 0; rep < options.repetitions; ++rep) {
        if (options.reset_dynamic_per_repetition && searcher.cache() != nullptr) {
            searcher.cache()->reset_dynamic();
        }
        std::vector<QueryOutcome> outcomes(nq);
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= nq) return;
                try {
                    SearchOptions so;
                    if (truth != nullptr) so.true_nearest = (*truth)[i][0];
                    auto res = searcher.search(queries.row(i), params, so);
                    auto& out = outcomes[i];
                    if (truth != nullptr && res.ids.size() == params.k) {
                        out.recall = recall_at_k(res.ids, std::span<const NodeId>((*truth)[i]).first(params.k));
                    } else if (truth != nullptr) {
                        out.recall = 0.0;
                    }
                    out.ids = std::move(res.ids);
                    out.distances = std::move(res.distances);
                    out.stats = std::move(res.stats);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = nq;
                }
            }
        };
        const auto started = std::chrono::steady_clock::now();
        if (options.workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (std::uint32_t w = 0; w < options.workers; ++w) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        wall += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (failure) std::rethrow_exception(failure);
        if (rep + 1 == options.repetitions) report.outcomes = outcomes;
        for (auto& o : outcomes) all.push_back(std::move(o));
    }

    report.executed = all.size();
    report.wall_seconds = wall;
    report.qps = wall > 0.0 ? static_cast<double>(all.size()) / wall : 0.0;
    std::vector<double> lat;
    lat.reserve(all.size());
    double io = 0.0, pages = 0.0, iters = 0.0;
    for (const auto& o : all) {
        lat.push_back(o.stats.latency_us);
        io += static_cast<double>(o.stats.io.io_ops);
        pages += static_cast<double>(o.stats.io.pages_read);
        iters += o.stats.iterations;
        report.hits += o.stats.hits;
    }
    const double count = std::max<double>(1.0, static_cast<double>(all.size()));
    report.mean_latency_us = std::accumulate(lat.begin(), lat.end(), 0.0) / count;
    report.p50_latency_us = percentile(lat, 0.50);
    report.p90_latency_us = percentile(lat, 0.90);
    report.p99_latency_us = percentile(lat, 0.99);
    report.mean_io_ops = io / count;
    report.mean_pages_read = pages / count;
    report.mean_iterations = iters / count;
    report.mean_recall = mean_of(all, [](const QueryOutcome& o) { return o.recall; });
    auto as_double = [](std::optional<std::uint32_t> v) -> std::optional<double> {
        if (!v) return std::nullopt;
        return static_cast<double>(*v);
    };
    report.mean_transition_theta =
        mean_of(all, [&](const QueryOutcome& o) { return as_double(o.stats.transition_iter_theta); });
    report.mean_transition_panns =
        mean_of(all, [&](const QueryOutcome& o) { return as_double(o.stats.transition_iter_panns); });
    report.mean_transition_truth =
        mean_of(all, [&](const QueryOutcome& o) { return as_double(o.stats.transition_iter_truth); });
    return report;
}

double transition_ratio(std::uint32_t t, std::uint32_t t_panns) {
    if (t == 0 || t_panns == 0) throw ArgumentError("transition_ratio: iterations start at 1");
    return std::clamp(static_cast<double>(t) / static_cast<double>(t_panns), kThetaClampLow, kThetaClampHigh);
}

CalibrationResult theta_from_transitions(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& transitions) {
    CalibrationResult out;
    bool any_earlier = false;
    for (const auto& [t, t_panns] : transitions) {
        if (t < t_panns) any_earlier = true;
        out.ratios.push_back(transition_ratio(t, t_panns));
    }
    if (!any_earlier) {
        out.theta = kThetaFallback;
        out.fallback = true;
        return out;
    }
    auto sorted = out.ratios;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    out.theta = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return out;
}

CalibrationResult calibrate_theta(const Searcher& searcher, const VectorDataset& queries,
                                  const std::vector<GroundTruth>& truth, double fraction, std::uint32_t k,
                                  std::uint32_t l, std::uint64_t seed, const SearchParams& base) {
    if (queries.empty() || !(fraction > 0.0 && fraction <= 1.0)) {
        throw ArgumentError("calibrate_theta: empty sample (need queries and fraction in (0, 1])");
    }
    if (truth.size() != queries.size()) {
        throw ArgumentError("calibrate_theta: ground truth does not match the query set");
    }
    const std::size_t nq = queries.size();
    const auto sample_size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(nq) - 1e-9)), 1, nq);
    std::vector<std::size_t> order(nq);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    order.resize(sample_size);
    std::sort(order.begin(), order.end());

    SearchParams params = base;
    params.k = k;
    params.l = l;
    params.theta = 1.0;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> transitions;
    for (std::size_t qi : order) {
        if (truth[qi].empty()) throw ArgumentError("calibrate_theta: empty ground-truth row");
        SearchOptions so;
        so.true_nearest = truth[qi][0];
        const auto res = searcher.search(queries.row(qi), params, so);
        const auto& st = res.stats;
        if (!st.transition_iter_truth || !st.transition_iter_panns) continue;
        transitions.emplace_back(*st.transition_iter_truth, *st.transition_iter_panns);
    }
    CalibrationResult out = theta_from_transitions(transitions);
    out.sampled = order;
    return out;
}

}  // namespace hcann
