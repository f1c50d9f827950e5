#include <cmath>

#include "doctest.h"
#include "hcann/error.hpp"
#include "hcann/workload.hpp"
#include "support.hpp"

using namespace hcann;
using hcann::testing::make_smoke;

TEST_CASE("transition ratio and theta aggregation") {
    CHECK(transition_ratio(16, 27) == doctest::Approx(16.0 / 27.0));
    CHECK(transition_ratio(16, 27) == doctest::Approx(0.59).epsilon(0.01));
    CHECK(transition_ratio(1, 8) == doctest::Approx(1.0 / 8.0));
    CHECK(transition_ratio(27, 16) == kThetaClampHigh);
    CHECK(transition_ratio(1, 1000) == kThetaClampLow);

    const auto fb = theta_from_transitions({{5, 5}, {9, 4}});
    CHECK(fb.fallback);
    CHECK(fb.theta == kThetaFallback);
    CHECK(theta_from_transitions({}).fallback);

    const auto med = theta_from_transitions({{16, 27}, {8, 16}, {3, 4}});
    CHECK_FALSE(med.fallback);
    CHECK(med.theta == doctest::Approx(16.0 / 27.0));
    CHECK(theta_from_transitions({{1, 4}, {3, 4}}).theta == doctest::Approx(0.5));
}

TEST_CASE("workload: worker count does not change results") {
    const auto s = make_smoke(LayoutKind::kSimilarity);
    const Searcher searcher(*s->store, s->layout, s->codebook, s->codes, nullptr);
    const auto truth = ground_truth_batch(s->base, s->queries, 10);
    const SearchParams params{10, 60, 4, 0.5, 2};

    const auto one = run_workload(searcher, s->queries, params, &truth, WorkloadOptions{1, 1, true});
    const auto four = run_workload(searcher, s->queries, params, &truth, WorkloadOptions{1, 4, true});
    REQUIRE(one.outcomes.size() == s->queries.size());
    for (std::size_t i = 0; i < one.outcomes.size(); ++i) {
        CHECK(one.outcomes[i].ids == four.outcomes[i].ids);
        CHECK(one.outcomes[i].stats.io == four.outcomes[i].stats.io);
    }
    CHECK(one.mean_recall == four.mean_recall);
    CHECK(one.mean_io_ops == four.mean_io_ops);

    double sum = 0;
    for (std::size_t i = 0; i < s->queries.size(); ++i) {
        const auto res = searcher.search(s->queries.row(i), params);
        sum += recall_at_k(res.ids, truth[i]);
    }
    CHECK(*one.mean_recall == doctest::Approx(sum / s->queries.size()).epsilon(1e-12));
}

TEST_CASE("workload: single query timing") {
    const auto s = make_smoke(LayoutKind::kInsertion, 200);
    const Searcher searcher(*s->store, s->layout, s->codebook, s->codes, nullptr);
    const VectorDataset one(s->queries.dim(), std::vector<float>(s->queries.row(0).begin(), s->queries.row(0).end()));
    const auto rep = run_workload(searcher, one, SearchParams{}, nullptr, WorkloadOptions{});
    CHECK(rep.executed == 1);
    CHECK(rep.qps > 0.0);
    CHECK(rep.qps <= 1e6 / rep.mean_latency_us * 1.0001);
    CHECK_FALSE(rep.mean_recall.has_value());
}

TEST_CASE("workload: repetitions and cache counters") {
    const auto s = make_smoke(LayoutKind::kSimilarity);
    const CacheConfig cfg{120, 0.2, ReplacementPolicy::kLfu, CacheScope::kPersist, 0};
    HybridCache cache(cfg, s->layout, preload_static(*s->store, s->layout, cfg.static_capacity_nodes()));
    const Searcher searcher(*s->store, s->layout, s->codebook, s->codes, &cache);
    const auto rep = run_workload(searcher, s->queries, SearchParams{10, 60, 4, 0.5, 2}, nullptr,
                                  WorkloadOptions{3, 2, true});
    CHECK(rep.executed == 3 * s->queries.size());
    std::uint64_t lookups = 0;
    for (const auto& ph : rep.hits.phase) lookups += ph.lookups();
    CHECK(lookups > 0);
    CHECK(rep.p50_latency_us <= rep.p90_latency_us);
    CHECK(rep.p90_latency_us <= rep.p99_latency_us);
}

TEST_CASE("calibrate_theta") {
    const auto s = make_smoke(LayoutKind::kSimilarity);
    const Searcher searcher(*s->store, s->layout, s->codebook, s->codes, nullptr);
    const auto truth = ground_truth_batch(s->base, s->queries, 10);
    const auto a = calibrate_theta(searcher, s->queries, truth, 1.0, 10, 60, 4);
    CHECK(a.sampled.size() == s->queries.size());
    CHECK(a.theta > 0.0);
    CHECK(a.theta < 1.0);
    for (double r : a.ratios) CHECK((r >= kThetaClampLow && r <= kThetaClampHigh));
    const auto b = calibrate_theta(searcher, s->queries, truth, 1.0, 10, 60, 4);
    CHECK(a.theta == b.theta);
    CHECK(calibrate_theta(searcher, s->queries, truth, 0.1, 10, 60, 4).sampled.size() == 5);
    CHECK_THROWS_AS((void)calibrate_theta(searcher, s->queries, truth, 0.0, 10, 60, 4), ArgumentError);
}
