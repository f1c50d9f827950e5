#include <benchmark/benchmark.h>

#include "hcann/random.hpp"
#include "hcann/search.hpp"
#include "support.hpp"

using namespace hcann;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.normal());
    return v;
}

void BM_L2Distance(benchmark::State& state) {
    const auto dim = static_cast<std::size_t>(state.range(0));
    const auto a = random_vec(dim, 1), b = random_vec(dim, 2);
    for (auto _ : state) benchmark::DoNotOptimize(l2_distance(a, b));
}
BENCHMARK(BM_L2Distance)->Arg(16)->Arg(128)->Arg(960);

void BM_PqDistance(benchmark::State& state) {
    const auto m = static_cast<std::uint32_t>(state.range(0));
    const VectorDataset ds(128, random_vec(2000 * 128, 3));
    const auto book = pq_train(ds, PQTrainParams{m, 256, 5, 1});
    const auto codes = pq_encode_all(ds, book);
    const auto q = random_vec(128, 4);
    const DistanceTable table(q, book);
    NodeId id = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(pq_distance(table, codes.code(id)));
        id = (id + 1) % 2000;
    }
}
BENCHMARK(BM_PqDistance)->Arg(8)->Arg(16)->Arg(32);

void BM_ReadInterval(benchmark::State& state) {
    SynthParams sp;
    sp.n = 5000;
    sp.queries = 0;
    const auto data = synth_blobs(sp);
    const auto layout = similarity_layout(data.base, SimilarityLayoutParams{12, 0, 10, 1});
    NodeId id = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_read_interval(id, static_cast<std::uint64_t>(state.range(0)), layout));
        id = (id + 1) % 5000;
    }
}
BENCHMARK(BM_ReadInterval)->Arg(2)->Arg(8);

void BM_BeamSearch(benchmark::State& state) {
    static const auto smoke = hcann::testing::make_smoke(LayoutKind::kSimilarity, 2000);
    const CacheConfig cfg{200, 0.2, ReplacementPolicy::kLfu, CacheScope::kPerQuery, 0};
    HybridCache cache(cfg, smoke->layout, preload_static(*smoke->store, smoke->layout, cfg.static_capacity_nodes()));
    const Searcher searcher(*smoke->store, smoke->layout, smoke->codebook, smoke->codes,
                            state.range(0) != 0 ? &cache : nullptr);
    const SearchParams params{10, 64, 4, 0.5, 2};
    std::size_t qi = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(searcher.search(smoke->queries.row(qi), params));
        qi = (qi + 1) % smoke->queries.size();
    }
}
BENCHMARK(BM_BeamSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
