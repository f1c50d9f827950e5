#include "hcann/synth.hpp"

#include "hcann/error.hpp"
#include "hcann/random.hpp"

namespace hcann {

namespace {

std::vector<float> sample(const VectorDataset& centers, double spread, std::size_t count, Rng& rng,
                          std::vector<std::uint32_t>* labels) {
    const std::uint32_t dim = centers.dim();
    std::vector<float> values;
    values.reserve(count * dim);
    for (std::size_t i = 0; i < count; ++i) {
        const auto blob = static_cast<std::uint32_t>(rng.below(centers.size()));
        if (labels != nullptr) labels->push_back(blob);
        auto c = centers.row(blob);
        for (std::uint32_t j = 0; j < dim; ++j) {
            values.push_back(static_cast<float>(c[j] + spread * rng.normal()));
        }
    }
    return values;
}

}  // namespace

SynthData synth_blobs(const SynthParams& params) {
    if (params.n == 0 || params.dim == 0 || params.blobs == 0) {
        throw ArgumentError("synth: n, dim and blobs must be positive");
    }
    if (!(params.spread >= 0.0) || !(params.center_range >= 0.0)) {
        throw ArgumentError("synth: spread and center_range must be non-negative");
    }
    Rng center_rng(params.seed);
    std::vector<float> centers(static_cast<std::size_t>(params.blobs) * params.dim);
    for (auto& v : centers) {
        v = static_cast<float>((2.0 * center_rng.uniform() - 1.0) * params.center_range);
    }
    SynthData out;
    out.centers = VectorDataset(params.dim, std::move(centers));
    Rng base_rng(params.seed + 1);
    out.base = VectorDataset(params.dim, sample(out.centers, params.spread, params.n, base_rng, &out.base_labels));
    Rng query_rng(params.seed + 2);
    if (params.queries > 0) {
        out.queries = VectorDataset(params.dim, sample(out.centers, params.spread, params.queries, query_rng, nullptr));
    }
    return out;
}

}  // namespace hcann
