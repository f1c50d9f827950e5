#pragma once

#include <cstdint>
#include <vector>

#include "hcann/vecdata.hpp"

namespace hcann {

/// Gaussian blob generator for desk-scale experiments. Each point picks a
/// blob uniformly at random, so insertion order carries no locality.
struct SynthParams {
    std::size_t n = 10'000;
    std::uint32_t dim = 16;
    std::uint32_t blobs = 8;
    double spread = 1.0;        // per-component standard deviation
    double center_range = 5.0;  // centers uniform in [-range, range]^dim
    std::size_t queries = 200;
    std::uint64_t seed = 42;
};

struct SynthData {
    VectorDataset base;
    VectorDataset queries;
    std::vector<std::uint32_t> base_labels;
    VectorDataset centers;
};

SynthData synth_blobs(const SynthParams& params);

}  // namespace hcann
