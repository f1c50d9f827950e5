#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "hcann/diskstore.hpp"
#include "hcann/graphbuild.hpp"
#include "hcann/layout.hpp"
#include "hcann/pqcodec.hpp"
#include "hcann/synth.hpp"

namespace hcann::testing {

/// Scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<int> counter{0};
        const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("hcann_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(stamp) + "_" +
                 std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

/// In-memory pieces of a small searchable index plus its file on disk.
struct SmokeIndex {
    TempDir dir{"smoke"};
    VectorDataset base;
    VectorDataset queries;
    GraphIndex graph;
    PQCodebook codebook;
    PQCodes codes;
    LayoutMap layout;
    std::unique_ptr<DiskIndex> store;
};

inline std::unique_ptr<SmokeIndex> make_smoke(LayoutKind kind, std::size_t n = 500, std::uint32_t pq_m = 8) {
    auto s = std::make_unique<SmokeIndex>();
    SynthParams sp;
    sp.n = n;
    sp.queries = 50;
    sp.seed = 7;
    auto data = synth_blobs(sp);
    s->base = std::move(data.base);
    s->queries = std::move(data.queries);
    BuildParams bp;
    bp.max_degree = 16;
    bp.build_list_size = 32;
    bp.seed = 3;
    s->graph = build_graph(s->base, bp);
    PQTrainParams pp;
    pp.m = pq_m;
    pp.c = 64;
    pp.seed = 5;
    s->codebook = pq_train(s->base, pp);
    s->codes = pq_encode_all(s->base, s->codebook);
    const auto cap = max_page_capacity(s->base.dim(), bp.max_degree, kDefaultPageSize);
    if (kind == LayoutKind::kInsertion) {
        s->layout = insertion_layout(s->base, cap);
    } else {
        SimilarityLayoutParams lp;
        lp.page_capacity = cap;
        lp.seed = 11;
        s->layout = similarity_layout(s->base, lp);
    }
    const auto path = s->dir.file("index.bin");
    write_index(path, s->base, s->graph, s->layout);
    s->store = std::make_unique<DiskIndex>(path);
    return s;
}

}  // namespace hcann::testing
