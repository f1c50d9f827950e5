#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "hcann/cache.hpp"
#include "hcann/diskstore.hpp"
#include "hcann/graphbuild.hpp"
#include "hcann/layout.hpp"
#include "hcann/pqcodec.hpp"
#include "hcann/report.hpp"
#include "hcann/search.hpp"
#include "hcann/synth.hpp"
#include "hcann/workload.hpp"

// The end-to-end commands behind the CLI. Each returns a Report echoing its
// effective configuration alongside what it produced.
namespace hcann::pipeline {

// Files inside an index directory.
std::string base_path(const std::string& dir);                      // base.fvecs
std::string graph_path(const std::string& dir);                     // graph.bin
std::string pq_path(const std::string& dir);                        // pq.bin
std::string build_info_path(const std::string& dir);                // build.txt
std::string index_path(const std::string& dir, LayoutKind kind);    // index.<kind>.bin
std::string layout_path(const std::string& dir, LayoutKind kind);   // layout.<kind>.bin
std::string theta_path(const std::string& dir);                     // theta.txt

struct SynthCommand {
    SynthParams params;
    std::string base_out;
    std::string queries_out;  // empty: skip queries
};
Report cmd_synth(const SynthCommand& cmd);

struct BuildCommand {
    std::string dataset;
    std::string out_dir;
    BuildParams graph;
    std::uint32_t pq_m = 0;  // 0: default_pq_subspaces(dim)
    std::uint32_t pq_c = 256;
    std::uint32_t pq_iters = 25;
};
Report cmd_build(const BuildCommand& cmd);

struct LayoutCommand {
    std::string index_dir;
    LayoutKind kind = LayoutKind::kSimilarity;
    std::uint32_t k_clusters = 0;  // 0: ceil(n / (4 * page_capacity))
    std::uint32_t page_size = kDefaultPageSize;
    std::uint32_t max_iters = 25;
    std::uint64_t seed = 0;
};
Report cmd_layout(const LayoutCommand& cmd);

struct GtCommand {
    std::string dataset;
    std::string queries;
    std::uint32_t k = 100;
    std::string out;
};
Report cmd_gt(const GtCommand& cmd);

/// Everything a searcher needs, loaded from an index directory.
struct IndexBundle {
    std::string dir;
    LayoutKind kind = LayoutKind::kSimilarity;
    LayoutMap layout;
    PQCodebook codebook;
    PQCodes codes;
    std::unique_ptr<DiskIndex> store;

    static IndexBundle open(const std::string& dir, LayoutKind kind, bool try_direct_io = false);
};

struct CalibrateCommand {
    std::string index_dir;
    LayoutKind kind = LayoutKind::kSimilarity;
    std::string queries;
    std::string gt;  // empty: computed from the index's base vectors
    std::uint32_t k = 10;
    std::uint32_t l = 100;
    std::uint32_t beam_width = 4;
    double fraction = 0.01;
    std::uint64_t seed = 0;
};
Report cmd_calibrate(const CalibrateCommand& cmd);

/// Theta stored by cmd_calibrate, if any.
std::optional<double> stored_theta(const std::string& index_dir);

struct CacheOptions {
    bool enabled = true;
    long long budget_nodes = -1;  // < 0: 1% of the index file, in node records
    double static_fraction = 0.2;
    ReplacementPolicy policy = ReplacementPolicy::kLfu;
    CacheScope scope = CacheScope::kPersist;
    std::uint64_t seed = 0;
};

/// Node records worth 1% of the index file.
std::size_t default_cache_budget(const IndexFileHeader& header);

struct BenchCommand {
    std::string index_dir;
    LayoutKind kind = LayoutKind::kSimilarity;
    std::string queries;
    std::string gt;  // empty: recall unavailable
    SearchParams params{100, 200, 4, 0.5, 2};
    std::optional<double> theta;  // unset: stored theta, else params.theta
    CacheOptions cache;
    std::uint32_t workers = 1;
    std::uint32_t repetitions = 1;
    bool direct_io = false;
};

struct BenchOutcome {
    Report report;
    WorkloadReport workload;
};

BenchOutcome run_bench(const BenchCommand& cmd);
inline Report cmd_bench(const BenchCommand& cmd) { return run_bench(cmd).report; }

struct QueryCommand {
    BenchCommand bench;
    std::string trace_out;   // empty: no trace
    std::string result_out;  // empty: no ivecs result file
};
Report cmd_query(const QueryCommand& cmd);

/// Side-by-side metrics of two bench reports with ratios b / a.
Report cmd_compare(const Report& a, const Report& b);

/// min(32, hardware threads), at least 1.
std::uint32_t default_workers();

}  // namespace hcann::pipeline
