// hcann: build, lay out, calibrate and benchmark a paged graph index.
//
// Exit codes: 0 success, 2 usage/argument error, 3 data/format error,
// 4 internal invariant violation.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <iostream>
#include <string>

#include "hcann/error.hpp"
#include "hcann/pipeline.hpp"

namespace {

using namespace hcann;
namespace pl = hcann::pipeline;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

// Every flag --foo-bar may also come from HCANN_FOO_BAR.
template <class T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& target, const std::string& help) {
    std::string env = "HCANN_";
    for (char ch : name) env += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return app->add_option("--" + name, target, help)->envname(env)->capture_default_str();
}

void emit(const Report& report, const std::string& out) {
    std::cout << report.to_text();
    if (!out.empty()) report.save(out);
}

void add_search_flags(CLI::App* app, pl::BenchCommand& b, std::string& kind, double& theta, bool& no_cache) {
    flag(app, "index", b.index_dir, "Index directory")->required();
    flag(app, "layout", kind, "Layout kind: insertion|similarity");
    flag(app, "queries", b.queries, "Query vectors (.fvecs)")->required();
    flag(app, "gt", b.gt, "Ground truth (.ivecs); enables recall");
    flag(app, "k", b.params.k, "Results per query");
    flag(app, "l", b.params.l, "Candidate queue length");
    flag(app, "beam-width", b.params.beam_width, "Expansions per iteration");
    flag(app, "theta", theta, "Phase-transition fraction in (0,1]; default: calibrated sidecar, else 0.5");
    flag(app, "window-pages", b.params.window_pages, "Pages per phase-2 batch read");
    flag(app, "cache-budget", b.cache.budget_nodes, "Cache budget in node records; -1 = 1% of the index file");
    flag(app, "static-frac", b.cache.static_fraction, "Share of the budget given to the static cache");
    app->add_flag("--no-cache", no_cache, "Disable caching entirely")->envname("HCANN_NO_CACHE");
    flag(app, "seed", b.cache.seed, "Seed for RANDOM replacement");
    flag(app, "workers", b.workers, "Concurrent query workers");
    flag(app, "repetitions", b.repetitions, "Passes over the query set");
    app->add_flag("--direct-io", b.direct_io, "Request O_DIRECT reads (bypass OS page cache)")
        ->envname("HCANN_DIRECT_IO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Paged graph index with a hybrid static/dynamic cache"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string out;
    app.add_option("--out", out, "Also write the report to this file")->envname("HCANN_OUT");

    pl::SynthCommand synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a Gaussian-blob dataset and query set");
    flag(synth_cmd, "n", synth.params.n, "Base vectors");
    flag(synth_cmd, "dim", synth.params.dim, "Dimensionality");
    flag(synth_cmd, "blobs", synth.params.blobs, "Blob count");
    flag(synth_cmd, "spread", synth.params.spread, "Per-component standard deviation");
    flag(synth_cmd, "center-range", synth.params.center_range, "Blob centers uniform in [-r, r]^dim");
    flag(synth_cmd, "num-queries", synth.params.queries, "Query vectors");
    flag(synth_cmd, "seed", synth.params.seed, "Generator seed");
    flag(synth_cmd, "base-out", synth.base_out, "Output .fvecs for base vectors")->required();
    flag(synth_cmd, "queries-out", synth.queries_out, "Output .fvecs for queries");

    pl::BuildCommand build;
    auto* build_cmd = app.add_subcommand("build", "Build graph + PQ artifacts from a .fvecs dataset");
    flag(build_cmd, "dataset", build.dataset, "Base vectors (.fvecs)")->required();
    flag(build_cmd, "index", build.out_dir, "Output index directory")->required();
    flag(build_cmd, "R", build.graph.max_degree, "Max out-degree");
    flag(build_cmd, "L-build", build.graph.build_list_size, "Construction list size");
    flag(build_cmd, "alpha", build.graph.alpha, "Pruning slack (>= 1)");
    flag(build_cmd, "seed", build.graph.seed, "Build seed");
    flag(build_cmd, "pq-m", build.pq_m, "PQ subspaces (0 = dim/8 rounded down to a divisor)");
    flag(build_cmd, "pq-c", build.pq_c, "Centroids per subspace (<= 256)");
    flag(build_cmd, "pq-iters", build.pq_iters, "Lloyd iterations for PQ training");

    pl::LayoutCommand layout;
    std::string layout_kind = "similarity";
    auto* layout_cmd = app.add_subcommand("layout", "Write the paged index file under a layout");
    flag(layout_cmd, "index", layout.index_dir, "Index directory")->required();
    flag(layout_cmd, "kind", layout_kind, "insertion|similarity");
    flag(layout_cmd, "k-clusters", layout.k_clusters, "Cluster count (0 = ceil(n / (4 * page_capacity)))");
    flag(layout_cmd, "page-size", layout.page_size, "Page size in bytes");
    flag(layout_cmd, "max-iters", layout.max_iters, "k-means iterations");
    flag(layout_cmd, "seed", layout.seed, "k-means seed");

    pl::GtCommand gt;
    auto* gt_cmd = app.add_subcommand("gt", "Brute-force ground truth to .ivecs");
    flag(gt_cmd, "dataset", gt.dataset, "Base vectors (.fvecs)")->required();
    flag(gt_cmd, "queries", gt.queries, "Query vectors (.fvecs)")->required();
    flag(gt_cmd, "k", gt.k, "Neighbors per query");
    flag(gt_cmd, "gt-out", gt.out, "Output .ivecs")->required();

    pl::CalibrateCommand cal;
    std::string cal_kind = "similarity";
    auto* cal_cmd = app.add_subcommand("calibrate", "Estimate theta from a query sample; writes theta.txt");
    flag(cal_cmd, "index", cal.index_dir, "Index directory")->required();
    flag(cal_cmd, "layout", cal_kind, "Layout to search: insertion|similarity");
    flag(cal_cmd, "queries", cal.queries, "Query vectors (.fvecs)")->required();
    flag(cal_cmd, "gt", cal.gt, "Ground truth (.ivecs); computed when omitted");
    flag(cal_cmd, "k", cal.k, "Results per query");
    flag(cal_cmd, "l", cal.l, "Candidate queue length");
    flag(cal_cmd, "beam-width", cal.beam_width, "Expansions per iteration");
    flag(cal_cmd, "fraction", cal.fraction, "Share of queries sampled");
    flag(cal_cmd, "seed", cal.seed, "Sampling seed");

    pl::BenchCommand bench;
    bench.workers = pl::default_workers();
    std::string bench_kind = "similarity";
    double bench_theta = 0.0;
    auto* bench_cmd = app.add_subcommand("bench", "Run a query workload and report QPS, recall, I/O and hit rates");
    bool bench_no_cache = false;
    add_search_flags(bench_cmd, bench, bench_kind, bench_theta, bench_no_cache);
    std::string policy = "LFU";
    flag(bench_cmd, "policy", policy, "Dynamic replacement: LFU|FIFO|RANDOM");
    std::string scope = "persist";
    flag(bench_cmd, "cache-scope", scope, "Dynamic cache lifetime: persist|per-query");

    pl::QueryCommand query;
    query.bench.workers = 1;
    query.bench.params.k = 10;
    query.bench.params.l = 100;
    std::string query_kind = "similarity";
    double query_theta = 0.0;
    std::string query_policy = "LFU";
    auto* query_cmd = app.add_subcommand("query", "Search queries one by one; optional per-iteration trace");
    bool query_no_cache = false;
    add_search_flags(query_cmd, query.bench, query_kind, query_theta, query_no_cache);
    flag(query_cmd, "policy", query_policy, "Dynamic replacement: LFU|FIFO|RANDOM");
    std::string query_scope = "persist";
    flag(query_cmd, "cache-scope", query_scope, "Dynamic cache lifetime: persist|per-query");
    flag(query_cmd, "trace-out", query.trace_out, "Trace file: iter,expanded_id,exact_dist,phase,hit_kind");
    flag(query_cmd, "result-out", query.result_out, "Result ids as .ivecs");

    std::string report_a, report_b;
    auto* compare_cmd = app.add_subcommand("compare", "Compare two bench reports (ratios are B / A)");
    compare_cmd->add_option("report_a", report_a, "Baseline report")->required();
    compare_cmd->add_option("report_b", report_b, "Candidate report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth_cmd) {
            emit(pl::cmd_synth(synth), out);
        } else if (*build_cmd) {
            emit(pl::cmd_build(build), out);
        } else if (*layout_cmd) {
            layout.kind = parse_layout_kind(layout_kind);
            emit(pl::cmd_layout(layout), out);
        } else if (*gt_cmd) {
            emit(pl::cmd_gt(gt), out);
        } else if (*cal_cmd) {
            cal.kind = parse_layout_kind(cal_kind);
            emit(pl::cmd_calibrate(cal), out);
        } else if (*bench_cmd) {
            bench.kind = parse_layout_kind(bench_kind);
            bench.cache.policy = parse_policy(policy);
            bench.cache.scope = parse_scope(scope);
            if (bench_cmd->count("--theta") > 0) bench.theta = bench_theta;
            bench.cache.enabled = !bench_no_cache;
            emit(pl::cmd_bench(bench), out);
        } else if (*query_cmd) {
            query.bench.kind = parse_layout_kind(query_kind);
            query.bench.cache.policy = parse_policy(query_policy);
            query.bench.cache.scope = parse_scope(query_scope);
            if (query_cmd->count("--theta") > 0) query.bench.theta = query_theta;
            query.bench.cache.enabled = !query_no_cache;
            emit(pl::cmd_query(query), out);
        } else if (*compare_cmd) {
            emit(pl::cmd_compare(Report::load(report_a), Report::load(report_b)), out);
        }
    } catch (const InvariantError& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
