#include "hcann/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <thread>

#include "hcann/error.hpp"
#include "hcann/vecdata.hpp"

namespace hcann::pipeline {

namespace fs = std::filesystem;

std::string base_path(const std::string& dir) { return (fs::path(dir) / "base.fvecs").string(); }
std::string graph_path(const std::string& dir) { return (fs::path(dir) / "graph.bin").string(); }
std::string pq_path(const std::string& dir) { return (fs::path(dir) / "pq.bin").string(); }
std::string build_info_path(const std::string& dir) { return (fs::path(dir) / "build.txt").string(); }
std::string index_path(const std::string& dir, LayoutKind kind) {
    return (fs::path(dir) / ("index." + to_string(kind) + ".bin")).string();
}
std::string layout_path(const std::string& dir, LayoutKind kind) {
    return (fs::path(dir) / ("layout." + to_string(kind) + ".bin")).string();
}
std::string theta_path(const std::string& dir) { return (fs::path(dir) / "theta.txt").string(); }

std::uint32_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return std::clamp<std::uint32_t>(hw == 0 ? 1 : hw, 1, 32);
}

namespace {

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw ArgumentError("no such file: " + path);
}

std::vector<GroundTruth> load_truth(const std::string& path, std::size_t expected_rows) {
    const auto rows = load_ivecs(path);
    if (rows.size() != expected_rows) {
        throw FormatError(path + ": " + std::to_string(rows.size()) + " ground-truth rows for " +
                          std::to_string(expected_rows) + " queries");
    }
    std::vector<GroundTruth> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        GroundTruth g;
        for (auto v : row) {
            if (v < 0) throw FormatError(path + ": negative id in ground truth");
            g.push_back(static_cast<NodeId>(v));
        }
        out.push_back(std::move(g));
    }
    return out;
}

void echo_search(Report& r, const SearchParams& p) {
    r.set("search.k", p.k);
    r.set("search.l", p.l);
    r.set("search.beam_width", p.beam_width);
    r.set("search.theta", p.theta);
    r.set("search.window_pages", p.window_pages);
}

}  // namespace

Report cmd_synth(const SynthCommand& cmd) {
    const auto data = synth_blobs(cmd.params);
    write_fvecs(cmd.base_out, data.base);
    if (!cmd.queries_out.empty() && !data.queries.empty()) write_fvecs(cmd.queries_out, data.queries);
    Report r;
    r.set("command", "synth");
    r.set("synth.n", cmd.params.n);
    r.set("synth.dim", cmd.params.dim);
    r.set("synth.blobs", cmd.params.blobs);
    r.set("synth.spread", cmd.params.spread);
    r.set("synth.center_range", cmd.params.center_range);
    r.set("synth.queries", cmd.params.queries);
    r.set("synth.seed", cmd.params.seed);
    r.set("output.base", cmd.base_out);
    r.set("output.queries", cmd.queries_out.empty() ? std::string("none") : cmd.queries_out);
    return r;
}

Report cmd_build(const BuildCommand& cmd) {
    require_file(cmd.dataset);
    const auto data = load_fvecs(cmd.dataset);
    fs::create_directories(cmd.out_dir);

    const auto graph = build_graph(data, cmd.graph);
    validate_graph(graph);

    PQTrainParams pq;
    pq.m = cmd.pq_m == 0 ? default_pq_subspaces(data.dim()) : cmd.pq_m;
    pq.c = std::min<std::uint32_t>(cmd.pq_c, static_cast<std::uint32_t>(std::min<std::size_t>(data.size(), 256)));
    pq.iterations = cmd.pq_iters;
    pq.seed = cmd.graph.seed;
    const auto codebook = pq_train(data, pq);
    const auto codes = pq_encode_all(data, codebook);

    write_fvecs(base_path(cmd.out_dir), data);
    write_graph(graph_path(cmd.out_dir), graph);
    write_pq(pq_path(cmd.out_dir), codebook, codes);

    Report r;
    r.set("command", "build");
    r.set("dataset", cmd.dataset);
    r.set("data.n", data.size());
    r.set("data.dim", data.dim());
    r.set("build.R", cmd.graph.max_degree);
    r.set("build.L", cmd.graph.build_list_size);
    r.set("build.alpha", cmd.graph.alpha);
    r.set("build.seed", cmd.graph.seed);
    r.set("pq.m", pq.m);
    r.set("pq.c", pq.c);
    r.set("pq.iterations", pq.iterations);
    r.set("graph.entry_id", graph.entry_id);
    std::size_t edges = 0;
    for (const auto& adj : graph.adjacency) edges += adj.size();
    r.set("graph.mean_degree", static_cast<double>(edges) / static_cast<double>(graph.size()));
    r.save(build_info_path(cmd.out_dir));
    return r;
}

Report cmd_layout(const LayoutCommand& cmd) {
    require_file(base_path(cmd.index_dir));
    require_file(graph_path(cmd.index_dir));
    const auto data = load_fvecs(base_path(cmd.index_dir));
    const auto graph = read_graph(graph_path(cmd.index_dir));
    if (graph.size() != data.size()) throw FormatError("graph and base vectors disagree on node count");

    const auto capacity = max_page_capacity(data.dim(), graph.max_degree, cmd.page_size);
    if (capacity == 0) {
        throw ConfigError("page_size " + std::to_string(cmd.page_size) + " cannot hold one slot of " +
                          std::to_string(slot_size(data.dim(), graph.max_degree)) + " bytes; need page_size >= " +
                          std::to_string(kPageHeaderBytes + slot_size(data.dim(), graph.max_degree)));
    }
    LayoutMap layout;
    std::uint32_t clusters = 1;
    if (cmd.kind == LayoutKind::kInsertion) {
        layout = insertion_layout(data, capacity);
    } else {
        SimilarityLayoutParams p;
        p.page_capacity = capacity;
        p.k_clusters = cmd.k_clusters;
        p.max_iters = cmd.max_iters;
        p.seed = cmd.seed;
        layout = similarity_layout(data, p);
        clusters = static_cast<std::uint32_t>(layout.cluster_table.size());
    }
    validate_layout(layout);
    write_index(index_path(cmd.index_dir, cmd.kind), data, graph, layout, cmd.page_size);
    write_layout(layout_path(cmd.index_dir, cmd.kind), layout);

    Report r;
    r.set("command", "layout");
    r.set("index_dir", cmd.index_dir);
    r.set("layout.kind", to_string(cmd.kind));
    r.set("layout.k_clusters", clusters);
    r.set("layout.page_size", cmd.page_size);
    r.set("layout.page_capacity", capacity);
    r.set("layout.total_pages", layout.total_pages());
    r.set("layout.max_iters", cmd.max_iters);
    r.set("layout.seed", cmd.seed);
    r.set("layout.mean_intra_page_distance", mean_intra_page_distance(layout, data));
    return r;
}

Report cmd_gt(const GtCommand& cmd) {
    require_file(cmd.dataset);
    require_file(cmd.queries);
    const auto data = load_fvecs(cmd.dataset);
    const auto queries = load_fvecs(cmd.queries);
    if (queries.dim() != data.dim()) throw DimensionError("queries and dataset differ in dimension");
    const auto truth = ground_truth_batch(data, queries, cmd.k);
    std::vector<std::vector<std::int32_t>> rows;
    rows.reserve(truth.size());
    for (const auto& g : truth) rows.emplace_back(g.begin(), g.end());
    write_ivecs(cmd.out, rows);
    Report r;
    r.set("command", "gt");
    r.set("dataset", cmd.dataset);
    r.set("queries", cmd.queries);
    r.set("gt.k", cmd.k);
    r.set("gt.rows", rows.size());
    r.set("output", cmd.out);
    return r;
}

IndexBundle IndexBundle::open(const std::string& dir, LayoutKind kind, bool try_direct_io) {
    require_file(index_path(dir, kind));
    require_file(layout_path(dir, kind));
    require_file(pq_path(dir));
    IndexBundle b;
    b.dir = dir;
    b.kind = kind;
    b.layout = read_layout(layout_path(dir, kind));
    read_pq(pq_path(dir), b.codebook, b.codes);
    b.store = std::make_unique<DiskIndex>(index_path(dir, kind), try_direct_io);
    const auto& h = b.store->header();
    if (h.layout_kind != kind || b.layout.kind != kind) throw FormatError(dir + ": layout kind mismatch");
    if (b.layout.size() != h.n || b.codes.size() != h.n || b.layout.page_capacity != h.page_capacity ||
        b.layout.dim != h.dim) {
        throw FormatError(dir + ": index artifacts are inconsistent with each other");
    }
    return b;
}

Report cmd_calibrate(const CalibrateCommand& cmd) {
    require_file(cmd.queries);
    auto bundle = IndexBundle::open(cmd.index_dir, cmd.kind);
    const auto queries = load_fvecs(cmd.queries);
    std::vector<GroundTruth> truth;
    if (cmd.gt.empty()) {
        const auto base = load_fvecs(base_path(cmd.index_dir));
        truth = ground_truth_batch(base, queries, 1);
    } else {
        truth = load_truth(cmd.gt, queries.size());
    }
    Searcher searcher(*bundle.store, bundle.layout, bundle.codebook, bundle.codes, nullptr);
    SearchParams base;
    base.beam_width = cmd.beam_width;
    const auto cal = calibrate_theta(searcher, queries, truth, cmd.fraction, cmd.k, cmd.l, cmd.seed, base);

    Report r;
    r.set("command", "calibrate");
    r.set("index_dir", cmd.index_dir);
    r.set("layout.kind", to_string(cmd.kind));
    r.set("calibrate.k", cmd.k);
    r.set("calibrate.l", cmd.l);
    r.set("calibrate.beam_width", cmd.beam_width);
    r.set("calibrate.fraction", cmd.fraction);
    r.set("calibrate.seed", cmd.seed);
    r.set("calibrate.sampled", cal.sampled.size());
    r.set("calibrate.ratios", cal.ratios.size());
    r.set("calibrate.fallback", cal.fallback);
    r.set("theta", cal.theta);
    r.save(theta_path(cmd.index_dir));
    return r;
}

std::optional<double> stored_theta(const std::string& index_dir) {
    const auto path = theta_path(index_dir);
    if (!fs::exists(path)) return std::nullopt;
    return Report::load(path).get_double("theta");
}

std::size_t default_cache_budget(const IndexFileHeader& header) {
    const double file_bytes = static_cast<double>((header.total_pages + 1) * header.page_size);
    return static_cast<std::size_t>(0.01 * file_bytes / static_cast<double>(slot_size(header.dim, header.max_degree)));
}

namespace {

struct PreparedRun {
    IndexBundle bundle;
    std::unique_ptr<HybridCache> cache;
    CacheConfig cache_config;
    SearchParams params;
    std::string theta_source;
};

PreparedRun prepare(const BenchCommand& cmd) {
    PreparedRun run{IndexBundle::open(cmd.index_dir, cmd.kind, cmd.direct_io), nullptr, {}, cmd.params, "default"};
    if (cmd.theta) {
        run.params.theta = *cmd.theta;
        run.theta_source = "flag";
    } else if (auto t = stored_theta(cmd.index_dir)) {
        run.params.theta = *t;
        run.theta_source = "sidecar";
    }
    run.params.validate();
    if (cmd.cache.enabled) {
        auto& cfg = run.cache_config;
        cfg.total_budget_nodes = cmd.cache.budget_nodes < 0 ? default_cache_budget(run.bundle.store->header())
                                                            : static_cast<std::size_t>(cmd.cache.budget_nodes);
        cfg.static_fraction = cmd.cache.static_fraction;
        cfg.policy = cmd.cache.policy;
        cfg.scope = cmd.cache.scope;
        cfg.seed = cmd.cache.seed;
        auto st = preload_static(*run.bundle.store, run.bundle.layout, cfg.static_capacity_nodes());
        run.cache = std::make_unique<HybridCache>(cfg, run.bundle.layout, std::move(st));
    }
    run.bundle.store->reset_stats();
    return run;
}

void echo_bench(Report& r, const BenchCommand& cmd, const PreparedRun& run) {
    r.set("index_dir", cmd.index_dir);
    r.set("queries", cmd.queries);
    r.set("gt", cmd.gt.empty() ? std::string("none") : cmd.gt);
    r.set("layout.kind", to_string(cmd.kind));
    const auto& h = run.bundle.store->header();
    r.set("index.n", h.n);
    r.set("index.dim", h.dim);
    r.set("index.R", h.max_degree);
    r.set("index.page_size", h.page_size);
    r.set("index.page_capacity", h.page_capacity);
    r.set("index.total_pages", h.total_pages);
    r.set("index.k_clusters", run.bundle.layout.cluster_table.size());
    echo_search(r, run.params);
    r.set("search.theta_source", run.theta_source);
    r.set("cache.enabled", cmd.cache.enabled);
    if (run.cache) {
        r.set("cache.budget_nodes", run.cache_config.total_budget_nodes);
        r.set("cache.static_fraction", run.cache_config.static_fraction);
        r.set("cache.static_capacity_nodes", run.cache_config.static_capacity_nodes());
        r.set("cache.static_loaded_nodes", run.cache->static_cache().size());
        r.set("cache.dynamic_capacity_pages", run.cache->dynamic_capacity_pages());
        r.set("cache.policy", to_string(run.cache_config.policy));
        r.set("cache.scope", to_string(run.cache_config.scope));
        r.set("cache.seed", run.cache_config.seed);
    }
    r.set("run.workers", cmd.workers);
    r.set("run.repetitions", cmd.repetitions);
    r.set("env.direct_io_requested", cmd.direct_io);
    r.set("env.direct_io_active", run.bundle.store->direct_io_active());
}

void emit_metrics(Report& r, const WorkloadReport& w) {
    r.set("metrics.queries", w.query_count);
    r.set("metrics.executed", w.executed);
    r.set("metrics.recall", w.mean_recall);
    r.set("metrics.mean_io_ops", w.mean_io_ops);
    r.set("metrics.mean_pages_read", w.mean_pages_read);
    r.set("metrics.mean_iterations", w.mean_iterations);
    for (int p = 0; p < 2; ++p) {
        const std::string pre = "metrics.phase" + std::to_string(p + 1) + ".";
        const auto& h = w.hits.phase[p];
        r.set(pre + "lookups", h.lookups());
        r.set(pre + "static_hits", h.static_hits);
        r.set(pre + "dynamic_hits", h.dynamic_hits);
        r.set(pre + "misses", h.misses);
        r.set(pre + "hit_rate", h.hit_rate());
    }
    r.set("metrics.mean_transition_theta", w.mean_transition_theta);
    r.set("metrics.mean_transition_panns", w.mean_transition_panns);
    r.set("metrics.mean_transition_truth", w.mean_transition_truth);
    r.set("timing.wall_seconds", w.wall_seconds);
    r.set("timing.qps", w.qps);
    r.set("timing.mean_latency_us", w.mean_latency_us);
    r.set("timing.p50_latency_us", w.p50_latency_us);
    r.set("timing.p90_latency_us", w.p90_latency_us);
    r.set("timing.p99_latency_us", w.p99_latency_us);
}

}  // namespace

BenchOutcome run_bench(const BenchCommand& cmd) {
    require_file(cmd.queries);
    auto run = prepare(cmd);
    const auto queries = load_fvecs(cmd.queries);
    std::vector<GroundTruth> truth;
    if (!cmd.gt.empty()) truth = load_truth(cmd.gt, queries.size());

    Searcher searcher(*run.bundle.store, run.bundle.layout, run.bundle.codebook, run.bundle.codes, run.cache.get());
    WorkloadOptions wo;
    wo.workers = cmd.workers;
    wo.repetitions = cmd.repetitions;
    BenchOutcome out;
    out.workload = run_workload(searcher, queries, run.params, cmd.gt.empty() ? nullptr : &truth, wo);

    Report& r = out.report;
    r.set("command", "bench");
    echo_bench(r, cmd, run);
    emit_metrics(r, out.workload);
    return out;
}

Report cmd_query(const QueryCommand& cmd) {
    require_file(cmd.bench.queries);
    auto run = prepare(cmd.bench);
    const auto queries = load_fvecs(cmd.bench.queries);
    std::vector<GroundTruth> truth;
    if (!cmd.bench.gt.empty()) truth = load_truth(cmd.bench.gt, queries.size());
    Searcher searcher(*run.bundle.store, run.bundle.layout, run.bundle.codebook, run.bundle.codes, run.cache.get());

    std::ofstream trace;
    if (!cmd.trace_out.empty()) {
        trace.open(cmd.trace_out, std::ios::trunc);
        if (!trace) throw ArgumentError("cannot write trace: " + cmd.trace_out);
    }
    Report r;
    r.set("command", "query");
    echo_bench(r, cmd.bench, run);
    std::vector<std::vector<std::int32_t>> rows;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        SearchOptions so;
        so.keep_trace = trace.is_open();
        if (!truth.empty()) so.true_nearest = truth[i][0];
        const auto res = searcher.search(queries.row(i), run.params, so);
        std::string ids;
        for (std::size_t j = 0; j < res.ids.size(); ++j) {
            if (j) ids += ',';
            ids += std::to_string(res.ids[j]);
        }
        const std::string pre = "query." + std::to_string(i) + ".";
        r.set(pre + "ids", ids);
        r.set(pre + "io_ops", res.stats.io.io_ops);
        r.set(pre + "iterations", res.stats.iterations);
        if (!truth.empty() && res.ids.size() == run.params.k) {
            r.set(pre + "recall", recall_at_k(res.ids, std::span<const NodeId>(truth[i]).first(run.params.k)));
        }
        if (trace.is_open()) {
            trace << "# query=" << i << '\n';
            for (const auto& t : res.stats.trace) {
                trace << t.iter << ',' << t.expanded_id << ',' << format_double(t.exact_dist) << ',' << t.phase << ','
                      << to_string(t.hit_kind) << '\n';
            }
        }
        rows.emplace_back(res.ids.begin(), res.ids.end());
    }
    if (!cmd.result_out.empty()) write_ivecs(cmd.result_out, rows);
    return r;
}

Report cmd_compare(const Report& a, const Report& b) {
    Report r;
    r.set("command", "compare");
    for (const char* key : {"layout.kind", "cache.static_fraction", "cache.policy", "cache.scope", "cache.budget_nodes"}) {
        r.set(std::string("a.") + key, a.get(key).value_or("none"));
        r.set(std::string("b.") + key, b.get(key).value_or("none"));
    }
    auto ratio = [](double num, double den) { return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : num / den; };
    for (const char* key : {"metrics.recall", "metrics.mean_io_ops", "metrics.mean_pages_read",
                            "metrics.phase1.hit_rate", "metrics.phase2.hit_rate", "metrics.mean_transition_theta",
                            "timing.qps", "timing.mean_latency_us"}) {
        const auto va = a.get(key), vb = b.get(key);
        r.set(std::string("a.") + key, va.value_or("unavailable"));
        r.set(std::string("b.") + key, vb.value_or("unavailable"));
    }
    const double io_a = a.get_double("metrics.mean_io_ops"), io_b = b.get_double("metrics.mean_io_ops");
    r.set("compare.io_ops_ratio", ratio(io_b, io_a));
    r.set("compare.io_ops_reduction", io_a == 0.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0 - io_b / io_a);
    r.set("compare.pages_read_ratio",
          ratio(b.get_double("metrics.mean_pages_read"), a.get_double("metrics.mean_pages_read")));
    if (a.get("timing.qps") && b.get("timing.qps")) {
        r.set("timing.qps_ratio", ratio(b.get_double("timing.qps"), a.get_double("timing.qps")));
    }
    return r;
}

}  // namespace hcann::pipeline
