#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sys/wait.h>

#include "doctest.h"
#include "hcann/error.hpp"
#include "hcann/pipeline.hpp"
#include "support.hpp"

using namespace hcann;
namespace pl = hcann::pipeline;
namespace fs = std::filesystem;
using hcann::testing::TempDir;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Smoke {
    TempDir dir{"pipe"};
    std::string base = dir.file("base.fvecs");
    std::string queries = dir.file("q.fvecs");
    std::string gt = dir.file("gt.ivecs");
    std::string index = dir.file("index");

    Smoke() {
        pl::SynthCommand sc;
        sc.params.n = 500;
        sc.params.queries = 40;
        sc.params.seed = 9;
        sc.base_out = base;
        sc.queries_out = queries;
        pl::cmd_synth(sc);
        build(index);
        for (auto kind : {LayoutKind::kInsertion, LayoutKind::kSimilarity}) {
            pl::LayoutCommand lc;
            lc.index_dir = index;
            lc.kind = kind;
            lc.seed = 2;
            pl::cmd_layout(lc);
        }
        pl::GtCommand g;
        g.dataset = base;
        g.queries = queries;
        g.k = 10;
        g.out = gt;
        pl::cmd_gt(g);
    }
    void build(const std::string& out) const {
        pl::BuildCommand bc;
        bc.dataset = base;
        bc.out_dir = out;
        bc.graph = BuildParams{16, 32, 1.2, 4};
        bc.pq_m = 8;
        bc.pq_c = 64;
        pl::cmd_build(bc);
    }
    pl::BenchCommand bench(LayoutKind kind) const {
        pl::BenchCommand b;
        b.index_dir = index;
        b.kind = kind;
        b.queries = queries;
        b.gt = gt;
        b.params = SearchParams{10, 60, 4, 0.5, 2};
        b.cache.budget_nodes = 100;
        return b;
    }
};

std::multiset<std::string> slot_multiset(const std::string& path) {
    const DiskIndex idx(path);
    std::multiset<std::string> out;
    for (std::uint64_t p = 0; p < idx.header().total_pages; ++p) {
        for (const auto& rec : idx.read_page(p).nodes) {
            std::string s(reinterpret_cast<const char*>(rec.vector.data()), rec.vector.size() * 4);
            s += std::to_string(rec.id);
            for (auto nb : rec.neighbors) s += "," + std::to_string(nb);
            out.insert(s);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("pipeline: build, layout and gt") {
    const Smoke sm;
    const auto graph = read_graph(pl::graph_path(sm.index));
    CHECK_NOTHROW(validate_graph(graph));
    PQCodebook book;
    PQCodes codes;
    read_pq(pl::pq_path(sm.index), book, codes);
    CHECK(codes.size() == 500);

    TempDir again;
    sm.build(again.file("index"));
    for (const char* f : {"graph.bin", "pq.bin", "build.txt", "base.fvecs"}) {
        CHECK(slurp(sm.index + "/" + f) == slurp(again.file("index") + "/" + f));
    }

    const auto ins = read_layout(pl::layout_path(sm.index, LayoutKind::kInsertion));
    for (NodeId v = 0; v < 500; ++v) CHECK(ins.node_order[v] == v);
    CHECK(slot_multiset(pl::index_path(sm.index, LayoutKind::kInsertion)) ==
          slot_multiset(pl::index_path(sm.index, LayoutKind::kSimilarity)));
    const auto base = load_fvecs(sm.base);
    const auto sim = read_layout(pl::layout_path(sm.index, LayoutKind::kSimilarity));
    CHECK(mean_intra_page_distance(sim, base) < mean_intra_page_distance(ins, base));

    const auto q = load_fvecs(sm.queries);
    const auto rows = load_ivecs(sm.gt);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(rows[i][0] == static_cast<int>(ground_truth_topk(base, q.row(i), 1)[0]));

    pl::GtCommand self;
    self.dataset = sm.base;
    self.queries = sm.base;
    self.k = 1;
    self.out = sm.dir.file("self.ivecs");
    pl::cmd_gt(self);
    const auto own = load_ivecs(self.out);
    for (int i = 0; i < 500; ++i) CHECK(own[i][0] == i);

    self.k = 501;
    CHECK_THROWS_AS(pl::cmd_gt(self), ArgumentError);
}

TEST_CASE("pipeline: calibrate and bench") {
    const Smoke sm;
    pl::CalibrateCommand cc;
    cc.index_dir = sm.index;
    cc.queries = sm.queries;
    cc.gt = sm.gt;
    cc.fraction = 1.0;
    const auto r1 = pl::cmd_calibrate(cc);
    const auto theta = pl::stored_theta(sm.index);
    REQUIRE(theta.has_value());
    CHECK(*theta > 0.0);
    CHECK(*theta < 1.0);
    CHECK(pl::cmd_calibrate(cc) == r1);

    auto b = sm.bench(LayoutKind::kSimilarity);
    const auto with = pl::run_bench(b);
    CHECK(with.report.get("search.theta_source") == "sidecar");
    CHECK(with.report.get_double("search.theta") == doctest::Approx(*theta));

    b.cache.budget_nodes = 0;
    const auto zero = pl::run_bench(b);
    CHECK(zero.report.get_double("metrics.phase1.hit_rate") == 0.0);
    CHECK(zero.report.get_double("metrics.phase2.hit_rate") == 0.0);
    for (std::size_t i = 0; i < with.workload.outcomes.size(); ++i) {
        CHECK(zero.workload.outcomes[i].ids == with.workload.outcomes[i].ids);
    }

    std::vector<double> io;
    b.cache.budget_nodes = 100;
    for (double frac : {0.0, 0.2, 1.0}) {
        b.cache.static_fraction = frac;
        const auto r = pl::cmd_bench(b);
        CHECK(r.get_double("metrics.recall") == with.report.get_double("metrics.recall"));
        io.push_back(r.get_double("metrics.mean_io_ops"));
    }
    CHECK((io[0] != io[1] || io[1] != io[2]));

    const auto a_rep = pl::cmd_bench(sm.bench(LayoutKind::kInsertion));
    const auto b_rep = pl::cmd_bench(sm.bench(LayoutKind::kSimilarity));
    const auto cmp = pl::cmd_compare(a_rep, b_rep);
    CHECK(cmp.get_double("compare.io_ops_ratio") ==
          doctest::Approx(b_rep.get_double("metrics.mean_io_ops") / a_rep.get_double("metrics.mean_io_ops")));
}

TEST_CASE("report text round trip") {
    Report r;
    r.set("a", 1);
    r.set("b", 0.25);
    r.set("timing.qps", 3.0);
    r.set("c", std::string("x y"));
    CHECK(Report::parse(r.to_text()) == r);
    CHECK_FALSE(r.without_timing().get("timing.qps").has_value());
    CHECK(r.get("b") == "0.250000");
}

#ifdef HCANN_CLI_PATH
namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HCANN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli exit codes") {
    TempDir dir;
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("build --dataset " + dir.file("missing.fvecs") + " --index " + dir.file("x")) == 2);
    CHECK(run_cli("bench --bogus") == 2);
    {
        std::ofstream(dir.file("junk.fvecs")) << "abc";
    }
    CHECK(run_cli("build --dataset " + dir.file("junk.fvecs") + " --index " + dir.file("x")) == 3);
    CHECK(run_cli("synth --n 300 --num-queries 5 --base-out " + dir.file("b.fvecs") + " --queries-out " +
                  dir.file("q.fvecs")) == 0);
}
#endif
