#include <algorithm>
#include <set>

#include "doctest.h"
#include "hcann/error.hpp"
#include "hcann/layout.hpp"
#include "support.hpp"

using namespace hcann;

namespace {

// One-node pages holding the given clusters in order; centroids are dummies.
LayoutMap unit_pages(const std::vector<std::vector<NodeId>>& clusters) {
    std::vector<std::uint32_t> seq(clusters.size());
    std::vector<float> c(clusters.size(), 0.0f);
    for (std::uint32_t i = 0; i < seq.size(); ++i) seq[i] = i;
    return pack_pages(seq, clusters, VectorDataset(1, c), 1);
}

std::vector<NodeId> interval_nodes(const LayoutMap& layout, const ReadInterval& r) {
    std::vector<NodeId> out;
    for (auto p = r.start_page; p < r.end_page(); ++p) {
        for (NodeId id : layout.page_nodes(p)) out.push_back(id);
    }
    return out;
}

}  // namespace

TEST_CASE("read interval: same-cluster window") {
    const auto layout = unit_pages({{0, 1, 3}, {2, 5, 9, 4}, {6, 7, 8}});
    const auto r = compute_read_interval(5, 4, layout);
    CHECK(r == ReadInterval{3, 4});
    CHECK(interval_nodes(layout, r) == std::vector<NodeId>{2, 5, 9, 4});
}

TEST_CASE("read interval: small cluster spills into its neighbor") {
    const auto layout = unit_pages({{0, 1, 3}, {6, 7, 4}, {5, 9}, {2, 8}});
    const auto r = compute_read_interval(5, 4, layout);
    CHECK(r == ReadInterval{5, 4});
    CHECK(interval_nodes(layout, r) == std::vector<NodeId>{4, 5, 9, 2});
}

TEST_CASE("read interval: clamped at the file start") {
    const auto layout = unit_pages({{5, 2, 9}, {0, 1, 3}, {6, 7, 4, 8}});
    const auto r = compute_read_interval(5, 4, layout);
    CHECK(r == ReadInterval{0, 4});
    CHECK(interval_nodes(layout, r) == std::vector<NodeId>{5, 2, 9, 0});
}

TEST_CASE("read interval: clamped at the file end and window larger than the file") {
    const auto layout = unit_pages({{0, 1, 3}, {6, 7, 4, 8}, {2, 5, 9}});
    CHECK(compute_read_interval(9, 4, layout) == ReadInterval{6, 4});
    CHECK(compute_read_interval(9, 50, layout) == ReadInterval{0, 10});
    CHECK(compute_read_interval(9, 1, layout) == ReadInterval{9, 1});
}

TEST_CASE("read interval: window always holds the target page") {
    SynthParams sp;
    sp.n = 300;
    sp.queries = 0;
    const auto data = synth_blobs(sp);
    const auto layout = similarity_layout(data.base, SimilarityLayoutParams{3, 0, 25, 1});
    for (std::uint64_t w = 1; w <= 6; ++w) {
        for (NodeId id = 0; id < 300; ++id) {
            const auto r = compute_read_interval(id, w, layout);
            CHECK(r.page_count == std::min<std::uint64_t>(w, layout.total_pages()));
            CHECK(r.contains(layout.node_loc[id].page_id));
            CHECK(r.end_page() <= layout.total_pages());
        }
    }
}

TEST_CASE("within-cluster order and packing of a cluster with a far member") {
    // v2, v5, v9 sit together; v4 is far from them.
    std::vector<float> pts(20, 0.0f);
    auto put = [&](NodeId v, float x, float y) { pts[2 * v] = x, pts[2 * v + 1] = y; };
    put(0, 0, 0), put(3, 0.5f, 0), put(6, 0, 0.5f);
    put(1, 5, 0), put(7, 5.5f, 0), put(8, 5, 0.5f);
    put(2, 10, 10), put(5, 10.5f, 10), put(9, 10, 10.5f), put(4, 13, 13);
    const VectorDataset ds(2, pts);

    const std::vector<std::vector<NodeId>> members{{0, 3, 6}, {1, 7, 8}, {2, 4, 5, 9}};
    std::vector<float> cent;
    std::vector<std::vector<NodeId>> orders;
    for (const auto& m : members) {
        float sx = 0, sy = 0;
        for (NodeId v : m) sx += ds.row(v)[0], sy += ds.row(v)[1];
        const std::vector<float> c{sx / m.size(), sy / m.size()};
        cent.insert(cent.end(), c.begin(), c.end());
        orders.push_back(order_within_cluster(m, c, ds));
    }
    CHECK(orders[2].back() == 4);

    const std::vector<std::uint32_t> seq{0, 1, 2};
    const auto layout = pack_pages(seq, orders, VectorDataset(2, cent), 3);
    validate_layout(layout);
    REQUIRE(layout.total_pages() == 4);
    const auto p2 = layout.page_nodes(2);
    CHECK(std::set<NodeId>(p2.begin(), p2.end()) == std::set<NodeId>{2, 5, 9});
    CHECK(std::vector<NodeId>(layout.page_nodes(3).begin(), layout.page_nodes(3).end()) == std::vector<NodeId>{4});
}

TEST_CASE("order_within_cluster ties and singletons") {
    const VectorDataset ds(1, {-1, 1, 2});
    const std::vector<float> zero{0};
    const std::vector<NodeId> two{1, 0};
    CHECK(order_within_cluster(two, zero, ds) == std::vector<NodeId>{0, 1});
    const std::vector<NodeId> one{2};
    CHECK(order_within_cluster(one, zero, ds) == std::vector<NodeId>{2});
}

TEST_CASE("order_clusters") {
    const std::vector<float> anchor{7};
    CHECK(order_clusters(VectorDataset(1, {0, 10, 11}), anchor) == std::vector<std::uint32_t>{1, 2, 0});
    CHECK(order_clusters(VectorDataset(1, {3}), anchor) == std::vector<std::uint32_t>{0});
    const std::vector<float> a2{0.5f, 0.5f};
    auto perm = order_clusters(VectorDataset(2, {0, 0, 9, 9, 1, 1, 4, 0, -3, 2}), a2);
    std::sort(perm.begin(), perm.end());
    CHECK(perm == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
}

TEST_CASE("pack_pages: occupancies") {
    std::vector<std::vector<NodeId>> one{{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
    const std::vector<std::uint32_t> seq{0};
    const auto layout = pack_pages(seq, one, VectorDataset(1, {0}), 3);
    REQUIRE(layout.total_pages() == 4);
    CHECK(layout.page_nodes(0).size() == 3);
    CHECK(layout.page_nodes(3).size() == 1);
    for (NodeId v = 0; v < 10; ++v) CHECK(layout.node_order[layout.node_loc[v].rank] == v);
}

TEST_CASE("insertion and similarity layouts") {
    SynthParams sp;
    sp.n = 500;
    sp.queries = 0;
    const auto data = synth_blobs(sp);
    const auto ins = insertion_layout(data.base, 6);
    for (NodeId v = 0; v < 500; ++v) CHECK(ins.node_order[v] == v);
    CHECK(ins.cluster_table.size() == 1);

    const auto sim = similarity_layout(data.base, SimilarityLayoutParams{6, 0, 25, 3});
    validate_layout(sim);
    CHECK(sim.cluster_table.size() == default_cluster_count(500, 6));
    CHECK(default_cluster_count(500, 6) == 21);
    CHECK(mean_intra_page_distance(sim, data.base) < mean_intra_page_distance(ins, data.base));
    CHECK(sim == similarity_layout(data.base, SimilarityLayoutParams{6, 0, 25, 3}));

    const auto single = similarity_layout(data.base, SimilarityLayoutParams{6, 1, 25, 3});
    CHECK(single.cluster_table.size() == 1);
}

TEST_CASE("layout sidecar round trip and validation") {
    hcann::testing::TempDir dir;
    SynthParams sp;
    sp.n = 120;
    sp.queries = 0;
    const auto data = synth_blobs(sp);
    const auto sim = similarity_layout(data.base, SimilarityLayoutParams{4, 0, 25, 3});
    write_layout(dir.file("l.bin"), sim);
    CHECK(read_layout(dir.file("l.bin")) == sim);

    auto broken = sim;
    std::swap(broken.node_order[0], broken.node_order[1]);
    CHECK_THROWS_AS(validate_layout(broken), InvariantError);
}
