#include <algorithm>

#include "doctest.h"
#include "hcann/error.hpp"
#include "hcann/graphbuild.hpp"
#include "hcann/random.hpp"
#include "support.hpp"

using namespace hcann;

TEST_CASE("build_graph: two nodes link to each other") {
    const VectorDataset ds(2, {0, 0, 1, 1});
    const auto g = build_graph(ds, BuildParams{4, 8, 1.2, 1});
    CHECK(g.adjacency[0] == std::vector<NodeId>{1});
    CHECK(g.adjacency[1] == std::vector<NodeId>{0});
}

TEST_CASE("build_graph: ten points, R=4") {
    Rng rng(2);
    std::vector<float> v(20);
    for (auto& x : v) x = static_cast<float>(rng.uniform());
    const VectorDataset ds(2, v);
    const auto g = build_graph(ds, BuildParams{4, 8, 1.2, 1});
    REQUIRE(g.size() == 10);
    for (NodeId p = 0; p < 10; ++p) {
        CHECK(g.adjacency[p].size() <= 4);
        for (NodeId nb : g.adjacency[p]) {
            CHECK(nb != p);
            CHECK(nb < 10);
        }
    }
    const auto reach = reachable_from_entry(g);
    CHECK(std::all_of(reach.begin(), reach.end(), [](bool b) { return b; }));
    CHECK(g.entry_id == medoid(ds));
    CHECK_NOTHROW(validate_graph(g));
}

TEST_CASE("build_graph: determinism and invariants on blob data") {
    SynthParams sp;
    sp.n = 600;
    sp.queries = 0;
    const auto data = synth_blobs(sp);
    const BuildParams bp{12, 24, 1.2, 5};
    const auto a = build_graph(data.base, bp);
    CHECK(a == build_graph(data.base, bp));
    CHECK_NOTHROW(validate_graph(a));
}

TEST_CASE("medoid") {
    CHECK(medoid(VectorDataset(1, {0, 1, 10})) == 1);
    CHECK(medoid(VectorDataset(3, {1, 2, 3})) == 0);
    CHECK(medoid(VectorDataset(2, {1, 1, -1, 1, -1, -1, 1, -1})) == 0);
}

TEST_CASE("validate_graph rejects broken graphs") {
    GraphIndex g{2, 0, {{1}, {0}, {}}};
    CHECK_THROWS_AS(validate_graph(g), InvariantError);  // node 2 unreachable
    g.adjacency[2] = {2};
    CHECK_THROWS_AS(validate_graph(g), InvariantError);  // self loop
    g.adjacency = {{1, 2, 1}, {0}, {0}};
    CHECK_THROWS_AS(validate_graph(g), InvariantError);  // degree > R, duplicates
}

TEST_CASE("graph file round trip") {
    hcann::testing::TempDir dir;
    const GraphIndex g{3, 1, {{1, 2}, {0}, {1, 0, 3}, {2}}};
    write_graph(dir.file("g.bin"), g);
    CHECK(read_graph(dir.file("g.bin")) == g);
}
