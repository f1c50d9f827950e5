#include <algorithm>
#include <map>

#include "doctest.h"
#include "hcann/cache.hpp"
#include "hcann/error.hpp"
#include "hcann/random.hpp"
#include "support.hpp"

using namespace hcann;
using hcann::testing::TempDir;

namespace {

std::vector<std::shared_ptr<const DiskPage>> pages(std::initializer_list<std::uint64_t> ids) {
    std::vector<std::shared_ptr<const DiskPage>> out;
    for (auto id : ids) out.push_back(std::make_shared<const DiskPage>(DiskPage{id, {}}));
    return out;
}

constexpr std::uint64_t A = 10, B = 11, C = 12;

// Reference model: a resident list with explicit counts and admission order.
struct ModelCache {
    struct E {
        std::uint64_t page, count, seq;
    };
    std::size_t cap;
    ReplacementPolicy policy;
    std::vector<E> items;
    std::uint64_t next = 0;

    bool lookup(std::uint64_t p) {
        for (auto& e : items) {
            if (e.page == p) return ++e.count, true;
        }
        return false;
    }
    void admit(std::uint64_t p) {
        if (cap == 0) return;
        if (lookup(p)) return;
        if (items.size() >= cap) {
            auto victim = std::min_element(items.begin(), items.end(), [&](const E& a, const E& b) {
                if (policy == ReplacementPolicy::kFifo) return a.seq < b.seq;
                return a.count < b.count || (a.count == b.count && a.seq < b.seq);
            });
            items.erase(victim);
        }
        items.push_back({p, 0, next++});
    }
    std::vector<std::uint64_t> resident() const {
        std::vector<std::uint64_t> out;
        for (const auto& e : items) out.push_back(e.page);
        return out;
    }
};

}  // namespace

TEST_CASE("policy parsing and config arithmetic") {
    CHECK(parse_policy("lfu") == ReplacementPolicy::kLfu);
    CHECK(parse_policy("FIFO") == ReplacementPolicy::kFifo);
    CHECK(parse_policy("Random") == ReplacementPolicy::kRandom);
    CHECK_THROWS_AS(parse_policy("lru"), ArgumentError);
    CHECK(parse_scope("per-query") == CacheScope::kPerQuery);
    CHECK_THROWS_AS(parse_scope("global"), ArgumentError);

    CacheConfig cfg{103, 0.2, ReplacementPolicy::kLfu, CacheScope::kPersist, 0};
    CHECK(cfg.static_capacity_nodes() == 21);
    CHECK(cfg.dynamic_capacity_pages(12) == 6);
    cfg.static_fraction = 1.0;
    CHECK(cfg.dynamic_capacity_pages(12) == 0);
    cfg.static_fraction = 1.5;
    CHECK_THROWS_AS((void)cfg.static_capacity_nodes(), ArgumentError);
}

TEST_CASE("FIFO: oldest out, re-admission keeps position") {
    DynamicCache c(2, ReplacementPolicy::kFifo, 0);
    CHECK(c.admit(pages({A, B, C})) == std::vector<std::uint64_t>{A});
    CHECK(c.resident() == std::vector<std::uint64_t>{B, C});

    DynamicCache d(2, ReplacementPolicy::kFifo, 0);
    d.admit(pages({A, B}));
    d.admit(pages({A}));
    CHECK(d.evict_candidate() == A);
    CHECK(d.admit(pages({C})) == std::vector<std::uint64_t>{A});
}

TEST_CASE("LFU: minimum count, ties by age") {
    DynamicCache c(2, ReplacementPolicy::kLfu, 0);
    c.admit(pages({A, B}));
    for (int i = 0; i < 3; ++i) CHECK(c.lookup(A) != nullptr);
    CHECK(c.access_count(A) == 3u);
    CHECK(c.admit(pages({C})) == std::vector<std::uint64_t>{B});

    DynamicCache d(3, ReplacementPolicy::kLfu, 0);
    d.admit(pages({A, B, C}));
    d.lookup(A), d.lookup(A), d.lookup(B), d.lookup(C);
    CHECK(d.evict_candidate() == B);
}

TEST_CASE("RANDOM: seeded eviction is reproducible") {
    std::vector<std::uint64_t> first;
    for (int run = 0; run < 2; ++run) {
        DynamicCache c(2, ReplacementPolicy::kRandom, 1234);
        std::vector<std::uint64_t> ev;
        for (std::uint64_t p = 0; p < 50; ++p) {
            for (auto e : c.admit(pages({p}))) ev.push_back(e);
        }
        if (run == 0) first = ev;
        CHECK(ev == first);
        CHECK(c.size() == 2);
    }
}

TEST_CASE("edge capacities") {
    for (auto pol : {ReplacementPolicy::kLfu, ReplacementPolicy::kFifo, ReplacementPolicy::kRandom}) {
        DynamicCache one(4, pol, 1);
        CHECK_THROWS_AS((void)one.evict_candidate(), StateError);
        one.admit(pages({A}));
        CHECK(one.evict_candidate() == A);

        DynamicCache zero(0, pol, 1);
        CHECK(zero.admit(pages({A, B})).empty());
        CHECK(zero.size() == 0);
        CHECK(zero.lookup(A) == nullptr);
    }
}

TEST_CASE("property: 1000 random traces against a reference model") {
    Rng rng(77);
    for (int trace = 0; trace < 1000; ++trace) {
        const auto cap = static_cast<std::size_t>(rng.below(6));
        const auto pol = static_cast<ReplacementPolicy>(rng.below(3));
        DynamicCache cache(cap, pol, static_cast<std::uint64_t>(trace));
        ModelCache model{cap, pol, {}, 0};
        const auto steps = 20 + rng.below(60);
        for (std::uint64_t s = 0; s < steps; ++s) {
            const auto page = rng.below(10);
            if (rng.below(2) == 0) {
                const bool hit = cache.lookup(page) != nullptr;
                if (pol != ReplacementPolicy::kRandom) CHECK(hit == model.lookup(page));
            } else {
                cache.admit(pages({page}));
                if (pol != ReplacementPolicy::kRandom) model.admit(page);
            }
            REQUIRE(cache.size() <= cap);
            if (pol == ReplacementPolicy::kRandom) continue;
            REQUIRE(cache.resident() == model.resident());
            if (pol == ReplacementPolicy::kLfu && cache.size() > 0) {
                const auto victim = cache.evict_candidate();
                for (auto p : cache.resident()) CHECK(*cache.access_count(victim) <= *cache.access_count(p));
            }
        }
    }
}

namespace {

struct StarIndex {
    TempDir dir{"star"};
    VectorDataset ds{1, {0, 1, 2, 3, 4, 5}};
    GraphIndex graph{5, 0, {{5, 3, 1, 4, 2}, {0}, {0}, {0}, {0}, {0}}};
    LayoutMap layout;
    std::unique_ptr<DiskIndex> store;

    explicit StarIndex(std::uint32_t page_size = 4096) {
        layout = insertion_layout(ds, max_page_capacity(1, 5, page_size));
        write_index(dir.file("star.bin"), ds, graph, layout, page_size);
        store = std::make_unique<DiskIndex>(dir.file("star.bin"));
    }
};

}  // namespace

TEST_CASE("preload_static: BFS with lowest-id truncation") {
    StarIndex s;
    CHECK(preload_static(*s.store, s.layout, 0).size() == 0);
    CHECK(preload_static(*s.store, s.layout, 1).ids() == std::vector<NodeId>{0});
    CHECK(preload_static(*s.store, s.layout, 4).ids() == std::vector<NodeId>{0, 1, 2, 3});
    CHECK(preload_static(*s.store, s.layout, 100).size() == 6);
    const auto st = preload_static(*s.store, s.layout, 2);
    CHECK(st.find(1)->neighbors == std::vector<NodeId>{0});
}

TEST_CASE("HybridCache: static, dynamic, evicted") {
    // slot = 8 + 4 + 2 + 40 = 54 bytes; a 64-byte page holds one node.
    StarIndex s(64);
    REQUIRE(s.layout.page_capacity == 1);
    const CacheConfig cfg{3, 1.0 / 3.0, ReplacementPolicy::kFifo, CacheScope::kPersist, 0};
    HybridCache cache(cfg, s.layout, preload_static(*s.store, s.layout, cfg.static_capacity_nodes()));
    REQUIRE(cache.dynamic_capacity_pages() == 2);

    CHECK(cache.lookup(0, 1).kind == HitKind::kStatic);
    CHECK(cache.lookup(4, 2).kind == HitKind::kMiss);
    cache.admit_pages({s.store->read_page(4)});
    const auto hit = cache.lookup(4, 2);
    CHECK(hit.kind == HitKind::kDynamic);
    CHECK(hit.node.record->id == 4);
    cache.admit_pages({s.store->read_page(2), s.store->read_page(3)});
    CHECK(cache.lookup(4, 2).kind == HitKind::kMiss);
    CHECK(hit.node.record->id == 4);  // the handle outlives eviction

    const auto st = cache.stats();
    CHECK(st.phase[0].static_hits == 1);
    CHECK(st.phase[1].dynamic_hits == 1);
    CHECK(st.phase[1].misses == 2);
    cache.reset_stats();
    CHECK(cache.stats() == HitStats{});
    cache.reset_dynamic();
    CHECK(cache.dynamic_size() == 0);
}

TEST_CASE("HybridCache: per-query scope keeps the shared side empty") {
    StarIndex s(64);
    const CacheConfig cfg{3, 0.0, ReplacementPolicy::kLfu, CacheScope::kPerQuery, 0};
    HybridCache cache(cfg, s.layout, StaticCache{});
    auto local = cache.make_query_cache();
    REQUIRE(local != nullptr);
    CHECK(local->capacity() == 3);
    cache.admit_pages({s.store->read_page(1)}, local.get());
    CHECK(cache.lookup(1, 2, local.get()).kind == HitKind::kDynamic);
    CHECK(cache.lookup(1, 2).kind == HitKind::kMiss);
    CHECK(cache.dynamic_size() == 0);

    const CacheConfig persist{3, 0.0, ReplacementPolicy::kLfu, CacheScope::kPersist, 0};
    CHECK(HybridCache(persist, s.layout, StaticCache{}).make_query_cache() == nullptr);
}
