#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>
#include <string>
#include <unordered_map>
#include <vector>

#include "hcann/diskstore.hpp"
#include "hcann/layout.hpp"
#include "hcann/random.hpp"

namespace hcann {

enum class ReplacementPolicy : std::uint32_t { kLfu = 0, kFifo = 1, kRandom = 2 };

std::string to_string(ReplacementPolicy policy);
ReplacementPolicy parse_policy(const std::string& text);

/// kPersist shares one dynamic cache across queries; kPerQuery gives every
/// search a private, initially empty one of the same capacity.
enum class CacheScope : std::uint32_t { kPersist = 0, kPerQuery = 1 };

std::string to_string(CacheScope scope);
CacheScope parse_scope(const std::string& text);

struct CacheConfig {
    std::size_t total_budget_nodes = 0;
    double static_fraction = 0.2;
    ReplacementPolicy policy = ReplacementPolicy::kLfu;
    CacheScope scope = CacheScope::kPersist;
    std::uint64_t seed = 0;

    std::size_t static_capacity_nodes() const;
    /// Whole pages that fit in the non-static share of the budget.
    std::size_t dynamic_capacity_pages(std::uint32_t page_capacity) const;
};

enum class HitKind : std::uint8_t { kStatic, kDynamic, kMiss };

const char* to_string(HitKind kind);

struct PhaseHits {
    std::uint64_t static_hits = 0;
    std::uint64_t dynamic_hits = 0;
    std::uint64_t misses = 0;

    std::uint64_t lookups() const { return static_hits + dynamic_hits + misses; }
    double hit_rate() const {
        const auto total = lookups();
        return total == 0 ? 0.0 : static_cast<double>(static_hits + dynamic_hits) / static_cast<double>(total);
    }
    bool operator==(const PhaseHits&) const = default;
};

/// Lookup outcomes split by search phase (index 0 = phase 1, 1 = phase 2).
struct HitStats {
    PhaseHits phase[2];

    void record(int phase_number, HitKind kind);
    HitStats& operator+=(const HitStats& o);
    bool operator==(const HitStats&) const = default;
};

/// A node record borrowed from the cache. Holding the handle keeps a dynamic
/// page alive after eviction.
struct NodeHandle {
    std::shared_ptr<const DiskPage> page;
    const NodeRecord* record = nullptr;
};

/// Node records preloaded hop by hop from the entry node; frozen afterwards.
class StaticCache {
  public:
    StaticCache() = default;
    explicit StaticCache(std::unordered_map<NodeId, NodeRecord> nodes) : nodes_(std::move(nodes)) {}

    const NodeRecord* find(NodeId id) const {
        auto it = nodes_.find(id);
        return it == nodes_.end() ? nullptr : &it->second;
    }
    std::size_t size() const { return nodes_.size(); }
    std::vector<NodeId> ids() const;

  private:
    std::unordered_map<NodeId, NodeRecord> nodes_;
};

/// BFS from the index entry node, admitting whole hops while they fit and
/// the lowest ids of the hop that does not. Records come from `store`.
StaticCache preload_static(const DiskIndex& store, const LayoutMap& layout, std::size_t capacity_nodes);

/// Page store with FIFO / LFU / seeded-random replacement. Not synchronized;
/// HybridCache serializes access.
class DynamicCache {
  public:
    DynamicCache(std::size_t capacity_pages, ReplacementPolicy policy, std::uint64_t seed);

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(std::uint64_t page_id) const { return entries_.contains(page_id); }
    std::optional<std::uint64_t> access_count(std::uint64_t page_id) const;
    ReplacementPolicy policy() const { return policy_; }

    /// Resident page or null. A hit bumps the page's LFU count.
    std::shared_ptr<const DiskPage> lookup(std::uint64_t page_id);

    /// Admits each page in order, evicting first when full. A resident page
    /// gets +1 on its count and keeps its FIFO position. With zero capacity
    /// nothing is retained. Returns evicted ids in eviction order.
    std::vector<std::uint64_t> admit(std::vector<std::shared_ptr<const DiskPage>> pages);

    /// Page the policy would evict next. Throws StateError when empty.
    std::uint64_t evict_candidate();

    /// Resident page ids, oldest admission first.
    std::vector<std::uint64_t> resident() const;

    void clear();

  private:
    struct Entry {
        std::shared_ptr<const DiskPage> page;
        std::uint64_t count = 0;
        std::uint64_t seq = 0;
    };
    using LfuKey = std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>;  // count, seq, page

    void erase(std::uint64_t page_id);

    std::size_t capacity_;
    ReplacementPolicy policy_;
    Rng rng_;
    std::uint64_t next_seq_ = 0;
    std::unordered_map<std::uint64_t, Entry> entries_;
    std::map<std::uint64_t, std::uint64_t> by_seq_;  // seq -> page
    std::set<LfuKey> by_count_;
};

struct CacheLookup {
    HitKind kind = HitKind::kMiss;
    NodeHandle node;
};

/// Static node cache checked first, then the dynamic page cache. Safe to
/// share between query workers: the dynamic side is guarded by a mutex and
/// the counters are atomic.
class HybridCache {
  public:
    HybridCache(const CacheConfig& config, const LayoutMap& layout, StaticCache static_cache);

    /// `local` replaces the shared dynamic cache when non-null.
    CacheLookup lookup(NodeId id, int phase, DynamicCache* local = nullptr);
    std::vector<std::uint64_t> admit_pages(std::vector<DiskPage> pages, DynamicCache* local = nullptr);

    /// Fresh private dynamic cache in per-query scope, null otherwise.
    std::unique_ptr<DynamicCache> make_query_cache() const;

    bool dynamic_enabled() const { return dynamic_capacity_ > 0; }
    std::size_t dynamic_capacity_pages() const { return dynamic_capacity_; }
    const StaticCache& static_cache() const { return static_; }
    const CacheConfig& config() const { return config_; }
    bool dynamic_contains(std::uint64_t page_id) const;
    std::size_t dynamic_size() const;

    HitStats stats() const;
    void reset_stats();
    /// Drops every dynamic page; the static side is untouched.
    void reset_dynamic();

  private:
    CacheConfig config_;
    const LayoutMap& layout_;
    StaticCache static_;
    std::size_t dynamic_capacity_;
    mutable std::mutex mutex_;
    DynamicCache dynamic_;
    std::atomic<std::uint64_t> counters_[2][3] = {};
};

}  // namespace hcann
