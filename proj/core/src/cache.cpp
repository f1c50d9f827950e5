#include "hcann/cache.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "hcann/error.hpp"

namespace hcann {

std::string to_string(ReplacementPolicy policy) {
    switch (policy) {
        case ReplacementPolicy::kLfu:
            return "LFU";
        case ReplacementPolicy::kFifo:
            return "FIFO";
        case ReplacementPolicy::kRandom:
            return "RANDOM";
    }
    return "?";
}

ReplacementPolicy parse_policy(const std::string& text) {
    std::string up = text;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (up == "LFU") return ReplacementPolicy::kLfu;
    if (up == "FIFO") return ReplacementPolicy::kFifo;
    if (up == "RANDOM") return ReplacementPolicy::kRandom;
    throw ArgumentError("unknown replacement policy '" + text + "' (expected LFU|FIFO|RANDOM)");
}

std::string to_string(CacheScope scope) {
    return scope == CacheScope::kPerQuery ? "per-query" : "persist";
}

CacheScope parse_scope(const std::string& text) {
    if (text == "persist") return CacheScope::kPersist;
    if (text == "per-query") return CacheScope::kPerQuery;
    throw ArgumentError("unknown cache scope '" + text + "' (expected persist|per-query)");
}

const char* to_string(HitKind kind) {
    switch (kind) {
        case HitKind::kStatic:
            return "static";
        case HitKind::kDynamic:
            return "dynamic";
        case HitKind::kMiss:
            return "miss";
    }
    return "?";
}

std::size_t CacheConfig::static_capacity_nodes() const {
    if (!(static_fraction >= 0.0 && static_fraction <= 1.0)) {
        throw ArgumentError("static_fraction must be in [0, 1]");
    }
    return static_cast<std::size_t>(std::llround(static_fraction * static_cast<double>(total_budget_nodes)));
}

std::size_t CacheConfig::dynamic_capacity_pages(std::uint32_t page_capacity) const {
    const std::size_t s = std::min(static_capacity_nodes(), total_budget_nodes);
    return page_capacity == 0 ? 0 : (total_budget_nodes - s) / page_capacity;
}

void HitStats::record(int phase_number, HitKind kind) {
    auto& p = phase[phase_number == 2 ? 1 : 0];
    switch (kind) {
        case HitKind::kStatic:
            ++p.static_hits;
            break;
        case HitKind::kDynamic:
            ++p.dynamic_hits;
            break;
        case HitKind::kMiss:
            ++p.misses;
            break;
    }
}

HitStats& HitStats::operator+=(const HitStats& o) {
    for (int i = 0; i < 2; ++i) {
        phase[i].static_hits += o.phase[i].static_hits;
        phase[i].dynamic_hits += o.phase[i].dynamic_hits;
        phase[i].misses += o.phase[i].misses;
    }
    return *this;
}

std::vector<NodeId> StaticCache::ids() const {
    std::vector<NodeId> out;
    out.reserve(nodes_.size());
    for (const auto& [id, rec] : nodes_) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

StaticCache preload_static(const DiskIndex& store, const LayoutMap& layout, std::size_t capacity_nodes) {
    std::unordered_map<NodeId, NodeRecord> nodes;
    if (capacity_nodes == 0) return StaticCache(std::move(nodes));

    std::unordered_map<std::uint64_t, DiskPage> pages;
    auto fetch = [&](NodeId id) -> const NodeRecord& {
        const auto page_id = layout.node_loc.at(id).page_id;
        auto it = pages.find(page_id);
        if (it == pages.end()) it = pages.emplace(page_id, store.read_page(page_id)).first;
        const NodeRecord* rec = it->second.find(id);
        if (rec == nullptr) {
            throw CorruptionError("preload_static: node " + std::to_string(id) + " missing from page " +
                                  std::to_string(page_id));
        }
        return *rec;
    };

    std::vector<NodeId> hop{static_cast<NodeId>(store.header().entry_id)};
    std::unordered_map<NodeId, bool> seen{{hop[0], true}};
    while (!hop.empty() && nodes.size() < capacity_nodes) {
        std::sort(hop.begin(), hop.end());
        const std::size_t room = capacity_nodes - nodes.size();
        if (hop.size() > room) hop.resize(room);
        std::vector<NodeId> next;
        for (NodeId id : hop) {
            const NodeRecord& rec = fetch(id);
            nodes.emplace(id, rec);
            for (NodeId nb : rec.neighbors) {
                if (seen.emplace(nb, true).second) next.push_back(nb);
            }
        }
        hop = std::move(next);
    }
    return StaticCache(std::move(nodes));
}

DynamicCache::DynamicCache(std::size_t capacity_pages, ReplacementPolicy policy, std::uint64_t seed)
    : capacity_(capacity_pages), policy_(policy), rng_(seed) {}

std::optional<std::uint64_t> DynamicCache::access_count(std::uint64_t page_id) const {
    auto it = entries_.find(page_id);
    if (it == entries_.end()) return std::nullopt;
    return it->second.count;
}

std::shared_ptr<const DiskPage> DynamicCache::lookup(std::uint64_t page_id) {
    auto it = entries_.find(page_id);
    if (it == entries_.end()) return nullptr;
    auto& e = it->second;
    by_count_.erase({e.count, e.seq, page_id});
    ++e.count;
    by_count_.insert({e.count, e.seq, page_id});
    return e.page;
}

std::uint64_t DynamicCache::evict_candidate() {
    if (entries_.empty()) {
        throw StateError("evict_candidate: dynamic cache is empty");
    }
    switch (policy_) {
        case ReplacementPolicy::kLfu:
            return std::get<2>(*by_count_.begin());
        case ReplacementPolicy::kFifo:
            return by_seq_.begin()->second;
        case ReplacementPolicy::kRandom: {
            auto it = by_seq_.begin();
            std::advance(it, static_cast<std::ptrdiff_t>(rng_.below(by_seq_.size())));
            return it->second;
        }
    }
    throw StateError("evict_candidate: unknown policy");
}

void DynamicCache::erase(std::uint64_t page_id) {
    auto it = entries_.find(page_id);
    by_count_.erase({it->second.count, it->second.seq, page_id});
    by_seq_.erase(it->second.seq);
    entries_.erase(it);
}

std::vector<std::uint64_t> DynamicCache::admit(std::vector<std::shared_ptr<const DiskPage>> pages) {
    std::vector<std::uint64_t> evicted;
    if (capacity_ == 0) return evicted;
    for (auto& page : pages) {
        const auto id = page->page_id;
        if (auto it = entries_.find(id); it != entries_.end()) {
            auto& e = it->second;
            by_count_.erase({e.count, e.seq, id});
            ++e.count;
            by_count_.insert({e.count, e.seq, id});
            continue;
        }
        while (entries_.size() >= capacity_) {
            const auto victim = evict_candidate();
            erase(victim);
            evicted.push_back(victim);
        }
        const auto seq = next_seq_++;
        entries_.emplace(id, Entry{std::move(page), 0, seq});
        by_seq_.emplace(seq, id);
        by_count_.insert({0, seq, id});
    }
    return evicted;
}

std::vector<std::uint64_t> DynamicCache::resident() const {
    std::vector<std::uint64_t> out;
    out.reserve(by_seq_.size());
    for (const auto& [seq, id] : by_seq_) out.push_back(id);
    return out;
}

void DynamicCache::clear() {
    entries_.clear();
    by_seq_.clear();
    by_count_.clear();
}

HybridCache::HybridCache(const CacheConfig& config, const LayoutMap& layout, StaticCache static_cache)
    : config_(config),
      layout_(layout),
      static_(std::move(static_cache)),
      dynamic_capacity_(config.dynamic_capacity_pages(layout.page_capacity)),
      dynamic_(dynamic_capacity_, config.policy, config.seed) {
    if (static_.size() > config_.static_capacity_nodes()) {
        throw ArgumentError("HybridCache: static cache holds more nodes than its capacity");
    }
}

CacheLookup HybridCache::lookup(NodeId id, int phase, DynamicCache* local) {
    const int slot = phase == 2 ? 1 : 0;
    CacheLookup out;
    if (const NodeRecord* rec = static_.find(id)) {
        out.kind = HitKind::kStatic;
        out.node.record = rec;
    } else if (dynamic_capacity_ > 0) {
        const auto& loc = layout_.node_loc.at(id);
        std::shared_ptr<const DiskPage> page;
        if (local != nullptr) {
            page = local->lookup(loc.page_id);
        } else {
            std::lock_guard lock(mutex_);
            page = dynamic_.lookup(loc.page_id);
        }
        if (page) {
            const NodeRecord* rec =
                loc.slot < page->nodes.size() && page->nodes[loc.slot].id == id ? &page->nodes[loc.slot] : page->find(id);
            if (rec == nullptr) {
                throw CorruptionError("cached page " + std::to_string(loc.page_id) + " lacks node " + std::to_string(id));
            }
            out.kind = HitKind::kDynamic;
            out.node.page = std::move(page);
            out.node.record = rec;
        }
    }
    counters_[slot][static_cast<int>(out.kind)].fetch_add(1, std::memory_order_relaxed);
    return out;
}

std::vector<std::uint64_t> HybridCache::admit_pages(std::vector<DiskPage> pages, DynamicCache* local) {
    if (dynamic_capacity_ == 0) return {};
    std::vector<std::shared_ptr<const DiskPage>> shared;
    shared.reserve(pages.size());
    for (auto& p : pages) shared.push_back(std::make_shared<const DiskPage>(std::move(p)));
    if (local != nullptr) return local->admit(std::move(shared));
    std::lock_guard lock(mutex_);
    return dynamic_.admit(std::move(shared));
}

std::unique_ptr<DynamicCache> HybridCache::make_query_cache() const {
    if (config_.scope != CacheScope::kPerQuery || dynamic_capacity_ == 0) return nullptr;
    return std::make_unique<DynamicCache>(dynamic_capacity_, config_.policy, config_.seed);
}

bool HybridCache::dynamic_contains(std::uint64_t page_id) const {
    std::lock_guard lock(mutex_);
    return dynamic_.contains(page_id);
}

std::size_t HybridCache::dynamic_size() const {
    std::lock_guard lock(mutex_);
    return dynamic_.size();
}

HitStats HybridCache::stats() const {
    HitStats s;
    for (int i = 0; i < 2; ++i) {
        s.phase[i].static_hits = counters_[i][0].load();
        s.phase[i].dynamic_hits = counters_[i][1].load();
        s.phase[i].misses = counters_[i][2].load();
    }
    return s;
}

void HybridCache::reset_stats() {
    for (auto& row : counters_) {
        for (auto& c : row) c = 0;
    }
}

void HybridCache::reset_dynamic() {
    std::lock_guard lock(mutex_);
    dynamic_.clear();
}

}  // namespace hcann
