#include "hcann/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "hcann/error.hpp"

namespace hcann {

void SearchParams::validate() const {
    if (k == 0) throw ArgumentError("search: k must be >= 1");
    if (l < k) throw ArgumentError("search: l=" + std::to_string(l) + " must be >= k=" + std::to_string(k));
    if (beam_width == 0) throw ArgumentError("search: beam_width must be >= 1");
    if (!(theta > 0.0 && theta <= 1.0)) throw ArgumentError("search: theta must be in (0, 1]");
    if (window_pages == 0) throw ArgumentError("search: window_pages must be >= 1");
}

bool detect_transition(std::span<const Candidate> queue, std::size_t k, double theta) {
    const auto need = static_cast<std::size_t>(std::ceil(theta * static_cast<double>(k) - 1e-9));
    if (need == 0 || queue.size() < need) return false;
    return std::all_of(queue.begin(), queue.begin() + static_cast<std::ptrdiff_t>(need),
                       [](const Candidate& c) { return c.visited; });
}

Searcher::Searcher(const DiskIndex& store, const LayoutMap& layout, const PQCodebook& codebook, const PQCodes& codes,
                   HybridCache* cache)
    : store_(store), layout_(layout), codebook_(codebook), codes_(codes), cache_(cache) {
    const auto& h = store_.header();
    if (layout_.size() != h.n || codes_.size() != h.n) {
        throw ArgumentError("Searcher: index, layout and PQ codes disagree on node count");
    }
    if (layout_.page_capacity != h.page_capacity) {
        throw ArgumentError("Searcher: layout page capacity differs from the index file");
    }
    if (codebook_.dim != h.dim) {
        throw DimensionError("Searcher: codebook dim differs from index dim");
    }
}

SearchResult Searcher::search(std::span<const float> query, const SearchParams& params,
                              const SearchOptions& options) const {
    params.validate();
    const auto& h = store_.header();
    if (query.size() != h.dim) {
        throw DimensionError("search: query has " + std::to_string(query.size()) + " components, index dim is " +
                             std::to_string(h.dim));
    }
    const auto started = std::chrono::steady_clock::now();
    const DistanceTable table(query, codebook_);

    SearchResult result;
    SearchStats& st = result.stats;
    st.d_min = std::numeric_limits<double>::quiet_NaN();
    st.d_max = std::numeric_limits<double>::quiet_NaN();

    std::vector<Candidate> queue;
    std::unordered_set<NodeId> seen;
    std::vector<std::pair<double, NodeId>> expanded;
    const auto entry = static_cast<NodeId>(h.entry_id);
    queue.push_back(Candidate{entry, table.distance(codes_.code(entry)), false, std::nullopt});
    seen.insert(entry);

    const std::size_t dyn_pages = cache_ != nullptr ? cache_->dynamic_capacity_pages() : 0;
    const auto query_cache = cache_ != nullptr ? cache_->make_query_cache() : nullptr;
    const std::uint64_t window = std::min<std::uint64_t>(params.window_pages, std::max<std::size_t>(dyn_pages, 1));
    int phase = 1;
    std::vector<std::size_t> beam;
    std::vector<std::uint64_t> admitted_this_iter;

    while (true) {
        beam.clear();
        for (std::size_t i = 0; i < queue.size() && beam.size() < params.beam_width; ++i) {
            if (!queue[i].visited) beam.push_back(i);
        }
        if (beam.empty()) break;
        const std::uint32_t iter = ++st.iterations;
        admitted_this_iter.clear();
        double iter_min = std::numeric_limits<double>::infinity();
        std::vector<Candidate> discovered;

        for (std::size_t qi : beam) {
            Candidate& cand = queue[qi];
            const NodeId id = cand.id;
            NodeRecord fetched;
            const NodeRecord* rec = nullptr;
            NodeHandle handle;
            HitKind kind = HitKind::kMiss;

            if (cache_ != nullptr) {
                auto hit = cache_->lookup(id, phase, query_cache.get());
                kind = hit.kind;
                handle = std::move(hit.node);
                rec = handle.record;
            }
            st.hits.record(phase, kind);

            if (rec == nullptr) {
                const auto& loc = layout_.node_loc[id];
                if (phase == 2 && dyn_pages > 0) {
                    auto interval = compute_read_interval(id, window, layout_);
                    auto admitted = [&](std::uint64_t p) {
                        return std::find(admitted_this_iter.begin(), admitted_this_iter.end(), p) !=
                               admitted_this_iter.end();
                    };
                    while (interval.page_count > 1 && interval.start_page != loc.page_id &&
                           admitted(interval.start_page)) {
                        ++interval.start_page;
                        --interval.page_count;
                    }
                    while (interval.page_count > 1 && interval.end_page() - 1 != loc.page_id &&
                           admitted(interval.end_page() - 1)) {
                        --interval.page_count;
                    }
                    auto pages = store_.read_page_range(interval);
                    st.io += IoStats{1, interval.page_count, interval.page_count * h.page_size};
                    const auto& target_page = pages[loc.page_id - interval.start_page];
                    const NodeRecord* found = target_page.find(id);
                    if (found == nullptr) throw CorruptionError("search: node missing from its page");
                    fetched = *found;
                    for (const auto& p : pages) admitted_this_iter.push_back(p.page_id);
                    cache_->admit_pages(std::move(pages), query_cache.get());
                } else {
                    auto page = store_.read_page(loc.page_id);
                    st.io += IoStats{1, 1, h.page_size};
                    const NodeRecord* found = page.find(id);
                    if (found == nullptr) throw CorruptionError("search: node missing from its page");
                    fetched = *found;
                }
                rec = &fetched;
            }

            const double exact = l2_distance(query, rec->vector);
            cand.visited = true;
            cand.exact_dist = exact;
            expanded.emplace_back(exact, id);
            ++st.expansions;
            iter_min = std::min(iter_min, exact);
            if (phase == 2) {
                st.d_min = std::isnan(st.d_min) ? exact : std::min(st.d_min, exact);
                st.d_max = std::isnan(st.d_max) ? exact : std::max(st.d_max, exact);
            }
            if (options.true_nearest && *options.true_nearest == id && !st.transition_iter_truth) {
                st.transition_iter_truth = iter;
            }
            if (options.keep_trace) {
                st.trace.push_back(TraceRecord{iter, id, exact, phase, kind});
            }
            for (NodeId nb : rec->neighbors) {
                if (seen.insert(nb).second) {
                    discovered.push_back(Candidate{nb, table.distance(codes_.code(nb)), false, std::nullopt});
                }
            }
        }

        queue.insert(queue.end(), discovered.begin(), discovered.end());
        std::sort(queue.begin(), queue.end());
        if (queue.size() > params.l) queue.resize(params.l);
        st.distance_trace.push_back(iter_min);

        if (!st.transition_iter_panns && detect_transition(queue, params.k, 1.0)) {
            st.transition_iter_panns = iter;
        }
        if (phase == 1 && detect_transition(queue, params.k, params.theta)) {
            phase = 2;
            st.transition_iter_theta = iter;
        }
    }

    std::sort(expanded.begin(), expanded.end());
    const std::size_t take = std::min<std::size_t>(params.k, expanded.size());
    result.ids.reserve(take);
    result.distances.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        result.distances.push_back(expanded[i].first);
        result.ids.push_back(expanded[i].second);
    }
    st.latency_us =
        std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - started).count();
    return result;
}

}  // namespace hcann
