#include "hcann/layout.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "hcann/binary_io.hpp"
#include "hcann/error.hpp"

namespace hcann {

namespace {

constexpr char kLayoutMagic[4] = {'G', 'O', 'V', 'L'};
constexpr std::uint32_t kLayoutVersion = 1;

}  // namespace

std::string to_string(LayoutKind kind) {
    return kind == LayoutKind::kInsertion ? "insertion" : "similarity";
}

LayoutKind parse_layout_kind(const std::string& text) {
    if (text == "insertion") return LayoutKind::kInsertion;
    if (text == "similarity") return LayoutKind::kSimilarity;
    throw ArgumentError("unknown layout kind '" + text + "' (expected insertion|similarity)");
}

std::span<const NodeId> LayoutMap::page_nodes(std::uint64_t page_id) const {
    const std::size_t begin = page_id * page_capacity;
    if (begin >= node_order.size()) {
        throw ArgumentError("page " + std::to_string(page_id) + " out of range");
    }
    const std::size_t end = std::min<std::size_t>(begin + page_capacity, node_order.size());
    return {node_order.data() + begin, end - begin};
}

std::vector<NodeId> order_within_cluster(std::span<const NodeId> members, std::span<const float> centroid,
                                         const VectorDataset& dataset) {
    if (members.empty()) {
        throw ArgumentError("order_within_cluster: empty member list");
    }
    std::vector<std::pair<double, NodeId>> scored;
    scored.reserve(members.size());
    for (NodeId id : members) {
        scored.emplace_back(l2_distance(dataset.row(id), centroid), id);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<NodeId> out;
    out.reserve(scored.size());
    for (const auto& [d, id] : scored) out.push_back(id);
    return out;
}

std::vector<std::uint32_t> order_clusters(const VectorDataset& centroids, std::span<const float> anchor) {
    const std::size_t k = centroids.size();
    if (k == 0) {
        throw ArgumentError("order_clusters: no clusters");
    }
    auto nearest = [&](std::span<const float> from, const std::vector<bool>& used) {
        std::uint32_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t c = 0; c < k; ++c) {
            if (used[c]) continue;
            const double d = l2_distance(centroids.row(c), from);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        return best;
    };
    std::vector<bool> used(k, false);
    std::vector<std::uint32_t> seq;
    seq.reserve(k);
    std::uint32_t cur = nearest(anchor, used);
    while (true) {
        used[cur] = true;
        seq.push_back(cur);
        if (seq.size() == k) break;
        cur = nearest(centroids.row(cur), used);
    }
    return seq;
}

LayoutMap pack_pages(std::span<const std::uint32_t> cluster_sequence,
                     const std::vector<std::vector<NodeId>>& cluster_orders, const VectorDataset& centroids,
                     std::uint32_t page_capacity, LayoutKind kind) {
    if (page_capacity == 0) {
        throw ArgumentError("pack_pages: page_capacity must be >= 1");
    }
    if (cluster_orders.size() != cluster_sequence.size() || centroids.size() != cluster_orders.size()) {
        throw ArgumentError("pack_pages: sequence, orders and centroids disagree on cluster count");
    }
    LayoutMap map;
    map.kind = kind;
    map.page_capacity = page_capacity;
    map.dim = centroids.dim();
    std::size_t n = 0;
    for (const auto& o : cluster_orders) n += o.size();
    map.node_order.reserve(n);
    map.node_loc.assign(n, NodeLocation{});
    map.cluster_table.resize(cluster_orders.size());

    std::vector<bool> placed(n, false);
    for (std::uint32_t c : cluster_sequence) {
        if (c >= cluster_orders.size()) {
            throw ArgumentError("pack_pages: cluster id " + std::to_string(c) + " out of range");
        }
        const auto& members = cluster_orders[c];
        if (members.empty()) {
            throw ArgumentError("pack_pages: cluster " + std::to_string(c) + " is empty");
        }
        auto& ext = map.cluster_table[c];
        ext.first_rank = map.node_order.size();
        ext.size = members.size();
        ext.first_page = ext.first_rank / page_capacity;
        ext.page_count = (ext.first_rank + ext.size - 1) / page_capacity - ext.first_page + 1;
        auto cen = centroids.row(c);
        ext.centroid.assign(cen.begin(), cen.end());
        for (NodeId id : members) {
            if (id >= n || placed[id]) {
                throw ArgumentError("pack_pages: node " + std::to_string(id) + " missing or placed twice");
            }
            placed[id] = true;
            const std::uint64_t rank = map.node_order.size();
            map.node_loc[id] = NodeLocation{c, rank, rank / page_capacity,
                                            static_cast<std::uint16_t>(rank % page_capacity)};
            map.node_order.push_back(id);
        }
    }
    if (map.node_order.size() != n) {
        throw ArgumentError("pack_pages: cluster sequence does not cover every cluster");
    }
    return map;
}

LayoutMap insertion_layout(const VectorDataset& dataset, std::uint32_t page_capacity) {
    std::vector<std::vector<NodeId>> orders(1);
    orders[0].resize(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) orders[0][i] = static_cast<NodeId>(i);
    const VectorDataset centroid(dataset.dim(), dataset.mean());
    const std::uint32_t seq[] = {0};
    return pack_pages(seq, orders, centroid, page_capacity, LayoutKind::kInsertion);
}

std::uint32_t default_cluster_count(std::size_t n, std::uint32_t page_capacity) {
    const std::size_t per_cluster = 4 * static_cast<std::size_t>(page_capacity);
    return static_cast<std::uint32_t>(std::max<std::size_t>(1, (n + per_cluster - 1) / per_cluster));
}

LayoutMap similarity_layout(const VectorDataset& dataset, const SimilarityLayoutParams& params) {
    const std::uint32_t k =
        params.k_clusters == 0 ? default_cluster_count(dataset.size(), params.page_capacity) : params.k_clusters;
    const auto clusters = kmeans(dataset, k, params.max_iters, params.seed);
    const auto members = clusters.members();
    std::vector<std::vector<NodeId>> orders;
    orders.reserve(k);
    for (std::uint32_t c = 0; c < k; ++c) {
        orders.push_back(order_within_cluster(members[c], clusters.centroids.row(c), dataset));
    }
    const auto mean = dataset.mean();
    const auto seq = order_clusters(clusters.centroids, mean);
    return pack_pages(seq, orders, clusters.centroids, params.page_capacity, LayoutKind::kSimilarity);
}

ReadInterval compute_read_interval(NodeId target, std::uint64_t window_pages, const LayoutMap& layout) {
    if (target >= layout.node_loc.size()) {
        throw ArgumentError("compute_read_interval: node " + std::to_string(target) + " out of range");
    }
    if (window_pages == 0) {
        throw ArgumentError("compute_read_interval: window_pages must be >= 1");
    }
    const auto total = static_cast<std::int64_t>(layout.total_pages());
    const auto width = std::min<std::int64_t>(static_cast<std::int64_t>(window_pages), total);
    const auto& loc = layout.node_loc[target];
    const auto& cluster = layout.cluster_table[loc.cluster_id];
    const auto page = static_cast<std::int64_t>(loc.page_id);
    const auto first = static_cast<std::int64_t>(cluster.first_page);
    const auto last = static_cast<std::int64_t>(cluster.last_page());

    // Centered start; an even width puts the extra page after the target.
    std::int64_t start = page - (width - 1) / 2;
    // Large cluster: stay inside it. Small cluster: cover it and spill into
    // the neighbors on both sides. Either way the target page stays covered.
    const std::int64_t inside_hi = last - width + 1;
    start = std::clamp(start, std::min(first, inside_hi), std::max(first, inside_hi));
    start = std::clamp<std::int64_t>(start, 0, total - width);
    return ReadInterval{static_cast<std::uint64_t>(start), static_cast<std::uint64_t>(width)};
}

double mean_intra_page_distance(const LayoutMap& layout, const VectorDataset& dataset) {
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::uint64_t p = 0; p < layout.total_pages(); ++p) {
        const auto nodes = layout.page_nodes(p);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = i + 1; j < nodes.size(); ++j) {
                sum += l2_distance(dataset.row(nodes[i]), dataset.row(nodes[j]));
                ++pairs;
            }
        }
    }
    return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

void validate_layout(const LayoutMap& layout) {
    const std::size_t n = layout.node_order.size();
    if (layout.node_loc.size() != n) throw InvariantError("layout: node_loc size differs from node_order");
    std::vector<bool> seen(n, false);
    for (std::size_t rank = 0; rank < n; ++rank) {
        const NodeId id = layout.node_order[rank];
        if (id >= n || seen[id]) throw InvariantError("layout: node_order is not a permutation");
        seen[id] = true;
        const auto& loc = layout.node_loc[id];
        if (loc.rank != rank || loc.page_id != rank / layout.page_capacity ||
            loc.slot != rank % layout.page_capacity) {
            throw InvariantError("layout: node " + std::to_string(id) + " location disagrees with its rank");
        }
        if (loc.cluster_id >= layout.cluster_table.size()) throw InvariantError("layout: bad cluster id");
        const auto& ext = layout.cluster_table[loc.cluster_id];
        if (rank < ext.first_rank || rank >= ext.first_rank + ext.size) {
            throw InvariantError("layout: node " + std::to_string(id) + " outside its cluster interval");
        }
    }
    std::uint64_t covered = 0;
    for (const auto& ext : layout.cluster_table) {
        if (ext.size == 0) throw InvariantError("layout: empty cluster");
        covered += ext.size;
    }
    if (covered != n) throw InvariantError("layout: cluster intervals do not partition the order");
}

void write_layout(const std::string& path, const LayoutMap& layout) {
    std::vector<std::uint8_t> out(kLayoutMagic, kLayoutMagic + 4);
    binio::put<std::uint32_t>(out, kLayoutVersion);
    binio::put<std::uint64_t>(out, layout.node_order.size());
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(layout.cluster_table.size()));
    binio::put<std::uint32_t>(out, layout.page_capacity);
    binio::put<std::uint32_t>(out, layout.dim);
    binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(layout.kind));
    for (const auto& loc : layout.node_loc) {
        binio::put<std::uint32_t>(out, loc.cluster_id);
        binio::put<std::uint64_t>(out, loc.rank);
        binio::put<std::uint64_t>(out, loc.page_id);
        binio::put<std::uint16_t>(out, loc.slot);
    }
    for (const auto& ext : layout.cluster_table) {
        binio::put<std::uint64_t>(out, ext.first_page);
        binio::put<std::uint64_t>(out, ext.page_count);
        binio::put<std::uint64_t>(out, ext.first_rank);
        binio::put<std::uint64_t>(out, ext.size);
        for (float v : ext.centroid) binio::put<float>(out, v);
    }
    binio::write_file(path, out);
}

LayoutMap read_layout(const std::string& path) {
    const auto bytes = binio::read_file(path);
    binio::Cursor cur(bytes, path);
    auto magic = cur.take_bytes(4);
    if (std::memcmp(magic.data(), kLayoutMagic, 4) != 0) throw FormatError(path + ": bad layout magic");
    if (cur.take<std::uint32_t>() != kLayoutVersion) throw FormatError(path + ": unsupported layout version");
    LayoutMap map;
    const auto n = cur.take<std::uint64_t>();
    const auto k = cur.take<std::uint32_t>();
    map.page_capacity = cur.take<std::uint32_t>();
    map.dim = cur.take<std::uint32_t>();
    const auto kind = cur.take<std::uint32_t>();
    if (kind > 1 || map.page_capacity == 0) throw FormatError(path + ": bad layout header");
    map.kind = static_cast<LayoutKind>(kind);
    map.node_loc.resize(n);
    map.node_order.assign(n, 0);
    for (std::uint64_t id = 0; id < n; ++id) {
        auto& loc = map.node_loc[id];
        loc.cluster_id = cur.take<std::uint32_t>();
        loc.rank = cur.take<std::uint64_t>();
        loc.page_id = cur.take<std::uint64_t>();
        loc.slot = cur.take<std::uint16_t>();
        if (loc.rank >= n) throw FormatError(path + ": node rank out of range");
        map.node_order[loc.rank] = static_cast<NodeId>(id);
    }
    map.cluster_table.resize(k);
    for (auto& ext : map.cluster_table) {
        ext.first_page = cur.take<std::uint64_t>();
        ext.page_count = cur.take<std::uint64_t>();
        ext.first_rank = cur.take<std::uint64_t>();
        ext.size = cur.take<std::uint64_t>();
        ext.centroid.resize(map.dim);
        for (auto& v : ext.centroid) v = cur.take<float>();
    }
    try {
        validate_layout(map);
    } catch (const InvariantError& e) {
        throw FormatError(path + ": " + e.what());
    }
    return map;
}

}  // namespace hcann
