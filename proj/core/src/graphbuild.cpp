#include "hcann/graphbuild.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <limits>
#include <numeric>

#include "hcann/binary_io.hpp"
#include "hcann/error.hpp"
#include "hcann/random.hpp"

namespace hcann {

namespace {

constexpr char kGraphMagic[4] = {'G', 'O', 'V', 'G'};
constexpr std::uint32_t kGraphVersion = 1;
constexpr std::size_t kExactMedoidLimit = 10'000;
constexpr std::size_t kMedoidAnchors = 1'000;

struct Scored {
    double dist;
    NodeId id;
    bool operator<(const Scored& o) const { return dist < o.dist || (dist == o.dist && id < o.id); }
};

class VamanaBuilder {
  public:
    VamanaBuilder(const VectorDataset& data, const BuildParams& params)
        : data_(data), params_(params), n_(data.size()), stamp_(n_, 0), adjacency_(n_) {}

    GraphIndex run() {
        Rng rng(params_.seed);
        entry_ = medoid(data_, params_.seed);
        random_init(rng);

        std::vector<NodeId> order(n_);
        std::iota(order.begin(), order.end(), NodeId{0});
        rng.shuffle(order.begin(), order.end());
        pass(order, 1.0);
        pass(order, params_.alpha);
        repair_connectivity();

        GraphIndex g;
        g.max_degree = params_.max_degree;
        g.entry_id = entry_;
        g.adjacency = std::move(adjacency_);
        return g;
    }

  private:
    double dist(NodeId a, NodeId b) const {
        return std::sqrt(l2_squared_unchecked(data_.row(a).data(), data_.row(b).data(), data_.dim()));
    }

    void random_init(Rng& rng) {
        const std::size_t degree = std::min<std::size_t>(params_.max_degree, n_ - 1);
        std::vector<NodeId> others;
        for (std::size_t p = 0; p < n_; ++p) {
            auto& out = adjacency_[p];
            out.clear();
            if (degree * 2 >= n_ - 1) {
                others.clear();
                for (std::size_t q = 0; q < n_; ++q) {
                    if (q != p) others.push_back(static_cast<NodeId>(q));
                }
                rng.shuffle(others.begin(), others.end());
                out.assign(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(degree));
            } else {
                while (out.size() < degree) {
                    const auto q = static_cast<NodeId>(rng.below(n_));
                    if (q != p && std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
                }
            }
        }
    }

    // Greedy search toward node `target`; returns every expanded node.
    std::vector<Scored> greedy_visit(NodeId target) {
        ++epoch_;
        const std::size_t limit = params_.build_list_size;
        std::vector<Scored> list;
        std::vector<bool> expanded;
        list.push_back({dist(entry_, target), entry_});
        expanded.push_back(false);
        stamp_[entry_] = epoch_;
        std::vector<Scored> visited;

        while (true) {
            std::size_t pick = list.size();
            for (std::size_t i = 0; i < list.size(); ++i) {
                if (!expanded[i]) {
                    pick = i;
                    break;
                }
            }
            if (pick == list.size()) break;
            expanded[pick] = true;
            const Scored cur = list[pick];
            visited.push_back(cur);
            for (NodeId nb : adjacency_[cur.id]) {
                if (stamp_[nb] == epoch_) continue;
                stamp_[nb] = epoch_;
                const Scored s{dist(nb, target), nb};
                auto pos = std::lower_bound(list.begin(), list.end(), s);
                const auto idx = pos - list.begin();
                if (static_cast<std::size_t>(idx) >= limit) continue;
                list.insert(pos, s);
                expanded.insert(expanded.begin() + idx, false);
                if (list.size() > limit) {
                    list.pop_back();
                    expanded.pop_back();
                }
            }
        }
        return visited;
    }

    std::vector<NodeId> robust_prune(NodeId p, std::vector<Scored> candidates, double alpha) const {
        std::erase_if(candidates, [p](const Scored& s) { return s.id == p; });
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end(),
                                     [](const Scored& a, const Scored& b) { return a.id == b.id; }),
                         candidates.end());
        std::vector<NodeId> out;
        std::vector<bool> removed(candidates.size(), false);
        for (std::size_t i = 0; i < candidates.size() && out.size() < params_.max_degree; ++i) {
            if (removed[i]) continue;
            const NodeId star = candidates[i].id;
            out.push_back(star);
            for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                if (!removed[j] && alpha * dist(star, candidates[j].id) <= candidates[j].dist) {
                    removed[j] = true;
                }
            }
        }
        return out;
    }

    void pass(const std::vector<NodeId>& order, double alpha) {
        for (NodeId p : order) {
            auto candidates = greedy_visit(p);
            for (NodeId nb : adjacency_[p]) candidates.push_back({dist(p, nb), nb});
            adjacency_[p] = robust_prune(p, std::move(candidates), alpha);

            for (NodeId j : adjacency_[p]) {
                auto& back = adjacency_[j];
                if (std::find(back.begin(), back.end(), p) != back.end()) continue;
                if (back.size() < params_.max_degree) {
                    back.push_back(p);
                    continue;
                }
                std::vector<Scored> pool;
                pool.reserve(back.size() + 1);
                for (NodeId q : back) pool.push_back({dist(j, q), q});
                pool.push_back({dist(j, p), p});
                back = robust_prune(j, std::move(pool), alpha);
            }
        }
    }

    void repair_connectivity() {
        // Each round links the lowest-id unreachable node from its nearest
        // reachable node. Evictions can strand other nodes, so loop until
        // BFS covers the graph.
        const std::size_t max_rounds = 4 * n_ + 16;
        for (std::size_t round = 0; round < max_rounds; ++round) {
            GraphIndex view;
            view.entry_id = entry_;
            view.adjacency = adjacency_;
            const auto reach = reachable_from_entry(view);
            const auto it = std::find(reach.begin(), reach.end(), false);
            if (it == reach.end()) return;
            const auto u = static_cast<NodeId>(it - reach.begin());

            NodeId best = entry_;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t w = 0; w < n_; ++w) {
                if (!reach[w]) continue;
                const double d = dist(static_cast<NodeId>(w), u);
                if (d < best_d) {
                    best_d = d;
                    best = static_cast<NodeId>(w);
                }
            }
            auto& out = adjacency_[best];
            if (out.size() >= params_.max_degree) {
                auto far = std::max_element(out.begin(), out.end(), [&](NodeId a, NodeId b) {
                    const double da = dist(best, a), db = dist(best, b);
                    return da < db || (da == db && a < b);
                });
                *far = u;
            } else {
                out.push_back(u);
            }
        }
        throw InvariantError("build_graph: connectivity repair did not converge");
    }

    const VectorDataset& data_;
    BuildParams params_;
    std::size_t n_;
    std::uint32_t epoch_ = 0;
    std::vector<std::uint32_t> stamp_;
    std::vector<std::vector<NodeId>> adjacency_;
    NodeId entry_ = 0;
};

}  // namespace

NodeId medoid(const VectorDataset& dataset, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (n == 0) {
        throw ArgumentError("medoid: empty dataset");
    }
    const std::size_t dim = dataset.dim();
    std::vector<NodeId> anchors;
    if (n <= kExactMedoidLimit) {
        anchors.resize(n);
        std::iota(anchors.begin(), anchors.end(), NodeId{0});
    } else {
        std::vector<NodeId> all(n);
        std::iota(all.begin(), all.end(), NodeId{0});
        Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
        rng.shuffle(all.begin(), all.end());
        anchors.assign(all.begin(), all.begin() + kMedoidAnchors);
    }
    NodeId best = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const float* p = dataset.row(i).data();
        double sum = 0.0;
        for (NodeId a : anchors) {
            sum += std::sqrt(l2_squared_unchecked(p, dataset.row(a).data(), dim));
            if (sum >= best_sum) break;
        }
        if (sum < best_sum) {
            best_sum = sum;
            best = static_cast<NodeId>(i);
        }
    }
    return best;
}

GraphIndex build_graph(const VectorDataset& dataset, const BuildParams& params) {
    if (dataset.size() < 2) {
        throw ArgumentError("build_graph: need at least 2 points, got " + std::to_string(dataset.size()));
    }
    if (params.max_degree < 2) {
        throw ArgumentError("build_graph: R must be >= 2");
    }
    if (params.build_list_size < params.max_degree) {
        throw ArgumentError("build_graph: L_build must be >= R");
    }
    if (!(params.alpha >= 1.0)) {
        throw ArgumentError("build_graph: alpha must be >= 1");
    }
    return VamanaBuilder(dataset, params).run();
}

std::vector<bool> reachable_from_entry(const GraphIndex& graph) {
    std::vector<bool> seen(graph.size(), false);
    if (graph.size() == 0) return seen;
    std::deque<NodeId> frontier{graph.entry_id};
    seen[graph.entry_id] = true;
    while (!frontier.empty()) {
        const NodeId cur = frontier.front();
        frontier.pop_front();
        for (NodeId nb : graph.adjacency[cur]) {
            if (nb < seen.size() && !seen[nb]) {
                seen[nb] = true;
                frontier.push_back(nb);
            }
        }
    }
    return seen;
}

void validate_graph(const GraphIndex& graph) {
    const std::size_t n = graph.size();
    if (graph.entry_id >= n) {
        throw InvariantError("graph entry id " + std::to_string(graph.entry_id) + " out of range");
    }
    for (std::size_t p = 0; p < n; ++p) {
        const auto& out = graph.adjacency[p];
        if (out.size() > graph.max_degree) {
            throw InvariantError("node " + std::to_string(p) + " has degree " + std::to_string(out.size()) +
                                 " > R=" + std::to_string(graph.max_degree));
        }
        auto sorted = out;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvariantError("node " + std::to_string(p) + " has duplicate neighbors");
        }
        for (NodeId nb : out) {
            if (nb == p) throw InvariantError("node " + std::to_string(p) + " has a self loop");
            if (nb >= n) throw InvariantError("node " + std::to_string(p) + " links to out-of-range id");
        }
    }
    const auto reach = reachable_from_entry(graph);
    const auto it = std::find(reach.begin(), reach.end(), false);
    if (it != reach.end()) {
        throw InvariantError("node " + std::to_string(it - reach.begin()) + " unreachable from entry");
    }
}

void write_graph(const std::string& path, const GraphIndex& graph) {
    std::vector<std::uint8_t> out(kGraphMagic, kGraphMagic + 4);
    binio::put<std::uint32_t>(out, kGraphVersion);
    binio::put<std::uint32_t>(out, graph.max_degree);
    binio::put<std::uint64_t>(out, graph.size());
    binio::put<std::uint64_t>(out, graph.entry_id);
    for (const auto& adj : graph.adjacency) {
        binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(adj.size()));
        for (NodeId nb : adj) binio::put<std::uint32_t>(out, nb);
    }
    binio::write_file(path, out);
}

GraphIndex read_graph(const std::string& path) {
    const auto bytes = binio::read_file(path);
    binio::Cursor cur(bytes, path);
    auto magic = cur.take_bytes(4);
    if (std::memcmp(magic.data(), kGraphMagic, 4) != 0) throw FormatError(path + ": bad graph magic");
    if (cur.take<std::uint32_t>() != kGraphVersion) throw FormatError(path + ": unsupported graph version");
    GraphIndex g;
    g.max_degree = cur.take<std::uint32_t>();
    const auto n = cur.take<std::uint64_t>();
    g.entry_id = static_cast<NodeId>(cur.take<std::uint64_t>());
    g.adjacency.resize(n);
    for (auto& adj : g.adjacency) {
        const auto deg = cur.take<std::uint32_t>();
        if (deg > g.max_degree) throw FormatError(path + ": degree exceeds R");
        adj.resize(deg);
        for (auto& nb : adj) nb = cur.take<std::uint32_t>();
    }
    return g;
}

}  // namespace hcann
