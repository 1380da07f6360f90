// louvain.hpp - modularity clustering on the bipartite expansion, coarsening preprocessor
#ifndef HYPERPART_COMMUNITY_LOUVAIN_HPP
#define HYPERPART_COMMUNITY_LOUVAIN_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "../deterministic/volume_aggregation.hpp"
#include "../graph.hpp"
#include "../hypergraph.hpp"
#include "../parallel/parallel.hpp"
#include "../util/random.hpp"

namespace hyperpart {

struct LouvainConfig {
    EdgeWeightModel edge_weight_model = EdgeWeightModel::kUniform;
    double tolerance = 1e-4;
    int max_passes = 25;
    int max_local_rounds = 5;
    bool merge_singletons = false;
    bool deterministic = false;
    int sub_rounds = 16;
    std::uint64_t seed = 0;
    int threads = 1;
    // test instrumentation: records (node, from, to) of accepted local moves
    // of the first local-moving level when run single-threaded
    std::vector<std::tuple<NodeId, NodeId, NodeId>>* move_log = nullptr;
};

// Q = Σ_C [ w_in(C)/W − (vol(C)/(2W))² ].
inline double modularity(const Graph& g, std::span<const NodeId> clustering) {
    if (clustering.size() != g.num_vertices())
        throw std::invalid_argument("clustering does not cover all vertices");
    const double W = g.total_weight();
    if (W <= 0.0) throw std::invalid_argument("modularity undefined for empty graphs");
    NodeId max_c = 0;
    for (NodeId c : clustering) max_c = std::max(max_c, c);
    std::vector<double> w_in(max_c + 1, 0.0), vol(max_c + 1, 0.0);
    for (NodeId v = 0; v < g.num_vertices(); ++v) {
        const NodeId c = clustering[v];
        vol[c] += g.volume(v);
        w_in[c] += g.self_loop(v);
        for (auto edge : g.neighbors(v))
            if (clustering[edge.to] == c && edge.to > v) w_in[c] += edge.weight;
    }
    double q = 0.0;
    for (std::size_t c = 0; c < w_in.size(); ++c) {
        const double frac = vol[c] / (2.0 * W);
        q += w_in[c] / W - frac * frac;
    }
    return q;
}

namespace detail {

// One local-moving phase on g. Starts from singletons. Returns the number of
// accepted moves in total; clustering ids are graph vertex ids (not dense).
inline std::size_t louvain_local_moving(const Graph& g, const LouvainConfig& cfg,
                                        std::uint64_t level_seed,
                                        std::vector<NodeId>& com) {
    const NodeId n = g.num_vertices();
    const double W = g.total_weight();
    com.assign(n, 0);
    for (NodeId v = 0; v < n; ++v) com[v] = v;
    std::vector<std::atomic<double>> cluster_volume(n);
    for (NodeId v = 0; v < n; ++v)
        cluster_volume[v].store(g.volume(v), std::memory_order_relaxed);

    // Gain of moving v from its cluster to c, with connection weights w_to.
    auto move_gain = [&](NodeId v, NodeId own, NodeId c, double w_to_c, double w_to_own) {
        const double vol_v = g.volume(v);
        const double vol_c = cluster_volume[c].load(std::memory_order_relaxed);
        const double vol_own =
            cluster_volume[own].load(std::memory_order_relaxed) - vol_v;
        return (w_to_c - w_to_own) / W - vol_v * (vol_c - vol_own) / (2.0 * W * W);
    };

    std::size_t total_moves = 0;
    constexpr double kGainEps = 1e-12;

    if (!cfg.deterministic) {
        auto rng = make_rng(level_seed);
        for (int round = 0; round < cfg.max_local_rounds; ++round) {
            auto order = random_permutation(n, rng);
            std::atomic<std::size_t> moved{0};
            par::for_each(cfg.threads, n, [&](std::size_t idx) {
                thread_local std::vector<double> w_to;
                thread_local std::vector<NodeId> touched;
                if (w_to.size() < n) w_to.assign(n, 0.0);
                const NodeId v = order[idx];
                const NodeId own = std::atomic_ref(com[v]).load(std::memory_order_relaxed);
                touched.clear();
                for (auto edge : g.neighbors(v)) {
                    const NodeId c =
                        std::atomic_ref(com[edge.to]).load(std::memory_order_relaxed);
                    if (w_to[c] == 0.0) touched.push_back(c);
                    w_to[c] += edge.weight;
                }
                NodeId best = own;
                double best_gain = kGainEps;
                for (NodeId c : touched) {
                    if (c == own) continue;
                    const double gain = move_gain(v, own, c, w_to[c], w_to[own]);
                    if (gain > best_gain || (gain == best_gain && best != own && c < best)) {
                        best_gain = gain;
                        best = c;
                    }
                }
                for (NodeId c : touched) w_to[c] = 0.0;
                if (best != own) {
                    cluster_volume[own].fetch_sub(g.volume(v), std::memory_order_relaxed);
                    cluster_volume[best].fetch_add(g.volume(v), std::memory_order_relaxed);
                    std::atomic_ref(com[v]).store(best, std::memory_order_relaxed);
                    moved.fetch_add(1, std::memory_order_relaxed);
                    if (cfg.move_log != nullptr) cfg.move_log->emplace_back(v, own, best);
                }
            });
            total_moves += moved.load();
            if (moved.load() == 0) break;
        }
        return total_moves;
    }

    // Deterministic variant: fixed id order sliced into sub-rounds. Each
    // sub-round selects moves against frozen volumes in parallel, then
    // commits volume deltas grouped by cluster in ascending node order, so
    // results do not depend on scheduling.
    const int sub_rounds = std::max(1, cfg.sub_rounds);
    std::vector<NodeId> selected(n);
    for (int round = 0; round < cfg.max_local_rounds; ++round) {
        std::size_t moved_this_round = 0;
        for (int sub = 0; sub < sub_rounds; ++sub) {
            const NodeId begin = static_cast<NodeId>(
                static_cast<std::uint64_t>(n) * sub / sub_rounds);
            const NodeId end = static_cast<NodeId>(
                static_cast<std::uint64_t>(n) * (sub + 1) / sub_rounds);
            if (begin == end) continue;
            par::for_each(cfg.threads, end - begin, [&](std::size_t i) {
                thread_local std::vector<double> w_to;
                thread_local std::vector<NodeId> touched;
                if (w_to.size() < n) w_to.assign(n, 0.0);
                const NodeId v = begin + static_cast<NodeId>(i);
                const NodeId own = com[v];
                touched.clear();
                for (auto edge : g.neighbors(v)) {
                    const NodeId c = com[edge.to];
                    if (w_to[c] == 0.0) touched.push_back(c);
                    w_to[c] += edge.weight;
                }
                std::sort(touched.begin(), touched.end());
                NodeId best = own;
                double best_gain = kGainEps;
                for (NodeId c : touched) {
                    if (c == own) continue;
                    const double gain = move_gain(v, own, c, w_to[c], w_to[own]);
                    if (gain > best_gain) {
                        best_gain = gain;
                        best = c;
                    }
                }
                for (NodeId c : touched) w_to[c] = 0.0;
                selected[v] = best;
            });
            // Commit: volume deltas reduced per cluster in node-id order.
            std::vector<VolumeUpdate> updates;
            for (NodeId v = begin; v < end; ++v) {
                if (selected[v] == com[v]) continue;
                updates.push_back({com[v], v, -g.volume(v)});
                updates.push_back({selected[v], v, g.volume(v)});
                com[v] = selected[v];
                ++moved_this_round;
            }
            for (const auto& [c, d] :
                 deterministic_volume_aggregation(std::move(updates), cfg.threads))
                cluster_volume[c].store(cluster_volume[c].load(std::memory_order_relaxed) + d,
                                        std::memory_order_relaxed);
        }
        total_moves += moved_this_round;
        if (moved_this_round == 0) break;
    }
    return total_moves;
}

// Contracts g by the clustering (arbitrary ids); returns the coarse graph and
// the dense cluster id per vertex. Edge accumulation is sorted, so the coarse
// graph does not depend on iteration order.
inline std::pair<Graph, std::vector<NodeId>> contract_graph(const Graph& g,
                                                            std::span<const NodeId> com) {
    std::vector<NodeId> ids(com.begin(), com.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<NodeId> dense(g.num_vertices());
    for (NodeId v = 0; v < g.num_vertices(); ++v)
        dense[v] = static_cast<NodeId>(
            std::lower_bound(ids.begin(), ids.end(), com[v]) - ids.begin());

    const NodeId nc = static_cast<NodeId>(ids.size());
    std::map<std::pair<NodeId, NodeId>, double> edge_weight;
    std::vector<double> self_loops(nc, 0.0);
    for (NodeId v = 0; v < g.num_vertices(); ++v) self_loops[dense[v]] += g.self_loop(v);
    for (NodeId v = 0; v < g.num_vertices(); ++v) {
        for (auto edge : g.neighbors(v)) {
            if (edge.to < v) continue;  // each undirected edge once
            const NodeId cu = dense[v], cv = dense[edge.to];
            if (cu == cv)
                self_loops[cu] += edge.weight;
            else
                edge_weight[{std::min(cu, cv), std::max(cu, cv)}] += edge.weight;
        }
    }
    std::vector<std::tuple<NodeId, NodeId, double>> edges;
    edges.reserve(edge_weight.size());
    for (const auto& [key, w] : edge_weight) edges.emplace_back(key.first, key.second, w);
    return {Graph::build(nc, edges, std::move(self_loops)), std::move(dense)};
}

}  // namespace detail

// Louvain on the bipartite expansion of H; returns a dense community id per
// hypergraph node (net-vertices are dropped from the output).
inline std::vector<NodeId> detect_communities(const Hypergraph& h, const LouvainConfig& cfg) {
    const NodeId n = h.num_nodes();
    if (h.num_pins() == 0) {
        std::vector<NodeId> singleton(n);
        for (NodeId v = 0; v < n; ++v) singleton[v] = v;
        return singleton;
    }

    Graph g = bipartite_representation(h, cfg.edge_weight_model);
    // vertex of the original bipartite graph -> vertex of the current level
    std::vector<NodeId> to_current(g.num_vertices());
    for (NodeId v = 0; v < g.num_vertices(); ++v) to_current[v] = v;

    std::vector<NodeId> singleton(g.num_vertices());
    for (NodeId v = 0; v < g.num_vertices(); ++v) singleton[v] = v;
    double q_prev = modularity(g, singleton);

    std::vector<NodeId> com;
    for (int pass = 0; pass < cfg.max_passes; ++pass) {
        LouvainConfig level_cfg = cfg;
        if (pass > 0) level_cfg.move_log = nullptr;
        const std::size_t moves = detail::louvain_local_moving(
            g, level_cfg, seed_with(cfg.seed, 0xc0117, pass), com);
        if (moves == 0) break;
        const double q_now = modularity(g, com);
        const bool converged = q_now - q_prev < cfg.tolerance;
        q_prev = std::max(q_prev, q_now);
        const NodeId before = g.num_vertices();
        auto [coarse, dense] = detail::contract_graph(g, com);
        for (NodeId v = 0; v < to_current.size(); ++v)
            to_current[v] = dense[to_current[v]];
        g = std::move(coarse);
        if (converged || g.num_vertices() == before) break;
    }

    if (cfg.merge_singletons) {
        // Merge clusters with a single hypergraph node into their strongest
        // neighbor cluster.
        std::vector<int> size(g.num_vertices(), 0);
        for (NodeId v = 0; v < n; ++v) ++size[to_current[v]];
        std::vector<NodeId> target(g.num_vertices());
        for (NodeId c = 0; c < g.num_vertices(); ++c) {
            target[c] = c;
            if (size[c] != 1 || g.degree(c) == 0) continue;
            double best = -1.0;
            for (auto edge : g.neighbors(c)) {
                if (edge.weight > best) {
                    best = edge.weight;
                    target[c] = edge.to;
                }
            }
        }
        for (NodeId v = 0; v < to_current.size(); ++v) to_current[v] = target[to_current[v]];
    }

    // Project to hypergraph nodes and densify ids.
    std::vector<NodeId> ids;
    ids.reserve(n);
    for (NodeId v = 0; v < n; ++v) ids.push_back(to_current[v]);
    std::vector<NodeId> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<NodeId> out(n);
    for (NodeId v = 0; v < n; ++v)
        out[v] = static_cast<NodeId>(
            std::lower_bound(sorted.begin(), sorted.end(), ids[v]) - sorted.begin());
    return out;
}

}  // namespace hyperpart

#endif
