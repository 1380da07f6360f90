// initial_partitioning.hpp - recursive bipartitioning with a flat portfolio and 2-way FM polish
#ifndef HYPERPART_INITIAL_INITIAL_PARTITIONING_HPP
#define HYPERPART_INITIAL_INITIAL_PARTITIONING_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "../gain_table.hpp"
#include "../hypergraph.hpp"
#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

// Imbalance budget for one bipartition step of a recursive split: the slack
// left when k' blocks with total weight c_sub still have to be carved out of
// a k-way partition whose blocks may weigh (1+eps)·c_total/k. Distributing
// the ratio evenly over the remaining ceil(log2 k') splitting levels keeps
// the end result eps-balanced.
inline double adaptive_epsilon(Weight c_total, Weight c_sub, std::int32_t k, std::int32_t k_sub,
                               double eps) {
    if (k_sub < 2) throw std::invalid_argument("adaptive epsilon needs at least two blocks");
    if (c_sub <= 0) throw std::invalid_argument("adaptive epsilon needs positive weight");
    const int levels = std::bit_width(static_cast<std::uint32_t>(k_sub - 1));
    const double ratio = (1.0 + eps) * (static_cast<double>(c_total) / k) *
                         (static_cast<double>(k_sub) / static_cast<double>(c_sub));
    return std::max(0.0, std::pow(ratio, 1.0 / levels) - 1.0);
}

// Weight cap for the side of a bipartition that will later hold k_side of the
// k_sub blocks. The proportional share is rounded up first; otherwise small
// instances (say 10 unit nodes into 3 blocks) get infeasible caps.
inline Weight side_capacity(Weight c_sub, std::int32_t k_side, std::int32_t k_sub,
                            double eps_prime) {
    const Weight base = (c_sub * k_side + k_sub - 1) / k_sub;
    return base + static_cast<Weight>(eps_prime * static_cast<double>(base) + 1e-9);
}

enum class BipartitionMember : int {
    kRandom = 0,
    kBfs,
    kGreedyCutSingle,
    kGreedyCutFar,
    kGreedyConnectivitySingle,
    kGreedyConnectivityFar,
    kGreedyPinsSingle,
    kGreedyPinsFar,
    kLabelPropagation,
};
inline constexpr int kNumBipartitionMembers = 9;

struct InitialPartitioningConfig {
    int min_repetitions = 5;
    int max_repetitions = 20;
    bool skip_unpromising_members = true;  // stop a member once mean - 2*stddev > best
    std::uint32_t enabled_members = (1u << kNumBipartitionMembers) - 1;
    int fm_passes = 8;

    bool member_enabled(BipartitionMember m) const {
        return (enabled_members >> static_cast<int>(m)) & 1u;
    }
};

struct PortfolioStats {
    int count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    Weight best = std::numeric_limits<Weight>::max();
    bool skipped_early = false;

    void record(Weight objective) {
        ++count;
        const double x = static_cast<double>(objective);
        const double d = x - mean;
        mean += d / count;
        m2 += d * (x - mean);
        best = std::min(best, objective);
    }
    double stddev() const { return count > 0 ? std::sqrt(m2 / count) : 0.0; }
};

struct BipartitionResult {
    std::vector<BlockId> part;
    Weight objective = std::numeric_limits<Weight>::max();
    bool feasible = false;
    Weight balance_key = 0;  // max over sides of weight minus cap; lower is better
    int member = -1;
    int repetition = -1;
};

namespace detail {

struct SideState {
    std::array<Weight, 2> cap;
    std::array<Weight, 2> weight{0, 0};

    bool fits(int side, Weight w) const { return weight[side] + w <= cap[side]; }
    int slack_side() const {
        return cap[0] - weight[0] >= cap[1] - weight[1] ? 0 : 1;
    }
};

// Hop-farthest node from start, smallest id on distance ties; stays within
// start's connected component.
inline NodeId farthest_node(const Hypergraph& h, NodeId start) {
    std::vector<std::int32_t> dist(h.num_nodes(), -1);
    std::queue<NodeId> queue;
    dist[start] = 0;
    queue.push(start);
    NodeId best = start;
    while (!queue.empty()) {
        const NodeId u = queue.front();
        queue.pop();
        if (dist[u] > dist[best] || (dist[u] == dist[best] && u < best)) best = u;
        for (NetId e : h.incident_nets(u))
            for (NodeId v : h.pins(e))
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    queue.push(v);
                }
    }
    return best;
}

// Weight side 0 should reach: the caps' proportional share of the total,
// clamped to the feasible window [c - cap1, cap0].
inline Weight growth_target(const SideState& s, Weight total) {
    const double share = static_cast<double>(s.cap[0]) /
                         static_cast<double>(s.cap[0] + s.cap[1]);
    auto target = static_cast<Weight>(std::llround(share * static_cast<double>(total)));
    target = std::max(target, total - s.cap[1]);
    return std::min(target, s.cap[0]);
}

inline std::vector<BlockId> random_bipartition(const Hypergraph& h, SideState& s, Rng& rng) {
    std::vector<BlockId> part(h.num_nodes());
    auto order = random_permutation(h.num_nodes(), rng);
    for (NodeId v : order) {
        const Weight w = h.node_weight(v);
        int side = static_cast<int>(random_below(rng, 2));
        if (!s.fits(side, w)) side = 1 - side;
        if (!s.fits(side, w)) side = s.slack_side();
        part[v] = side;
        s.weight[side] += w;
    }
    return part;
}

inline std::vector<BlockId> bfs_bipartition(const Hypergraph& h, SideState& s, Rng& rng) {
    std::vector<BlockId> part(h.num_nodes(), 1);
    s.weight[1] = h.total_node_weight();
    const Weight target = growth_target(s, h.total_node_weight());
    auto order = random_permutation(h.num_nodes(), rng);
    std::vector<std::uint8_t> visited(h.num_nodes(), 0);
    std::queue<NodeId> queue;
    std::size_t cursor = 0;
    while (s.weight[0] < target) {
        if (queue.empty()) {
            while (cursor < order.size() && visited[order[cursor]]) ++cursor;
            if (cursor == order.size()) break;
            visited[order[cursor]] = 1;
            queue.push(order[cursor]);
        }
        const NodeId u = queue.front();
        queue.pop();
        const Weight w = h.node_weight(u);
        if (s.weight[0] + w <= s.cap[0]) {
            part[u] = 0;
            s.weight[0] += w;
            s.weight[1] -= w;
            for (NetId e : h.incident_nets(u))
                for (NodeId v : h.pins(e))
                    if (!visited[v]) {
                        visited[v] = 1;
                        queue.push(v);
                    }
        }
    }
    return part;
}

enum class GrowthGain { kCut, kConnectivity, kPins };

// Greedy hypergraph growing: side 0 grows from a seed by repeatedly pulling
// the highest-gain frontier node until it reaches its proportional share.
// kCut scores the change in cut weight, kConnectivity the weight of nets
// already touching side 0, kPins the pin coverage of side 0.
inline std::vector<BlockId> greedy_bipartition(const Hypergraph& h, SideState& s, Rng& rng,
                                               GrowthGain policy, bool farthest_pair) {
    std::vector<BlockId> part(h.num_nodes(), 1);
    s.weight[1] = h.total_node_weight();
    const Weight target = growth_target(s, h.total_node_weight());
    auto order = random_permutation(h.num_nodes(), rng);

    NodeId banned = kInvalidNode;
    NodeId seed = order[0];
    if (farthest_pair && h.num_nodes() > 1) {
        seed = farthest_node(h, order[0]);
        banned = farthest_node(h, seed);
        if (banned == seed) banned = kInvalidNode;
    }

    std::vector<std::int32_t> phi0(h.num_nets(), 0);
    auto gain_of = [&](NodeId v) {
        Gain g = 0;
        for (NetId e : h.incident_nets(v)) {
            const auto size = static_cast<std::int32_t>(h.net_size(e));
            switch (policy) {
                case GrowthGain::kCut:
                    if (phi0[e] == size - 1) g += h.net_weight(e);
                    if (phi0[e] == 0) g -= h.net_weight(e);
                    break;
                case GrowthGain::kConnectivity:
                    if (phi0[e] > 0) g += h.net_weight(e);
                    break;
                case GrowthGain::kPins:
                    g += h.net_weight(e) * phi0[e];
                    break;
            }
        }
        return g;
    };

    std::priority_queue<std::pair<Gain, NodeId>> frontier;
    std::vector<std::uint8_t> reached(h.num_nodes(), 0);
    auto push = [&](NodeId v) {
        if (part[v] == 0 || v == banned) return;
        reached[v] = 1;
        frontier.emplace(gain_of(v), v);
    };
    push(seed);
    std::size_t cursor = 0;
    while (s.weight[0] < target) {
        if (frontier.empty()) {
            while (cursor < order.size() &&
                   (reached[order[cursor]] || part[order[cursor]] == 0 ||
                    order[cursor] == banned))
                ++cursor;
            if (cursor == order.size()) break;
            push(order[cursor]);
            continue;
        }
        auto [g, v] = frontier.top();
        frontier.pop();
        if (part[v] == 0) continue;
        if (g != gain_of(v)) {
            frontier.emplace(gain_of(v), v);
            continue;
        }
        const Weight w = h.node_weight(v);
        if (s.weight[0] + w > s.cap[0]) continue;
        part[v] = 0;
        s.weight[0] += w;
        s.weight[1] -= w;
        for (NetId e : h.incident_nets(v)) {
            ++phi0[e];
            for (NodeId u : h.pins(e))
                if (part[u] == 1 && !reached[u]) push(u);
        }
    }
    return part;
}

// Size-constrained label propagation with one anchor seed per side.
inline std::vector<BlockId> lp_bipartition(const Hypergraph& h, SideState& s, Rng& rng) {
    const BlockId kUnassigned = -1;
    std::vector<BlockId> part(h.num_nodes(), kUnassigned);
    auto order = random_permutation(h.num_nodes(), rng);
    NodeId seed0 = order[0];
    NodeId seed1 = h.num_nodes() > 1 ? farthest_node(h, seed0) : seed0;
    if (seed1 == seed0 && h.num_nodes() > 1) seed1 = order[1];
    part[seed0] = 0;
    s.weight[0] += h.node_weight(seed0);
    if (seed1 != seed0) {
        part[seed1] = 1;
        s.weight[1] += h.node_weight(seed1);
    }

    auto affinity = [&](NodeId v, int side) {
        Weight a = 0;
        for (NetId e : h.incident_nets(v))
            for (NodeId u : h.pins(e))
                if (u != v && part[u] == side) a += h.net_weight(e);
        return a;
    };
    for (int round = 0; round < 5; ++round) {
        bool changed = false;
        shuffle_vector(order, rng);
        for (NodeId v : order) {
            if (v == seed0 || v == seed1) continue;
            const Weight w = h.node_weight(v);
            const Weight a0 = affinity(v, 0), a1 = affinity(v, 1);
            int want = a0 > a1 ? 0 : a1 > a0 ? 1 : s.slack_side();
            if (part[v] == kUnassigned) {
                if (!s.fits(want, w)) want = 1 - want;
                if (!s.fits(want, w)) continue;
                part[v] = want;
                s.weight[want] += w;
                changed = true;
            } else if (want != part[v] && (want == 0 ? a0 > a1 : a1 > a0) &&
                       s.fits(want, w)) {
                s.weight[part[v]] -= w;
                s.weight[want] += w;
                part[v] = want;
                changed = true;
            }
        }
        if (!changed) break;
    }
    for (NodeId v = 0; v < h.num_nodes(); ++v)
        if (part[v] == kUnassigned) {
            const int side = s.fits(0, h.node_weight(v)) ? 0 : s.slack_side();
            part[v] = side;
            s.weight[side] += h.node_weight(v);
        }
    return part;
}

inline std::vector<BlockId> run_member(BipartitionMember member, const Hypergraph& h,
                                       const std::array<Weight, 2>& caps, Rng& rng) {
    SideState s{caps};
    switch (member) {
        case BipartitionMember::kRandom: return random_bipartition(h, s, rng);
        case BipartitionMember::kBfs: return bfs_bipartition(h, s, rng);
        case BipartitionMember::kGreedyCutSingle:
            return greedy_bipartition(h, s, rng, GrowthGain::kCut, false);
        case BipartitionMember::kGreedyCutFar:
            return greedy_bipartition(h, s, rng, GrowthGain::kCut, true);
        case BipartitionMember::kGreedyConnectivitySingle:
            return greedy_bipartition(h, s, rng, GrowthGain::kConnectivity, false);
        case BipartitionMember::kGreedyConnectivityFar:
            return greedy_bipartition(h, s, rng, GrowthGain::kConnectivity, true);
        case BipartitionMember::kGreedyPinsSingle:
            return greedy_bipartition(h, s, rng, GrowthGain::kPins, false);
        case BipartitionMember::kGreedyPinsFar:
            return greedy_bipartition(h, s, rng, GrowthGain::kPins, true);
        case BipartitionMember::kLabelPropagation: return lp_bipartition(h, s, rng);
    }
    return std::vector<BlockId>(h.num_nodes(), 0);
}

}  // namespace detail

// Sequential 2-way FM with best-prefix rollback. Each pass moves every node
// at most once in best-gain order; a move may overload its target by up to
// one maximum node weight, which lets the search cross balanced ridges
// (moving two at-capacity blocks through an intermediate 3|1 state). The
// pass then keeps the best-gain prefix whose overload does not exceed the
// initial one, so the cut never increases and balance never worsens.
inline Weight twoway_fm(const Hypergraph& h, std::vector<BlockId>& part,
                        const std::array<Weight, 2>& caps, int max_passes = 8) {
    PartitionedHypergraph ph(h, 2, part, {caps[0], caps[1]});
    GainTable gains(ph);
    const NodeId n = h.num_nodes();
    Weight max_node_weight = 0;
    for (NodeId v = 0; v < n; ++v) max_node_weight = std::max(max_node_weight, h.node_weight(v));
    auto overload = [&] {
        return std::max({ph.block_weight(0) - caps[0], ph.block_weight(1) - caps[1], Weight{0}});
    };
    std::vector<std::uint8_t> locked(n);
    for (int pass = 0; pass < max_passes; ++pass) {
        const Weight initial_over = overload();
        std::fill(locked.begin(), locked.end(), 0);
        std::priority_queue<std::pair<Gain, NodeId>> queue;
        for (NodeId v = 0; v < n; ++v) queue.emplace(gains.gain(v, 1 - ph.part(v)), v);
        std::vector<Move> moves;
        Gain running = 0, best = 0;
        Weight best_over = initial_over;
        std::size_t best_prefix = 0;
        while (!queue.empty()) {
            auto [g, v] = queue.top();
            queue.pop();
            if (locked[v]) continue;
            const BlockId from = ph.part(v), to = 1 - from;
            const Gain current = gains.gain(v, to);
            if (g != current) {
                queue.emplace(current, v);
                continue;
            }
            locked[v] = 1;  // whether moved or rejected, settled for this pass
            if (ph.block_weight(to) + h.node_weight(v) > caps[to] + max_node_weight) continue;
            running += ph.force_move(v, from, to);
            moves.push_back({v, from, to});
            const Weight over = overload();
            if (over <= initial_over &&
                (running > best || (running == best && over < best_over))) {
                best = running;
                best_over = over;
                best_prefix = moves.size();
            }
        }
        for (std::size_t i = moves.size(); i-- > best_prefix;)
            ph.force_move(moves[i].node, moves[i].to, moves[i].from);
        gains.rebuild_benefits(1);
        if (best <= 0) break;
    }
    part = ph.partition_snapshot();
    return ph.km1();
}

// Runs the whole bipartitioner portfolio with per-(member, repetition) seeds
// and picks the winner by (feasible, objective, balance, member, repetition).
// A member whose running mean minus two standard deviations exceeds the best
// value seen overall stops after its minimum repetitions.
inline BipartitionResult bipartition_portfolio(const Hypergraph& h,
                                               const std::array<Weight, 2>& caps,
                                               const InitialPartitioningConfig& cfg,
                                               std::uint64_t seed,
                                               std::vector<PortfolioStats>* stats_out = nullptr) {
    std::vector<PortfolioStats> stats(kNumBipartitionMembers);
    BipartitionResult winner;
    auto better = [](const BipartitionResult& a, const BipartitionResult& b) {
        return std::make_tuple(!a.feasible, a.objective, a.balance_key, a.member, a.repetition) <
               std::make_tuple(!b.feasible, b.objective, b.balance_key, b.member, b.repetition);
    };
    for (int rep = 0; rep < cfg.max_repetitions; ++rep) {
        for (int m = 0; m < kNumBipartitionMembers; ++m) {
            if (!cfg.member_enabled(static_cast<BipartitionMember>(m))) continue;
            auto& st = stats[m];
            if (st.count != rep) continue;  // member already retired
            if (cfg.skip_unpromising_members && st.count >= cfg.min_repetitions &&
                winner.member >= 0 &&
                st.mean - 2.0 * st.stddev() > static_cast<double>(winner.objective)) {
                st.skipped_early = true;
                continue;
            }
            auto rng = make_rng(seed_with(seed, 0x1b17, m, rep));
            BipartitionResult result;
            result.part = detail::run_member(static_cast<BipartitionMember>(m), h, caps, rng);
            result.objective = twoway_fm(h, result.part, caps, cfg.fm_passes);
            Weight w0 = 0;
            for (NodeId v = 0; v < h.num_nodes(); ++v)
                if (result.part[v] == 0) w0 += h.node_weight(v);
            const Weight w1 = h.total_node_weight() - w0;
            result.feasible = w0 <= caps[0] && w1 <= caps[1];
            result.balance_key = std::max(w0 - caps[0], w1 - caps[1]);
            result.member = m;
            result.repetition = rep;
            st.record(result.objective);
            if (winner.member < 0 || better(result, winner)) winner = std::move(result);
        }
    }
    if (winner.member < 0) {  // nothing enabled: random fallback
        auto rng = make_rng(seed_with(seed, 0x1b17));
        detail::SideState s{caps};
        winner.part = detail::random_bipartition(h, s, rng);
        winner.objective = compute_objective(h, winner.part, 2, Objective::kKm1);
        winner.member = static_cast<int>(BipartitionMember::kRandom);
        winner.repetition = 0;
    }
    if (stats_out != nullptr) *stats_out = std::move(stats);
    return winner;
}

namespace detail {

struct RecursionContext {
    const InitialPartitioningConfig* cfg;
    Weight c_total;
    std::int32_t k_total;
    double eps;
    ThreadPool* pool;
};

inline void solve_recursive(const RecursionContext& ctx, const Hypergraph& sub,
                            std::int32_t k_count, std::uint64_t seed,
                            std::vector<BlockId>& out) {
    out.assign(sub.num_nodes(), 0);
    if (k_count <= 1 || sub.num_nodes() == 0) return;
    const std::int32_t k_a = (k_count + 1) / 2;
    const std::int32_t k_b = k_count / 2;
    const double eps_prime =
        adaptive_epsilon(ctx.c_total, sub.total_node_weight(), ctx.k_total, k_count, ctx.eps);
    const std::array<Weight, 2> caps = {
        side_capacity(sub.total_node_weight(), k_a, k_count, eps_prime),
        side_capacity(sub.total_node_weight(), k_b, k_count, eps_prime)};
    auto bip = bipartition_portfolio(sub, caps, *ctx.cfg, seed);
    if (k_count == 2) {
        out = std::move(bip.part);
        return;
    }

    std::array<std::vector<NodeId>, 2> side_nodes;
    for (NodeId v = 0; v < sub.num_nodes(); ++v)
        side_nodes[bip.part[v]].push_back(v);

    std::array<std::vector<BlockId>, 2> side_part;
    std::array<Subhypergraph, 2> side_sub;
    auto solve_side = [&](int side, std::int32_t k_side, std::uint64_t side_seed) {
        if (side_nodes[side].empty() || k_side <= 1) {
            side_part[side].assign(side_nodes[side].size(), 0);
            return;
        }
        side_sub[side] = extract_subhypergraph(sub, side_nodes[side], true);
        solve_recursive(ctx, side_sub[side].hg, k_side, side_seed, side_part[side]);
    };
    parallel_invoke(
        ctx.pool, [&] { solve_side(0, k_a, seed_with(seed, 0x5a1d, 0)); },
        [&] { solve_side(1, k_b, seed_with(seed, 0x5a1d, 1)); });

    for (int side = 0; side < 2; ++side) {
        const BlockId offset = side == 0 ? 0 : k_a;
        for (std::size_t i = 0; i < side_nodes[side].size(); ++i)
            out[side_nodes[side][i]] = offset + side_part[side][i];
    }
}

}  // namespace detail

// Divide-and-conquer partitioning into k blocks: each level splits the
// instance into ceil(k'/2) and floor(k'/2) block groups with the adaptive
// imbalance budget, recursing on the extracted sides (in parallel when a
// pool is given).
inline std::vector<BlockId> recursive_bipartition(const Hypergraph& h, std::int32_t k,
                                                  double eps, std::uint64_t seed,
                                                  const InitialPartitioningConfig& cfg = {},
                                                  ThreadPool* pool = nullptr) {
    if (k <= 0) throw std::invalid_argument("block count must be positive");
    detail::RecursionContext ctx{&cfg, h.total_node_weight(), k, eps, pool};
    std::vector<BlockId> part;
    detail::solve_recursive(ctx, h, k, seed, part);
    return part;
}

}  // namespace hyperpart

#endif
