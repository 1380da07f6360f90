// sync_lp.hpp - synchronous label propagation via balanced prefix swaps
#ifndef HYPERPART_DETERMINISTIC_SYNC_LP_HPP
#define HYPERPART_DETERMINISTIC_SYNC_LP_HPP

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "subround.hpp"
#include "swap_prefixes.hpp"

namespace hyperpart {

struct SyncLpConfig {
    int max_rounds = 5;
    int sub_rounds = 16;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct SyncLpReport {
    int rounds = 0;
    Gain improvement = 0;
    std::size_t moves_committed = 0;
};

// Refinement that produces the same partition for every thread count. Each
// sub-round first computes the best non-negative-gain move per node against
// the frozen partition (a pure parallel map), then walks the block pairs in
// a fixed order and applies the longest balanced prefix pair of the two
// opposing move lists, sorted by (gain desc, id asc). A prefix pair is kept
// only if its recomputed combined gain is still non-negative, so the
// objective never increases; otherwise it is rolled back. Zero-gain moves
// participate since the swap selection can use them to improve balance.
inline SyncLpReport sync_label_propagation(PartitionedHypergraph& ph,
                                           const SyncLpConfig& cfg = {}) {
    const Hypergraph& h = ph.hypergraph();
    const BlockId k = ph.k();
    SyncLpReport report;
    if (k < 2 || h.num_nodes() == 0) return report;

    const NodeId n = h.num_nodes();
    std::vector<BlockId> target(n, kNoBlock);
    std::vector<Gain> gain(n, 0);

    for (int round = 0; round < cfg.max_rounds; ++round) {
        const Gain before = ph.km1();
        const SubRoundPlan plan =
            SubRoundPlan::create(n, cfg.sub_rounds, seed_with(cfg.seed, 0x5bc1),
                                 static_cast<std::uint64_t>(round));
        std::size_t committed_this_round = 0;

        for (std::size_t s = 0; s < plan.num_slices(); ++s) {
            const auto slice = plan.slice(s);
            par::for_each(cfg.threads, slice.size(), [&](std::size_t idx) {
                const NodeId v = slice[idx];
                target[v] = kNoBlock;
                if (!ph.is_boundary_node(v)) return;
                thread_local std::vector<Weight> connected;
                connected.assign(k, 0);
                const BlockId own = ph.part(v);
                Gain benefit = 0;
                Weight incident = 0;
                for (NetId e : h.incident_nets(v)) {
                    const Weight w = h.net_weight(e);
                    incident += w;
                    if (ph.pin_count(e, own) == 1) benefit += w;
                    ph.for_each_connected_block(e, [&](BlockId b) { connected[b] += w; });
                }
                Gain best_gain = 0;
                BlockId best = kNoBlock;
                for (BlockId t = 0; t < k; ++t) {
                    if (t == own) continue;
                    const Gain g = benefit - (incident - connected[t]);
                    if (g < 0) continue;
                    if (best == kNoBlock || g > best_gain ||
                        (g == best_gain &&
                         (ph.block_weight(t) < ph.block_weight(best) ||
                          (ph.block_weight(t) == ph.block_weight(best) && t < best)))) {
                        best_gain = g;
                        best = t;
                    }
                }
                if (best != kNoBlock) {
                    target[v] = best;
                    gain[v] = best_gain;
                }
            });

            std::vector<std::vector<NodeId>> wanting(static_cast<std::size_t>(k) * k);
            for (const NodeId v : slice)
                if (target[v] != kNoBlock)
                    wanting[static_cast<std::size_t>(ph.part(v)) * k + target[v]].push_back(v);

            const auto by_gain_then_id = [&](NodeId a, NodeId b) {
                return gain[a] != gain[b] ? gain[a] > gain[b] : a < b;
            };
            for (BlockId a = 0; a < k; ++a) {
                for (BlockId b = a + 1; b < k; ++b) {
                    auto& st_nodes = wanting[static_cast<std::size_t>(a) * k + b];
                    auto& ts_nodes = wanting[static_cast<std::size_t>(b) * k + a];
                    if (st_nodes.empty() && ts_nodes.empty()) continue;
                    std::sort(st_nodes.begin(), st_nodes.end(), by_gain_then_id);
                    std::sort(ts_nodes.begin(), ts_nodes.end(), by_gain_then_id);
                    std::vector<Weight> st_w(st_nodes.size()), ts_w(ts_nodes.size());
                    for (std::size_t p = 0; p < st_nodes.size(); ++p)
                        st_w[p] = h.node_weight(st_nodes[p]);
                    for (std::size_t p = 0; p < ts_nodes.size(); ++p)
                        ts_w[p] = h.node_weight(ts_nodes[p]);
                    const auto [i, j] = select_swap_prefixes_merge(
                        st_w, ts_w, ph.block_weight(a), ph.block_weight(b),
                        ph.max_block_weight(a), ph.max_block_weight(b));
                    if (i + j == 0) continue;

                    Gain delta = 0;
                    std::vector<Move> applied;
                    applied.reserve(i + j);
                    for (std::size_t p = 0; p < i; ++p) {
                        delta += ph.force_move(st_nodes[p], a, b);
                        applied.push_back({st_nodes[p], a, b});
                    }
                    for (std::size_t p = 0; p < j; ++p) {
                        delta += ph.force_move(ts_nodes[p], b, a);
                        applied.push_back({ts_nodes[p], b, a});
                    }
                    if (delta < 0) {
                        for (auto it = applied.rbegin(); it != applied.rend(); ++it)
                            ph.force_move(it->node, it->to, it->from);
                    } else {
                        committed_this_round += applied.size();
                    }
                }
            }
        }

        ++report.rounds;
        const Gain after = ph.km1();
        report.improvement += before - after;
        report.moves_committed += committed_this_round;
        if (committed_this_round == 0) break;
    }
    return report;
}

}  // namespace hyperpart

#endif
