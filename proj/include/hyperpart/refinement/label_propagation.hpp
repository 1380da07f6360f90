// label_propagation.hpp - parallel size-constrained label propagation refinement
#ifndef HYPERPART_REFINEMENT_LABEL_PROPAGATION_HPP
#define HYPERPART_REFINEMENT_LABEL_PROPAGATION_HPP

#include <cstdint>
#include <vector>

#include "../gain_table.hpp"
#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

struct LpConfig {
    int max_rounds = 5;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct LpReport {
    int rounds = 0;
    Gain improvement = 0;
};

// Visits nodes in a fresh seeded order each round and moves boundary nodes to
// the highest-gain block. A move needs either positive gain or zero gain with
// a strict balance win for the block pair. Moves go through the balance
// checked path; a move whose attributed delta comes back negative (a
// concurrent neighbor move invalidated the gain) is reverted on the spot.
// Stops after a round that did not reduce connectivity, or after max_rounds.
inline LpReport label_propagation(PartitionedHypergraph& ph, GainTable& gains,
                                  const LpConfig& cfg = {}) {
    const Hypergraph& h = ph.hypergraph();
    const std::int32_t k = ph.k();
    LpReport report;
    if (k < 2 || h.num_nodes() == 0) return report;

    for (int round = 0; round < cfg.max_rounds; ++round) {
        const Gain before = ph.km1();
        Rng order_rng = make_rng(seed_with(cfg.seed, 0x1abe1, static_cast<std::uint64_t>(round)));
        const std::vector<NodeId> order = random_permutation(h.num_nodes(), order_rng);

        par::for_each(cfg.threads, order.size(), [&](std::size_t i) {
            const NodeId v = order[i];
            if (!ph.is_boundary_node(v)) return;
            const BlockId s = ph.part(v);
            Gain best_gain = 0;
            BlockId best_target = kNoBlock;
            for (BlockId t = 0; t < k; ++t) {
                if (t == s) continue;
                const Gain g = gains.gain(v, t);
                if (best_target == kNoBlock || g > best_gain ||
                    (g == best_gain && ph.block_weight(t) < ph.block_weight(best_target)))
                    best_gain = g, best_target = t;
            }
            if (best_target == kNoBlock || best_gain < 0) return;
            if (best_gain == 0 &&
                ph.block_weight(best_target) + h.node_weight(v) >= ph.block_weight(s))
                return;
            const auto outcome = ph.move_node(v, s, best_target);
            if (outcome.moved && outcome.delta < 0) ph.force_move(v, best_target, s);
        });

        gains.rebuild_benefits(cfg.threads);
        ++report.rounds;
        const Gain after = ph.km1();
        report.improvement += before - after;
        if (after >= before) break;
    }
    return report;
}

}  // namespace hyperpart

#endif
