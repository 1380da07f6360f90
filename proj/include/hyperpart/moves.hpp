// moves.hpp - move sequences, parallel gain recalculation, best-prefix reversion
#ifndef HYPERPART_MOVES_HPP
#define HYPERPART_MOVES_HPP

#include <atomic>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "parallel/parallel.hpp"
#include "partitioned_hypergraph.hpp"
#include "types.hpp"

namespace hyperpart {

struct MoveSequence {
    std::vector<Move> moves;
    std::vector<Gain> gains;  // filled by recalculate_gains
};

// Exact per-move connectivity deltas of replaying `moves` in order, without
// replaying. For every net touched by a moved pin (visited once, guarded by a
// shared seen-set) the per-block first-in index, last-out index and unmoved
// pin count decide which move gains or pays ω(e):
//   +ω(e) for move i out of V_s iff i is the last out of V_s, no move into
//         V_s at an earlier-or-equal index remains, and no unmoved pin holds V_s;
//   −ω(e) for move i into V_t iff i is the first into V_t, no later move out
//         of V_t rescues it, and no unmoved pin already holds V_t.
// `part` must give the block of every unmoved pin (the state before or after
// the sequence; both agree on unmoved nodes).
inline std::vector<Gain> recalculate_gains(const Hypergraph& h, std::span<const BlockId> part,
                                           const std::vector<Move>& moves, std::int32_t k,
                                           int threads = 1) {
    const auto l = moves.size();
    std::vector<std::int64_t> move_of(h.num_nodes(), -1);
    for (std::size_t i = 0; i < l; ++i) {
        const Move& m = moves[i];
        if (m.node >= h.num_nodes() || m.from == m.to)
            throw std::invalid_argument("malformed move");
        if (move_of[m.node] != -1)
            throw std::invalid_argument("node moved more than once in the sequence");
        move_of[m.node] = static_cast<std::int64_t>(i);
    }

    std::vector<std::atomic<Gain>> gains(l);
    for (auto& g : gains) g.store(0, std::memory_order_relaxed);
    std::vector<std::atomic<std::uint8_t>> seen(h.num_nets());
    for (auto& s : seen) s.store(0, std::memory_order_relaxed);

    constexpr std::int64_t kNone = -1;
    constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();

    auto process_net = [&](NetId e) {
        thread_local std::vector<std::int64_t> first_in, last_out, non_moved;
        thread_local std::vector<BlockId> touched;
        if (first_in.size() < static_cast<std::size_t>(k)) {
            first_in.assign(k, kInf);
            last_out.assign(k, kNone);
            non_moved.assign(k, 0);
        }
        touched.clear();
        auto touch = [&](BlockId b) {
            if (first_in[b] == kInf && last_out[b] == kNone && non_moved[b] == 0)
                touched.push_back(b);
        };
        for (NodeId v : h.pins(e)) {
            const std::int64_t i = move_of[v];
            if (i == kNone) {
                touch(part[v]);
                ++non_moved[part[v]];
            } else {
                const Move& m = moves[static_cast<std::size_t>(i)];
                touch(m.from);
                touch(m.to);
                if (i > last_out[m.from]) last_out[m.from] = i;
                if (i < first_in[m.to]) first_in[m.to] = i;
            }
        }
        const Weight w = h.net_weight(e);
        for (NodeId v : h.pins(e)) {
            const std::int64_t i = move_of[v];
            if (i == kNone) continue;
            const Move& m = moves[static_cast<std::size_t>(i)];
            if (last_out[m.from] == i && i < first_in[m.from] && non_moved[m.from] == 0)
                gains[static_cast<std::size_t>(i)].fetch_add(w, std::memory_order_relaxed);
            if (first_in[m.to] == i && i > last_out[m.to] && non_moved[m.to] == 0)
                gains[static_cast<std::size_t>(i)].fetch_sub(w, std::memory_order_relaxed);
        }
        for (BlockId b : touched) {
            first_in[b] = kInf;
            last_out[b] = kNone;
            non_moved[b] = 0;
        }
    };

    par::for_each(
        threads, l,
        [&](std::size_t i) {
            for (NetId e : h.incident_nets(moves[i].node)) {
                if (seen[e].exchange(1, std::memory_order_acq_rel) == 0) process_net(e);
            }
        },
        1);

    std::vector<Gain> out(l);
    for (std::size_t i = 0; i < l; ++i) out[i] = gains[i].load(std::memory_order_relaxed);
    return out;
}

// Largest-sum prefix; ties break toward keeping more moves.
inline std::size_t best_prefix(std::span<const Gain> gains) {
    Gain best = 0, sum = 0;
    std::size_t r = 0;
    for (std::size_t i = 0; i < gains.size(); ++i) {
        sum += gains[i];
        if (sum >= best) {
            best = sum;
            r = i + 1;
        }
    }
    return r;
}

// Undoes moves r..l-1 in reverse order. Reverts bypass the balance check:
// they restore a previous state, which may itself sit outside the caps.
inline void revert_to_prefix(PartitionedHypergraph& ph, std::span<const Move> moves,
                             std::size_t r) {
    for (std::size_t i = moves.size(); i > r; --i) {
        const Move& m = moves[i - 1];
        ph.force_move(m.node, m.to, m.from);
    }
}

}  // namespace hyperpart

#endif
