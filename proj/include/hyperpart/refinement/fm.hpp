// fm.hpp - parallel localized FM refinement on thread-local partition overlays
#ifndef HYPERPART_REFINEMENT_FM_HPP
#define HYPERPART_REFINEMENT_FM_HPP

#include <atomic>
#include <cstdint>
#include <mutex>
#include <queue>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "../gain_table.hpp"
#include "../moves.hpp"
#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

struct FmConfig {
    int max_rounds = 10;
    int seeds_per_search = 25;
    std::uint64_t seed = 0;
    int threads = 1;
    double stop_alpha = 1.0;
    double stop_beta = 32.0;
    // Test hook: when set, receives each round's kept move prefix with exact gains.
    std::vector<MoveSequence>* capture_rounds = nullptr;
};

struct FmReport {
    int rounds = 0;
    Gain improvement = 0;
};

// Statistical stopping rule for a localized search. Models the observed move
// gains as i.i.d. normal and stops once the steps taken since the last
// improvement make further progress unlikely: s * mean^2 > alpha * var + beta.
// Improvements reset the step count, so a stream of gains that keeps pushing
// the running total to new bests never triggers the rule.
class AdaptiveStop {
public:
    AdaptiveStop(double alpha, double beta) : alpha_(alpha), beta_(beta) {}

    void observe(Gain g) {
        ++observed_;
        ++steps_;
        const double x = static_cast<double>(g);
        const double d = x - mean_;
        mean_ += d / static_cast<double>(observed_);
        m2_ += d * (x - mean_);
    }

    void on_improvement() { steps_ = 0; }

    bool should_stop() const {
        if (observed_ == 0) return false;
        const double variance = m2_ / static_cast<double>(observed_);
        return static_cast<double>(steps_) * mean_ * mean_ > alpha_ * variance + beta_;
    }

private:
    double alpha_;
    double beta_;
    long long observed_ = 0;
    long long steps_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Thread-local view of the shared partition plus a set of uncommitted moves.
// Reads fall through to the shared state unless the overlay touched the
// entry; an empty overlay is indistinguishable from the shared view. Gain
// deltas replicate the shared table's four update cases, so overlay gains
// match what the shared table would report had the moves been applied for
// real (including the benefit staleness of already moved nodes).
class DeltaPartition {
public:
    DeltaPartition(const PartitionedHypergraph& ph, const GainTable& gains)
        : ph_(&ph),
          hg_(&ph.hypergraph()),
          gains_(&gains),
          k_(ph.k()),
          block_weight_delta_(static_cast<std::size_t>(ph.k()), 0) {}

    BlockId part(NodeId v) const {
        const auto it = part_.find(v);
        return it != part_.end() ? it->second : ph_->part(v);
    }

    Weight block_weight(BlockId i) const {
        return ph_->block_weight(i) + block_weight_delta_[static_cast<std::size_t>(i)];
    }

    std::int32_t pin_count(NetId e, BlockId i) const {
        const auto it = pin_delta_.find(nindex(e, i));
        const std::int32_t d = it != pin_delta_.end() ? it->second : 0;
        return ph_->pin_count(e, i) + d;
    }

    Gain benefit(NodeId v) const {
        const auto it = benefit_delta_.find(v);
        return gains_->benefit(v) + (it != benefit_delta_.end() ? it->second : 0);
    }

    Gain penalty(NodeId v, BlockId t) const {
        const auto it = penalty_delta_.find(nindex(v, t));
        return gains_->penalty(v, t) + (it != penalty_delta_.end() ? it->second : 0);
    }

    Gain gain(NodeId v, BlockId t) const {
        if (t == part(v)) throw std::logic_error("gain toward the node's own block");
        return benefit(v) - penalty(v, t);
    }

    // Applies the move to the overlay and returns its connectivity delta in
    // the overlay view (positive = improvement), mirroring attributed gains.
    Gain apply_move(NodeId v, BlockId from, BlockId to) {
        if (from == to || part(v) != from) throw std::invalid_argument("invalid overlay move");
        part_[v] = to;
        const Weight wv = hg_->node_weight(v);
        block_weight_delta_[static_cast<std::size_t>(from)] -= wv;
        block_weight_delta_[static_cast<std::size_t>(to)] += wv;
        Gain delta = 0;
        for (NetId e : hg_->incident_nets(v)) {
            const Weight w = hg_->net_weight(e);
            const std::int32_t phi_s = bump_pin(e, from, -1);
            const std::int32_t phi_t = bump_pin(e, to, +1);
            if (phi_s == 0) delta += w;
            if (phi_t == 1) delta -= w;
            if (phi_s == 0)
                for (NodeId u : hg_->pins(e)) penalty_delta_[nindex(u, from)] += w;
            if (phi_s == 1)
                for (NodeId u : hg_->pins(e))
                    if (part(u) == from) benefit_delta_[u] += w;
            if (phi_t == 1)
                for (NodeId u : hg_->pins(e)) penalty_delta_[nindex(u, to)] -= w;
            if (phi_t == 2)
                for (NodeId u : hg_->pins(e))
                    if (part(u) == to) benefit_delta_[u] -= w;
        }
        return delta;
    }

    Weight max_block_weight_now() const {
        Weight m = 0;
        for (BlockId i = 0; i < k_; ++i) m = std::max(m, block_weight(i));
        return m;
    }

    void clear() {
        part_.clear();
        pin_delta_.clear();
        benefit_delta_.clear();
        penalty_delta_.clear();
        block_weight_delta_.assign(block_weight_delta_.size(), 0);
    }

private:
    std::uint64_t nindex(std::uint64_t a, BlockId b) const {
        return a * static_cast<std::uint64_t>(k_) + static_cast<std::uint64_t>(b);
    }

    std::int32_t bump_pin(NetId e, BlockId b, std::int32_t d) {
        std::int32_t& slot = pin_delta_[nindex(e, b)];
        slot += d;
        return ph_->pin_count(e, b) + slot;
    }

    const PartitionedHypergraph* ph_;
    const Hypergraph* hg_;
    const GainTable* gains_;
    std::int32_t k_;
    std::vector<Weight> block_weight_delta_;
    std::unordered_map<NodeId, BlockId> part_;
    std::unordered_map<std::uint64_t, std::int32_t> pin_delta_;
    std::unordered_map<NodeId, Gain> benefit_delta_;
    std::unordered_map<std::uint64_t, Gain> penalty_delta_;
};

namespace detail {

// One localized search: grows from a batch of seed nodes, explores moves on
// the overlay (negative gains included), and flushes the pending sequence to
// the shared partition whenever its running delta turns positive, or reaches
// zero while strictly lowering the heaviest block. Unflushed moves are
// dropped at the end. Flushes serialize on the round's log mutex so the log
// order is the order the moves took effect.
class LocalizedSearch {
public:
    LocalizedSearch(PartitionedHypergraph& ph, GainTable& gains, const FmConfig& cfg,
                    std::vector<std::atomic<std::uint8_t>>& owner, std::vector<Move>& log,
                    std::mutex& log_mutex)
        : ph_(ph),
          gains_(gains),
          cfg_(cfg),
          owner_(owner),
          log_(log),
          log_mutex_(log_mutex),
          delta_(ph, gains),
          k_(ph.k()) {}

    // Runs one search from the given owned seeds. Returns false when a flush
    // was cut short by the shared balance check; the round then stops polling
    // this search and the caller starts a fresh one.
    bool run(std::span<const NodeId> seeds) {
        delta_.clear();
        pending_.clear();
        touched_.clear();
        heap_ = {};
        running_ = 0;
        best_running_ = 0;
        flush_base_max_ = delta_.max_block_weight_now();
        AdaptiveStop stop(cfg_.stop_alpha, cfg_.stop_beta);

        for (NodeId s : seeds) {
            touched_.push_back(s);
            push_best_move(s);
        }

        bool flush_ok = true;
        while (!heap_.empty() && !stop.should_stop()) {
            const auto [prio, v] = heap_.top();
            heap_.pop();
            const BlockId from = delta_.part(v);
            const auto [g, t] = best_move(v, from);
            if (t == kNoBlock) continue;
            if (g != prio) {
                heap_.push({g, v});
                continue;
            }
            if (delta_.block_weight(t) + ph_.hypergraph().node_weight(v) >
                ph_.max_block_weight(t))
                continue;
            const Gain d = delta_.apply_move(v, from, t);
            pending_.push_back({v, from, t});
            running_ += d;
            stop.observe(d);
            if (running_ > best_running_) {
                best_running_ = running_;
                stop.on_improvement();
            }
            if (running_ > 0 ||
                (running_ == 0 && delta_.max_block_weight_now() < flush_base_max_)) {
                if (!flush()) {
                    flush_ok = false;
                    break;
                }
            }
            expand(v);
        }
        release_unmoved();
        return flush_ok;
    }

private:
    void push_best_move(NodeId v) {
        const auto [g, t] = best_move(v, delta_.part(v));
        if (t != kNoBlock) heap_.push({g, v});
    }

    std::pair<Gain, BlockId> best_move(NodeId v, BlockId from) const {
        Gain best_gain = 0;
        BlockId best_target = kNoBlock;
        for (BlockId t = 0; t < k_; ++t) {
            if (t == from) continue;
            const Gain g = delta_.gain(v, t);
            if (best_target == kNoBlock || g > best_gain ||
                (g == best_gain && delta_.block_weight(t) < delta_.block_weight(best_target)))
                best_gain = g, best_target = t;
        }
        return {best_gain, best_target};
    }

    bool flush() {
        std::lock_guard<std::mutex> lk(log_mutex_);
        bool complete = true;
        for (const Move& m : pending_) {
            const auto outcome = ph_.move_node(m.node, m.from, m.to);
            if (!outcome.moved) {
                complete = false;
                break;
            }
            log_.push_back(m);
            moved_global_.push_back(m.node);
        }
        pending_.clear();
        delta_.clear();
        running_ = 0;
        best_running_ = 0;
        flush_base_max_ = delta_.max_block_weight_now();
        return complete;
    }

    void expand(NodeId v) {
        for (NetId e : ph_.hypergraph().incident_nets(v)) {
            for (NodeId u : ph_.hypergraph().pins(e)) {
                if (u == v) continue;
                if (owner_[u].exchange(1, std::memory_order_acq_rel) != 0) continue;
                touched_.push_back(u);
                push_best_move(u);
            }
        }
    }

    void release_unmoved() {
        for (NodeId v : touched_) {
            bool moved = false;
            for (NodeId m : moved_global_)
                if (m == v) {
                    moved = true;
                    break;
                }
            if (!moved) owner_[v].store(0, std::memory_order_release);
        }
        touched_.clear();
    }

    PartitionedHypergraph& ph_;
    GainTable& gains_;
    const FmConfig& cfg_;
    std::vector<std::atomic<std::uint8_t>>& owner_;
    std::vector<Move>& log_;
    std::mutex& log_mutex_;
    DeltaPartition delta_;
    std::int32_t k_;
    std::priority_queue<std::pair<Gain, NodeId>> heap_;
    std::vector<Move> pending_;
    std::vector<NodeId> touched_;
    std::vector<NodeId> moved_global_;
    Gain running_ = 0;
    Gain best_running_ = 0;
    Weight flush_base_max_ = 0;
};

}  // namespace detail

// Parallel localized FM. Each round seeds searches from the shuffled boundary
// nodes; node ownership makes every node the concern of at most one search
// per round, and nodes that actually moved stay owned until the round ends,
// so the round's move log touches each node at most once. At the round
// boundary the log's gains are recomputed exactly and the tail beyond the
// best prefix is reverted, which makes rounds monotone in connectivity.
inline FmReport fm_refinement(PartitionedHypergraph& ph, GainTable& gains,
                              const FmConfig& cfg = {}) {
    const Hypergraph& h = ph.hypergraph();
    const std::size_t n = h.num_nodes();
    FmReport report;
    if (ph.k() < 2 || n == 0) return report;

    std::vector<std::atomic<std::uint8_t>> owner(n);
    for (int round = 0; round < cfg.max_rounds; ++round) {
        const Gain before = ph.km1();
        std::vector<NodeId> seeds;
        for (NodeId v = 0; v < static_cast<NodeId>(n); ++v)
            if (ph.is_boundary_node(v)) seeds.push_back(v);
        if (seeds.empty()) break;
        Rng rng = make_rng(seed_with(cfg.seed, 0xf33d, static_cast<std::uint64_t>(round)));
        shuffle_vector(seeds, rng);

        for (auto& o : owner) o.store(0, std::memory_order_relaxed);
        std::atomic<std::size_t> cursor{0};
        std::vector<Move> log;
        std::mutex log_mutex;

        par::run(cfg.threads, [&](int) {
            detail::LocalizedSearch search(ph, gains, cfg, owner, log, log_mutex);
            std::vector<NodeId> batch;
            while (true) {
                batch.clear();
                bool exhausted = false;
                while (batch.size() < static_cast<std::size_t>(cfg.seeds_per_search)) {
                    const std::size_t i = cursor.fetch_add(1, std::memory_order_relaxed);
                    if (i >= seeds.size()) {
                        exhausted = true;
                        break;
                    }
                    const NodeId v = seeds[i];
                    if (!ph.is_boundary_node(v)) continue;
                    if (owner[v].exchange(1, std::memory_order_acq_rel) != 0) continue;
                    batch.push_back(v);
                }
                if (!batch.empty()) search.run(batch);
                if (exhausted) break;
            }
        });

        MoveSequence seq;
        seq.moves = std::move(log);
        const std::vector<BlockId> part_after = ph.partition_snapshot();
        seq.gains = recalculate_gains(h, part_after, seq.moves, ph.k(), cfg.threads);
        const std::size_t keep = best_prefix(seq.gains);
        revert_to_prefix(ph, seq.moves, keep);
        gains.rebuild_benefits(cfg.threads);

        ++report.rounds;
        const Gain after = ph.km1();
        report.improvement += before - after;
        if (cfg.capture_rounds != nullptr) {
            seq.moves.resize(keep);
            seq.gains.resize(keep);
            cfg.capture_rounds->push_back(std::move(seq));
        }
        if (after >= before) break;
    }
    return report;
}

}  // namespace hyperpart

#endif
