// partitioned_hypergraph.hpp - k-way partition state: pin counts, connectivity sets, moves
#ifndef HYPERPART_PARTITIONED_HYPERGRAPH_HPP
#define HYPERPART_PARTITIONED_HYPERGRAPH_HPP

#include <atomic>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hypergraph.hpp"
#include "parallel/parallel.hpp"
#include "types.hpp"

namespace hyperpart {

// Per-net, per-block pin counts Φ(e,V_i). Writers must hold the net's lock;
// readers are lock-free. The packed variant stores each entry in
// ceil(log2(max|e|+1)) bits, the plain variant in one int32 per entry.
class PinCounts {
public:
    void initialize(NetId num_nets, std::int32_t k, std::size_t max_net_size, bool packed) {
        k_ = k;
        packed_ = packed;
        if (packed_) {
            bits_ = 1;
            while ((std::size_t{1} << bits_) < max_net_size + 1) ++bits_;
            slots_per_word_ = 64 / bits_;
            words_per_net_ = (static_cast<std::size_t>(k) + slots_per_word_ - 1) / slots_per_word_;
            words_ = std::vector<std::atomic<std::uint64_t>>(
                static_cast<std::size_t>(num_nets) * words_per_net_);
            for (auto& w : words_) w.store(0, std::memory_order_relaxed);
        } else {
            plain_ = std::vector<std::atomic<std::int32_t>>(static_cast<std::size_t>(num_nets) *
                                                            k);
            for (auto& c : plain_) c.store(0, std::memory_order_relaxed);
        }
    }

    std::int32_t get(NetId e, BlockId i) const {
        if (!packed_) return plain_[index(e, i)].load(std::memory_order_relaxed);
        const auto [word, shift] = locate(e, i);
        return static_cast<std::int32_t>((words_[word].load(std::memory_order_relaxed) >> shift) &
                                         mask());
    }

    // Writers (under the net lock); return the value after the update.
    std::int32_t increment(NetId e, BlockId i) { return add(e, i, 1); }
    std::int32_t decrement(NetId e, BlockId i) { return add(e, i, -1); }

private:
    std::size_t index(NetId e, BlockId i) const {
        return static_cast<std::size_t>(e) * k_ + static_cast<std::size_t>(i);
    }
    std::pair<std::size_t, unsigned> locate(NetId e, BlockId i) const {
        const std::size_t word = static_cast<std::size_t>(e) * words_per_net_ +
                                 static_cast<std::size_t>(i) / slots_per_word_;
        const unsigned shift = static_cast<unsigned>(i % slots_per_word_) * bits_;
        return {word, shift};
    }
    std::uint64_t mask() const { return (std::uint64_t{1} << bits_) - 1; }

    std::int32_t add(NetId e, BlockId i, std::int32_t delta) {
        if (!packed_) {
            return plain_[index(e, i)].fetch_add(delta, std::memory_order_relaxed) + delta;
        }
        const auto [word, shift] = locate(e, i);
        const std::uint64_t old = words_[word].load(std::memory_order_relaxed);
        const auto value =
            static_cast<std::int32_t>((old >> shift) & mask()) + delta;
        const std::uint64_t cleared = old & ~(mask() << shift);
        words_[word].store(cleared | (static_cast<std::uint64_t>(value) << shift),
                           std::memory_order_relaxed);
        return value;
    }

    bool packed_ = false;
    std::int32_t k_ = 0;
    unsigned bits_ = 0;
    std::size_t slots_per_word_ = 0;
    std::size_t words_per_net_ = 0;
    std::vector<std::atomic<std::int32_t>> plain_;
    std::vector<std::atomic<std::uint64_t>> words_;
};

// Connectivity sets Λ(e) as k-bit sets, one per net.
class ConnectivitySets {
public:
    void initialize(NetId num_nets, std::int32_t k) {
        words_per_net_ = (static_cast<std::size_t>(k) + 63) / 64;
        bits_ = std::vector<std::atomic<std::uint64_t>>(static_cast<std::size_t>(num_nets) *
                                                        words_per_net_);
        for (auto& w : bits_) w.store(0, std::memory_order_relaxed);
    }

    void set(NetId e, BlockId i) {
        word(e, i).fetch_or(bit(i), std::memory_order_relaxed);
    }
    void clear(NetId e, BlockId i) {
        word(e, i).fetch_and(~bit(i), std::memory_order_relaxed);
    }
    bool contains(NetId e, BlockId i) const {
        return word(e, i).load(std::memory_order_relaxed) & bit(i);
    }

    std::int32_t connectivity(NetId e) const {
        std::int32_t lambda = 0;
        for (std::size_t w = 0; w < words_per_net_; ++w)
            lambda += std::popcount(
                bits_[e * words_per_net_ + w].load(std::memory_order_relaxed));
        return lambda;
    }

    // Visits the blocks of Λ(e) in ascending id over a word snapshot.
    template <typename F>
    void for_each_block(NetId e, F&& f) const {
        for (std::size_t w = 0; w < words_per_net_; ++w) {
            std::uint64_t bits = bits_[e * words_per_net_ + w].load(std::memory_order_relaxed);
            while (bits != 0) {
                const int b = std::countr_zero(bits);
                f(static_cast<BlockId>(w * 64 + b));
                bits &= bits - 1;
            }
        }
    }

private:
    std::atomic<std::uint64_t>& word(NetId e, BlockId i) {
        return bits_[e * words_per_net_ + static_cast<std::size_t>(i) / 64];
    }
    const std::atomic<std::uint64_t>& word(NetId e, BlockId i) const {
        return bits_[e * words_per_net_ + static_cast<std::size_t>(i) / 64];
    }
    static std::uint64_t bit(BlockId i) { return std::uint64_t{1} << (i % 64); }

    std::size_t words_per_net_ = 0;
    std::vector<std::atomic<std::uint64_t>> bits_;
};

// Receives the pin-count transition of one net during a move; implemented by
// the gain table. phi values are the counts after the update.
struct GainUpdateHook {
    virtual ~GainUpdateHook() = default;
    virtual void on_pin_update(NetId e, std::int32_t phi_s_after, std::int32_t phi_t_after,
                               BlockId s, BlockId t) = 0;
};

struct MoveOutcome {
    bool moved = false;
    Gain delta = 0;  // attributed gain; positive = connectivity reduction
};

// Partition state over an immutable hypergraph. Concurrent moves are safe:
// block weights use atomic reserve/rollback, the paired pin-count updates of
// one net run under that net's spinlock, and the running connectivity value
// is maintained from attributed gains (their sum telescopes to the true
// objective change).
class PartitionedHypergraph {
public:
    PartitionedHypergraph(const Hypergraph& h, std::int32_t k, std::span<const BlockId> part,
                          double epsilon, bool packed_pin_counts = false)
        : PartitionedHypergraph(h, k, part,
                                std::vector<Weight>(
                                    k, hyperpart::max_block_weight(h.total_node_weight(), k,
                                                                   epsilon)),
                                packed_pin_counts) {}

    PartitionedHypergraph(const Hypergraph& h, std::int32_t k, std::span<const BlockId> part,
                          std::vector<Weight> max_block_weights, bool packed_pin_counts = false)
        : hg_(&h), k_(k), max_block_weight_(std::move(max_block_weights)) {
        if (k_ < 1) throw std::invalid_argument("k must be at least 1");
        if (max_block_weight_.size() != static_cast<std::size_t>(k_))
            throw std::invalid_argument("need one max block weight per block");
        packed_ = packed_pin_counts;
        part_ = std::vector<std::atomic<BlockId>>(h.num_nodes());
        block_weight_ = std::vector<std::atomic<Weight>>(k_);
        net_locks_ = std::vector<SpinLock>(h.num_nets());
        set_partition(part);
    }

    // Recomputes Φ, Λ, block weights and the tracked objective from scratch.
    void set_partition(std::span<const BlockId> part) {
        if (part.size() != hg_->num_nodes())
            throw std::invalid_argument("partition size does not match node count");
        for (BlockId b : part)
            if (b < 0 || b >= k_) throw std::invalid_argument("block id out of range");
        for (NodeId v = 0; v < hg_->num_nodes(); ++v)
            part_[v].store(part[v], std::memory_order_relaxed);
        for (BlockId i = 0; i < k_; ++i) block_weight_[i].store(0, std::memory_order_relaxed);
        for (NodeId v = 0; v < hg_->num_nodes(); ++v)
            block_weight_[part[v]].fetch_add(hg_->node_weight(v), std::memory_order_relaxed);

        pin_counts_.initialize(hg_->num_nets(), k_, std::max<std::size_t>(1, hg_->max_net_size()),
                               packed());
        connectivity_sets_.initialize(hg_->num_nets(), k_);
        Weight km1 = 0;
        for (NetId e = 0; e < hg_->num_nets(); ++e) {
            for (NodeId v : hg_->pins(e)) {
                if (pin_counts_.increment(e, part[v]) == 1) connectivity_sets_.set(e, part[v]);
            }
            km1 += (connectivity_sets_.connectivity(e) - 1) * hg_->net_weight(e);
        }
        km1_.store(km1, std::memory_order_relaxed);
    }

    const Hypergraph& hypergraph() const { return *hg_; }
    std::int32_t k() const { return k_; }
    BlockId part(NodeId v) const { return part_[v].load(std::memory_order_relaxed); }
    Weight block_weight(BlockId i) const {
        return block_weight_[i].load(std::memory_order_relaxed);
    }
    Weight max_block_weight(BlockId i) const { return max_block_weight_[i]; }
    const std::vector<Weight>& max_block_weights() const { return max_block_weight_; }
    std::int32_t pin_count(NetId e, BlockId i) const { return pin_counts_.get(e, i); }
    std::int32_t connectivity(NetId e) const { return connectivity_sets_.connectivity(e); }
    bool net_contains_block(NetId e, BlockId i) const {
        return connectivity_sets_.contains(e, i);
    }
    template <typename F>
    void for_each_connected_block(NetId e, F&& f) const {
        connectivity_sets_.for_each_block(e, std::forward<F>(f));
    }

    bool is_boundary_node(NodeId v) const {
        for (NetId e : hg_->incident_nets(v))
            if (connectivity(e) > 1) return true;
        return false;
    }

    bool balanced() const {
        for (BlockId i = 0; i < k_; ++i)
            if (block_weight(i) > max_block_weight_[i]) return false;
        return true;
    }

    // Tracked connectivity objective (km1), exact at quiescent points.
    Weight km1() const { return km1_.load(std::memory_order_relaxed); }

    Weight cut() const {
        Weight total = 0;
        for (NetId e = 0; e < hg_->num_nets(); ++e)
            if (connectivity(e) > 1) total += hg_->net_weight(e);
        return total;
    }

    Weight objective(Objective metric) const {
        switch (metric) {
            case Objective::kCut: return cut();
            case Objective::kKm1: return km1();
            case Objective::kSoed: return km1() + cut();
        }
        return 0;
    }

    std::vector<BlockId> partition_snapshot() const {
        std::vector<BlockId> part(hg_->num_nodes());
        for (NodeId v = 0; v < hg_->num_nodes(); ++v) part[v] = this->part(v);
        return part;
    }

    void attach_gain_hook(GainUpdateHook* hook) { hook_ = hook; }
    GainUpdateHook* gain_hook() const { return hook_; }

    // Balance-checked move. A rejected move leaves the state untouched and is
    // distinguishable from a zero-gain success.
    MoveOutcome move_node(NodeId u, BlockId from, BlockId to) {
        check_move_contract(u, from, to);
        const Weight w = hg_->node_weight(u);
        const Weight after = block_weight_[to].fetch_add(w, std::memory_order_relaxed) + w;
        if (after > max_block_weight_[to]) {
            block_weight_[to].fetch_sub(w, std::memory_order_relaxed);
            return {false, 0};
        }
        block_weight_[from].fetch_sub(w, std::memory_order_relaxed);
        return {true, apply_move(u, from, to)};
    }

    // Move without the balance check; used for reverts and deterministic
    // commits whose feasibility was established by the caller.
    Gain force_move(NodeId u, BlockId from, BlockId to) {
        check_move_contract(u, from, to);
        const Weight w = hg_->node_weight(u);
        block_weight_[to].fetch_add(w, std::memory_order_relaxed);
        block_weight_[from].fetch_sub(w, std::memory_order_relaxed);
        return apply_move(u, from, to);
    }

    // Recomputes all derived state from part[] and compares; test validator.
    bool consistent() const {
        std::vector<Weight> weights(k_, 0);
        for (NodeId v = 0; v < hg_->num_nodes(); ++v) {
            const BlockId b = part(v);
            if (b < 0 || b >= k_) return false;
            weights[b] += hg_->node_weight(v);
        }
        for (BlockId i = 0; i < k_; ++i)
            if (weights[i] != block_weight(i)) return false;

        Weight km1 = 0;
        std::vector<std::int32_t> phi(k_);
        for (NetId e = 0; e < hg_->num_nets(); ++e) {
            std::fill(phi.begin(), phi.end(), 0);
            for (NodeId v : hg_->pins(e)) ++phi[part(v)];
            std::int32_t lambda = 0;
            for (BlockId i = 0; i < k_; ++i) {
                if (phi[i] != pin_count(e, i)) return false;
                if ((phi[i] > 0) != net_contains_block(e, i)) return false;
                if (phi[i] > 0) ++lambda;
            }
            if (lambda != connectivity(e)) return false;
            km1 += (lambda - 1) * hg_->net_weight(e);
        }
        return km1 == this->km1();
    }

private:
    bool packed() const { return packed_; }

    void check_move_contract(NodeId u, BlockId from, BlockId to) const {
        if (from == to || from < 0 || to < 0 || from >= k_ || to >= k_)
            throw std::logic_error("move requires two distinct valid blocks");
        if (part(u) != from) throw std::logic_error("node is not in the claimed source block");
    }

    Gain apply_move(NodeId u, BlockId from, BlockId to) {
        part_[u].store(to, std::memory_order_relaxed);
        Gain delta = 0;
        for (NetId e : hg_->incident_nets(u)) {
            std::int32_t phi_s_after, phi_t_after;
            {
                net_locks_[e].lock();
                phi_s_after = pin_counts_.decrement(e, from);
                phi_t_after = pin_counts_.increment(e, to);
                if (phi_s_after == 0) connectivity_sets_.clear(e, from);
                if (phi_t_after == 1) connectivity_sets_.set(e, to);
                net_locks_[e].unlock();
            }
            if (phi_s_after == 0) delta += hg_->net_weight(e);
            if (phi_t_after == 1) delta -= hg_->net_weight(e);
            if (hook_ != nullptr) hook_->on_pin_update(e, phi_s_after, phi_t_after, from, to);
        }
        km1_.fetch_sub(delta, std::memory_order_relaxed);
        return delta;
    }

    const Hypergraph* hg_;
    std::int32_t k_;
    std::vector<Weight> max_block_weight_;
    std::vector<std::atomic<BlockId>> part_;
    std::vector<std::atomic<Weight>> block_weight_;
    PinCounts pin_counts_;
    ConnectivitySets connectivity_sets_;
    std::vector<SpinLock> net_locks_;
    std::atomic<Weight> km1_{0};
    GainUpdateHook* hook_ = nullptr;
    bool packed_ = false;
};

}  // namespace hyperpart

#endif
