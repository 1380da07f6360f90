// gain_table.hpp - benefit/penalty table with constant-time gain lookup
#ifndef HYPERPART_GAIN_TABLE_HPP
#define HYPERPART_GAIN_TABLE_HPP

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "parallel/parallel.hpp"
#include "partitioned_hypergraph.hpp"
#include "types.hpp"

namespace hyperpart {

// Maintains b(u) = ω({e ∈ I(u) | Φ(e, part[u]) = 1}) and
// p(u, V_t) = ω({e ∈ I(u) | Φ(e, V_t) = 0}), so gain(u, t) = b(u) − p(u, t).
//
// Incremental maintenance follows the four pin-count transition cases. Under
// concurrent moves the penalties stay exact; benefits of nodes moved in the
// current round may go stale (their entries are not read again within the
// round) and are restored by rebuild_benefits at the round boundary.
class GainTable : public GainUpdateHook {
public:
    explicit GainTable(PartitionedHypergraph& ph) : ph_(&ph), hg_(&ph.hypergraph()), k_(ph.k()) {
        benefit_ = std::vector<std::atomic<Gain>>(hg_->num_nodes());
        penalty_ =
            std::vector<std::atomic<Gain>>(static_cast<std::size_t>(hg_->num_nodes()) * k_);
        rebuild();
        ph.attach_gain_hook(this);
    }

    ~GainTable() override {
        if (ph_->gain_hook() == this) ph_->attach_gain_hook(nullptr);
    }

    GainTable(const GainTable&) = delete;
    GainTable& operator=(const GainTable&) = delete;

    Gain benefit(NodeId u) const { return benefit_[u].load(std::memory_order_relaxed); }
    Gain penalty(NodeId u, BlockId t) const {
        return penalty_[pindex(u, t)].load(std::memory_order_relaxed);
    }

    Gain gain(NodeId u, BlockId t) const {
        if (t == ph_->part(u)) throw std::logic_error("gain toward the node's own block");
        return benefit(u) - penalty(u, t);
    }

    // Full recomputation from pin counts; also the oracle in tests.
    void rebuild(int threads = 1) {
        par::for_each(threads, hg_->num_nodes(), [&](std::size_t v) {
            rebuild_node(static_cast<NodeId>(v), true);
        });
    }

    // Benefit-only recomputation, used at round boundaries where penalties
    // are exact but benefits of moved nodes may be stale.
    void rebuild_benefits(int threads = 1) {
        par::for_each(threads, hg_->num_nodes(), [&](std::size_t v) {
            rebuild_node(static_cast<NodeId>(v), false);
        });
    }

    // The four update cases; phi values are post-update counts of net e.
    void on_pin_update(NetId e, std::int32_t phi_s_after, std::int32_t phi_t_after, BlockId s,
                       BlockId t) override {
        const Weight w = hg_->net_weight(e);
        if (phi_s_after == 0) {
            count_firing(e);
            for (NodeId v : hg_->pins(e))
                penalty_[pindex(v, s)].fetch_add(w, std::memory_order_relaxed);
        }
        if (phi_s_after == 1) {
            count_firing(e);
            for (NodeId v : hg_->pins(e))
                if (ph_->part(v) == s) benefit_[v].fetch_add(w, std::memory_order_relaxed);
        }
        if (phi_t_after == 1) {
            count_firing(e);
            for (NodeId v : hg_->pins(e))
                penalty_[pindex(v, t)].fetch_sub(w, std::memory_order_relaxed);
        }
        if (phi_t_after == 2) {
            count_firing(e);
            for (NodeId v : hg_->pins(e))
                if (ph_->part(v) == t) benefit_[v].fetch_sub(w, std::memory_order_relaxed);
        }
    }

    // Optional per-net firing counters for the work-bound check in tests.
    void set_firing_counters(std::vector<std::atomic<std::uint64_t>>* counters) {
        firing_counters_ = counters;
    }

private:
    std::size_t pindex(NodeId u, BlockId t) const {
        return static_cast<std::size_t>(u) * k_ + static_cast<std::size_t>(t);
    }

    void rebuild_node(NodeId v, bool penalties_too) {
        Gain b = 0;
        Weight incident_total = 0;
        for (NetId e : hg_->incident_nets(v)) {
            incident_total += hg_->net_weight(e);
            if (ph_->pin_count(e, ph_->part(v)) == 1) b += hg_->net_weight(e);
        }
        benefit_[v].store(b, std::memory_order_relaxed);
        if (!penalties_too) return;
        for (BlockId i = 0; i < k_; ++i)
            penalty_[pindex(v, i)].store(incident_total, std::memory_order_relaxed);
        for (NetId e : hg_->incident_nets(v)) {
            const Weight w = hg_->net_weight(e);
            ph_->for_each_connected_block(e, [&](BlockId i) {
                penalty_[pindex(v, i)].fetch_sub(w, std::memory_order_relaxed);
            });
        }
    }

    void count_firing(NetId e) {
        if (firing_counters_ != nullptr)
            (*firing_counters_)[e].fetch_add(1, std::memory_order_relaxed);
    }

    PartitionedHypergraph* ph_;
    const Hypergraph* hg_;
    std::int32_t k_;
    std::vector<std::atomic<Gain>> benefit_;
    std::vector<std::atomic<Gain>> penalty_;
    std::vector<std::atomic<std::uint64_t>>* firing_counters_ = nullptr;
};

}  // namespace hyperpart

#endif
