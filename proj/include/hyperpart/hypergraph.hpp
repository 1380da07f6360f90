// hypergraph.hpp - immutable weighted hypergraph, subhypergraph extraction, objectives
#ifndef HYPERPART_HYPERGRAPH_HPP
#define HYPERPART_HYPERGRAPH_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"

namespace hyperpart {

enum class DuplicatePinPolicy { kReject, kDeduplicate };

// Static hypergraph stored as two adjacency arrays: pins grouped per net and
// incident nets grouped per node. Immutable after construction; concurrent
// reads are safe. Pin lists are kept sorted by node id so identical-net
// detection and iteration order are deterministic.
class Hypergraph {
public:
    Hypergraph() = default;

    static Hypergraph build(NodeId num_nodes, const std::vector<std::vector<NodeId>>& nets,
                            const std::vector<Weight>& node_weights = {},
                            const std::vector<Weight>& net_weights = {},
                            DuplicatePinPolicy policy = DuplicatePinPolicy::kReject) {
        Hypergraph h;
        h.num_nodes_ = num_nodes;
        if (!node_weights.empty() && node_weights.size() != num_nodes)
            throw std::invalid_argument("node weight count does not match node count");
        if (!net_weights.empty() && net_weights.size() != nets.size())
            throw std::invalid_argument("net weight count does not match net count");

        h.net_offsets_.reserve(nets.size() + 1);
        h.net_offsets_.push_back(0);
        for (std::size_t e = 0; e < nets.size(); ++e) {
            std::vector<NodeId> pins = nets[e];
            if (pins.empty())
                throw std::invalid_argument("net " + std::to_string(e) + " has no pins");
            for (NodeId v : pins) {
                if (v >= num_nodes)
                    throw std::invalid_argument("net " + std::to_string(e) + ": pin id " +
                                                std::to_string(v) + " out of range");
            }
            std::sort(pins.begin(), pins.end());
            auto dup = std::adjacent_find(pins.begin(), pins.end());
            if (dup != pins.end()) {
                if (policy == DuplicatePinPolicy::kReject)
                    throw std::invalid_argument("net " + std::to_string(e) +
                                                " contains duplicate pin " + std::to_string(*dup));
                pins.erase(std::unique(pins.begin(), pins.end()), pins.end());
            }
            h.pins_.insert(h.pins_.end(), pins.begin(), pins.end());
            h.net_offsets_.push_back(h.pins_.size());
        }
        h.num_nets_ = static_cast<NetId>(nets.size());

        h.node_weight_.assign(num_nodes, 1);
        if (!node_weights.empty()) h.node_weight_ = node_weights;
        h.net_weight_.assign(h.num_nets_, 1);
        if (!net_weights.empty()) h.net_weight_ = net_weights;
        for (Weight w : h.node_weight_)
            if (w <= 0) throw std::invalid_argument("node weights must be strictly positive");
        for (Weight w : h.net_weight_)
            if (w <= 0) throw std::invalid_argument("net weights must be strictly positive");
        h.total_node_weight_ =
            std::accumulate(h.node_weight_.begin(), h.node_weight_.end(), Weight{0});

        h.build_incidence();
        return h;
    }

    NodeId num_nodes() const { return num_nodes_; }
    NetId num_nets() const { return num_nets_; }
    std::size_t num_pins() const { return pins_.size(); }
    Weight total_node_weight() const { return total_node_weight_; }

    std::span<const NodeId> pins(NetId e) const {
        return {pins_.data() + net_offsets_[e], net_offsets_[e + 1] - net_offsets_[e]};
    }
    std::span<const NetId> incident_nets(NodeId v) const {
        return {incident_nets_.data() + node_offsets_[v],
                node_offsets_[v + 1] - node_offsets_[v]};
    }
    std::size_t net_size(NetId e) const { return net_offsets_[e + 1] - net_offsets_[e]; }
    std::size_t degree(NodeId v) const { return node_offsets_[v + 1] - node_offsets_[v]; }
    Weight node_weight(NodeId v) const { return node_weight_[v]; }
    Weight net_weight(NetId e) const { return net_weight_[e]; }

    std::size_t max_net_size() const {
        std::size_t m = 0;
        for (NetId e = 0; e < num_nets_; ++e) m = std::max(m, net_size(e));
        return m;
    }

    // True iff incident_nets is exactly the transpose of pins.
    bool dual_consistent() const {
        std::vector<std::vector<NetId>> expect(num_nodes_);
        for (NetId e = 0; e < num_nets_; ++e)
            for (NodeId v : pins(e)) expect[v].push_back(e);
        for (NodeId v = 0; v < num_nodes_; ++v) {
            auto inc = incident_nets(v);
            if (inc.size() != expect[v].size()) return false;
            if (!std::equal(inc.begin(), inc.end(), expect[v].begin())) return false;
        }
        std::size_t total = 0;
        for (NodeId v = 0; v < num_nodes_; ++v) total += degree(v);
        return total == pins_.size();
    }

private:
    void build_incidence() {
        node_offsets_.assign(num_nodes_ + 1, 0);
        for (NodeId v : pins_) ++node_offsets_[v + 1];
        for (NodeId v = 0; v < num_nodes_; ++v) node_offsets_[v + 1] += node_offsets_[v];
        incident_nets_.resize(pins_.size());
        std::vector<std::size_t> cursor(node_offsets_.begin(), node_offsets_.end() - 1);
        for (NetId e = 0; e < num_nets_; ++e)
            for (NodeId v : pins(e)) incident_nets_[cursor[v]++] = e;
    }

    NodeId num_nodes_ = 0;
    NetId num_nets_ = 0;
    std::vector<std::size_t> net_offsets_;
    std::vector<NodeId> pins_;
    std::vector<std::size_t> node_offsets_;
    std::vector<NetId> incident_nets_;
    std::vector<Weight> node_weight_;
    std::vector<Weight> net_weight_;
    Weight total_node_weight_ = 0;
};

inline Hypergraph build_hypergraph(NodeId num_nodes, const std::vector<std::vector<NodeId>>& nets,
                                   const std::vector<Weight>& node_weights = {},
                                   const std::vector<Weight>& net_weights = {},
                                   DuplicatePinPolicy policy = DuplicatePinPolicy::kReject) {
    return Hypergraph::build(num_nodes, nets, node_weights, net_weights, policy);
}

struct Subhypergraph {
    Hypergraph hg;
    std::vector<NodeId> to_sub;       // original id -> sub id, kInvalidNode if absent
    std::vector<NodeId> to_original;  // sub id -> original id
};

// Induced subhypergraph on the given node subset. Nets become e ∩ V' and keep
// the original net weight; empty intersections are dropped, single-pin
// intersections too when strip_trivial is set. Sub ids follow ascending
// original id.
inline Subhypergraph extract_subhypergraph(const Hypergraph& h, std::vector<NodeId> subset,
                                           bool strip_trivial) {
    if (subset.empty()) throw std::invalid_argument("subhypergraph of empty node set");
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());

    Subhypergraph out;
    out.to_sub.assign(h.num_nodes(), kInvalidNode);
    out.to_original = subset;
    for (NodeId i = 0; i < subset.size(); ++i) {
        if (subset[i] >= h.num_nodes()) throw std::invalid_argument("subset node id out of range");
        out.to_sub[subset[i]] = i;
    }

    std::vector<std::vector<NodeId>> nets;
    std::vector<Weight> net_weights;
    std::vector<NodeId> current;
    for (NetId e = 0; e < h.num_nets(); ++e) {
        current.clear();
        for (NodeId v : h.pins(e))
            if (out.to_sub[v] != kInvalidNode) current.push_back(out.to_sub[v]);
        const std::size_t min_size = strip_trivial ? 2 : 1;
        if (current.size() >= min_size) {
            nets.push_back(current);
            net_weights.push_back(h.net_weight(e));
        }
    }
    std::vector<Weight> node_weights(subset.size());
    for (NodeId i = 0; i < subset.size(); ++i) node_weights[i] = h.node_weight(subset[i]);
    out.hg = Hypergraph::build(static_cast<NodeId>(subset.size()), nets, node_weights,
                               net_weights);
    return out;
}

// Number of distinct blocks among the pins of net e.
inline std::int32_t net_connectivity(const Hypergraph& h, NetId e,
                                     std::span<const BlockId> part, std::int32_t k,
                                     std::vector<std::uint8_t>& scratch) {
    std::int32_t lambda = 0;
    for (NodeId v : h.pins(e)) {
        const BlockId b = part[v];
        if (b < 0 || b >= k) throw std::invalid_argument("node without valid block id");
        if (!scratch[b]) {
            scratch[b] = 1;
            ++lambda;
        }
    }
    for (NodeId v : h.pins(e)) scratch[part[v]] = 0;
    return lambda;
}

inline Weight compute_objective(const Hypergraph& h, std::span<const BlockId> part,
                                std::int32_t k, Objective metric) {
    if (part.size() != h.num_nodes())
        throw std::invalid_argument("partition size does not match node count");
    std::vector<std::uint8_t> scratch(k, 0);
    Weight total = 0;
    for (NetId e = 0; e < h.num_nets(); ++e) {
        const std::int32_t lambda = net_connectivity(h, e, part, k, scratch);
        if (lambda <= 1) continue;
        switch (metric) {
            case Objective::kCut: total += h.net_weight(e); break;
            case Objective::kKm1: total += (lambda - 1) * h.net_weight(e); break;
            case Objective::kSoed: total += lambda * h.net_weight(e); break;
        }
    }
    return total;
}

inline Weight compute_objective(const Hypergraph& h, const std::vector<BlockId>& part,
                                std::int32_t k, Objective metric) {
    return compute_objective(h, std::span<const BlockId>(part), k, metric);
}

// max_i c(V_i) / ceil(c(V)/k) - 1; the "balanced" predicate compares against
// L_max instead, this is the reported number.
inline double compute_imbalance(const Hypergraph& h, std::span<const BlockId> part,
                                std::int32_t k) {
    std::vector<Weight> weight(k, 0);
    for (NodeId v = 0; v < h.num_nodes(); ++v) {
        if (part[v] < 0 || part[v] >= k)
            throw std::invalid_argument("node without valid block id");
        weight[part[v]] += h.node_weight(v);
    }
    const Weight ceil_avg = (h.total_node_weight() + k - 1) / k;
    const Weight heaviest = *std::max_element(weight.begin(), weight.end());
    return static_cast<double>(heaviest) / static_cast<double>(ceil_avg) - 1.0;
}

}  // namespace hyperpart

#endif
