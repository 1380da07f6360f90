// coarsener.hpp - heavy-edge clustering, contraction, identical-net merging, hierarchy
#ifndef HYPERPART_COARSENING_COARSENER_HPP
#define HYPERPART_COARSENING_COARSENER_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "../deterministic/subround.hpp"
#include "../hypergraph.hpp"
#include "../parallel/parallel.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

// Bounded linear-probing scratch map for rating aggregation. Starts at 2^15
// slots and grows once a third of them fill. Keys are iterated in insertion
// order, which keeps selection deterministic for a fixed processing order.
class RatingMap {
public:
    RatingMap() { allocate(std::size_t{1} << 15); }

    void add(NodeId key, double amount) {
        if ((keys_.size() + 1) * 3 > table_.size()) grow();
        std::size_t pos = slot(key);
        while (true) {
            if (table_[pos].key == kInvalidNode) {
                table_[pos] = {key, amount};
                keys_.push_back(key);
                return;
            }
            if (table_[pos].key == key) {
                table_[pos].value += amount;
                return;
            }
            pos = (pos + 1) & mask_;
        }
    }

    double get(NodeId key) const {
        std::size_t pos = slot(key);
        while (table_[pos].key != kInvalidNode) {
            if (table_[pos].key == key) return table_[pos].value;
            pos = (pos + 1) & mask_;
        }
        return 0.0;
    }

    const std::vector<NodeId>& keys() const { return keys_; }

    void clear() {
        for (NodeId key : keys_) {
            std::size_t pos = slot(key);
            while (table_[pos].key != key) pos = (pos + 1) & mask_;
            table_[pos].key = kInvalidNode;
        }
        keys_.clear();
    }

private:
    struct Entry {
        NodeId key = kInvalidNode;
        double value = 0.0;
    };

    void allocate(std::size_t capacity) {
        table_.assign(capacity, Entry{});
        mask_ = capacity - 1;
    }

    void grow() {
        std::vector<NodeId> keys = std::move(keys_);
        std::vector<Entry> old = std::move(table_);
        const std::size_t old_mask = mask_;
        allocate((old_mask + 1) * 2);
        keys_.clear();
        for (NodeId key : keys) {
            std::size_t pos = key & old_mask;
            while (old[pos].key != key) pos = (pos + 1) & old_mask;
            add(key, old[pos].value);
        }
    }

    std::size_t slot(NodeId key) const {
        return static_cast<std::size_t>(hash_mix(key)) & mask_;
    }

    std::vector<Entry> table_;
    std::vector<NodeId> keys_;
    std::size_t mask_ = 0;
};

enum class JoinState : std::uint8_t { kUnclustered, kJoining, kClustered };

// Clustering state of one coarsening pass. rep forms a forest of depth <= 1:
// rep[u] == u marks a root; members point directly at their root.
class Clustering {
public:
    Clustering(const Hypergraph& h, Weight c_max) : hg_(&h), c_max_(c_max) {
        const NodeId n = h.num_nodes();
        rep_.resize(n);
        state_ = std::vector<std::atomic<JoinState>>(n);
        cluster_weight_ = std::vector<std::atomic<Weight>>(n);
        proposed_ = std::vector<std::atomic<NodeId>>(n);
        for (NodeId v = 0; v < n; ++v) {
            rep_[v] = v;
            state_[v].store(JoinState::kUnclustered, std::memory_order_relaxed);
            cluster_weight_[v].store(h.node_weight(v), std::memory_order_relaxed);
            proposed_[v].store(kInvalidNode, std::memory_order_relaxed);
        }
        num_clusters_.store(n, std::memory_order_relaxed);
    }

    Clustering(Clustering&& other) noexcept
        : hg_(other.hg_),
          c_max_(other.c_max_),
          rep_(std::move(other.rep_)),
          state_(std::move(other.state_)),
          cluster_weight_(std::move(other.cluster_weight_)),
          proposed_(std::move(other.proposed_)),
          num_clusters_(other.num_clusters_.load(std::memory_order_relaxed)) {}

    NodeId rep(NodeId u) const {
        return std::atomic_ref(const_cast<NodeId&>(rep_[u])).load(std::memory_order_acquire);
    }
    JoinState state(NodeId u) const { return state_[u].load(std::memory_order_acquire); }
    Weight cluster_weight(NodeId u) const {
        return cluster_weight_[u].load(std::memory_order_relaxed);
    }
    Weight c_max() const { return c_max_; }
    std::int64_t num_clusters() const { return num_clusters_.load(std::memory_order_relaxed); }

    // Adds u to the cluster of v following the concurrent state machine:
    // claim u, stabilize v (clustered, freshly claimed, or resolved through
    // busy waiting with smallest-id cycle breaking), then adopt v's root if
    // the weight limit admits it.
    bool cluster_join(NodeId u, NodeId v) {
        if (u == v) return false;
        JoinState expected = JoinState::kUnclustered;
        if (!state_[u].compare_exchange_strong(expected, JoinState::kJoining)) return false;

        bool joined = false;
        expected = JoinState::kUnclustered;
        if (state(v) == JoinState::kClustered ||
            state_[v].compare_exchange_strong(expected, JoinState::kJoining)) {
            joined = adopt(u, rep(v));
        } else {
            // v is joining elsewhere: publish the intent, wait for it to
            // resolve, break ties when we close a cycle and hold its
            // smallest id.
            proposed_[u].store(v, std::memory_order_release);
            while (state(v) == JoinState::kJoining && state(u) == JoinState::kJoining) {
                if (smallest_in_cycle(u)) {
                    joined = adopt(u, rep(v));
                    break;
                }
                std::this_thread::yield();
            }
            if (!joined && state(u) == JoinState::kJoining &&
                state(v) == JoinState::kClustered) {
                joined = adopt(u, rep(v));
            }
            proposed_[u].store(kInvalidNode, std::memory_order_release);
        }
        // Silence the target before releasing ourselves. Waiters chained on u
        // resume once state[u] flips; flipping state[v] first guarantees v can
        // no longer adopt a new representative while others adopt v.
        state_[v].store(JoinState::kClustered, std::memory_order_release);
        state_[u].store(JoinState::kClustered, std::memory_order_release);
        return joined;
    }

    // Deterministic sequential commit used by the synchronous preset; the
    // caller guarantees root is a current root and the weight fits.
    void commit_member(NodeId u, NodeId root) {
        std::atomic_ref(rep_[u]).store(root, std::memory_order_release);
        cluster_weight_[root].fetch_add(hg_->node_weight(u), std::memory_order_relaxed);
        state_[u].store(JoinState::kClustered, std::memory_order_relaxed);
        state_[root].store(JoinState::kClustered, std::memory_order_relaxed);
        num_clusters_.fetch_sub(1, std::memory_order_relaxed);
    }

    bool depth_at_most_one() const {
        for (NodeId u = 0; u < rep_.size(); ++u)
            if (rep_[rep_[u]] != rep_[u]) return false;
        return true;
    }

private:
    bool adopt(NodeId u, NodeId root) {
        const Weight w = hg_->node_weight(u);
        const Weight before = cluster_weight_[root].fetch_add(w, std::memory_order_relaxed);
        if (before + w > c_max_) {
            cluster_weight_[root].fetch_sub(w, std::memory_order_relaxed);
            return false;
        }
        std::atomic_ref(rep_[u]).store(root, std::memory_order_release);
        num_clusters_.fetch_sub(1, std::memory_order_relaxed);
        return true;
    }

    // Follows the proposed-target chain from u; true iff it returns to u and
    // u carries the smallest id on the cycle.
    bool smallest_in_cycle(NodeId u) const {
        NodeId x = proposed_[u].load(std::memory_order_acquire);
        NodeId smallest = u;
        for (std::size_t steps = 0; steps < rep_.size(); ++steps) {
            if (x == kInvalidNode || state(x) != JoinState::kJoining) return false;
            if (x == u) return smallest == u;
            smallest = std::min(smallest, x);
            x = proposed_[x].load(std::memory_order_acquire);
        }
        return false;
    }

    const Hypergraph* hg_;
    Weight c_max_;
    std::vector<NodeId> rep_;
    std::vector<std::atomic<JoinState>> state_;
    std::vector<std::atomic<Weight>> cluster_weight_;
    std::vector<std::atomic<NodeId>> proposed_;
    std::atomic<std::int64_t> num_clusters_{0};
};

// Heavy-edge rating r(u,C) = Σ_{e ⊇ {u,v}, rep[v] ∈ C} ω(e)/(|e|−1) over
// clusters containing neighbors of u in the same community. Ties break
// uniformly at random, or toward the smallest cluster id when det_ties is
// set. Clusters that cannot take u's weight are not eligible.
inline std::optional<NodeId> rate_and_select(const Hypergraph& h, NodeId u,
                                             const Clustering& clustering,
                                             std::span<const NodeId> communities, Rng* rng,
                                             bool det_ties = false) {
    thread_local RatingMap ratings;
    ratings.clear();
    for (NetId e : h.incident_nets(u)) {
        const std::size_t size = h.net_size(e);
        if (size < 2) continue;
        const double share =
            static_cast<double>(h.net_weight(e)) / static_cast<double>(size - 1);
        for (NodeId v : h.pins(e)) {
            if (v == u) continue;
            if (!communities.empty() && communities[v] != communities[u]) continue;
            const NodeId root = clustering.rep(v);
            if (root == u) continue;
            ratings.add(root, share);
        }
    }

    const Weight w_u = h.node_weight(u);
    std::optional<NodeId> best;
    double best_rating = 0.0;
    std::size_t tie_count = 0;
    for (NodeId candidate : ratings.keys()) {
        if (clustering.cluster_weight(candidate) + w_u > clustering.c_max()) continue;
        const double rating = ratings.get(candidate);
        if (rating > best_rating) {
            best_rating = rating;
            best = candidate;
            tie_count = 1;
        } else if (rating == best_rating && best.has_value()) {
            if (det_ties) {
                if (candidate < *best) best = candidate;
            } else {
                ++tie_count;
                if (random_below(*rng, tie_count) == 0) best = candidate;
            }
        }
    }
    return best;
}

struct ClusteringConfig {
    Weight c_max = 0;
    double max_shrink_factor = 2.5;
    std::uint64_t seed = 0;
    int threads = 1;
    bool deterministic = false;
    int sub_rounds = 16;
};

// One clustering pass. Every node is visited once in a seeded order; each
// still-unclustered node rates its neighborhood and attempts one join. The
// pass stops joining once the projected cluster count falls below
// n/max_shrink_factor.
inline Clustering compute_clustering(const Hypergraph& h, std::span<const NodeId> communities,
                                     const ClusteringConfig& cfg) {
    Clustering clustering(h, cfg.c_max);
    const NodeId n = h.num_nodes();
    const auto min_clusters =
        static_cast<std::int64_t>(std::ceil(n / cfg.max_shrink_factor));

    if (!cfg.deterministic) {
        auto order_rng = make_rng(seed_with(cfg.seed, 0xc345));
        auto order = random_permutation(n, order_rng);
        std::atomic<bool> stop{false};
        par::for_each(cfg.threads, n, [&](std::size_t i) {
            if (stop.load(std::memory_order_relaxed)) return;
            const NodeId u = order[i];
            if (clustering.state(u) != JoinState::kUnclustered) return;
            if (clustering.num_clusters() - 1 < min_clusters) {
                stop.store(true, std::memory_order_relaxed);
                return;
            }
            thread_local Rng rng;
            rng.seed(seed_with(cfg.seed, 0x7a7e, u));
            auto target = rate_and_select(h, u, clustering, communities, &rng, false);
            if (target.has_value()) clustering.cluster_join(u, *target);
        });
        return clustering;
    }

    // Synchronous variant: each sub-round selects targets against the frozen
    // clustering in parallel, then commits sequentially. Proposals are
    // grouped by target root in ascending id; members join in ascending
    // (weight, id) order while the cluster stays within c_max. Roots that
    // joined away earlier in the same commit redirect to their new root, and
    // nodes that already received members stay roots.
    const SubRoundPlan plan = SubRoundPlan::create(n, cfg.sub_rounds, cfg.seed, 0);
    std::vector<NodeId> selected(n, kInvalidNode);
    std::vector<std::uint8_t> has_members(n, 0);
    bool stop = false;
    for (std::size_t s = 0; s < plan.num_slices() && !stop; ++s) {
        auto slice = plan.slice(s);
        par::for_each(cfg.threads, slice.size(), [&](std::size_t i) {
            const NodeId u = slice[i];
            selected[u] = kInvalidNode;
            if (clustering.rep(u) != u || has_members[u]) return;
            auto target = rate_and_select(h, u, clustering, communities, nullptr, true);
            if (target.has_value()) selected[u] = *target;
        });

        std::vector<std::pair<NodeId, NodeId>> proposals;  // (target, node)
        for (NodeId u : slice)
            if (selected[u] != kInvalidNode) proposals.emplace_back(selected[u], u);
        std::sort(proposals.begin(), proposals.end());
        std::size_t i = 0;
        while (i < proposals.size() && !stop) {
            std::size_t j = i;
            while (j < proposals.size() && proposals[j].first == proposals[i].first) ++j;
            NodeId root = proposals[i].first;
            // the intended target may have joined away in this commit phase
            root = clustering.rep(root);
            std::vector<NodeId> members;
            Weight group_weight = 0;
            for (std::size_t p = i; p < j; ++p) {
                const NodeId u = proposals[p].second;
                if (u == root || has_members[u] || clustering.rep(u) != u) continue;
                members.push_back(u);
                group_weight += h.node_weight(u);
            }
            // pre-approval: when the whole group fits, no ordering is needed
            if (clustering.cluster_weight(root) + group_weight > cfg.c_max)
                std::sort(members.begin(), members.end(), [&](NodeId a, NodeId b) {
                    return std::make_pair(h.node_weight(a), a) <
                           std::make_pair(h.node_weight(b), b);
                });
            for (NodeId u : members) {
                if (clustering.num_clusters() - 1 < min_clusters) {
                    stop = true;
                    break;
                }
                if (clustering.cluster_weight(root) + h.node_weight(u) > cfg.c_max) break;
                clustering.commit_member(u, root);
                has_members[root] = 1;
            }
            i = j;
        }
    }
    return clustering;
}

struct IdenticalNetGroup {
    NetId representative;
    std::vector<NetId> members;  // includes the representative
    Weight total_weight;
};

// Groups identical nets via the fingerprint f(e) = Σ v² with exact pairwise
// comparison inside (fingerprint, size) buckets. The smallest net id of a
// group acts as its representative and carries the summed weight.
inline std::vector<IdenticalNetGroup> detect_identical_nets(const Hypergraph& h) {
    const NetId m = h.num_nets();
    std::vector<std::uint64_t> fingerprint(m);
    for (NetId e = 0; e < m; ++e) {
        std::uint64_t f = 0;
        for (NodeId v : h.pins(e)) f += static_cast<std::uint64_t>(v) * v;
        fingerprint[e] = f;
    }
    std::vector<NetId> order(m);
    for (NetId e = 0; e < m; ++e) order[e] = e;
    std::sort(order.begin(), order.end(), [&](NetId a, NetId b) {
        return std::make_tuple(fingerprint[a], h.net_size(a), a) <
               std::make_tuple(fingerprint[b], h.net_size(b), b);
    });

    std::vector<IdenticalNetGroup> groups;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && fingerprint[order[j]] == fingerprint[order[i]] &&
               h.net_size(order[j]) == h.net_size(order[i]))
            ++j;
        // bucket [i, j): compare pin lists pairwise against group leaders
        std::vector<std::size_t> leader_of;  // indices into groups
        for (std::size_t p = i; p < j; ++p) {
            const NetId e = order[p];
            bool placed = false;
            for (std::size_t g : leader_of) {
                const NetId lead = groups[g].representative;
                auto a = h.pins(lead), b = h.pins(e);
                if (std::equal(a.begin(), a.end(), b.begin(), b.end())) {
                    groups[g].members.push_back(e);
                    groups[g].total_weight += h.net_weight(e);
                    placed = true;
                    break;
                }
            }
            if (!placed) {
                leader_of.push_back(groups.size());
                groups.push_back({e, {e}, h.net_weight(e)});
            }
        }
        i = j;
    }
    std::sort(groups.begin(), groups.end(),
              [](const IdenticalNetGroup& a, const IdenticalNetGroup& b) {
                  return a.representative < b.representative;
              });
    return groups;
}

struct ContractionResult {
    Hypergraph hg;
    std::vector<NodeId> fine_to_coarse;
    std::vector<NetId> dropped_single_pin_nets;        // fine net ids
    std::vector<std::vector<NetId>> merged_net_groups;  // fine ids merged per coarse net
};

// Contracts each cluster to one coarse node: weights are summed, pins
// deduplicated, nets shrinking to one pin dropped, identical nets merged
// with aggregated weight. Coarse ids are assigned by ascending root id.
inline ContractionResult contract(const Hypergraph& h, const Clustering& clustering) {
    const NodeId n = h.num_nodes();
    ContractionResult out;
    std::vector<NodeId> root_to_coarse(n, kInvalidNode);
    NodeId num_coarse = 0;
    for (NodeId u = 0; u < n; ++u)
        if (clustering.rep(u) == u) root_to_coarse[u] = num_coarse++;
    out.fine_to_coarse.resize(n);
    for (NodeId u = 0; u < n; ++u) out.fine_to_coarse[u] = root_to_coarse[clustering.rep(u)];

    std::vector<Weight> node_weights(num_coarse, 0);
    for (NodeId u = 0; u < n; ++u)
        node_weights[out.fine_to_coarse[u]] += h.node_weight(u);

    // map pins, dedup, drop trivial nets
    std::vector<std::vector<NodeId>> kept_pins;
    std::vector<Weight> kept_weights;
    std::vector<NetId> kept_fine_id;
    std::vector<NodeId> current;
    for (NetId e = 0; e < h.num_nets(); ++e) {
        current.clear();
        for (NodeId v : h.pins(e)) current.push_back(out.fine_to_coarse[v]);
        std::sort(current.begin(), current.end());
        current.erase(std::unique(current.begin(), current.end()), current.end());
        if (current.size() <= 1) {
            out.dropped_single_pin_nets.push_back(e);
            continue;
        }
        kept_pins.push_back(current);
        kept_weights.push_back(h.net_weight(e));
        kept_fine_id.push_back(e);
    }

    Hypergraph intermediate =
        Hypergraph::build(num_coarse, kept_pins, node_weights, kept_weights);
    const auto groups = detect_identical_nets(intermediate);

    std::vector<std::vector<NodeId>> final_pins;
    std::vector<Weight> final_weights;
    for (const auto& g : groups) {
        auto pins = intermediate.pins(g.representative);
        final_pins.emplace_back(pins.begin(), pins.end());
        final_weights.push_back(g.total_weight);
        std::vector<NetId> fine_ids;
        for (NetId member : g.members) fine_ids.push_back(kept_fine_id[member]);
        out.merged_net_groups.push_back(std::move(fine_ids));
    }
    out.hg = Hypergraph::build(num_coarse, final_pins, node_weights, final_weights);
    return out;
}

struct CoarseningConfig {
    std::int64_t contraction_limit = 320;  // pipeline default: 160·k
    double max_shrink_factor = 2.5;
    double min_shrink = 0.01;
    std::uint64_t seed = 0;
    int threads = 1;
    bool deterministic = false;
    int sub_rounds = 16;
};

struct CoarseningLevel {
    Hypergraph hg;
    std::vector<NodeId> fine_to_coarse;
    std::vector<NodeId> communities;  // projected onto this level
    std::size_t dropped_single_pin_nets = 0;
    std::size_t merged_identical_nets = 0;
};

struct CoarseningHierarchy {
    std::vector<CoarseningLevel> levels;

    const Hypergraph& coarsest(const Hypergraph& original) const {
        return levels.empty() ? original : levels.back().hg;
    }

    // Projects a partition of level `level` (0-based into levels) one step up.
    std::vector<BlockId> project(std::size_t level, std::span<const BlockId> coarse_part) const {
        const auto& mapping = levels[level].fine_to_coarse;
        std::vector<BlockId> fine_part(mapping.size());
        for (NodeId v = 0; v < mapping.size(); ++v) fine_part[v] = coarse_part[mapping[v]];
        return fine_part;
    }
};

// Multilevel coarsening: clustering passes followed by contraction until the
// node count reaches the contraction limit, a pass shrinks the instance by
// less than min_shrink, or cluster weights block further progress.
inline CoarseningHierarchy coarsen(const Hypergraph& h, std::span<const NodeId> communities,
                                   const CoarseningConfig& cfg) {
    CoarseningHierarchy hierarchy;
    Weight c_max = std::max<Weight>(1, h.total_node_weight() / std::max<std::int64_t>(
                                                                   1, cfg.contraction_limit));
    const Hypergraph* current = &h;
    std::vector<NodeId> current_comms(communities.begin(), communities.end());

    int pass = 0;
    while (static_cast<std::int64_t>(current->num_nodes()) > cfg.contraction_limit) {
        ClusteringConfig ccfg;
        ccfg.c_max = c_max;
        ccfg.max_shrink_factor = cfg.max_shrink_factor;
        ccfg.seed = seed_with(cfg.seed, 0xc0a5, pass);
        ccfg.threads = cfg.threads;
        ccfg.deterministic = cfg.deterministic;
        ccfg.sub_rounds = cfg.sub_rounds;
        Clustering clustering = compute_clustering(*current, current_comms, ccfg);

        const auto n_before = static_cast<double>(current->num_nodes());
        const auto n_after = static_cast<double>(clustering.num_clusters());
        if (n_before - n_after < cfg.min_shrink * n_before) break;

        ContractionResult result = contract(*current, clustering);
        CoarseningLevel level;
        level.hg = std::move(result.hg);
        level.fine_to_coarse = std::move(result.fine_to_coarse);
        level.dropped_single_pin_nets = result.dropped_single_pin_nets.size();
        for (const auto& g : result.merged_net_groups)
            if (g.size() > 1) ++level.merged_identical_nets;
        if (!current_comms.empty()) {
            level.communities.resize(level.hg.num_nodes());
            for (NodeId v = 0; v < level.fine_to_coarse.size(); ++v)
                level.communities[level.fine_to_coarse[v]] = current_comms[v];
            current_comms = level.communities;
        }
        hierarchy.levels.push_back(std::move(level));
        current = &hierarchy.levels.back().hg;
        ++pass;
    }
    return hierarchy;
}

}  // namespace hyperpart

#endif
