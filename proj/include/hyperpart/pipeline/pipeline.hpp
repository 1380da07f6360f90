// pipeline.hpp - multilevel orchestration: presets, phase sequencing, balance guarantee
#ifndef HYPERPART_PIPELINE_PIPELINE_HPP
#define HYPERPART_PIPELINE_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "../coarsening/coarsener.hpp"
#include "../community/louvain.hpp"
#include "../deterministic/sync_lp.hpp"
#include "../flow/flow_refinement.hpp"
#include "../gain_table.hpp"
#include "../hypergraph.hpp"
#include "../initial/initial_partitioning.hpp"
#include "../parallel/parallel.hpp"
#include "../partitioned_hypergraph.hpp"
#include "../refinement/fm.hpp"
#include "../refinement/label_propagation.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

// default: LP + FM on every level. default-flows: additionally runs the
// flow-based refiner. deterministic: synchronous LP only, with deterministic
// community detection and clustering; bit-identical for any thread count.
enum class Preset { kDefault, kDefaultFlows, kDeterministic };

inline std::string preset_name(Preset p) {
    switch (p) {
        case Preset::kDefault: return "default";
        case Preset::kDefaultFlows: return "default-flows";
        case Preset::kDeterministic: return "deterministic";
    }
    return "default";
}

inline Preset preset_from_name(const std::string& s) {
    if (s == "default") return Preset::kDefault;
    if (s == "default-flows") return Preset::kDefaultFlows;
    if (s == "deterministic") return Preset::kDeterministic;
    throw std::invalid_argument("unknown preset: " + s);
}

struct PipelineConfig {
    std::int32_t k = 2;
    double epsilon = 0.03;
    std::uint64_t seed = 0;
    Preset preset = Preset::kDefault;
    Objective objective = Objective::kKm1;
    int threads = 1;
    std::int64_t contraction_limit = 0;  // 0: 160 * k
    int lp_rounds = 5;
    int fm_rounds = 10;
    int sub_rounds = 16;       // synchronous sub-rounds in the deterministic preset
    bool enable_fm = true;     // honored only by presets that run FM
    bool enable_flows = true;  // honored only by presets that run flows
    double flow_alpha = 16.0;  // region size budget, in multiples of the block slack
    std::int32_t flow_region_layers = 2;
    double flow_delta = 0.001;  // minimum relative improvement to keep flow rounds going
    double flow_tau = 1.0;      // concurrent pair solves, as a fraction of k
    // 0: unlimited. Checked cooperatively at level boundaries: once exceeded,
    // remaining levels are projected without refinement and the report flags
    // the run as timed out.
    double time_limit_seconds = 0.0;
    InitialPartitioningConfig initial;

    bool deterministic() const { return preset == Preset::kDeterministic; }
    bool uses_fm() const { return preset != Preset::kDeterministic && enable_fm; }
    bool uses_flows() const { return preset == Preset::kDefaultFlows && enable_flows; }
    std::int64_t effective_contraction_limit() const {
        return contraction_limit > 0 ? contraction_limit
                                     : 160 * static_cast<std::int64_t>(k);
    }
};

// No balanced k-way partition can exist: a single node exceeds the block
// capacity. Distinct from ordinary invalid-argument errors so callers can
// report it as an instance property rather than a usage bug.
class InfeasibleBalanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PhaseTimings {
    double community = 0.0;
    double coarsening = 0.0;
    double initial = 0.0;
    double refinement = 0.0;
    double total = 0.0;
};

struct LevelTrace {
    std::size_t num_nodes = 0;
    Weight objective = 0;  // connectivity after refining this level
};

struct PartitionReport {
    Weight objective = 0;  // value of the configured metric
    Weight cut = 0;
    Weight km1 = 0;
    Weight soed = 0;
    double imbalance = 0.0;
    bool balanced = false;
    bool timed_out = false;
    int levels = 0;
    PhaseTimings timings;
    std::vector<LevelTrace> level_trace;  // coarsest first, finest last
};

struct PartitionResult {
    std::vector<BlockId> partition;
    PartitionReport report;
};

// part_fine[v] = part_coarse[fine_to_coarse[v]]. Preserves block weights and
// every objective: contraction sums the weights of merged identical nets and
// drops only single-pin nets, which no partition can cut.
inline std::vector<BlockId> project_partition(std::span<const BlockId> coarse_part,
                                              std::span<const NodeId> fine_to_coarse) {
    std::vector<BlockId> fine(fine_to_coarse.size());
    for (std::size_t v = 0; v < fine_to_coarse.size(); ++v)
        fine[v] = coarse_part[fine_to_coarse[v]];
    return fine;
}

inline bool is_balanced(const Hypergraph& h, std::span<const BlockId> part, std::int32_t k,
                        double eps) {
    const Weight cap = max_block_weight(h.total_node_weight(), k, eps);
    std::vector<Weight> weight(k, 0);
    for (NodeId v = 0; v < h.num_nodes(); ++v) weight[part[v]] += h.node_weight(v);
    for (BlockId b = 0; b < k; ++b)
        if (weight[b] > cap) return false;
    return true;
}

struct EvaluationReport {
    Weight cut = 0;
    Weight km1 = 0;
    Weight soed = 0;
    double imbalance = 0.0;
    bool balanced = false;
};

inline EvaluationReport evaluate(const Hypergraph& h, std::span<const BlockId> part,
                                 std::int32_t k, double eps) {
    if (part.size() != h.num_nodes())
        throw std::invalid_argument("partition size does not match node count");
    for (NodeId v = 0; v < h.num_nodes(); ++v)
        if (part[v] < 0 || part[v] >= k)
            throw std::invalid_argument("block id out of range at node " + std::to_string(v));
    EvaluationReport r;
    r.cut = compute_objective(h, part, k, Objective::kCut);
    r.km1 = compute_objective(h, part, k, Objective::kKm1);
    r.soed = compute_objective(h, part, k, Objective::kSoed);
    r.imbalance = compute_imbalance(h, part, k);
    r.balanced = is_balanced(h, part, k, eps);
    return r;
}

namespace detail {

// Greedy balance repair: while a block is over capacity, move the least
// damaging node out of the most overloaded block into a block with room.
// Each move sheds positive weight from an overloaded block and never pushes
// the target over capacity, so the total excess strictly decreases; the loop
// terminates and reports whether all blocks fit. When no single move fits
// (tight weighted instances where every block sits at capacity), a pairwise
// swap that exchanges a heavier node for a lighter one still sheds weight
// under the same no-new-overload rule. Fails only when neither exists.
inline bool rebalance(PartitionedHypergraph& ph) {
    const Hypergraph& h = ph.hypergraph();
    const std::int32_t k = ph.k();
    auto move_gain = [&](NodeId v, BlockId from, BlockId to) {
        Gain g = 0;
        for (NetId e : h.incident_nets(v)) {
            if (ph.pin_count(e, from) == 1) g += h.net_weight(e);
            if (ph.pin_count(e, to) == 0) g -= h.net_weight(e);
        }
        return g;
    };
    while (true) {
        BlockId worst = kNoBlock;
        Weight excess = 0;
        for (BlockId b = 0; b < k; ++b) {
            const Weight over = ph.block_weight(b) - ph.max_block_weight(b);
            if (over > excess) {
                excess = over;
                worst = b;
            }
        }
        if (worst == kNoBlock) return true;

        NodeId best_node = kInvalidNode;
        BlockId best_target = kNoBlock;
        Gain best_gain = std::numeric_limits<Gain>::min();
        Weight best_weight = 0;
        for (NodeId v = 0; v < h.num_nodes(); ++v) {
            if (ph.part(v) != worst) continue;
            const Weight w = h.node_weight(v);
            if (w <= 0) continue;
            for (BlockId t = 0; t < k; ++t) {
                if (t == worst || ph.block_weight(t) + w > ph.max_block_weight(t)) continue;
                const Gain g = move_gain(v, worst, t);
                if (best_node == kInvalidNode || g > best_gain ||
                    (g == best_gain && w > best_weight)) {
                    best_node = v;
                    best_target = t;
                    best_gain = g;
                    best_weight = w;
                }
            }
        }
        if (best_node != kInvalidNode) {
            ph.force_move(best_node, worst, best_target);
            continue;
        }

        NodeId swap_u = kInvalidNode, swap_v = kInvalidNode;
        BlockId swap_block = kNoBlock;
        Gain swap_gain = std::numeric_limits<Gain>::min();
        Weight swap_shed = 0;
        for (NodeId u = 0; u < h.num_nodes(); ++u) {
            if (ph.part(u) != worst) continue;
            for (NodeId v = 0; v < h.num_nodes(); ++v) {
                const BlockId b = ph.part(v);
                if (b == worst) continue;
                const Weight shed = h.node_weight(u) - h.node_weight(v);
                if (shed <= 0) continue;
                if (ph.block_weight(b) + shed > ph.max_block_weight(b)) continue;
                const Gain g = move_gain(u, worst, b) + move_gain(v, b, worst);
                if (swap_u == kInvalidNode || g > swap_gain ||
                    (g == swap_gain && shed > swap_shed)) {
                    swap_u = u;
                    swap_v = v;
                    swap_block = b;
                    swap_gain = g;
                    swap_shed = shed;
                }
            }
        }
        if (swap_u == kInvalidNode) return false;
        ph.force_move(swap_u, worst, swap_block);
        ph.force_move(swap_v, swap_block, worst);
    }
}

}  // namespace detail

// Multilevel partitioning: community detection, coarsening, portfolio initial
// partitioning on the coarsest level, then level-by-level projection and
// refinement. The output is balanced whenever any balanced state was reached;
// refiners only commit capacity-respecting moves, and a greedy repair plus a
// last-balanced fallback cover an imbalanced initial partition.
inline PartitionResult partition(const Hypergraph& h, const PipelineConfig& cfg) {
    if (cfg.k < 1) throw std::invalid_argument("block count must be positive");
    if (cfg.epsilon < 0.0) throw std::invalid_argument("imbalance tolerance must be >= 0");
    if (cfg.threads < 1) throw std::invalid_argument("thread count must be positive");

    using Clock = std::chrono::steady_clock;
    const auto t_start = Clock::now();
    auto elapsed = [](Clock::time_point since) {
        return std::chrono::duration<double>(Clock::now() - since).count();
    };

    PartitionResult result;
    PartitionReport& report = result.report;
    const std::int32_t k = cfg.k;

    const Weight cap = max_block_weight(h.total_node_weight(), k, cfg.epsilon);
    for (NodeId v = 0; v < h.num_nodes(); ++v)
        if (h.node_weight(v) > cap)
            throw InfeasibleBalanceError("node " + std::to_string(v) + " with weight " +
                                         std::to_string(h.node_weight(v)) +
                                         " exceeds the block capacity " + std::to_string(cap));

    auto finalize = [&](std::vector<BlockId>&& part) {
        result.partition = std::move(part);
        report.cut = compute_objective(h, result.partition, k, Objective::kCut);
        report.km1 = compute_objective(h, result.partition, k, Objective::kKm1);
        report.soed = compute_objective(h, result.partition, k, Objective::kSoed);
        switch (cfg.objective) {
            case Objective::kCut: report.objective = report.cut; break;
            case Objective::kKm1: report.objective = report.km1; break;
            case Objective::kSoed: report.objective = report.soed; break;
        }
        report.imbalance = compute_imbalance(h, result.partition, k);
        report.balanced = is_balanced(h, result.partition, k, cfg.epsilon);
        report.timings.total = elapsed(t_start);
    };

    if (k == 1 || h.num_nodes() == 0) {
        finalize(std::vector<BlockId>(h.num_nodes(), 0));
        return result;
    }

    auto t_phase = Clock::now();
    LouvainConfig lcfg;
    lcfg.seed = seed_with(cfg.seed, 0x10ba);
    lcfg.threads = cfg.threads;
    lcfg.deterministic = cfg.deterministic();
    lcfg.sub_rounds = cfg.sub_rounds;
    const std::vector<NodeId> communities = detect_communities(h, lcfg);
    report.timings.community = elapsed(t_phase);

    t_phase = Clock::now();
    CoarseningConfig ccfg;
    ccfg.contraction_limit = cfg.effective_contraction_limit();
    ccfg.seed = seed_with(cfg.seed, 0xc04e);
    ccfg.threads = cfg.threads;
    ccfg.deterministic = cfg.deterministic();
    ccfg.sub_rounds = cfg.sub_rounds;
    const CoarseningHierarchy hierarchy = coarsen(h, communities, ccfg);
    report.levels = static_cast<int>(hierarchy.levels.size());
    report.timings.coarsening = elapsed(t_phase);

    t_phase = Clock::now();
    const Hypergraph& coarsest = hierarchy.coarsest(h);
    std::vector<BlockId> part;
    {
        std::optional<ThreadPool> pool;
        if (cfg.threads > 1) pool.emplace(cfg.threads - 1);
        part = recursive_bipartition(coarsest, k, cfg.epsilon, seed_with(cfg.seed, 0x141a),
                                     cfg.initial, pool ? &*pool : nullptr);
    }
    report.timings.initial = elapsed(t_phase);

    t_phase = Clock::now();
    // Last balanced partition seen, projected alongside `part` so it always
    // lives on the current level. Refiners cannot break balance, so this only
    // matters when the initial partition starts out imbalanced.
    std::vector<BlockId> last_balanced;
    int level_tag = 0;
    auto over_limit = [&] {
        return cfg.time_limit_seconds > 0.0 && elapsed(t_start) > cfg.time_limit_seconds;
    };
    auto refine_level = [&](const Hypergraph& hg, std::vector<BlockId>& p) {
        if (report.timed_out || over_limit()) {
            // Projection preserves the objective, so the previous trace value
            // carries over unchanged.
            report.timed_out = true;
            const Weight obj = report.level_trace.empty()
                                   ? compute_objective(hg, p, k, Objective::kKm1)
                                   : report.level_trace.back().objective;
            report.level_trace.push_back({hg.num_nodes(), obj});
            ++level_tag;
            return;
        }
        PartitionedHypergraph ph(hg, k, p, cfg.epsilon);
        if (cfg.deterministic()) {
            SyncLpConfig scfg;
            scfg.max_rounds = cfg.lp_rounds;
            scfg.sub_rounds = cfg.sub_rounds;
            scfg.seed = seed_with(cfg.seed, 0x51bc, level_tag);
            scfg.threads = cfg.threads;
            sync_label_propagation(ph, scfg);
        } else {
            GainTable gains(ph);
            LpConfig lp;
            lp.max_rounds = cfg.lp_rounds;
            lp.seed = seed_with(cfg.seed, 0x1e71, level_tag);
            lp.threads = cfg.threads;
            label_propagation(ph, gains, lp);
            if (cfg.uses_fm()) {
                FmConfig fm;
                fm.max_rounds = cfg.fm_rounds;
                fm.seed = seed_with(cfg.seed, 0xf317, level_tag);
                fm.threads = cfg.threads;
                fm_refinement(ph, gains, fm);
            }
            if (cfg.uses_flows()) {
                FlowRefinementConfig flow;
                flow.alpha = cfg.flow_alpha;
                flow.region_layers = cfg.flow_region_layers;
                flow.tau = cfg.flow_tau;
                flow.epsilon = cfg.epsilon;
                flow.min_relative_improvement = cfg.flow_delta;
                flow.threads = cfg.threads;
                flow.seed = seed_with(cfg.seed, 0xf10e, level_tag);
                flow_refinement(ph, flow);
            }
        }
        p = ph.partition_snapshot();
        report.level_trace.push_back({hg.num_nodes(), ph.km1()});
        if (ph.balanced()) last_balanced = p;
        ++level_tag;
    };

    refine_level(coarsest, part);
    for (std::size_t i = hierarchy.levels.size(); i-- > 0;) {
        const auto& mapping = hierarchy.levels[i].fine_to_coarse;
        part = project_partition(part, mapping);
        if (!last_balanced.empty()) last_balanced = project_partition(last_balanced, mapping);
        refine_level(i > 0 ? hierarchy.levels[i - 1].hg : h, part);
    }
    report.timings.refinement = elapsed(t_phase);

    if (!is_balanced(h, part, k, cfg.epsilon)) {
        PartitionedHypergraph ph(h, k, part, cfg.epsilon);
        if (detail::rebalance(ph)) {
            part = ph.partition_snapshot();
            if (!last_balanced.empty() &&
                compute_objective(h, last_balanced, k, Objective::kKm1) <
                    compute_objective(h, part, k, Objective::kKm1))
                part = std::move(last_balanced);
        } else if (!last_balanced.empty()) {
            part = std::move(last_balanced);
        }
    }
    finalize(std::move(part));
    return result;
}

}  // namespace hyperpart

#endif
