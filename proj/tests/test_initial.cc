// test_initial.cc - adaptive epsilon, portfolio bipartitioning, 2-way FM, recursion
#include <gtest/gtest.h>

#include <cmath>

#include "hyperpart/initial/initial_partitioning.hpp"
#include "test_util.hpp"

namespace hyperpart {
namespace {

Hypergraph path4() { return build_hypergraph(4, {{0, 1}, {1, 2}, {2, 3}}); }

// Two 4-cliques with no connection between them.
Hypergraph disconnected_cliques(NodeId cliques = 2, NodeId size = 4) {
    std::vector<std::vector<NodeId>> nets;
    for (NodeId c = 0; c < cliques; ++c)
        for (NodeId u = 0; u < size; ++u)
            for (NodeId v = u + 1; v < size; ++v)
                nets.push_back({c * size + u, c * size + v});
    return build_hypergraph(cliques * size, nets);
}

TEST(AdaptiveEpsilon, EightWaySelfSimilarCase) {
    // (1.03)^(1/3) - 1 with a perfectly proportional subinstance
    EXPECT_NEAR(adaptive_epsilon(800, 800, 8, 8, 0.03), 0.00990163405, 1e-9);
}

TEST(AdaptiveEpsilon, ProportionalSubproblemWithZeroEpsilon) {
    // c_sub = c_total * k_sub / k makes the ratio exactly 1
    EXPECT_DOUBLE_EQ(adaptive_epsilon(120, 60, 4, 2, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(adaptive_epsilon(120, 30, 8, 2, 0.0), 0.0);
}

TEST(AdaptiveEpsilon, TwoWayHasExponentOne) {
    const double expected = 1.03 * (100.0 / 4.0) * (2.0 / 45.0) - 1.0;
    EXPECT_NEAR(adaptive_epsilon(100, 45, 4, 2, 0.03), expected, 1e-12);
}

TEST(AdaptiveEpsilon, FlooredAtZeroAndValidated) {
    // oversized subinstance leaves no slack: ratio < 1
    EXPECT_DOUBLE_EQ(adaptive_epsilon(100, 60, 4, 2, 0.0), 0.0);
    EXPECT_THROW(adaptive_epsilon(100, 50, 4, 1, 0.03), std::invalid_argument);
    EXPECT_THROW(adaptive_epsilon(100, 0, 4, 2, 0.03), std::invalid_argument);
}

TEST(SideCapacity, RoundsShareUpBeforeScaling) {
    EXPECT_EQ(side_capacity(10, 2, 3, 0.0), 7);  // ceil(20/3)
    EXPECT_EQ(side_capacity(10, 1, 3, 0.0), 4);  // ceil(10/3)
    EXPECT_EQ(side_capacity(100, 1, 2, 0.03), 51);
    // caps of the two sides always cover the total weight
    for (Weight c : {7, 10, 11, 99}) {
        for (std::int32_t k : {2, 3, 5, 8}) {
            const std::int32_t k_a = (k + 1) / 2;
            EXPECT_GE(side_capacity(c, k_a, k, 0.0) + side_capacity(c, k - k_a, k, 0.0), c);
        }
    }
}

TEST(TwowayFm, SolvesPathCrossingSplit) {
    auto h = path4();
    std::vector<BlockId> part = {0, 1, 0, 1};  // cut 3
    const Weight obj = twoway_fm(h, part, {2, 2});
    EXPECT_EQ(obj, 1);
    EXPECT_EQ(compute_objective(h, part, 2, Objective::kKm1), 1);
    EXPECT_NE(part[0], part[3]);
    EXPECT_EQ(part[0], part[1]);
    EXPECT_EQ(part[2], part[3]);
}

TEST(TwowayFm, OptimalInputUnchanged) {
    auto h = path4();
    std::vector<BlockId> part = {0, 0, 1, 1};
    EXPECT_EQ(twoway_fm(h, part, {2, 2}), 1);
    EXPECT_EQ(part, (std::vector<BlockId>{0, 0, 1, 1}));
}

TEST(TwowayFm, NeverWorsensCutOrOverload) {
    auto rng = make_rng(17);
    for (int inst = 0; inst < 40; ++inst) {
        auto h = testing::random_hypergraph(rng, 16, 30, 4, true);
        auto part = testing::random_partition(rng, 16, 2);
        const std::array<Weight, 2> caps = {
            max_block_weight(h.total_node_weight(), 2, 0.1),
            max_block_weight(h.total_node_weight(), 2, 0.1)};
        auto weights_before = testing::block_weights(h, part, 2);
        const Weight over_before = std::max(
            {weights_before[0] - caps[0], weights_before[1] - caps[1], Weight{0}});
        const Weight before = compute_objective(h, part, 2, Objective::kKm1);
        const Weight after = twoway_fm(h, part, caps);
        EXPECT_LE(after, before);
        EXPECT_EQ(after, compute_objective(h, part, 2, Objective::kKm1));
        auto weights_after = testing::block_weights(h, part, 2);
        const Weight over_after = std::max(
            {weights_after[0] - caps[0], weights_after[1] - caps[1], Weight{0}});
        EXPECT_LE(over_after, over_before);
    }
}

TEST(PortfolioStats, WelfordMatchesClosedForm) {
    PortfolioStats st;
    st.record(10);
    st.record(12);
    st.record(14);
    EXPECT_EQ(st.count, 3);
    EXPECT_DOUBLE_EQ(st.mean, 12.0);
    EXPECT_NEAR(st.stddev(), std::sqrt(8.0 / 3.0), 1e-12);
    EXPECT_EQ(st.best, 10);
}

TEST(Portfolio, FindsZeroCutOnDisconnectedInstance) {
    auto h = disconnected_cliques();
    InitialPartitioningConfig cfg;
    auto result = bipartition_portfolio(h, {4, 4}, cfg, 1);
    EXPECT_EQ(result.objective, 0);
    EXPECT_TRUE(result.feasible);
    EXPECT_EQ(compute_objective(h, result.part, 2, Objective::kKm1), 0);
}

TEST(Portfolio, SingleNodeGivesOneEmptyBlock) {
    auto h = build_hypergraph(1, {});
    InitialPartitioningConfig cfg;
    auto result = bipartition_portfolio(h, {1, 1}, cfg, 3);
    EXPECT_TRUE(result.feasible);
    EXPECT_EQ(result.objective, 0);
    ASSERT_EQ(result.part.size(), 1u);
}

TEST(Portfolio, RepetitionControlStaysInBounds) {
    auto rng = make_rng(23);
    auto h = testing::random_hypergraph(rng, 40, 80, 4);
    InitialPartitioningConfig cfg;
    std::vector<PortfolioStats> stats;
    const Weight cap = max_block_weight(h.total_node_weight(), 2, 0.03);
    auto result = bipartition_portfolio(h, {cap, cap}, cfg, 7, &stats);
    ASSERT_EQ(stats.size(), 9u);
    for (const auto& st : stats) {
        EXPECT_GE(st.count, cfg.min_repetitions);
        EXPECT_LE(st.count, cfg.max_repetitions);
        if (st.skipped_early) EXPECT_LT(st.count, cfg.max_repetitions);
        EXPECT_LE(result.objective, st.best);
    }
}

// With repetition counts pinned, the portfolio can never lose to any single
// member run on the same derived seeds.
TEST(Portfolio, DominatesEverySingleMember) {
    auto rng = make_rng(29);
    for (int inst = 0; inst < 3; ++inst) {
        auto h = testing::random_hypergraph(rng, 30, 60, 5);
        const Weight cap = max_block_weight(h.total_node_weight(), 2, 0.05);
        InitialPartitioningConfig cfg;
        cfg.min_repetitions = cfg.max_repetitions = 5;
        auto full = bipartition_portfolio(h, {cap, cap}, cfg, 11 + inst);
        for (int m = 0; m < kNumBipartitionMembers; ++m) {
            InitialPartitioningConfig single = cfg;
            single.enabled_members = 1u << m;
            auto alone = bipartition_portfolio(h, {cap, cap}, single, 11 + inst);
            EXPECT_LE(full.objective, alone.objective) << "member " << m;
        }
    }
}

TEST(RecursiveBipartition, SingleBlockTrivial) {
    auto h = path4();
    auto part = recursive_bipartition(h, 1, 0.03, 5);
    EXPECT_EQ(part, (std::vector<BlockId>{0, 0, 0, 0}));
}

TEST(RecursiveBipartition, ThreeWayOnTenNodesIsFeasible) {
    auto rng = make_rng(3);
    auto h = testing::random_hypergraph(rng, 10, 20, 4);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto part = recursive_bipartition(h, 3, 0.0, seed);
        auto weights = testing::block_weights(h, part, 3);
        const Weight l_max = max_block_weight(10, 3, 0.0);
        for (Weight w : weights) EXPECT_LE(w, l_max);
    }
}

TEST(RecursiveBipartition, EightWayBalanceGuarantee) {
    auto rng = make_rng(41);
    auto h = testing::random_hypergraph(rng, 64, 120, 5);
    const Weight l_max = max_block_weight(64, 8, 0.03);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto part = recursive_bipartition(h, 8, 0.03, seed);
        auto weights = testing::block_weights(h, part, 8);
        for (Weight w : weights) EXPECT_LE(w, l_max);
    }
}

TEST(RecursiveBipartition, RandomInstancesStayBalanced) {
    auto rng = make_rng(47);
    for (int inst = 0; inst < 25; ++inst) {
        const NodeId n = 12 + static_cast<NodeId>(random_below(rng, 40));
        auto h = testing::random_hypergraph(rng, n, 2 * n, 4);
        for (std::int32_t k : {2, 3, 4}) {
            auto part = recursive_bipartition(h, k, 0.03, inst);
            const Weight l_max = max_block_weight(h.total_node_weight(), k, 0.03);
            auto weights = testing::block_weights(h, part, k);
            for (Weight w : weights) EXPECT_LE(w, l_max) << "n=" << n << " k=" << k;
            for (BlockId b : part) {
                EXPECT_GE(b, 0);
                EXPECT_LT(b, k);
            }
        }
    }
}

TEST(RecursiveBipartition, MoreBlocksThanNodes) {
    auto h = build_hypergraph(3, {{0, 1, 2}});
    auto part = recursive_bipartition(h, 4, 0.03, 1);
    const Weight l_max = max_block_weight(3, 4, 0.03);
    auto weights = testing::block_weights(h, part, 4);
    for (Weight w : weights) EXPECT_LE(w, l_max);
}

TEST(RecursiveBipartition, FourCliquesSplitPerfectly) {
    auto h = disconnected_cliques(4, 4);
    auto part = recursive_bipartition(h, 4, 0.03, 2);
    EXPECT_EQ(compute_objective(h, part, 4, Objective::kKm1), 0);
}

// The recursion may run its sides on pool workers, but per-call seeds and the
// total winner order make the result independent of scheduling.
TEST(RecursiveBipartition, PoolSizeDoesNotChangeResult) {
    auto rng = make_rng(53);
    auto h = testing::random_hypergraph(rng, 48, 90, 5);
    auto reference = recursive_bipartition(h, 4, 0.03, 9);
    auto repeat = recursive_bipartition(h, 4, 0.03, 9);
    EXPECT_EQ(repeat, reference);
    for (int workers : {1, 3}) {
        ThreadPool pool(workers);
        auto with_pool = recursive_bipartition(h, 4, 0.03, 9, {}, &pool);
        EXPECT_EQ(with_pool, reference) << "workers=" << workers;
    }
}

}  // namespace
}  // namespace hyperpart
