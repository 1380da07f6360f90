#include <gtest/gtest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "hyperpart/coarsening/coarsener.hpp"
#include "hyperpart/deterministic/subround.hpp"
#include "hyperpart/deterministic/swap_prefixes.hpp"
#include "hyperpart/deterministic/sync_lp.hpp"
#include "hyperpart/deterministic/volume_aggregation.hpp"
#include "hyperpart/hypergraph.hpp"
#include "hyperpart/partitioned_hypergraph.hpp"
#include "test_util.hpp"

namespace hyperpart {
namespace {

using testing::block_weights;
using testing::brute_force_objective;
using testing::random_hypergraph;

using Prefix = std::pair<std::size_t, std::size_t>;

// Exhaustive reference: explores every state a compliant two-pointer walk can
// reach (both continuations at an exact cumulative-weight tie) and returns
// the longest feasible pair, preferring the larger st prefix.
Prefix walk_oracle(const std::vector<Weight>& st, const std::vector<Weight>& ts, Weight room_s,
                   Weight room_t) {
    std::vector<Weight> s(st.size() + 1, 0), t(ts.size() + 1, 0);
    for (std::size_t i = 0; i < st.size(); ++i) s[i + 1] = s[i] + st[i];
    for (std::size_t j = 0; j < ts.size(); ++j) t[j + 1] = t[j] + ts[j];

    std::set<Prefix> seen;
    std::vector<Prefix> frontier{{0, 0}};
    seen.insert({0, 0});
    while (!frontier.empty()) {
        const auto [i, j] = frontier.back();
        frontier.pop_back();
        const Weight x = s[i] - t[j];
        std::vector<Prefix> next;
        if (x == 0) {
            if (i < st.size()) next.push_back({i + 1, j});
            if (j < ts.size()) next.push_back({i, j + 1});
        } else if (x < 0) {
            if (i < st.size())
                next.push_back({i + 1, j});
            else if (j < ts.size())
                next.push_back({i, j + 1});
        } else {
            if (j < ts.size())
                next.push_back({i, j + 1});
            else if (i < st.size())
                next.push_back({i + 1, j});
        }
        for (const Prefix& p : next)
            if (seen.insert(p).second) frontier.push_back(p);
    }

    Prefix best{0, 0};
    std::ptrdiff_t best_len = -1;
    for (const auto& [i, j] : seen) {
        const Weight x = s[i] - t[j];
        if (x < -room_s || x > room_t) continue;
        const auto len = static_cast<std::ptrdiff_t>(i + j);
        if (len > best_len || (len == best_len && i > best.first)) {
            best = {i, j};
            best_len = len;
        }
    }
    return best;
}

TEST(SwapPrefixes, SymmetricUnitSwapAtZeroSlack) {
    const std::vector<Weight> st{1}, ts{1};
    EXPECT_EQ(select_swap_prefixes(st, ts, 4, 4, 4), (Prefix{1, 1}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 4, 4, 4), (Prefix{1, 1}));
}

TEST(SwapPrefixes, EmptyCounterSequenceAtCapacity) {
    const std::vector<Weight> st{2, 1}, ts{};
    // V_t full: no positive shift is feasible, so nothing moves.
    EXPECT_EQ(select_swap_prefixes(st, ts, 3, 5, 6, 5), (Prefix{0, 0}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 3, 5, 6, 5), (Prefix{0, 0}));
}

TEST(SwapPrefixes, UnequalWeightsNeedTheFullSwap) {
    // One unit of slack per side: (1,1) shifts 1, (2,1) would shift 2, the
    // full pair shifts 0 and wins.
    const std::vector<Weight> st{3, 1}, ts{2, 2};
    EXPECT_EQ(select_swap_prefixes(st, ts, 7, 7, 8), (Prefix{2, 2}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 7, 7, 8), (Prefix{2, 2}));
}

TEST(SwapPrefixes, TieBranchFindsTheLongerPrefix) {
    // At (1,1) the cumulative weights tie; only the walk branch that advances
    // the ts pointer reaches the feasible (1,2).
    const std::vector<Weight> st{2, 5}, ts{2, 1};
    EXPECT_EQ(select_swap_prefixes(st, ts, 9, 10, 10, 10), (Prefix{1, 2}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 9, 10, 10, 10), (Prefix{1, 2}));
}

TEST(SwapPrefixes, OverloadedSourceMustShedWeight) {
    // c_s exceeds its cap by 2: feasibility forces x >= 2, so the selection
    // unloads both st nodes even with nothing moving back.
    const std::vector<Weight> st{2, 3}, ts{};
    EXPECT_EQ(select_swap_prefixes(st, ts, 12, 3, 10, 10), (Prefix{2, 0}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 12, 3, 10, 10), (Prefix{2, 0}));
}

TEST(SwapPrefixes, ReturnsEmptyWhenNothingIsFeasible) {
    const std::vector<Weight> st{1}, ts{1};
    // source over cap by 3, largest shift is 1: not fixable
    EXPECT_EQ(select_swap_prefixes(st, ts, 13, 5, 10, 10), (Prefix{0, 0}));
    EXPECT_EQ(select_swap_prefixes_merge(st, ts, 13, 5, 10, 10), (Prefix{0, 0}));
}

TEST(SwapPrefixes, MatchesExhaustiveWalkSearchOnSmallInputs) {
    std::mt19937_64 rng(71);
    std::uniform_int_distribution<int> len_dist(0, 8);
    std::uniform_int_distribution<Weight> w_dist(1, 6);
    std::uniform_int_distribution<Weight> room_dist(-2, 10);
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<Weight> st(len_dist(rng)), ts(len_dist(rng));
        for (auto& w : st) w = w_dist(rng);
        for (auto& w : ts) w = w_dist(rng);
        const Weight room_s = room_dist(rng), room_t = room_dist(rng);
        const Weight l_max = 50;
        const auto got =
            select_swap_prefixes(st, ts, l_max - room_s, l_max - room_t, l_max, l_max);
        const auto want = walk_oracle(st, ts, room_s, room_t);
        ASSERT_EQ(got, want) << "trial " << trial;
    }
}

TEST(SwapPrefixes, MergeMatchesWalkOnRandomInputs) {
    std::mt19937_64 rng(72);
    std::uniform_int_distribution<int> len_dist(0, 40);
    std::uniform_int_distribution<Weight> w_dist(1, 8);
    std::uniform_int_distribution<Weight> room_dist(-4, 30);
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<Weight> st(len_dist(rng)), ts(len_dist(rng));
        for (auto& w : st) w = w_dist(rng);
        for (auto& w : ts) w = w_dist(rng);
        const Weight room_s = room_dist(rng), room_t = room_dist(rng);
        const Weight l_max_s = 100, l_max_t = 90;
        const auto walk = select_swap_prefixes(st, ts, l_max_s - room_s, l_max_t - room_t,
                                               l_max_s, l_max_t);
        const auto merge = select_swap_prefixes_merge(st, ts, l_max_s - room_s,
                                                      l_max_t - room_t, l_max_s, l_max_t);
        ASSERT_EQ(walk, merge) << "trial " << trial;
    }
}

TEST(SubRound, PlanPartitionsAllNodesDeterministically) {
    const auto plan = SubRoundPlan::create(37, 16, 9, 3);
    ASSERT_LE(plan.num_slices(), 16u);
    std::vector<NodeId> all;
    for (std::size_t s = 0; s < plan.num_slices(); ++s) {
        const auto slice = plan.slice(s);
        all.insert(all.end(), slice.begin(), slice.end());
    }
    EXPECT_EQ(all, plan.order);
    std::vector<NodeId> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    for (NodeId v = 0; v < 37; ++v) ASSERT_EQ(sorted[v], v);

    const auto again = SubRoundPlan::create(37, 16, 9, 3);
    EXPECT_EQ(plan.order, again.order);
    const auto other_round = SubRoundPlan::create(37, 16, 9, 4);
    EXPECT_NE(plan.order, other_round.order);
}

Hypergraph chain_with_one_good_move() {
    // 1 has gain +1 toward block 1; every other candidate gain is negative.
    return build_hypergraph(4, {{0, 1}, {1, 2}, {2, 3}}, {1, 1, 1, 1}, {1, 2, 3});
}

TEST(SyncLp, SingleImprovingMoveIsApplied) {
    const Hypergraph h = chain_with_one_good_move();
    const std::vector<BlockId> part{0, 0, 1, 1};
    PartitionedHypergraph ph(h, 2, part, 0.5);
    ASSERT_EQ(ph.km1(), 2);

    SyncLpConfig cfg;
    cfg.threads = 1;
    const auto report = sync_label_propagation(ph, cfg);
    EXPECT_EQ(ph.part(1), 1);
    EXPECT_EQ(ph.km1(), 1);
    EXPECT_EQ(report.improvement, 1);
    EXPECT_GE(report.moves_committed, 1u);
    EXPECT_TRUE(ph.balanced());
}

TEST(SyncLp, ZeroSlackSwapAppliesBothSides) {
    // 2 wants into block 1 and 3 into block 0 through disjoint nets; the
    // anchor nets pin everyone else. With zero slack neither single move is
    // feasible, only the paired swap.
    const Hypergraph h =
        build_hypergraph(6, {{0, 1}, {4, 5}, {2, 5}, {0, 3}}, {}, {5, 5, 1, 1});
    const std::vector<BlockId> part{0, 0, 0, 1, 1, 1};
    PartitionedHypergraph ph(h, 2, part, 0.0);
    ASSERT_EQ(ph.km1(), 2);
    ASSERT_EQ(ph.max_block_weight(0), 3);

    SyncLpConfig cfg;
    cfg.sub_rounds = 1;  // the crossing pair must meet in one sub-round
    const auto report = sync_label_propagation(ph, cfg);
    EXPECT_EQ(ph.km1(), 0);
    EXPECT_EQ(ph.part(2), 1);
    EXPECT_EQ(ph.part(3), 0);
    EXPECT_TRUE(ph.balanced());
    EXPECT_EQ(report.improvement, 2);
}

TEST(SyncLp, OptimalPartitionCommitsNothing) {
    const Hypergraph h = build_hypergraph(4, {{0, 1}, {2, 3}});
    const std::vector<BlockId> part{0, 0, 1, 1};
    PartitionedHypergraph ph(h, 2, part, 0.1);
    const auto report = sync_label_propagation(ph, {});
    EXPECT_EQ(report.rounds, 1);
    EXPECT_EQ(report.moves_committed, 0u);
    EXPECT_EQ(report.improvement, 0);
}

TEST(SyncLp, ThreadCountsProduceIdenticalPartitions) {
    std::mt19937_64 rng(401);
    for (int trial = 0; trial < 10; ++trial) {
        const NodeId n = 40 + static_cast<NodeId>(trial) * 5;
        const Hypergraph h = random_hypergraph(rng, n, n + n / 2, 4);
        const std::int32_t k = 2 + trial % 3;
        std::vector<BlockId> part(n);
        for (NodeId v = 0; v < n; ++v) part[v] = static_cast<BlockId>(v % k);

        std::vector<std::vector<BlockId>> results;
        std::vector<Gain> improvements;
        for (const int threads : {1, 2, 4, 8}) {
            PartitionedHypergraph ph(h, k, part, 0.05);
            SyncLpConfig cfg;
            cfg.seed = 7 + trial;
            cfg.threads = threads;
            const auto report = sync_label_propagation(ph, cfg);
            results.push_back(ph.partition_snapshot());
            improvements.push_back(report.improvement);
            EXPECT_TRUE(ph.consistent());
        }
        for (std::size_t r = 1; r < results.size(); ++r) {
            ASSERT_EQ(results[0], results[r]) << "trial " << trial;
            ASSERT_EQ(improvements[0], improvements[r]) << "trial " << trial;
        }
    }
}

TEST(SyncLp, NeverWorsensAndKeepsBalanceOnWeightedInstances) {
    std::mt19937_64 rng(402);
    for (int trial = 0; trial < 20; ++trial) {
        const NodeId n = 30 + static_cast<NodeId>(trial);
        const Hypergraph h = random_hypergraph(rng, n, n, 5, true);
        const std::int32_t k = 2 + trial % 2;

        // greedy heaviest-first seeding keeps the start balanced
        std::vector<NodeId> by_weight(n);
        for (NodeId v = 0; v < n; ++v) by_weight[v] = v;
        std::sort(by_weight.begin(), by_weight.end(), [&](NodeId a, NodeId b) {
            return std::make_pair(h.node_weight(a), a) > std::make_pair(h.node_weight(b), b);
        });
        std::vector<BlockId> part(n);
        std::vector<Weight> load(k, 0);
        for (const NodeId v : by_weight) {
            const auto lightest = static_cast<BlockId>(
                std::min_element(load.begin(), load.end()) - load.begin());
            part[v] = lightest;
            load[lightest] += h.node_weight(v);
        }
        PartitionedHypergraph ph(h, k, part, 0.1);
        if (!ph.balanced()) continue;

        const Gain before = ph.km1();
        SyncLpConfig cfg;
        cfg.seed = trial;
        cfg.threads = 2;
        sync_label_propagation(ph, cfg);
        EXPECT_LE(ph.km1(), before);
        EXPECT_TRUE(ph.balanced()) << "trial " << trial;
        EXPECT_TRUE(ph.consistent());
        EXPECT_EQ(ph.km1(),
                  brute_force_objective(h, ph.partition_snapshot(), Objective::kKm1));
    }
}

TEST(DeterministicClustering, CommitsTheLongestFittingPrefix) {
    // Nodes 1..3 all rate node 0 highest. Frozen weights let all three
    // propose, but the commit in ascending (weight, id) order fills the
    // cluster after the two unit nodes, so the heavy one is rejected.
    const Hypergraph h =
        build_hypergraph(4, {{0, 1}, {0, 2}, {0, 3}}, {3, 1, 1, 3}, {1, 1, 1});
    ClusteringConfig cfg;
    cfg.c_max = 6;
    cfg.max_shrink_factor = 100.0;
    cfg.deterministic = true;
    cfg.sub_rounds = 1;
    const Clustering clustering = compute_clustering(h, {}, cfg);
    EXPECT_EQ(clustering.rep(1), 0u);
    EXPECT_EQ(clustering.rep(2), 0u);
    EXPECT_EQ(clustering.rep(3), 3u);
    EXPECT_EQ(clustering.cluster_weight(0), 5);
    EXPECT_EQ(clustering.num_clusters(), 2);
}

TEST(DeterministicClustering, WholeGroupApprovedWhenTotalsFit) {
    const Hypergraph h =
        build_hypergraph(4, {{0, 1}, {0, 2}, {0, 3}}, {3, 1, 1, 3}, {1, 1, 1});
    ClusteringConfig cfg;
    cfg.c_max = 10;
    cfg.max_shrink_factor = 100.0;
    cfg.deterministic = true;
    cfg.sub_rounds = 1;
    const Clustering clustering = compute_clustering(h, {}, cfg);
    for (NodeId v = 1; v < 4; ++v) EXPECT_EQ(clustering.rep(v), 0u);
    EXPECT_EQ(clustering.cluster_weight(0), 8);
    EXPECT_EQ(clustering.num_clusters(), 1);
}

TEST(DeterministicClustering, EqualWeightsAdmitSmallestIdsFirst) {
    const Hypergraph h =
        build_hypergraph(4, {{0, 1}, {0, 2}, {0, 3}}, {3, 1, 1, 1}, {1, 1, 1});
    ClusteringConfig cfg;
    cfg.c_max = 5;
    cfg.max_shrink_factor = 100.0;
    cfg.deterministic = true;
    cfg.sub_rounds = 1;
    const Clustering clustering = compute_clustering(h, {}, cfg);
    EXPECT_EQ(clustering.rep(1), 0u);
    EXPECT_EQ(clustering.rep(2), 0u);
    EXPECT_EQ(clustering.rep(3), 3u);
}

TEST(VolumeAggregation, SingleUpdateIsItsOwnSum) {
    const auto out = deterministic_volume_aggregation({{4, 9, 2.5}}, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].first, 4u);
    EXPECT_EQ(out[0].second, 2.5);
}

TEST(VolumeAggregation, SubmissionOrderNeverChangesTheBits) {
    // In ascending node order the fold is (1e16 + 1.0) - 1e16 = 0.0; the
    // schedule order (+1e16, -1e16, +1.0) would give 1.0 instead.
    std::vector<VolumeUpdate> updates{{7, 0, 1e16}, {7, 1, 1.0}, {7, 2, -1e16}};
    std::sort(updates.begin(), updates.end(),
              [](const VolumeUpdate& a, const VolumeUpdate& b) { return a.node < b.node; });
    do {
        const auto out = deterministic_volume_aggregation(updates, 1);
        ASSERT_EQ(out.size(), 1u);
        EXPECT_EQ(out[0].first, 7u);
        EXPECT_EQ(out[0].second, 0.0);
    } while (std::next_permutation(updates.begin(), updates.end(),
                                   [](const VolumeUpdate& a, const VolumeUpdate& b) {
                                       return a.node < b.node;
                                   }));
    EXPECT_NE(1e16 + 1.0 - 1e16 + 0.0, (1e16 - 1e16) + 1.0);
}

TEST(VolumeAggregation, ThreadCountsAgreeBitForBit) {
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<NodeId> cluster_dist(0, 9);
    std::uniform_int_distribution<NodeId> node_dist(0, 99);
    std::uniform_real_distribution<double> small(-1.0, 1.0);
    std::vector<VolumeUpdate> updates;
    for (int i = 0; i < 200; ++i) {
        double delta = small(rng);
        if (i % 7 == 0) delta *= 1e15;  // mix magnitudes so order matters
        updates.push_back({cluster_dist(rng), node_dist(rng), delta});
    }
    const auto a = deterministic_volume_aggregation(updates, 1);
    const auto b = deterministic_volume_aggregation(updates, 4);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t g = 0; g < a.size(); ++g) {
        EXPECT_EQ(a[g].first, b[g].first);
        EXPECT_EQ(std::memcmp(&a[g].second, &b[g].second, sizeof(double)), 0);
    }

    // cross-check one group against a manual ascending-node fold
    const NodeId probe = a[0].first;
    std::vector<VolumeUpdate> group;
    for (const auto& u : updates)
        if (u.cluster == probe) group.push_back(u);
    std::sort(group.begin(), group.end(), [](const VolumeUpdate& x, const VolumeUpdate& y) {
        return std::tie(x.node, x.delta) < std::tie(y.node, y.delta);
    });
    double sum = 0.0;
    for (const auto& u : group) sum += u.delta;
    EXPECT_EQ(std::memcmp(&a[0].second, &sum, sizeof(double)), 0);
}

}  // namespace
}  // namespace hyperpart
