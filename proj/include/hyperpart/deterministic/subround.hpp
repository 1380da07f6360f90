// subround.hpp - seeded node-to-sub-round assignment for synchronous phases
#ifndef HYPERPART_DETERMINISTIC_SUBROUND_HPP
#define HYPERPART_DETERMINISTIC_SUBROUND_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

// Fixed assignment of nodes to sub-rounds: a permutation seeded by
// (seed, round) is cut into equal slices. Both the membership and the
// processing order within a sub-round depend only on the seed, never on
// scheduling.
struct SubRoundPlan {
    std::vector<NodeId> order;
    std::vector<std::pair<std::size_t, std::size_t>> slices;

    static SubRoundPlan create(NodeId n, int sub_rounds, std::uint64_t seed,
                               std::uint64_t round) {
        SubRoundPlan plan;
        auto rng = make_rng(seed_with(seed, 0x50b0, round));
        plan.order = random_permutation(n, rng);
        sub_rounds = std::max(1, sub_rounds);
        for (int s = 0; s < sub_rounds; ++s) {
            const std::size_t begin = static_cast<std::size_t>(n) * s / sub_rounds;
            const std::size_t end = static_cast<std::size_t>(n) * (s + 1) / sub_rounds;
            if (begin != end) plan.slices.emplace_back(begin, end);
        }
        return plan;
    }

    std::span<const NodeId> slice(std::size_t s) const {
        return {order.data() + slices[s].first, slices[s].second - slices[s].first};
    }
    std::size_t num_slices() const { return slices.size(); }
};

}  // namespace hyperpart

#endif
