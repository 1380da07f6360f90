// volume_aggregation.hpp - schedule-independent reduction of float volume deltas
#ifndef HYPERPART_DETERMINISTIC_VOLUME_AGGREGATION_HPP
#define HYPERPART_DETERMINISTIC_VOLUME_AGGREGATION_HPP

#include <algorithm>
#include <tuple>
#include <utility>
#include <vector>

#include "../parallel/parallel.hpp"
#include "../types.hpp"

namespace hyperpart {

struct VolumeUpdate {
    NodeId cluster = kInvalidNode;
    NodeId node = kInvalidNode;
    double delta = 0.0;
};

// Floating point addition is not associative, so summing volume deltas in
// scheduling order makes parallel runs drift. This reduction fixes the order
// instead: updates are grouped by cluster and each group is folded left to
// right in ascending node id by a single worker. The returned (cluster, sum)
// pairs are bit-identical for any thread count and any submission order.
inline std::vector<std::pair<NodeId, double>> deterministic_volume_aggregation(
    std::vector<VolumeUpdate> updates, int threads = 1) {
    std::sort(updates.begin(), updates.end(), [](const VolumeUpdate& a, const VolumeUpdate& b) {
        return std::tie(a.cluster, a.node, a.delta) < std::tie(b.cluster, b.node, b.delta);
    });
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < updates.size(); ++i)
        if (i == 0 || updates[i].cluster != updates[i - 1].cluster) starts.push_back(i);
    starts.push_back(updates.size());

    const std::size_t groups = starts.empty() ? 0 : starts.size() - 1;
    std::vector<std::pair<NodeId, double>> out(groups);
    par::for_each(threads, groups, [&](std::size_t g) {
        double sum = 0.0;
        for (std::size_t i = starts[g]; i < starts[g + 1]; ++i) sum += updates[i].delta;
        out[g] = {updates[starts[g]].cluster, sum};
    });
    return out;
}

}  // namespace hyperpart

#endif
