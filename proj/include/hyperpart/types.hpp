// types.hpp - integral id/weight types and objective definitions
#ifndef HYPERPART_TYPES_HPP
#define HYPERPART_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hyperpart {

using NodeId = std::uint32_t;
using NetId = std::uint32_t;
using BlockId = std::int32_t;
using Weight = std::int64_t;
using Gain = std::int64_t;

inline constexpr NodeId kInvalidNode = std::numeric_limits<NodeId>::max();
inline constexpr NetId kInvalidNet = std::numeric_limits<NetId>::max();
inline constexpr BlockId kNoBlock = -1;

enum class Objective { kCut, kKm1, kSoed };

inline std::string objective_name(Objective o) {
    switch (o) {
        case Objective::kCut: return "cut";
        case Objective::kKm1: return "km1";
        case Objective::kSoed: return "soed";
    }
    return "?";
}

inline Objective objective_from_name(const std::string& s) {
    if (s == "cut") return Objective::kCut;
    if (s == "km1") return Objective::kKm1;
    if (s == "soed") return Objective::kSoed;
    throw std::invalid_argument("unknown objective: " + s);
}

// Largest block weight allowed for a balanced k-way partition:
// floor((1 + eps) * ceil(total / k)), computed so that floating point
// rounding cannot push an exactly-representable product below its value.
inline Weight max_block_weight(Weight total_weight, std::int32_t k, double eps) {
    if (k <= 0) throw std::invalid_argument("k must be positive");
    if (eps < 0.0) throw std::invalid_argument("epsilon must be non-negative");
    const Weight ceil_avg = (total_weight + k - 1) / k;
    const double extra = eps * static_cast<double>(ceil_avg);
    return ceil_avg + static_cast<Weight>(std::floor(extra + 1e-9));
}

struct Move {
    NodeId node = kInvalidNode;
    BlockId from = kNoBlock;
    BlockId to = kNoBlock;
};

inline bool operator==(const Move& a, const Move& b) {
    return a.node == b.node && a.from == b.from && a.to == b.to;
}

}  // namespace hyperpart

#endif
