// swap_prefixes.hpp - balanced prefix selection for synchronous swap refinement
#ifndef HYPERPART_DETERMINISTIC_SWAP_PREFIXES_HPP
#define HYPERPART_DETERMINISTIC_SWAP_PREFIXES_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "../types.hpp"

namespace hyperpart {

namespace detail {

inline std::vector<Weight> prefix_weights(std::span<const Weight> w) {
    std::vector<Weight> sums(w.size() + 1, 0);
    for (std::size_t i = 0; i < w.size(); ++i) sums[i + 1] = sums[i] + w[i];
    return sums;
}

}  // namespace detail

// Selects prefixes M_st[0:i] and M_ts[0:j] of two opposing move sequences
// (each sorted by descending gain) so that swapping them keeps both blocks
// within their caps. x(i,j) is the net weight shifted from V_s to V_t; a
// pair is feasible iff -(l_max_s - c_s) <= x(i,j) <= l_max_t - c_t. The two
// pointers chase the crossing of the cumulative weights: the st pointer
// advances while x <= 0, the ts pointer while x > 0, and at an exact tie
// both continuations are inspected. Among the visited feasible pairs the
// longest wins, preferring the larger st prefix on equal length; (0,0) is
// returned when nothing feasible was seen. Weights must be positive.
inline std::pair<std::size_t, std::size_t> select_swap_prefixes(
    std::span<const Weight> st, std::span<const Weight> ts, Weight c_s, Weight c_t,
    Weight l_max_s, Weight l_max_t) {
    const Weight room_s = l_max_s - c_s;  // how far x may go negative
    const Weight room_t = l_max_t - c_t;  // how far x may go positive
    const std::size_t n = st.size(), m = ts.size();

    std::pair<std::size_t, std::size_t> best{0, 0};
    std::ptrdiff_t best_len = -1;
    auto consider = [&](std::size_t i, std::size_t j, Weight x) {
        if (x < -room_s || x > room_t) return;
        const auto len = static_cast<std::ptrdiff_t>(i + j);
        if (len >= best_len) {
            best = {i, j};
            best_len = len;
        }
    };

    std::size_t i = 0, j = 0;
    Weight x = 0;
    consider(0, 0, 0);
    while (i < n || j < m) {
        const bool take_st = x <= 0 ? i < n : j >= m;
        if (take_st) {
            if (x == 0 && j < m) consider(i, j + 1, x - ts[j]);  // the other tie branch
            x += st[i++];
        } else {
            x -= ts[j++];
        }
        consider(i, j, x);
    }
    return best;
}

inline std::pair<std::size_t, std::size_t> select_swap_prefixes(
    std::span<const Weight> st, std::span<const Weight> ts, Weight c_s, Weight c_t,
    Weight l_max) {
    return select_swap_prefixes(st, ts, c_s, c_t, l_max, l_max);
}

namespace detail {

// Recursive binary-search merge computing the same selection as the walk.
// Columns are st prefix lengths; column i pairs with the window of ts
// prefixes the walk crosses there, derived from the cumulative weights S and
// T: the window starts where the previous column stopped and ends at the
// first ts prefix at least as heavy, extended by one on an exact tie. A
// column with a feasible entry dominates everything to its left (the window
// starts never decrease), and a column whose lightest pairing already
// overshoots the target-side room kills everything to its right, so those
// subcalls are skipped. Sub-ranges are independent; the right one wins.
class SwapPrefixMerge {
public:
    SwapPrefixMerge(std::span<const Weight> st, std::span<const Weight> ts, Weight room_s,
                    Weight room_t)
        : s_(prefix_weights(st)),
          t_(prefix_weights(ts)),
          m_(ts.size()),
          room_s_(room_s),
          room_t_(room_t) {}

    std::pair<std::size_t, std::size_t> run() {
        return search(0, static_cast<std::ptrdiff_t>(s_.size()) - 1)
            .value_or(std::pair<std::size_t, std::size_t>{0, 0});
    }

private:
    using Pair = std::pair<std::size_t, std::size_t>;

    // smallest ts prefix at least as heavy as value, clamped to m
    std::size_t crossing(Weight value) const {
        const auto it = std::lower_bound(t_.begin(), t_.end(), value);
        return std::min<std::size_t>(static_cast<std::size_t>(it - t_.begin()), m_);
    }

    std::optional<Pair> column_best(std::size_t i) const {
        const std::size_t n = s_.size() - 1;
        const std::size_t bottom = i == 0 ? 0 : crossing(s_[i - 1]);
        std::size_t top;
        if (i == n) {
            top = m_;
        } else {
            top = crossing(s_[i]);
            if (top < m_ && t_[top] == s_[i]) ++top;  // tie branch of the walk
        }
        // feasibility bounds: s_[i] - t_[j] must lie in [-room_s, room_t]
        const auto lo_it = std::lower_bound(t_.begin(), t_.end(), s_[i] - room_t_);
        const auto hi_it = std::upper_bound(t_.begin(), t_.end(), s_[i] + room_s_);
        if (lo_it == t_.end() || hi_it == t_.begin()) return std::nullopt;
        const auto j_lo = static_cast<std::size_t>(lo_it - t_.begin());
        const auto j_hi = static_cast<std::size_t>(hi_it - t_.begin()) - 1;
        const std::size_t lo = std::max(bottom, j_lo);
        const std::size_t hi = std::min(top, j_hi);
        if (lo > hi) return std::nullopt;
        return Pair{i, hi};
    }

    std::optional<Pair> search(std::ptrdiff_t lo, std::ptrdiff_t hi) const {
        if (lo > hi) return std::nullopt;
        const std::ptrdiff_t mid = lo + (hi - lo) / 2;
        const auto own = column_best(static_cast<std::size_t>(mid));
        const bool right_dead = s_[mid] - t_[m_] > room_t_;
        if (!right_dead) {
            if (const auto right = search(mid + 1, hi); right.has_value()) return right;
        }
        if (own.has_value()) return own;  // left columns cannot be longer
        return search(lo, mid - 1);
    }

    std::vector<Weight> s_;
    std::vector<Weight> t_;
    std::size_t m_;
    Weight room_s_;
    Weight room_t_;
};

}  // namespace detail

inline std::pair<std::size_t, std::size_t> select_swap_prefixes_merge(
    std::span<const Weight> st, std::span<const Weight> ts, Weight c_s, Weight c_t,
    Weight l_max_s, Weight l_max_t) {
    return detail::SwapPrefixMerge(st, ts, l_max_s - c_s, l_max_t - c_t).run();
}

inline std::pair<std::size_t, std::size_t> select_swap_prefixes_merge(
    std::span<const Weight> st, std::span<const Weight> ts, Weight c_s, Weight c_t,
    Weight l_max) {
    return select_swap_prefixes_merge(st, ts, c_s, c_t, l_max, l_max);
}

}  // namespace hyperpart

#endif
