#pragma once

#include "xsim/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace xsim {

/// Sum of absolute deviations. Throws std::invalid_argument on a length mismatch.
[[nodiscard]] double distance_l1(std::span<const double> a, std::span<const double> b);

/// Euclidean distance. Throws std::invalid_argument on a length mismatch.
[[nodiscard]] double distance_l2(std::span<const double> a, std::span<const double> b);

/// Unconstrained dynamic time warping with absolute-difference cost and unit steps:
/// D(v,w) = |a_v - b_w| + min(D(v,w-1), D(v-1,w-1), D(v-1,w)), D(1,1) = |a_1 - b_1|.
/// Lengths may differ. Two-row rolling table, O(len(a) * len(b)) time.
[[nodiscard]] double distance_dtw(std::span<const double> a, std::span<const double> b);

[[nodiscard]] double distance(DistanceKind kind, std::span<const double> a, std::span<const double> b);

struct Neighbor {
    std::size_t index = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct NeighborSearch {
    /// Ascending by distance, ties by reference index.
    std::vector<Neighbor> neighbors;
    /// k exceeded the reference set size.
    bool truncated = false;
};

/// The k reference series whose preprocessed histories lie closest to `target`.
/// Distances are evaluated on up to `threads` workers; the result does not depend on the count.
[[nodiscard]] NeighborSearch nearest_k(std::span<const double> target, const ReferenceSet& references,
                                       DistanceKind kind, std::size_t k, unsigned threads = 1);

}  // namespace xsim
