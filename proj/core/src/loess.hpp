#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace xsim::detail {

/// Weighted least-squares polynomial fit of `values[left..right]` (abscissae = indices),
/// tricube weights with the given bandwidth, evaluated at `x`. The degree drops when too few
/// points carry weight or the normal equations are singular. Empty when every weight is zero.
std::optional<double> local_fit(std::span<const double> values, double x, std::size_t left,
                                std::size_t right, double bandwidth, int degree);

/// Loess estimate at `x` using the `span` nearest indices of `values`. A span longer than the
/// series widens the bandwidth by (span - n) / 2 as in Cleveland's STL.
std::optional<double> loess_at(std::span<const double> values, double x, std::size_t span, int degree);

}  // namespace xsim::detail
