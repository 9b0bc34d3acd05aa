#pragma once

#include "xsim/similarity.hpp"
#include "xsim/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace xsim {

/// k candidate future paths on the target's scale and seasonality, one row per neighbour.
struct RescaledNeighborPaths {
    std::vector<std::vector<double>> paths;
    /// Distances of the neighbours that produced each row.
    std::vector<double> distances;
    std::vector<std::size_t> reference_indices;
    std::size_t dropped = 0;
};

/// Per-step Median / Mean / WeightedMean across paths. WeightedMean weights are 1 / (d + 1e-9),
/// normalised, and need one distance per path.
[[nodiscard]] std::vector<double> aggregate_paths(std::span<const std::vector<double>> paths, Aggregator aggregator,
                                                  std::span<const double> distances = {});

/// Linear interpolation between order statistics (the usual "type 7" estimator). `sorted` ascending.
[[nodiscard]] double empirical_quantile(std::span<const double> sorted, double probability);

struct IntervalBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};

/// L_t = (1 - delta) q(alpha/2), U_t = (1 + delta) q(1 - alpha/2) across the paths at each step.
/// Needs at least two paths.
[[nodiscard]] IntervalBounds interval_bounds(std::span<const std::vector<double>> paths, double alpha, double delta);

/// {0, step, 2 step, ...} up to 1, with 1 always included.
[[nodiscard]] std::vector<double> delta_grid(double step);

/// Neighbour futures mapped onto the target's scale and season: each future is seasonally adjusted with
/// the neighbour's own state and divided by its origin, then re-expanded with the target's origin and
/// seasonal indices. Paths that leave the Box-Cox domain are dropped and counted.
[[nodiscard]] RescaledNeighborPaths rescale_neighbor_paths(const PreprocessedSeries& target_state,
                                                           const ReferenceSet& references,
                                                           std::span<const Neighbor> neighbors);

struct PointForecast {
    PreprocessedSeries target_state;
    NeighborSearch search;
    RescaledNeighborPaths paths;
    std::vector<double> point;
};

/// Preprocessing, neighbour search and aggregation, without prediction intervals.
[[nodiscard]] PointForecast forecast_point(const TimeSeries& target, const ReferenceSet& references,
                                           const PreprocessConfig& preprocess_config,
                                           const ForecastConfig& forecast_config);

struct Calibration {
    double delta_star = 0.0;
    bool skipped = false;
    std::vector<double> grid;
    /// MSIS of the inner holdout for each grid value.
    std::vector<double> msis;
};

/// Grid search of the interval widening factor on an inner holdout of the last h observations.
///
/// The inner forecast runs against `inner_references` (a reference set for length n - h) when given;
/// otherwise the set is rebuilt from `references`. Skipped (delta 0) when n <= 2h, when fewer than two
/// neighbour paths survive, or when the inner in-sample scale is zero. Ties resolve to the smallest delta.
[[nodiscard]] Calibration calibrate_delta(const TimeSeries& target, const ReferenceSet& references,
                                          const PreprocessConfig& preprocess_config,
                                          const ForecastConfig& forecast_config,
                                          const ReferenceSet* inner_references = nullptr);

/// Full pipeline: point forecast, calibrated factor and prediction intervals.
/// Throws DataError when the target does not match the reference set's n, h, period or configuration.
[[nodiscard]] ForecastResult forecast(const TimeSeries& target, const ReferenceSet& references,
                                      const PreprocessConfig& preprocess_config, const ForecastConfig& forecast_config,
                                      const ReferenceSet* inner_references = nullptr);

}  // namespace xsim
