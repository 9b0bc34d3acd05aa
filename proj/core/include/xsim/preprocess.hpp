#pragma once

#include "xsim/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace xsim {

/// Autocorrelations for lags 0..max_lag using the biased (divide by n) autocovariance.
/// A constant series yields 1 at lag 0 and 0 elsewhere.
[[nodiscard]] std::vector<double> acf(std::span<const double> values, std::size_t max_lag);

/// Lag-s autocorrelation significance test at critical value z.
///
/// Returns false for period 1 and for fewer than three full cycles. Otherwise true iff
/// |ACF_s| > z * sqrt((1 + 2 * sum_{i<s} ACF_i^2) / n).
[[nodiscard]] bool seasonality_test(std::span<const double> values, int period, double z);

struct LambdaSelection {
    double lambda = 1.0;
    /// Selection did not run: non-positive values or fewer than two blocks.
    bool fallback = false;
};

/// Guerrero's coefficient-of-variation criterion evaluated at one lambda.
/// Blocks of length max(period, 2) are taken from the end of the series.
[[nodiscard]] double guerrero_objective(std::span<const double> values, int period, double lambda);

/// Lambda in [lower, upper] minimising the Guerrero criterion: a 101-point grid followed by a
/// golden-section refinement around the best grid point. Ties resolve to the largest lambda.
[[nodiscard]] LambdaSelection guerrero_lambda(std::span<const double> values, int period,
                                              double lower = 0.0, double upper = 1.0);

/// log(x) for lambda 0, (x^lambda - 1) / lambda otherwise. For lambda < 1 every value must be
/// positive; lambda = 1 is a plain shift and accepts any value. Throws DomainError.
[[nodiscard]] std::vector<double> box_cox(std::span<const double> values, double lambda);

/// exp(x) for lambda 0, (lambda x + 1)^(1/lambda) otherwise. For 0 < lambda < 1 requires
/// lambda x + 1 > 0. Throws DomainError naming the first offending index.
[[nodiscard]] std::vector<double> inverse_box_cox(std::span<const double> values, double lambda);

struct StlComponents {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> remainder;
};

struct StlOptions {
    /// Cycle-subseries smoother span; 0 selects 10 * cycles + 1.
    std::size_t seasonal_span = 0;
    int seasonal_degree = 0;
    /// 0 selects the next odd integer >= 1.5 s / (1 - 1.5 / seasonal_span).
    std::size_t trend_span = 0;
    /// 0 selects the next odd integer >= s.
    std::size_t lowpass_span = 0;
    int inner_iterations = 2;
};

/// Additive STL decomposition (no robustness iterations). The remainder is the exact residual.
/// Requires period >= 2 and at least 2 * period + 1 observations.
[[nodiscard]] StlComponents stl_decompose(std::span<const double> values, int period,
                                          const StlOptions& options = {});

struct AdjustedSeries {
    std::vector<double> values;
    SeasonalAdjustment adjustment;
};

/// Seasonal adjustment. When `test_values` is non-empty the seasonality test runs on it instead of `values`
/// (reference series are tested on their full n+h window).
[[nodiscard]] AdjustedSeries seasonal_adjust(std::span<const double> values, int period,
                                             const PreprocessConfig& config,
                                             std::span<const double> test_values = {});

/// Local quadratic regression with tricube weights over the `span` nearest observations.
[[nodiscard]] std::vector<double> loess_smooth(std::span<const double> values, std::size_t span);

/// round(span_factor * h), clamped to [2, n].
[[nodiscard]] std::size_t smoothing_span(double span_factor, int horizon, std::size_t n);

/// Seasonal adjustment, Loess smoothing, then division by the forecast origin.
[[nodiscard]] PreprocessedSeries preprocess_series(const TimeSeries& series, const PreprocessConfig& config);

/// Same as preprocess_series over raw values; see seasonal_adjust for `test_values`.
[[nodiscard]] PreprocessedSeries preprocess_values(std::string id, std::span<const double> values,
                                                   Frequency frequency, int horizon,
                                                   const PreprocessConfig& config,
                                                   std::span<const double> test_values = {});

/// Inverse of the scaling and adjustment: multiply by the origin, then re-apply the latest seasonal cycle in Box-Cox space.
/// Step t (0-based) uses seasonal index n - s + (t mod s).
[[nodiscard]] std::vector<double> postprocess_forecast(std::span<const double> path,
                                                       const PreprocessedSeries& state, Frequency frequency);

/// Inverse of postprocess_forecast: removes the latest seasonal cycle and divides by the origin.
/// Used to bring a reference series' observed future onto its preprocessed scale.
[[nodiscard]] std::vector<double> normalize_future(std::span<const double> future,
                                                   const PreprocessedSeries& state, Frequency frequency);

}  // namespace xsim
