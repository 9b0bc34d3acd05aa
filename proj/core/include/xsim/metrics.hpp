#pragma once

#include "xsim/types.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xsim {

/// Mean absolute seasonal difference of the in-sample data: (1/(n-s)) sum_{t>s} |y_t - y_{t-s}|.
/// Throws std::invalid_argument when n <= s and ZeroDenominatorError when it is zero.
[[nodiscard]] double scale_denominator(std::span<const double> insample, int period);

[[nodiscard]] double mase(std::span<const double> actuals, std::span<const double> forecasts,
                          std::span<const double> insample, int period);

/// Mean scaled interval score: width plus (2/alpha)-weighted misses, scaled like MASE.
[[nodiscard]] double msis(std::span<const double> actuals, std::span<const double> lower,
                          std::span<const double> upper, std::span<const double> insample, int period, double alpha);

struct CoverageStats {
    /// Share of actuals strictly inside (L, U).
    double coverage = 0.0;
    /// Share of actuals strictly below U.
    double upper_coverage = 0.0;
    /// Mean width over the MASE denominator.
    double spread = 0.0;
};

[[nodiscard]] CoverageStats coverage_stats(std::span<const double> actuals, std::span<const double> lower,
                                           std::span<const double> upper, std::span<const double> insample,
                                           int period);

/// Periodogram at the Fourier frequencies 2 pi j / N, j = 1..floor(N/2), of the demeaned series,
/// smoothed with a modified Daniell kernel of half-width m (reflected at the ends).
[[nodiscard]] std::vector<double> smoothed_periodogram(std::span<const double> values, std::size_t daniell_m = 1);

struct Forecastability {
    double value = 1.0;
    /// Constant input; the spectrum is degenerate and the value is pinned at the maximum, 1.
    bool constant = false;
};

/// 1 minus the normalised spectral entropy: 1 + sum p_j log_J p_j over the J smoothed periodogram
/// ordinates (p summing to 1, 0 log 0 = 0). Lies in [0, 1]; larger means more signal.
/// Needs at least 8 observations.
[[nodiscard]] Forecastability forecastability(std::span<const double> values, std::size_t daniell_m = 1);

/// Upper `probability` quantile of the range of `groups` independent standard normals
/// (studentized range with infinite degrees of freedom).
[[nodiscard]] double studentized_range_quantile(std::size_t groups, double probability = 0.95);

struct MeanRank {
    double mean_rank = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
};

/// Mean ranks across series (rank 1 = lowest score, ties averaged) with Nemenyi-style intervals of
/// half-width critical * sqrt(K (K + 1) / (12 N)). The default critical value is q_{0.95}(K, inf) / 2,
/// so two intervals overlap exactly when the mean ranks differ by less than the critical difference.
[[nodiscard]] std::map<std::string, MeanRank> mcb_ranks(const std::map<std::string, std::vector<double>>& scores,
                                                        std::optional<double> critical_value = std::nullopt);

struct SeriesScores {
    std::string method;
    std::string series_id;
    std::string frequency;
    double mase = 0.0;
    double msis = 0.0;
    double coverage = 0.0;
    double upper_coverage = 0.0;
    double spread = 0.0;
};

struct SeriesEvaluationInput {
    std::string method;
    std::string series_id;
    std::string frequency;
    std::span<const double> insample;
    int period = 1;
    std::span<const double> actuals;
    std::span<const double> point;
    std::span<const double> lower;
    std::span<const double> upper;
};

/// Scores one series; empty when the in-sample denominator is zero.
[[nodiscard]] std::optional<SeriesScores> evaluate_series(const SeriesEvaluationInput& input, double alpha);

struct AggregateScores {
    std::size_t count = 0;
    double mase = 0.0;
    double msis = 0.0;
    double coverage = 0.0;
    double upper_coverage = 0.0;
    double spread = 0.0;
};

struct Exclusion {
    std::string method;
    std::string series_id;
    std::string reason;
};

struct EvaluationReport {
    std::vector<SeriesScores> per_series;
    /// method -> frequency label -> unweighted mean.
    std::map<std::string, std::map<std::string, AggregateScores>> by_frequency;
    /// method -> count-weighted mean of the frequency means (equivalently the pooled mean).
    std::map<std::string, AggregateScores> total;
    std::vector<Exclusion> exclusions;
};

[[nodiscard]] EvaluationReport build_report(std::vector<SeriesScores> rows, std::vector<Exclusion> exclusions = {});

/// One row per (method, series): method,series_id,frequency,mase,msis,coverage,upper_coverage,spread.
[[nodiscard]] std::string report_rows_csv(const EvaluationReport& report);
[[nodiscard]] nlohmann::json report_aggregate_json(const EvaluationReport& report);

}  // namespace xsim
