#include "xsim/forecaster.hpp"

#include "xsim/dataio.hpp"
#include "xsim/error.hpp"
#include "xsim/metrics.hpp"
#include "xsim/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace xsim {

namespace {

constexpr double kWeightEpsilon = 1e-9;

double median_of(std::vector<double>& xs) {
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    const double upper = xs[mid];
    if (xs.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::size_t path_length(std::span<const std::vector<double>> paths) {
    const std::size_t h = paths.front().size();
    for (const auto& p : paths) {
        if (p.size() != h) {
            throw std::invalid_argument("paths have different lengths");
        }
    }
    return h;
}

void check_shape(const TimeSeries& target, const ReferenceSet& references, const PreprocessConfig& config) {
    if (target.size() != references.target_n()) {
        throw DataError("series '" + target.id() + "' has n = " + std::to_string(target.size()) +
                        " but the reference set was built for n = " + std::to_string(references.target_n()));
    }
    if (target.horizon() != references.horizon()) {
        throw DataError("series '" + target.id() + "' has h = " + std::to_string(target.horizon()) +
                        " but the reference set was built for h = " + std::to_string(references.horizon()));
    }
    if (target.frequency() != references.frequency()) {
        throw DataError("series '" + target.id() + "' has period " + std::to_string(target.frequency().period()) +
                        " but the reference set has period " + std::to_string(references.frequency().period()));
    }
    if (!(config == references.config())) {
        throw DataError("config mismatch: target preprocessing differs from the reference set's configuration");
    }
}

}  // namespace

std::vector<double> aggregate_paths(std::span<const std::vector<double>> paths, Aggregator aggregator,
                                    std::span<const double> distances) {
    if (paths.empty()) {
        throw std::invalid_argument("cannot aggregate zero paths");
    }
    const std::size_t h = path_length(paths);
    std::vector<double> weights;
    if (aggregator == Aggregator::WeightedMean) {
        if (distances.size() != paths.size()) {
            throw std::invalid_argument("weighted mean needs one distance per path");
        }
        weights.resize(paths.size());
        double total = 0.0;
        for (std::size_t i = 0; i < paths.size(); ++i) {
            weights[i] = 1.0 / (distances[i] + kWeightEpsilon);
            total += weights[i];
        }
        for (double& w : weights) w /= total;
    }

    std::vector<double> out(h);
    std::vector<double> column(paths.size());
    for (std::size_t t = 0; t < h; ++t) {
        for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i][t];
        switch (aggregator) {
        case Aggregator::Median:
            out[t] = median_of(column);
            break;
        case Aggregator::Mean: {
            double sum = 0.0;
            for (double v : column) sum += v;
            out[t] = sum / static_cast<double>(column.size());
            break;
        }
        case Aggregator::WeightedMean: {
            double sum = 0.0;
            for (std::size_t i = 0; i < column.size(); ++i) sum += weights[i] * column[i];
            out[t] = sum;
            break;
        }
        }
    }
    return out;
}

double empirical_quantile(std::span<const double> sorted, double probability) {
    if (sorted.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    const double pos = probability * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

IntervalBounds interval_bounds(std::span<const std::vector<double>> paths, double alpha, double delta) {
    if (paths.size() < 2) {
        throw std::invalid_argument("prediction intervals need at least two paths");
    }
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("delta must lie in [0, 1]");
    }
    const std::size_t h = path_length(paths);
    IntervalBounds out{std::vector<double>(h), std::vector<double>(h)};
    std::vector<double> column(paths.size());
    for (std::size_t t = 0; t < h; ++t) {
        for (std::size_t i = 0; i < paths.size(); ++i) column[i] = paths[i][t];
        std::sort(column.begin(), column.end());
        out.lower[t] = (1.0 - delta) * empirical_quantile(column, alpha / 2.0);
        out.upper[t] = (1.0 + delta) * empirical_quantile(column, 1.0 - alpha / 2.0);
    }
    return out;
}

std::vector<double> delta_grid(double step) {
    if (!(step > 0.0 && step <= 1.0)) {
        throw std::invalid_argument("delta grid step must lie in (0, 1]");
    }
    std::vector<double> grid;
    for (std::size_t i = 0;; ++i) {
        const double delta = static_cast<double>(i) * step;
        if (delta > 1.0 + 1e-9) break;
        grid.push_back(std::min(delta, 1.0));
    }
    if (grid.back() < 1.0) {
        grid.push_back(1.0);
    }
    return grid;
}

RescaledNeighborPaths rescale_neighbor_paths(const PreprocessedSeries& target_state, const ReferenceSet& references,
                                             std::span<const Neighbor> neighbors) {
    RescaledNeighborPaths out;
    out.paths.reserve(neighbors.size());
    for (const auto& nb : neighbors) {
        const auto& entry = references[nb.index];
        try {
            const auto normalized = normalize_future(entry.future_path, entry.preprocessed, references.frequency());
            out.paths.push_back(postprocess_forecast(normalized, target_state, references.frequency()));
            out.distances.push_back(nb.distance);
            out.reference_indices.push_back(nb.index);
        } catch (const DomainError&) {
            ++out.dropped;
        }
    }
    return out;
}

PointForecast forecast_point(const TimeSeries& target, const ReferenceSet& references,
                             const PreprocessConfig& preprocess_config, const ForecastConfig& forecast_config) {
    forecast_config.validate();
    check_shape(target, references, preprocess_config);
    PointForecast out;
    out.target_state = preprocess_series(target, preprocess_config);
    out.search = nearest_k(out.target_state.scaled, references, forecast_config.distance, forecast_config.k,
                           forecast_config.threads);
    out.paths = rescale_neighbor_paths(out.target_state, references, out.search.neighbors);
    if (out.paths.paths.empty()) {
        throw DataError("series '" + target.id() + "': every neighbour path left the Box-Cox domain");
    }
    out.point = aggregate_paths(out.paths.paths, forecast_config.aggregator, out.paths.distances);
    return out;
}

Calibration calibrate_delta(const TimeSeries& target, const ReferenceSet& references,
                            const PreprocessConfig& preprocess_config, const ForecastConfig& forecast_config,
                            const ReferenceSet* inner_references) {
    forecast_config.validate();
    Calibration out;
    out.grid = delta_grid(forecast_config.delta_grid_step);
    const std::size_t n = target.size();
    const auto h = static_cast<std::size_t>(target.horizon());
    const auto period = static_cast<std::size_t>(target.frequency().period());
    if (n <= 2 * h || n - h <= period) {
        out.skipped = true;
        return out;
    }

    const auto values = target.values();
    const TimeSeries inner(target.id(), target.frequency(),
                           std::vector<double>(values.begin(), values.end() - static_cast<std::ptrdiff_t>(h)),
                           target.horizon());
    const auto holdout = values.last(h);

    std::optional<ReferenceSet> rebuilt;
    if (inner_references == nullptr) {
        rebuilt.emplace(rebuild_reference_set(references, n - h, forecast_config.threads));
        inner_references = &*rebuilt;
    }
    const auto inner_forecast = forecast_point(inner, *inner_references, preprocess_config, forecast_config);
    if (inner_forecast.paths.paths.size() < 2) {
        out.skipped = true;
        return out;
    }

    double best = std::numeric_limits<double>::infinity();
    out.msis.reserve(out.grid.size());
    try {
        for (double delta : out.grid) {
            const auto bounds = interval_bounds(inner_forecast.paths.paths, forecast_config.alpha, delta);
            const double score = msis(holdout, bounds.lower, bounds.upper, inner.values(),
                                      target.frequency().period(), forecast_config.alpha);
            out.msis.push_back(score);
            if (score < best) {
                best = score;
                out.delta_star = delta;
            }
        }
    } catch (const ZeroDenominatorError&) {
        out.skipped = true;
        out.delta_star = 0.0;
        out.msis.clear();
    }
    return out;
}

ForecastResult forecast(const TimeSeries& target, const ReferenceSet& references,
                        const PreprocessConfig& preprocess_config, const ForecastConfig& forecast_config,
                        const ReferenceSet* inner_references) {
    const auto pf = forecast_point(target, references, preprocess_config, forecast_config);

    ForecastResult result;
    result.series_id = target.id();
    result.point = pf.point;
    result.neighbors_truncated = pf.search.truncated;
    result.dropped_paths = pf.paths.dropped;
    for (std::size_t i = 0; i < pf.paths.reference_indices.size(); ++i) {
        result.neighbor_ids.push_back(references[pf.paths.reference_indices[i]].id);
        result.neighbor_distances.push_back(pf.paths.distances[i]);
    }

    if (pf.paths.paths.size() < 2) {
        // A single path has no spread to calibrate.
        result.lower = result.point;
        result.upper = result.point;
        result.calibration_skipped = true;
        return result;
    }
    const auto calibration =
        calibrate_delta(target, references, preprocess_config, forecast_config, inner_references);
    result.delta_star = calibration.delta_star;
    result.calibration_skipped = calibration.skipped;
    auto bounds = interval_bounds(pf.paths.paths, forecast_config.alpha, result.delta_star);
    result.lower = std::move(bounds.lower);
    result.upper = std::move(bounds.upper);
    return result;
}

}  // namespace xsim
