#include "xsim/preprocess.hpp"

#include "loess.hpp"
#include "xsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace xsim {

namespace {

constexpr std::size_t kLambdaGridPoints = 101;

std::size_t next_odd_at_least(double x) {
    auto v = static_cast<std::size_t>(std::ceil(x - 1e-12));
    if (v % 2 == 0) {
        ++v;
    }
    return std::max<std::size_t>(v, 3);
}

double sample_sd(std::span<const double> xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

// Centred moving average of the given length; output has size - length + 1 values.
std::vector<double> moving_average(std::span<const double> xs, std::size_t length) {
    std::vector<double> out(xs.size() - length + 1);
    double window = std::accumulate(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(length), 0.0);
    out[0] = window / static_cast<double>(length);
    for (std::size_t i = 1; i < out.size(); ++i) {
        window += xs[i + length - 1] - xs[i - 1];
        out[i] = window / static_cast<double>(length);
    }
    return out;
}

double smooth_at(std::span<const double> xs, double x, std::size_t span, int degree) {
    // An all-zero weight vector cannot occur for spans >= 2 evaluated inside or one step outside
    // the data range; fall back to the nearest observation anyway.
    if (auto fit = detail::loess_at(xs, x, span, degree)) {
        return *fit;
    }
    const auto nearest = static_cast<std::size_t>(std::clamp(std::round(x), 0.0, static_cast<double>(xs.size() - 1)));
    return xs[nearest];
}

std::size_t seasonal_index(std::size_t n, int period, std::size_t step) {
    const auto s = static_cast<std::size_t>(period);
    return n - s + step % s;
}

}  // namespace

std::vector<double> acf(std::span<const double> values, std::size_t max_lag) {
    const std::size_t n = values.size();
    std::vector<double> out(max_lag + 1, 0.0);
    if (n == 0) {
        return out;
    }
    out[0] = 1.0;
    const double mean = mean_of(values);
    double c0 = 0.0;
    for (double x : values) {
        c0 += (x - mean) * (x - mean);
    }
    if (c0 <= 0.0) {
        return out;
    }
    for (std::size_t lag = 1; lag <= max_lag && lag < n; ++lag) {
        double c = 0.0;
        for (std::size_t t = lag; t < n; ++t) {
            c += (values[t] - mean) * (values[t - lag] - mean);
        }
        out[lag] = c / c0;
    }
    return out;
}

bool seasonality_test(std::span<const double> values, int period, double z) {
    if (period <= 1) {
        return false;
    }
    const auto s = static_cast<std::size_t>(period);
    if (values.size() < 3 * s) {
        return false;
    }
    const auto r = acf(values, s);
    double sum_sq = 0.0;
    for (std::size_t i = 1; i < s; ++i) {
        sum_sq += r[i] * r[i];
    }
    const double limit = z * std::sqrt((1.0 + 2.0 * sum_sq) / static_cast<double>(values.size()));
    return std::abs(r[s]) > limit;
}

double guerrero_objective(std::span<const double> values, int period, double lambda) {
    const auto block = static_cast<std::size_t>(std::max(period, 2));
    const std::size_t blocks = values.size() / block;
    if (blocks < 2) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const std::size_t start = values.size() - blocks * block;
    std::vector<double> ratios(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto chunk = values.subspan(start + b * block, block);
        const double m = mean_of(chunk);
        ratios[b] = sample_sd(chunk, m) / std::pow(m, 1.0 - lambda);
    }
    const double rm = mean_of(ratios);
    return sample_sd(ratios, rm) / rm;
}

LambdaSelection guerrero_lambda(std::span<const double> values, int period, double lower, double upper) {
    if (!(lower >= 0.0 && lower <= upper && upper <= 1.0)) {
        throw std::invalid_argument("lambda range must satisfy 0 <= lower <= upper <= 1");
    }
    const auto block = static_cast<std::size_t>(std::max(period, 2));
    if (values.size() < 2 * block ||
        std::any_of(values.begin(), values.end(), [](double v) { return !(v > 0.0); })) {
        return {1.0, true};
    }
    auto objective = [&](double lambda) {
        const double v = guerrero_objective(values, period, lambda);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    const double step = (upper - lower) / static_cast<double>(kLambdaGridPoints - 1);
    double best = upper;
    double best_value = objective(upper);
    for (std::size_t i = kLambdaGridPoints - 1; i-- > 0;) {
        const double lambda = lower + step * static_cast<double>(i);
        const double v = objective(lambda);
        if (v < best_value) {
            best = lambda;
            best_value = v;
        }
    }
    if (!std::isfinite(best_value) || step <= 0.0) {
        return {best, false};
    }

    double a = std::max(lower, best - step);
    double b = std::min(upper, best + step);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    for (int iter = 0; iter < 60 && b - a > 1e-10; ++iter) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = objective(d);
        }
    }
    const double refined = 0.5 * (a + b);
    if (objective(refined) < best_value) {
        best = refined;
    }
    return {best, false};
}

std::vector<double> box_cox(std::span<const double> values, double lambda) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = values[i];
        if (lambda == 1.0) {
            out[i] = x - 1.0;
            continue;
        }
        if (!(x > 0.0)) {
            throw DomainError("Box-Cox with lambda " + std::to_string(lambda) + " needs positive values", i);
        }
        out[i] = lambda == 0.0 ? std::log(x) : (std::pow(x, lambda) - 1.0) / lambda;
    }
    return out;
}

std::vector<double> inverse_box_cox(std::span<const double> values, double lambda) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double y = values[i];
        if (lambda == 0.0) {
            out[i] = std::exp(y);
        } else if (lambda == 1.0) {
            out[i] = y + 1.0;
        } else {
            const double base = lambda * y + 1.0;
            if (!(base > 0.0)) {
                throw DomainError("inverse Box-Cox: lambda * x + 1 <= 0", i);
            }
            out[i] = std::pow(base, 1.0 / lambda);
        }
    }
    return out;
}

StlComponents stl_decompose(std::span<const double> values, int period, const StlOptions& options) {
    if (period < 2) {
        throw std::invalid_argument("STL needs a period >= 2");
    }
    const std::size_t n = values.size();
    const auto p = static_cast<std::size_t>(period);
    if (n < 2 * p + 1) {
        throw DataError("STL needs at least " + std::to_string(2 * p + 1) + " observations, got " +
                        std::to_string(n));
    }
    const std::size_t cycles = n / p;
    const std::size_t ns = options.seasonal_span != 0 ? options.seasonal_span : 10 * cycles + 1;
    const std::size_t nt = options.trend_span != 0
                               ? options.trend_span
                               : next_odd_at_least(1.5 * static_cast<double>(p) / (1.0 - 1.5 / static_cast<double>(ns)));
    const std::size_t nl = options.lowpass_span != 0 ? options.lowpass_span : next_odd_at_least(static_cast<double>(p));

    std::vector<double> trend(n, 0.0);
    std::vector<double> seasonal(n, 0.0);
    std::vector<double> detrended(n);
    std::vector<double> cycle(n + 2 * p);
    std::vector<double> sub;
    sub.reserve(n / p + 1);

    for (int iter = 0; iter < options.inner_iterations; ++iter) {
        for (std::size_t t = 0; t < n; ++t) {
            detrended[t] = values[t] - trend[t];
        }
        // Cycle-subseries smoothing, extended one cycle beyond each end.
        for (std::size_t j = 0; j < p; ++j) {
            sub.clear();
            for (std::size_t t = j; t < n; t += p) {
                sub.push_back(detrended[t]);
            }
            const auto k = static_cast<std::ptrdiff_t>(sub.size());
            for (std::ptrdiff_t pos = -1; pos <= k; ++pos) {
                cycle[static_cast<std::size_t>(pos + 1) * p + j] =
                    smooth_at(sub, static_cast<double>(pos), ns, options.seasonal_degree);
            }
        }
        // Low-pass filter of the cycle-subseries.
        auto low = moving_average(cycle, p);
        low = moving_average(low, p);
        low = moving_average(low, 3);
        for (std::size_t t = 0; t < n; ++t) {
            seasonal[t] = cycle[p + t] - smooth_at(low, static_cast<double>(t), nl, 1);
        }
        std::vector<double> deseasonalised(n);
        for (std::size_t t = 0; t < n; ++t) {
            deseasonalised[t] = values[t] - seasonal[t];
        }
        for (std::size_t t = 0; t < n; ++t) {
            trend[t] = smooth_at(deseasonalised, static_cast<double>(t), nt, 1);
        }
    }

    std::vector<double> remainder(n);
    for (std::size_t t = 0; t < n; ++t) {
        remainder[t] = values[t] - trend[t] - seasonal[t];
    }
    return {std::move(trend), std::move(seasonal), std::move(remainder)};
}

AdjustedSeries seasonal_adjust(std::span<const double> values, int period, const PreprocessConfig& config,
                               std::span<const double> test_values) {
    AdjustedSeries out;
    out.values.assign(values.begin(), values.end());
    out.adjustment.seasonal_component.assign(values.size(), 0.0);
    const auto probe = test_values.empty() ? values : test_values;
    const auto p = static_cast<std::size_t>(std::max(period, 1));
    if (!config.enable_seasonal_adjustment || values.size() < 2 * p + 1 ||
        !seasonality_test(probe, period, config.acf_confidence_z)) {
        return out;
    }

    const auto selection = guerrero_lambda(values, period, config.lambda_lower, config.lambda_upper);
    auto decompose = [&](double lambda) {
        const auto transformed = box_cox(values, lambda);
        auto parts = stl_decompose(transformed, period);
        std::vector<double> adjusted(values.size());
        for (std::size_t t = 0; t < values.size(); ++t) {
            adjusted[t] = parts.trend[t] + parts.remainder[t];
        }
        return std::pair{inverse_box_cox(adjusted, lambda), std::move(parts.seasonal)};
    };

    out.adjustment.was_seasonal = true;
    out.adjustment.lambda = selection.lambda;
    out.adjustment.lambda_fallback = selection.fallback;
    try {
        auto [adjusted, seasonal] = decompose(selection.lambda);
        out.values = std::move(adjusted);
        out.adjustment.seasonal_component = std::move(seasonal);
    } catch (const DomainError&) {
        // Removing the seasonal component left the inverse transform's domain; lambda 1 always inverts.
        auto [adjusted, seasonal] = decompose(1.0);
        out.values = std::move(adjusted);
        out.adjustment.seasonal_component = std::move(seasonal);
        out.adjustment.lambda = 1.0;
        out.adjustment.lambda_fallback = true;
    }
    return out;
}

std::vector<double> loess_smooth(std::span<const double> values, std::size_t span) {
    if (span < 2) {
        throw std::invalid_argument("loess span must cover at least 2 observations");
    }
    std::vector<double> out(values.size());
    for (std::size_t t = 0; t < values.size(); ++t) {
        out[t] = smooth_at(values, static_cast<double>(t), std::min(span, values.size()), 2);
    }
    return out;
}

std::size_t smoothing_span(double span_factor, int horizon, std::size_t n) {
    const auto raw = static_cast<std::size_t>(std::llround(span_factor * static_cast<double>(horizon)));
    return std::clamp<std::size_t>(raw, 2, std::max<std::size_t>(n, 2));
}

PreprocessedSeries preprocess_series(const TimeSeries& series, const PreprocessConfig& config) {
    return preprocess_values(series.id(), series.values(), series.frequency(), series.horizon(), config);
}

PreprocessedSeries preprocess_values(std::string id, std::span<const double> values, Frequency frequency, int horizon,
                                     const PreprocessConfig& config, std::span<const double> test_values) {
    if (values.empty()) {
        throw DataError("cannot preprocess an empty series '" + id + "'");
    }
    PreprocessedSeries out;
    out.source_id = std::move(id);

    auto adjusted = seasonal_adjust(values, frequency.period(), config, test_values);
    out.adjustment = std::move(adjusted.adjustment);
    std::vector<double> smoothed = std::move(adjusted.values);
    if (config.enable_smoothing && smoothed.size() >= 2) {
        smoothed = loess_smooth(smoothed, smoothing_span(config.span_factor, horizon, smoothed.size()));
    }

    double origin = smoothed.back();
    double magnitude = 0.0;
    for (double v : smoothed) {
        magnitude = std::max(magnitude, std::abs(v));
    }
    if (std::abs(origin) <= 1e-12 * magnitude || origin == 0.0) {
        const double lowest = *std::min_element(smoothed.begin(), smoothed.end());
        out.shift = 1.0 + std::abs(lowest);
        out.zero_origin_fallback = true;
        origin += out.shift;
    }
    out.origin = origin;
    out.scaled.resize(smoothed.size());
    for (std::size_t t = 0; t < smoothed.size(); ++t) {
        out.scaled[t] = (smoothed[t] + out.shift) / origin;
    }
    return out;
}

std::vector<double> postprocess_forecast(std::span<const double> path, const PreprocessedSeries& state,
                                         Frequency frequency) {
    std::vector<double> out(path.size());
    for (std::size_t t = 0; t < path.size(); ++t) {
        out[t] = path[t] * state.origin - state.shift;
    }
    const auto& adj = state.adjustment;
    if (!adj.was_seasonal) {
        return out;
    }
    auto transformed = box_cox(out, adj.lambda);
    const std::size_t n = adj.seasonal_component.size();
    for (std::size_t t = 0; t < transformed.size(); ++t) {
        transformed[t] += adj.seasonal_component[seasonal_index(n, frequency.period(), t)];
    }
    return inverse_box_cox(transformed, adj.lambda);
}

std::vector<double> normalize_future(std::span<const double> future, const PreprocessedSeries& state,
                                     Frequency frequency) {
    std::vector<double> out(future.begin(), future.end());
    const auto& adj = state.adjustment;
    if (adj.was_seasonal) {
        auto transformed = box_cox(out, adj.lambda);
        const std::size_t n = adj.seasonal_component.size();
        for (std::size_t t = 0; t < transformed.size(); ++t) {
            transformed[t] -= adj.seasonal_component[seasonal_index(n, frequency.period(), t)];
        }
        out = inverse_box_cox(transformed, adj.lambda);
    }
    for (double& v : out) {
        v = (v + state.shift) / state.origin;
    }
    return out;
}

}  // namespace xsim
