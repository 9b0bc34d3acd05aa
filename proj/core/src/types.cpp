#include "xsim/types.hpp"

#include "xsim/error.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace xsim {

Frequency::Frequency(int period) : period_(period) {
    if (period < 1) {
        throw std::invalid_argument("frequency period must be >= 1, got " + std::to_string(period));
    }
}

TimeSeries::TimeSeries(std::string id, Frequency frequency, std::vector<double> values, int horizon)
    : id_(std::move(id)), frequency_(frequency), values_(std::move(values)), horizon_(horizon) {
    if (values_.empty()) {
        throw DataError("empty series '" + id_ + "'");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw DataError("series '" + id_ + "': non-finite value at index " + std::to_string(i));
        }
    }
    if (horizon_ < 1) {
        throw DataError("series '" + id_ + "': horizon must be >= 1");
    }
}

TimeSeries make_time_series(std::string id, Frequency frequency, std::vector<double> values, int horizon) {
    return TimeSeries(std::move(id), frequency, std::move(values), horizon);
}

PreprocessConfig PreprocessConfig::for_frequency(Frequency frequency) {
    PreprocessConfig config;
    switch (frequency.period()) {
    case 1:
    case 4:
        config.span_factor = 0.7;
        break;
    case 12:
        config.span_factor = 1.3;
        break;
    default:
        config.span_factor = 1.0;
    }
    return config;
}

PreprocessConfig PreprocessConfig::scaling_only() {
    PreprocessConfig config;
    config.enable_seasonal_adjustment = false;
    config.enable_smoothing = false;
    return config;
}

void PreprocessConfig::validate() const {
    if (!(span_factor > 0.0) || !std::isfinite(span_factor)) {
        throw std::invalid_argument("span_factor must be > 0");
    }
    if (!(acf_confidence_z > 0.0) || !std::isfinite(acf_confidence_z)) {
        throw std::invalid_argument("acf_confidence_z must be > 0");
    }
    if (!(lambda_lower >= 0.0 && lambda_lower <= lambda_upper && lambda_upper <= 1.0)) {
        throw std::invalid_argument("Box-Cox lambda range must satisfy 0 <= lower <= upper <= 1");
    }
}

std::uint64_t PreprocessConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_byte = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    auto mix_double = [&](double value) {
        const auto bits = std::bit_cast<std::uint64_t>(value);
        for (int i = 0; i < 8; ++i) {
            mix_byte(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    };
    mix_double(acf_confidence_z);
    mix_double(span_factor);
    mix_double(lambda_lower);
    mix_double(lambda_upper);
    mix_byte(enable_seasonal_adjustment ? 1 : 0);
    mix_byte(enable_smoothing ? 1 : 0);
    return h;
}

void ForecastConfig::validate() const {
    if (k < 1) {
        throw std::invalid_argument("k must be >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1)");
    }
    if (!(delta_grid_step > 0.0 && delta_grid_step <= 1.0)) {
        throw std::invalid_argument("delta_grid_step must lie in (0, 1]");
    }
}

std::string to_string(DistanceKind kind) {
    switch (kind) {
    case DistanceKind::L1:
        return "l1";
    case DistanceKind::L2:
        return "l2";
    case DistanceKind::DTW:
        return "dtw";
    }
    return "?";
}

std::string to_string(Aggregator aggregator) {
    switch (aggregator) {
    case Aggregator::Median:
        return "median";
    case Aggregator::Mean:
        return "mean";
    case Aggregator::WeightedMean:
        return "wmean";
    }
    return "?";
}

DistanceKind parse_distance(const std::string& text) {
    if (text == "l1") return DistanceKind::L1;
    if (text == "l2") return DistanceKind::L2;
    if (text == "dtw") return DistanceKind::DTW;
    throw std::invalid_argument("unknown distance '" + text + "' (expected l1, l2 or dtw)");
}

Aggregator parse_aggregator(const std::string& text) {
    if (text == "median") return Aggregator::Median;
    if (text == "mean") return Aggregator::Mean;
    if (text == "wmean") return Aggregator::WeightedMean;
    throw std::invalid_argument("unknown aggregator '" + text + "' (expected median, mean or wmean)");
}

ReferenceSet::ReferenceSet(std::size_t target_n, int horizon, Frequency frequency, PreprocessConfig config,
                           std::vector<ReferenceSeries> entries)
    : target_n_(target_n), horizon_(horizon), frequency_(frequency), config_(config),
      entries_(std::move(entries)) {
    if (entries_.empty()) {
        throw DataError("empty reference set");
    }
    if (target_n_ < 1 || horizon_ < 1) {
        throw DataError("reference set needs n >= 1 and h >= 1");
    }
    const auto h = static_cast<std::size_t>(horizon_);
    for (const auto& entry : entries_) {
        if (entry.history.size() != target_n_ || entry.preprocessed.scaled.size() != target_n_) {
            throw DataError("reference series '" + entry.id + "': history length " +
                            std::to_string(entry.history.size()) + " != n = " + std::to_string(target_n_));
        }
        if (entry.future_path.size() != h) {
            throw DataError("reference series '" + entry.id + "': future length " +
                            std::to_string(entry.future_path.size()) + " != h = " + std::to_string(h));
        }
    }
}

}  // namespace xsim
