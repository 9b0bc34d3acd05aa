#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xsim {

/// Observations per seasonal cycle (1 = yearly / non-seasonal, 4 = quarterly, 12 = monthly).
class Frequency {
public:
    explicit Frequency(int period);

    [[nodiscard]] int period() const noexcept { return period_; }
    [[nodiscard]] bool seasonal() const noexcept { return period_ > 1; }

    friend bool operator==(Frequency, Frequency) = default;

private:
    int period_;
};

/// Identified, frequency-tagged sequence of finite observations with a forecast horizon.
class TimeSeries {
public:
    TimeSeries(std::string id, Frequency frequency, std::vector<double> values, int horizon);

    [[nodiscard]] const std::string& id() const noexcept { return id_; }
    [[nodiscard]] Frequency frequency() const noexcept { return frequency_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::string id_;
    Frequency frequency_;
    std::vector<double> values_;
    int horizon_;
};

/// Validating factory; throws DataError on empty input, non-finite values or horizon < 1.
[[nodiscard]] TimeSeries make_time_series(std::string id, Frequency frequency,
                                          std::vector<double> values, int horizon);

struct PreprocessConfig {
    double acf_confidence_z = 1.645;
    double span_factor = 1.0;
    double lambda_lower = 0.0;
    double lambda_upper = 1.0;
    bool enable_seasonal_adjustment = true;
    bool enable_smoothing = true;

    /// Defaults keyed on the period: 0.7 for yearly/quarterly, 1.3 for monthly, 1.0 otherwise.
    [[nodiscard]] static PreprocessConfig for_frequency(Frequency frequency);
    /// Seasonal adjustment and smoothing disabled; only origin scaling remains.
    [[nodiscard]] static PreprocessConfig scaling_only();

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
    /// Stable 64-bit fingerprint of every field (FNV-1a over the little-endian encoding).
    [[nodiscard]] std::uint64_t hash() const;

    friend bool operator==(const PreprocessConfig&, const PreprocessConfig&) = default;
};

enum class DistanceKind { L1, L2, DTW };
enum class Aggregator { Median, Mean, WeightedMean };

struct ForecastConfig {
    DistanceKind distance = DistanceKind::DTW;
    std::size_t k = 500;
    Aggregator aggregator = Aggregator::Median;
    double alpha = 0.05;
    double delta_grid_step = 0.01;
    /// Worker cap for the neighbour search. Results do not depend on it.
    unsigned threads = 1;

    void validate() const;
};

[[nodiscard]] std::string to_string(DistanceKind kind);
[[nodiscard]] std::string to_string(Aggregator aggregator);
[[nodiscard]] DistanceKind parse_distance(const std::string& text);
[[nodiscard]] Aggregator parse_aggregator(const std::string& text);

/// State produced by seasonal adjustment. The seasonal component lives in Box-Cox space.
struct SeasonalAdjustment {
    double lambda = 1.0;
    std::vector<double> seasonal_component;
    bool was_seasonal = false;
    /// Guerrero selection could not run (non-positive or too-short input) and lambda fell back to 1.
    bool lambda_fallback = false;

    friend bool operator==(const SeasonalAdjustment&, const SeasonalAdjustment&) = default;
};

/// A preprocessed series together with everything needed to invert them.
struct PreprocessedSeries {
    std::string source_id;
    std::vector<double> scaled;
    /// Divisor of the scaling step: last smoothed, adjusted value (plus shift).
    double origin = 1.0;
    /// Additive shift applied before scaling when the natural origin was zero.
    double shift = 0.0;
    bool zero_origin_fallback = false;
    SeasonalAdjustment adjustment;

    friend bool operator==(const PreprocessedSeries&, const PreprocessedSeries&) = default;
};

struct ReferenceSeries {
    std::string id;
    std::vector<double> history;
    std::vector<double> future_path;
    PreprocessedSeries preprocessed;

    friend bool operator==(const ReferenceSeries&, const ReferenceSeries&) = default;
};

/// Immutable corpus of truncated, preprocessed reference series.
class ReferenceSet {
public:
    ReferenceSet(std::size_t target_n, int horizon, Frequency frequency, PreprocessConfig config,
                 std::vector<ReferenceSeries> entries);

    [[nodiscard]] std::size_t target_n() const noexcept { return target_n_; }
    [[nodiscard]] int horizon() const noexcept { return horizon_; }
    [[nodiscard]] Frequency frequency() const noexcept { return frequency_; }
    [[nodiscard]] const PreprocessConfig& config() const noexcept { return config_; }
    [[nodiscard]] std::span<const ReferenceSeries> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const ReferenceSeries& operator[](std::size_t i) const { return entries_.at(i); }

    friend bool operator==(const ReferenceSet&, const ReferenceSet&) = default;

private:
    std::size_t target_n_;
    int horizon_;
    Frequency frequency_;
    PreprocessConfig config_;
    std::vector<ReferenceSeries> entries_;
};

struct ForecastResult {
    std::string series_id;
    std::vector<double> point;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<std::string> neighbor_ids;
    std::vector<double> neighbor_distances;
    double delta_star = 0.0;
    bool calibration_skipped = false;
    /// k exceeded the reference set size and was capped.
    bool neighbors_truncated = false;
    /// Neighbour paths discarded because reseasonalisation left the Box-Cox domain.
    std::size_t dropped_paths = 0;

    friend bool operator==(const ForecastResult&, const ForecastResult&) = default;
};

}  // namespace xsim
