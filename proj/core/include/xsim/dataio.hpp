#pragma once

#include "xsim/types.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xsim {

/// One series of a corpus file.
struct CorpusRecord {
    std::string id;
    /// "yearly", "quarterly", "monthly" or "other:<s>".
    std::string frequency_label;
    int period = 1;
    std::vector<double> values;
    int horizon = 1;

    friend bool operator==(const CorpusRecord&, const CorpusRecord&) = default;
};

/// Period for a frequency label; throws DataError for unknown labels.
[[nodiscard]] int period_for_label(const std::string& label);
/// Default horizon for a label (yearly 6, quarterly 8, monthly 18), empty for "other:<s>".
[[nodiscard]] std::optional<int> default_horizon(const std::string& label);
/// Canonical label for a period (1 yearly, 4 quarterly, 12 monthly, otherwise other:<s>).
[[nodiscard]] std::string label_for_period(int period);

/// Parses the long CSV layout `series_id,frequency,index,value[,horizon]`.
/// Rows of one series must be contiguous with indices 1, 2, 3, ...
/// Errors carry the source name and the 1-based line number.
[[nodiscard]] std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& source = "<stream>");
[[nodiscard]] std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const CorpusRecord> records);

[[nodiscard]] TimeSeries to_time_series(const CorpusRecord& record);

/// Keeps the last max_years * period observations (max_years for period 1).
[[nodiscard]] TimeSeries apply_history_cut(const TimeSeries& series, int max_years);

struct ReferenceBuild {
    ReferenceSet set;
    /// Series shorter than n + h.
    std::size_t dropped_short = 0;
    /// Series whose period differs from the requested frequency.
    std::size_t dropped_frequency = 0;
};

/// Truncates every eligible record to its last n + h values, splits history / future and
/// preprocesses each history. Order follows the corpus. Throws DataError if nothing survives.
[[nodiscard]] ReferenceBuild build_reference_set(std::span<const CorpusRecord> corpus, std::size_t target_n,
                                                 int horizon, Frequency frequency, const PreprocessConfig& config,
                                                 unsigned threads = 1);

/// Re-derives a reference set for a shorter target length from the raw windows stored in `source`.
[[nodiscard]] ReferenceSet rebuild_reference_set(const ReferenceSet& source, std::size_t target_n,
                                                 unsigned threads = 1);

inline constexpr std::uint32_t kReferenceFormatVersion = 1;

/// Versioned little-endian binary layout with a trailing CRC-32.
void save_reference_set(const ReferenceSet& set, const std::filesystem::path& path);
[[nodiscard]] std::vector<std::uint8_t> encode_reference_set(const ReferenceSet& set);

/// Throws DataError on checksum/version/format problems and, when `requested` is given,
/// on a preprocessing configuration mismatch.
[[nodiscard]] ReferenceSet load_reference_set(const std::filesystem::path& path,
                                              const std::optional<PreprocessConfig>& requested = std::nullopt);
[[nodiscard]] ReferenceSet decode_reference_set(std::span<const std::uint8_t> bytes,
                                                const std::optional<PreprocessConfig>& requested = std::nullopt);

[[nodiscard]] nlohmann::json to_json(const PreprocessConfig& config);
[[nodiscard]] nlohmann::json to_json(const ForecastConfig& config);
[[nodiscard]] nlohmann::json to_json(const ReferenceSet& set);
[[nodiscard]] nlohmann::json to_json(const ForecastResult& result);
[[nodiscard]] ForecastResult forecast_from_json(const nlohmann::json& j);

}  // namespace xsim
