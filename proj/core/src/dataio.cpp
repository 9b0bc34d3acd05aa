#include "xsim/dataio.hpp"

#include "xsim/error.hpp"
#include "xsim/preprocess.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <thread>

namespace xsim {

namespace {

constexpr char kMagic[8] = {'X', 'S', 'I', 'M', 'R', 'E', 'F', '1'};

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    text = trim(text);
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        return std::nullopt;
    }
    return value;
}

[[noreturn]] void fail_at(const std::string& source, std::size_t line, const std::string& message) {
    throw DataError(source + ":" + std::to_string(line) + ": " + message);
}

class Writer {
public:
    void u8(std::uint8_t v) { bytes_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes_.insert(bytes_.end(), s.begin(), s.end());
    }
    std::vector<std::uint8_t>& bytes() { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        const auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::vector<double> f64s(std::size_t count) {
        if (count > remaining() / 8) {
            throw DataError("reference set payload truncated");
        }
        std::vector<double> out(count);
        for (auto& v : out) v = f64();
        return out;
    }
    std::string str() {
        const auto len = u32();
        const auto b = take(len);
        return {b.begin(), b.end()};
    }
    std::span<const std::uint8_t> take(std::size_t count) {
        if (count > remaining()) {
            throw DataError("reference set payload truncated");
        }
        auto out = bytes_.subspan(pos_, count);
        pos_ += count;
        return out;
    }
    [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    std::size_t offset = 0;
    while (offset < bytes.size()) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
        crc = crc32(crc, bytes.data() + offset, chunk);
        offset += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

struct RawWindow {
    std::string id;
    std::span<const double> window;
};

ReferenceSet build_from_windows(std::span<const RawWindow> windows, std::size_t n, int horizon, Frequency frequency,
                                const PreprocessConfig& config, unsigned threads) {
    std::vector<ReferenceSeries> entries(windows.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& w = windows[i];
            auto& entry = entries[i];
            entry.id = w.id;
            entry.history.assign(w.window.begin(), w.window.begin() + static_cast<std::ptrdiff_t>(n));
            entry.future_path.assign(w.window.begin() + static_cast<std::ptrdiff_t>(n), w.window.end());
            entry.preprocessed = preprocess_values(w.id, entry.history, frequency, horizon, config, w.window);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(windows.size(), 1));
    if (workers == 1) {
        work(0, windows.size());
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (windows.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(windows.size(), begin + chunk);
            if (begin < end) pool.emplace_back(work, begin, end);
        }
    }
    return ReferenceSet(n, horizon, frequency, config, std::move(entries));
}

}  // namespace

int period_for_label(const std::string& label) {
    if (label == "yearly") return 1;
    if (label == "quarterly") return 4;
    if (label == "monthly") return 12;
    if (label.starts_with("other:")) {
        const auto period = parse_number<int>(std::string_view(label).substr(6));
        if (period && *period >= 1) {
            return *period;
        }
    }
    throw DataError("unknown frequency label '" + label + "'");
}

std::optional<int> default_horizon(const std::string& label) {
    if (label == "yearly") return 6;
    if (label == "quarterly") return 8;
    if (label == "monthly") return 18;
    return std::nullopt;
}

std::string label_for_period(int period) {
    switch (period) {
    case 1:
        return "yearly";
    case 4:
        return "quarterly";
    case 12:
        return "monthly";
    default:
        return "other:" + std::to_string(period);
    }
}

std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t line_no = 0;
    bool has_horizon = false;
    bool has_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto header = trim(line);
        if (header.empty()) continue;
        if (header == "series_id,frequency,index,value" || header == "series_id,frequency,index,value,horizon") {
            has_header = true;
            has_horizon = header.size() > std::string_view("series_id,frequency,index,value").size();
            break;
        }
        fail_at(source, line_no, "expected header 'series_id,frequency,index,value[,horizon]'");
    }
    if (!has_header) {
        throw DataError(source + ": missing header");
    }

    std::vector<CorpusRecord> records;
    std::vector<std::string> seen;
    std::optional<int> explicit_horizon;
    auto finish = [&](std::size_t at) {
        if (records.empty()) return;
        auto& rec = records.back();
        if (explicit_horizon) {
            rec.horizon = *explicit_horizon;
        } else if (auto h = default_horizon(rec.frequency_label)) {
            rec.horizon = *h;
        } else {
            fail_at(source, at, "series '" + rec.id + "' has frequency '" + rec.frequency_label +
                                    "' and no horizon column");
        }
    };

    const std::size_t expected_fields = has_horizon ? 5 : 4;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != expected_fields) {
            fail_at(source, line_no, "expected " + std::to_string(expected_fields) + " fields, got " +
                                         std::to_string(fields.size()));
        }
        const std::string id(trim(fields[0]));
        const std::string label(trim(fields[1]));
        if (id.empty()) fail_at(source, line_no, "empty series_id");
        const auto index = parse_number<long long>(fields[2]);
        if (!index) fail_at(source, line_no, "malformed index '" + std::string(fields[2]) + "'");
        const auto value = parse_number<double>(fields[3]);
        if (!value) fail_at(source, line_no, "malformed value '" + std::string(fields[3]) + "'");
        if (!std::isfinite(*value)) fail_at(source, line_no, "non-finite value");
        std::optional<int> horizon;
        if (has_horizon && !trim(fields[4]).empty()) {
            horizon = parse_number<int>(fields[4]);
            if (!horizon || *horizon < 1) fail_at(source, line_no, "malformed horizon '" + std::string(fields[4]) + "'");
        }

        if (records.empty() || records.back().id != id) {
            if (std::find(seen.begin(), seen.end(), id) != seen.end()) {
                fail_at(source, line_no, "rows of series '" + id + "' are not contiguous");
            }
            finish(line_no - 1);
            if (*index != 1) fail_at(source, line_no, "series '" + id + "' must start at index 1");
            int period = 0;
            try {
                period = period_for_label(label);
            } catch (const DataError& e) {
                fail_at(source, line_no, e.what());
            }
            seen.push_back(id);
            records.push_back({id, label, period, {}, 0});
            explicit_horizon = horizon;
        } else {
            auto& rec = records.back();
            const auto expected = static_cast<long long>(rec.values.size()) + 1;
            if (*index < expected) {
                fail_at(source, line_no, "duplicate index " + std::to_string(*index) + " for series '" + id + "'");
            }
            if (*index != expected) {
                fail_at(source, line_no, "index gap in series '" + id + "': expected " + std::to_string(expected));
            }
            if (label != rec.frequency_label) {
                fail_at(source, line_no, "frequency changes within series '" + id + "'");
            }
            if (horizon) {
                if (explicit_horizon && *explicit_horizon != *horizon) {
                    fail_at(source, line_no, "horizon changes within series '" + id + "'");
                }
                explicit_horizon = horizon;
            }
        }
        records.back().values.push_back(*value);
    }
    finish(line_no);
    return records;
}

std::vector<CorpusRecord> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file '" + path.string() + "'");
    }
    return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, std::span<const CorpusRecord> records) {
    out << "series_id,frequency,index,value,horizon\n";
    std::array<char, 64> buffer{};
    for (const auto& rec : records) {
        for (std::size_t i = 0; i < rec.values.size(); ++i) {
            const auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), rec.values[i]);
            out << rec.id << ',' << rec.frequency_label << ',' << (i + 1) << ','
                << std::string_view(buffer.data(), static_cast<std::size_t>(ptr - buffer.data())) << ','
                << rec.horizon << '\n';
        }
    }
}

TimeSeries to_time_series(const CorpusRecord& record) {
    return make_time_series(record.id, Frequency(record.period), record.values, record.horizon);
}

TimeSeries apply_history_cut(const TimeSeries& series, int max_years) {
    if (max_years < 1) {
        throw std::invalid_argument("history cut must keep at least one year");
    }
    const auto keep = static_cast<std::size_t>(max_years) * static_cast<std::size_t>(series.frequency().period());
    if (series.size() <= keep) {
        return series;
    }
    const auto values = series.values();
    return TimeSeries(series.id(), series.frequency(),
                      std::vector<double>(values.end() - static_cast<std::ptrdiff_t>(keep), values.end()),
                      series.horizon());
}

ReferenceBuild build_reference_set(std::span<const CorpusRecord> corpus, std::size_t target_n, int horizon,
                                   Frequency frequency, const PreprocessConfig& config, unsigned threads) {
    if (corpus.empty()) {
        throw DataError("empty corpus");
    }
    if (target_n < 1 || horizon < 1) {
        throw std::invalid_argument("reference set needs n >= 1 and h >= 1");
    }
    config.validate();
    const std::size_t window = target_n + static_cast<std::size_t>(horizon);
    std::vector<RawWindow> windows;
    std::size_t dropped_short = 0;
    std::size_t dropped_frequency = 0;
    for (const auto& rec : corpus) {
        if (rec.period != frequency.period()) {
            ++dropped_frequency;
            continue;
        }
        if (rec.values.size() < window) {
            ++dropped_short;
            continue;
        }
        const std::span<const double> values(rec.values);
        windows.push_back({rec.id, values.last(window)});
    }
    if (windows.empty()) {
        throw DataError("empty reference set: no series of period " + std::to_string(frequency.period()) +
                        " with at least n + h = " + std::to_string(window) + " observations");
    }
    return {build_from_windows(windows, target_n, horizon, frequency, config, threads), dropped_short,
            dropped_frequency};
}

ReferenceSet rebuild_reference_set(const ReferenceSet& source, std::size_t target_n, unsigned threads) {
    if (target_n < 1 || target_n > source.target_n()) {
        throw std::invalid_argument("rebuild needs 1 <= n <= " + std::to_string(source.target_n()));
    }
    const std::size_t window = target_n + static_cast<std::size_t>(source.horizon());
    std::vector<std::vector<double>> storage;
    storage.reserve(source.size());
    std::vector<RawWindow> windows;
    windows.reserve(source.size());
    for (const auto& entry : source.entries()) {
        auto& full = storage.emplace_back(entry.history);
        full.insert(full.end(), entry.future_path.begin(), entry.future_path.end());
        windows.push_back({entry.id, std::span<const double>(full).last(window)});
    }
    return build_from_windows(windows, target_n, source.horizon(), source.frequency(), source.config(), threads);
}

std::vector<std::uint8_t> encode_reference_set(const ReferenceSet& set) {
    Writer w;
    for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u32(kReferenceFormatVersion);
    w.u64(set.target_n());
    w.u64(static_cast<std::uint64_t>(set.horizon()));
    w.u64(static_cast<std::uint64_t>(set.frequency().period()));
    w.u64(set.size());
    const auto& cfg = set.config();
    w.u64(cfg.hash());
    w.f64(cfg.acf_confidence_z);
    w.f64(cfg.span_factor);
    w.f64(cfg.lambda_lower);
    w.f64(cfg.lambda_upper);
    w.u8(cfg.enable_seasonal_adjustment ? 1 : 0);
    w.u8(cfg.enable_smoothing ? 1 : 0);
    for (const auto& e : set.entries()) {
        w.str(e.id);
        w.f64s(e.history);
        w.f64s(e.future_path);
        w.f64s(e.preprocessed.scaled);
        w.f64(e.preprocessed.origin);
        w.f64(e.preprocessed.shift);
        w.f64(e.preprocessed.adjustment.lambda);
        w.u8(e.preprocessed.adjustment.was_seasonal ? 1 : 0);
        w.u8(e.preprocessed.adjustment.lambda_fallback ? 1 : 0);
        w.u8(e.preprocessed.zero_origin_fallback ? 1 : 0);
        w.f64s(e.preprocessed.adjustment.seasonal_component);
    }
    auto& bytes = w.bytes();
    const auto crc = crc32_of(bytes);
    w.u32(crc);
    return std::move(bytes);
}

void save_reference_set(const ReferenceSet& set, const std::filesystem::path& path) {
    const auto bytes = encode_reference_set(set);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write reference set '" + path.string() + "'");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw DataError("failed writing reference set '" + path.string() + "'");
    }
}

ReferenceSet decode_reference_set(std::span<const std::uint8_t> bytes, const std::optional<PreprocessConfig>& requested) {
    if (bytes.size() < sizeof(kMagic) + 4 + 4) {
        throw DataError("reference set checksum mismatch: file too short");
    }
    const auto body = bytes.first(bytes.size() - 4);
    Reader tail(bytes.last(4));
    if (crc32_of(body) != tail.u32()) {
        throw DataError("reference set checksum mismatch (corrupted or truncated file)");
    }
    Reader r(body);
    const auto magic = r.take(sizeof(kMagic));
    if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
        throw DataError("not a reference set file (bad magic)");
    }
    const auto version = r.u32();
    if (version != kReferenceFormatVersion) {
        throw DataError("unsupported reference set version " + std::to_string(version) + " (expected " +
                        std::to_string(kReferenceFormatVersion) + ")");
    }
    const auto n = r.u64();
    const auto h = r.u64();
    const auto s = r.u64();
    const auto m = r.u64();
    const auto stored_hash = r.u64();
    PreprocessConfig cfg;
    cfg.acf_confidence_z = r.f64();
    cfg.span_factor = r.f64();
    cfg.lambda_lower = r.f64();
    cfg.lambda_upper = r.f64();
    cfg.enable_seasonal_adjustment = r.u8() != 0;
    cfg.enable_smoothing = r.u8() != 0;
    if (cfg.hash() != stored_hash) {
        throw DataError("reference set header corrupted: configuration hash mismatch");
    }
    if (requested && requested->hash() != stored_hash) {
        throw DataError("config mismatch: reference set was built with a different preprocessing configuration");
    }
    if (h == 0 || h > (1u << 30) || s == 0 || s > (1u << 30) || n == 0) {
        throw DataError("reference set header has invalid dimensions");
    }
    std::vector<ReferenceSeries> entries;
    for (std::uint64_t i = 0; i < m; ++i) {
        ReferenceSeries e;
        e.id = r.str();
        e.history = r.f64s(n);
        e.future_path = r.f64s(h);
        e.preprocessed.source_id = e.id;
        e.preprocessed.scaled = r.f64s(n);
        e.preprocessed.origin = r.f64();
        e.preprocessed.shift = r.f64();
        e.preprocessed.adjustment.lambda = r.f64();
        e.preprocessed.adjustment.was_seasonal = r.u8() != 0;
        e.preprocessed.adjustment.lambda_fallback = r.u8() != 0;
        e.preprocessed.zero_origin_fallback = r.u8() != 0;
        e.preprocessed.adjustment.seasonal_component = r.f64s(n);
        entries.push_back(std::move(e));
    }
    if (r.remaining() != 0) {
        throw DataError("reference set has trailing bytes");
    }
    return ReferenceSet(n, static_cast<int>(h), Frequency(static_cast<int>(s)), cfg, std::move(entries));
}

ReferenceSet load_reference_set(const std::filesystem::path& path, const std::optional<PreprocessConfig>& requested) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open reference set '" + path.string() + "'");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_reference_set(bytes, requested);
}

nlohmann::json to_json(const PreprocessConfig& config) {
    return {{"acf_confidence_z", config.acf_confidence_z},
            {"span_factor", config.span_factor},
            {"lambda_lower", config.lambda_lower},
            {"lambda_upper", config.lambda_upper},
            {"enable_seasonal_adjustment", config.enable_seasonal_adjustment},
            {"enable_smoothing", config.enable_smoothing}};
}

nlohmann::json to_json(const ForecastConfig& config) {
    return {{"distance", to_string(config.distance)},
            {"k", config.k},
            {"aggregator", to_string(config.aggregator)},
            {"alpha", config.alpha},
            {"delta_grid_step", config.delta_grid_step}};
}

nlohmann::json to_json(const ReferenceSet& set) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : set.entries()) {
        entries.push_back({{"id", e.id},
                           {"history", e.history},
                           {"future_path", e.future_path},
                           {"scaled", e.preprocessed.scaled},
                           {"origin", e.preprocessed.origin},
                           {"shift", e.preprocessed.shift},
                           {"lambda", e.preprocessed.adjustment.lambda},
                           {"was_seasonal", e.preprocessed.adjustment.was_seasonal},
                           {"seasonal_component", e.preprocessed.adjustment.seasonal_component}});
    }
    return {{"version", kReferenceFormatVersion},
            {"n", set.target_n()},
            {"h", set.horizon()},
            {"period", set.frequency().period()},
            {"m", set.size()},
            {"config", to_json(set.config())},
            {"entries", std::move(entries)}};
}

nlohmann::json to_json(const ForecastResult& result) {
    return {{"series_id", result.series_id},
            {"point", result.point},
            {"lower", result.lower},
            {"upper", result.upper},
            {"delta_star", result.delta_star},
            {"calibration_skipped", result.calibration_skipped},
            {"neighbors_truncated", result.neighbors_truncated},
            {"dropped_paths", result.dropped_paths},
            {"neighbor_ids", result.neighbor_ids},
            {"neighbor_distances", result.neighbor_distances}};
}

ForecastResult forecast_from_json(const nlohmann::json& j) {
    try {
        ForecastResult r;
        r.series_id = j.at("series_id").get<std::string>();
        r.point = j.at("point").get<std::vector<double>>();
        r.lower = j.at("lower").get<std::vector<double>>();
        r.upper = j.at("upper").get<std::vector<double>>();
        r.delta_star = j.value("delta_star", 0.0);
        r.calibration_skipped = j.value("calibration_skipped", false);
        r.neighbors_truncated = j.value("neighbors_truncated", false);
        r.dropped_paths = j.value("dropped_paths", std::size_t{0});
        r.neighbor_ids = j.value("neighbor_ids", std::vector<std::string>{});
        r.neighbor_distances = j.value("neighbor_distances", std::vector<double>{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed forecast record: ") + e.what());
    }
}

}  // namespace xsim
