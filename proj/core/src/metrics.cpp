#include "xsim/metrics.hpp"

#include "xsim/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace xsim {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
    }
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// P(range of `groups` iid N(0,1) <= q).
double range_cdf(std::size_t groups, double q) {
    constexpr double lo = -8.0;
    constexpr double hi = 8.0;
    constexpr int intervals = 4000;
    const double step = (hi - lo) / intervals;
    auto f = [&](double z) {
        return normal_pdf(z) * std::pow(normal_cdf(z + q) - normal_cdf(z), static_cast<double>(groups - 1));
    };
    double sum = f(lo) + f(hi);
    for (int i = 1; i < intervals; ++i) {
        sum += f(lo + step * i) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return static_cast<double>(groups) * sum * step / 3.0;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

nlohmann::json to_json(const AggregateScores& s) {
    return {{"count", s.count},
            {"mase", s.mase},
            {"msis", s.msis},
            {"coverage", s.coverage},
            {"upper_coverage", s.upper_coverage},
            {"spread", s.spread}};
}

}  // namespace

double scale_denominator(std::span<const double> insample, int period) {
    const auto s = static_cast<std::size_t>(std::max(period, 1));
    if (insample.size() <= s) {
        throw std::invalid_argument("in-sample length " + std::to_string(insample.size()) +
                                    " must exceed the period " + std::to_string(s));
    }
    double sum = 0.0;
    for (std::size_t t = s; t < insample.size(); ++t) {
        sum += std::abs(insample[t] - insample[t - s]);
    }
    const double denom = sum / static_cast<double>(insample.size() - s);
    if (!(denom > 0.0)) {
        throw ZeroDenominatorError("in-sample seasonal naive error is zero");
    }
    return denom;
}

double mase(std::span<const double> actuals, std::span<const double> forecasts, std::span<const double> insample,
            int period) {
    require_same_length(actuals, forecasts, "mase");
    if (actuals.empty()) {
        throw std::invalid_argument("mase: empty horizon");
    }
    const double denom = scale_denominator(insample, period);
    double sum = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        sum += std::abs(actuals[t] - forecasts[t]);
    }
    return sum / static_cast<double>(actuals.size()) / denom;
}

double msis(std::span<const double> actuals, std::span<const double> lower, std::span<const double> upper,
            std::span<const double> insample, int period, double alpha) {
    require_same_length(actuals, lower, "msis");
    require_same_length(actuals, upper, "msis");
    if (actuals.empty()) {
        throw std::invalid_argument("msis: empty horizon");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("msis: alpha must lie in (0, 1)");
    }
    const double denom = scale_denominator(insample, period);
    const double penalty = 2.0 / alpha;
    double sum = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        const double y = actuals[t];
        sum += upper[t] - lower[t];
        if (y < lower[t]) sum += penalty * (lower[t] - y);
        if (y > upper[t]) sum += penalty * (y - upper[t]);
    }
    return sum / static_cast<double>(actuals.size()) / denom;
}

CoverageStats coverage_stats(std::span<const double> actuals, std::span<const double> lower,
                             std::span<const double> upper, std::span<const double> insample, int period) {
    require_same_length(actuals, lower, "coverage");
    require_same_length(actuals, upper, "coverage");
    if (actuals.empty()) {
        throw std::invalid_argument("coverage: empty horizon");
    }
    const double denom = scale_denominator(insample, period);
    std::size_t inside = 0;
    std::size_t below_upper = 0;
    double width = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        const double y = actuals[t];
        if (y > lower[t] && y < upper[t]) ++inside;
        if (y < upper[t]) ++below_upper;
        width += upper[t] - lower[t];
    }
    const auto h = static_cast<double>(actuals.size());
    return {static_cast<double>(inside) / h, static_cast<double>(below_upper) / h, width / h / denom};
}

std::vector<double> smoothed_periodogram(std::span<const double> values, std::size_t daniell_m) {
    const std::size_t n = values.size();
    const std::size_t half = n / 2;
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    // raw[j] for j = 0..half; raw[0] is zero for demeaned data.
    std::vector<double> raw(half + 1, 0.0);
    for (std::size_t j = 1; j <= half; ++j) {
        double re = 0.0;
        double im = 0.0;
        const double omega = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double x = values[t] - mean;
            re += x * std::cos(omega * static_cast<double>(t));
            im -= x * std::sin(omega * static_cast<double>(t));
        }
        raw[j] = (re * re + im * im) / static_cast<double>(n);
    }
    auto ordinate = [&](long long j) {
        const auto nn = static_cast<long long>(n);
        long long jj = ((j % nn) + nn) % nn;
        if (jj > nn / 2) jj = nn - jj;
        return raw[static_cast<std::size_t>(jj)];
    };
    std::vector<double> out(half);
    const auto m = static_cast<long long>(daniell_m);
    for (std::size_t j = 1; j <= half; ++j) {
        if (m == 0) {
            out[j - 1] = raw[j];
            continue;
        }
        double acc = 0.0;
        for (long long o = -m; o <= m; ++o) {
            const double w = (o == -m || o == m) ? 1.0 / (4.0 * static_cast<double>(m)) : 1.0 / (2.0 * static_cast<double>(m));
            acc += w * ordinate(static_cast<long long>(j) + o);
        }
        out[j - 1] = acc;
    }
    return out;
}

Forecastability forecastability(std::span<const double> values, std::size_t daniell_m) {
    if (values.size() < 8) {
        throw std::invalid_argument("forecastability needs at least 8 observations");
    }
    const auto spectrum = smoothed_periodogram(values, daniell_m);
    const double total = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
    if (!(total > 0.0)) {
        return {1.0, true};
    }
    double plogp = 0.0;
    for (double f : spectrum) {
        const double p = f / total;
        if (p > 0.0) plogp += p * std::log(p);
    }
    return {1.0 + plogp / std::log(static_cast<double>(spectrum.size())), false};
}

double studentized_range_quantile(std::size_t groups, double probability) {
    if (groups < 2) {
        throw std::invalid_argument("studentized range needs at least two groups");
    }
    if (!(probability > 0.0 && probability < 1.0)) {
        throw std::invalid_argument("probability must lie in (0, 1)");
    }
    double lo = 0.0;
    double hi = 20.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (range_cdf(groups, mid) < probability ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::map<std::string, MeanRank> mcb_ranks(const std::map<std::string, std::vector<double>>& scores,
                                          std::optional<double> critical_value) {
    if (scores.size() < 2) {
        throw std::invalid_argument("mean ranks need at least two methods");
    }
    const std::size_t n = scores.begin()->second.size();
    for (const auto& [method, values] : scores) {
        if (values.size() != n) {
            throw std::invalid_argument("method '" + method + "' has " + std::to_string(values.size()) +
                                        " scores, expected " + std::to_string(n));
        }
    }
    if (n < 2) {
        throw std::invalid_argument("mean ranks need at least two series");
    }
    const std::size_t k = scores.size();
    std::vector<const std::vector<double>*> columns;
    for (const auto& [method, values] : scores) columns.push_back(&values);

    std::vector<double> rank_sum(k, 0.0);
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return (*columns[a])[i] < (*columns[b])[i]; });
        std::size_t pos = 0;
        while (pos < k) {
            std::size_t end = pos + 1;
            while (end < k && (*columns[order[end]])[i] == (*columns[order[pos]])[i]) ++end;
            // Positions pos..end-1 share the average of ranks pos+1..end.
            const double avg = 0.5 * static_cast<double>(pos + 1 + end);
            for (std::size_t q = pos; q < end; ++q) rank_sum[order[q]] += avg;
            pos = end;
        }
    }

    const double critical = critical_value ? *critical_value : studentized_range_quantile(k) / 2.0;
    const double half_width =
        critical * std::sqrt(static_cast<double>(k * (k + 1)) / (12.0 * static_cast<double>(n)));
    std::map<std::string, MeanRank> out;
    std::size_t idx = 0;
    for (const auto& [method, values] : scores) {
        const double mean = rank_sum[idx++] / static_cast<double>(n);
        out[method] = {mean, mean - half_width, mean + half_width};
    }
    return out;
}

std::optional<SeriesScores> evaluate_series(const SeriesEvaluationInput& input, double alpha) {
    try {
        const auto cov = coverage_stats(input.actuals, input.lower, input.upper, input.insample, input.period);
        SeriesScores s;
        s.method = input.method;
        s.series_id = input.series_id;
        s.frequency = input.frequency;
        s.mase = mase(input.actuals, input.point, input.insample, input.period);
        s.msis = msis(input.actuals, input.lower, input.upper, input.insample, input.period, alpha);
        s.coverage = cov.coverage;
        s.upper_coverage = cov.upper_coverage;
        s.spread = cov.spread;
        return s;
    } catch (const ZeroDenominatorError&) {
        return std::nullopt;
    }
}

EvaluationReport build_report(std::vector<SeriesScores> rows, std::vector<Exclusion> exclusions) {
    EvaluationReport report;
    report.per_series = std::move(rows);
    report.exclusions = std::move(exclusions);
    auto accumulate_into = [](AggregateScores& agg, const SeriesScores& s) {
        ++agg.count;
        agg.mase += s.mase;
        agg.msis += s.msis;
        agg.coverage += s.coverage;
        agg.upper_coverage += s.upper_coverage;
        agg.spread += s.spread;
    };
    auto finalize = [](AggregateScores& agg) {
        if (agg.count == 0) return;
        const auto c = static_cast<double>(agg.count);
        agg.mase /= c;
        agg.msis /= c;
        agg.coverage /= c;
        agg.upper_coverage /= c;
        agg.spread /= c;
    };
    for (const auto& s : report.per_series) {
        accumulate_into(report.by_frequency[s.method][s.frequency], s);
    }
    for (auto& [method, freqs] : report.by_frequency) {
        AggregateScores total;
        for (auto& [label, agg] : freqs) {
            finalize(agg);
            const auto c = static_cast<double>(agg.count);
            total.count += agg.count;
            total.mase += c * agg.mase;
            total.msis += c * agg.msis;
            total.coverage += c * agg.coverage;
            total.upper_coverage += c * agg.upper_coverage;
            total.spread += c * agg.spread;
        }
        const auto c = static_cast<double>(total.count);
        total.mase /= c;
        total.msis /= c;
        total.coverage /= c;
        total.upper_coverage /= c;
        total.spread /= c;
        report.total[method] = total;
    }
    return report;
}

std::string report_rows_csv(const EvaluationReport& report) {
    std::ostringstream out;
    out << "method,series_id,frequency,mase,msis,coverage,upper_coverage,spread\n";
    for (const auto& s : report.per_series) {
        out << s.method << ',' << s.series_id << ',' << s.frequency << ',' << format_double(s.mase) << ','
            << format_double(s.msis) << ',' << format_double(s.coverage) << ',' << format_double(s.upper_coverage)
            << ',' << format_double(s.spread) << '\n';
    }
    return out.str();
}

nlohmann::json report_aggregate_json(const EvaluationReport& report) {
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& [method, freqs] : report.by_frequency) {
        nlohmann::json by_freq = nlohmann::json::object();
        for (const auto& [label, agg] : freqs) by_freq[label] = to_json(agg);
        methods[method] = {{"by_frequency", std::move(by_freq)}, {"total", to_json(report.total.at(method))}};
    }
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto& e : report.exclusions) {
        excluded.push_back({{"method", e.method}, {"series_id", e.series_id}, {"reason", e.reason}});
    }
    return {{"methods", std::move(methods)}, {"exclusions", std::move(excluded)}};
}

}  // namespace xsim
