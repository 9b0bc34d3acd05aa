// Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//
// Criteria 10-12 need real competition data and run only when XSIM_TARGETS_CSV (target series,
// each including its h held-out observations) and XSIM_REFERENCE_CSV (reference corpus) are set.

#include "support/synthetic.hpp"

#include "xsim/xsim.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace xsim;
using xsim::testing::make_record;

namespace {

struct Outcome {
    enum Status { Pass, Fail, Skip } status;
    std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }
Outcome verdict(bool ok, std::string d) { return ok ? pass(std::move(d)) : fail(std::move(d)); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, a, b, c);
    return buf;
}

std::vector<double> uniform_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

// 1 --------------------------------------------------------------------------------------------
Outcome dtw_oracle() {
    std::mt19937_64 rng(1001);
    std::uniform_int_distribution<std::size_t> len(1, 7);
    int mismatches = 0;
    for (int i = 0; i < 500; ++i) {
        const auto a = uniform_vector(rng, len(rng), -10.0, 10.0);
        const auto b = uniform_vector(rng, len(rng), -10.0, 10.0);
        if (distance_dtw(a, b) != xsim::testing::dtw_brute_force(a, b)) ++mismatches;
    }
    return verdict(mismatches == 0, std::to_string(500 - mismatches) + "/500 pairs exact");
}

// 2 --------------------------------------------------------------------------------------------
Outcome box_cox_round_trip() {
    std::mt19937_64 rng(1002);
    std::uniform_real_distribution<double> lam(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(-3.0, 4.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double lambda = i % 10 == 0 ? 0.0 : (i % 10 == 1 ? 1.0 : lam(rng));
        std::vector<double> v(24);
        for (auto& x : v) x = std::pow(10.0, magnitude(rng));
        const auto back = inverse_box_cox(box_cox(v, lambda), lambda);
        for (std::size_t t = 0; t < v.size(); ++t) worst = std::max(worst, std::abs(back[t] - v[t]) / v[t]);
    }
    return verdict(worst < 1e-10, fmt("max relative error %.3g (< 1e-10)", worst));
}

// 3 --------------------------------------------------------------------------------------------
Outcome stl_reconstruction() {
    std::mt19937_64 rng(1003);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const int period = std::array{2, 4, 7, 12}[static_cast<std::size_t>(i % 4)];
        const auto n = static_cast<std::size_t>(2 * period + 1 + i % 50);
        const auto x = uniform_vector(rng, n, -100.0, 100.0);
        const auto c = stl_decompose(x, period);
        for (std::size_t t = 0; t < n; ++t) {
            worst = std::max(worst, std::abs(c.trend[t] + c.seasonal[t] + c.remainder[t] - x[t]));
        }
    }
    std::vector<double> x(48);
    std::vector<double> truth(48);
    for (int t = 1; t <= 48; ++t) {
        truth[t - 1] = 10.0 * std::sin(2.0 * std::numbers::pi * t / 4.0);
        x[t - 1] = t + truth[t - 1];
    }
    const double corr = xsim::testing::correlation(stl_decompose(x, 4).seasonal, truth);
    return verdict(worst <= 1e-12 && corr > 0.99,
                   fmt("max reconstruction error %.3g (<= 1e-12), seasonal correlation %.6f (> 0.99)", worst, corr));
}

// 4 --------------------------------------------------------------------------------------------
Outcome identity_neighbour() {
    std::mt19937_64 rng(1004);
    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 200; ++i) {
        const int period = 4;
        corpus.push_back(make_record("q" + std::to_string(i), period, xsim::testing::ets_series(rng, 40, period), 8));
    }
    const auto cfg = PreprocessConfig::scaling_only();
    const auto built = build_reference_set(corpus, 24, 8, Frequency(4), cfg);
    double worst = 0.0;
    int wrong_neighbour = 0;
    for (std::size_t idx = 0; idx < built.set.size(); idx += 7) {
        const auto& entry = built.set[idx];
        const TimeSeries target("t", Frequency(4), entry.history, 8);
        for (auto kind : {DistanceKind::L1, DistanceKind::L2, DistanceKind::DTW}) {
            ForecastConfig fc;
            fc.k = 1;
            fc.distance = kind;
            const auto r = forecast(target, built.set, cfg, fc);
            if (r.neighbor_ids.front() != entry.id) ++wrong_neighbour;
            for (std::size_t t = 0; t < 8; ++t) {
                worst = std::max(worst, std::abs(r.point[t] - entry.future_path[t]) / std::abs(entry.future_path[t]));
            }
        }
    }
    return verdict(worst <= 1e-12 && wrong_neighbour == 0,
                   fmt("max relative deviation %.3g (<= 1e-12), %g wrong neighbours", worst, wrong_neighbour));
}

// 5 --------------------------------------------------------------------------------------------
Outcome seasonality_calibration() {
    int false_positives = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        std::mt19937_64 rng(50000 + seed);
        false_positives += seasonality_test(xsim::testing::normal_noise(rng, 120), 12, 1.645) ? 1 : 0;
    }
    std::mt19937_64 rng(1005);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp(0.1, 100.0);
    int detected = 0;
    for (int i = 0; i < 1000; ++i) {
        const double ph = phase(rng);
        const double a = amp(rng);
        std::vector<double> x(120);
        for (int t = 1; t <= 120; ++t) x[t - 1] = a * std::sin(2.0 * std::numbers::pi * t / 12.0 + ph);
        detected += seasonality_test(x, 12, 1.645) ? 1 : 0;
    }
    const double fpr = false_positives / 1000.0;
    return verdict(fpr <= 0.15 && detected == 1000,
                   fmt("noise false-positive rate %.3f (<= 0.15), sinusoid detection %.3f (== 1)", fpr,
                       detected / 1000.0));
}

// 6 --------------------------------------------------------------------------------------------
Outcome metric_hand_cases() {
    using V = std::vector<double>;
    const V ins{1, 2, 3, 4};
    std::vector<std::pair<std::string, bool>> checks{
        {"mase perfect", mase(V{5}, V{5}, ins, 1) == 0.0},
        {"mase naive", mase(V{5}, V{4}, ins, 1) == 1.0},
        {"mase 3.0", mase(V{10, 10}, V{12, 12}, V{10, 10, 10, 12}, 1) == 3.0},
        {"msis width", msis(V{5, 6}, V{4, 5}, V{7, 9}, ins, 1, 0.05) == 3.5},
        {"msis penalty", msis(V{5, 6.5}, V{4, 5}, V{5, 6}, ins, 1, 0.05) == 11.0},
        {"msis degenerate", msis(V{5, 6}, V{5, 6}, V{5, 6}, ins, 1, 0.05) == 0.0},
        {"coverage boundary", coverage_stats(V{7, 9}, V{4, 5}, V{7, 9}, ins, 1).upper_coverage == 0.0},
        {"coverage 3/4", coverage_stats(V{1, 2, 3, 10}, V{0, 0, 0, 0}, V{5, 5, 5, 5}, ins, 1).coverage == 0.75},
    };
    std::string failed;
    for (const auto& [name, ok] : checks) {
        if (!ok) failed += (failed.empty() ? "" : ", ") + name;
    }
    return verdict(failed.empty(),
                   failed.empty() ? std::to_string(checks.size()) + " hand cases exact" : "mismatch: " + failed);
}

// 7 --------------------------------------------------------------------------------------------
Outcome delta_properties() {
    std::mt19937_64 rng(1007);
    bool monotone = true;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<std::vector<double>> paths(20);
        for (auto& p : paths) p = uniform_vector(rng, 6, 0.0, 50.0);
        std::vector<double> prev(6, -1.0);
        for (double d : delta_grid(0.01)) {
            const auto b = interval_bounds(paths, 0.05, d);
            for (std::size_t t = 0; t < 6; ++t) {
                const double w = b.upper[t] - b.lower[t];
                monotone = monotone && w >= prev[t];
                prev[t] = w;
            }
        }
    }

    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 300; ++i) corpus.push_back(make_record("y" + std::to_string(i), 1, xsim::testing::ets_series(rng, 40, 1), 6));
    const auto cfg = PreprocessConfig::for_frequency(Frequency(1));
    const auto built = build_reference_set(corpus, 24, 6, Frequency(1), cfg);
    const auto grid = delta_grid(0.01);
    bool members = grid.size() == 101;
    bool repeatable = true;
    int calibrated = 0;
    ForecastConfig fc;
    fc.k = 50;
    for (int i = 0; i < 20; ++i) {
        const TimeSeries target("t", Frequency(1), xsim::testing::ets_series(rng, 24, 1), 6);
        const auto a = calibrate_delta(target, built.set, cfg, fc);
        const auto b = calibrate_delta(target, built.set, cfg, fc);
        members = members && std::find(grid.begin(), grid.end(), a.delta_star) != grid.end();
        repeatable = repeatable && a.delta_star == b.delta_star && a.msis == b.msis;
        calibrated += a.skipped ? 0 : 1;
    }
    return verdict(monotone && members && repeatable && calibrated == 20,
                   std::string("width monotone: ") + (monotone ? "yes" : "no") + ", grid members: " +
                       (members ? "yes" : "no") + ", repeatable: " + (repeatable ? "yes" : "no") + ", " +
                       std::to_string(calibrated) + "/20 calibrated");
}

// 8 --------------------------------------------------------------------------------------------
Outcome k_monotone() {
    constexpr int period = 4;
    constexpr std::size_t n = 24;
    constexpr int h = 8;
    std::string detail;
    bool ok = true;
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> len(n + h, 80);
        std::vector<CorpusRecord> corpus;
        corpus.reserve(5000);
        for (int i = 0; i < 5000; ++i) {
            corpus.push_back(make_record("r" + std::to_string(i), period, xsim::testing::ets_series(rng, len(rng), period), h));
        }
        const auto cfg = PreprocessConfig::for_frequency(Frequency(period));
        const auto built = build_reference_set(corpus, n, h, Frequency(period), cfg);
        double sum_1 = 0.0;
        double sum_100 = 0.0;
        int used = 0;
        while (used < 200) {
            const auto y = xsim::testing::ets_series(rng, n + h, period);
            const std::vector<double> history(y.begin(), y.begin() + n);
            const std::vector<double> actual(y.begin() + n, y.end());
            const TimeSeries target("t" + std::to_string(used), Frequency(period), history, h);
            ForecastConfig fc;
            fc.k = 1;
            const auto single = forecast_point(target, built.set, cfg, fc);
            fc.k = 100;
            const auto pooled_k = forecast_point(target, built.set, cfg, fc);
            try {
                const double a = mase(actual, single.point, history, period);
                const double b = mase(actual, pooled_k.point, history, period);
                sum_1 += a;
                sum_100 += b;
            } catch (const ZeroDenominatorError&) {
                continue;
            }
            ++used;
        }
        const double m1 = sum_1 / used;
        const double m100 = sum_100 / used;
        ok = ok && m100 < m1;
        detail += fmt("seed %g: k=1 %.4f vs k=100 %.4f; ", static_cast<double>(seed), m1, m100);
    }
    return verdict(ok, detail);
}

// 9 --------------------------------------------------------------------------------------------
Outcome determinism() {
    std::mt19937_64 rng(1009);
    std::vector<CorpusRecord> corpus;
    for (int i = 0; i < 400; ++i) corpus.push_back(make_record("m" + std::to_string(i), 12, xsim::testing::ets_series(rng, 96, 12), 18));
    std::vector<TimeSeries> targets;
    for (int i = 0; i < 8; ++i) targets.emplace_back("t" + std::to_string(i), Frequency(12), xsim::testing::ets_series(rng, 54, 12), 18);
    const auto cfg = PreprocessConfig::for_frequency(Frequency(12));

    auto run = [&](unsigned threads) {
        const auto built = build_reference_set(corpus, 54, 18, Frequency(12), cfg, threads);
        const auto bytes = encode_reference_set(built.set);
        std::string out(bytes.begin(), bytes.end());
        ForecastConfig fc;
        fc.k = 100;
        fc.threads = threads;
        for (const auto& t : targets) out += to_json(forecast(t, built.set, cfg, fc)).dump();
        return out;
    };
    const auto one = run(1);
    const auto two = run(2);
    const auto eight = run(8);
    return verdict(one == two && one == eight,
                   "reference file and forecast JSON for 1, 2 and 8 threads " +
                       std::string(one == two && one == eight ? "byte-identical" : "differ") + " (" +
                       std::to_string(one.size()) + " bytes)");
}

// 10-12 ----------------------------------------------------------------------------------------
struct RealData {
    std::vector<CorpusRecord> targets;
    std::vector<CorpusRecord> references;
};

std::optional<RealData> load_real_data() {
    const char* targets = std::getenv("XSIM_TARGETS_CSV");
    const char* refs = std::getenv("XSIM_REFERENCE_CSV");
    if (targets == nullptr || refs == nullptr) return std::nullopt;
    return RealData{read_corpus(targets), read_corpus(refs)};
}

struct SweepResult {
    std::map<int, std::vector<double>> mase_by_period;
    std::map<int, std::vector<double>> msis_by_period;
    std::map<int, std::vector<double>> upper_cov_by_period;
    double distance_seconds = 0.0;
};

// Forecasts every target with full history against per-(period, n) reference sets.
SweepResult run_real(const RealData& data, DistanceKind kind, std::size_t k, bool intervals,
                     const std::function<bool(const CorpusRecord&)>& keep) {
    SweepResult out;
    std::map<std::pair<int, std::size_t>, std::vector<const CorpusRecord*>> groups;
    for (const auto& r : data.targets) {
        if (!keep(r) || r.values.size() <= static_cast<std::size_t>(r.horizon) + 1) continue;
        groups[{r.period, r.values.size() - static_cast<std::size_t>(r.horizon)}].push_back(&r);
    }
    const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    for (const auto& [key, members] : groups) {
        const auto [period, n] = key;
        const int h = members.front()->horizon;
        const auto cfg = PreprocessConfig::for_frequency(Frequency(period));
        ReferenceBuild built = build_reference_set(data.references, n, h, Frequency(period), cfg, threads);
        std::optional<ReferenceSet> inner;
        if (intervals && n > static_cast<std::size_t>(2 * h)) inner.emplace(rebuild_reference_set(built.set, n - h, threads));
        for (const auto* rec : members) {
            const std::vector<double> history(rec->values.begin(), rec->values.end() - h);
            const std::vector<double> actual(rec->values.end() - h, rec->values.end());
            const TimeSeries target(rec->id, Frequency(period), history, h);
            ForecastConfig fc;
            fc.distance = kind;
            fc.k = k;
            fc.threads = threads;
            const auto started = std::chrono::steady_clock::now();
            (void)nearest_k(preprocess_series(target, cfg).scaled, built.set, kind, k, threads);
            out.distance_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            try {
                if (intervals) {
                    const auto r = forecast(target, built.set, cfg, fc, inner ? &*inner : nullptr);
                    out.mase_by_period[period].push_back(mase(actual, r.point, history, period));
                    out.msis_by_period[period].push_back(msis(actual, r.lower, r.upper, history, period, fc.alpha));
                    out.upper_cov_by_period[period].push_back(
                        coverage_stats(actual, r.lower, r.upper, history, period).upper_coverage);
                } else {
                    const auto p = forecast_point(target, built.set, cfg, fc);
                    out.mase_by_period[period].push_back(mase(actual, p.point, history, period));
                }
            } catch (const ZeroDenominatorError&) {
            }
        }
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

std::vector<double> values_for(const std::map<int, std::vector<double>>& by_period, int period) {
    const auto it = by_period.find(period);
    return it == by_period.end() ? std::vector<double>{} : it->second;
}

double pooled(const std::map<int, std::vector<double>>& by_period) {
    double s = 0.0;
    std::size_t count = 0;
    for (const auto& [p, v] : by_period) {
        for (double x : v) s += x;
        count += v.size();
    }
    return count == 0 ? std::nan("") : s / static_cast<double>(count);
}

}  // namespace

int main() {
    const auto suite_start = std::chrono::steady_clock::now();
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
        const auto started = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = body();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        const char* tag = o.status == Outcome::Pass ? "PASS" : (o.status == Outcome::Fail ? "FAIL" : "SKIP");
        if (o.status == Outcome::Fail) ++failures;
        std::printf("%s [%2d] %s: %s (%.1fs)\n", tag, id, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    };

    report(1, "DTW equals brute-force warping-path enumeration", dtw_oracle);
    report(2, "Box-Cox round trip", box_cox_round_trip);
    report(3, "STL reconstruction and seasonal recovery", stl_reconstruction);
    report(4, "identity neighbour reproduces its future", identity_neighbour);
    report(5, "seasonality test calibration", seasonality_calibration);
    report(6, "MASE / MSIS / coverage hand cases", metric_hand_cases);
    report(7, "interval widening monotone, calibration on grid and repeatable", delta_properties);
    report(8, "k=100 beats k=1 on a 5000-series synthetic corpus", k_monotone);
    report(9, "thread count does not change outputs", determinism);

    std::optional<RealData> data;
    std::string load_error;
    try {
        data = load_real_data();
    } catch (const std::exception& e) {
        load_error = e.what();
    }
    const std::string why = load_error.empty() ? "set XSIM_TARGETS_CSV and XSIM_REFERENCE_CSV to run" : load_error;

    std::optional<SweepResult> headline;
    report(10, "total MASE (DTW, k=500) near 1.411 and yearly (DTW, k=100) near 2.777", [&]() -> Outcome {
        if (!data) return skip(why);
        headline = run_real(*data, DistanceKind::DTW, 500, true, [](const CorpusRecord&) { return true; });
        const double total = pooled(headline->mase_by_period);
        const auto yearly = run_real(*data, DistanceKind::DTW, 100, false,
                                     [](const CorpusRecord& r) { return r.period == 1; });
        const double y = mean_of(values_for(yearly.mase_by_period, 1));
        return verdict(std::abs(total - 1.411) <= 0.05 && std::abs(y - 2.777) <= 0.05,
                       fmt("total %.3f (1.411 +/- 0.05), yearly k=100 %.3f (2.777 +/- 0.05)", total, y));
    });
    report(11, "yearly MSIS below 30 and upper coverage above 90%", [&]() -> Outcome {
        if (!data) return skip(why);
        if (!headline) return fail("criterion 10 did not produce interval forecasts");
        const double m = mean_of(values_for(headline->msis_by_period, 1));
        const double u = mean_of(values_for(headline->upper_cov_by_period, 1));
        return verdict(m < 30.0 && u > 0.90, fmt("yearly MSIS %.3f (< 30), upper coverage %.3f (> 0.90)", m, u));
    });
    report(12, "DTW distance time exceeds L2 by more than 3x on monthly data", [&]() -> Outcome {
        if (!data) return skip(why);
        auto monthly = [](const CorpusRecord& r) { return r.period == 12; };
        const auto dtw = run_real(*data, DistanceKind::DTW, 500, false, monthly);
        const auto l2 = run_real(*data, DistanceKind::L2, 500, false, monthly);
        const double ratio = dtw.distance_seconds / l2.distance_seconds;
        return verdict(ratio > 3.0, fmt("DTW %.2fs vs L2 %.2fs, ratio %.1f (> 3)", dtw.distance_seconds,
                                        l2.distance_seconds, ratio));
    });

    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_start).count();
    std::printf("%s: %d failing criteria, %.1fs total\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures, total);
    return failures == 0 ? 0 : 1;
}
