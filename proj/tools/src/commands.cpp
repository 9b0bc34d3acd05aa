#include "commands.hpp"

#include "xsim/xsim.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#ifndef XSIM_VERSION
#define XSIM_VERSION "unknown"
#endif

namespace xsim::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    auto out = open_output(path);
    out << text;
    if (!out) {
        throw DataError("failed writing '" + path + "'");
    }
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first exception in index
/// order is rethrown, so failures do not depend on scheduling either.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    auto body = [&](std::size_t worker) {
        for (std::size_t i = worker; i < count; i += workers) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body, w);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Frequency frequency_from_label(const std::string& label) {
    return Frequency(period_for_label(label));
}

// --- targets and reference groups -------------------------------------------------------------

struct Target {
    const CorpusRecord* record;
    TimeSeries series;
};

std::vector<Target> make_targets(const std::vector<CorpusRecord>& records, std::optional<int> cut) {
    std::vector<Target> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        auto ts = to_time_series(r);
        if (cut) ts = apply_history_cut(ts, *cut);
        out.push_back({&r, std::move(ts)});
    }
    return out;
}

struct Group {
    PreprocessConfig config;
    std::optional<ReferenceSet> set;
    /// Reference set for n - h, used by the inner calibration holdout.
    std::optional<ReferenceSet> inner;
    std::vector<std::size_t> members;
};

bool can_calibrate(std::size_t n, int h, int period) {
    const auto hh = static_cast<std::size_t>(h);
    return n > 2 * hh && n - hh > static_cast<std::size_t>(period);
}

void report_build(const ReferenceBuild& b, std::size_t n, int h) {
    std::cerr << "reference set n=" << n << " h=" << h << ": m=" << b.set.size() << ", dropped " << b.dropped_short
              << " shorter than n+h";
    if (b.dropped_frequency > 0) std::cerr << " and " << b.dropped_frequency << " of another frequency";
    std::cerr << '\n';
}

/// Resolves one reference set per (period, n, h) of the targets: either the single prebuilt file
/// or sets built on the fly from a corpus.
std::vector<Group> resolve_groups(const ForecastOptions& o, const std::vector<Target>& targets, bool need_inner,
                                  RunContext& ctx) {
    if (o.ref.empty() == o.corpus.empty()) {
        throw UsageError("exactly one of --ref or --corpus is required");
    }
    std::vector<Group> groups;
    if (!o.ref.empty()) {
        ctx.add_input("reference_set", o.ref);
        const auto start = Clock::now();
        std::optional<PreprocessConfig> requested;
        Group g;
        ReferenceSet loaded = load_reference_set(o.ref);
        if (o.preprocess.any()) {
            requested = o.preprocess.resolve(loaded.frequency());
            loaded = load_reference_set(o.ref, requested);
        }
        g.config = loaded.config();
        const auto n = loaded.target_n();
        const auto h = loaded.horizon();
        const auto period = loaded.frequency().period();
        if (need_inner && can_calibrate(n, h, period)) {
            g.inner.emplace(rebuild_reference_set(loaded, n - static_cast<std::size_t>(h), ctx.threads()));
        }
        g.set.emplace(std::move(loaded));
        for (std::size_t i = 0; i < targets.size(); ++i) g.members.push_back(i);
        groups.push_back(std::move(g));
        ctx.add_timing("load_reference", seconds_since(start));
        return groups;
    }

    ctx.add_input("corpus", o.corpus);
    auto start = Clock::now();
    const auto corpus = read_corpus(o.corpus);
    ctx.add_timing("read_corpus", seconds_since(start));
    start = Clock::now();
    std::map<std::tuple<int, std::size_t, int>, std::size_t> index;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& ts = targets[i].series;
        const auto key = std::make_tuple(ts.frequency().period(), ts.size(), ts.horizon());
        auto [it, inserted] = index.emplace(key, groups.size());
        if (inserted) groups.emplace_back();
        groups[it->second].members.push_back(i);
    }
    for (auto& [key, gi] : index) {
        const auto [period, n, h] = key;
        auto& g = groups[gi];
        g.config = o.preprocess.resolve(Frequency(period));
        auto built = build_reference_set(corpus, n, h, Frequency(period), g.config, ctx.threads());
        report_build(built, n, h);
        if (need_inner && can_calibrate(n, h, period)) {
            g.inner.emplace(build_reference_set(corpus, n - static_cast<std::size_t>(h), h, Frequency(period), g.config,
                                                ctx.threads())
                                .set);
        }
        g.set.emplace(std::move(built.set));
    }
    ctx.add_timing("build_references", seconds_since(start));
    return groups;
}

ForecastConfig forecast_config(const ForecastOptions& o) {
    ForecastConfig fc;
    fc.distance = parse_distance(o.distance);
    fc.k = o.k;
    fc.aggregator = parse_aggregator(o.aggregator);
    fc.alpha = o.alpha;
    fc.delta_grid_step = o.delta_step;
    fc.validate();
    return fc;
}

nlohmann::json forecast_options_json(const ForecastOptions& o, const ForecastConfig& fc) {
    nlohmann::json j = to_json(fc);
    j["cut_years"] = o.cut ? nlohmann::json(*o.cut) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json group_configs_json(const std::vector<Group>& groups) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& g : groups) {
        out.push_back({{"period", g.set->frequency().period()},
                       {"n", g.set->target_n()},
                       {"h", g.set->horizon()},
                       {"m", g.set->size()},
                       {"preprocess", to_json(g.config)}});
    }
    return out;
}

std::map<std::string, std::vector<double>> load_actuals(const std::string& path) {
    std::map<std::string, std::vector<double>> out;
    if (path.empty()) return out;
    for (auto& r : read_corpus(path)) out.emplace(r.id, std::move(r.values));
    return out;
}

void warn_truncation(const std::vector<ForecastResult>& results, std::size_t k) {
    for (const auto& r : results) {
        if (r.neighbors_truncated) {
            std::cerr << "warning: k=" << k << " exceeds the reference set size; series '" << r.series_id << "' used "
                      << r.neighbor_ids.size() + r.dropped_paths << " neighbours\n";
            return;
        }
    }
}

void check_finite(const ForecastResult& r) {
    for (const auto* v : {&r.point, &r.lower, &r.upper}) {
        for (double x : *v) {
            if (!std::isfinite(x)) {
                throw std::logic_error("non-finite forecast produced for series '" + r.series_id + "'");
            }
        }
    }
}

}  // namespace

// --- PreprocessFlags / RunContext ---------------------------------------------------------------

bool PreprocessFlags::any() const {
    return span_factor || acf_z || lambda_lower || lambda_upper || no_seasonal || no_smoothing;
}

PreprocessConfig PreprocessFlags::resolve(Frequency frequency) const {
    auto cfg = PreprocessConfig::for_frequency(frequency);
    if (span_factor) cfg.span_factor = *span_factor;
    if (acf_z) cfg.acf_confidence_z = *acf_z;
    if (lambda_lower) cfg.lambda_lower = *lambda_lower;
    if (lambda_upper) cfg.lambda_upper = *lambda_upper;
    if (no_seasonal) cfg.enable_seasonal_adjustment = false;
    if (no_smoothing) cfg.enable_smoothing = false;
    cfg.validate();
    return cfg;
}

RunContext::RunContext(std::string command, std::vector<std::string> argv, unsigned threads)
    : threads_(std::max(1u, threads)) {
    manifest_ = {{"tool", "xsim"},
                 {"version", XSIM_VERSION},
                 {"command", std::move(command)},
                 {"argv", std::move(argv)},
                 {"threads", threads_},
                 {"seed", nullptr},
                 {"config", nlohmann::json::object()},
                 {"inputs", nlohmann::json::array()},
                 {"outputs", nlohmann::json::array()},
                 {"timing_seconds", nlohmann::json::object()}};
}

void RunContext::add_input(const std::string& role, const std::string& path) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    manifest_["inputs"].push_back({{"role", role},
                                   {"path", std::filesystem::absolute(path).lexically_normal().string()},
                                   {"bytes", ec ? nlohmann::json(nullptr) : nlohmann::json(size)}});
}

void RunContext::add_output(const std::string& role, const std::string& path) {
    if (path.empty()) return;
    manifest_["outputs"].push_back({{"role", role}, {"path", path}});
}

void RunContext::add_timing(const std::string& phase, double seconds) {
    auto& t = manifest_["timing_seconds"];
    t[phase] = t.value(phase, 0.0) + seconds;
}

void RunContext::write_manifest(const std::string& path) const {
    const auto text = manifest_.dump(2) + "\n";
    if (path.empty()) {
        std::cerr << "manifest: " << manifest_.dump() << '\n';
        return;
    }
    auto out = open_output(path);
    out << text;
}

// --- build-ref ----------------------------------------------------------------------------------

void run_build_ref(const BuildRefOptions& o, RunContext& ctx) {
    const Frequency freq = frequency_from_label(o.frequency);
    int h = 0;
    if (o.h) {
        h = *o.h;
    } else if (auto d = default_horizon(o.frequency)) {
        h = *d;
    } else {
        throw UsageError("--horizon is required for frequency '" + o.frequency + "'");
    }
    const auto cfg = o.preprocess.resolve(freq);
    ctx.set_config({{"frequency", label_for_period(freq.period())},
                    {"n", o.n},
                    {"h", h},
                    {"preprocess", to_json(cfg)}});
    ctx.add_input("corpus", o.corpus);
    ctx.add_output("reference_set", o.out);

    auto start = Clock::now();
    const auto corpus = read_corpus(o.corpus);
    ctx.add_timing("read_corpus", seconds_since(start));
    start = Clock::now();
    const auto built = build_reference_set(corpus, o.n, h, freq, cfg, ctx.threads());
    ctx.add_timing("build_reference", seconds_since(start));
    start = Clock::now();
    save_reference_set(built.set, o.out);
    ctx.add_timing("write", seconds_since(start));

    std::cout << "m=" << built.set.size() << " dropped=" << built.dropped_short + built.dropped_frequency
              << " (shorter than n+h: " << built.dropped_short << ", other frequency: " << built.dropped_frequency
              << ") n=" << o.n << " h=" << h << " -> " << o.out << '\n';
}

// --- forecast -----------------------------------------------------------------------------------

void run_forecast(const ForecastOptions& o, RunContext& ctx) {
    const auto fc = forecast_config(o);
    ctx.add_input("targets", o.targets);
    auto start = Clock::now();
    const auto records = read_corpus(o.targets);
    const auto targets = make_targets(records, o.cut);
    const auto actuals = load_actuals(o.actuals);
    if (!o.actuals.empty()) ctx.add_input("actuals", o.actuals);
    ctx.add_timing("read_targets", seconds_since(start));

    const auto groups = resolve_groups(o, targets, true, ctx);
    ctx.set_config({{"forecast", forecast_options_json(o, fc)}, {"references", group_configs_json(groups)}});

    start = Clock::now();
    std::vector<ForecastResult> results(targets.size());
    for (const auto& g : groups) {
        const bool per_target = g.members.size() > 1 && ctx.threads() > 1;
        auto local = fc;
        local.threads = per_target ? 1 : ctx.threads();
        parallel_for(g.members.size(), per_target ? ctx.threads() : 1, [&](std::size_t i) {
            const auto idx = g.members[i];
            results[idx] = forecast(targets[idx].series, *g.set, g.config, local, g.inner ? &*g.inner : nullptr);
            check_finite(results[idx]);
        });
    }
    ctx.add_timing("forecast", seconds_since(start));
    warn_truncation(results, fc.k);

    start = Clock::now();
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        auto j = to_json(results[i]);
        j["frequency"] = targets[i].record->frequency_label;
        j["n"] = targets[i].series.size();
        j["h"] = targets[i].series.horizon();
        out.push_back(std::move(j));
    }
    write_text(o.out, nlohmann::json{{"forecasts", std::move(out)}}.dump(2) + "\n");
    ctx.add_output("forecasts", o.out);

    if (!o.plot_csv.empty()) {
        std::ostringstream csv;
        csv << "series_id,step,actual,point,lower,upper\n";
        for (const auto& r : results) {
            const auto it = actuals.find(r.series_id);
            for (std::size_t t = 0; t < r.point.size(); ++t) {
                csv << r.series_id << ',' << (t + 1) << ',';
                if (it != actuals.end() && t < it->second.size()) csv << format_number(it->second[t]);
                csv << ',' << format_number(r.point[t]) << ',' << format_number(r.lower[t]) << ','
                    << format_number(r.upper[t]) << '\n';
            }
        }
        write_text(o.plot_csv, csv.str());
        ctx.add_output("plot_csv", o.plot_csv);
    }
    ctx.add_timing("write", seconds_since(start));
}

// --- calibrate ----------------------------------------------------------------------------------

void run_calibrate(const ForecastOptions& o, RunContext& ctx) {
    const auto fc = forecast_config(o);
    ctx.add_input("targets", o.targets);
    const auto records = read_corpus(o.targets);
    const auto targets = make_targets(records, o.cut);
    const auto groups = resolve_groups(o, targets, true, ctx);
    ctx.set_config({{"forecast", forecast_options_json(o, fc)}, {"references", group_configs_json(groups)}});

    const auto start = Clock::now();
    std::vector<Calibration> results(targets.size());
    for (const auto& g : groups) {
        const bool per_target = g.members.size() > 1 && ctx.threads() > 1;
        auto local = fc;
        local.threads = per_target ? 1 : ctx.threads();
        parallel_for(g.members.size(), per_target ? ctx.threads() : 1, [&](std::size_t i) {
            const auto idx = g.members[i];
            results[idx] = calibrate_delta(targets[idx].series, *g.set, g.config, local, g.inner ? &*g.inner : nullptr);
        });
    }
    ctx.add_timing("calibrate", seconds_since(start));

    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        out.push_back({{"series_id", targets[i].series.id()},
                       {"delta_star", results[i].delta_star},
                       {"calibration_skipped", results[i].skipped},
                       {"grid", results[i].grid},
                       {"msis", results[i].msis}});
    }
    write_text(o.out, nlohmann::json{{"calibrations", std::move(out)}}.dump(2) + "\n");
    ctx.add_output("calibrations", o.out);
}

// --- evaluate -----------------------------------------------------------------------------------

namespace {

struct MethodFile {
    std::string name;
    std::string path;
};

MethodFile parse_method(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq != std::string::npos && eq > 0) {
        return {spec.substr(0, eq), spec.substr(eq + 1)};
    }
    return {std::filesystem::path(spec).stem().string(), spec};
}

std::vector<ForecastResult> read_forecasts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open forecasts '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("forecasts") || !j["forecasts"].is_array()) {
        throw DataError("'" + path + "' has no \"forecasts\" array");
    }
    std::vector<ForecastResult> out;
    for (const auto& f : j["forecasts"]) out.push_back(forecast_from_json(f));
    return out;
}

std::map<std::string, const CorpusRecord*> by_id(const std::vector<CorpusRecord>& records) {
    std::map<std::string, const CorpusRecord*> out;
    for (const auto& r : records) out.emplace(r.id, &r);
    return out;
}

nlohmann::json ranks_json(const std::vector<SeriesScores>& rows, const std::vector<std::string>& methods) {
    // Mean ranks are taken over series scored by every method.
    std::map<std::string, std::map<std::string, double>> per_series;
    for (const auto& r : rows) per_series[r.series_id][r.method] = r.mase;
    std::map<std::string, std::vector<double>> scores;
    std::size_t used = 0;
    for (const auto& [id, m] : per_series) {
        if (m.size() != methods.size()) continue;
        for (const auto& [method, v] : m) scores[method].push_back(v);
        ++used;
    }
    if (used < 2) return nullptr;
    nlohmann::json out = {{"metric", "mase"}, {"series", used}, {"methods", nlohmann::json::object()}};
    for (const auto& [method, r] : mcb_ranks(scores)) {
        out["methods"][method] = {{"mean_rank", r.mean_rank}, {"ci_lower", r.ci_lower}, {"ci_upper", r.ci_upper}};
    }
    return out;
}

void run_sweep(const EvaluateOptions& o, const std::vector<CorpusRecord>& history,
               const std::map<std::string, const CorpusRecord*>& actuals, RunContext& ctx) {
    auto fo = o.sweep;
    fo.k = *std::max_element(o.sweep_k.begin(), o.sweep_k.end());
    const auto fc = forecast_config(fo);
    const auto targets = make_targets(history, fo.cut);
    const auto groups = resolve_groups(fo, targets, false, ctx);
    ctx.set_config({{"forecast", forecast_options_json(fo, fc)},
                    {"sweep_k", o.sweep_k},
                    {"references", group_configs_json(groups)}});

    const auto start = Clock::now();
    // One search with the largest k; each smaller k aggregates a prefix of the same ranking.
    std::vector<PointForecast> points(targets.size());
    for (const auto& g : groups) {
        const bool per_target = g.members.size() > 1 && ctx.threads() > 1;
        auto local = fc;
        local.threads = per_target ? 1 : ctx.threads();
        parallel_for(g.members.size(), per_target ? ctx.threads() : 1, [&](std::size_t i) {
            const auto idx = g.members[i];
            points[idx] = forecast_point(targets[idx].series, *g.set, g.config, local);
        });
    }
    ctx.add_timing("forecast", seconds_since(start));

    nlohmann::json sweep = nlohmann::json::array();
    std::ostringstream csv;
    csv << "k,frequency,count,mase\n";
    for (std::size_t k : o.sweep_k) {
        std::vector<SeriesScores> rows;
        std::vector<Exclusion> excluded;
        const std::string method = "k=" + std::to_string(k);
        for (std::size_t i = 0; i < targets.size(); ++i) {
            const auto& pf = points[i];
            const auto& id = targets[i].series.id();
            const auto it = actuals.find(id);
            if (it == actuals.end()) throw DataError("id mismatch: series '" + id + "' has no actuals");
            std::vector<std::vector<double>> paths;
            std::vector<double> dist;
            std::size_t rank = 0;
            for (std::size_t p = 0; p < pf.paths.paths.size(); ++p) {
                while (rank < pf.search.neighbors.size() &&
                       pf.search.neighbors[rank].index != pf.paths.reference_indices[p]) {
                    ++rank;
                }
                if (rank >= k) break;
                paths.push_back(pf.paths.paths[p]);
                dist.push_back(pf.paths.distances[p]);
            }
            if (paths.empty()) {
                excluded.push_back({method, id, "every neighbour path was dropped"});
                continue;
            }
            const auto point = aggregate_paths(paths, fc.aggregator, dist);
            const auto& actual = it->second->values;
            if (actual.size() != point.size()) {
                throw DataError("series '" + id + "': " + std::to_string(actual.size()) + " actuals for horizon " +
                                std::to_string(point.size()));
            }
            const auto insample = targets[i].series.values();
            const auto period = targets[i].series.frequency().period();
            try {
                rows.push_back({method, id, targets[i].record->frequency_label, mase(actual, point, insample, period)});
            } catch (const ZeroDenominatorError&) {
                excluded.push_back({method, id, "zero in-sample scale"});
            }
        }
        const auto report = build_report(std::move(rows), excluded);
        nlohmann::json entry = {{"k", k}, {"by_frequency", nlohmann::json::object()}};
        const auto freq_it = report.by_frequency.find(method);
        if (freq_it != report.by_frequency.end()) {
            for (const auto& [label, agg] : freq_it->second) {
                entry["by_frequency"][label] = {{"count", agg.count}, {"mase", agg.mase}};
                csv << k << ',' << label << ',' << agg.count << ',' << format_number(agg.mase) << '\n';
            }
        }
        const auto total_it = report.total.find(method);
        if (total_it != report.total.end()) {
            entry["total"] = {{"count", total_it->second.count}, {"mase", total_it->second.mase}};
            csv << k << ",total," << total_it->second.count << ',' << format_number(total_it->second.mase) << '\n';
        }
        entry["excluded"] = excluded.size();
        sweep.push_back(std::move(entry));
    }
    write_text(o.out_json, nlohmann::json{{"sweep", std::move(sweep)}}.dump(2) + "\n");
    ctx.add_output("aggregate_json", o.out_json);
    if (!o.out_csv.empty()) {
        write_text(o.out_csv, csv.str());
        ctx.add_output("rows_csv", o.out_csv);
    }
}

}  // namespace

void run_evaluate(const EvaluateOptions& o, RunContext& ctx) {
    ctx.add_input("history", o.history);
    ctx.add_input("actuals", o.actuals);
    const auto history = read_corpus(o.history);
    const auto actual_records = read_corpus(o.actuals);
    const auto hist = by_id(history);
    const auto act = by_id(actual_records);

    if (!o.sweep_k.empty()) {
        if (!o.forecasts.empty()) throw UsageError("--sweep-k runs its own forecasts; drop --forecasts");
        run_sweep(o, history, act, ctx);
        return;
    }
    if (o.forecasts.empty()) throw UsageError("evaluate needs at least one --forecasts file (or --sweep-k)");

    std::vector<SeriesScores> rows;
    std::vector<Exclusion> excluded;
    std::vector<std::string> methods;
    std::ostringstream plot;
    plot << "method,series_id,step,actual,point,lower,upper\n";
    for (const auto& spec : o.forecasts) {
        const auto mf = parse_method(spec);
        if (std::find(methods.begin(), methods.end(), mf.name) != methods.end()) {
            throw UsageError("method name '" + mf.name + "' given twice");
        }
        methods.push_back(mf.name);
        ctx.add_input("forecasts:" + mf.name, mf.path);
        for (const auto& f : read_forecasts(mf.path)) {
            const auto h_it = hist.find(f.series_id);
            const auto a_it = act.find(f.series_id);
            if (h_it == hist.end() || a_it == act.end()) {
                throw DataError("id mismatch: forecast for series '" + f.series_id + "' in '" + mf.path + "' has no " +
                                (h_it == hist.end() ? "history" : "actuals"));
            }
            const auto& y = a_it->second->values;
            if (y.size() != f.point.size()) {
                throw DataError("series '" + f.series_id + "': " + std::to_string(y.size()) +
                                " actuals but forecast horizon " + std::to_string(f.point.size()));
            }
            const auto lower = f.lower.empty() ? f.point : f.lower;
            const auto upper = f.upper.empty() ? f.point : f.upper;
            SeriesEvaluationInput in{mf.name,
                                     f.series_id,
                                     h_it->second->frequency_label,
                                     h_it->second->values,
                                     h_it->second->period,
                                     y,
                                     f.point,
                                     lower,
                                     upper};
            if (auto scores = evaluate_series(in, o.alpha)) {
                rows.push_back(std::move(*scores));
            } else {
                excluded.push_back({mf.name, f.series_id, "zero in-sample scale"});
            }
            for (std::size_t t = 0; t < y.size(); ++t) {
                plot << mf.name << ',' << f.series_id << ',' << (t + 1) << ',' << format_number(y[t]) << ','
                     << format_number(f.point[t]) << ',' << format_number(lower[t]) << ','
                     << format_number(upper[t]) << '\n';
            }
        }
    }
    ctx.set_config({{"alpha", o.alpha}, {"methods", methods}});

    const auto ranks = methods.size() >= 2 ? ranks_json(rows, methods) : nlohmann::json(nullptr);
    const auto report = build_report(std::move(rows), std::move(excluded));
    auto aggregate = report_aggregate_json(report);
    if (!ranks.is_null()) aggregate["mean_ranks"] = ranks;
    write_text(o.out_json, aggregate.dump(2) + "\n");
    ctx.add_output("aggregate_json", o.out_json);
    if (!o.out_csv.empty()) {
        write_text(o.out_csv, report_rows_csv(report));
        ctx.add_output("rows_csv", o.out_csv);
    }
    if (!o.plot_csv.empty()) {
        write_text(o.plot_csv, plot.str());
        ctx.add_output("plot_csv", o.plot_csv);
    }
}

// --- synth --------------------------------------------------------------------------------------

void run_synth(const SynthOptions& o, RunContext& ctx) {
    if (o.min_length < 1 || o.max_length < o.min_length) {
        throw UsageError("--min-length must be >= 1 and <= --max-length");
    }
    const auto period = period_for_label(o.frequency);
    const int horizon = default_horizon(o.frequency).value_or(period);
    ctx.set_seed(o.seed);
    ctx.set_config({{"count", o.count},
                    {"min_length", o.min_length},
                    {"max_length", o.max_length},
                    {"frequency", o.frequency}});

    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<std::size_t> length(o.min_length, o.max_length);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<CorpusRecord> out;
    out.reserve(o.count);
    for (std::size_t i = 0; i < o.count; ++i) {
        // Damped-trend level with optional multiplicative seasonality and noise.
        const auto n = length(rng);
        double level = 100.0 + 900.0 * unit(rng);
        double trend = (unit(rng) - 0.3) * 0.04 * level;
        const double phi = 0.85 + 0.14 * unit(rng);
        const double amp = period > 1 && unit(rng) < 0.6 ? 0.05 + 0.25 * unit(rng) : 0.0;
        const double noise = 0.01 + 0.05 * unit(rng);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        std::vector<double> v(n);
        for (std::size_t t = 0; t < n; ++t) {
            level = std::max(1.0, level + trend);
            trend *= phi;
            const double season = 1.0 + amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period + phase);
            v[t] = std::round(level * season * std::exp(noise * gauss(rng)) * 1000.0) / 1000.0;
        }
        std::ostringstream id;
        id << "S" << (i + 1);
        out.push_back({id.str(), o.frequency, period, std::move(v), horizon});
    }
    std::ostringstream text;
    write_corpus(text, out);
    write_text(o.out, text.str());
    ctx.add_output("corpus", o.out);
}

}  // namespace xsim::cli
