#include "commands.hpp"

#include "xsim/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <thread>

namespace {

using namespace xsim::cli;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kInternal = 4 };

void add_preprocess_flags(CLI::App* cmd, PreprocessFlags& p) {
    cmd->add_option("--span-factor", p.span_factor, "Loess span as a multiple of h")->check(CLI::PositiveNumber);
    cmd->add_option("--acf-z", p.acf_z, "z value of the seasonality test")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda-lower", p.lambda_lower, "Lower end of the Box-Cox search interval");
    cmd->add_option("--lambda-upper", p.lambda_upper, "Upper end of the Box-Cox search interval");
    cmd->add_flag("--no-seasonal", p.no_seasonal, "Skip seasonal adjustment");
    cmd->add_flag("--no-smoothing", p.no_smoothing, "Skip loess smoothing");
}

void add_forecast_options(CLI::App* cmd, ForecastOptions& o, bool with_outputs) {
    cmd->add_option("--targets", o.targets, "Target series CSV")->required()->check(CLI::ExistingFile)->envname(
        "XSIM_TARGETS");
    cmd->add_option("--ref", o.ref, "Prebuilt reference set")->envname("XSIM_REF");
    cmd->add_option("--corpus", o.corpus, "Reference corpus CSV; sets are built per (frequency, n)")
        ->envname("XSIM_CORPUS");
    cmd->add_option("--distance", o.distance, "l1, l2 or dtw")
        ->check(CLI::IsMember({"l1", "l2", "dtw"}, CLI::ignore_case))
        ->capture_default_str();
    cmd->add_option("--k", o.k, "Number of neighbours")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--aggregator", o.aggregator, "median, mean or wmean")
        ->check(CLI::IsMember({"median", "mean", "wmean"}, CLI::ignore_case))
        ->capture_default_str();
    cmd->add_option("--alpha", o.alpha, "Interval significance level")->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--delta-step", o.delta_step, "Grid step of the widening factor")
        ->check(CLI::Range(1e-6, 1.0))
        ->capture_default_str();
    cmd->add_option("--cut", o.cut, "Keep only the last N years of each target")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output JSON (default stdout)");
    if (with_outputs) {
        cmd->add_option("--plot-csv", o.plot_csv, "Also write series_id,step,actual,point,lower,upper");
        cmd->add_option("--actuals", o.actuals, "Holdout CSV used to fill the actual column of --plot-csv")
            ->check(CLI::ExistingFile);
    }
    add_preprocess_flags(cmd, o.preprocess);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-similarity forecasting from a reference corpus"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_flag("--help", "Print this help message and exit");
    app.set_version_flag("--version", XSIM_VERSION);

    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string manifest;
    app.add_option("--threads", threads, "Worker threads")
        ->check(CLI::PositiveNumber)
        ->envname("XSIM_THREADS")
        ->capture_default_str();
    app.add_option("--manifest", manifest, "Run manifest path (default <out>.manifest.json, else stderr)");

    BuildRefOptions build;
    auto* build_cmd = app.add_subcommand("build-ref", "Preprocess a corpus into a reference set file");
    build_cmd->add_option("--corpus", build.corpus, "Corpus CSV")
        ->required()
        ->envname("XSIM_CORPUS")
        ->check(CLI::ExistingFile);
    build_cmd->add_option("--n", build.n, "Target history length")->required()->check(CLI::PositiveNumber);
    build_cmd->add_option("--h,--horizon", build.h, "Horizon (default per frequency)")->check(CLI::PositiveNumber);
    build_cmd->add_option("--freq", build.frequency, "yearly, quarterly, monthly or other:<s>")->required();
    build_cmd->add_option("--out", build.out, "Reference set file")->required()->envname("XSIM_REF");
    add_preprocess_flags(build_cmd, build.preprocess);

    ForecastOptions fc;
    auto* forecast_cmd = app.add_subcommand("forecast", "Point forecasts and prediction intervals");
    add_forecast_options(forecast_cmd, fc, true);

    ForecastOptions cal;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "Report the widening-factor grid search per series");
    add_forecast_options(calibrate_cmd, cal, false);

    EvaluateOptions ev;
    auto* eval_cmd = app.add_subcommand("evaluate", "Score forecasts against a holdout");
    eval_cmd->add_option("--forecasts", ev.forecasts, "Forecast JSON, as path or name=path (repeatable)");
    eval_cmd->add_option("--history", ev.history, "In-sample CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--actuals", ev.actuals, "Holdout CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--alpha", ev.alpha, "Interval significance level")->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    eval_cmd->add_option("--out-csv", ev.out_csv, "Per-series rows");
    eval_cmd->add_option("--out-json", ev.out_json, "Aggregate JSON (default stdout)");
    eval_cmd->add_option("--plot-csv", ev.plot_csv, "method,series_id,step,actual,point,lower,upper");
    eval_cmd->add_option("--sweep-k", ev.sweep_k, "Forecast the history for each k and report MASE per k")
        ->check(CLI::PositiveNumber)
        ->delimiter(',');
    eval_cmd->add_option("--ref", ev.sweep.ref, "Reference set for --sweep-k");
    eval_cmd->add_option("--corpus", ev.sweep.corpus, "Reference corpus for --sweep-k");
    eval_cmd->add_option("--distance", ev.sweep.distance, "Distance for --sweep-k")
        ->check(CLI::IsMember({"l1", "l2", "dtw"}, CLI::ignore_case));
    eval_cmd->add_option("--aggregator", ev.sweep.aggregator, "Aggregator for --sweep-k")
        ->check(CLI::IsMember({"median", "mean", "wmean"}, CLI::ignore_case));
    eval_cmd->add_option("--cut", ev.sweep.cut, "History cut for --sweep-k")->check(CLI::PositiveNumber);
    add_preprocess_flags(eval_cmd, ev.sweep.preprocess);

    SynthOptions synth;
    auto* synth_cmd = app.add_subcommand("synth", "Write a seeded synthetic corpus");
    synth_cmd->add_option("--count", synth.count, "Number of series")->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth_cmd->add_option("--min-length", synth.min_length)->capture_default_str();
    synth_cmd->add_option("--max-length", synth.max_length)->capture_default_str();
    synth_cmd->add_option("--freq", synth.frequency, "Frequency label")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
    synth_cmd->add_option("--out", synth.out, "Output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    std::vector<std::string> args(argv, argv + argc);
    auto* sub = app.get_subcommands().front();
    RunContext ctx(sub->get_name(), args, threads);
    std::string primary_output;
    try {
        if (sub == build_cmd) {
            primary_output = build.out;
            run_build_ref(build, ctx);
        } else if (sub == forecast_cmd) {
            primary_output = fc.out;
            run_forecast(fc, ctx);
        } else if (sub == calibrate_cmd) {
            primary_output = cal.out;
            run_calibrate(cal, ctx);
        } else if (sub == eval_cmd) {
            primary_output = ev.out_json;
            run_evaluate(ev, ctx);
        } else {
            primary_output = synth.out;
            run_synth(synth, ctx);
        }
        if (manifest.empty() && !primary_output.empty() && primary_output != "-") {
            manifest = primary_output + ".manifest.json";
        }
        ctx.write_manifest(manifest);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kUsage;
    } catch (const xsim::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kOk;
}
