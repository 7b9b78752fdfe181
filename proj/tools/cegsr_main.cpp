// cegsr: command line front end for the closed-loop super-resolution engine.
//
// Subcommands: synth, degrade, superres, fit-linear, q1, bounds, run,
// sweep-lambda, compare-downsamplers, compare-arch. Every table is CSV unless
// --format text. Exit status is 0 on success and nonzero with a diagnostic on
// stderr for any error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cegsr/control.hpp"
#include "cegsr/degrade.hpp"
#include "cegsr/errors.hpp"
#include "cegsr/experiment.hpp"
#include "cegsr/io.hpp"
#include "cegsr/loop.hpp"
#include "cegsr/metrics.hpp"
#include "cegsr/signal.hpp"
#include "cegsr/sr_operator.hpp"
#include "cegsr/synth.hpp"

namespace {

using namespace cegsr;

/* ---- shared flag bundles ---------------------------------------------- */

struct SynthFlags {
    int channels = 1;
    int samples = 300;
    double rate = 500.0;
    double bpm = 60.0;
    double baseline = 0.0;
    double amp_jitter = 0.5;
    double phase_jitter = 1.0;
    double bpm_jitter = 0.0;
    std::uint64_t seed = 0;
};

void add_synth_flags(CLI::App* cmd, SynthFlags& f) {
    cmd->add_option("--channels", f.channels, "Channels per record")->capture_default_str();
    cmd->add_option("--samples", f.samples, "Samples per channel (SR grid)")
        ->capture_default_str();
    cmd->add_option("--rate", f.rate, "Sampling rate in Hz")->capture_default_str();
    cmd->add_option("--bpm", f.bpm, "Heart rate in beats per minute")->capture_default_str();
    cmd->add_option("--baseline", f.baseline, "Constant baseline offset")->capture_default_str();
    cmd->add_option("--amp-jitter", f.amp_jitter, "Per-channel amplitude jitter half-width")
        ->capture_default_str();
    cmd->add_option("--phase-jitter", f.phase_jitter, "Per-record phase offset range (beats)")
        ->capture_default_str();
    cmd->add_option("--bpm-jitter", f.bpm_jitter, "Per-record bpm jitter half-width")
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Base random seed")->capture_default_str();
}

SynthSpec synth_spec_from(const SynthFlags& f) {
    SynthSpec spec;
    spec.channels = f.channels;
    spec.samples = f.samples;
    spec.rate_hz = f.rate;
    spec.bpm = f.bpm;
    spec.baseline = f.baseline;
    spec.amp_jitter = f.amp_jitter;
    spec.phase_jitter = f.phase_jitter;
    spec.bpm_jitter = f.bpm_jitter;
    spec.seed = f.seed;
    return spec;
}

struct NoiseFlags {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::string artifact = "none";
    double artifact_amp = 0.1;
    double artifact_freq = 0.5;
};

void add_noise_flags(CLI::App* cmd, NoiseFlags& f, const char* prefix) {
    const std::string p(prefix);
    cmd->add_option("--" + p + "noise-sigma", f.sigma, "Gaussian noise sigma")
        ->capture_default_str();
    cmd->add_option("--" + p + "noise-seed", f.seed, "Noise seed")->capture_default_str();
    cmd->add_option("--" + p + "artifact", f.artifact,
                    "Artifact model: none, baseline_wander, emg_like")
        ->capture_default_str();
    cmd->add_option("--" + p + "artifact-amp", f.artifact_amp,
                    "Artifact amplitude (wander) or sigma (emg)")
        ->capture_default_str();
    cmd->add_option("--" + p + "artifact-freq", f.artifact_freq,
                    "Artifact frequency (wander) or high-pass cutoff (emg), Hz")
        ->capture_default_str();
}

NoiseSpec noise_spec_from(const NoiseFlags& f) {
    NoiseSpec spec;
    spec.sigma = f.sigma;
    spec.seed = f.seed;
    if (f.artifact == "none") {
        // leave monostate
    } else if (f.artifact == "baseline_wander") {
        spec.artifact = BaselineWander{f.artifact_amp, f.artifact_freq};
    } else if (f.artifact == "emg_like") {
        spec.artifact = EmgLike{f.artifact_amp, f.artifact_freq};
    } else {
        throw Error("noise: unknown artifact '" + f.artifact +
                    "' (expected none, baseline_wander, emg_like)");
    }
    return spec;
}

struct LoopFlags {
    double lambda = 1.0;
    double dt = 1.0;
    int iters = 50;
    double tol = 1e-8;
    std::string downsampler = "nearest";
    int arch = 1;
    std::string init = "observed_lr";
    NoiseFlags noise;
};

void add_loop_flags(CLI::App* cmd, LoopFlags& f) {
    cmd->add_option("--lambda", f.lambda, "Feedback gain (omit for gain-matched auto value)");
    cmd->add_option("--dt", f.dt, "Integration step")->capture_default_str();
    cmd->add_option("--iters", f.iters, "Maximum PI updates")->capture_default_str();
    cmd->add_option("--tol", f.tol, "Relative LR residual tolerance")->capture_default_str();
    cmd->add_option("--downsampler", f.downsampler,
                    "In-loop downsampler: nearest, linear, cubic, area")
        ->capture_default_str();
    cmd->add_option("--arch", f.arch, "Feedback architecture: 1 (LR domain) or 2 (SR domain)")
        ->capture_default_str();
    cmd->add_option("--init", f.init, "Pre-position init: observed_lr or zero")
        ->capture_default_str();
    add_noise_flags(cmd, f.noise, "loop-");
}

PreIntegratorInit init_from(const std::string& name) {
    if (name == "observed_lr") return PreIntegratorInit::observed_lr;
    if (name == "zero") return PreIntegratorInit::zero;
    throw Error("loop: unknown init '" + name + "' (expected observed_lr or zero)");
}

LoopConfig loop_config_from(const LoopFlags& f) {
    LoopConfig config;
    config.lambda = f.lambda;
    config.dt = f.dt;
    config.max_iters = f.iters;
    config.tol = f.tol;
    config.downsampler = downsample_kind_from_string(f.downsampler);
    config.architecture = f.arch;
    config.init = init_from(f.init);
    config.noise = noise_spec_from(f.noise);
    return config;
}

Normalization normalization_from(const std::string& name) {
    if (name == "ref255") return Normalization::ref_minmax_255;
    if (name == "raw") return Normalization::raw;
    throw Error("metrics: unknown normalization '" + name + "' (expected ref255 or raw)");
}

/* --sr value: replication | interp:<kernel> | linear | linear:<file> |
 * external:<command> */
SrSelection sr_selection_from(const std::string& value, double ridge) {
    if (value == "replication") return SrReplication{};
    if (value.rfind("interp:", 0) == 0)
        return SrInterp{downsample_kind_from_string(value.substr(7))};
    if (value == "linear") return SrLinearFit{ridge};
    if (value.rfind("linear:", 0) == 0) return SrLinearFile{value.substr(7)};
    if (value.rfind("external:", 0) == 0) return SrExternal{value.substr(9)};
    throw Error("sr: unknown operator '" + value +
                "' (expected replication, interp:<kernel>, linear, linear:<file>, "
                "external:<command>)");
}

struct PlanFlags {
    int records = 40;
    SynthFlags synth;
    std::string data_dir;
    double train_fraction = 0.9;
    std::uint64_t split_seed = 1;
    int factor = 5;
    std::string data_downsampler = "nearest";
    NoiseFlags data_noise;
    std::string sr = "linear";
    double ridge = 1e-6;
    LoopFlags loop;
    std::string normalization = "ref255";
    std::string out;
    std::string format = "csv";
};

void add_plan_flags(CLI::App* cmd, PlanFlags& f) {
    cmd->add_option("--records", f.records, "Synthetic record count")->capture_default_str();
    add_synth_flags(cmd, f.synth);
    cmd->add_option("--data", f.data_dir,
                    "Directory of records to use instead of synthetic data");
    cmd->add_option("--train-fraction", f.train_fraction, "Training split fraction")
        ->capture_default_str();
    cmd->add_option("--split-seed", f.split_seed, "Split shuffle seed")->capture_default_str();
    cmd->add_option("--factor", f.factor, "Super-resolution factor")->capture_default_str();
    cmd->add_option("--data-downsampler", f.data_downsampler,
                    "Downsampler used to build the dataset LR records")
        ->capture_default_str();
    add_noise_flags(cmd, f.data_noise, "");
    cmd->add_option("--sr", f.sr,
                    "SR operator: replication, interp:<kernel>, linear, linear:<file>, "
                    "external:<command>")
        ->capture_default_str();
    cmd->add_option("--ridge", f.ridge, "Ridge for the fitted linear operator")
        ->capture_default_str();
    add_loop_flags(cmd, f.loop);
    cmd->add_option("--normalization", f.normalization, "Metric normalization: ref255 or raw")
        ->capture_default_str();
    cmd->add_option("--out", f.out, "Output directory for tables")->required();
    cmd->add_option("--format", f.format, "Result table format: csv or text")
        ->capture_default_str();
}

ExperimentPlan plan_from(const PlanFlags& f, bool lambda_given) {
    ExperimentPlan plan;
    if (f.data_dir.empty()) {
        SyntheticDataset ds;
        ds.base = synth_spec_from(f.synth);
        ds.count = f.records;
        plan.dataset = ds;
    } else {
        plan.dataset = DirectoryDataset{f.data_dir};
    }
    plan.train_fraction = f.train_fraction;
    plan.split_seed = f.split_seed;
    plan.factor = f.factor;
    plan.data_downsampler = downsample_kind_from_string(f.data_downsampler);
    plan.data_noise = noise_spec_from(f.data_noise);
    plan.sr = sr_selection_from(f.sr, f.ridge);
    plan.loop = loop_config_from(f.loop);
    plan.auto_lambda = !lambda_given;
    plan.normalization = normalization_from(f.normalization);
    plan.out_dir = f.out;
    return plan;
}

TableFormat format_from(const std::string& name) {
    if (name == "csv") return TableFormat::csv;
    if (name == "text") return TableFormat::text;
    throw Error("table: unknown format '" + name + "' (expected csv or text)");
}

void echo_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::cout << in.rdbuf();
}

/* Builds a concrete operator for single-record subcommands (superres, q1). */
SrOperatorSpec operator_for_record(const std::string& sr_value, double ridge,
                                   const SignalRecord& lr, int factor) {
    const SrSelection selection = sr_selection_from(sr_value, ridge);
    const SamplingGeometry g = make_geometry(lr.channels, lr.samples_per_channel, factor);
    if (std::holds_alternative<SrReplication>(selection)) return make_replication_sr(g);
    if (const auto* interp = std::get_if<SrInterp>(&selection))
        return make_interp_sr(g, interp->kernel);
    if (const auto* file = std::get_if<SrLinearFile>(&selection)) {
        auto model = std::make_shared<LinearSrModel>(load_linear_sr(file->path));
        return make_linear_sr(g, std::move(model));
    }
    if (const auto* ext = std::get_if<SrExternal>(&selection))
        return make_external_sr(g, ext->command);
    throw Error("sr: 'linear' without a model file needs a training run; use "
                "fit-linear first and pass --sr linear:<file>");
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/* ---- subcommand bodies -------------------------------------------------- */

int cmd_synth(const SynthFlags& synth, int count, const std::string& out,
              const std::string& format) {
    if (count < 1) throw Error("synth: --count must be >= 1");
    SyntheticDataset ds;
    ds.base = synth_spec_from(synth);
    ds.count = count;
    const std::vector<SignalRecord> records = materialize_dataset(ds);
    std::filesystem::create_directories(out);
    const FileFormat ff = format == "raw" ? FileFormat::raw : FileFormat::csv;
    const char* ext = format == "raw" ? ".raw" : ".csv";
    if (format != "raw" && format != "csv")
        throw Error("synth: unknown format '" + format + "' (expected csv or raw)");
    for (const SignalRecord& rec : records)
        save_record(rec, std::filesystem::path(out) / (rec.record_id + ext), ff);
    std::cout << "wrote " << records.size() << " records to " << out << "\n";
    return 0;
}

int cmd_degrade(const std::string& in, const std::string& out, int factor,
                const std::string& downsampler, const NoiseFlags& noise) {
    const SignalRecord sr = load_record(in);
    const SignalRecord lr =
        apply_lr(sr, factor, downsample_kind_from_string(downsampler), noise_spec_from(noise));
    save_record(lr, out);
    std::cout << "wrote " << lr.channels << "x" << lr.samples_per_channel << " LR record to "
              << out << "\n";
    return 0;
}

int cmd_superres(const std::string& in, const std::string& out, const std::string& sr_value,
                 double ridge, int factor, const std::string& mode, const LoopFlags& loop,
                 bool lambda_given, const std::string& reference_path,
                 const std::string& trace_path, const std::string& normalization) {
    const SignalRecord lr = load_record(in);
    const SrOperatorSpec op = operator_for_record(sr_value, ridge, lr, factor);
    const Normalization norm = normalization_from(normalization);

    SignalRecord reference;
    const bool have_reference = !reference_path.empty();
    if (have_reference) reference = load_record(reference_path);

    SignalRecord result;
    if (mode == "open") {
        result = open_loop_baseline(op, lr);
        std::cout << "open-loop reconstruction: " << result.channels << "x"
                  << result.samples_per_channel << "\n";
    } else if (mode == "closed") {
        LoopConfig config = loop_config_from(loop);
        if (!lambda_given) {
            double gain = 0.0;
            config.lambda = gain_matched_lambda(op, config.downsampler, config.dt, &gain);
            std::cout << "auto lambda " << fmt(config.lambda) << " (loop gain " << fmt(gain)
                      << ")\n";
        }
        const LoopResult run =
            run_closed_loop(op, lr, config, have_reference ? &reference : nullptr, norm);
        result = run.output;
        std::cout << "closed-loop reconstruction: " << result.channels << "x"
                  << result.samples_per_channel << "\niterations " << run.trace.iterations
                  << "\nstop_reason " << to_string(run.trace.stop_reason) << "\n";
        if (!trace_path.empty()) write_trace_csv(run.trace, trace_path);
    } else {
        throw Error("superres: unknown mode '" + mode + "' (expected open or closed)");
    }
    save_record(result, out);
    if (have_reference) {
        const MetricReport m = compute_metrics(reference, result, norm);
        std::cout << "psnr_db " << (m.psnr_infinite ? "inf" : fmt(m.psnr_db)) << "\nssim "
                  << fmt(m.ssim) << "\n";
    }
    return 0;
}

int cmd_fit_linear(const std::string& data_dir, int factor, const std::string& downsampler,
                   const NoiseFlags& noise, double ridge, const std::string& out) {
    const std::vector<SignalRecord> records = materialize_dataset(DirectoryDataset{data_dir});
    const DownsampleKind kind = downsample_kind_from_string(downsampler);
    const NoiseSpec base_noise = noise_spec_from(noise);
    std::vector<TrainPair> pairs;
    pairs.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        NoiseSpec rec_noise = base_noise;
        rec_noise.seed = base_noise.seed + i;
        pairs.push_back({apply_lr(records[i], factor, kind, rec_noise).data, records[i].data});
    }
    const LinearSrModel model = fit_linear_sr(pairs, ridge);
    save_linear_sr(model, out);
    std::cout << "fitted linear SR " << model.lr_total << " -> " << model.sr_total << " on "
              << pairs.size() << " pairs (ridge " << fmt(model.ridge) << ")\ntraining_hash "
              << model.training_hash << "\nwrote " << out << "\n";
    return 0;
}

int cmd_q1(const std::string& in, const std::string& sr_value, double ridge, int factor,
           const std::string& downsampler, double eps, double dt) {
    const SignalRecord lr = load_record(in);
    const SrOperatorSpec op = operator_for_record(sr_value, ridge, lr, factor);
    const DownsampleKind kind = downsample_kind_from_string(downsampler);
    const LsMap ls = make_loop_ls_map(op, kind);
    const double q1 = estimate_q1(ls, lr.data, eps);
    const double gain = estimate_dc_gain(ls, lr.data, eps);
    std::cout << "d " << lr.data.size() << "\nq1 " << fmt(q1) << "\ndc_gain " << fmt(gain)
              << "\n";
    if (q1 != 0.0) {
        const LambdaBounds b = lambda_bounds(q1, static_cast<int>(lr.data.size()), dt);
        std::cout << "lambda_lower " << fmt(b.lower) << "\nlambda_upper " << fmt(b.upper)
                  << "\nlambda_midpoint " << fmt(b.midpoint()) << "\nspectral_upper "
                  << fmt(b.spectral_upper) << "\n";
    }
    if (gain != 0.0 && std::isfinite(gain))
        std::cout << "gain_matched_lambda " << fmt(1.0 / (dt * gain)) << "\n";
    return 0;
}

int cmd_bounds(double q1, int d, double dt) {
    const LambdaBounds b = lambda_bounds(q1, d, dt);
    std::cout << "lambda_lower " << fmt(b.lower) << "\nlambda_upper " << fmt(b.upper)
              << "\nlambda_midpoint " << fmt(b.midpoint()) << "\nlambda_width " << fmt(b.width())
              << "\nspectral_upper " << fmt(b.spectral_upper) << "\n";
    return 0;
}

int cmd_run(const PlanFlags& flags, bool lambda_given) {
    ExperimentPlan plan = plan_from(flags, lambda_given);
    const TableFormat format = format_from(flags.format);
    ExperimentResult result = run_experiment(plan);
    if (format == TableFormat::text) {
        // Re-emit the table in the requested format next to the CSV.
        const std::filesystem::path text_path = plan.out_dir / "results.txt";
        emit_table(result.rows, TableFormat::text, text_path);
        result.table_path = text_path;
    }
    std::cout << "lambda " << fmt(result.lambda_used);
    if (result.dc_gain != 0.0) std::cout << " (loop gain " << fmt(result.dc_gain) << ")";
    std::cout << "\n" << render_result_table(result.rows, format);
    std::cout << "wrote " << result.table_path.string() << "\n";
    return 0;
}

int cmd_sweep(const PlanFlags& flags, const std::string& lambdas_csv) {
    const ExperimentPlan plan = plan_from(flags, /*lambda_given=*/false);
    std::vector<double> lambdas;
    if (!lambdas_csv.empty()) {
        std::istringstream ss(lambdas_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                lambdas.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw Error("sweep-lambda: malformed lambda value '" + tok + "'");
            }
        }
    } else {
        lambdas = default_lambda_grid(plan);
    }
    const SweepResult result = sweep_lambda(plan, lambdas);
    echo_file(result.table_path);
    std::cout << "selected_lambda " << fmt(result.selected_lambda)
              << (result.fallback ? " (fallback: no positive SSIM increment)" : "") << "\n";
    return 0;
}

int cmd_compare_downsamplers(const PlanFlags& flags, bool lambda_given) {
    const ExperimentPlan plan = plan_from(flags, lambda_given);
    const CompareDownsamplersResult result = compare_downsamplers(plan);
    echo_file(result.table_path);
    std::cout << "best " << to_string(result.rows.front().kind) << "\n";
    return 0;
}

int cmd_compare_arch(const PlanFlags& flags, bool lambda_given) {
    const ExperimentPlan plan = plan_from(flags, lambda_given);
    const CompareArchitecturesResult result = compare_architectures(plan);
    echo_file(result.table_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop super-resolution engine for 1-D physiological signals"};
    app.require_subcommand(1);
    int exit_code = 0;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic ECG dataset");
    SynthFlags synth_flags;
    int synth_count = 20;
    std::string synth_out;
    std::string synth_format = "csv";
    add_synth_flags(synth, synth_flags);
    synth->add_option("--count", synth_count, "Number of records")->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--format", synth_format, "Record format: csv or raw")
        ->capture_default_str();
    synth->callback(
        [&]() { exit_code = cmd_synth(synth_flags, synth_count, synth_out, synth_format); });

    // degrade
    auto* degrade = app.add_subcommand("degrade", "Down-sample (and optionally add noise to) a record");
    std::string degrade_in, degrade_out;
    int degrade_factor = 5;
    std::string degrade_kind = "nearest";
    NoiseFlags degrade_noise;
    degrade->add_option("--in", degrade_in, "Input record")->required();
    degrade->add_option("--out", degrade_out, "Output record")->required();
    degrade->add_option("--factor", degrade_factor, "Down-sampling factor")->capture_default_str();
    degrade->add_option("--downsampler", degrade_kind, "Kernel: nearest, linear, cubic, area")
        ->capture_default_str();
    add_noise_flags(degrade, degrade_noise, "");
    degrade->callback([&]() {
        exit_code = cmd_degrade(degrade_in, degrade_out, degrade_factor, degrade_kind,
                                degrade_noise);
    });

    // superres
    auto* superres = app.add_subcommand("superres", "Reconstruct one record (open or closed loop)");
    std::string sup_in, sup_out, sup_sr = "replication", sup_mode = "closed";
    std::string sup_reference, sup_trace, sup_norm = "ref255";
    double sup_ridge = 1e-6;
    int sup_factor = 5;
    LoopFlags sup_loop;
    superres->add_option("--in", sup_in, "Observed LR record")->required();
    superres->add_option("--out", sup_out, "Output SR record")->required();
    superres->add_option("--sr", sup_sr, "SR operator (see run --help)")->capture_default_str();
    superres->add_option("--ridge", sup_ridge, "Ridge when fitting")->capture_default_str();
    superres->add_option("--factor", sup_factor, "Super-resolution factor")->capture_default_str();
    superres->add_option("--mode", sup_mode, "open or closed")->capture_default_str();
    superres->add_option("--reference", sup_reference, "Ground-truth SR record for metrics");
    superres->add_option("--trace", sup_trace, "Write the convergence trace CSV here");
    superres->add_option("--normalization", sup_norm, "ref255 or raw")->capture_default_str();
    add_loop_flags(superres, sup_loop);
    superres->callback([&]() {
        exit_code = cmd_superres(sup_in, sup_out, sup_sr, sup_ridge, sup_factor, sup_mode,
                                 sup_loop, superres->count("--lambda") > 0, sup_reference,
                                 sup_trace, sup_norm);
    });

    // fit-linear
    auto* fit = app.add_subcommand("fit-linear", "Fit the linear SR operator on a record directory");
    std::string fit_data, fit_out, fit_kind = "nearest";
    int fit_factor = 5;
    double fit_ridge = 1e-6;
    NoiseFlags fit_noise;
    fit->add_option("--data", fit_data, "Directory of ground-truth SR records")->required();
    fit->add_option("--factor", fit_factor, "Super-resolution factor")->capture_default_str();
    fit->add_option("--downsampler", fit_kind, "Kernel used to build training LR records")
        ->capture_default_str();
    add_noise_flags(fit, fit_noise, "");
    fit->add_option("--ridge", fit_ridge, "Ridge penalty")->capture_default_str();
    fit->add_option("--out", fit_out, "Model file to write")->required();
    fit->callback([&]() {
        exit_code = cmd_fit_linear(fit_data, fit_factor, fit_kind, fit_noise, fit_ridge, fit_out);
    });

    // q1
    auto* q1 = app.add_subcommand("q1", "Estimate the loop Jacobian aggregate and gain");
    std::string q1_in, q1_sr = "replication", q1_kind = "nearest";
    double q1_eps = 1e-3, q1_dt = 1.0, q1_ridge = 1e-6;
    int q1_factor = 5;
    q1->add_option("--in", q1_in, "LR record defining the probe point")->required();
    q1->add_option("--sr", q1_sr, "SR operator (see run --help)")->capture_default_str();
    q1->add_option("--ridge", q1_ridge, "Ridge when fitting")->capture_default_str();
    q1->add_option("--factor", q1_factor, "Super-resolution factor")->capture_default_str();
    q1->add_option("--downsampler", q1_kind, "In-loop downsampler")->capture_default_str();
    q1->add_option("--eps", q1_eps, "Finite-difference step")->capture_default_str();
    q1->add_option("--dt", q1_dt, "Integration step for the suggested gains")
        ->capture_default_str();
    q1->callback([&]() {
        exit_code = cmd_q1(q1_in, q1_sr, q1_ridge, q1_factor, q1_kind, q1_eps, q1_dt);
    });

    // bounds
    auto* bounds = app.add_subcommand("bounds", "Print the stability interval for a gain");
    double b_q1 = 0.0, b_dt = 1.0;
    int b_d = 0;
    bounds->add_option("--q1", b_q1, "Jacobian mean entry")->required();
    bounds->add_option("--d", b_d, "LR dimension")->required();
    bounds->add_option("--dt", b_dt, "Integration step")->capture_default_str();
    bounds->callback([&]() { exit_code = cmd_bounds(b_q1, b_d, b_dt); });

    // run
    auto* run = app.add_subcommand("run", "Run an open-vs-closed experiment");
    PlanFlags run_flags;
    add_plan_flags(run, run_flags);
    run->callback([&]() { exit_code = cmd_run(run_flags, run->count("--lambda") > 0); });

    // sweep-lambda
    auto* sweep = app.add_subcommand("sweep-lambda", "Evaluate the closed loop over a gain grid");
    PlanFlags sweep_flags;
    std::string sweep_lambdas;
    add_plan_flags(sweep, sweep_flags);
    sweep->add_option("--lambdas", sweep_lambdas,
                      "Comma-separated gain list (default: 0.1..1.0 plus the gain-matched value)");
    sweep->callback([&]() { exit_code = cmd_sweep(sweep_flags, sweep_lambdas); });

    // compare-downsamplers
    auto* cmp_ds = app.add_subcommand("compare-downsamplers",
                                      "Rank in-loop downsamplers by closed-loop PSNR");
    PlanFlags cmp_ds_flags;
    add_plan_flags(cmp_ds, cmp_ds_flags);
    cmp_ds->callback([&]() {
        exit_code = cmd_compare_downsamplers(cmp_ds_flags, cmp_ds->count("--lambda") > 0);
    });

    // compare-arch
    auto* cmp_arch = app.add_subcommand("compare-arch", "Run both feedback architectures");
    PlanFlags cmp_arch_flags;
    add_plan_flags(cmp_arch, cmp_arch_flags);
    cmp_arch->callback([&]() {
        exit_code = cmd_compare_arch(cmp_arch_flags, cmp_arch->count("--lambda") > 0);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
