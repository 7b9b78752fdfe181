#include "cegsr/loop.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cegsr/errors.hpp"

namespace cegsr {
namespace {

double l2_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

SignalRecord wrap_record(std::vector<double> data, int channels, int samples, double rate,
                         const std::string& record_id) {
    SignalRecord rec;
    rec.channels = channels;
    rec.samples_per_channel = samples;
    rec.sampling_rate_hz = rate;
    rec.record_id = record_id;
    rec.data = std::move(data);
    return rec;
}

} // namespace

const char* to_string(StopReason reason) {
    switch (reason) {
        case StopReason::tol_reached: return "tol_reached";
        case StopReason::max_iters: return "max_iters";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

void validate_config(const LoopConfig& config) {
    if (config.architecture != 1 && config.architecture != 2)
        throw Error("validate_config: architecture must be 1 or 2, got " +
                    std::to_string(config.architecture));
    if (!std::isfinite(config.lambda))
        throw Error("validate_config: lambda must be finite");
    if (!(config.dt > 0) || !std::isfinite(config.dt))
        throw Error("validate_config: dt must be finite and > 0");
    if (config.max_iters < 1)
        throw Error("validate_config: max_iters must be >= 1");
    if (!(config.tol >= 0))
        throw Error("validate_config: tol must be >= 0");
    if (config.noise.sigma < 0)
        throw Error("validate_config: noise sigma must be >= 0");
}

StopDecision should_stop(const ConvergenceTrace& trace, const LoopConfig& config,
                         double err_norm, double rel_err) {
    const int k = static_cast<int>(trace.err_norms.size());
    if (!std::isfinite(err_norm))
        return {true, StopReason::diverged};
    if (rel_err <= config.tol)
        return {true, StopReason::tol_reached};
    const double initial = trace.err_norms.empty() ? err_norm : trace.err_norms.front();
    if (err_norm > 1e6 * initial)
        return {true, StopReason::diverged};
    if (k == config.max_iters)
        return {true, StopReason::max_iters};
    return {false, StopReason::max_iters};
}

SignalRecord open_loop_baseline(const SrOperatorSpec& sr, const SignalRecord& lr_observed) {
    return apply_sr(sr, lr_observed);
}

LoopResult run_closed_loop(const SrOperatorSpec& sr, const SignalRecord& lr_observed,
                           const LoopConfig& config, const SignalRecord* reference,
                           Normalization normalization) {
    validate_config(config);
    validate_record(lr_observed, "run_closed_loop");
    const SamplingGeometry& g = sr.geometry;
    if (lr_observed.channels != g.channels || lr_observed.samples_per_channel != g.lr_samples)
        throw Error("run_closed_loop: observed LR shape " + std::to_string(lr_observed.channels) +
                    "x" + std::to_string(lr_observed.samples_per_channel) +
                    " does not match geometry " + std::to_string(g.channels) + "x" +
                    std::to_string(g.lr_samples));
    if (reference) {
        validate_record(*reference, "run_closed_loop");
        if (reference->channels != g.channels || reference->samples_per_channel != g.sr_samples)
            throw Error("run_closed_loop: reference shape does not match SR geometry");
    }

    const std::vector<double>& s_l0 = lr_observed.data;
    const double denom = l2_norm(s_l0);
    const double sr_rate = lr_observed.sampling_rate_hz * g.factor;

    // In-loop degradation model: downsample, then (optionally) add noise drawn
    // deterministically for iteration k with seed noise.seed + k.
    auto lr_of = [&](const std::vector<double>& sr_flat, int k) {
        SignalRecord rec = downsample(
            wrap_record(sr_flat, g.channels, g.sr_samples, sr_rate, lr_observed.record_id),
            g.factor, config.downsampler);
        if (config.noise.enabled()) {
            NoiseSpec step = config.noise;
            step.seed = config.noise.seed + static_cast<std::uint64_t>(k);
            const std::vector<double> n =
                make_noise(step, static_cast<int>(rec.data.size()), rec.sampling_rate_hz);
            for (size_t i = 0; i < rec.data.size(); ++i) rec.data[i] += n[i];
        }
        return rec.data;
    };

    auto record_metrics = [&](ConvergenceTrace& trace, const std::vector<double>& sr_flat) {
        if (!reference) return;
        const SignalRecord cand =
            wrap_record(sr_flat, g.channels, g.sr_samples, sr_rate, lr_observed.record_id);
        trace.metrics.push_back(compute_metrics(*reference, cand, normalization));
    };

    ConvergenceTrace trace;
    std::vector<double> output_flat;

    if (config.architecture == 1) {
        PiState pi;
        pi.lambda = config.lambda;
        pi.dt = config.dt;
        pi.accumulator = (config.init == PreIntegratorInit::observed_lr)
                             ? s_l0
                             : std::vector<double>(s_l0.size(), 0.0);
        for (int k = 0;; ++k) {
            const std::vector<double> s_s = apply_sr(sr, pi.accumulator);
            const std::vector<double> s_l = lr_of(s_s, k);
            std::vector<double> s_e(s_l0.size());
            for (size_t i = 0; i < s_e.size(); ++i) s_e[i] = s_l0[i] - s_l[i];
            const double err_norm = l2_norm(s_e);
            const double rel = denom > 0 ? err_norm / denom : err_norm;

            const StopDecision decision = should_stop(trace, config, err_norm, rel);
            trace.err_norms.push_back(err_norm);
            trace.rel_errs.push_back(rel);
            record_metrics(trace, s_s);
            if (decision.stop) {
                trace.stop_reason = decision.reason;
                trace.iterations = k;
                output_flat = s_s;
                break;
            }
            pi = pi_step(std::move(pi), s_e);
        }
    } else {
        const std::vector<double> s_s0 = apply_sr(sr, s_l0);
        PiState pi;
        pi.lambda = config.lambda;
        pi.dt = config.dt;
        pi.accumulator = (config.init == PreIntegratorInit::observed_lr)
                             ? s_s0
                             : std::vector<double>(s_s0.size(), 0.0);
        for (int k = 0;; ++k) {
            const std::vector<double> round_trip = apply_sr(sr, lr_of(pi.accumulator, k));
            std::vector<double> s_e(s_s0.size());
            for (size_t i = 0; i < s_e.size(); ++i) s_e[i] = s_s0[i] - round_trip[i];
            const double err_norm = l2_norm(s_e);
            const double rel = denom > 0 ? err_norm / denom : err_norm;

            const StopDecision decision = should_stop(trace, config, err_norm, rel);
            trace.err_norms.push_back(err_norm);
            trace.rel_errs.push_back(rel);
            record_metrics(trace, pi.accumulator);
            if (decision.stop) {
                trace.stop_reason = decision.reason;
                trace.iterations = k;
                output_flat = pi.accumulator;
                break;
            }
            pi = pi_step(std::move(pi), s_e);
        }
    }

    LoopResult result;
    result.output =
        wrap_record(std::move(output_flat), g.channels, g.sr_samples, sr_rate, lr_observed.record_id);
    result.trace = std::move(trace);
    if (reference) {
        result.trace.final_error.resize(reference->data.size());
        for (size_t i = 0; i < reference->data.size(); ++i)
            result.trace.final_error[i] = reference->data[i] - result.output.data[i];
    }
    return result;
}

void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error("write_trace_csv: cannot write " + path.string());
    out << "iter,err_norm,rel_err,psnr,ssim\n";
    char buf[64];
    const bool with_metrics = trace.metrics.size() == trace.err_norms.size();
    for (size_t k = 0; k < trace.err_norms.size(); ++k) {
        out << k;
        std::snprintf(buf, sizeof buf, "%.17g", trace.err_norms[k]);
        out << ',' << buf;
        std::snprintf(buf, sizeof buf, "%.17g", trace.rel_errs[k]);
        out << ',' << buf;
        if (with_metrics) {
            const MetricReport& m = trace.metrics[k];
            if (m.psnr_infinite) {
                out << ",inf";
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", m.psnr_db);
                out << ',' << buf;
            }
            std::snprintf(buf, sizeof buf, "%.17g", m.ssim);
            out << ',' << buf;
        } else {
            out << ",,";
        }
        out << '\n';
    }
}

} // namespace cegsr
