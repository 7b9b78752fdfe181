#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cegsr/control.hpp"
#include "cegsr/degrade.hpp"
#include "cegsr/metrics.hpp"
#include "cegsr/signal.hpp"
#include "cegsr/sr_operator.hpp"

namespace cegsr {

enum class StopReason { tol_reached, max_iters, diverged };

const char* to_string(StopReason reason);

/* Initial value of the pre-position accumulator. `observed_lr` starts at the
 * observed LR signal so that iteration 0 reproduces the open-loop baseline
 * bit-identically; `zero` starts cold, which exposes the pure error recursion
 * (error shrinks by the factor |1 - lambda*dt*c| per step when the round trip
 * is c times the identity). */
enum class PreIntegratorInit { observed_lr, zero };

/* Closed-loop configuration. Architecture 1 feeds the error back in the LR
 * domain (the accumulator lives in R^d); architecture 2 compares in the SR
 * domain against the one-shot reconstruction (the accumulator lives in R^D).
 * `downsampler`/`noise` define the in-loop degradation model; in-loop noise is
 * deterministic, iteration k draws with seed noise.seed + k. */
struct LoopConfig {
    int architecture = 1;
    double lambda = 1.0;
    double dt = 1.0;
    int max_iters = 50;   // T: number of PI updates allowed
    double tol = 1e-8;    // threshold on |s_e| / |s_l0| (absolute when |s_l0| = 0)
    DownsampleKind downsampler = DownsampleKind::nearest;
    NoiseSpec noise;
    PreIntegratorInit init = PreIntegratorInit::observed_lr;
};

void validate_config(const LoopConfig& config);

/* Per-iteration history. err_norms[k] = |s_e[k]|_2, rel_errs[k] the stopping
 * ratio; both have `iterations + 1` entries (at most max_iters + 1). `metrics`
 * is filled only when a reference record is supplied, as is `final_error`
 * (reference minus output, flattened). */
struct ConvergenceTrace {
    std::vector<double> err_norms;
    std::vector<double> rel_errs;
    std::vector<MetricReport> metrics;
    StopReason stop_reason = StopReason::max_iters;
    int iterations = 0;
    std::vector<double> final_error;
};

struct StopDecision {
    bool stop = false;
    StopReason reason = StopReason::max_iters;
};

/* Stopping rule, checked after each error evaluation k = 0..T:
 *   non-finite error norm -> diverged;
 *   rel_err <= tol -> tol_reached;
 *   err_norm > 1e6 * err_norms[0] -> diverged;
 *   k == max_iters -> max_iters;
 *   otherwise continue. `trace` supplies k (entries so far) and the initial
 * error norm. */
StopDecision should_stop(const ConvergenceTrace& trace, const LoopConfig& config,
                         double err_norm, double rel_err);

/* One-shot reconstruction, s_s = SR(s_l0). Identical to iteration 0 of the
 * closed loop under the observed_lr init. */
SignalRecord open_loop_baseline(const SrOperatorSpec& sr, const SignalRecord& lr_observed);

struct LoopResult {
    SignalRecord output;
    ConvergenceTrace trace;
};

/* Runs the feedback loop until should_stop fires and returns the SR output at
 * the stopping iteration plus the trace.
 *
 * Architecture 1 (iterate k = 0, 1, ...):
 *   s_s[k] = SR(s_p[k]);  s_l[k] = LR(s_s[k]);  s_e[k] = s_l0 - s_l[k];
 *   s_p[k+1] = s_p[k] + lambda*dt*s_e[k];       s_p[0] per config.init.
 * Architecture 2: s_s0 = SR(s_l0) once; accumulator p[0] = s_s0; then
 *   s_e[k] = s_s0 - SR(LR(p[k]));  p[k+1] = p[k] + lambda*dt*s_e[k];
 * and the returned output is p at the stopping iteration.
 *
 * When `reference` is given (the true SR record), per-iteration PSNR/SSIM are
 * recorded in the trace using `normalization`. */
LoopResult run_closed_loop(const SrOperatorSpec& sr, const SignalRecord& lr_observed,
                           const LoopConfig& config, const SignalRecord* reference = nullptr,
                           Normalization normalization = Normalization::ref_minmax_255);

/* CSV with header iter,err_norm,rel_err,psnr,ssim; metric columns are blank
 * when the trace has no reference metrics. */
void write_trace_csv(const ConvergenceTrace& trace, const std::filesystem::path& path);

} // namespace cegsr
