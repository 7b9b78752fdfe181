#pragma once

#include <functional>
#include <vector>

namespace cegsr {

/* Discrete pre-position (PI) unit. The accumulator integrates the gained error
 * by the rectangle rule: s_p <- s_p + lambda * dt * s_e. Only the product
 * lambda * dt enters the update. */
struct PiState {
    std::vector<double> accumulator;
    double lambda = 1.0;
    double dt = 1.0;
};

/* One integration step. Errors: error length != accumulator length, non-finite
 * lambda/dt. Applying a second step with -lambda undoes the first up to FP
 * rounding. */
PiState pi_step(PiState state, const std::vector<double>& error);

/* The loop's round trip LR(SR(.)) as a plain callable on flattened LR vectors. */
using LsMap = std::function<std::vector<double>(const std::vector<double>&)>;

/* Mean entry of the Jacobian of `ls` at `base`: since 1^T J 1 equals the sum of
 * all entries, one finite difference along the all-ones direction suffices:
 *   q1 ~= sum_i( ls(base + eps*1)[i] - ls(base)[i] ) / (d^2 * eps).
 * Exact for affine maps regardless of eps. Identity on R^d gives 1/d.
 * Errors: empty base, eps <= 0, ls output length != d, non-finite result. */
double estimate_q1(const LsMap& ls, const std::vector<double>& base, double epsilon);

/* Same two evaluations, normalized per coordinate instead of per entry:
 *   dc_gain = sum_i( ls(base + eps*1)[i] - ls(base)[i] ) / (d * eps) = d * q1.
 * This is the gain a uniform (slowly varying) error component actually sees in
 * the loop, so 1/(dt * dc_gain) is the gain-matched feedback setting used by
 * the experiment harness. */
double estimate_dc_gain(const LsMap& ls, const std::vector<double>& base, double epsilon);

/* Sufficient stability interval for the feedback gain, derived from requiring
 * |I - Q1*Lambda*dt|_F < 1 under the scalar model Q1 = q1*I, Lambda = lambda*I:
 *   q1 > 0: (lower, upper) = ((1 - 1/sqrt(d)) / (dt*q1), (1 + 1/sqrt(d)) / (dt*q1))
 *   q1 < 0: the two endpoints swap roles (both negative).
 * spectral_upper = 2/(dt*q1) is the non-conservative companion bound from
 * |1 - dt*q1*lambda| < 1; the interval midpoint is 1/(dt*q1) and the width is
 * 2/(sqrt(d)*dt*|q1|), shrinking as 1/sqrt(d). */
struct LambdaBounds {
    double lower = 0.0;
    double upper = 0.0;
    double q1 = 0.0;
    int d = 0;
    double dt = 0.0;
    double spectral_upper = 0.0;

    double midpoint() const { return 0.5 * (lower + upper); }
    double width() const { return upper - lower; }
};

/* Errors: q1 == 0 (no finite interval exists), d < 1, dt <= 0. */
LambdaBounds lambda_bounds(double q1, int d, double dt);

} // namespace cegsr
