#include "cegsr/control.hpp"

#include <cmath>
#include <string>

#include "cegsr/errors.hpp"

namespace cegsr {

PiState pi_step(PiState state, const std::vector<double>& error) {
    if (error.size() != state.accumulator.size())
        throw Error("pi_step: error length " + std::to_string(error.size()) +
                    " does not match accumulator length " +
                    std::to_string(state.accumulator.size()));
    if (!std::isfinite(state.lambda) || !std::isfinite(state.dt))
        throw Error("pi_step: non-finite lambda or dt");
    const double gain = state.lambda * state.dt;
    for (size_t i = 0; i < error.size(); ++i) state.accumulator[i] += gain * error[i];
    return state;
}

namespace {

double directional_entry_sum(const LsMap& ls, const std::vector<double>& base, double epsilon,
                             const char* where) {
    if (base.empty())
        throw Error(std::string(where) + ": empty base vector");
    if (!(epsilon > 0))
        throw Error(std::string(where) + ": epsilon must be > 0");
    const size_t d = base.size();
    std::vector<double> shifted(base);
    for (double& v : shifted) v += epsilon;
    const std::vector<double> y0 = ls(base);
    const std::vector<double> y1 = ls(shifted);
    if (y0.size() != d || y1.size() != d)
        throw Error(std::string(where) + ": map output length does not match input length " +
                    std::to_string(d));
    double sum = 0.0;
    for (size_t i = 0; i < d; ++i) sum += (y1[i] - y0[i]) / epsilon;
    if (!std::isfinite(sum))
        throw Error(std::string(where) + ": non-finite estimate");
    return sum;
}

} // namespace

double estimate_q1(const LsMap& ls, const std::vector<double>& base, double epsilon) {
    const double sum = directional_entry_sum(ls, base, epsilon, "estimate_q1");
    const double d = static_cast<double>(base.size());
    return sum / (d * d);
}

double estimate_dc_gain(const LsMap& ls, const std::vector<double>& base, double epsilon) {
    const double sum = directional_entry_sum(ls, base, epsilon, "estimate_dc_gain");
    return sum / static_cast<double>(base.size());
}

LambdaBounds lambda_bounds(double q1, int d, double dt) {
    if (q1 == 0.0 || !std::isfinite(q1))
        throw Error("lambda_bounds: q1 must be finite and nonzero");
    if (d < 1)
        throw Error("lambda_bounds: d must be >= 1");
    if (!(dt > 0))
        throw Error("lambda_bounds: dt must be > 0");

    LambdaBounds b;
    b.q1 = q1;
    b.d = d;
    b.dt = dt;
    const double root = 1.0 / std::sqrt(static_cast<double>(d));
    const double a = (1.0 - root) / (dt * q1);
    const double c = (1.0 + root) / (dt * q1);
    // For q1 < 0 both endpoints are negative and swap order.
    b.lower = std::min(a, c);
    b.upper = std::max(a, c);
    b.spectral_upper = 2.0 / (dt * q1);
    return b;
}

} // namespace cegsr
