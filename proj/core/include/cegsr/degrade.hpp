#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "cegsr/signal.hpp"

namespace cegsr {

/* Decimating resample kernels. Bit-exact conventions (see docs/kernels.md):
 *   nearest: out[i] = in[i*f]                      (phase 0)
 *   area:    out[i] = mean(in[i*f .. i*f + f - 1]) (block mean)
 *   linear:  factor-scaled triangle kernel, support 2f-1 taps centered at i*f
 *   cubic:   factor-scaled Catmull-Rom (a = -0.5), support 4f-1 taps at i*f
 * linear/cubic clamp out-of-range tap indices to the signal edges and divide by
 * the tap-weight sum, so constants are exact fixed points. All four are linear
 * operators. */
enum class DownsampleKind { nearest, linear, cubic, area };

const char* to_string(DownsampleKind kind);
DownsampleKind downsample_kind_from_string(const std::string& name);

struct BaselineWander {
    double amplitude = 0.0;
    double freq_hz = 0.0;
};

struct EmgLike {
    double sigma = 0.0;        // std of the white source, before filtering
    double highpass_hz = 0.0;  // first-order high-pass cutoff
};

/* Additive measurement noise, applied after downsampling. `sigma` is the std
 * of white Gaussian noise (Box-Muller over mt19937_64, so the byte stream is a
 * deterministic function of `seed`). The optional artifact term is added on
 * top: a baseline-wander sinusoid or high-pass-filtered noise mimicking EMG. */
struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::variant<std::monostate, BaselineWander, EmgLike> artifact;

    bool enabled() const;
};

/* Per-channel decimation by integer factor f >= 2. Output keeps the record id,
 * has samples/f samples per channel and rate/f. Errors: factor < 2, length not
 * divisible by factor. */
SignalRecord downsample(const SignalRecord& sr, int factor, DownsampleKind kind);

/* Full degradation operator: downsample, then add noise (noise lives in the
 * low-rate domain). With noise disabled the result is bit-identical to
 * downsample(). */
SignalRecord apply_lr(const SignalRecord& sr, int factor, DownsampleKind kind, const NoiseSpec& noise);

/* The noise term alone, length n, deterministic in spec.seed. `rate_hz` is the
 * sample rate of the signal the noise is added to (used by the artifact
 * models). Exposed for tests. */
std::vector<double> make_noise(const NoiseSpec& spec, int n, double rate_hz);

} // namespace cegsr
