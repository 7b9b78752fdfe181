#include "cegsr/degrade.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cegsr/errors.hpp"
#include "detail/kernels.hpp"

namespace cegsr {
namespace {

using detail::clamp_index;
using detail::cubic_weight;

void downsample_channel(const double* in, int n, double* out, int m, int factor,
                        DownsampleKind kind) {
    switch (kind) {
        case DownsampleKind::nearest:
            // Phase-0 decimation: keep the first sample of each block.
            for (int i = 0; i < m; ++i) out[i] = in[i * factor];
            return;
        case DownsampleKind::area:
            // Block mean over the factor-wide window starting at i*factor.
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (int j = 0; j < factor; ++j) acc += in[i * factor + j];
                out[i] = acc / factor;
            }
            return;
        case DownsampleKind::linear: {
            // Anti-aliased triangle kernel scaled by the factor:
            // w(x) = max(0, 1 - |x|/f), support 2f-1 taps centered at i*f.
            for (int i = 0; i < m; ++i) {
                const int center = i * factor;
                double acc = 0.0, wsum = 0.0;
                for (int j = -(factor - 1); j <= factor - 1; ++j) {
                    const double w = 1.0 - std::fabs(static_cast<double>(j)) / factor;
                    acc += w * in[clamp_index(center + j, n)];
                    wsum += w;
                }
                out[i] = acc / wsum;
            }
            return;
        }
        case DownsampleKind::cubic: {
            // Catmull-Rom kernel scaled by the factor: w(j/f), support 4f-1
            // taps centered at i*f, normalized by the realized tap-weight sum.
            for (int i = 0; i < m; ++i) {
                const int center = i * factor;
                double acc = 0.0, wsum = 0.0;
                for (int j = -(2 * factor - 1); j <= 2 * factor - 1; ++j) {
                    const double w = cubic_weight(static_cast<double>(j) / factor);
                    acc += w * in[clamp_index(center + j, n)];
                    wsum += w;
                }
                out[i] = acc / wsum;
            }
            return;
        }
    }
    throw Error("downsample: unknown kernel kind");
}

} // namespace

const char* to_string(DownsampleKind kind) {
    switch (kind) {
        case DownsampleKind::nearest: return "nearest";
        case DownsampleKind::linear: return "linear";
        case DownsampleKind::cubic: return "cubic";
        case DownsampleKind::area: return "area";
    }
    return "unknown";
}

DownsampleKind downsample_kind_from_string(const std::string& name) {
    if (name == "nearest") return DownsampleKind::nearest;
    if (name == "linear") return DownsampleKind::linear;
    if (name == "cubic") return DownsampleKind::cubic;
    if (name == "area") return DownsampleKind::area;
    throw Error("downsample: unknown kernel '" + name +
                "' (expected nearest, linear, cubic, or area)");
}

SignalRecord downsample(const SignalRecord& sr, int factor, DownsampleKind kind) {
    validate_record(sr, "downsample");
    if (factor < 2)
        throw Error("downsample: factor must be >= 2, got " + std::to_string(factor));
    if (sr.samples_per_channel % factor != 0)
        throw Error("downsample: samples_per_channel " +
                    std::to_string(sr.samples_per_channel) + " not divisible by factor " +
                    std::to_string(factor));

    SignalRecord lr;
    lr.channels = sr.channels;
    lr.samples_per_channel = sr.samples_per_channel / factor;
    lr.sampling_rate_hz = sr.sampling_rate_hz / factor;
    lr.record_id = sr.record_id;
    lr.data.resize(lr.total_samples());
    for (int c = 0; c < sr.channels; ++c)
        downsample_channel(sr.data.data() + static_cast<size_t>(c) * sr.samples_per_channel,
                           sr.samples_per_channel,
                           lr.data.data() + static_cast<size_t>(c) * lr.samples_per_channel,
                           lr.samples_per_channel, factor, kind);
    return lr;
}

bool NoiseSpec::enabled() const {
    return sigma > 0 || !std::holds_alternative<std::monostate>(artifact);
}

std::vector<double> make_noise(const NoiseSpec& spec, int n, double rate_hz) {
    if (n < 0)
        throw Error("make_noise: n must be >= 0");
    if (spec.sigma < 0)
        throw Error("make_noise: sigma must be >= 0");
    const size_t count = static_cast<size_t>(n);
    std::vector<double> noise(count, 0.0);
    if (!spec.enabled()) return noise;

    std::mt19937_64 rng(spec.seed);
    if (spec.sigma > 0) {
        // Box-Muller on explicit uniform draws keeps the byte stream
        // deterministic across standard library implementations.
        std::uniform_real_distribution<double> u(0.0, 1.0);
        size_t i = 0;
        while (i < count) {
            double u1 = u(rng);
            double u2 = u(rng);
            if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
            const double r = std::sqrt(-2.0 * std::log(u1));
            const double th = 2.0 * M_PI * u2;
            noise[i++] += spec.sigma * r * std::cos(th);
            if (i < count) noise[i++] += spec.sigma * r * std::sin(th);
        }
    }

    if (std::holds_alternative<BaselineWander>(spec.artifact)) {
        const auto& bw = std::get<BaselineWander>(spec.artifact);
        std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
        const double phase = u(rng);
        for (size_t i = 0; i < count; ++i) {
            const double t = static_cast<double>(i) / rate_hz;
            noise[i] += bw.amplitude * std::sin(2.0 * M_PI * bw.freq_hz * t + phase);
        }
    } else if (std::holds_alternative<EmgLike>(spec.artifact)) {
        const auto& emg = std::get<EmgLike>(spec.artifact);
        // White Gaussian passed through a one-pole high-pass filter.
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double rc = 1.0 / (2.0 * M_PI * emg.highpass_hz);
        const double dt = 1.0 / rate_hz;
        const double alpha = rc / (rc + dt);
        double prev_x = 0.0, prev_y = 0.0;
        size_t i = 0;
        double spare = 0.0;
        bool has_spare = false;
        while (i < count) {
            double g;
            if (has_spare) {
                g = spare;
                has_spare = false;
            } else {
                double u1 = u(rng);
                double u2 = u(rng);
                if (u1 <= 0.0) u1 = std::numeric_limits<double>::min();
                const double r = std::sqrt(-2.0 * std::log(u1));
                const double th = 2.0 * M_PI * u2;
                g = r * std::cos(th);
                spare = r * std::sin(th);
                has_spare = true;
            }
            const double x = emg.sigma * g;
            const double y = alpha * (prev_y + x - prev_x);
            prev_x = x;
            prev_y = y;
            noise[i++] += y;
        }
    }
    return noise;
}

SignalRecord apply_lr(const SignalRecord& sr, int factor, DownsampleKind kind,
                      const NoiseSpec& noise) {
    SignalRecord lr = downsample(sr, factor, kind);
    if (noise.enabled()) {
        const std::vector<double> n =
            make_noise(noise, static_cast<int>(lr.data.size()), lr.sampling_rate_hz);
        for (size_t i = 0; i < lr.data.size(); ++i) lr.data[i] += n[i];
    }
    return lr;
}

} // namespace cegsr
