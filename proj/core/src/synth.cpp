#include "cegsr/synth.hpp"

#include <cmath>
#include <random>

#include "cegsr/errors.hpp"

namespace cegsr {
namespace {

struct Bump {
    double center;  // fraction of the beat period
    double width;   // fraction of the beat period
    double amp;
};

// Beat morphology: three Gaussian bumps on the wrapped beat phase.
constexpr Bump kBumps[] = {
    {0.18, 0.025, 0.15},  // P wave
    {0.40, 0.020, 1.00},  // QRS complex
    {0.65, 0.060, 0.35},  // T wave
};

double beat_value(double phase) {
    double v = 0.0;
    for (const Bump& b : kBumps) {
        // Evaluate the bump at the nearest wrapped distance so the waveform
        // is periodic and continuous across beat boundaries.
        double d = phase - b.center;
        d -= std::round(d);
        v += b.amp * std::exp(-0.5 * (d / b.width) * (d / b.width));
    }
    return v;
}

} // namespace

SignalRecord synthesize_ecg(const SynthSpec& spec) {
    if (spec.channels < 1)
        throw Error("synthesize_ecg: channels must be >= 1, got " +
                    std::to_string(spec.channels));
    if (spec.samples < 2)
        throw Error("synthesize_ecg: samples must be >= 2, got " + std::to_string(spec.samples));
    if (!(spec.rate_hz > 0))
        throw Error("synthesize_ecg: rate_hz must be > 0");
    if (!(spec.bpm >= 20.0 && spec.bpm <= 300.0))
        throw Error("synthesize_ecg: bpm must be in [20, 300], got " + std::to_string(spec.bpm));

    std::mt19937_64 rng(spec.seed);
    // Draw order is part of the reproducibility contract:
    // 1) phase offset, 2) bpm jitter, 3) per-channel amplitude scales.
    double phase0 = 0.0;
    if (spec.phase_jitter > 0) {
        std::uniform_real_distribution<double> u(0.0, spec.phase_jitter);
        phase0 = u(rng);
    }
    double bpm = spec.bpm;
    if (spec.bpm_jitter > 0) {
        std::uniform_real_distribution<double> u(-spec.bpm_jitter, spec.bpm_jitter);
        bpm += u(rng);
        if (bpm < 20.0) bpm = 20.0;
        if (bpm > 300.0) bpm = 300.0;
    }
    std::vector<double> scale(static_cast<size_t>(spec.channels), 1.0);
    if (spec.amp_jitter > 0) {
        std::uniform_real_distribution<double> u(1.0 - spec.amp_jitter, 1.0 + spec.amp_jitter);
        for (int c = 0; c < spec.channels; ++c) scale[static_cast<size_t>(c)] = u(rng);
    }

    const double beat_hz = bpm / 60.0;
    SignalRecord rec;
    rec.channels = spec.channels;
    rec.samples_per_channel = spec.samples;
    rec.sampling_rate_hz = spec.rate_hz;
    rec.record_id = spec.record_id;
    rec.data.resize(rec.total_samples());
    for (int c = 0; c < spec.channels; ++c) {
        const double s = scale[static_cast<size_t>(c)];
        for (int i = 0; i < spec.samples; ++i) {
            const double t = static_cast<double>(i) / spec.rate_hz;
            double phase = t * beat_hz + phase0;
            phase -= std::floor(phase);
            rec.data[static_cast<size_t>(c) * spec.samples + i] =
                spec.baseline + s * beat_value(phase);
        }
    }
    return rec;
}

SignalRecord synthesize_ecg(int channels, int samples, double rate_hz, double bpm,
                            std::uint64_t seed) {
    SynthSpec spec;
    spec.channels = channels;
    spec.samples = samples;
    spec.rate_hz = rate_hz;
    spec.bpm = bpm;
    spec.seed = seed;
    return synthesize_ecg(spec);
}

} // namespace cegsr
