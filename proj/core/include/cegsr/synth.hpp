#pragma once

#include <cstdint>

#include "cegsr/signal.hpp"

namespace cegsr {

/* Synthetic ECG: per beat, three Gaussian bumps on the wrapped beat phase at
 * fixed relative (center, width, amplitude):
 *   P (0.18, 0.025, 0.15), QRS (0.40, 0.020, 1.00), T (0.65, 0.060, 0.35).
 * Each channel is the bump train times a per-channel amplitude scale drawn
 * deterministically from `seed` (uniform in [1 - amp_jitter/2, 1 + amp_jitter/2]),
 * plus a constant `baseline` offset. Optional per-record variation for dataset
 * generation: `phase_jitter` shifts the beat train by up to that fraction of a
 * period, `bpm_jitter` scales the rate by (1 ± bpm_jitter). Draw order from the
 * seeded generator: phase, bpm factor, then channel scales, so outputs are a
 * pure function of the spec. */
struct SynthSpec {
    int channels = 1;
    int samples = 2500;       // per channel
    double rate_hz = 500.0;
    double bpm = 60.0;
    double baseline = 0.0;
    double amp_jitter = 0.5;
    double phase_jitter = 0.0;  // in [0, 1), fraction of one beat period
    double bpm_jitter = 0.0;    // in [0, 1)
    std::uint64_t seed = 0;
    std::string record_id = "synth";
};

SignalRecord synthesize_ecg(const SynthSpec& spec);

/* Strictly periodic variant (no phase/bpm jitter): the autocorrelation of any
 * channel peaks at lag = rate_hz * 60 / bpm samples. Errors: channels < 1,
 * samples < 2, rate <= 0, bpm outside [20, 300]. */
SignalRecord synthesize_ecg(int channels, int samples, double rate_hz, double bpm, std::uint64_t seed);

} // namespace cegsr
