#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cegsr {

/* Multi-channel 1-D signal, 64-bit float samples, channel-major storage:
 * data[c * samples_per_channel + i] is sample i of channel c. Flattening a
 * record therefore concatenates channels in order, which is the vector layout
 * every operator in this library works on. */
struct SignalRecord {
    std::string record_id;
    int channels = 0;
    int samples_per_channel = 0;
    double sampling_rate_hz = 0.0;
    std::vector<double> data;

    int total_samples() const { return channels * samples_per_channel; }

    double& at(int channel, int i) { return data[static_cast<size_t>(channel) * samples_per_channel + i]; }
    double at(int channel, int i) const { return data[static_cast<size_t>(channel) * samples_per_channel + i]; }

    std::span<double> channel(int c) {
        return {data.data() + static_cast<size_t>(c) * samples_per_channel,
                static_cast<size_t>(samples_per_channel)};
    }
    std::span<const double> channel(int c) const {
        return {data.data() + static_cast<size_t>(c) * samples_per_channel,
                static_cast<size_t>(samples_per_channel)};
    }
};

/* Throws cegsr::Error unless channels >= 1, samples_per_channel >= 2,
 * sampling_rate_hz > 0, data.size() == channels * samples_per_channel and all
 * samples are finite. `where` prefixes the error message. */
void validate_record(const SignalRecord& rec, const std::string& where);

/* Builds a record from parts and validates it. */
SignalRecord make_record(std::string record_id, int channels, int samples_per_channel,
                         double sampling_rate_hz, std::vector<double> data);

/* Coupled low-/high-rate sampling layout. `lr_samples`/`sr_samples` are per
 * channel; whole-record dimensions are d = channels*lr_samples and
 * D = channels*sr_samples; the integer upsampling factor is f = D/d >= 2 and
 * the subsampling rate is r = 1/f. */
struct SamplingGeometry {
    int channels = 0;
    int lr_samples = 0;
    int sr_samples = 0;
    int factor = 0;

    int lr_total() const { return channels * lr_samples; }
    int sr_total() const { return channels * sr_samples; }
    double subsampling_rate() const { return 1.0 / factor; }
};

/* Derives the geometry linking an LR and an SR record. Errors: channel-count
 * mismatch, SR length not an integer multiple of LR length, factor < 2. */
SamplingGeometry geometry_from(const SignalRecord& lr, const SignalRecord& sr);

/* Geometry for a given LR record and factor f >= 2. */
SamplingGeometry geometry_for(const SignalRecord& lr, int factor);

/* Geometry from raw dimensions (validated the same way). */
SamplingGeometry make_geometry(int channels, int lr_samples, int factor);

} // namespace cegsr
