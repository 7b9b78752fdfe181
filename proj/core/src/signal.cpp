#include "cegsr/signal.hpp"

#include <cmath>

#include "cegsr/errors.hpp"

namespace cegsr {

void validate_record(const SignalRecord& rec, const std::string& where) {
    if (rec.channels < 1)
        throw Error(where + ": channels must be >= 1, got " + std::to_string(rec.channels));
    if (rec.samples_per_channel < 2)
        throw Error(where + ": samples_per_channel must be >= 2, got " +
                    std::to_string(rec.samples_per_channel));
    if (!(rec.sampling_rate_hz > 0.0))
        throw Error(where + ": sampling_rate_hz must be > 0");
    const size_t expected = static_cast<size_t>(rec.channels) * rec.samples_per_channel;
    if (rec.data.size() != expected)
        throw Error(where + ": data size " + std::to_string(rec.data.size()) +
                    " does not match channels*samples = " + std::to_string(expected));
    for (size_t i = 0; i < rec.data.size(); ++i) {
        if (!std::isfinite(rec.data[i]))
            throw Error(where + ": non-finite sample at flat index " + std::to_string(i));
    }
}

SignalRecord make_record(std::string record_id, int channels, int samples_per_channel,
                         double sampling_rate_hz, std::vector<double> data) {
    SignalRecord rec;
    rec.record_id = std::move(record_id);
    rec.channels = channels;
    rec.samples_per_channel = samples_per_channel;
    rec.sampling_rate_hz = sampling_rate_hz;
    rec.data = std::move(data);
    validate_record(rec, "make_record");
    return rec;
}

SamplingGeometry make_geometry(int channels, int lr_samples, int factor) {
    if (channels < 1)
        throw Error("make_geometry: channels must be >= 1");
    if (lr_samples < 2)
        throw Error("make_geometry: lr_samples must be >= 2");
    if (factor < 2)
        throw Error("make_geometry: factor must be an integer >= 2, got " + std::to_string(factor));
    SamplingGeometry g;
    g.channels = channels;
    g.lr_samples = lr_samples;
    g.sr_samples = lr_samples * factor;
    g.factor = factor;
    return g;
}

SamplingGeometry geometry_from(const SignalRecord& lr, const SignalRecord& sr) {
    if (lr.channels != sr.channels)
        throw Error("geometry_from: channel-count mismatch (" + std::to_string(lr.channels) +
                    " vs " + std::to_string(sr.channels) + ")");
    if (lr.samples_per_channel < 2)
        throw Error("geometry_from: LR record needs >= 2 samples per channel");
    if (sr.samples_per_channel % lr.samples_per_channel != 0)
        throw Error("geometry_from: SR length " + std::to_string(sr.samples_per_channel) +
                    " is not an integer multiple of LR length " +
                    std::to_string(lr.samples_per_channel));
    const int factor = sr.samples_per_channel / lr.samples_per_channel;
    if (factor < 2)
        throw Error("geometry_from: factor must be >= 2, got " + std::to_string(factor));
    return make_geometry(lr.channels, lr.samples_per_channel, factor);
}

SamplingGeometry geometry_for(const SignalRecord& lr, int factor) {
    if (lr.samples_per_channel < 2)
        throw Error("geometry_for: LR record needs >= 2 samples per channel");
    return make_geometry(lr.channels, lr.samples_per_channel, factor);
}

} // namespace cegsr
