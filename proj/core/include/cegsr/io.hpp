#pragma once

#include <filesystem>

#include "cegsr/signal.hpp"

namespace cegsr {

enum class FileFormat {
    csv,  // text, one row per time sample, one column per channel, optional header
    raw,  // little-endian float32, channel-major, sidecar carries the dimensions
    auto_detect,
};

/* Loads a record from disk. CSV: optional header row of channel names, then
 * numeric rows; metadata (rate_hz, record_id) comes from an optional
 * "<file>.meta" sidecar, defaulting to 1 Hz and the file stem. Raw: packed
 * float32 samples plus a mandatory sidecar with channels/samples/rate_hz.
 * auto_detect picks by extension (".csv" vs anything else = raw).
 * Errors: file missing, malformed header, ragged rows, malformed value,
 * non-finite sample, sidecar missing/malformed, size mismatch. */
SignalRecord load_record(const std::filesystem::path& path, FileFormat format = FileFormat::auto_detect);

/* Writes a record. CSV uses 17 significant digits so doubles round-trip
 * exactly; raw stores float32, so a round-trip reproduces float(x). Both
 * formats also write the "<file>.meta" sidecar. */
void save_record(const SignalRecord& rec, const std::filesystem::path& path,
                 FileFormat format = FileFormat::auto_detect);

} // namespace cegsr
