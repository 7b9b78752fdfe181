#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cegsr/degrade.hpp"
#include "cegsr/signal.hpp"

namespace cegsr {

/* Affine map from flattened LR vectors (R^d) to flattened SR vectors (R^D):
 * y = W x + b with W row-major D x d. `ridge` and `training_hash` record how
 * the model was fitted (the hash is FNV-1a over the training pair bytes). */
struct LinearSrModel {
    int lr_total = 0;   // d
    int sr_total = 0;   // D
    std::vector<double> weight;  // row-major, sr_total x lr_total
    std::vector<double> bias;    // sr_total
    double ridge = 0.0;
    std::uint64_t training_hash = 0;
};

void validate_model(const LinearSrModel& model, const std::string& where);

/* Plug-in contract for the open-loop super-resolution operator. Every kind
 * maps a C x n LR record to a C x (n*f) SR record:
 *   Replication: each sample repeated f times.
 *   Interp: evaluate the kernel interpolant of each channel at positions j/f
 *           (phase 0, indices clamped at the edges). `nearest` and `area`
 *           both reduce to replication on this grid.
 *   Linear: the affine model above, applied to the flattened record.
 *   External: spawn a user command; see run_external_sr.
 * The geometry pins the expected dimensions; apply_sr rejects inputs that do
 * not match it. */
struct SrOperatorSpec {
    struct Replication {};
    struct Interp {
        DownsampleKind kernel = DownsampleKind::linear;
    };
    struct Linear {
        std::shared_ptr<const LinearSrModel> model;
    };
    struct External {
        std::string command;  // argv template with {input} {output} {factor}
    };

    std::variant<Replication, Interp, Linear, External> kind;
    SamplingGeometry geometry;

    int factor() const { return geometry.factor; }
};

SrOperatorSpec make_replication_sr(const SamplingGeometry& g);
SrOperatorSpec make_interp_sr(const SamplingGeometry& g, DownsampleKind kernel);
SrOperatorSpec make_linear_sr(const SamplingGeometry& g, std::shared_ptr<const LinearSrModel> model);
SrOperatorSpec make_external_sr(const SamplingGeometry& g, std::string command);

/* A short lower-case label for table output: "replication", "interp:linear",
 * "linear", "external". */
std::string sr_kind_label(const SrOperatorSpec& spec);

/* Applies the operator. Record overload checks channels/samples against the
 * geometry; the flattened overload reshapes via the geometry. Output length is
 * factor * input per channel, rate is input rate * factor. */
SignalRecord apply_sr(const SrOperatorSpec& spec, const SignalRecord& lr);
std::vector<double> apply_sr(const SrOperatorSpec& spec, const std::vector<double>& lr_flat);

/* One training pair of flattened vectors (x in R^d, y in R^D). */
struct TrainPair {
    std::vector<double> lr;
    std::vector<double> sr;
};

/* Ridge least squares: minimizes sum_k |W x_k + b - y_k|^2 + ridge * |W|_F^2
 * (bias unpenalized), solved per output coordinate via the normal equations
 * and an LDLT factorization. Errors: no pairs, inconsistent pair dimensions,
 * ridge < 0, singular system when ridge == 0 (needs ridge > 0 or more data). */
LinearSrModel fit_linear_sr(const std::vector<TrainPair>& pairs, double ridge);

/* Model file: one text header line "CEGSR-LIN1 <d> <D> <ridge>\n" followed by
 * D*d little-endian float64 weights (row-major) and D float64 biases. */
void save_linear_sr(const LinearSrModel& model, const std::filesystem::path& path);
LinearSrModel load_linear_sr(const std::filesystem::path& path);

/* Runs an external SR process. `command` is split on whitespace into argv;
 * every token has {input}, {output} and {factor} substituted. The LR record is
 * written as raw-with-sidecar into a fresh temporary directory, the command
 * must exit 0 and write the SR record (raw-with-sidecar) to {output}. The
 * directory is removed on success and kept for inspection on failure.
 * Errors: launch failure, nonzero exit, missing/invalid output, wrong output
 * dimensions, non-finite samples. */
SignalRecord run_external_sr(const std::string& command, const SignalRecord& lr, int factor);

} // namespace cegsr
