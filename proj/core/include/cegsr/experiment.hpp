#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cegsr/loop.hpp"
#include "cegsr/metrics.hpp"
#include "cegsr/signal.hpp"
#include "cegsr/sr_operator.hpp"
#include "cegsr/synth.hpp"

namespace cegsr {

/* ---- dataset -------------------------------------------------------- */

/* `count` records derived from `base`; record r uses seed base.seed + r and id
 * "rec_<r,4 digits>". phase/bpm/amp jitter in `base` decorrelates the records. */
struct SyntheticDataset {
    SynthSpec base;
    int count = 20;
};

/* Loads every *.csv / *.raw record in the directory, sorted by filename. */
struct DirectoryDataset {
    std::filesystem::path path;
};

using DatasetSpec = std::variant<SyntheticDataset, DirectoryDataset>;

/* ---- SR operator selection ------------------------------------------ */

struct SrReplication {};
struct SrInterp { DownsampleKind kernel = DownsampleKind::linear; };
struct SrLinearFit { double ridge = 1e-6; };             // fit on the training split
struct SrLinearFile { std::filesystem::path path; };     // load a saved model
struct SrExternal { std::string command; };

using SrSelection = std::variant<SrReplication, SrInterp, SrLinearFit, SrLinearFile, SrExternal>;

/* ---- plan ------------------------------------------------------------ */

/* End-to-end evaluation plan. Records are treated as ground-truth SR signals;
 * each one is degraded with `factor`/`data_downsampler`/`data_noise` (record r
 * draws noise with seed data_noise.seed + r), the SR operator is built (fitted
 * on the training split when SrLinearFit), and open/closed reconstructions of
 * the TEST split are scored against the originals. `loop.lambda` is used as
 * given unless `auto_lambda` is set, in which case lambda = 1/(dt * dc_gain)
 * with the gain estimated from the loop's own round trip (see control.hpp).
 * The split is a seeded Fisher-Yates shuffle; the first
 * round(train_fraction * n) records train, the rest test. */
struct ExperimentPlan {
    DatasetSpec dataset = SyntheticDataset{};
    double train_fraction = 0.9;
    std::uint64_t split_seed = 1;
    int factor = 5;
    DownsampleKind data_downsampler = DownsampleKind::nearest;
    NoiseSpec data_noise;
    SrSelection sr = SrLinearFit{};
    LoopConfig loop;
    bool auto_lambda = true;
    Normalization normalization = Normalization::ref_minmax_255;
    std::filesystem::path out_dir;  // tables are written here (created if needed)
};

void validate_plan(const ExperimentPlan& plan);

/* ---- results ---------------------------------------------------------- */

/* One table row. `algorithm` is "open"/"closed" (or a comparison label); the
 * delta columns are closed minus open for the same record and are empty on
 * open rows. The aggregate row uses record_id "mean". */
struct ResultRow {
    std::string record_id;
    std::string algorithm;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
    std::optional<double> delta_psnr;
    std::optional<double> delta_ssim;
    int iterations = 0;
    std::string stop_reason;
};

enum class TableFormat { csv, text };

/* Renders rows with the fixed schema record_id,algorithm,psnr_db,ssim,
 * delta_psnr,delta_ssim,iterations,stop_reason. PSNR/SSIM/deltas print with 4
 * decimals ("inf" for flagged rows, empty for absent deltas). text aligns the
 * same cells into padded columns. An empty row list yields just the header. */
std::string render_result_table(const std::vector<ResultRow>& rows, TableFormat format);
void emit_table(const std::vector<ResultRow>& rows, TableFormat format,
                const std::filesystem::path& path);

struct ExperimentResult {
    std::vector<ResultRow> rows;           // per-record open/closed + mean rows
    std::filesystem::path table_path;      // out_dir / "results.csv"
    double lambda_used = 0.0;
    double dc_gain = 0.0;                  // estimated loop gain (0 when lambda fixed)
};

/* Runs the full plan and writes results.csv. Rows are sorted by record_id with
 * open before closed, mean rows last, so reruns are byte-identical. */
ExperimentResult run_experiment(const ExperimentPlan& plan);

/* ---- lambda sweep ----------------------------------------------------- */

struct SweepRow {
    double lambda = 0.0;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
    double delta_psnr = 0.0;   // closed minus open, mean over test records
    double delta_ssim = 0.0;
    bool selected = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;            // in the given lambda order
    double selected_lambda = 0.0;
    bool fallback = false;                 // no lambda had delta_ssim > 0
    std::filesystem::path table_path;      // out_dir / "sweep.csv"
};

/* Evaluates the closed loop at each gain and marks the selection: the best
 * mean PSNR among rows with delta_ssim > 0, falling back to the best mean PSNR
 * overall (flagged) when no row qualifies. Errors: fewer than 2 values or
 * duplicate values. The default grid is {0.1 .. 1.0} plus the gain-matched
 * midpoint 1/(dt * dc_gain). */
SweepResult sweep_lambda(const ExperimentPlan& plan, std::vector<double> lambdas);
std::vector<double> default_lambda_grid(const ExperimentPlan& plan);

/* ---- comparisons ------------------------------------------------------ */

struct DownsamplerRow {
    DownsampleKind kind = DownsampleKind::nearest;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
};

struct CompareDownsamplersResult {
    std::vector<DownsamplerRow> rows;      // ranked: best mean PSNR first
    std::filesystem::path table_path;      // out_dir / "downsamplers.csv"
};

/* Runs the closed loop once per DownsampleKind used as the IN-LOOP degradation
 * model (the dataset LR stays fixed per the plan) and emits mean PSNR/SSIM per
 * kind, ranked by mean PSNR. Ties within 1e-9 dB keep the canonical kind order
 * nearest, linear, cubic, area. */
CompareDownsamplersResult compare_downsamplers(const ExperimentPlan& plan);

struct ArchRow {
    std::string record_id;
    int architecture = 1;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
    int iterations = 0;
    std::string stop_reason;
};

struct CompareArchitecturesResult {
    std::vector<ArchRow> rows;             // arch 1 then arch 2 per record, mean pair last
    std::filesystem::path table_path;      // out_dir / "architectures.csv"
};

/* Runs both feedback architectures on the same records, seeds and operator and
 * emits paired rows (pairing is visible through equal record_ids). */
CompareArchitecturesResult compare_architectures(const ExperimentPlan& plan);

/* ---- building blocks shared with the CLI ------------------------------ */

std::vector<SignalRecord> materialize_dataset(const DatasetSpec& dataset);

struct SplitIndices {
    std::vector<int> train;
    std::vector<int> test;
};

/* Deterministic seeded shuffle split (Fisher-Yates over mt19937_64). */
SplitIndices split_dataset(int count, double train_fraction, std::uint64_t seed);

/* Degrades one ground-truth record per the plan (record_index selects the
 * noise seed offset). */
SignalRecord plan_lr_record(const ExperimentPlan& plan, const SignalRecord& sr_record,
                            int record_index);

/* Builds the plan's SR operator; fits on the given training records when the
 * selection is SrLinearFit. */
SrOperatorSpec build_sr_operator(const ExperimentPlan& plan,
                                 const std::vector<SignalRecord>& train_sr,
                                 const std::vector<SignalRecord>& train_lr,
                                 const SamplingGeometry& geometry);

/* The loop's round trip (in-loop downsample of the SR output) as an LsMap for
 * gain estimation. */
LsMap make_loop_ls_map(const SrOperatorSpec& sr, DownsampleKind loop_downsampler);

/* lambda = 1/(dt * dc_gain) estimated at the zero vector with eps = 1e-3. */
double gain_matched_lambda(const SrOperatorSpec& sr, DownsampleKind loop_downsampler, double dt,
                           double* dc_gain_out = nullptr);

} // namespace cegsr
