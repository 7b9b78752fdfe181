#include "cegsr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "cegsr/errors.hpp"
#include "cegsr/io.hpp"

namespace cegsr {
namespace {

/* Numerically exact for runs of identical values: k copies of x aggregate to
 * exactly x, which keeps repeated-record aggregates bitwise reproducible. */
struct RunningMean {
    double mean = 0.0;
    size_t count = 0;
    void add(double x) {
        ++count;
        mean += (x - mean) / static_cast<double>(count);
    }
};

struct MeanPsnrSsim {
    RunningMean psnr;   // finite rows only
    RunningMean ssim;
    size_t rows = 0;

    void add(double psnr_db, bool psnr_infinite, double ssim_value) {
        ++rows;
        if (!psnr_infinite) psnr.add(psnr_db);
        ssim.add(ssim_value);
    }
    bool psnr_infinite() const { return rows > 0 && psnr.count == 0; }
    double psnr_mean() const {
        return psnr_infinite() ? std::numeric_limits<double>::infinity() : psnr.mean;
    }
};

std::string format_metric(double value, bool infinite) {
    if (infinite || std::isinf(value)) return value < 0 ? "-inf" : "inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

std::string format_lambda(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_text_file(const std::string& content, const std::filesystem::path& path,
                     const char* where) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw Error(std::string(where) + ": cannot write " + path.string());
    out << content;
}

/* Everything the plan runners share: materialized records, the split, the
 * pinned geometry and the (possibly fitted) SR operator. */
struct PreparedExperiment {
    std::vector<SignalRecord> records;
    SplitIndices split;
    SamplingGeometry geometry;
    SrOperatorSpec sr;
};

PreparedExperiment prepare(const ExperimentPlan& plan) {
    validate_plan(plan);
    PreparedExperiment prep;
    prep.records = materialize_dataset(plan.dataset);
    const SignalRecord& first = prep.records.front();
    for (const SignalRecord& r : prep.records)
        if (r.channels != first.channels || r.samples_per_channel != first.samples_per_channel)
            throw Error("run_experiment: records disagree on shape (" + r.record_id + " is " +
                        std::to_string(r.channels) + "x" + std::to_string(r.samples_per_channel) +
                        ", " + first.record_id + " is " + std::to_string(first.channels) + "x" +
                        std::to_string(first.samples_per_channel) + ")");
    if (first.samples_per_channel % plan.factor != 0)
        throw Error("run_experiment: samples_per_channel " +
                    std::to_string(first.samples_per_channel) + " not divisible by factor " +
                    std::to_string(plan.factor));
    prep.geometry = make_geometry(first.channels, first.samples_per_channel / plan.factor,
                                  plan.factor);
    prep.split = split_dataset(static_cast<int>(prep.records.size()), plan.train_fraction,
                               plan.split_seed);
    if (prep.split.test.empty())
        throw Error("run_experiment: no test records (train_fraction too high for " +
                    std::to_string(prep.records.size()) + " records)");

    std::vector<SignalRecord> train_sr, train_lr;
    if (std::holds_alternative<SrLinearFit>(plan.sr)) {
        if (prep.split.train.empty())
            throw Error("run_experiment: linear fit requested but the training split is empty");
        train_sr.reserve(prep.split.train.size());
        train_lr.reserve(prep.split.train.size());
        for (int idx : prep.split.train) {
            train_sr.push_back(prep.records[static_cast<size_t>(idx)]);
            train_lr.push_back(plan_lr_record(plan, prep.records[static_cast<size_t>(idx)], idx));
        }
    }
    prep.sr = build_sr_operator(plan, train_sr, train_lr, prep.geometry);
    return prep;
}

double resolve_lambda(const ExperimentPlan& plan, const SrOperatorSpec& sr,
                      DownsampleKind loop_downsampler, double* dc_gain_out) {
    if (dc_gain_out) *dc_gain_out = 0.0;
    if (!plan.auto_lambda) return plan.loop.lambda;
    return gain_matched_lambda(sr, loop_downsampler, plan.loop.dt, dc_gain_out);
}

struct ScoredRecord {
    MetricReport open;
    MetricReport closed;
    int iterations = 0;
    StopReason stop_reason = StopReason::max_iters;
};

ScoredRecord score_record(const ExperimentPlan& plan, const PreparedExperiment& prep,
                          int record_index, const LoopConfig& config) {
    const SignalRecord& truth = prep.records[static_cast<size_t>(record_index)];
    const SignalRecord lr = plan_lr_record(plan, truth, record_index);
    ScoredRecord out;
    out.open = compute_metrics(truth, open_loop_baseline(prep.sr, lr), plan.normalization);
    const LoopResult closed = run_closed_loop(prep.sr, lr, config, &truth, plan.normalization);
    out.closed = compute_metrics(truth, closed.output, plan.normalization);
    out.iterations = closed.trace.iterations;
    out.stop_reason = closed.trace.stop_reason;
    return out;
}

} // namespace

void validate_plan(const ExperimentPlan& plan) {
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0))
        throw Error("validate_plan: train_fraction must be in (0, 1)");
    if (plan.factor < 2)
        throw Error("validate_plan: factor must be >= 2, got " + std::to_string(plan.factor));
    if (plan.data_noise.sigma < 0)
        throw Error("validate_plan: data noise sigma must be >= 0");
    validate_config(plan.loop);
    if (const auto* synth = std::get_if<SyntheticDataset>(&plan.dataset)) {
        if (synth->count < 1)
            throw Error("validate_plan: synthetic dataset count must be >= 1");
    } else {
        const auto& dir = std::get<DirectoryDataset>(plan.dataset);
        if (dir.path.empty())
            throw Error("validate_plan: dataset directory path is empty");
    }
    if (const auto* file = std::get_if<SrLinearFile>(&plan.sr)) {
        if (file->path.empty())
            throw Error("validate_plan: linear model path is empty");
    } else if (const auto* ext = std::get_if<SrExternal>(&plan.sr)) {
        if (ext->command.empty())
            throw Error("validate_plan: external command is empty");
    } else if (const auto* fit = std::get_if<SrLinearFit>(&plan.sr)) {
        if (fit->ridge < 0)
            throw Error("validate_plan: ridge must be >= 0");
    }
}

std::vector<SignalRecord> materialize_dataset(const DatasetSpec& dataset) {
    std::vector<SignalRecord> records;
    if (const auto* synth = std::get_if<SyntheticDataset>(&dataset)) {
        records.reserve(static_cast<size_t>(synth->count));
        for (int r = 0; r < synth->count; ++r) {
            SynthSpec spec = synth->base;
            spec.seed = synth->base.seed + static_cast<std::uint64_t>(r);
            char id[32];
            std::snprintf(id, sizeof id, "rec_%04d", r);
            spec.record_id = id;
            records.push_back(synthesize_ecg(spec));
        }
        return records;
    }
    const auto& dir = std::get<DirectoryDataset>(dataset);
    if (!std::filesystem::is_directory(dir.path))
        throw Error("materialize_dataset: directory missing: " + dir.path.string());
    std::vector<std::filesystem::path> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext == ".csv" || ext == ".raw") paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    if (paths.empty())
        throw Error("materialize_dataset: no records in directory " + dir.path.string());
    records.reserve(paths.size());
    for (const auto& p : paths) records.push_back(load_record(p));
    return records;
}

SplitIndices split_dataset(int count, double train_fraction, std::uint64_t seed) {
    if (count < 1)
        throw Error("split_dataset: count must be >= 1");
    if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
        throw Error("split_dataset: train_fraction must be in [0, 1]");
    std::vector<int> order(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    // Explicit Fisher-Yates with modulo reduction keeps the permutation stable
    // across standard library implementations.
    for (int i = count - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    const int n_train =
        static_cast<int>(std::lround(train_fraction * static_cast<double>(count)));
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.test.assign(order.begin() + n_train, order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

SignalRecord plan_lr_record(const ExperimentPlan& plan, const SignalRecord& sr_record,
                            int record_index) {
    NoiseSpec noise = plan.data_noise;
    noise.seed = plan.data_noise.seed + static_cast<std::uint64_t>(record_index);
    return apply_lr(sr_record, plan.factor, plan.data_downsampler, noise);
}

SrOperatorSpec build_sr_operator(const ExperimentPlan& plan,
                                 const std::vector<SignalRecord>& train_sr,
                                 const std::vector<SignalRecord>& train_lr,
                                 const SamplingGeometry& geometry) {
    if (std::holds_alternative<SrReplication>(plan.sr))
        return make_replication_sr(geometry);
    if (const auto* interp = std::get_if<SrInterp>(&plan.sr))
        return make_interp_sr(geometry, interp->kernel);
    if (const auto* fit = std::get_if<SrLinearFit>(&plan.sr)) {
        if (train_sr.size() != train_lr.size())
            throw Error("build_sr_operator: training SR/LR lists differ in length");
        if (train_sr.empty())
            throw Error("build_sr_operator: linear fit requested with no training records");
        std::vector<TrainPair> pairs;
        pairs.reserve(train_sr.size());
        for (size_t i = 0; i < train_sr.size(); ++i)
            pairs.push_back({train_lr[i].data, train_sr[i].data});
        auto model = std::make_shared<LinearSrModel>(fit_linear_sr(pairs, fit->ridge));
        return make_linear_sr(geometry, std::move(model));
    }
    if (const auto* file = std::get_if<SrLinearFile>(&plan.sr)) {
        auto model = std::make_shared<LinearSrModel>(load_linear_sr(file->path));
        return make_linear_sr(geometry, std::move(model));
    }
    return make_external_sr(geometry, std::get<SrExternal>(plan.sr).command);
}

LsMap make_loop_ls_map(const SrOperatorSpec& sr, DownsampleKind loop_downsampler) {
    const SamplingGeometry g = sr.geometry;
    return [sr, loop_downsampler, g](const std::vector<double>& x) {
        SignalRecord rec;
        rec.channels = g.channels;
        rec.samples_per_channel = g.sr_samples;
        rec.sampling_rate_hz = static_cast<double>(g.factor);
        rec.record_id = "ls_probe";
        rec.data = apply_sr(sr, x);
        return downsample(rec, g.factor, loop_downsampler).data;
    };
}

double gain_matched_lambda(const SrOperatorSpec& sr, DownsampleKind loop_downsampler, double dt,
                           double* dc_gain_out) {
    if (!(dt > 0))
        throw Error("gain_matched_lambda: dt must be > 0");
    const std::vector<double> base(static_cast<size_t>(sr.geometry.lr_total()), 0.0);
    const double gain = estimate_dc_gain(make_loop_ls_map(sr, loop_downsampler), base, 1e-3);
    if (dc_gain_out) *dc_gain_out = gain;
    if (gain == 0.0 || !std::isfinite(gain))
        throw Error("gain_matched_lambda: estimated loop gain is zero or non-finite");
    return 1.0 / (dt * gain);
}

std::string render_result_table(const std::vector<ResultRow>& rows, TableFormat format) {
    const std::vector<std::string> header = {"record_id", "algorithm", "psnr_db",  "ssim",
                                             "delta_psnr", "delta_ssim", "iterations",
                                             "stop_reason"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const ResultRow& r : rows) {
        std::vector<std::string> row;
        row.push_back(r.record_id);
        row.push_back(r.algorithm);
        row.push_back(format_metric(r.psnr_db, r.psnr_infinite));
        row.push_back(format_metric(r.ssim, false));
        row.push_back(r.delta_psnr ? format_metric(*r.delta_psnr, false) : "");
        row.push_back(r.delta_ssim ? format_metric(*r.delta_ssim, false) : "");
        row.push_back(std::to_string(r.iterations));
        row.push_back(r.stop_reason);
        cells.push_back(std::move(row));
    }

    std::ostringstream out;
    if (format == TableFormat::csv) {
        for (const auto& row : cells) {
            for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
            out << '\n';
        }
        return out.str();
    }
    std::vector<size_t> width(header.size(), 0);
    for (const auto& row : cells)
        for (size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    for (const auto& row : cells) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << "  ";
            out << row[i];
            if (i + 1 < row.size()) out << std::string(width[i] - row[i].size(), ' ');
        }
        out << '\n';
    }
    return out.str();
}

void emit_table(const std::vector<ResultRow>& rows, TableFormat format,
                const std::filesystem::path& path) {
    write_text_file(render_result_table(rows, format), path, "emit_table");
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    const PreparedExperiment prep = prepare(plan);
    ExperimentResult result;
    LoopConfig config = plan.loop;
    config.lambda = resolve_lambda(plan, prep.sr, plan.loop.downsampler, &result.dc_gain);
    result.lambda_used = config.lambda;

    std::vector<ResultRow> rows;
    MeanPsnrSsim open_mean, closed_mean;
    RunningMean delta_psnr_mean, delta_ssim_mean;
    for (int idx : prep.split.test) {
        const std::string& id = prep.records[static_cast<size_t>(idx)].record_id;
        ScoredRecord scored;
        try {
            scored = score_record(plan, prep, idx, config);
        } catch (const Error&) {
            // Operator failure on one record: flag the pair of rows and keep
            // going; flagged rows stay out of the aggregates.
            for (const char* algorithm : {"open", "closed"}) {
                ResultRow row;
                row.record_id = id;
                row.algorithm = algorithm;
                row.stop_reason = "error";
                rows.push_back(std::move(row));
            }
            continue;
        }

        ResultRow open_row;
        open_row.record_id = id;
        open_row.algorithm = "open";
        open_row.psnr_db = scored.open.psnr_db;
        open_row.psnr_infinite = scored.open.psnr_infinite;
        open_row.ssim = scored.open.ssim;

        ResultRow closed_row;
        closed_row.record_id = id;
        closed_row.algorithm = "closed";
        closed_row.psnr_db = scored.closed.psnr_db;
        closed_row.psnr_infinite = scored.closed.psnr_infinite;
        closed_row.ssim = scored.closed.ssim;
        closed_row.iterations = scored.iterations;
        closed_row.stop_reason = to_string(scored.stop_reason);
        if (!scored.open.psnr_infinite && !scored.closed.psnr_infinite) {
            closed_row.delta_psnr = scored.closed.psnr_db - scored.open.psnr_db;
            delta_psnr_mean.add(*closed_row.delta_psnr);
        }
        closed_row.delta_ssim = scored.closed.ssim - scored.open.ssim;
        delta_ssim_mean.add(*closed_row.delta_ssim);

        open_mean.add(scored.open.psnr_db, scored.open.psnr_infinite, scored.open.ssim);
        closed_mean.add(scored.closed.psnr_db, scored.closed.psnr_infinite, scored.closed.ssim);
        rows.push_back(std::move(open_row));
        rows.push_back(std::move(closed_row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.record_id != b.record_id) return a.record_id < b.record_id;
        return a.algorithm == "open" && b.algorithm != "open";
    });

    ResultRow mean_open;
    mean_open.record_id = "mean";
    mean_open.algorithm = "open";
    mean_open.psnr_db = open_mean.psnr_mean();
    mean_open.psnr_infinite = open_mean.psnr_infinite();
    mean_open.ssim = open_mean.ssim.mean;
    rows.push_back(std::move(mean_open));

    ResultRow mean_closed;
    mean_closed.record_id = "mean";
    mean_closed.algorithm = "closed";
    mean_closed.psnr_db = closed_mean.psnr_mean();
    mean_closed.psnr_infinite = closed_mean.psnr_infinite();
    mean_closed.ssim = closed_mean.ssim.mean;
    if (delta_psnr_mean.count > 0) mean_closed.delta_psnr = delta_psnr_mean.mean;
    if (delta_ssim_mean.count > 0) mean_closed.delta_ssim = delta_ssim_mean.mean;
    rows.push_back(std::move(mean_closed));

    result.rows = std::move(rows);
    if (!plan.out_dir.empty()) {
        result.table_path = plan.out_dir / "results.csv";
        emit_table(result.rows, TableFormat::csv, result.table_path);
    }
    return result;
}

std::vector<double> default_lambda_grid(const ExperimentPlan& plan) {
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(static_cast<double>(i) / 10.0);
    const PreparedExperiment prep = prepare(plan);
    const double midpoint = gain_matched_lambda(prep.sr, plan.loop.downsampler, plan.loop.dt);
    if (std::find(grid.begin(), grid.end(), midpoint) == grid.end()) grid.push_back(midpoint);
    return grid;
}

SweepResult sweep_lambda(const ExperimentPlan& plan, std::vector<double> lambdas) {
    if (lambdas.size() < 2)
        throw Error("sweep_lambda: need at least 2 lambda values, got " +
                    std::to_string(lambdas.size()));
    for (size_t i = 0; i < lambdas.size(); ++i) {
        if (!std::isfinite(lambdas[i]))
            throw Error("sweep_lambda: lambda values must be finite");
        for (size_t j = i + 1; j < lambdas.size(); ++j)
            if (lambdas[i] == lambdas[j])
                throw Error("sweep_lambda: duplicate lambda value " + format_lambda(lambdas[i]));
    }

    const PreparedExperiment prep = prepare(plan);
    MeanPsnrSsim open_mean;
    for (int idx : prep.split.test) {
        const SignalRecord& truth = prep.records[static_cast<size_t>(idx)];
        try {
            const MetricReport open = compute_metrics(
                truth, open_loop_baseline(prep.sr, plan_lr_record(plan, truth, idx)),
                plan.normalization);
            open_mean.add(open.psnr_db, open.psnr_infinite, open.ssim);
        } catch (const Error&) {
            // failed records stay out of the aggregates
        }
    }

    auto diff = [](double closed, double open) {
        if (std::isinf(closed) && std::isinf(open)) return 0.0;
        return closed - open;
    };

    SweepResult result;
    for (double lambda : lambdas) {
        LoopConfig config = plan.loop;
        config.lambda = lambda;
        MeanPsnrSsim closed_mean;
        for (int idx : prep.split.test) {
            try {
                const ScoredRecord scored = score_record(plan, prep, idx, config);
                closed_mean.add(scored.closed.psnr_db, scored.closed.psnr_infinite,
                                scored.closed.ssim);
            } catch (const Error&) {
            }
        }
        SweepRow row;
        row.lambda = lambda;
        row.psnr_db = closed_mean.psnr_mean();
        row.psnr_infinite = closed_mean.psnr_infinite();
        row.ssim = closed_mean.ssim.mean;
        row.delta_psnr = diff(closed_mean.psnr_mean(), open_mean.psnr_mean());
        row.delta_ssim = closed_mean.ssim.mean - open_mean.ssim.mean;
        result.rows.push_back(row);
    }

    auto better = [](const SweepRow& a, const SweepRow& b) {
        if (std::isinf(a.psnr_db) != std::isinf(b.psnr_db)) return std::isinf(a.psnr_db);
        return a.psnr_db > b.psnr_db;
    };
    int best = -1;
    for (size_t i = 0; i < result.rows.size(); ++i) {
        if (result.rows[i].delta_ssim <= 0.0) continue;
        if (best < 0 || better(result.rows[i], result.rows[static_cast<size_t>(best)]))
            best = static_cast<int>(i);
    }
    if (best < 0) {
        result.fallback = true;
        for (size_t i = 0; i < result.rows.size(); ++i)
            if (best < 0 || better(result.rows[i], result.rows[static_cast<size_t>(best)]))
                best = static_cast<int>(i);
    }
    result.rows[static_cast<size_t>(best)].selected = true;
    result.selected_lambda = result.rows[static_cast<size_t>(best)].lambda;

    if (!plan.out_dir.empty()) {
        std::ostringstream out;
        out << "lambda,psnr_db,ssim,delta_psnr,delta_ssim,selected\n";
        for (const SweepRow& row : result.rows) {
            out << format_lambda(row.lambda) << ',' << format_metric(row.psnr_db, row.psnr_infinite)
                << ',' << format_metric(row.ssim, false) << ','
                << format_metric(row.delta_psnr, false) << ','
                << format_metric(row.delta_ssim, false) << ',' << (row.selected ? 1 : 0) << '\n';
        }
        result.table_path = plan.out_dir / "sweep.csv";
        write_text_file(out.str(), result.table_path, "sweep_lambda");
    }
    return result;
}

CompareDownsamplersResult compare_downsamplers(const ExperimentPlan& plan) {
    const PreparedExperiment prep = prepare(plan);
    const DownsampleKind kinds[] = {DownsampleKind::nearest, DownsampleKind::linear,
                                    DownsampleKind::cubic, DownsampleKind::area};
    CompareDownsamplersResult result;
    for (DownsampleKind kind : kinds) {
        LoopConfig config = plan.loop;
        config.downsampler = kind;
        config.lambda = plan.auto_lambda ? gain_matched_lambda(prep.sr, kind, plan.loop.dt)
                                         : plan.loop.lambda;
        MeanPsnrSsim closed_mean;
        for (int idx : prep.split.test) {
            try {
                const ScoredRecord scored = score_record(plan, prep, idx, config);
                closed_mean.add(scored.closed.psnr_db, scored.closed.psnr_infinite,
                                scored.closed.ssim);
            } catch (const Error&) {
            }
        }
        DownsamplerRow row;
        row.kind = kind;
        row.psnr_db = closed_mean.psnr_mean();
        row.psnr_infinite = closed_mean.psnr_infinite();
        row.ssim = closed_mean.ssim.mean;
        result.rows.push_back(row);
    }

    // Rank by mean PSNR, treating infinite as best; ties within 1e-9 dB keep
    // the canonical kind order above (stable sort).
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const DownsamplerRow& a, const DownsamplerRow& b) {
                         const bool ai = std::isinf(a.psnr_db), bi = std::isinf(b.psnr_db);
                         if (ai != bi) return ai;
                         if (ai && bi) return false;
                         return a.psnr_db > b.psnr_db + 1e-9;
                     });

    if (!plan.out_dir.empty()) {
        std::ostringstream out;
        out << "downsampler,psnr_db,ssim\n";
        for (const DownsamplerRow& row : result.rows)
            out << to_string(row.kind) << ',' << format_metric(row.psnr_db, row.psnr_infinite)
                << ',' << format_metric(row.ssim, false) << '\n';
        result.table_path = plan.out_dir / "downsamplers.csv";
        write_text_file(out.str(), result.table_path, "compare_downsamplers");
    }
    return result;
}

CompareArchitecturesResult compare_architectures(const ExperimentPlan& plan) {
    const PreparedExperiment prep = prepare(plan);
    LoopConfig base = plan.loop;
    base.lambda = resolve_lambda(plan, prep.sr, plan.loop.downsampler, nullptr);

    CompareArchitecturesResult result;
    MeanPsnrSsim mean[2];
    for (int idx : prep.split.test) {
        const std::string& id = prep.records[static_cast<size_t>(idx)].record_id;
        for (int arch = 1; arch <= 2; ++arch) {
            LoopConfig config = base;
            config.architecture = arch;
            ArchRow row;
            row.record_id = id;
            row.architecture = arch;
            try {
                const ScoredRecord scored = score_record(plan, prep, idx, config);
                row.psnr_db = scored.closed.psnr_db;
                row.psnr_infinite = scored.closed.psnr_infinite;
                row.ssim = scored.closed.ssim;
                row.iterations = scored.iterations;
                row.stop_reason = to_string(scored.stop_reason);
                mean[arch - 1].add(row.psnr_db, row.psnr_infinite, row.ssim);
            } catch (const Error&) {
                row.stop_reason = "error";
            }
            result.rows.push_back(std::move(row));
        }
    }
    for (int arch = 1; arch <= 2; ++arch) {
        ArchRow row;
        row.record_id = "mean";
        row.architecture = arch;
        row.psnr_db = mean[arch - 1].psnr_mean();
        row.psnr_infinite = mean[arch - 1].psnr_infinite();
        row.ssim = mean[arch - 1].ssim.mean;
        result.rows.push_back(std::move(row));
    }

    if (!plan.out_dir.empty()) {
        std::ostringstream out;
        out << "record_id,architecture,psnr_db,ssim,iterations,stop_reason\n";
        for (const ArchRow& row : result.rows)
            out << row.record_id << ',' << row.architecture << ','
                << format_metric(row.psnr_db, row.psnr_infinite) << ','
                << format_metric(row.ssim, false) << ',' << row.iterations << ','
                << row.stop_reason << '\n';
        result.table_path = plan.out_dir / "architectures.csv";
        write_text_file(out.str(), result.table_path, "compare_architectures");
    }
    return result;
}

} // namespace cegsr
