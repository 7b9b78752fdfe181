#include "cegsr/sr_operator.hpp"

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cegsr/errors.hpp"
#include "cegsr/io.hpp"
#include "detail/kernels.hpp"

namespace cegsr {
namespace {

using detail::clamp_index;
using detail::cubic_weight;

std::uint64_t fnv1a(std::uint64_t h, const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

void upsample_channel(const double* in, int n, double* out, int factor, DownsampleKind kernel) {
    const int m = n * factor;
    switch (kernel) {
        case DownsampleKind::nearest:
        case DownsampleKind::area:
            // Both reduce to replication on the phase-0 grid.
            for (int j = 0; j < m; ++j) out[j] = in[j / factor];
            return;
        case DownsampleKind::linear:
            for (int j = 0; j < m; ++j) {
                const int i0 = j / factor;
                const double t = static_cast<double>(j % factor) / factor;
                const int i1 = clamp_index(i0 + 1, n);
                out[j] = (1.0 - t) * in[i0] + t * in[i1];
            }
            return;
        case DownsampleKind::cubic:
            for (int j = 0; j < m; ++j) {
                const int i0 = j / factor;
                const double t = static_cast<double>(j % factor) / factor;
                double acc = 0.0, wsum = 0.0;
                for (int k = -1; k <= 2; ++k) {
                    const double w = cubic_weight(static_cast<double>(k) - t);
                    acc += w * in[clamp_index(i0 + k, n)];
                    wsum += w;
                }
                out[j] = acc / wsum;
            }
            return;
    }
    throw Error("apply_sr: unknown interpolation kernel");
}

std::vector<double> apply_kind(const SrOperatorSpec& spec, const std::vector<double>& lr_flat) {
    const SamplingGeometry& g = spec.geometry;
    std::vector<double> out(static_cast<size_t>(g.sr_total()));

    if (std::holds_alternative<SrOperatorSpec::Replication>(spec.kind)) {
        for (int c = 0; c < g.channels; ++c) {
            const double* in = lr_flat.data() + static_cast<size_t>(c) * g.lr_samples;
            double* o = out.data() + static_cast<size_t>(c) * g.sr_samples;
            for (int j = 0; j < g.sr_samples; ++j) o[j] = in[j / g.factor];
        }
        return out;
    }
    if (const auto* interp = std::get_if<SrOperatorSpec::Interp>(&spec.kind)) {
        for (int c = 0; c < g.channels; ++c)
            upsample_channel(lr_flat.data() + static_cast<size_t>(c) * g.lr_samples, g.lr_samples,
                             out.data() + static_cast<size_t>(c) * g.sr_samples, g.factor,
                             interp->kernel);
        return out;
    }
    if (const auto* lin = std::get_if<SrOperatorSpec::Linear>(&spec.kind)) {
        const LinearSrModel& m = *lin->model;
        const double* x = lr_flat.data();
        for (int r = 0; r < m.sr_total; ++r) {
            const double* wrow = m.weight.data() + static_cast<size_t>(r) * m.lr_total;
            double acc = m.bias[static_cast<size_t>(r)];
            for (int cidx = 0; cidx < m.lr_total; ++cidx) acc += wrow[cidx] * x[cidx];
            out[static_cast<size_t>(r)] = acc;
        }
        return out;
    }
    const auto& ext = std::get<SrOperatorSpec::External>(spec.kind);
    SignalRecord lr;
    lr.channels = g.channels;
    lr.samples_per_channel = g.lr_samples;
    lr.sampling_rate_hz = 1.0;
    lr.record_id = "external_input";
    lr.data = lr_flat;
    return run_external_sr(ext.command, lr, g.factor).data;
}

} // namespace

void validate_model(const LinearSrModel& model, const std::string& where) {
    if (model.lr_total < 1 || model.sr_total < 1)
        throw Error(where + ": model dimensions must be >= 1 (got " +
                    std::to_string(model.lr_total) + " -> " + std::to_string(model.sr_total) +
                    ")");
    if (model.weight.size() !=
        static_cast<size_t>(model.sr_total) * static_cast<size_t>(model.lr_total))
        throw Error(where + ": weight size " + std::to_string(model.weight.size()) +
                    " does not match dimensions " + std::to_string(model.sr_total) + "x" +
                    std::to_string(model.lr_total));
    if (model.bias.size() != static_cast<size_t>(model.sr_total))
        throw Error(where + ": bias size " + std::to_string(model.bias.size()) +
                    " does not match output dimension " + std::to_string(model.sr_total));
    if (model.ridge < 0)
        throw Error(where + ": ridge must be >= 0");
    for (double v : model.weight)
        if (!std::isfinite(v)) throw Error(where + ": non-finite weight");
    for (double v : model.bias)
        if (!std::isfinite(v)) throw Error(where + ": non-finite bias");
}

SrOperatorSpec make_replication_sr(const SamplingGeometry& g) {
    return SrOperatorSpec{SrOperatorSpec::Replication{}, g};
}

SrOperatorSpec make_interp_sr(const SamplingGeometry& g, DownsampleKind kernel) {
    return SrOperatorSpec{SrOperatorSpec::Interp{kernel}, g};
}

SrOperatorSpec make_linear_sr(const SamplingGeometry& g,
                              std::shared_ptr<const LinearSrModel> model) {
    if (!model)
        throw Error("make_linear_sr: null model");
    validate_model(*model, "make_linear_sr");
    if (model->lr_total != g.lr_total() || model->sr_total != g.sr_total())
        throw Error("make_linear_sr: model dimensions " + std::to_string(model->lr_total) +
                    " -> " + std::to_string(model->sr_total) + " do not match geometry " +
                    std::to_string(g.lr_total()) + " -> " + std::to_string(g.sr_total()));
    return SrOperatorSpec{SrOperatorSpec::Linear{std::move(model)}, g};
}

SrOperatorSpec make_external_sr(const SamplingGeometry& g, std::string command) {
    if (command.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error("make_external_sr: empty command");
    return SrOperatorSpec{SrOperatorSpec::External{std::move(command)}, g};
}

std::string sr_kind_label(const SrOperatorSpec& spec) {
    if (std::holds_alternative<SrOperatorSpec::Replication>(spec.kind)) return "replication";
    if (const auto* interp = std::get_if<SrOperatorSpec::Interp>(&spec.kind))
        return std::string("interp:") + to_string(interp->kernel);
    if (std::holds_alternative<SrOperatorSpec::Linear>(spec.kind)) return "linear";
    return "external";
}

SignalRecord apply_sr(const SrOperatorSpec& spec, const SignalRecord& lr) {
    validate_record(lr, "apply_sr");
    const SamplingGeometry& g = spec.geometry;
    if (lr.channels != g.channels || lr.samples_per_channel != g.lr_samples)
        throw Error("apply_sr: input shape " + std::to_string(lr.channels) + "x" +
                    std::to_string(lr.samples_per_channel) + " does not match geometry " +
                    std::to_string(g.channels) + "x" + std::to_string(g.lr_samples));
    SignalRecord out;
    out.channels = g.channels;
    out.samples_per_channel = g.sr_samples;
    out.sampling_rate_hz = lr.sampling_rate_hz * g.factor;
    out.record_id = lr.record_id;
    out.data = apply_kind(spec, lr.data);
    return out;
}

std::vector<double> apply_sr(const SrOperatorSpec& spec, const std::vector<double>& lr_flat) {
    if (lr_flat.size() != static_cast<size_t>(spec.geometry.lr_total()))
        throw Error("apply_sr: input length " + std::to_string(lr_flat.size()) +
                    " does not match geometry total " +
                    std::to_string(spec.geometry.lr_total()));
    return apply_kind(spec, lr_flat);
}

LinearSrModel fit_linear_sr(const std::vector<TrainPair>& pairs, double ridge) {
    if (pairs.empty())
        throw Error("fit_linear_sr: no training pairs");
    if (ridge < 0)
        throw Error("fit_linear_sr: ridge must be >= 0");
    const int d = static_cast<int>(pairs.front().lr.size());
    const int D = static_cast<int>(pairs.front().sr.size());
    if (d < 1 || D < 1)
        throw Error("fit_linear_sr: empty training vectors");
    for (const TrainPair& p : pairs)
        if (static_cast<int>(p.lr.size()) != d || static_cast<int>(p.sr.size()) != D)
            throw Error("fit_linear_sr: inconsistent pair dimensions");

    const int N = static_cast<int>(pairs.size());
    // Augmented design Z = [X 1]; normal equations (Z^T Z + ridge * J) Theta =
    // Z^T Y with J = diag(1,...,1,0) so the bias row stays unpenalized.
    Eigen::MatrixXd Z(N, d + 1);
    Eigen::MatrixXd Y(N, D);
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < d; ++i) Z(k, i) = pairs[static_cast<size_t>(k)].lr[static_cast<size_t>(i)];
        Z(k, d) = 1.0;
        for (int j = 0; j < D; ++j) Y(k, j) = pairs[static_cast<size_t>(k)].sr[static_cast<size_t>(j)];
    }
    Eigen::MatrixXd G = Z.transpose() * Z;
    for (int i = 0; i < d; ++i) G(i, i) += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw Error("fit_linear_sr: normal equations factorization failed");
    const Eigen::VectorXd diag = ldlt.vectorD().cwiseAbs();
    const double dmax = diag.maxCoeff();
    const double dmin = diag.minCoeff();
    if (!(dmax > 0) || dmin <= dmax * 1e-13)
        throw Error("fit_linear_sr: singular system (add ridge > 0 or more training pairs)");

    Eigen::MatrixXd Theta = ldlt.solve(Z.transpose() * Y);  // (d+1) x D

    LinearSrModel model;
    model.lr_total = d;
    model.sr_total = D;
    model.ridge = ridge;
    model.weight.resize(static_cast<size_t>(D) * static_cast<size_t>(d));
    model.bias.resize(static_cast<size_t>(D));
    for (int j = 0; j < D; ++j) {
        for (int i = 0; i < d; ++i)
            model.weight[static_cast<size_t>(j) * d + i] = Theta(i, j);
        model.bias[static_cast<size_t>(j)] = Theta(d, j);
    }

    std::uint64_t h = 14695981039346656037ULL;
    for (const TrainPair& p : pairs) {
        h = fnv1a(h, p.lr.data(), p.lr.size() * sizeof(double));
        h = fnv1a(h, p.sr.data(), p.sr.size() * sizeof(double));
    }
    model.training_hash = h;
    validate_model(model, "fit_linear_sr");
    return model;
}

void save_linear_sr(const LinearSrModel& model, const std::filesystem::path& path) {
    validate_model(model, "save_linear_sr");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("save_linear_sr: cannot write " + path.string());
    char header[128];
    std::snprintf(header, sizeof header, "CEGSR-LIN1 %d %d %.17g\n", model.lr_total,
                  model.sr_total, model.ridge);
    out << header;
    out.write(reinterpret_cast<const char*>(model.weight.data()),
              static_cast<std::streamsize>(model.weight.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(model.bias.data()),
              static_cast<std::streamsize>(model.bias.size() * sizeof(double)));
    if (!out)
        throw Error("save_linear_sr: write failed for " + path.string());
}

LinearSrModel load_linear_sr(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("load_linear_sr: file missing: " + path.string());
    std::string header;
    if (!std::getline(in, header))
        throw Error("load_linear_sr: malformed header in " + path.string());
    std::istringstream hs(header);
    std::string magic;
    LinearSrModel model;
    if (!(hs >> magic >> model.lr_total >> model.sr_total >> model.ridge) ||
        magic != "CEGSR-LIN1")
        throw Error("load_linear_sr: malformed header in " + path.string());
    if (model.lr_total < 1 || model.sr_total < 1)
        throw Error("load_linear_sr: malformed header (bad dimensions) in " + path.string());

    const size_t nw = static_cast<size_t>(model.sr_total) * static_cast<size_t>(model.lr_total);
    model.weight.resize(nw);
    model.bias.resize(static_cast<size_t>(model.sr_total));
    in.read(reinterpret_cast<char*>(model.weight.data()),
            static_cast<std::streamsize>(nw * sizeof(double)));
    in.read(reinterpret_cast<char*>(model.bias.data()),
            static_cast<std::streamsize>(model.bias.size() * sizeof(double)));
    if (!in || static_cast<size_t>(in.gcount()) != model.bias.size() * sizeof(double))
        throw Error("load_linear_sr: size mismatch (payload shorter than header dimensions) in " +
                    path.string());
    char extra;
    if (in.read(&extra, 1))
        throw Error("load_linear_sr: size mismatch (payload longer than header dimensions) in " +
                    path.string());
    validate_model(model, "load_linear_sr");
    return model;
}

namespace {

std::vector<std::string> build_argv(const std::string& command, const std::string& input,
                                    const std::string& output, int factor) {
    std::vector<std::string> argv;
    std::istringstream ss(command);
    std::string tok;
    while (ss >> tok) {
        auto substitute = [&tok](const std::string& key, const std::string& value) {
            size_t pos;
            while ((pos = tok.find(key)) != std::string::npos)
                tok.replace(pos, key.size(), value);
        };
        substitute("{input}", input);
        substitute("{output}", output);
        substitute("{factor}", std::to_string(factor));
        argv.push_back(tok);
    }
    return argv;
}

} // namespace

SignalRecord run_external_sr(const std::string& command, const SignalRecord& lr, int factor) {
    validate_record(lr, "run_external_sr");
    if (factor < 2)
        throw Error("run_external_sr: factor must be >= 2");

    char tmpl[] = "/tmp/cegsr-ext-XXXXXX";
    if (!mkdtemp(tmpl))
        throw Error(std::string("run_external_sr: mkdtemp failed: ") + std::strerror(errno));
    const std::filesystem::path dir(tmpl);
    const std::filesystem::path input = dir / "input.raw";
    const std::filesystem::path output = dir / "output.raw";

    const std::vector<std::string> argv_s =
        build_argv(command, input.string(), output.string(), factor);
    if (argv_s.empty()) {
        std::filesystem::remove_all(dir);
        throw Error("run_external_sr: empty command");
    }

    save_record(lr, input, FileFormat::raw);

    // The exec-status pipe is CLOEXEC: it closes silently on a successful
    // exec and carries errno back to the parent when exec fails.
    int fds[2];
    if (pipe2(fds, O_CLOEXEC) != 0) {
        std::filesystem::remove_all(dir);
        throw Error(std::string("run_external_sr: pipe failed: ") + std::strerror(errno));
    }

    const pid_t pid = fork();
    if (pid < 0) {
        close(fds[0]);
        close(fds[1]);
        std::filesystem::remove_all(dir);
        throw Error(std::string("run_external_sr: fork failed: ") + std::strerror(errno));
    }
    if (pid == 0) {
        close(fds[0]);
        std::vector<char*> argv;
        argv.reserve(argv_s.size() + 1);
        for (const std::string& s : argv_s) argv.push_back(const_cast<char*>(s.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        const int err = errno;
        ssize_t ignored = write(fds[1], &err, sizeof err);
        (void)ignored;
        _exit(127);
    }

    close(fds[1]);
    int exec_errno = 0;
    const ssize_t got = read(fds[0], &exec_errno, sizeof exec_errno);
    close(fds[0]);
    int status = 0;
    while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (got > 0)
        throw Error("run_external_sr: launch failed for '" + argv_s[0] +
                    "': " + std::strerror(exec_errno) + " (inputs kept in " + dir.string() + ")");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const std::string detail = WIFEXITED(status)
                                       ? "exit status " + std::to_string(WEXITSTATUS(status))
                                       : "terminated by signal";
        throw Error("run_external_sr: command failed (" + detail + "), inputs kept in " +
                    dir.string());
    }

    SignalRecord out;
    try {
        out = load_record(output, FileFormat::raw);
    } catch (const Error& e) {
        throw Error("run_external_sr: missing or invalid output (" + std::string(e.what()) +
                    "), inputs kept in " + dir.string());
    }
    if (out.channels != lr.channels || out.samples_per_channel != lr.samples_per_channel * factor)
        throw Error("run_external_sr: wrong output dimensions " + std::to_string(out.channels) +
                    "x" + std::to_string(out.samples_per_channel) + " (expected " +
                    std::to_string(lr.channels) + "x" +
                    std::to_string(lr.samples_per_channel * factor) + "), inputs kept in " +
                    dir.string());
    std::filesystem::remove_all(dir);
    out.record_id = lr.record_id;
    out.sampling_rate_hz = lr.sampling_rate_hz * factor;
    return out;
}

} // namespace cegsr
