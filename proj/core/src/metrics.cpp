#include "cegsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cegsr/errors.hpp"

namespace cegsr {
namespace {

void check_same_shape(const SignalRecord& ref, const SignalRecord& cand, const char* where) {
    validate_record(ref, where);
    validate_record(cand, where);
    if (ref.channels != cand.channels || ref.samples_per_channel != cand.samples_per_channel)
        throw Error(std::string(where) + ": shape mismatch (reference " +
                    std::to_string(ref.channels) + "x" +
                    std::to_string(ref.samples_per_channel) + ", candidate " +
                    std::to_string(cand.channels) + "x" +
                    std::to_string(cand.samples_per_channel) + ")");
}

double mse(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

double psnr_from_mse(double m) {
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

} // namespace

const char* to_string(Normalization n) {
    switch (n) {
        case Normalization::raw: return "raw";
        case Normalization::ref_minmax_255: return "ref_minmax_255";
    }
    return "unknown";
}

std::pair<std::vector<double>, std::vector<double>>
normalize_to_255(const std::vector<double>& reference, const std::vector<double>& candidate) {
    if (reference.size() != candidate.size())
        throw Error("normalize_to_255: size mismatch");
    if (reference.empty())
        throw Error("normalize_to_255: empty input");
    const auto [mn_it, mx_it] = std::minmax_element(reference.begin(), reference.end());
    const double mn = *mn_it, mx = *mx_it;
    std::vector<double> r(reference.size()), c(candidate.size());
    if (mx == mn) {
        // Degenerate reference range: both signals map to zero so the
        // comparison degrades gracefully instead of dividing by zero.
        return {r, c};
    }
    const double scale = 255.0 / (mx - mn);
    for (size_t i = 0; i < reference.size(); ++i) {
        r[i] = (reference[i] - mn) * scale;
        c[i] = (candidate[i] - mn) * scale;
    }
    return {r, c};
}

double psnr(const std::vector<double>& reference, const std::vector<double>& candidate) {
    if (reference.size() != candidate.size())
        throw Error("psnr: size mismatch");
    if (reference.empty())
        throw Error("psnr: empty input");
    return psnr_from_mse(mse(reference, candidate));
}

double ssim(const std::vector<double>& reference, const std::vector<double>& candidate) {
    if (reference.size() != candidate.size())
        throw Error("ssim: size mismatch");
    if (reference.empty())
        throw Error("ssim: empty input");
    const double c1 = 6.5025;
    const double c2 = 58.5225;
    const double n = static_cast<double>(reference.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        mx += reference[i];
        my += candidate[i];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        const double dx = reference[i] - mx;
        const double dy = candidate[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    vx /= n;
    vy /= n;
    cov /= n;
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

MetricReport compute_metrics(const SignalRecord& reference, const SignalRecord& candidate,
                             Normalization normalization, bool per_channel) {
    check_same_shape(reference, candidate, "compute_metrics");

    std::vector<double> r = reference.data;
    std::vector<double> c = candidate.data;
    if (normalization == Normalization::ref_minmax_255)
        std::tie(r, c) = normalize_to_255(reference.data, candidate.data);

    MetricReport rep;
    rep.normalization = normalization;
    const double m = mse(r, c);
    rep.psnr_db = psnr_from_mse(m);
    rep.psnr_infinite = !(m > 0.0);
    rep.ssim = ssim(r, c);

    if (per_channel) {
        const int ns = reference.samples_per_channel;
        rep.per_channel.resize(static_cast<size_t>(reference.channels));
        for (int ch = 0; ch < reference.channels; ++ch) {
            std::vector<double> rc(r.begin() + static_cast<long>(ch) * ns,
                                   r.begin() + static_cast<long>(ch + 1) * ns);
            std::vector<double> cc(c.begin() + static_cast<long>(ch) * ns,
                                   c.begin() + static_cast<long>(ch + 1) * ns);
            rep.per_channel[static_cast<size_t>(ch)] = {psnr(rc, cc), ssim(rc, cc)};
        }
    }
    return rep;
}

MetricReport aggregate_metrics(const std::vector<MetricReport>& reports) {
    if (reports.empty())
        throw Error("aggregate_metrics: empty input");

    MetricReport out;
    out.normalization = reports.front().normalization;

    // PSNR: rows with an infinite value are excluded from the mean unless
    // every row is infinite, in which case the aggregate is infinite too.
    double psnr_mean = 0.0;
    size_t psnr_count = 0;
    double ssim_mean = 0.0;
    size_t ssim_count = 0;
    for (const MetricReport& r : reports) {
        if (!r.psnr_infinite) {
            ++psnr_count;
            psnr_mean += (r.psnr_db - psnr_mean) / static_cast<double>(psnr_count);
        }
        ++ssim_count;
        ssim_mean += (r.ssim - ssim_mean) / static_cast<double>(ssim_count);
    }
    if (psnr_count == 0) {
        out.psnr_db = std::numeric_limits<double>::infinity();
        out.psnr_infinite = true;
    } else {
        out.psnr_db = psnr_mean;
        out.psnr_infinite = false;
    }
    out.ssim = ssim_mean;
    return out;
}

} // namespace cegsr
