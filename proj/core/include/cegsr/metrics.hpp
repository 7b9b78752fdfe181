#pragma once

#include <array>
#include <string>
#include <vector>

#include "cegsr/signal.hpp"

namespace cegsr {

/* ref_minmax_255 maps both signals onto the 8-bit range through the affine map
 * x -> 255 * (x - min_ref) / (max_ref - min_ref) built from the REFERENCE
 * min/max only, so the candidate is measured on the reference's scale. raw
 * compares the samples as-is. */
enum class Normalization { raw, ref_minmax_255 };

const char* to_string(Normalization n);

/* Applies the reference-anchored map to both vectors. Degenerate reference
 * (max == min) maps both to all-zeros. Errors: empty or mismatched lengths. */
std::pair<std::vector<double>, std::vector<double>>
normalize_to_255(const std::vector<double>& reference, const std::vector<double>& candidate);

/* PSNR against the 8-bit peak: 10*log10(255^2 / MSE) with the population MSE
 * (1/n)*sum (a_i - b_i)^2. Returns +infinity when MSE == 0. */
double psnr(const std::vector<double>& reference, const std::vector<double>& candidate);

/* Single-window SSIM with population statistics over the whole vector and the
 * standard 8-bit constants C1 = (0.01*255)^2 = 6.5025, C2 = (0.03*255)^2 =
 * 58.5225:
 *   (2*mu*mu' + C1)(2*cov + C2) / ((mu^2 + mu'^2 + C1)(var + var' + C2)).
 * Always in [-1, 1]; 1 for identical inputs; symmetric in its arguments. */
double ssim(const std::vector<double>& reference, const std::vector<double>& candidate);

struct MetricReport {
    double psnr_db = 0.0;      // +inf when psnr_infinite
    bool psnr_infinite = false;
    double ssim = 0.0;
    Normalization normalization = Normalization::ref_minmax_255;
    /* (psnr_db, ssim) per channel; filled only when requested. */
    std::vector<std::array<double, 2>> per_channel;
};

/* Normalizes per `normalization` (whole-record reference min/max), then scores
 * the flattened records. Errors: dimension mismatch between the two records. */
MetricReport compute_metrics(const SignalRecord& reference, const SignalRecord& candidate,
                             Normalization normalization = Normalization::ref_minmax_255,
                             bool per_channel = false);

/* Dataset aggregate = arithmetic mean of per-record values, computed as a
 * running mean so that k identical inputs aggregate to the input value
 * bitwise. Infinite PSNR rows are excluded unless every row is infinite, in
 * which case the aggregate PSNR is flagged infinite. */
MetricReport aggregate_metrics(const std::vector<MetricReport>& reports);

} // namespace cegsr
