#include <cmath>
#include <numeric>
#include <vector>

#include "cegsr/degrade.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cegsr;

namespace {

SignalRecord ramp_record(int channels, int samples) {
    std::vector<double> data(static_cast<size_t>(channels) * samples);
    std::iota(data.begin(), data.end(), 0.0);
    return make_record("ramp", channels, samples, 100.0, std::move(data));
}

// Independent tap-weight oracle for the interpolating decimators: triangle of
// half-width f for `linear`, Catmull-Rom (a = -0.5) stretched by f for
// `cubic`, both centered at i*f with edge clamping and weight normalization.
double kernel_weight(DownsampleKind kind, int offset, int f) {
    const double u = std::abs(static_cast<double>(offset)) / f;
    if (kind == DownsampleKind::linear) return u < 1.0 ? 1.0 - u : 0.0;
    const double a = -0.5;
    if (u <= 1.0) return (a + 2.0) * u * u * u - (a + 3.0) * u * u + 1.0;
    if (u < 2.0) return a * (u * u * u - 5.0 * u * u + 8.0 * u - 4.0);
    return 0.0;
}

double oracle_tap(const std::vector<double>& in, int i, int f, DownsampleKind kind) {
    const int half = (kind == DownsampleKind::linear ? f : 2 * f) - 1;
    double num = 0.0, den = 0.0;
    for (int off = -half; off <= half; ++off) {
        const double w = kernel_weight(kind, off, f);
        int idx = i * f + off;
        if (idx < 0) idx = 0;
        if (idx >= static_cast<int>(in.size())) idx = static_cast<int>(in.size()) - 1;
        num += w * in[idx];
        den += w;
    }
    return num / den;
}

}  // namespace

TEST_CASE("nearest and area decimation match hand-computed pins") {
    const SignalRecord sr = ramp_record(1, 10);
    const SignalRecord near = downsample(sr, 2, DownsampleKind::nearest);
    CHECK(near.samples_per_channel == 5);
    CHECK(near.sampling_rate_hz == 50.0);
    CHECK(near.record_id == "ramp");
    CHECK(near.data == std::vector<double>{0, 2, 4, 6, 8});

    const SignalRecord area = downsample(sr, 2, DownsampleKind::area);
    CHECK(area.data == std::vector<double>{0.5, 2.5, 4.5, 6.5, 8.5});
}

TEST_CASE("interpolating decimators match an independent tap oracle") {
    for (const int f : {2, 3, 5}) {
        const int n = 12 * f;
        std::vector<double> x = random_vector(n, 100 + f);
        const SignalRecord sr = make_record("x", 1, n, 100.0, x);
        for (const DownsampleKind kind : {DownsampleKind::linear, DownsampleKind::cubic}) {
            const SignalRecord lr = downsample(sr, f, kind);
            REQUIRE(lr.samples_per_channel == 12);
            for (int i = 0; i < 12; ++i)
                CHECK(lr.data[i] == doctest::Approx(oracle_tap(x, i, f, kind)).epsilon(1e-12));
        }
    }
}

TEST_CASE("all kernels are linear operators") {
    const int n = 30;
    const std::vector<double> x = random_vector(n, 1);
    const std::vector<double> y = random_vector(n, 2);
    const double a = 1.75, b = -0.6;
    std::vector<double> combo(n);
    for (int i = 0; i < n; ++i) combo[i] = a * x[i] + b * y[i];
    for (const DownsampleKind kind : {DownsampleKind::nearest, DownsampleKind::linear,
                                      DownsampleKind::cubic, DownsampleKind::area}) {
        const auto dx = downsample(make_record("x", 1, n, 100.0, x), 3, kind).data;
        const auto dy = downsample(make_record("y", 1, n, 100.0, y), 3, kind).data;
        const auto dc = downsample(make_record("c", 1, n, 100.0, combo), 3, kind).data;
        for (size_t i = 0; i < dc.size(); ++i)
            CHECK(dc[i] == doctest::Approx(a * dx[i] + b * dy[i]).epsilon(1e-12));
    }
}

TEST_CASE("all kernels preserve constants") {
    const SignalRecord sr = make_record("c", 2, 20, 100.0, std::vector<double>(40, 0.7));
    for (const DownsampleKind kind : {DownsampleKind::nearest, DownsampleKind::linear,
                                      DownsampleKind::cubic, DownsampleKind::area}) {
        for (double v : downsample(sr, 5, kind).data)
            CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
    }
}

TEST_CASE("interpolating decimators reproduce affine signals away from edges") {
    const int f = 4, n = 40;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = 3.0 - 0.25 * i;
    const SignalRecord sr = make_record("affine", 1, n, 100.0, x);
    for (const DownsampleKind kind : {DownsampleKind::linear, DownsampleKind::cubic}) {
        const SignalRecord lr = downsample(sr, f, kind);
        // Interior outputs (all taps in range) must hit the affine value at i*f.
        for (int i = 2; i < lr.samples_per_channel - 2; ++i)
            CHECK(lr.data[i] == doctest::Approx(3.0 - 0.25 * (i * f)).epsilon(1e-12));
    }
}

TEST_CASE("downsample treats channels independently") {
    const SignalRecord sr = make_record("two", 2, 6, 60.0, {0, 1, 2, 3, 4, 5, 10, 11, 12, 13, 14, 15});
    const SignalRecord lr = downsample(sr, 3, DownsampleKind::area);
    CHECK(lr.channel(0)[0] == doctest::Approx(1.0));
    CHECK(lr.channel(1)[1] == doctest::Approx(14.0));
}

TEST_CASE("downsample validation") {
    const SignalRecord sr = ramp_record(1, 10);
    expect_error([&] { (void)downsample(sr, 1, DownsampleKind::nearest); }, "factor");
    expect_error([&] { (void)downsample(sr, 3, DownsampleKind::nearest); }, "divisible");
}

TEST_CASE("kernel names round-trip and reject unknowns") {
    for (const DownsampleKind kind : {DownsampleKind::nearest, DownsampleKind::linear,
                                      DownsampleKind::cubic, DownsampleKind::area})
        CHECK(downsample_kind_from_string(to_string(kind)) == kind);
    expect_error([] { (void)downsample_kind_from_string("sinc"); }, "unknown kernel");
}

TEST_CASE("disabled noise is exactly zero and apply_lr reduces to downsample") {
    const NoiseSpec off;
    CHECK_FALSE(off.enabled());
    const std::vector<double> z = make_noise(off, 16, 100.0);
    for (double v : z) CHECK(v == 0.0);

    const SignalRecord sr = ramp_record(2, 20);
    const SignalRecord plain = downsample(sr, 2, DownsampleKind::linear);
    const SignalRecord noisy = apply_lr(sr, 2, DownsampleKind::linear, off);
    CHECK(noisy.data == plain.data);
}

TEST_CASE("white noise is deterministic with sane moments") {
    NoiseSpec spec;
    spec.sigma = 0.1;
    spec.seed = 42;
    const int n = 10000;
    const std::vector<double> a = make_noise(spec, n, 100.0);
    const std::vector<double> b = make_noise(spec, n, 100.0);
    CHECK(a == b);
    spec.seed = 43;
    CHECK(make_noise(spec, n, 100.0) != a);

    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : a) var += (v - mean) * (v - mean);
    var /= n;
    CHECK(std::abs(mean) < 0.005);
    CHECK(std::sqrt(var) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("baseline wander stays within its amplitude") {
    NoiseSpec spec;
    spec.seed = 7;
    spec.artifact = BaselineWander{0.5, 1.0};
    CHECK(spec.enabled());
    const std::vector<double> w = make_noise(spec, 1000, 100.0);
    double peak = 0.0;
    for (double v : w) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 0.5 + 1e-12);
    CHECK(peak > 0.25);  // a full second of a 1 Hz sinusoid reaches near-peak
}

TEST_CASE("emg-like artifact is high-passed noise with near-zero mean") {
    NoiseSpec spec;
    spec.seed = 9;
    spec.artifact = EmgLike{0.3, 20.0};
    const std::vector<double> e = make_noise(spec, 10000, 500.0);
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    CHECK(std::abs(mean) < 0.02);
    CHECK(e == make_noise(spec, 10000, 500.0));
}

TEST_CASE("apply_lr composes downsample with the noise vector bitwise") {
    NoiseSpec spec;
    spec.sigma = 0.05;
    spec.seed = 3;
    spec.artifact = BaselineWander{0.2, 0.5};
    const SignalRecord sr = ramp_record(2, 20);
    const SignalRecord clean = downsample(sr, 2, DownsampleKind::area);
    const SignalRecord noisy = apply_lr(sr, 2, DownsampleKind::area, spec);
    const std::vector<double> n =
        make_noise(spec, static_cast<int>(clean.data.size()), clean.sampling_rate_hz);
    REQUIRE(noisy.data.size() == clean.data.size());
    for (size_t i = 0; i < clean.data.size(); ++i)
        CHECK(noisy.data[i] == clean.data[i] + n[i]);
}

TEST_CASE("make_noise validation") {
    NoiseSpec bad;
    bad.sigma = -1.0;
    expect_error([&] { (void)make_noise(bad, 4, 100.0); }, "sigma");
    expect_error([] { (void)make_noise(NoiseSpec{}, -1, 100.0); }, "n must be");
}
