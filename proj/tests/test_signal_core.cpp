#include <cmath>
#include <fstream>
#include <limits>

#include "cegsr/io.hpp"
#include "cegsr/signal.hpp"
#include "cegsr/synth.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace cegsr;

TEST_CASE("record construction and validation") {
    const SignalRecord rec = make_record("r1", 2, 4, 100.0, {1, 2, 3, 4, 5, 6, 7, 8});
    CHECK(rec.total_samples() == 8);
    CHECK(rec.at(0, 0) == 1);
    CHECK(rec.at(1, 3) == 8);
    CHECK(rec.channel(1).size() == 4);
    CHECK(rec.channel(1)[0] == 5);

    expect_error([] { (void)make_record("r", 0, 4, 100.0, {}); }, "channels");
    expect_error([] { (void)make_record("r", 1, 1, 100.0, {0.0}); }, "samples");
    expect_error([] { (void)make_record("r", 1, 2, 0.0, {0.0, 1.0}); }, "rate");
    expect_error([] { (void)make_record("r", 1, 3, 1.0, {0.0, 1.0}); }, "size");
    expect_error(
        [] {
            (void)make_record("r", 1, 2, 1.0, {0.0, std::numeric_limits<double>::quiet_NaN()});
        },
        "finite");
}

TEST_CASE("sampling geometry") {
    const SamplingGeometry g = make_geometry(3, 10, 5);
    CHECK(g.sr_samples == 50);
    CHECK(g.lr_total() == 30);
    CHECK(g.sr_total() == 150);
    CHECK(g.subsampling_rate() == doctest::Approx(0.2));

    const SignalRecord lr = make_record("lr", 1, 4, 10.0, {0, 1, 2, 3});
    const SignalRecord sr = make_record("sr", 1, 8, 20.0, {0, 0, 1, 1, 2, 2, 3, 3});
    const SamplingGeometry g2 = geometry_from(lr, sr);
    CHECK(g2.factor == 2);
    CHECK(geometry_for(lr, 3).sr_samples == 12);

    const SignalRecord sr_bad = make_record("sr", 2, 8, 20.0, std::vector<double>(16, 0.0));
    expect_error([&] { (void)geometry_from(lr, sr_bad); }, "channel");
    const SignalRecord sr_odd = make_record("sr", 1, 7, 20.0, std::vector<double>(7, 0.0));
    expect_error([&] { (void)geometry_from(lr, sr_odd); }, "multiple");
    expect_error([&] { (void)geometry_from(lr, lr); }, "factor");
    expect_error([] { (void)make_geometry(1, 1, 2); }, "lr_samples");
}

TEST_CASE("synthetic ecg is periodic at the beat period") {
    // 60 bpm at 500 Hz: the beat period is exactly 500 samples.
    const SignalRecord rec = synthesize_ecg(2, 2000, 500.0, 60.0, 7);
    const int period = 500;
    for (int c = 0; c < rec.channels; ++c)
        for (int i = 0; i + period < rec.samples_per_channel; i += 17)
            CHECK(rec.at(c, i) == doctest::Approx(rec.at(c, i + period)).epsilon(1e-12));
}

TEST_CASE("synthetic ecg respects spec fields and jitter draw order") {
    SynthSpec spec;
    spec.channels = 3;
    spec.samples = 400;
    spec.rate_hz = 250.0;
    spec.seed = 11;
    spec.baseline = 2.0;
    spec.record_id = "synth_x";
    const SignalRecord rec = synthesize_ecg(spec);
    CHECK(rec.channels == 3);
    CHECK(rec.samples_per_channel == 400);
    CHECK(rec.sampling_rate_hz == 250.0);
    CHECK(rec.record_id == "synth_x");
    // Baseline shifts everything up; bump amplitudes stay bounded by the
    // largest bump (1.0) times the largest channel scale (1.5).
    for (double v : rec.data) {
        CHECK(v >= 2.0 - 1e-9);
        CHECK(v <= 2.0 + 1.5 * 1.5);
    }

    // Same seed reproduces bitwise; different seed does not.
    const SignalRecord again = synthesize_ecg(spec);
    CHECK(again.data == rec.data);
    SynthSpec other = spec;
    other.seed = 12;
    CHECK(synthesize_ecg(other).data != rec.data);

    // Phase jitter shifts the waveform.
    SynthSpec jit = spec;
    jit.phase_jitter = 1.0;
    CHECK(synthesize_ecg(jit).data != synthesize_ecg(spec).data);

    expect_error(
        [] {
            SynthSpec s;
            s.bpm = 301.0;
            (void)synthesize_ecg(s);
        },
        "bpm");
    expect_error(
        [] {
            SynthSpec s;
            s.samples = 1;
            (void)synthesize_ecg(s);
        },
        "samples");
}

TEST_CASE("csv round trip preserves doubles and sidecar metadata") {
    TempDir dir;
    const SignalRecord rec =
        make_record("round", 2, 3, 360.0, {0.1, -2.5e-7, 3.14159265358979, 1e18, -0.0, 42.0});
    const auto path = dir.path / "round.csv";
    save_record(rec, path);
    const SignalRecord back = load_record(path);
    CHECK(back.channels == rec.channels);
    CHECK(back.samples_per_channel == rec.samples_per_channel);
    CHECK(back.sampling_rate_hz == rec.sampling_rate_hz);
    CHECK(back.record_id == "round");
    CHECK(back.data == rec.data);  // %.17g round-trips exactly
}

TEST_CASE("raw round trip is exact at float precision") {
    TempDir dir;
    std::vector<double> data = random_vector(40, 3);
    const SignalRecord rec = make_record("rawrec", 4, 10, 500.0, data);
    const auto path = dir.path / "rec.raw";
    save_record(rec, path, FileFormat::raw);
    const SignalRecord back = load_record(path);
    CHECK(back.sampling_rate_hz == 500.0);
    CHECK(back.record_id == "rawrec");
    REQUIRE(back.data.size() == rec.data.size());
    for (size_t i = 0; i < data.size(); ++i)
        CHECK(back.data[i] == static_cast<double>(static_cast<float>(data[i])));
}

TEST_CASE("csv without sidecar falls back to defaults") {
    TempDir dir;
    const auto path = dir.path / "bare.csv";
    std::ofstream(path) << "lead_i,lead_ii\n1,2\n3,4\n5,6\n";
    const SignalRecord rec = load_record(path);
    CHECK(rec.channels == 2);
    CHECK(rec.samples_per_channel == 3);
    CHECK(rec.sampling_rate_hz == 1.0);
    CHECK(rec.record_id == "bare");
    CHECK(rec.at(1, 2) == 6.0);
}

TEST_CASE("csv headerless numeric first row is data") {
    TempDir dir;
    const auto path = dir.path / "plain.csv";
    std::ofstream(path) << "1.5,2.5\n3.5,4.5\n";
    const SignalRecord rec = load_record(path);
    CHECK(rec.samples_per_channel == 2);
    CHECK(rec.at(0, 0) == 1.5);
}

TEST_CASE("io error paths carry stable keywords") {
    TempDir dir;
    expect_error([&] { (void)load_record(dir.path / "absent.csv"); }, "file missing");

    const auto ragged = dir.path / "ragged.csv";
    std::ofstream(ragged) << "a,b\n1,2\n3\n";
    expect_error([&] { (void)load_record(ragged); }, "ragged");

    const auto badval = dir.path / "badval.csv";
    std::ofstream(badval) << "1,2\n3,x\n";
    expect_error([&] { (void)load_record(badval); }, "malformed value");

    const auto nonfinite = dir.path / "nan.csv";
    std::ofstream(nonfinite) << "1,2\n3,nan\n";
    expect_error([&] { (void)load_record(nonfinite); }, "non-finite");

    const auto empty = dir.path / "empty.csv";
    std::ofstream(empty) << "";
    expect_error([&] { (void)load_record(empty); }, "malformed header");

    const auto naked_raw = dir.path / "naked.raw";
    std::ofstream(naked_raw, std::ios::binary) << "xxxx";
    expect_error([&] { (void)load_record(naked_raw); }, "sidecar missing");

    // Raw payload shorter than the sidecar promises.
    const auto short_raw = dir.path / "short.raw";
    std::ofstream(short_raw, std::ios::binary) << "\0\0\0\0";
    std::ofstream(dir.path / "short.raw.meta")
        << "channels 1\nsamples 4\nrate_hz 100\nrecord_id short\n";
    expect_error([&] { (void)load_record(short_raw); }, "size mismatch");

    // Sidecar that disagrees with the CSV body.
    const auto mism = dir.path / "mism.csv";
    std::ofstream(mism) << "1,2\n3,4\n";
    std::ofstream(dir.path / "mism.csv.meta")
        << "channels 3\nsamples 2\nrate_hz 100\nrecord_id m\n";
    expect_error([&] { (void)load_record(mism); }, "does not match");
}
