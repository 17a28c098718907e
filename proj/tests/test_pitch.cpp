#include <doctest.h>

#include <cmath>

#include "svs/common.hpp"
#include "svs/pitch.hpp"

using namespace svs;

namespace {

F0Sequence seq(std::vector<double> v) {
    F0Sequence f;
    f.values = std::move(v);
    return f;
}

int voiced_count(const F0Sequence& f) {
    int n = 0;
    for (double v : f.values) n += v > 0.0;
    return n;
}

F0Sequence random_f0(Rng& rng, int frames = 40) {
    F0Sequence f;
    f.values.resize(frames);
    for (auto& v : f.values) {
        v = rng.uniform() < 0.25 ? 0.0 : rng.uniform(80.0, 500.0);
    }
    if (voiced_count(f) == 0) f.values[0] = rng.uniform(80.0, 500.0);
    return f;
}

}  // namespace

TEST_CASE("pitch: voiced_mean basics and brute-force oracle") {
    CHECK(voiced_mean(seq({0, 100, 300})) == doctest::Approx(200.0));
    CHECK(voiced_mean(seq({123.5, 123.5, 123.5})) == doctest::Approx(123.5));
    CHECK_THROWS_AS(voiced_mean(seq({0, 0, 0})), InvalidInputError);

    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const F0Sequence f = random_f0(rng);
        double sum = 0.0;
        int n = 0;
        for (double v : f.values) {
            if (v > 0) {
                sum += v;
                ++n;
            }
        }
        CHECK(voiced_mean(f) == doctest::Approx(sum / n).epsilon(1e-12));
    }
}

TEST_CASE("pitch: decompose splits mean 200 into factor 200 and melody at 230") {
    const DecoupledPitch d = decompose_f0(seq({100, 200, 300}));
    CHECK(d.range_factor == 200);
    REQUIRE(d.melody.size() == 3);
    CHECK(d.melody[0] == 115);
    CHECK(d.melody[1] == 230);
    CHECK(d.melody[2] == 345);
}

TEST_CASE("pitch: mean-230 input is a unit-scale identity") {
    const DecoupledPitch d = decompose_f0(seq({230, 230, 230}));
    CHECK(d.range_factor == 230);
    for (int hz : d.melody) CHECK(hz == 230);

    const DecoupledPitch d2 = decompose_f0(seq({220.4, 239.6}));  // mean 230
    CHECK(d2.range_factor == 230);
    CHECK(d2.melody[0] == 220);
    CHECK(d2.melody[1] == 240);
}

TEST_CASE("pitch: unvoiced frames are preserved verbatim") {
    const DecoupledPitch d = decompose_f0(seq({0, 230, 0, 230}));
    CHECK(d.range_factor == 230);
    CHECK(d.melody == std::vector<int>{0, 230, 0, 230});
}

TEST_CASE("pitch: decompose rejects all-unvoiced input") {
    CHECK_THROWS_AS(decompose_f0(seq({0, 0})), InvalidInputError);
}

TEST_CASE("pitch: recompose identities") {
    // factor 230 makes recompose the identity on the melody
    DecoupledPitch d;
    d.range_factor = 230;
    d.melody = {0, 115, 230, 345};
    const F0Sequence back = recompose_f0(d);
    CHECK(back.values == std::vector<double>{0, 115, 230, 345});

    // doubling the factor doubles every voiced output
    DecoupledPitch d2 = d;
    d2.range_factor = 460;
    const F0Sequence doubled = recompose_f0(d2);
    for (size_t i = 0; i < back.values.size(); ++i) {
        CHECK(doubled.values[i] == doctest::Approx(2.0 * back.values[i]));
    }

    DecoupledPitch bad;
    bad.range_factor = 0;
    bad.melody = {230};
    CHECK_THROWS_AS(recompose_f0(bad), InvalidInputError);
}

TEST_CASE("pitch: round trip of [100,200,300] is within +-1.5 Hz per frame") {
    const F0Sequence original = seq({100, 200, 300});
    const F0Sequence back = recompose_f0(decompose_f0(original));
    for (size_t i = 0; i < original.values.size(); ++i) {
        CHECK(std::abs(back.values[i] - original.values[i]) <= 1.5);
    }
}

TEST_CASE("pitch: round-trip error bound factor/230 + 1 holds on random sequences") {
    Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const F0Sequence f = random_f0(rng);
        const DecoupledPitch d = decompose_f0(f);
        const F0Sequence back = recompose_f0(d);
        const double bound = d.range_factor / 230.0 + 1.0;
        for (size_t i = 0; i < f.values.size(); ++i) {
            if (f.values[i] == 0.0) {
                CHECK(back.values[i] == 0.0);
            } else {
                CHECK(std::abs(back.values[i] - f.values[i]) <= bound);
            }
        }
    }
}

TEST_CASE("pitch: melody mean lands in [229, 231] and the mask never changes") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const F0Sequence f = random_f0(rng);
        const DecoupledPitch d = decompose_f0(f);
        double sum = 0.0;
        int n = 0;
        for (size_t i = 0; i < f.values.size(); ++i) {
            CHECK((d.melody[i] > 0) == (f.values[i] > 0.0));
            if (d.melody[i] > 0) {
                sum += d.melody[i];
                ++n;
            }
        }
        const double mean = sum / n;
        CHECK(mean >= 229.0);
        CHECK(mean <= 231.0);
    }
}

TEST_CASE("pitch: transposition invariance of the melody") {
    Rng rng(34);
    for (double c : {0.5, 0.8, 1.25, 2.0}) {
        for (int trial = 0; trial < 50; ++trial) {
            const F0Sequence f = random_f0(rng);
            F0Sequence scaled = f;
            for (auto& v : scaled.values) v *= c;
            const DecoupledPitch base = decompose_f0(f);
            const DecoupledPitch moved = decompose_f0(scaled);
            for (size_t i = 0; i < base.melody.size(); ++i) {
                CHECK(std::abs(base.melody[i] - moved.melody[i]) <= 1);
            }
            CHECK(std::abs(moved.range_factor - c * base.range_factor) <= 1.0);
        }
    }
}

TEST_CASE("pitch: sidecar file round trip") {
    const F0Sequence f = seq({0, 123.456789, 300.25});
    const std::string path = "/tmp/svs_test_f0.f0";
    write_f0_file(path, f);
    const F0Sequence back = read_f0_file(path);
    REQUIRE(back.size() == f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        CHECK(back.values[i] == doctest::Approx(f.values[i]).epsilon(1e-6));
    }
}
