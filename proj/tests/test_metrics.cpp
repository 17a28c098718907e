#include <doctest.h>

#include <cmath>

#include "svs/audio.hpp"
#include "svs/metrics.hpp"
#include "svs/synthdata.hpp"

using namespace svs;

namespace {

F0Sequence seq(std::vector<double> v) {
    F0Sequence f;
    f.values = std::move(v);
    return f;
}

}  // namespace

TEST_CASE("metrics: rffe of identical sequences is exactly zero") {
    const F0Sequence x = seq({0, 220, 230, 0, 240});
    CHECK(rffe(x, x) == 0.0);
}

TEST_CASE("metrics: rffe ignores a pure vocal-range offset") {
    const F0Sequence ref = seq({0, 200, 220, 240, 0, 260});
    F0Sequence syn = ref;
    for (auto& v : syn.values) v *= 1.5;  // same melody, shifted range
    CHECK(rffe(syn, ref) == 0.0);
}

TEST_CASE("metrics: rffe counts voicing mismatches as full errors") {
    // reference voiced everywhere; synthesis unvoiced on the second half,
    // matching on the first half
    const F0Sequence ref = seq({200, 210, 220, 230, 200, 210, 220, 230});
    const F0Sequence syn = seq({200, 210, 220, 230, 0, 0, 0, 0});
    CHECK(rffe(syn, ref) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("metrics: rffe hand-counted three-frame cases") {
    // equal means, no rescaling effect; middle frame deviates by 25% (error),
    // last by 10% (fine)
    {
        const F0Sequence ref = seq({200, 200, 200});
        const F0Sequence syn = seq({200, 250, 180});
        // means: ref 200, syn 210 -> common 205; syn scale 205/210, ref scale 205/200
        // frame 0: 195.24 vs 205 -> ratio 1.05 (ok)
        // frame 1: 244.05 vs 205 -> ratio 1.19 (ok, just under 1.2)
        // frame 2: 175.71 vs 205 -> ratio 1.167 (ok)
        CHECK(rffe(syn, ref) == doctest::Approx(0.0).epsilon(1e-12));
    }
    {
        // one voicing mismatch out of three frames
        const F0Sequence ref = seq({200, 0, 200});
        const F0Sequence syn = seq({200, 210, 200});
        CHECK(rffe(syn, ref) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    {
        // both voiced but 30% apart after equal-mean rescaling
        const F0Sequence ref = seq({100, 200, 300});
        const F0Sequence syn = seq({100, 260, 240});
        // means equal (200): no rescale; frame1 ratio 1.3 (error), frame2 0.8 -> 300/240=1.25 (error)
        CHECK(rffe(syn, ref) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("metrics: rffe symmetry and joint transposition invariance") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        F0Sequence a, b;
        const int n = 20;
        a.values.resize(n);
        b.values.resize(n);
        for (int i = 0; i < n; ++i) {
            a.values[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(100.0, 400.0);
            b.values[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(100.0, 400.0);
        }
        a.values[0] = 200.0;
        b.values[0] = 210.0;
        const double ab = rffe(a, b);
        CHECK(std::abs(ab - rffe(b, a)) <= 1e-12);
        const double c = rng.uniform(0.3, 3.0);
        F0Sequence ca = a, cb = b;
        for (auto& v : ca.values) v *= c;
        for (auto& v : cb.values) v *= c;
        CHECK(std::abs(rffe(ca, cb) - ab) <= 1e-12);
    }
}

TEST_CASE("metrics: rffe error conditions") {
    CHECK_THROWS_AS(rffe(seq({100, 200}), seq({100})), InvalidInputError);
    CHECK_THROWS_AS(rffe(seq({0, 0}), seq({100, 200})), InvalidInputError);
    CHECK_THROWS_AS(rffe(seq({100, 200}), seq({0, 0})), InvalidInputError);
}

TEST_CASE("metrics: soft accuracy closed form") {
    CHECK(soft_accuracy(0.08, 0.07, 0.10, 20.0) == 100.0);
    CHECK(soft_accuracy(135.0, 125.0, 125.0, 0.05) ==
          doctest::Approx(100.0 * std::exp(-0.5)).epsilon(1e-9));
    CHECK(soft_accuracy(0.22, 0.16, 0.20, 10.0) ==
          doctest::Approx(100.0 * std::exp(-0.2)).epsilon(1e-9));
    // continuity at the boundary and strict decrease outside
    CHECK(soft_accuracy(0.20 + 1e-12, 0.16, 0.20, 10.0) == doctest::Approx(100.0));
    double prev = 100.0;
    for (double eps = 0.001; eps < 0.1; eps += 0.001) {
        const double v = soft_accuracy(0.20 + eps, 0.16, 0.20, 10.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK_THROWS_AS(soft_accuracy(1.0, 2.0, 1.0, 10.0), InvalidInputError);
    CHECK_THROWS_AS(soft_accuracy(1.0, 0.0, 1.0, 0.0), InvalidInputError);
}

TEST_CASE("metrics: gender classifier separates the two toy timbres") {
    Rng rng(42);
    std::vector<SpectralGenderClassifier::TrainItem> items;
    for (int i = 0; i < 24; ++i) {
        const Gender g = i % 2 == 0 ? Gender::male : Gender::female;
        const VocalRange r = (i / 2) % 2 == 0 ? VocalRange::low : VocalRange::high;
        const Volume v = static_cast<Volume>(1 + (i / 4) % 3);
        const ToyUtterance utt = synthesize_toy_utterance(g, r, v, 18, 24000, 480, rng);
        items.push_back({utt.samples, 24000, g});
    }
    SpectralGenderClassifier clf;
    const double train_acc = clf.train(items);
    CHECK(train_acc > 0.95);

    // deterministic per input after training, and correct on fresh items
    int correct = 0;
    for (int i = 0; i < 10; ++i) {
        const Gender g = i % 2 == 0 ? Gender::male : Gender::female;
        const ToyUtterance utt = synthesize_toy_utterance(g, VocalRange::low, Volume::medium,
                                                          18, 24000, 480, rng);
        const auto [pred1, conf1] = clf.classify(utt.samples, 24000);
        const auto [pred2, conf2] = clf.classify(utt.samples, 24000);
        CHECK(pred1 == pred2);
        CHECK(conf1 == conf2);
        if (pred1 == g) ++correct;
    }
    CHECK(correct >= 9);

    // persistence round trip
    const auto path = std::filesystem::temp_directory_path() / "svs_clf.json";
    clf.save(path);
    const SpectralGenderClassifier back = SpectralGenderClassifier::load(path);
    const ToyUtterance probe = synthesize_toy_utterance(Gender::female, VocalRange::high,
                                                        Volume::medium, 18, 24000, 480, rng);
    CHECK(back.classify(probe.samples, 24000).first ==
          clf.classify(probe.samples, 24000).first);
}

TEST_CASE("metrics: classifier refuses to classify before training") {
    SpectralGenderClassifier clf;
    CHECK_THROWS_AS(clf.classify(std::vector<float>(1000, 0.1f), 24000), InvalidInputError);
}

TEST_CASE("metrics: evaluate_batch on exactly-on-target items") {
    const auto dir = std::filesystem::temp_directory_path() / "svs_eval_items";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    Rng rng(43);
    // train a classifier on one set
    std::vector<SpectralGenderClassifier::TrainItem> train_items;
    for (int i = 0; i < 16; ++i) {
        const Gender g = i % 2 == 0 ? Gender::male : Gender::female;
        const ToyUtterance utt = synthesize_toy_utterance(
            g, (i / 2) % 2 == 0 ? VocalRange::low : VocalRange::high,
            static_cast<Volume>(1 + (i / 4) % 3), 18, 24000, 480, rng);
        train_items.push_back({utt.samples, 24000, g});
    }
    SpectralGenderClassifier clf;
    clf.train(train_items);

    // evaluate fresh on-target items (volume exactly in band, range on the
    // requested side, reference f0 = their own f0)
    std::vector<EvalItem> items;
    for (int i = 0; i < 8; ++i) {
        const Gender g = i % 2 == 0 ? Gender::male : Gender::female;
        const VocalRange r = (i / 2) % 2 == 0 ? VocalRange::low : VocalRange::high;
        const Volume v = Volume::medium;
        const ToyUtterance utt = synthesize_toy_utterance(g, r, v, 18, 24000, 480, rng);
        char name[32];
        std::snprintf(name, sizeof(name), "item%02d", i);
        write_wav(dir / (std::string(name) + ".wav"), utt.samples, 24000);
        F0Sequence f0;
        f0.values = utt.f0;
        write_f0_file((dir / (std::string(name) + ".f0")).string(), f0);
        EvalItem item;
        item.id = name;
        item.audio = dir / (std::string(name) + ".wav");
        item.intended.gender = g;
        item.intended.volume = v;
        item.intended.vocal_range = r;
        item.reference_f0 = dir / (std::string(name) + ".f0");
        items.push_back(std::move(item));
    }
    const EvalReport report = evaluate_batch(items, &clf);
    CHECK(report.items_skipped == 0);
    CHECK(report.volume_accuracy == doctest::Approx(100.0));
    CHECK(report.range_accuracy > 90.0);
    CHECK(report.gender_accuracy_female > 95.0);
    CHECK(report.gender_accuracy_male > 95.0);
    CHECK(report.rffe_mean < 0.1);
    CHECK(report.volume_count == 8);
    CHECK(report.rffe_count == 8);

    // permutation invariance of the means
    std::vector<EvalItem> shuffled = items;
    std::swap(shuffled[0], shuffled[5]);
    std::swap(shuffled[2], shuffled[7]);
    const EvalReport report2 = evaluate_batch(shuffled, &clf);
    CHECK(report2.volume_accuracy == doctest::Approx(report.volume_accuracy));
    CHECK(report2.range_accuracy == doctest::Approx(report.range_accuracy));
    CHECK(report2.rffe_mean == doctest::Approx(report.rffe_mean));
}

TEST_CASE("metrics: items missing requirements are skipped with diagnostics") {
    std::vector<EvalItem> items;
    EvalItem missing;
    missing.id = "gone";
    missing.audio = "/nonexistent/file.wav";
    missing.intended.volume = Volume::low;
    items.push_back(missing);
    const EvalReport report = evaluate_batch(items, nullptr);
    CHECK(report.items_total == 1);
    CHECK(report.items_skipped == 1);
    CHECK(report.volume_count == 0);
    REQUIRE(report.items.size() == 1);
    CHECK(report.items[0].skipped);
    CHECK(!report.items[0].note.empty());
}

TEST_CASE("metrics: single item with rms 0.18 intended high scores 100") {
    const auto dir = std::filesystem::temp_directory_path() / "svs_eval_vol";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    Rng rng(44);
    ToyUtterance utt = synthesize_toy_utterance(Gender::male, VocalRange::low, Volume::high,
                                                18, 24000, 480, rng);
    // force rms to exactly 0.18
    const double scale = 0.18 / utt.rms_value;
    for (auto& s : utt.samples) s = static_cast<float>(s * scale);
    write_wav(dir / "x.wav", utt.samples, 24000);
    EvalItem item;
    item.id = "x";
    item.audio = dir / "x.wav";
    item.intended.volume = Volume::high;
    const EvalReport report = evaluate_batch({item}, nullptr);
    CHECK(report.volume_accuracy == doctest::Approx(100.0));
}
