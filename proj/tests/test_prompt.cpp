#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <map>

#include "svs/audio.hpp"
#include "svs/prompt.hpp"

using namespace svs;

namespace {

std::filesystem::path assets_dir() {
    const char* env = std::getenv("SVS_ASSETS");
    return env != nullptr ? std::filesystem::path(env) : std::filesystem::path("assets");
}

AttributeLabels full_labels() {
    AttributeLabels l;
    l.gender = Gender::male;
    l.volume = Volume::high;
    l.vocal_range = VocalRange::high;
    return l;
}

}  // namespace

TEST_CASE("prompt: volume categorization follows the three closed bands") {
    CHECK(categorize_volume(0.03) == Volume::low);
    CHECK(categorize_volume(0.085) == Volume::medium);
    CHECK(categorize_volume(0.18) == Volume::high);
    CHECK(categorize_volume(0.05) == Volume::absent);   // inter-band gap
    CHECK(categorize_volume(0.0) == Volume::absent);
    CHECK(categorize_volume(0.25) == Volume::absent);
    // boundaries are inclusive on both ends
    CHECK(categorize_volume(0.02) == Volume::low);
    CHECK(categorize_volume(0.04) == Volume::low);
    CHECK(categorize_volume(0.07) == Volume::medium);
    CHECK(categorize_volume(0.10) == Volume::medium);
    CHECK(categorize_volume(0.16) == Volume::high);
    CHECK(categorize_volume(0.20) == Volume::high);
    CHECK_THROWS_AS(categorize_volume(-0.01), InvalidInputError);
}

TEST_CASE("prompt: exhaustive rms scan yields exactly three closed bands in order") {
    // pure step function: count the maximal non-absent runs on a fine grid
    int runs = 0;
    Volume prev = Volume::absent;
    std::vector<Volume> run_categories;
    for (int i = 0; i <= 2500; ++i) {
        const double rms_value = i * 1e-4;
        const Volume v = categorize_volume(rms_value);
        if (v != Volume::absent && prev == Volume::absent) {
            ++runs;
            run_categories.push_back(v);
        }
        if (v != Volume::absent && prev != Volume::absent) {
            CHECK(v == prev);  // no category change inside a band
        }
        prev = v;
    }
    CHECK(runs == 3);
    REQUIRE(run_categories.size() == 3);
    CHECK(run_categories[0] == Volume::low);
    CHECK(run_categories[1] == Volume::medium);
    CHECK(run_categories[2] == Volume::high);
}

TEST_CASE("prompt: vocal range categorization per gender-specific threshold") {
    CHECK(categorize_range(120, Gender::male) == VocalRange::low);
    CHECK(categorize_range(310, Gender::female) == VocalRange::high);
    CHECK(categorize_range(125, Gender::male) == VocalRange::low);    // tie-break
    CHECK(categorize_range(305, Gender::female) == VocalRange::low);  // tie-break
    CHECK(categorize_range(126, Gender::male) == VocalRange::high);
    CHECK_THROWS_AS(categorize_range(200, Gender::absent), InvalidInputError);
    CHECK_THROWS_AS(categorize_range(0.0, Gender::male), InvalidInputError);
}

TEST_CASE("prompt: zero drop probabilities keep labels unchanged") {
    Rng rng(1);
    const AttributeLabels l = full_labels();
    for (int i = 0; i < 100; ++i) {
        CHECK(drop_labels(l, 0.0, 0.0, rng) == l);
    }
}

TEST_CASE("prompt: dropping gender cascades to vocal range") {
    const AttributeLabels l = full_labels();
    bool saw_cascade = false;
    for (uint64_t seed = 0; seed < 64; ++seed) {
        Rng rng(seed);
        const AttributeLabels out = drop_labels(l, 1.0, 0.0, rng);
        // exactly one of the three single-drop outcomes
        const bool gender_dropped =
            out.gender == Gender::absent && out.volume == Volume::high &&
            out.vocal_range == VocalRange::absent;
        const bool volume_dropped = out.gender == Gender::male &&
                                    out.volume == Volume::absent &&
                                    out.vocal_range == VocalRange::high;
        const bool range_dropped = out.gender == Gender::male &&
                                   out.volume == Volume::high &&
                                   out.vocal_range == VocalRange::absent;
        CHECK((gender_dropped || volume_dropped || range_dropped));
        saw_cascade = saw_cascade || gender_dropped;
    }
    CHECK(saw_cascade);
}

TEST_CASE("prompt: drop frequency matches the closed form over a million draws") {
    const double p1 = 0.05, p2 = 0.05;
    const AttributeLabels l = full_labels();
    Rng rng(7);
    const int n = 1000000;
    int with_drop = 0;
    for (int i = 0; i < n; ++i) {
        const AttributeLabels out = drop_labels(l, p1, p2, rng);
        if (out.present_count() < 3) ++with_drop;
        // invariants on every draw
        CHECK(out.present_count() >= 1);
        CHECK(out.valid());
    }
    // starting from three present labels no drop is ever reverted, so the
    // fraction with at least one drop is exactly 1 - (1-p1)(1-p2)
    const double expected = 1.0 - (1.0 - p1) * (1.0 - p2);
    const double measured = static_cast<double>(with_drop) / n;
    CHECK(measured == doctest::Approx(expected).epsilon(0.011));
    CHECK(std::abs(measured - expected) < 0.001);
}

TEST_CASE("prompt: single present label survives even at p = 1") {
    AttributeLabels l;
    l.volume = Volume::low;
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const AttributeLabels out = drop_labels(l, 1.0, 1.0, rng);
        CHECK(out.volume == Volume::low);  // the all-absent guard reverts the drop
    }
}

TEST_CASE("prompt: assemble replaces the placeholder with a drawn keyword") {
    KeywordBank bank;
    bank.entries[Attribute::gender]["female"] = {"lady"};
    PromptTemplate tpl;
    tpl.id = "t1";
    tpl.text = "Generate a song by a [gender] singer.";
    tpl.covered = {Attribute::gender};

    AttributeLabels l;
    l.gender = Gender::female;
    Rng rng(4);
    const PromptSample sample = assemble_prompt(l, bank, {tpl}, rng);
    CHECK(sample.sentence == "Generate a song by a lady singer.");
    CHECK(sample.template_id == "t1");
    CHECK(sample.keyword_choices.at(Attribute::gender) == "lady");
}

TEST_CASE("prompt: missing combination raises a config error naming it") {
    KeywordBank bank;
    bank.entries[Attribute::gender]["male"] = {"man"};
    PromptTemplate tpl;
    tpl.id = "t1";
    tpl.text = "A [gender] voice.";
    tpl.covered = {Attribute::gender};

    AttributeLabels l;
    l.gender = Gender::male;
    l.volume = Volume::low;
    Rng rng(5);
    try {
        assemble_prompt(l, bank, {tpl}, rng);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gender") != std::string::npos);
        CHECK(msg.find("volume") != std::string::npos);
    }
}

TEST_CASE("prompt: shipped assets load, cover all combinations, and stay bracket-free") {
    const PromptAssets assets = load_prompt_assets(assets_dir());

    // keyword bank: every category has at least 4 entries
    for (const auto& [attr, cats] : assets.bank.entries) {
        for (const auto& [cat, words] : cats) {
            CAPTURE(cat);
            CHECK(words.size() >= 4);
        }
    }
    // roughly 50 templates per attribute count
    std::map<size_t, int> by_count;
    for (const auto& t : assets.train_templates) ++by_count[t.covered.size()];
    CHECK(by_count[1] >= 45);
    CHECK(by_count[2] >= 45);
    CHECK(by_count[3] >= 45);

    // no assembled sentence ever keeps a placeholder, labels drawn at random
    Rng rng(6);
    const Gender genders[] = {Gender::male, Gender::female};
    const Volume volumes[] = {Volume::absent, Volume::low, Volume::medium, Volume::high};
    const VocalRange ranges[] = {VocalRange::absent, VocalRange::low, VocalRange::high};
    int assemblies = 0;
    while (assemblies < 100000) {
        AttributeLabels l;
        l.gender = rng.uniform() < 0.3 ? Gender::absent : genders[rng.uniform_int(2)];
        l.volume = volumes[rng.uniform_int(4)];
        l.vocal_range = l.gender == Gender::absent ? VocalRange::absent
                                                   : ranges[rng.uniform_int(3)];
        if (l.present_count() == 0) continue;
        const PromptSample s =
            assemble_prompt(l, assets.bank, assets.train_templates, rng);
        CHECK(s.sentence.find('[') == std::string::npos);
        CHECK(s.sentence.find(']') == std::string::npos);
        ++assemblies;
    }
}

TEST_CASE("prompt: keyword draws are uniform within 2 percent") {
    const PromptAssets assets = load_prompt_assets(assets_dir());
    AttributeLabels l;
    l.gender = Gender::female;
    Rng rng(8);
    std::map<std::string, int> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const PromptSample s =
            assemble_prompt(l, assets.bank, assets.train_templates, rng);
        ++counts[s.keyword_choices.at(Attribute::gender)];
    }
    const auto& words = assets.bank.keywords(Attribute::gender, "female");
    const double expected = 1.0 / static_cast<double>(words.size());
    for (const auto& w : words) {
        const double freq = static_cast<double>(counts[w]) / n;
        CHECK(std::abs(freq - expected) < 0.02);
    }
}

TEST_CASE("prompt: category-specific templates only match their category") {
    const PromptAssets assets = load_prompt_assets(assets_dir());
    AttributeLabels l;
    l.volume = Volume::low;
    Rng rng(9);
    for (int i = 0; i < 2000; ++i) {
        const PromptSample s =
            assemble_prompt(l, assets.bank, assets.train_templates, rng);
        if (s.template_id == "v006" || s.template_id == "v007") {
            FAIL("high-volume specific template drawn for a low-volume label");
        }
    }
}

TEST_CASE("prompt: volume rescaling lands in the band and scales linearly") {
    Rng rng(10);
    std::vector<float> wave(4800);
    for (size_t i = 0; i < wave.size(); ++i) {
        wave[i] = 0.3f * std::sin(2.0 * M_PI * 220.0 * i / 24000.0);
    }
    const double original = rms(wave);

    for (int i = 0; i < 50; ++i) {
        const auto [scaled, new_rms] = rescale_volume_augment(wave, Volume::high, rng);
        CHECK(new_rms >= 0.16);
        CHECK(new_rms <= 0.20);
        CHECK(rms(scaled) == doctest::Approx(new_rms).epsilon(1e-6));
        // pure multiplicative rescale
        const double ratio = scaled[100] / wave[100];
        CHECK(ratio == doctest::Approx(new_rms / original).epsilon(1e-5));
    }

    // rms(c x) = c rms(x) for random signals
    for (int i = 0; i < 20; ++i) {
        std::vector<float> x(1000);
        for (auto& s : x) s = rng.normal_f(0.0f, 0.1f);
        const double c = rng.uniform(0.1, 3.0);
        std::vector<float> cx = x;
        for (auto& s : cx) s = static_cast<float>(s * c);
        CHECK(rms(cx) == doctest::Approx(c * rms(x)).epsilon(1e-5));
    }

    CHECK_THROWS_AS(rescale_volume_augment(std::vector<float>(100, 0.0f), Volume::low, rng),
                    InvalidInputError);
}

TEST_CASE("prompt: clipping rescale retries in the lower half of the band") {
    Rng rng(11);
    // peak/rms ratio tuned so the top of the medium band clips but the lower
    // half never does
    std::vector<float> spiky(24000);
    for (size_t i = 0; i < spiky.size(); ++i) {
        spiky[i] = 0.0636f * std::sin(2.0 * M_PI * 200.0 * i / 24000.0);
    }
    spiky[1000] = 0.5f;
    const double ratio = rms(spiky) / 0.5;  // max clip-free target rms
    REQUIRE(ratio > 0.085);
    REQUIRE(ratio < 0.10);
    bool saw_lower_half_retry = false;
    for (int i = 0; i < 200; ++i) {
        const auto [scaled, new_rms] = rescale_volume_augment(spiky, Volume::medium, rng);
        float peak = 0.0f;
        for (float s : scaled) peak = std::max(peak, std::abs(s));
        CHECK(peak <= 1.0f);
        CHECK(new_rms >= 0.07);
        CHECK(new_rms <= 0.10);
        saw_lower_half_retry = saw_lower_half_retry || new_rms <= 0.085;
    }
    CHECK(saw_lower_half_retry);
}
