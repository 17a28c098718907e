#include "svs/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "svs/audio.hpp"
#include "svs/pitch.hpp"
#include "svs/prompt.hpp"
#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;

namespace {

constexpr int kHarmonics = 10;

// Two fixed spectral envelopes: the "male" proxy decays steeply from the
// fundamental, the "female" proxy peaks around the fourth harmonic. Their
// spectral centroids separate cleanly at any F0 the corpus uses.
double harmonic_amp(Gender g, int h) {
    if (g == Gender::male) return std::exp(-0.55 * (h - 1));
    const double d = h - 4.0;
    return std::exp(-0.25 * d * d);
}

double mean_f0_for(Gender g, VocalRange r, Rng& rng) {
    if (g == Gender::male) {
        return r == VocalRange::low ? rng.uniform(95.0, 118.0) : rng.uniform(135.0, 170.0);
    }
    return r == VocalRange::low ? rng.uniform(210.0, 285.0) : rng.uniform(320.0, 400.0);
}

const char* kPhonemeSet[] = {"a", "e", "i", "o", "u", "ka", "se", "mi", "no", "lu"};

}  // namespace

ToyUtterance synthesize_toy_utterance(Gender gender, VocalRange range, Volume volume,
                                      int frames, int sample_rate, int hop, Rng& rng) {
    require_input(frames >= 8, "toy corpus: need at least 8 frames per utterance");
    ToyUtterance utt;
    utt.gender = gender;
    utt.range = range;
    utt.volume = volume;

    // note plan: lead rest, two or three notes around the bucket mean with a
    // possible one-frame rest inside
    const double base = mean_f0_for(gender, range, rng);
    const int n_notes = 2 + static_cast<int>(rng.uniform_int(2));
    const int lead_rest = 1;
    int remaining = frames - lead_rest;
    std::vector<int> note_frames(n_notes, 0);
    for (int i = 0; i < n_notes; ++i) {
        const int min_len = 3;
        const int still_needed = (n_notes - i - 1) * min_len;
        const int len = i == n_notes - 1
                            ? remaining
                            : min_len + static_cast<int>(rng.uniform_int(
                                            std::max<int64_t>(1, remaining - still_needed -
                                                                     min_len + 1)));
        note_frames[i] = len;
        remaining -= len;
    }

    utt.f0.assign(frames, 0.0);
    utt.phonemes.clear();
    utt.durations_sec.clear();
    const double frame_sec = static_cast<double>(hop) / sample_rate;
    utt.phonemes.push_back("sil");
    utt.durations_sec.push_back(lead_rest * frame_sec);
    int cursor = lead_rest;
    const double vibrato_phase = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < n_notes; ++i) {
        const double semitones = rng.uniform(-3.0, 3.0);
        const double f0 = base * std::pow(2.0, semitones / 12.0);
        for (int f = 0; f < note_frames[i] && cursor + f < frames; ++f) {
            // mild vibrato, well under the 20% pitch-error threshold
            const double t_sec = (cursor + f) * frame_sec;
            const double vib =
                1.0 + 0.012 * std::sin(2.0 * M_PI * 5.5 * t_sec + vibrato_phase);
            utt.f0[cursor + f] = f0 * vib;
        }
        utt.phonemes.push_back(kPhonemeSet[rng.uniform_int(10)]);
        utt.durations_sec.push_back(note_frames[i] * frame_sec);
        cursor += note_frames[i];
    }

    // additive synthesis with per-harmonic phase continuity
    const size_t n_samples = static_cast<size_t>(frames) * hop;
    utt.samples.assign(n_samples, 0.0f);
    std::vector<double> phase(kHarmonics, 0.0);
    const double nyquist = sample_rate / 2.0;
    for (size_t n = 0; n < n_samples; ++n) {
        const int frame = static_cast<int>(n / hop);
        const double f0 = utt.f0[frame];
        if (f0 <= 0.0) continue;
        double s = 0.0;
        for (int h = 1; h <= kHarmonics; ++h) {
            if (h * f0 >= nyquist * 0.95) break;
            phase[h - 1] += 2.0 * M_PI * h * f0 / sample_rate;
            s += harmonic_amp(gender, h) * std::sin(phase[h - 1]);
        }
        // short ramp at voiced-run edges against clicks
        const size_t in_frame = n % hop;
        double ramp = 1.0;
        const bool prev_voiced = frame > 0 && utt.f0[frame - 1] > 0.0;
        const bool next_voiced = frame + 1 < frames && utt.f0[frame + 1] > 0.0;
        const size_t ramp_len = 120;
        if (!prev_voiced && in_frame < ramp_len) {
            ramp = 0.5 - 0.5 * std::cos(M_PI * in_frame / ramp_len);
        } else if (!next_voiced && in_frame >= hop - ramp_len) {
            ramp = 0.5 - 0.5 * std::cos(M_PI * (hop - 1 - in_frame) / ramp_len);
        }
        utt.samples[n] = static_cast<float>(s * ramp);
    }

    // place utterance RMS uniformly inside the requested band
    const VolumeBands bands;
    const auto& band = bands.band(volume);
    const double target = rng.uniform(band[0], band[1]);
    const double current = rms(utt.samples);
    require_input(current > 1e-9, "toy corpus: synthesized silence");
    const double scale = target / current;
    for (auto& s : utt.samples) s = static_cast<float>(s * scale);
    utt.rms_value = rms(utt.samples);
    return utt;
}

ToyCorpusResult generate_toy_corpus(const std::filesystem::path& dir,
                                    const ToyCorpusConfig& cfg) {
    std::filesystem::create_directories(dir);
    Rng rng(cfg.seed);
    const std::filesystem::path manifest_path = dir / "manifest.jsonl";
    std::ofstream manifest(manifest_path);
    if (!manifest) throw DataError("cannot write manifest: " + manifest_path.string());

    const Gender genders[] = {Gender::male, Gender::female};
    const VocalRange ranges[] = {VocalRange::low, VocalRange::high};
    const Volume volumes[] = {Volume::low, Volume::medium, Volume::high};

    for (int i = 0; i < cfg.items; ++i) {
        // cycle the label grid so every combination appears evenly
        const Gender g = genders[i % 2];
        const VocalRange r = ranges[(i / 2) % 2];
        const Volume v = volumes[(i / 4) % 3];
        ToyUtterance utt = synthesize_toy_utterance(g, r, v, cfg.frames, cfg.sample_rate,
                                                    cfg.hop, rng);
        char name[64];
        std::snprintf(name, sizeof(name), "utt%04d", i);
        const std::string wav_name = std::string(name) + ".wav";
        const std::string f0_name = std::string(name) + ".f0";
        write_wav(dir / wav_name, utt.samples, cfg.sample_rate);
        F0Sequence f0;
        f0.values = utt.f0;
        write_f0_file((dir / f0_name).string(), f0);

        json row{{"id", name},
                 {"audio", wav_name},
                 {"phonemes", utt.phonemes},
                 {"durations", utt.durations_sec},
                 {"f0", f0_name},
                 {"gender", to_string(g)},
                 {"sample_rate", cfg.sample_rate}};
        manifest << row.dump() << "\n";
    }
    return ToyCorpusResult{manifest_path, cfg.items};
}

}  // namespace svs
