#pragma once

#include <filesystem>
#include <vector>

#include "svs/common.hpp"
#include "svs/features.hpp"

namespace svs {

// Synthetic benchmark corpus: two programmatically distinct timbres standing
// in for singer genders, melodies drawn from low/high range buckets per
// gender, and utterance RMS placed in one of the three volume bands. Audio is
// additive-harmonic, so ground-truth F0 is exact.
struct ToyCorpusConfig {
    int items = 220;
    int frames = 18;  // per utterance at sample_rate / hop fps
    int sample_rate = 24000;
    int hop = 480;
    CorpusKind kind = CorpusKind::singing;
    uint64_t seed = 42;
};

struct ToyCorpusResult {
    std::filesystem::path manifest;
    int items = 0;
};

ToyCorpusResult generate_toy_corpus(const std::filesystem::path& dir,
                                    const ToyCorpusConfig& cfg);

// One utterance's raw material, exposed for tests that need waveforms without
// touching the filesystem.
struct ToyUtterance {
    Gender gender = Gender::male;
    VocalRange range = VocalRange::low;
    Volume volume = Volume::medium;
    std::vector<double> f0;  // per frame, 0 = unvoiced
    std::vector<std::string> phonemes;
    std::vector<double> durations_sec;
    std::vector<float> samples;
    double rms_value = 0.0;
};

ToyUtterance synthesize_toy_utterance(Gender gender, VocalRange range, Volume volume,
                                      int frames, int sample_rate, int hop, Rng& rng);

}  // namespace svs
