#pragma once

#include <string>
#include <vector>

namespace svs {

// Frame-level fundamental frequency, one value per acoustic frame.
// 0 is the sole unvoiced sentinel.
struct F0Sequence {
    std::vector<double> values;

    size_t size() const { return values.size(); }
    bool voiced(size_t i) const { return values[i] > 0.0; }
};

// Range/melody split: a scalar vocal-range factor (mean voiced F0, rounded)
// and a melody sequence rescaled so its voiced mean sits at the target mean.
struct DecoupledPitch {
    int range_factor = 0;
    std::vector<int> melody;  // 0 on unvoiced frames
};

inline constexpr double kMelodyTargetMeanHz = 230.0;

double voiced_mean(const F0Sequence& f0);

DecoupledPitch decompose_f0(const F0Sequence& f0, double target_mean = kMelodyTargetMeanHz);

F0Sequence recompose_f0(const DecoupledPitch& d, double target_mean = kMelodyTargetMeanHz);

// Sidecar format: one value per line, text.
F0Sequence read_f0_file(const std::string& path);
void write_f0_file(const std::string& path, const F0Sequence& f0);

}  // namespace svs
