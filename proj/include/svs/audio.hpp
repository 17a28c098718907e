#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace svs {

struct Wav {
    int sample_rate = 0;
    std::vector<float> samples;  // mono, [-1, 1]
};

Wav read_wav(const std::filesystem::path& path);

// Mono 16-bit PCM. Samples are clamped to [-1, 1] before quantization.
void write_wav(const std::filesystem::path& path, const std::vector<float>& samples,
               int sample_rate);

double rms(const std::vector<float>& samples);

}  // namespace svs
