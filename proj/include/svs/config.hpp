#pragma once

#include <filesystem>
#include <string>

#include "svs/codec.hpp"
#include "svs/model.hpp"
#include "svs/prompt.hpp"

namespace svs {

inline constexpr const char* kVersionString = "svs-0.1.0";

struct PromptPipelineConfig {
    double p1 = 0.05;
    double p2 = 0.05;
    VolumeBands bands;
    RangeThresholds thresholds;
};

struct DataMixSpec {
    double singing_hours_cap = -1.0;  // < 0 means unlimited
    double speech_hours_cap = -1.0;
};

struct TrainSettings {
    int steps = 3000;
    int batch_size = 8;
    float lr = 1e-3f;
    int codec_epochs = 12;
    double volume_augment_prob = 0.5;
    int log_every = 100;
};

struct PromptEncoderConfig {
    std::string backend = "toy";
    bool pooled = false;
    int width = 32;
    uint64_t toy_seed = 7;
};

// Layered: compiled defaults <- config file <- explicit CLI flags. The fully
// resolved form is echoed at startup and into every run directory.
struct RunConfig {
    uint64_t seed = 0;
    bool seed_set = false;
    std::string assets_dir = "assets";
    PromptEncoderConfig prompt_encoder;
    PromptPipelineConfig prompt;
    CodecConfig codec;
    ModelConfig model;
    SamplingConfig sampling;
    DataMixSpec data_mix;
    TrainSettings train;

    static RunConfig defaults();
    static RunConfig from_file(const std::filesystem::path& path);
    // merge a partial JSON document (flag overrides) on top
    void apply_json(const std::string& json_text);

    std::string resolved_json() const;
    void require_seed() const;  // training commands refuse to run unseeded
};

}  // namespace svs
