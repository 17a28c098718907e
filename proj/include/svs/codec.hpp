#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "svs/dsp.hpp"
#include "svs/nn.hpp"

namespace svs {

// T x n_q grid of codebook indices, the transformer's prediction target.
struct AcousticUnitSequence {
    int n_q = 0;
    int codebook_size = 0;
    std::vector<uint16_t> units;  // row-major, frame-major

    int frames() const {
        return n_q == 0 ? 0 : static_cast<int>(units.size()) / n_q;
    }
    int at(int t, int c) const { return units[static_cast<size_t>(t) * n_q + c]; }
    void set(int t, int c, int k) {
        units[static_cast<size_t>(t) * n_q + c] = static_cast<uint16_t>(k);
    }
    void validate() const;  // rectangular with in-range indices
};

// 16-byte header (magic "SVSU", T, n_q, K_a), then little-endian uint16 grid.
void write_units_file(const std::filesystem::path& path, const AcousticUnitSequence& units);
AcousticUnitSequence read_units_file(const std::filesystem::path& path);

struct CodecConfig {
    int n_q = 3;             // quantization levels used as acoustic units
    int total_levels = 12;   // trained quantizer depth
    int codebook_size = 64;  // K_a
    int sample_rate = 24000;
    int hop = 480;
    int feature_dim = 24;    // RVQ latent width
    int conv_hidden = 48;
    MelConfig mel;
    // fixed affine normalization applied to log-mel before the encoder
    float mel_shift = 5.0f;
    float mel_scale = 0.25f;

    void validate() const;
};

// Greedy residual quantization against explicit codebook tables.
struct RvqResult {
    std::vector<int> indices;             // one per stage
    std::vector<double> residual_energy;  // ||residual||^2 after each stage
};
RvqResult rvq_quantize(const std::vector<float>& feature,
                       const std::vector<nn::Tensor>& codebooks);

struct CodecTrainStats {
    double initial_heldout_loss = 0.0;
    double final_heldout_loss = 0.0;
    double final_train_loss = 0.0;
    std::vector<double> codebook_utilization;  // per used level, fraction of entries hit
};

// Toy residual-vector-quantized autoencoder over log-mel frames. The decoder
// plus Griffin-Lim stands in for a neural vocoder at desk scale.
class Codec {
  public:
    explicit Codec(const CodecConfig& cfg, uint64_t seed = 1);

    const CodecConfig& config() const { return cfg_; }
    bool trained() const { return trained_; }

    CodecTrainStats train(const std::vector<std::vector<std::vector<double>>>& train_mels,
                          const std::vector<std::vector<std::vector<double>>>& heldout_mels,
                          int epochs, uint64_t seed);

    AcousticUnitSequence encode(const std::vector<float>& audio, int sample_rate) const;
    // n_q_override <= 0 means the configured n_q
    AcousticUnitSequence encode_features(const std::vector<std::vector<double>>& log_mel,
                                         int n_q_override = -1) const;
    std::vector<std::vector<double>> decode_features(const AcousticUnitSequence& units) const;
    std::vector<float> decode(const AcousticUnitSequence& units) const;

    std::vector<std::vector<double>> extract_log_mel(const std::vector<float>& audio) const;
    std::vector<std::vector<double>> extract_linear_mel(const std::vector<float>& audio) const;
    std::vector<std::vector<double>> log_from_linear(
        const std::vector<std::vector<double>>& linear) const;
    double reconstruction_distortion(const std::vector<std::vector<double>>& log_mel,
                                     int n_q_used) const;  // mean squared log-mel error

    const std::vector<nn::Tensor>& codebooks() const { return codebooks_; }

    void save(const std::filesystem::path& path) const;
    static Codec load(const std::filesystem::path& path);

  private:
    nn::Graph::Var encode_graph(nn::Graph& g, const nn::Tensor& mel_norm) const;
    nn::Graph::Var decode_graph(nn::Graph& g, nn::Graph::Var latent) const;
    nn::Tensor normalized_mel(const std::vector<std::vector<double>>& log_mel) const;

    CodecConfig cfg_;
    MelExtractor mel_;
    nn::ParamStore params_;
    std::vector<nn::Tensor> codebooks_;  // total_levels x [K, D]
    bool trained_ = false;
};

}  // namespace svs
