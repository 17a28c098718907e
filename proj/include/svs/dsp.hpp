#pragma once

#include <vector>

#include "svs/pitch.hpp"

namespace svs {

struct MelConfig {
    int sample_rate = 24000;
    int hop = 480;
    int win = 1024;   // also the FFT size; power of two
    int n_mels = 48;
    double fmin = 40.0;
    double fmax = 11000.0;
    double log_floor = 1e-5;
};

// Frame t covers samples [t*hop, t*hop + win), zero-padded past the end, so
// the frame count is exactly ceil(n / hop).
int frame_count(size_t n_samples, int hop);

// Linear-frequency magnitude spectrogram, frames x (win/2 + 1).
std::vector<std::vector<double>> stft_magnitude(const std::vector<float>& samples,
                                                const MelConfig& cfg);

class MelExtractor {
  public:
    explicit MelExtractor(const MelConfig& cfg);

    const MelConfig& config() const { return cfg_; }

    // frames x n_mels, linear magnitude domain
    std::vector<std::vector<double>> linear_mel(const std::vector<float>& samples) const;
    // log(linear + floor)
    std::vector<std::vector<double>> log_mel(const std::vector<float>& samples) const;
    std::vector<std::vector<double>> to_log(const std::vector<std::vector<double>>& linear) const;

    // Invert log-mel frames back to a waveform with Griffin-Lim phase
    // recovery. Deterministic (zero initial phase, fixed iteration count).
    std::vector<float> reconstruct(const std::vector<std::vector<double>>& log_mel_frames,
                                   int n_iters = 32) const;

  private:
    MelConfig cfg_;
    int n_bins_;
    std::vector<std::vector<double>> filterbank_;   // n_mels x n_bins
    std::vector<std::vector<double>> inverse_fb_;   // n_bins x n_mels (pseudo-inverse, clamped)
    std::vector<double> window_;
};

struct F0EstimatorConfig {
    int hop = 480;
    int window = 1536;
    double fmin = 55.0;
    double fmax = 600.0;
    double voicing_threshold = 0.5;   // normalized autocorrelation peak
    double energy_floor = 1e-3;       // frame RMS below this is unvoiced
};

// Normalized-autocorrelation pitch tracker. One value per hop, 0 = unvoiced.
F0Sequence estimate_f0(const std::vector<float>& samples, int sample_rate,
                       const F0EstimatorConfig& cfg = {});

}  // namespace svs
