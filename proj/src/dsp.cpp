#include "svs/dsp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "svs/common.hpp"
#include "svs/fft.hpp"

namespace svs {

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
    }
    return w;
}

}  // namespace

int frame_count(size_t n_samples, int hop) {
    require_input(hop > 0, "hop must be positive");
    return static_cast<int>((n_samples + hop - 1) / static_cast<size_t>(hop));
}

std::vector<std::vector<double>> stft_magnitude(const std::vector<float>& samples,
                                                const MelConfig& cfg) {
    const int n_bins = cfg.win / 2 + 1;
    const int frames = frame_count(samples.size(), cfg.hop);
    const std::vector<double> window = hann_window(cfg.win);

    std::vector<std::vector<double>> mag(frames, std::vector<double>(n_bins, 0.0));
    std::vector<double> frame(cfg.win);
    for (int t = 0; t < frames; ++t) {
        const size_t start = static_cast<size_t>(t) * cfg.hop;
        for (int i = 0; i < cfg.win; ++i) {
            const size_t idx = start + i;
            frame[i] = idx < samples.size() ? samples[idx] * window[i] : 0.0;
        }
        auto spec = rfft(frame);
        for (int b = 0; b < n_bins; ++b) mag[t][b] = std::abs(spec[b]);
    }
    return mag;
}

MelExtractor::MelExtractor(const MelConfig& cfg) : cfg_(cfg), n_bins_(cfg.win / 2 + 1) {
    require_input(cfg.win > 0 && (cfg.win & (cfg.win - 1)) == 0, "mel win must be a power of two");
    require_input(cfg.n_mels >= 2, "need at least two mel bands");
    require_input(cfg.fmin >= 0 && cfg.fmax > cfg.fmin, "bad mel frequency range");

    const double mel_lo = hz_to_mel(cfg.fmin);
    const double mel_hi = hz_to_mel(std::min(cfg.fmax, cfg.sample_rate / 2.0));
    std::vector<double> centers(cfg.n_mels + 2);
    for (int m = 0; m < cfg.n_mels + 2; ++m) {
        centers[m] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * m / (cfg.n_mels + 1));
    }

    filterbank_.assign(cfg.n_mels, std::vector<double>(n_bins_, 0.0));
    const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.win;
    for (int m = 0; m < cfg.n_mels; ++m) {
        const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
        for (int b = 0; b < n_bins_; ++b) {
            const double f = b * bin_hz;
            double w = 0.0;
            if (f > lo && f < hi) {
                w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            }
            filterbank_[m][b] = w;
        }
    }

    // Moore-Penrose pseudo-inverse for mel -> linear magnitude, clamped to
    // non-negative at use time.
    Eigen::MatrixXd fb(cfg.n_mels, n_bins_);
    for (int m = 0; m < cfg.n_mels; ++m)
        for (int b = 0; b < n_bins_; ++b) fb(m, b) = filterbank_[m][b];
    Eigen::MatrixXd pinv =
        fb.completeOrthogonalDecomposition().pseudoInverse();  // n_bins x n_mels
    inverse_fb_.assign(n_bins_, std::vector<double>(cfg.n_mels, 0.0));
    for (int b = 0; b < n_bins_; ++b)
        for (int m = 0; m < cfg.n_mels; ++m) inverse_fb_[b][m] = pinv(b, m);

    window_ = hann_window(cfg.win);
}

std::vector<std::vector<double>> MelExtractor::linear_mel(
    const std::vector<float>& samples) const {
    const auto mag = stft_magnitude(samples, cfg_);
    std::vector<std::vector<double>> mel(mag.size(), std::vector<double>(cfg_.n_mels, 0.0));
    for (size_t t = 0; t < mag.size(); ++t) {
        for (int m = 0; m < cfg_.n_mels; ++m) {
            double acc = 0.0;
            const auto& row = filterbank_[m];
            for (int b = 0; b < n_bins_; ++b) acc += row[b] * mag[t][b];
            mel[t][m] = acc;
        }
    }
    return mel;
}

std::vector<std::vector<double>> MelExtractor::to_log(
    const std::vector<std::vector<double>>& linear) const {
    std::vector<std::vector<double>> out(linear.size(),
                                         std::vector<double>(cfg_.n_mels, 0.0));
    for (size_t t = 0; t < linear.size(); ++t)
        for (int m = 0; m < cfg_.n_mels; ++m)
            out[t][m] = std::log(linear[t][m] + cfg_.log_floor);
    return out;
}

std::vector<std::vector<double>> MelExtractor::log_mel(const std::vector<float>& samples) const {
    return to_log(linear_mel(samples));
}

std::vector<float> MelExtractor::reconstruct(
    const std::vector<std::vector<double>>& log_mel_frames, int n_iters) const {
    const int frames = static_cast<int>(log_mel_frames.size());
    if (frames == 0) return {};

    // log-mel -> linear magnitude target
    std::vector<std::vector<double>> target(frames, std::vector<double>(n_bins_, 0.0));
    for (int t = 0; t < frames; ++t) {
        require_input(static_cast<int>(log_mel_frames[t].size()) == cfg_.n_mels,
                      "reconstruct: wrong mel frame width");
        for (int b = 0; b < n_bins_; ++b) {
            double acc = 0.0;
            for (int m = 0; m < cfg_.n_mels; ++m) {
                acc += inverse_fb_[b][m] *
                       std::max(0.0, std::exp(log_mel_frames[t][m]) - cfg_.log_floor);
            }
            target[t][b] = std::max(0.0, acc);
        }
    }

    const size_t n_samples = static_cast<size_t>(frames) * cfg_.hop;
    auto istft = [&](const std::vector<std::vector<std::complex<double>>>& spec) {
        std::vector<double> out(n_samples + cfg_.win, 0.0);
        std::vector<double> norm(n_samples + cfg_.win, 0.0);
        std::vector<std::complex<double>> full(cfg_.win);
        for (int t = 0; t < frames; ++t) {
            for (int b = 0; b < n_bins_; ++b) full[b] = spec[t][b];
            for (int b = n_bins_; b < cfg_.win; ++b) full[b] = std::conj(spec[t][cfg_.win - b]);
            auto frame = irfft(full);
            const size_t start = static_cast<size_t>(t) * cfg_.hop;
            for (int i = 0; i < cfg_.win; ++i) {
                out[start + i] += frame[i] * window_[i];
                norm[start + i] += window_[i] * window_[i];
            }
        }
        for (size_t i = 0; i < out.size(); ++i) {
            if (norm[i] > 1e-9) out[i] /= norm[i];
        }
        out.resize(n_samples);
        return out;
    };

    // Griffin-Lim, zero initial phase.
    std::vector<std::vector<std::complex<double>>> spec(
        frames, std::vector<std::complex<double>>(n_bins_));
    for (int t = 0; t < frames; ++t)
        for (int b = 0; b < n_bins_; ++b) spec[t][b] = target[t][b];

    std::vector<double> x;
    for (int it = 0; it < n_iters; ++it) {
        x = istft(spec);
        // re-analyze and keep only the phase
        std::vector<double> frame(cfg_.win);
        for (int t = 0; t < frames; ++t) {
            const size_t start = static_cast<size_t>(t) * cfg_.hop;
            for (int i = 0; i < cfg_.win; ++i) {
                const size_t idx = start + i;
                frame[i] = idx < x.size() ? x[idx] * window_[i] : 0.0;
            }
            auto s = rfft(frame);
            for (int b = 0; b < n_bins_; ++b) {
                const double a = std::abs(s[b]);
                spec[t][b] = a > 1e-12 ? s[b] / a * target[t][b]
                                       : std::complex<double>(target[t][b], 0.0);
            }
        }
    }
    x = istft(spec);

    std::vector<float> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(x[i]);
    return out;
}

F0Sequence estimate_f0(const std::vector<float>& samples, int sample_rate,
                       const F0EstimatorConfig& cfg) {
    require_input(sample_rate > 0, "estimate_f0: bad sample rate");
    const int frames = frame_count(samples.size(), cfg.hop);
    const int lag_min = std::max(2, static_cast<int>(sample_rate / cfg.fmax));
    const int lag_max = std::min(cfg.window - 1, static_cast<int>(sample_rate / cfg.fmin));

    F0Sequence f0;
    f0.values.assign(frames, 0.0);
    std::vector<double> buf(cfg.window);
    for (int t = 0; t < frames; ++t) {
        // window centered on the frame start
        const long long center = static_cast<long long>(t) * cfg.hop;
        double energy = 0.0;
        for (int i = 0; i < cfg.window; ++i) {
            const long long idx = center - cfg.window / 2 + i;
            buf[i] = (idx >= 0 && idx < static_cast<long long>(samples.size()))
                         ? samples[static_cast<size_t>(idx)]
                         : 0.0;
            energy += buf[i] * buf[i];
        }
        const double frame_rms = std::sqrt(energy / cfg.window);
        if (frame_rms < cfg.energy_floor) continue;

        const double r0 = energy;
        std::vector<double> score(lag_max + 1, 0.0);
        double best = 0.0;
        for (int lag = lag_min; lag <= lag_max; ++lag) {
            double r = 0.0;
            for (int i = 0; i + lag < cfg.window; ++i) r += buf[i] * buf[i + lag];
            // normalize by the shrinking overlap so long lags are not penalized
            const double norm = r0 * (cfg.window - lag) / static_cast<double>(cfg.window);
            score[lag] = norm > 1e-12 ? r / norm : 0.0;
            best = std::max(best, score[lag]);
        }
        if (best < cfg.voicing_threshold) continue;
        // among local maxima near the global peak take the shortest lag; a
        // marginally higher peak at 2T is the classic octave-down error
        int best_lag = 0;
        for (int lag = lag_min; lag <= lag_max; ++lag) {
            const double left = lag > lag_min ? score[lag - 1] : -1.0;
            const double right = lag < lag_max ? score[lag + 1] : -1.0;
            if (score[lag] >= left && score[lag] >= right && score[lag] >= 0.9 * best) {
                best_lag = lag;
                break;
            }
        }
        if (best_lag == 0) continue;

        // parabolic refinement around the peak
        double lag_refined = best_lag;
        if (best_lag > lag_min && best_lag < lag_max) {
            auto acf = [&](int lag) {
                double r = 0.0;
                for (int i = 0; i + lag < cfg.window; ++i) r += buf[i] * buf[i + lag];
                return r / ((cfg.window - lag) / static_cast<double>(cfg.window));
            };
            const double ym = acf(best_lag - 1), y0 = acf(best_lag), yp = acf(best_lag + 1);
            const double denom = ym - 2.0 * y0 + yp;
            if (std::abs(denom) > 1e-12) {
                const double delta = 0.5 * (ym - yp) / denom;
                if (std::abs(delta) < 1.0) lag_refined = best_lag + delta;
            }
        }
        f0.values[t] = sample_rate / lag_refined;
    }
    return f0;
}

}  // namespace svs
