#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "svs/common.hpp"

namespace svs {

// Iterative radix-2 FFT, power-of-two sizes only. Small and deterministic,
// which is all the desk-scale spectrogram path needs.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const size_t n = a.size();
    require_input(n > 0 && (n & (n - 1)) == 0, "fft size must be a power of two");

    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

// Full complex spectrum of a real frame (length n, power of two).
inline std::vector<std::complex<double>> rfft(const std::vector<double>& frame) {
    std::vector<std::complex<double>> a(frame.size());
    for (size_t i = 0; i < frame.size(); ++i) a[i] = frame[i];
    fft_inplace(a, false);
    return a;
}

inline std::vector<double> irfft(std::vector<std::complex<double>> spectrum) {
    fft_inplace(spectrum, true);
    std::vector<double> out(spectrum.size());
    for (size_t i = 0; i < spectrum.size(); ++i) out[i] = spectrum[i].real();
    return out;
}

}  // namespace svs
