#include "svs/pitch.hpp"

#include <cstdio>
#include <fstream>

#include "svs/common.hpp"

namespace svs {

double voiced_mean(const F0Sequence& f0) {
    double sum = 0.0;
    size_t n = 0;
    for (double v : f0.values) {
        require_input(v >= 0.0, "F0 values must be non-negative");
        if (v > 0.0) {
            sum += v;
            ++n;
        }
    }
    require_input(n > 0, "voiced_mean: sequence has no voiced frames");
    return sum / static_cast<double>(n);
}

DecoupledPitch decompose_f0(const F0Sequence& f0, double target_mean) {
    const double mean = voiced_mean(f0);
    DecoupledPitch d;
    d.range_factor = static_cast<int>(round_half_away(mean));
    d.melody.resize(f0.size());
    const double scale = target_mean / mean;
    for (size_t i = 0; i < f0.size(); ++i) {
        d.melody[i] = f0.voiced(i)
                          ? static_cast<int>(round_half_away(f0.values[i] * scale))
                          : 0;
    }
    return d;
}

F0Sequence recompose_f0(const DecoupledPitch& d, double target_mean) {
    require_input(d.range_factor > 0, "recompose_f0: range factor must be positive");
    F0Sequence f0;
    f0.values.resize(d.melody.size());
    const double scale = static_cast<double>(d.range_factor) / target_mean;
    for (size_t i = 0; i < d.melody.size(); ++i) {
        f0.values[i] = d.melody[i] > 0 ? d.melody[i] * scale : 0.0;
    }
    return f0;
}

F0Sequence read_f0_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open f0 file: " + path);
    F0Sequence f0;
    double v = 0.0;
    while (in >> v) f0.values.push_back(v);
    return f0;
}

void write_f0_file(const std::string& path, const F0Sequence& f0) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write f0 file: " + path);
    char buf[64];
    for (double v : f0.values) {
        std::snprintf(buf, sizeof(buf), "%.6f\n", v);
        out << buf;
    }
}

}  // namespace svs
