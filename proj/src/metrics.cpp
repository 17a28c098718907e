#include "svs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "svs/audio.hpp"
#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;

double rffe(const F0Sequence& synthesized, const F0Sequence& reference) {
    require_input(synthesized.size() == reference.size(),
                  "rffe: sequences differ in length (" + std::to_string(synthesized.size()) +
                      " vs " + std::to_string(reference.size()) + ")");
    require_input(synthesized.size() > 0, "rffe: empty sequences");

    double mean_syn = 0.0, mean_ref = 0.0;
    size_t n_syn = 0, n_ref = 0;
    for (size_t i = 0; i < synthesized.size(); ++i) {
        if (synthesized.voiced(i)) {
            mean_syn += synthesized.values[i];
            ++n_syn;
        }
        if (reference.voiced(i)) {
            mean_ref += reference.values[i];
            ++n_ref;
        }
    }
    if (n_syn == 0 || n_ref == 0) {
        throw InvalidInputError("rffe: metric undefined, one side is entirely unvoiced");
    }
    mean_syn /= static_cast<double>(n_syn);
    mean_ref /= static_cast<double>(n_ref);
    const double common = 0.5 * (mean_syn + mean_ref);
    const double scale_syn = common / mean_syn;
    const double scale_ref = common / mean_ref;

    size_t errors = 0;
    for (size_t i = 0; i < synthesized.size(); ++i) {
        const bool vs = synthesized.voiced(i);
        const bool vr = reference.voiced(i);
        if (vs != vr) {
            ++errors;
            continue;
        }
        if (!vs) continue;
        const double a = synthesized.values[i] * scale_syn;
        const double b = reference.values[i] * scale_ref;
        const double lo = std::min(a, b);
        const double hi = std::max(a, b);
        if ((hi - lo) / lo > 0.2) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(synthesized.size());
}

double soft_accuracy(double value, double lo, double hi, double k) {
    require_input(lo <= hi, "soft_accuracy: band is inverted");
    require_input(k > 0.0, "soft_accuracy: decay rate must be positive");
    if (value >= lo && value <= hi) return 100.0;
    const double eps = value < lo ? lo - value : value - hi;
    return 100.0 * std::exp(-k * eps);
}

double SoftAccuracyRates::volume_k(Volume v) const {
    switch (v) {
        case Volume::high: return volume_high;
        case Volume::medium: return volume_medium;
        case Volume::low: return volume_low;
        default: break;
    }
    throw InvalidInputError("no volume decay rate for absent volume");
}

// ---- gender classifier -----------------------------------------------------------

SpectralGenderClassifier::SpectralGenderClassifier() = default;

std::vector<double> SpectralGenderClassifier::features(const std::vector<float>& audio,
                                                       int sample_rate) {
    MelConfig mc;
    mc.sample_rate = sample_rate;
    mc.hop = 480;
    mc.win = 1024;
    const auto mag = stft_magnitude(audio, mc);
    const int n_bins = mc.win / 2 + 1;
    const double bin_hz = static_cast<double>(sample_rate) / mc.win;

    // average normalized spectrum over frames with energy
    std::vector<double> spec(n_bins, 0.0);
    int used = 0;
    for (const auto& frame : mag) {
        double e = 0.0;
        for (double m : frame) e += m;
        if (e < 1e-6) continue;
        for (int b = 0; b < n_bins; ++b) spec[b] += frame[b] / e;
        ++used;
    }
    if (used > 0) {
        for (auto& s : spec) s /= used;
        double total = 0.0;
        for (double s : spec) total += s;
        if (total > 0) {
            for (auto& s : spec) s /= total;
        }
    }

    double centroid = 0.0;
    for (int b = 0; b < n_bins; ++b) centroid += spec[b] * b * bin_hz;
    double spread = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        const double d = b * bin_hz - centroid;
        spread += spec[b] * d * d;
    }
    spread = std::sqrt(spread);
    // rolloff @ 85%
    double acc = 0.0;
    double rolloff = 0.0;
    for (int b = 0; b < n_bins; ++b) {
        acc += spec[b];
        if (acc >= 0.85) {
            rolloff = b * bin_hz;
            break;
        }
    }
    // energy ratios of four octave-ish bands
    auto band_energy = [&](double f_lo, double f_hi) {
        double e = 0.0;
        for (int b = 0; b < n_bins; ++b) {
            const double f = b * bin_hz;
            if (f >= f_lo && f < f_hi) e += spec[b];
        }
        return e;
    };
    return {centroid / 1000.0,
            spread / 1000.0,
            rolloff / 1000.0,
            band_energy(0, 500),
            band_energy(500, 1500),
            band_energy(1500, 4000),
            band_energy(4000, sample_rate / 2.0)};
}

double SpectralGenderClassifier::train(const std::vector<TrainItem>& items, int epochs,
                                       uint64_t seed) {
    require_input(!items.empty(), "gender classifier: no training items");
    std::vector<std::vector<double>> feats;
    std::vector<double> labels;  // male=0, female=1
    for (const auto& it : items) {
        require_input(it.gender != Gender::absent, "gender classifier: unlabeled item");
        feats.push_back(features(it.audio, it.sample_rate));
        labels.push_back(it.gender == Gender::female ? 1.0 : 0.0);
    }
    const size_t dim = feats[0].size();
    weights_.assign(dim + 1, 0.0);
    Rng rng(seed);
    for (auto& w : weights_) w = rng.normal(0.0, 0.01);

    const double lr = 0.5;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (size_t i = 0; i < feats.size(); ++i) {
            double z = weights_[dim];
            for (size_t j = 0; j < dim; ++j) z += weights_[j] * feats[i][j];
            const double p = 1.0 / (1.0 + std::exp(-z));
            const double g = p - labels[i];
            for (size_t j = 0; j < dim; ++j) weights_[j] -= lr * g * feats[i][j];
            weights_[dim] -= lr * g;
        }
    }
    trained_ = true;

    int correct = 0;
    for (size_t i = 0; i < feats.size(); ++i) {
        double z = weights_[dim];
        for (size_t j = 0; j < dim; ++j) z += weights_[j] * feats[i][j];
        if ((z > 0.0) == (labels[i] > 0.5)) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(feats.size());
}

std::pair<Gender, double> SpectralGenderClassifier::classify(const std::vector<float>& audio,
                                                             int sample_rate) const {
    if (!trained_) throw InvalidInputError("gender classifier: not trained");
    const auto f = features(audio, sample_rate);
    double z = weights_.back();
    for (size_t j = 0; j + 1 < weights_.size(); ++j) z += weights_[j] * f[j];
    const double p = 1.0 / (1.0 + std::exp(-z));
    return p >= 0.5 ? std::make_pair(Gender::female, p) : std::make_pair(Gender::male, 1.0 - p);
}

void SpectralGenderClassifier::save(const std::filesystem::path& path) const {
    json j{{"trained", trained_}, {"weights", weights_}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot write classifier: " + path.string());
    out << j.dump(2) << "\n";
}

SpectralGenderClassifier SpectralGenderClassifier::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open classifier: " + path.string());
    json j;
    in >> j;
    SpectralGenderClassifier c;
    c.trained_ = j.at("trained").get<bool>();
    c.weights_ = j.at("weights").get<std::vector<double>>();
    return c;
}

// ---- batch evaluation ---------------------------------------------------------------

EvalReport evaluate_batch(const std::vector<EvalItem>& items, const GenderClassifier* gender,
                          const EvalConfig& cfg) {
    EvalReport report;
    report.items_total = static_cast<int>(items.size());

    double vol_sum = 0.0, range_sum = 0.0, rffe_sum = 0.0;
    double gf_sum = 0.0, gm_sum = 0.0;

    for (const auto& item : items) {
        EvalItemDiagnostic diag;
        diag.id = item.id;
        try {
            if (item.intended.gender != Gender::absent) {
                require_input(gender != nullptr && gender->trained(),
                              "gender classifier required but not loaded");
            }
            const Wav wav = read_wav(item.audio);
            diag.measured_rms = rms(wav.samples);

            std::optional<F0Sequence> est;
            auto estimated = [&]() -> const F0Sequence& {
                if (!est) {
                    F0EstimatorConfig fc = cfg.f0;
                    est = estimate_f0(wav.samples, wav.sample_rate, fc);
                }
                return *est;
            };

            if (item.intended.volume != Volume::absent) {
                const auto& band = cfg.bands.band(item.intended.volume);
                diag.volume_accuracy =
                    soft_accuracy(diag.measured_rms, band[0], band[1],
                                  cfg.rates.volume_k(item.intended.volume));
                vol_sum += diag.volume_accuracy;
                ++report.volume_count;
            }
            if (item.intended.vocal_range != VocalRange::absent) {
                // band geometry: "high" is everything above the gender
                // threshold, "low" everything at or below it
                const double th = cfg.thresholds.threshold(item.intended.gender);
                diag.measured_mean_f0 = voiced_mean(estimated());
                const double lo =
                    item.intended.vocal_range == VocalRange::high ? th : 0.0;
                const double hi = item.intended.vocal_range == VocalRange::high
                                      ? std::numeric_limits<double>::infinity()
                                      : th;
                diag.range_accuracy =
                    soft_accuracy(diag.measured_mean_f0, lo, hi, cfg.rates.vocal_range);
                range_sum += diag.range_accuracy;
                ++report.range_count;
            }
            if (item.intended.gender != Gender::absent) {
                const auto [pred, conf] = gender->classify(wav.samples, wav.sample_rate);
                diag.gender_correct = pred == item.intended.gender ? 100.0 : 0.0;
                if (item.intended.gender == Gender::female) {
                    gf_sum += diag.gender_correct;
                    ++report.gender_female_count;
                } else {
                    gm_sum += diag.gender_correct;
                    ++report.gender_male_count;
                }
            }
            if (item.reference_f0) {
                F0Sequence ref = read_f0_file(item.reference_f0->string());
                F0Sequence syn = estimated();
                // crop to the common length; codec padding can add a frame
                const size_t n = std::min(ref.size(), syn.size());
                require_input(n > 0, "empty reference f0");
                ref.values.resize(n);
                syn.values.resize(n);
                diag.rffe_value = rffe(syn, ref);
                rffe_sum += diag.rffe_value;
                ++report.rffe_count;
            }
        } catch (const std::exception& e) {
            diag.skipped = true;
            diag.note = e.what();
            ++report.items_skipped;
        }
        report.items.push_back(std::move(diag));
    }

    if (report.volume_count > 0) report.volume_accuracy = vol_sum / report.volume_count;
    if (report.range_count > 0) report.range_accuracy = range_sum / report.range_count;
    if (report.rffe_count > 0) report.rffe_mean = rffe_sum / report.rffe_count;
    if (report.gender_female_count > 0)
        report.gender_accuracy_female = gf_sum / report.gender_female_count;
    if (report.gender_male_count > 0)
        report.gender_accuracy_male = gm_sum / report.gender_male_count;
    return report;
}

std::string EvalReport::to_json() const {
    json items_json = json::array();
    for (const auto& d : items) {
        items_json.push_back({{"id", d.id},
                              {"skipped", d.skipped},
                              {"note", d.note},
                              {"volume_accuracy", d.volume_accuracy},
                              {"range_accuracy", d.range_accuracy},
                              {"gender_correct", d.gender_correct},
                              {"rffe", d.rffe_value},
                              {"measured_rms", d.measured_rms},
                              {"measured_mean_f0", d.measured_mean_f0}});
    }
    const json j{{"gender_accuracy_female", gender_accuracy_female},
                 {"gender_accuracy_male", gender_accuracy_male},
                 {"volume_accuracy", volume_accuracy},
                 {"range_accuracy", range_accuracy},
                 {"rffe", rffe_mean},
                 {"counts",
                  {{"total", items_total},
                   {"skipped", items_skipped},
                   {"gender_female", gender_female_count},
                   {"gender_male", gender_male_count},
                   {"volume", volume_count},
                   {"range", range_count},
                   {"rffe", rffe_count}}},
                 {"items", items_json}};
    return j.dump(2);
}

std::string EvalReport::table_text() const {
    char buf[256];
    std::string out = "Gender (F/M)      Volume    Range     R-FFE\n";
    auto fmt = [&buf](double v, const char* pattern) {
        if (v < 0) return std::string("   /  ");
        std::snprintf(buf, sizeof(buf), pattern, v);
        return std::string(buf);
    };
    out += fmt(gender_accuracy_female, "%5.1f") + " / " + fmt(gender_accuracy_male, "%-5.1f") +
           "     " + fmt(volume_accuracy, "%5.1f") + "     " + fmt(range_accuracy, "%5.1f") +
           "     " + fmt(rffe_mean, "%5.3f") + "\n";
    return out;
}

}  // namespace svs
