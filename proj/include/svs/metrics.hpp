#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "svs/dsp.hpp"
#include "svs/pitch.hpp"
#include "svs/prompt.hpp"

namespace svs {

// Rescaled F0 frame error. Both voiced parts are rescaled to the mean of the
// two voiced means; a frame counts as an error on a voicing mismatch or when
// the rescaled pitches deviate by more than 20% (ratio test, so the metric is
// symmetric).
double rffe(const F0Sequence& synthesized, const F0Sequence& reference);

// 100 inside [lo, hi]; 100 * exp(-k * distance-to-band) outside.
double soft_accuracy(double value, double lo, double hi, double k);

// Per-category decay rates (larger k = faster decay at the margin).
struct SoftAccuracyRates {
    double volume_high = 10.0;
    double volume_medium = 20.0;
    double volume_low = 30.0;
    double vocal_range = 0.05;

    double volume_k(Volume v) const;
};

class GenderClassifier {
  public:
    virtual ~GenderClassifier() = default;
    virtual bool trained() const = 0;
    virtual std::pair<Gender, double> classify(const std::vector<float>& audio,
                                               int sample_rate) const = 0;
};

// Logistic regression over volume-invariant spectral shape statistics.
class SpectralGenderClassifier : public GenderClassifier {
  public:
    SpectralGenderClassifier();

    struct TrainItem {
        std::vector<float> audio;
        int sample_rate = 24000;
        Gender gender = Gender::absent;
    };
    // returns training-set accuracy
    double train(const std::vector<TrainItem>& items, int epochs = 200, uint64_t seed = 5);

    bool trained() const override { return trained_; }
    std::pair<Gender, double> classify(const std::vector<float>& audio,
                                       int sample_rate) const override;

    void save(const std::filesystem::path& path) const;
    static SpectralGenderClassifier load(const std::filesystem::path& path);

    static std::vector<double> features(const std::vector<float>& audio, int sample_rate);

  private:
    std::vector<double> weights_;  // feature dim + bias
    bool trained_ = false;
};

struct EvalItem {
    std::string id;
    std::filesystem::path audio;
    AttributeLabels intended;
    std::optional<std::filesystem::path> reference_f0;
};

struct EvalItemDiagnostic {
    std::string id;
    bool skipped = false;
    std::string note;
    double volume_accuracy = -1.0;  // -1 = not applicable
    double range_accuracy = -1.0;
    double gender_correct = -1.0;
    double rffe_value = -1.0;
    double measured_rms = 0.0;
    double measured_mean_f0 = 0.0;
};

struct EvalReport {
    double gender_accuracy_female = -1.0;  // percent, -1 when no item applies
    double gender_accuracy_male = -1.0;
    double volume_accuracy = -1.0;
    double range_accuracy = -1.0;
    double rffe_mean = -1.0;
    int items_total = 0;
    int items_skipped = 0;
    int gender_female_count = 0;
    int gender_male_count = 0;
    int volume_count = 0;
    int range_count = 0;
    int rffe_count = 0;
    std::vector<EvalItemDiagnostic> items;

    std::string to_json() const;
    std::string table_text() const;
};

struct EvalConfig {
    VolumeBands bands;
    RangeThresholds thresholds;
    SoftAccuracyRates rates;
    F0EstimatorConfig f0;
};

EvalReport evaluate_batch(const std::vector<EvalItem>& items, const GenderClassifier* gender,
                          const EvalConfig& cfg = {});

}  // namespace svs
