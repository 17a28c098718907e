#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "svs/common.hpp"

namespace svs {

enum class Attribute { gender, volume, vocal_range };

enum class Gender { absent, male, female };
enum class Volume { absent, low, medium, high };
enum class VocalRange { absent, low, high };

const char* to_string(Attribute a);
const char* to_string(Gender g);
const char* to_string(Volume v);
const char* to_string(VocalRange r);

Gender gender_from_string(const std::string& s);
Volume volume_from_string(const std::string& s);
VocalRange range_from_string(const std::string& s);

struct AttributeLabels {
    Gender gender = Gender::absent;
    Volume volume = Volume::absent;
    VocalRange vocal_range = VocalRange::absent;

    int present_count() const {
        return (gender != Gender::absent) + (volume != Volume::absent) +
               (vocal_range != VocalRange::absent);
    }
    bool has(Attribute a) const;
    std::set<Attribute> present() const;
    // range is never controlled without gender
    bool valid() const {
        return vocal_range == VocalRange::absent || gender != Gender::absent;
    }
    bool operator==(const AttributeLabels&) const = default;
};

// category key within an attribute ("male", "low", ...) -> keywords
struct KeywordBank {
    std::map<Attribute, std::map<std::string, std::vector<std::string>>> entries;

    const std::vector<std::string>& keywords(Attribute a, const std::string& category) const;
    void validate() const;  // every category non-empty
};

struct PromptTemplate {
    std::string id;
    std::string text;
    std::set<Attribute> covered;
    // templates whose phrasing already names a category carry no placeholder
    // for that attribute, e.g. "... as powerful as a thunderstorm" for high
    // volume
    std::optional<std::pair<Attribute, std::string>> category_specific;
};

struct PromptSample {
    AttributeLabels labels;
    std::string sentence;
    std::string template_id;
    std::map<Attribute, std::string> keyword_choices;
};

struct VolumeBands {
    std::array<double, 2> low{0.02, 0.04};
    std::array<double, 2> medium{0.07, 0.10};
    std::array<double, 2> high{0.16, 0.20};

    const std::array<double, 2>& band(Volume v) const;
};

struct RangeThresholds {
    double male_hz = 125.0;
    double female_hz = 305.0;

    double threshold(Gender g) const;
};

// ---- categorization ------------------------------------------------------

// Step function over the three closed RMS bands; values in the gaps carry no
// volume label.
Volume categorize_volume(double rms_value, const VolumeBands& bands = {});

// at or below the gender-specific threshold -> low, above -> high
VocalRange categorize_range(double avg_f0_hz, Gender gender, const RangeThresholds& th = {});

// ---- label dropping and assembly ------------------------------------------

// Sequentially drops up to two present labels (probabilities p1 then p2).
// Dropping gender cascades to vocal_range; a drop that would leave every
// attribute absent is reverted.
AttributeLabels drop_labels(const AttributeLabels& labels, double p1, double p2, Rng& rng);

PromptSample assemble_prompt(const AttributeLabels& labels, const KeywordBank& bank,
                             const std::vector<PromptTemplate>& templates, Rng& rng);

// Multiplies the waveform so its RMS lands uniformly inside the target band.
// Scales that would clip are redrawn from the band's lower half.
std::pair<std::vector<float>, double> rescale_volume_augment(const std::vector<float>& waveform,
                                                             Volume target, Rng& rng,
                                                             const VolumeBands& bands = {});

// ---- static assets ---------------------------------------------------------

KeywordBank load_keyword_bank(const std::filesystem::path& path);
std::vector<PromptTemplate> load_templates(const std::filesystem::path& path);

struct PromptAssets {
    KeywordBank bank;
    std::vector<PromptTemplate> train_templates;
    std::vector<PromptTemplate> eval_templates;  // frozen held-out set
};

// Loads keywords.json, templates_train.jsonl and templates_eval.jsonl from the
// assets directory and checks the train/eval split is disjoint.
PromptAssets load_prompt_assets(const std::filesystem::path& assets_dir);

}  // namespace svs
