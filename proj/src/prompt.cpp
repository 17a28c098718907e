#include "svs/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "svs/audio.hpp"
#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;

const char* to_string(Attribute a) {
    switch (a) {
        case Attribute::gender: return "gender";
        case Attribute::volume: return "volume";
        case Attribute::vocal_range: return "vocal_range";
    }
    return "?";
}

const char* to_string(Gender g) {
    switch (g) {
        case Gender::absent: return "absent";
        case Gender::male: return "male";
        case Gender::female: return "female";
    }
    return "?";
}

const char* to_string(Volume v) {
    switch (v) {
        case Volume::absent: return "absent";
        case Volume::low: return "low";
        case Volume::medium: return "medium";
        case Volume::high: return "high";
    }
    return "?";
}

const char* to_string(VocalRange r) {
    switch (r) {
        case VocalRange::absent: return "absent";
        case VocalRange::low: return "low";
        case VocalRange::high: return "high";
    }
    return "?";
}

Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "absent" || s.empty()) return Gender::absent;
    throw DataError("unknown gender label: " + s);
}

Volume volume_from_string(const std::string& s) {
    if (s == "low") return Volume::low;
    if (s == "medium") return Volume::medium;
    if (s == "high") return Volume::high;
    if (s == "absent" || s.empty()) return Volume::absent;
    throw DataError("unknown volume label: " + s);
}

VocalRange range_from_string(const std::string& s) {
    if (s == "low") return VocalRange::low;
    if (s == "high") return VocalRange::high;
    if (s == "absent" || s.empty()) return VocalRange::absent;
    throw DataError("unknown vocal range label: " + s);
}

bool AttributeLabels::has(Attribute a) const {
    switch (a) {
        case Attribute::gender: return gender != Gender::absent;
        case Attribute::volume: return volume != Volume::absent;
        case Attribute::vocal_range: return vocal_range != VocalRange::absent;
    }
    return false;
}

std::set<Attribute> AttributeLabels::present() const {
    std::set<Attribute> out;
    if (gender != Gender::absent) out.insert(Attribute::gender);
    if (volume != Volume::absent) out.insert(Attribute::volume);
    if (vocal_range != VocalRange::absent) out.insert(Attribute::vocal_range);
    return out;
}

const std::vector<std::string>& KeywordBank::keywords(Attribute a,
                                                      const std::string& category) const {
    auto it = entries.find(a);
    require_config(it != entries.end(),
                   std::string("keyword bank has no attribute ") + to_string(a));
    auto jt = it->second.find(category);
    require_config(jt != it->second.end(), std::string("keyword bank has no category ") +
                                               to_string(a) + "/" + category);
    return jt->second;
}

void KeywordBank::validate() const {
    for (const auto& [attr, cats] : entries) {
        require_config(!cats.empty(),
                       std::string("keyword bank attribute is empty: ") + to_string(attr));
        for (const auto& [cat, words] : cats) {
            require_config(!words.empty(), std::string("empty keyword list for ") +
                                               to_string(attr) + "/" + cat);
        }
    }
}

const std::array<double, 2>& VolumeBands::band(Volume v) const {
    switch (v) {
        case Volume::low: return low;
        case Volume::medium: return medium;
        case Volume::high: return high;
        default: break;
    }
    throw InvalidInputError("no RMS band for absent volume");
}

double RangeThresholds::threshold(Gender g) const {
    switch (g) {
        case Gender::male: return male_hz;
        case Gender::female: return female_hz;
        default: break;
    }
    throw InvalidInputError("vocal range threshold undefined without gender");
}

Volume categorize_volume(double rms_value, const VolumeBands& bands) {
    require_input(rms_value >= 0.0, "categorize_volume: rms must be non-negative");
    if (rms_value >= bands.low[0] && rms_value <= bands.low[1]) return Volume::low;
    if (rms_value >= bands.medium[0] && rms_value <= bands.medium[1]) return Volume::medium;
    if (rms_value >= bands.high[0] && rms_value <= bands.high[1]) return Volume::high;
    return Volume::absent;
}

VocalRange categorize_range(double avg_f0_hz, Gender gender, const RangeThresholds& th) {
    require_input(avg_f0_hz > 0.0, "categorize_range: average F0 must be positive");
    require_input(gender != Gender::absent, "categorize_range: gender required");
    return avg_f0_hz <= th.threshold(gender) ? VocalRange::low : VocalRange::high;
}

namespace {

void drop_attribute(AttributeLabels& l, Attribute a) {
    switch (a) {
        case Attribute::gender:
            l.gender = Gender::absent;
            // range is never kept without gender
            l.vocal_range = VocalRange::absent;
            break;
        case Attribute::volume: l.volume = Volume::absent; break;
        case Attribute::vocal_range: l.vocal_range = VocalRange::absent; break;
    }
}

}  // namespace

AttributeLabels drop_labels(const AttributeLabels& labels, double p1, double p2, Rng& rng) {
    require_input(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0,
                  "drop_labels: probabilities must be in [0, 1]");
    require_input(labels.present_count() >= 1, "drop_labels: no present attribute");
    require_input(labels.valid(), "drop_labels: range present without gender");

    AttributeLabels out = labels;
    for (double p : {p1, p2}) {
        if (rng.uniform() >= p) continue;
        const auto present = out.present();
        if (present.empty()) continue;
        std::vector<Attribute> pool(present.begin(), present.end());
        const Attribute victim = pool[rng.uniform_int(static_cast<int64_t>(pool.size()))];
        const AttributeLabels before = out;
        drop_attribute(out, victim);
        if (out.present_count() == 0) out = before;  // keep at least one label
    }
    return out;
}

namespace {

// Replaces every "[name]" occurrence; returns the number replaced.
int substitute_placeholder(std::string& text, const std::string& name,
                           const std::string& value) {
    const std::string token = "[" + name + "]";
    int n = 0;
    size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
        ++n;
    }
    return n;
}

std::string placeholder_name(Attribute a) {
    switch (a) {
        case Attribute::gender: return "gender";
        case Attribute::volume: return "volume";
        case Attribute::vocal_range: return "pitch";
    }
    return "?";
}

std::string category_of(const AttributeLabels& l, Attribute a) {
    switch (a) {
        case Attribute::gender: return to_string(l.gender);
        case Attribute::volume: return to_string(l.volume);
        case Attribute::vocal_range: return to_string(l.vocal_range);
    }
    return "?";
}

std::string describe_combination(const std::set<Attribute>& attrs) {
    std::string s;
    for (Attribute a : attrs) {
        if (!s.empty()) s += "+";
        s += to_string(a);
    }
    return s.empty() ? "(none)" : s;
}

}  // namespace

PromptSample assemble_prompt(const AttributeLabels& labels, const KeywordBank& bank,
                             const std::vector<PromptTemplate>& templates, Rng& rng) {
    require_input(labels.present_count() >= 1, "assemble_prompt: no present attribute");
    require_input(labels.valid(), "assemble_prompt: range present without gender");

    const auto present = labels.present();
    std::vector<const PromptTemplate*> matching;
    for (const auto& t : templates) {
        if (t.covered != present) continue;
        if (t.category_specific &&
            category_of(labels, t.category_specific->first) != t.category_specific->second) {
            continue;
        }
        matching.push_back(&t);
    }
    if (matching.empty()) {
        throw ConfigError("no prompt template covers attribute combination " +
                          describe_combination(present));
    }

    const PromptTemplate& tpl =
        *matching[rng.uniform_int(static_cast<int64_t>(matching.size()))];

    PromptSample sample;
    sample.labels = labels;
    sample.template_id = tpl.id;
    sample.sentence = tpl.text;
    for (Attribute a : present) {
        if (tpl.category_specific && tpl.category_specific->first == a) continue;
        const auto& words = bank.keywords(a, category_of(labels, a));
        const std::string& kw = words[rng.uniform_int(static_cast<int64_t>(words.size()))];
        const int replaced = substitute_placeholder(sample.sentence, placeholder_name(a), kw);
        require_config(replaced > 0, "template " + tpl.id + " lacks placeholder for " +
                                         std::string(to_string(a)));
        sample.keyword_choices[a] = kw;
    }
    require_input(sample.sentence.find('[') == std::string::npos &&
                      sample.sentence.find(']') == std::string::npos,
                  "assembled prompt still contains a placeholder: " + sample.sentence);
    return sample;
}

std::pair<std::vector<float>, double> rescale_volume_augment(const std::vector<float>& waveform,
                                                             Volume target, Rng& rng,
                                                             const VolumeBands& bands) {
    const double current = rms(waveform);
    require_input(current > 1e-6, "rescale_volume_augment: input is silent");
    const auto& band = bands.band(target);

    float peak = 0.0f;
    for (float s : waveform) peak = std::max(peak, std::abs(s));

    double target_rms = rng.uniform(band[0], band[1]);
    if (peak * (target_rms / current) > 1.0) {
        // clipping: retry inside the band's lower half
        target_rms = rng.uniform(band[0], 0.5 * (band[0] + band[1]));
        require_input(peak * (target_rms / current) <= 1.0,
                      "rescale_volume_augment: cannot reach band without clipping");
    }
    const double scale = target_rms / current;
    std::vector<float> out(waveform.size());
    for (size_t i = 0; i < waveform.size(); ++i)
        out[i] = static_cast<float>(waveform[i] * scale);
    return {std::move(out), target_rms};
}

// ---- assets -----------------------------------------------------------------

namespace {

Attribute attribute_from_string(const std::string& s) {
    if (s == "gender") return Attribute::gender;
    if (s == "volume") return Attribute::volume;
    if (s == "vocal_range" || s == "pitch" || s == "range") return Attribute::vocal_range;
    throw ConfigError("unknown attribute name in asset: " + s);
}

}  // namespace

KeywordBank load_keyword_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open keyword bank: " + path.string());
    json j;
    in >> j;
    KeywordBank bank;
    for (auto& [attr_name, cats] : j.items()) {
        const Attribute attr = attribute_from_string(attr_name);
        for (auto& [cat, words] : cats.items()) {
            for (const auto& w : words) {
                bank.entries[attr][cat].push_back(w.get<std::string>());
            }
        }
    }
    bank.validate();
    return bank;
}

std::vector<PromptTemplate> load_templates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open template file: " + path.string());
    std::vector<PromptTemplate> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        PromptTemplate t;
        t.id = j.at("id").get<std::string>();
        t.text = j.at("text").get<std::string>();
        for (const auto& a : j.at("covered")) {
            t.covered.insert(attribute_from_string(a.get<std::string>()));
        }
        if (j.contains("category_specific")) {
            const auto& cs = j.at("category_specific");
            t.category_specific = {attribute_from_string(cs.at("attribute").get<std::string>()),
                                   cs.at("category").get<std::string>()};
        }
        require_config(!t.covered.empty() && t.covered.size() <= 3,
                       "template " + t.id + " must cover 1-3 attributes");
        // placeholders in the text must be exactly the covered attributes
        // minus any category-specific binding
        for (Attribute a : {Attribute::gender, Attribute::volume, Attribute::vocal_range}) {
            const bool has_ph =
                t.text.find("[" + placeholder_name(a) + "]") != std::string::npos;
            const bool expect_ph =
                t.covered.count(a) > 0 &&
                !(t.category_specific && t.category_specific->first == a);
            require_config(has_ph == expect_ph,
                           "template " + t.id + ": placeholder set does not match covered "
                           "attributes near [" + placeholder_name(a) + "]");
        }
        out.push_back(std::move(t));
    }
    return out;
}

PromptAssets load_prompt_assets(const std::filesystem::path& assets_dir) {
    PromptAssets assets;
    assets.bank = load_keyword_bank(assets_dir / "keywords.json");
    assets.train_templates = load_templates(assets_dir / "templates_train.jsonl");
    assets.eval_templates = load_templates(assets_dir / "templates_eval.jsonl");

    std::set<std::string> train_ids, train_texts;
    for (const auto& t : assets.train_templates) {
        train_ids.insert(t.id);
        train_texts.insert(t.text);
    }
    for (const auto& t : assets.eval_templates) {
        require_config(train_ids.count(t.id) == 0 && train_texts.count(t.text) == 0,
                       "evaluation template leaks into training set: " + t.id);
    }
    return assets;
}

}  // namespace svs
