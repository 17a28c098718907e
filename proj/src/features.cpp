#include "svs/features.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>

#include "svs/audio.hpp"
#include "svs/common.hpp"
#include "svs/dsp.hpp"
#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;

const char* to_string(CorpusKind k) {
    return k == CorpusKind::singing ? "singing" : "speech";
}

CorpusKind corpus_kind_from_string(const std::string& s) {
    if (s == "singing") return CorpusKind::singing;
    if (s == "speech") return CorpusKind::speech;
    throw ConfigError("unknown corpus kind: " + s + " (want singing|speech)");
}

double UtteranceRecord::total_duration_sec() const {
    return std::accumulate(durations_sec.begin(), durations_sec.end(), 0.0);
}

std::vector<int> regulate(const std::vector<int>& phoneme_ids,
                          const std::vector<double>& durations_sec, double frame_rate) {
    require_input(phoneme_ids.size() == durations_sec.size(),
                  "regulate: phoneme and duration lists differ in length");
    require_input(frame_rate > 0.0, "regulate: frame rate must be positive");

    std::vector<int> out;
    double cumulative = 0.0;
    long long prev_boundary = 0;
    for (size_t i = 0; i < phoneme_ids.size(); ++i) {
        require_input(durations_sec[i] >= 0.0, "regulate: negative duration at index " +
                                                   std::to_string(i));
        cumulative += durations_sec[i];
        const long long boundary = round_half_away(cumulative * frame_rate);
        for (long long f = prev_boundary; f < boundary; ++f) out.push_back(phoneme_ids[i]);
        prev_boundary = boundary;
    }
    return out;
}

double frame_rate_of(int sample_rate, int hop) {
    require_input(hop > 0, "frame_rate_of: hop must be positive");
    require_input(sample_rate > 0, "frame_rate_of: sample rate must be positive");
    if (sample_rate % hop != 0) {
        std::fprintf(stderr, "warning: hop %d does not divide sample rate %d evenly\n", hop,
                     sample_rate);
    }
    return static_cast<double>(sample_rate) / hop;
}

IngestResult ingest_corpus(const std::filesystem::path& manifest_path, CorpusKind kind,
                           int hop) {
    std::ifstream in(manifest_path);
    if (!in) throw DataError("cannot open manifest: " + manifest_path.string());

    IngestResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;

        UtteranceRecord rec;
        try {
            const json j = json::parse(line);
            rec.id = j.at("id").get<std::string>();
            rec.audio = manifest_path.parent_path() / j.at("audio").get<std::string>();
            rec.phonemes = j.at("phonemes").get<std::vector<std::string>>();
            rec.durations_sec = j.at("durations").get<std::vector<double>>();
            rec.f0_path = manifest_path.parent_path() / j.at("f0").get<std::string>();
            rec.gender = gender_from_string(j.at("gender").get<std::string>());
            rec.sample_rate = j.value("sample_rate", 24000);
            rec.kind = kind;
        } catch (const json::exception& e) {
            result.rejected.push_back(manifest_path.string() + ":" + std::to_string(line_no) +
                                      ": malformed row: " + e.what());
            continue;
        }

        try {
            require_input(rec.phonemes.size() == rec.durations_sec.size(),
                          "phoneme/duration length mismatch");
            const Wav wav = read_wav(rec.audio);
            require_input(wav.sample_rate == rec.sample_rate,
                          "sample rate mismatch: manifest says " +
                              std::to_string(rec.sample_rate) + ", file has " +
                              std::to_string(wav.sample_rate));
            rec.frame_count = frame_count(wav.samples.size(), hop);
            const double rate = static_cast<double>(rec.sample_rate) / hop;
            const double expected = rec.total_duration_sec() * rate;
            if (std::abs(expected - rec.frame_count) > 2.0) {
                throw DataError("duration sum (" + std::to_string(expected) +
                                " frames) disagrees with audio (" +
                                std::to_string(rec.frame_count) + " frames)");
            }
            if (!std::filesystem::exists(rec.f0_path)) {
                throw DataError("missing f0 sidecar: " + rec.f0_path.string());
            }
            const F0Sequence f0 = read_f0_file(rec.f0_path.string());
            if (std::abs(static_cast<double>(f0.size()) - rec.frame_count) > 2.0) {
                throw DataError("f0 sidecar has " + std::to_string(f0.size()) +
                                " frames, audio has " + std::to_string(rec.frame_count));
            }
        } catch (const std::exception& e) {
            result.rejected.push_back("utterance " + rec.id + ": " + e.what());
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

int PhonemeVocab::id_of(const std::string& phoneme) const {
    auto it = ids.find(phoneme);
    require_input(it != ids.end(), "phoneme not in vocabulary: " + phoneme);
    return it->second;
}

PhonemeVocab PhonemeVocab::build(const std::vector<UtteranceRecord>& records) {
    PhonemeVocab vocab;
    for (const auto& rec : records) {
        for (const auto& p : rec.phonemes) vocab.ids.emplace(p, 0);
    }
    int next = 0;
    for (auto& [phoneme, id] : vocab.ids) id = next++;  // std::map iterates sorted
    return vocab;
}

void PhonemeVocab::save(const std::filesystem::path& path) const {
    json j = json::object();
    for (const auto& [phoneme, id] : ids) j[phoneme] = id;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write phoneme vocab: " + path.string());
    out << j.dump(2) << "\n";
}

PhonemeVocab PhonemeVocab::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open phoneme vocab: " + path.string());
    json j;
    in >> j;
    PhonemeVocab vocab;
    for (auto& [phoneme, id] : j.items()) vocab.ids[phoneme] = id.get<int>();
    return vocab;
}

}  // namespace svs
