#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "svs/prompt.hpp"

namespace svs {

enum class CorpusKind { singing, speech };

const char* to_string(CorpusKind k);
CorpusKind corpus_kind_from_string(const std::string& s);

// Frame-level phoneme ids at the acoustic frame rate.
struct PhonemeFrameSequence {
    std::vector<int> phoneme_ids;

    size_t size() const { return phoneme_ids.size(); }
};

// One manifest row. Speech and singing rows share the schema.
struct UtteranceRecord {
    std::string id;
    std::filesystem::path audio;
    std::vector<std::string> phonemes;
    std::vector<double> durations_sec;
    std::filesystem::path f0_path;
    Gender gender = Gender::absent;
    CorpusKind kind = CorpusKind::singing;
    int sample_rate = 24000;
    int frame_count = 0;  // filled during validation

    double total_duration_sec() const;
};

// Duplicates each phoneme to its frame span. Cumulative-boundary rounding, so
// the total length is always round(sum(durations) * frame_rate).
std::vector<int> regulate(const std::vector<int>& phoneme_ids,
                          const std::vector<double>& durations_sec, double frame_rate);

// sample_rate / hop; warns on stderr when the ratio is not integral
double frame_rate_of(int sample_rate, int hop);

struct IngestResult {
    std::vector<UtteranceRecord> records;
    std::vector<std::string> rejected;  // one diagnostic per rejected row
};

// Parses a line-delimited manifest, validates each row (audio frame count vs
// durations within +-2 frames, f0 sidecar present) and tags it with the
// corpus kind.
IngestResult ingest_corpus(const std::filesystem::path& manifest_path, CorpusKind kind,
                           int hop = 480);

// Deterministic phoneme -> id vocabulary (sorted phoneme strings).
struct PhonemeVocab {
    std::map<std::string, int> ids;

    int id_of(const std::string& phoneme) const;
    int size() const { return static_cast<int>(ids.size()); }

    static PhonemeVocab build(const std::vector<UtteranceRecord>& records);
    void save(const std::filesystem::path& path) const;
    static PhonemeVocab load(const std::filesystem::path& path);
};

}  // namespace svs
