#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "svs/config.hpp"
#include "svs/features.hpp"
#include "svs/metrics.hpp"
#include "svs/model.hpp"
#include "svs/synthdata.hpp"

namespace svs::app {

// exit codes: 0 success, 2 config error, 3 data error, 4 runtime error
int exit_code_for(const std::exception& e);

// atomic write: temp file + rename
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

struct RunContext {
    std::filesystem::path run_dir;  // empty = no run directory
    std::string command_line;
};
void write_run_files(const RunContext& ctx, const RunConfig& cfg);

// ---- prepare-data -------------------------------------------------------------

struct PrepareDataArgs {
    std::filesystem::path manifest;
    CorpusKind kind = CorpusKind::singing;
    std::filesystem::path out_dir;
};
struct PrepareDataResult {
    std::filesystem::path prepared_manifest;
    int accepted = 0;
    int rejected = 0;
};
PrepareDataResult cmd_prepare_data(const RunConfig& cfg, const PrepareDataArgs& args);

// one validated row of a prepared manifest
struct PreparedRow {
    std::string id;
    std::filesystem::path audio;
    std::vector<std::string> phonemes;
    std::vector<double> durations_sec;
    std::filesystem::path f0_path;
    Gender gender = Gender::absent;
    CorpusKind kind = CorpusKind::singing;
    int sample_rate = 24000;
    int frames = 0;
    double duration_sec() const;
};
std::vector<PreparedRow> read_prepared(const std::filesystem::path& prepared_manifest);

// data-mix caps: rows are taken in manifest order until each kind's hour cap
// is reached
std::vector<PreparedRow> apply_data_mix(const std::vector<PreparedRow>& rows,
                                        const DataMixSpec& mix);

// ---- codec --------------------------------------------------------------------

struct TrainCodecArgs {
    std::vector<std::filesystem::path> prepared;
    std::filesystem::path out_checkpoint;
    RunContext run;
    double heldout_fraction = 0.1;
};
CodecTrainStats cmd_train_codec(const RunConfig& cfg, const TrainCodecArgs& args);

struct EncodeArgs {
    std::filesystem::path codec_checkpoint;
    std::filesystem::path audio;
    std::filesystem::path out_units;
};
void cmd_encode(const RunConfig& cfg, const EncodeArgs& args);

struct DecodeArgs {
    std::filesystem::path codec_checkpoint;
    std::filesystem::path units;
    std::filesystem::path out_wav;
};
void cmd_decode(const RunConfig& cfg, const DecodeArgs& args);

// ---- model training --------------------------------------------------------------

struct TrainModelArgs {
    std::vector<std::filesystem::path> prepared;
    std::filesystem::path codec_checkpoint;
    std::filesystem::path out_checkpoint;
    RunContext run;
};
struct TrainModelResult {
    double final_loss = 0.0;
    int used_singing = 0;
    int used_speech = 0;
};
TrainModelResult cmd_train_model(const RunConfig& cfg, const TrainModelArgs& args);

// ---- synthesis --------------------------------------------------------------------

struct SynthesizeArgs {
    std::filesystem::path model_checkpoint;
    std::filesystem::path codec_checkpoint;
    std::string prompt;
    std::filesystem::path melody;  // f0 sidecar format
    std::filesystem::path lyrics;  // lines of "<phoneme> <duration_sec>"
    std::filesystem::path out_wav;
};
struct SynthesizeResult {
    int range_factor = 0;
    int frames = 0;
    std::filesystem::path wav;
    std::filesystem::path units;
    std::filesystem::path range_file;
    double elapsed_sec = 0.0;
};
SynthesizeResult cmd_synthesize(const RunConfig& cfg, const SynthesizeArgs& args);

// ---- evaluation --------------------------------------------------------------------

struct TrainClassifierArgs {
    std::vector<std::filesystem::path> prepared;
    std::filesystem::path out_path;
};
double cmd_train_gender_classifier(const RunConfig& cfg, const TrainClassifierArgs& args);

struct EvaluateArgs {
    std::filesystem::path manifest;  // rows: id, audio, gender/volume/range, reference_f0
    std::filesystem::path report;
    std::filesystem::path classifier;  // optional when no gender items
};
EvalReport cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args);

// ---- toy data ----------------------------------------------------------------------

struct MakeToyDataArgs {
    std::filesystem::path out_dir;
    int items = 220;
    int frames = 18;
    CorpusKind kind = CorpusKind::singing;
    uint64_t seed = 42;
};
ToyCorpusResult cmd_make_toy_data(const RunConfig& cfg, const MakeToyDataArgs& args);

// lyrics file helpers (synthesize input format)
void write_lyrics_file(const std::filesystem::path& path,
                       const std::vector<std::string>& phonemes,
                       const std::vector<double>& durations_sec);
std::pair<std::vector<std::string>, std::vector<double>> read_lyrics_file(
    const std::filesystem::path& path);

}  // namespace svs::app
