#include "svs/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "svs/audio.hpp"
#include <nlohmann/json.hpp>

namespace svs::app {

using nlohmann::json;

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) != nullptr) return 2;
    if (dynamic_cast<const DataError*>(&e) != nullptr) return 3;
    return 4;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        out << text;
        if (!out) throw DataError("failed writing " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_run_files(const RunContext& ctx, const RunConfig& cfg) {
    if (ctx.run_dir.empty()) return;
    std::filesystem::create_directories(ctx.run_dir);
    write_text_atomic(ctx.run_dir / "resolved_config.json", cfg.resolved_json() + "\n");
    std::string log;
    log += std::string("version: ") + kVersionString + "\n";
    log += "command: " + ctx.command_line + "\n";
    log += "seed: " + std::to_string(cfg.seed) + "\n";
    write_text_atomic(ctx.run_dir / "run.log", log);
}

namespace {

void append_run_log(const RunContext& ctx, const std::string& line) {
    if (ctx.run_dir.empty()) return;
    std::ofstream out(ctx.run_dir / "run.log", std::ios::app);
    out << line << "\n";
}

ToyTextEncoder make_toy_backend(const RunConfig& cfg, const KeywordBank& bank) {
    BackendRegistry registry;
    const RunConfig* cfg_ptr = &cfg;
    const KeywordBank* bank_ptr = &bank;
    registry.register_backend("toy", [cfg_ptr, bank_ptr]() {
        ToyEncoderConfig tc;
        tc.width = cfg_ptr->prompt_encoder.width;
        tc.seed = cfg_ptr->prompt_encoder.toy_seed;
        return std::make_unique<ToyTextEncoder>(tc, *bank_ptr);
    });
    auto backend = registry.create(cfg.prompt_encoder.backend);
    auto* toy = dynamic_cast<ToyTextEncoder*>(backend.get());
    require_config(toy != nullptr, "prompt encoder backend is not the built-in toy encoder");
    ToyEncoderConfig tc;
    tc.width = cfg.prompt_encoder.width;
    tc.seed = cfg.prompt_encoder.toy_seed;
    return ToyTextEncoder(tc, bank);
}

}  // namespace

// ---- prepare-data ------------------------------------------------------------------

double PreparedRow::duration_sec() const {
    return std::accumulate(durations_sec.begin(), durations_sec.end(), 0.0);
}

PrepareDataResult cmd_prepare_data(const RunConfig& cfg, const PrepareDataArgs& args) {
    std::filesystem::create_directories(args.out_dir);
    IngestResult ingest = ingest_corpus(args.manifest, args.kind, cfg.codec.hop);

    std::string prepared;
    for (const auto& rec : ingest.records) {
        json row{{"id", rec.id},
                 {"audio", std::filesystem::absolute(rec.audio).string()},
                 {"phonemes", rec.phonemes},
                 {"durations", rec.durations_sec},
                 {"f0", std::filesystem::absolute(rec.f0_path).string()},
                 {"gender", to_string(rec.gender)},
                 {"kind", to_string(rec.kind)},
                 {"sample_rate", rec.sample_rate},
                 {"frames", rec.frame_count}};
        prepared += row.dump() + "\n";
    }
    write_text_atomic(args.out_dir / "prepared.jsonl", prepared);

    PhonemeVocab vocab = PhonemeVocab::build(ingest.records);
    vocab.save(args.out_dir / "phonemes.json");

    std::string rejects;
    for (const auto& r : ingest.rejected) rejects += r + "\n";
    write_text_atomic(args.out_dir / "rejects.txt", rejects);

    PrepareDataResult result;
    result.prepared_manifest = args.out_dir / "prepared.jsonl";
    result.accepted = static_cast<int>(ingest.records.size());
    result.rejected = static_cast<int>(ingest.rejected.size());
    return result;
}

std::vector<PreparedRow> read_prepared(const std::filesystem::path& prepared_manifest) {
    std::ifstream in(prepared_manifest);
    if (!in) throw DataError("cannot open prepared manifest: " + prepared_manifest.string());
    std::vector<PreparedRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        PreparedRow row;
        row.id = j.at("id");
        row.audio = j.at("audio").get<std::string>();
        row.phonemes = j.at("phonemes").get<std::vector<std::string>>();
        row.durations_sec = j.at("durations").get<std::vector<double>>();
        row.f0_path = j.at("f0").get<std::string>();
        row.gender = gender_from_string(j.at("gender"));
        row.kind = corpus_kind_from_string(j.at("kind"));
        row.sample_rate = j.at("sample_rate");
        row.frames = j.at("frames");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PreparedRow> apply_data_mix(const std::vector<PreparedRow>& rows,
                                        const DataMixSpec& mix) {
    std::vector<PreparedRow> out;
    double singing_sec = 0.0, speech_sec = 0.0;
    const double sing_cap = mix.singing_hours_cap < 0
                                ? std::numeric_limits<double>::infinity()
                                : mix.singing_hours_cap * 3600.0;
    const double speech_cap = mix.speech_hours_cap < 0
                                  ? std::numeric_limits<double>::infinity()
                                  : mix.speech_hours_cap * 3600.0;
    for (const auto& row : rows) {
        if (row.kind == CorpusKind::singing) {
            if (singing_sec >= sing_cap) continue;
            singing_sec += row.duration_sec();
        } else {
            if (speech_sec >= speech_cap) continue;
            speech_sec += row.duration_sec();
        }
        out.push_back(row);
    }
    return out;
}

// ---- codec commands -----------------------------------------------------------------

namespace {

std::vector<PreparedRow> read_all_prepared(const std::vector<std::filesystem::path>& paths) {
    std::vector<PreparedRow> rows;
    for (const auto& p : paths) {
        auto part = read_prepared(p);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    require_input(!rows.empty(), "no prepared rows found");
    return rows;
}

}  // namespace

CodecTrainStats cmd_train_codec(const RunConfig& cfg, const TrainCodecArgs& args) {
    cfg.require_seed();
    write_run_files(args.run, cfg);
    const auto rows = apply_data_mix(read_all_prepared(args.prepared), cfg.data_mix);

    Codec codec(cfg.codec, cfg.seed);
    std::vector<std::vector<std::vector<double>>> mels;
    for (const auto& row : rows) {
        const Wav wav = read_wav(row.audio);
        mels.push_back(codec.extract_log_mel(wav.samples));
    }
    const size_t heldout_n = std::max<size_t>(
        1, static_cast<size_t>(static_cast<double>(mels.size()) * args.heldout_fraction));
    std::vector<std::vector<std::vector<double>>> heldout(mels.end() - heldout_n, mels.end());
    mels.resize(mels.size() - heldout_n);

    const auto t0 = std::chrono::steady_clock::now();
    const CodecTrainStats stats = codec.train(mels, heldout, cfg.train.codec_epochs, cfg.seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    codec.save(args.out_checkpoint);

    char line[256];
    std::snprintf(line, sizeof(line),
                  "codec: heldout loss %.6f -> %.6f, train loss %.6f, %.1fs",
                  stats.initial_heldout_loss, stats.final_heldout_loss,
                  stats.final_train_loss, secs);
    append_run_log(args.run, line);
    std::fprintf(stderr, "%s\n", line);
    return stats;
}

void cmd_encode(const RunConfig& cfg, const EncodeArgs& args) {
    (void)cfg;
    const Codec codec = Codec::load(args.codec_checkpoint);
    const Wav wav = read_wav(args.audio);
    const AcousticUnitSequence units = codec.encode(wav.samples, wav.sample_rate);
    write_units_file(args.out_units, units);
}

void cmd_decode(const RunConfig& cfg, const DecodeArgs& args) {
    (void)cfg;
    const Codec codec = Codec::load(args.codec_checkpoint);
    const AcousticUnitSequence units = read_units_file(args.units);
    const std::vector<float> wav = codec.decode(units);
    write_wav(args.out_wav, wav, codec.config().sample_rate);
}

// ---- model training --------------------------------------------------------------------

namespace {

struct TrainingItem {
    PreparedRow row;
    std::vector<std::vector<double>> mel_linear;
    AcousticUnitSequence units;
    std::vector<int> phoneme_frames;
    std::vector<int> melody;
    int range_factor = 0;
    double rms_value = 0.0;
    AttributeLabels labels;
    int frames = 0;
};

TrainingItem load_training_item(const PreparedRow& row, const Codec& codec,
                                const PhonemeVocab& vocab, const RunConfig& cfg) {
    TrainingItem item;
    item.row = row;
    const Wav wav = read_wav(row.audio);
    require_input(wav.sample_rate == codec.config().sample_rate,
                  "utterance " + row.id + ": sample rate mismatch with codec");
    item.mel_linear = codec.extract_linear_mel(wav.samples);
    item.units = codec.encode_features(codec.log_from_linear(item.mel_linear));
    item.rms_value = rms(wav.samples);

    const F0Sequence f0 = read_f0_file(row.f0_path.string());
    const DecoupledPitch pitch = decompose_f0(f0);
    item.range_factor =
        std::clamp(pitch.range_factor, 1, cfg.model.pitch_max_hz);

    const double rate = static_cast<double>(codec.config().sample_rate) / codec.config().hop;
    std::vector<int> phoneme_ids;
    for (const auto& p : row.phonemes) phoneme_ids.push_back(vocab.id_of(p));
    item.phoneme_frames = regulate(phoneme_ids, row.durations_sec, rate);

    std::vector<int> melody;
    if (cfg.model.rescale_melody) {
        melody = pitch.melody;
    } else {
        melody.reserve(f0.size());
        for (double v : f0.values) {
            melody.push_back(static_cast<int>(round_half_away(v)));
        }
    }
    for (int& hz : melody) hz = std::clamp(hz, 0, cfg.model.pitch_max_hz);

    const int t_frames = static_cast<int>(std::min({melody.size(),
                                                    item.phoneme_frames.size(),
                                                    static_cast<size_t>(item.units.frames())}));
    require_input(t_frames > 0, "utterance " + row.id + ": no usable frames");
    item.phoneme_frames.resize(t_frames);
    melody.resize(t_frames);
    item.melody = std::move(melody);
    AcousticUnitSequence trimmed;
    trimmed.n_q = item.units.n_q;
    trimmed.codebook_size = item.units.codebook_size;
    trimmed.units.assign(item.units.units.begin(),
                         item.units.units.begin() +
                             static_cast<size_t>(t_frames) * item.units.n_q);
    item.units = std::move(trimmed);
    item.frames = t_frames;

    item.labels.gender = row.gender;
    item.labels.volume = categorize_volume(item.rms_value, cfg.prompt.bands);
    if (row.gender != Gender::absent) {
        item.labels.vocal_range =
            categorize_range(voiced_mean(f0), row.gender, cfg.prompt.thresholds);
    }
    return item;
}

}  // namespace

TrainModelResult cmd_train_model(const RunConfig& cfg, const TrainModelArgs& args) {
    cfg.require_seed();
    write_run_files(args.run, cfg);

    const PromptAssets assets = load_prompt_assets(cfg.assets_dir);
    const Codec codec = Codec::load(args.codec_checkpoint);
    require_input(codec.trained(), "train-model: codec checkpoint is untrained");
    require_config(codec.config().n_q == cfg.model.n_q &&
                       codec.config().codebook_size == cfg.model.codebook_size,
                   "train-model: model n_q/codebook size disagree with codec");

    auto rows = apply_data_mix(read_all_prepared(args.prepared), cfg.data_mix);
    require_input(!rows.empty(), "train-model: no rows after data-mix caps");

    std::vector<UtteranceRecord> fake_records;
    for (const auto& r : rows) {
        UtteranceRecord rec;
        rec.phonemes = r.phonemes;
        fake_records.push_back(std::move(rec));
    }
    PhonemeVocab vocab = PhonemeVocab::build(fake_records);
    require_config(vocab.size() <= cfg.model.phoneme_vocab,
                   "train-model: phoneme vocabulary (" + std::to_string(vocab.size()) +
                       ") exceeds model capacity");

    ToyTextEncoder backend = make_toy_backend(cfg, assets.bank);
    const uint64_t backend_checksum = backend.param_checksum();

    RunConfig model_cfg = cfg;
    model_cfg.model.prompt_width = backend.width();
    MultiscaleTransformer model(model_cfg.model, cfg.seed);
    nn::Adam opt(nn::AdamConfig{.lr = cfg.train.lr, .beta1 = 0.9f, .beta2 = 0.98f,
                                .eps = 1e-9f, .grad_clip = 1.0f});

    TrainModelResult result;
    std::vector<TrainingItem> items;
    for (const auto& row : rows) {
        items.push_back(load_training_item(row, codec, vocab, model_cfg));
        if (row.kind == CorpusKind::singing) {
            ++result.used_singing;
        } else {
            ++result.used_speech;
        }
    }
    {
        char line[128];
        std::snprintf(line, sizeof(line), "data: %d singing + %d speech utterances",
                      result.used_singing, result.used_speech);
        append_run_log(args.run, line);
        std::fprintf(stderr, "%s\n", line);
    }

    Rng rng(cfg.seed);
    const Volume bands_cycle[3] = {Volume::low, Volume::medium, Volume::high};
    const auto t0 = std::chrono::steady_clock::now();
    double loss = 0.0;
    for (int step = 0; step < cfg.train.steps; ++step) {
        std::vector<TokenLayoutSequence> batch;
        for (int b = 0; b < cfg.train.batch_size; ++b) {
            const TrainingItem& item =
                items[rng.uniform_int(static_cast<int64_t>(items.size()))];
            AttributeLabels labels = item.labels;
            const AcousticUnitSequence* units = &item.units;
            AcousticUnitSequence augmented;
            // dynamic volume rescaling: scale the cached linear mel and
            // re-encode, relabeling volume with the target band
            if (cfg.train.volume_augment_prob > 0.0 &&
                rng.uniform() < cfg.train.volume_augment_prob) {
                const Volume target = bands_cycle[rng.uniform_int(3)];
                const auto& band = cfg.prompt.bands.band(target);
                const double target_rms = rng.uniform(band[0], band[1]);
                const double scale = target_rms / item.rms_value;
                auto scaled = item.mel_linear;
                for (auto& frame : scaled) {
                    for (auto& v : frame) v *= scale;
                }
                augmented = codec.encode_features(codec.log_from_linear(scaled));
                augmented.units.resize(static_cast<size_t>(item.frames) * augmented.n_q);
                units = &augmented;
                labels.volume = target;
            }
            labels = drop_labels(labels, cfg.prompt.p1, cfg.prompt.p2, rng);
            const PromptSample sample =
                assemble_prompt(labels, assets.bank, assets.train_templates, rng);
            const PromptEmbedding emb = encode_prompt(
                sample.sentence, backend, model.prompt_projection_w(),
                model.prompt_projection_b(), cfg.model.n_q, cfg.prompt_encoder.pooled);
            std::optional<int> rf;
            if (cfg.model.use_range_factor) rf = item.range_factor;
            batch.push_back(build_sequence(emb, item.phoneme_frames, item.melody, rf, units,
                                           model_cfg.model));
        }
        loss = model.train_step(batch);
        opt.step(model.params());
        model.note_trained_steps(1);
        if (cfg.train.log_every > 0 &&
            (step % cfg.train.log_every == 0 || step + 1 == cfg.train.steps)) {
            char line[128];
            std::snprintf(line, sizeof(line), "step %d loss %.5f", step, loss);
            append_run_log(args.run, line);
            std::fprintf(stderr, "%s\n", line);
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    require_input(backend.param_checksum() == backend_checksum,
                  "frozen-backend contract violated: prompt encoder changed during training");

    json phoneme_json = json::object();
    for (const auto& [p, id] : vocab.ids) phoneme_json[p] = id;
    const json aux{{"phonemes", phoneme_json},
                   {"prompt_backend", cfg.prompt_encoder.backend},
                   {"toy_seed", cfg.prompt_encoder.toy_seed},
                   {"prompt_width", cfg.prompt_encoder.width},
                   {"pooled", cfg.prompt_encoder.pooled}};
    model.save(args.out_checkpoint, rng.serialize(), aux.dump());

    char line[128];
    std::snprintf(line, sizeof(line), "trained %d steps in %.1fs, final loss %.5f",
                  cfg.train.steps, secs, loss);
    append_run_log(args.run, line);
    std::fprintf(stderr, "%s\n", line);
    result.final_loss = loss;
    return result;
}

// ---- synthesis ------------------------------------------------------------------------

void write_lyrics_file(const std::filesystem::path& path,
                       const std::vector<std::string>& phonemes,
                       const std::vector<double>& durations_sec) {
    require_input(phonemes.size() == durations_sec.size(),
                  "lyrics: phoneme/duration count mismatch");
    std::string text;
    char buf[96];
    for (size_t i = 0; i < phonemes.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s %.6f\n", phonemes[i].c_str(), durations_sec[i]);
        text += buf;
    }
    write_text_atomic(path, text);
}

std::pair<std::vector<std::string>, std::vector<double>> read_lyrics_file(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lyrics file: " + path.string());
    std::vector<std::string> phonemes;
    std::vector<double> durations;
    std::string p;
    double d = 0.0;
    while (in >> p >> d) {
        phonemes.push_back(p);
        durations.push_back(d);
    }
    require_input(!phonemes.empty(), "lyrics file is empty: " + path.string());
    return {phonemes, durations};
}

SynthesizeResult cmd_synthesize(const RunConfig& cfg, const SynthesizeArgs& args) {
    const auto t0 = std::chrono::steady_clock::now();
    auto loaded = MultiscaleTransformer::load(args.model_checkpoint);
    MultiscaleTransformer& model = loaded.model;
    const Codec codec = Codec::load(args.codec_checkpoint);
    const json aux = json::parse(loaded.aux.empty() ? "{}" : loaded.aux);

    const PromptAssets assets = load_prompt_assets(cfg.assets_dir);
    RunConfig enc_cfg = cfg;
    if (aux.contains("toy_seed")) enc_cfg.prompt_encoder.toy_seed = aux.at("toy_seed");
    if (aux.contains("prompt_width")) enc_cfg.prompt_encoder.width = aux.at("prompt_width");
    if (aux.contains("prompt_backend")) enc_cfg.prompt_encoder.backend = aux.at("prompt_backend");
    const bool pooled = aux.value("pooled", cfg.prompt_encoder.pooled);
    ToyTextEncoder backend = make_toy_backend(enc_cfg, assets.bank);

    PhonemeVocab vocab;
    require_input(aux.contains("phonemes"),
                  "model checkpoint carries no phoneme vocabulary");
    for (auto& [p, id] : aux.at("phonemes").items()) vocab.ids[p] = id.get<int>();

    // melody: rescale unless the checkpoint was trained on raw F0
    const F0Sequence f0 = read_f0_file(args.melody.string());
    require_input(f0.size() > 0, "melody file is empty: " + args.melody.string());
    std::vector<int> melody;
    if (model.config().rescale_melody) {
        melody = decompose_f0(f0).melody;
    } else {
        for (double v : f0.values) melody.push_back(static_cast<int>(round_half_away(v)));
    }
    for (int& hz : melody) hz = std::clamp(hz, 0, model.config().pitch_max_hz);

    const auto [phonemes, durations] = read_lyrics_file(args.lyrics);
    const double rate = static_cast<double>(codec.config().sample_rate) / codec.config().hop;
    std::vector<int> phoneme_ids;
    for (const auto& p : phonemes) phoneme_ids.push_back(vocab.id_of(p));
    std::vector<int> phoneme_frames = regulate(phoneme_ids, durations, rate);

    const long long diff = static_cast<long long>(phoneme_frames.size()) -
                           static_cast<long long>(melody.size());
    require_input(std::llabs(diff) <= 2,
                  "lyrics regulate to " + std::to_string(phoneme_frames.size()) +
                      " frames but the melody has " + std::to_string(melody.size()));
    const size_t t_frames = std::min(phoneme_frames.size(), melody.size());
    phoneme_frames.resize(t_frames);
    melody.resize(t_frames);

    const PromptEmbedding emb =
        encode_prompt(args.prompt, backend, model.prompt_projection_w(),
                      model.prompt_projection_b(), model.config().n_q, pooled);
    const TokenLayoutSequence prefix = build_sequence(
        emb, phoneme_frames, melody, std::nullopt, nullptr, model.config());

    Rng rng(cfg.seed_set ? cfg.seed : 0);
    const InferenceResult inf = model.infer(prefix, cfg.sampling, rng);

    const std::vector<float> wav = codec.decode(inf.units);
    write_wav(args.out_wav, wav, codec.config().sample_rate);

    SynthesizeResult result;
    result.range_factor = inf.range_factor;
    result.frames = inf.units.frames();
    result.wav = args.out_wav;
    result.units = args.out_wav;
    result.units.replace_extension(".units");
    write_units_file(result.units, inf.units);
    result.range_file = args.out_wav;
    result.range_file.replace_extension(".f0hz");
    write_text_atomic(result.range_file, std::to_string(inf.range_factor) + "\n");

    result.elapsed_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "synthesized %d frames (%.2fs audio) in %.2fs\n", result.frames,
                 result.frames * codec.config().hop /
                     static_cast<double>(codec.config().sample_rate),
                 result.elapsed_sec);
    return result;
}

// ---- evaluation --------------------------------------------------------------------------

double cmd_train_gender_classifier(const RunConfig& cfg, const TrainClassifierArgs& args) {
    const auto rows = apply_data_mix(read_all_prepared(args.prepared), cfg.data_mix);
    std::vector<SpectralGenderClassifier::TrainItem> items;
    for (const auto& row : rows) {
        if (row.gender == Gender::absent) continue;
        const Wav wav = read_wav(row.audio);
        items.push_back({wav.samples, wav.sample_rate, row.gender});
    }
    require_input(!items.empty(), "classifier training: no labeled rows");
    SpectralGenderClassifier classifier;
    const double acc = classifier.train(items, /*epochs=*/200, cfg.seed_set ? cfg.seed : 5);
    classifier.save(args.out_path);
    std::fprintf(stderr, "gender classifier training accuracy: %.1f%%\n", 100.0 * acc);
    return acc;
}

EvalReport cmd_evaluate(const RunConfig& cfg, const EvaluateArgs& args) {
    std::ifstream in(args.manifest);
    if (!in) throw DataError("cannot open evaluation manifest: " + args.manifest.string());
    std::vector<EvalItem> items;
    std::string line;
    const auto base = args.manifest.parent_path();
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const json j = json::parse(line);
        EvalItem item;
        item.id = j.at("id");
        item.audio = base / j.at("audio").get<std::string>();
        item.intended.gender = gender_from_string(j.value("gender", ""));
        item.intended.volume = volume_from_string(j.value("volume", ""));
        item.intended.vocal_range = range_from_string(j.value("range", ""));
        if (j.contains("reference_f0")) {
            item.reference_f0 = base / j.at("reference_f0").get<std::string>();
        }
        items.push_back(std::move(item));
    }

    std::unique_ptr<SpectralGenderClassifier> classifier;
    if (!args.classifier.empty()) {
        classifier = std::make_unique<SpectralGenderClassifier>(
            SpectralGenderClassifier::load(args.classifier));
    }

    EvalConfig eval_cfg;
    eval_cfg.bands = cfg.prompt.bands;
    eval_cfg.thresholds = cfg.prompt.thresholds;
    const EvalReport report = evaluate_batch(items, classifier.get(), eval_cfg);
    write_text_atomic(args.report, report.to_json() + "\n");
    std::fprintf(stderr, "%s", report.table_text().c_str());
    return report;
}

// ---- toy data -----------------------------------------------------------------------------

ToyCorpusResult cmd_make_toy_data(const RunConfig& cfg, const MakeToyDataArgs& args) {
    (void)cfg;
    ToyCorpusConfig tc;
    tc.items = args.items;
    tc.frames = args.frames;
    tc.kind = args.kind;
    tc.seed = args.seed;
    return generate_toy_corpus(args.out_dir, tc);
}

}  // namespace svs::app
