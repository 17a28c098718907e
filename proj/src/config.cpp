#include "svs/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;

namespace {

json to_json(const RunConfig& c) {
    return json{
        {"seed", c.seed},
        {"seed_set", c.seed_set},
        {"assets_dir", c.assets_dir},
        {"prompt_encoder",
         {{"backend", c.prompt_encoder.backend},
          {"pooled", c.prompt_encoder.pooled},
          {"width", c.prompt_encoder.width},
          {"toy_seed", c.prompt_encoder.toy_seed}}},
        {"prompt",
         {{"p1", c.prompt.p1},
          {"p2", c.prompt.p2},
          {"volume_bands",
           {{"low", c.prompt.bands.low},
            {"medium", c.prompt.bands.medium},
            {"high", c.prompt.bands.high}}},
          {"range_thresholds",
           {{"male_hz", c.prompt.thresholds.male_hz},
            {"female_hz", c.prompt.thresholds.female_hz}}}}},
        {"codec",
         {{"n_q", c.codec.n_q},
          {"total_levels", c.codec.total_levels},
          {"codebook_size", c.codec.codebook_size},
          {"sample_rate", c.codec.sample_rate},
          {"hop", c.codec.hop},
          {"feature_dim", c.codec.feature_dim},
          {"conv_hidden", c.codec.conv_hidden},
          {"mel",
           {{"win", c.codec.mel.win},
            {"n_mels", c.codec.mel.n_mels},
            {"fmin", c.codec.mel.fmin},
            {"fmax", c.codec.mel.fmax}}}}},
        {"model",
         {{"hidden", c.model.hidden},
          {"global_layers", c.model.global_layers},
          {"global_heads", c.model.global_heads},
          {"local_layers", c.model.local_layers},
          {"local_heads", c.model.local_heads},
          {"ffn_mult", c.model.ffn_mult},
          {"n_q", c.model.n_q},
          {"codebook_size", c.model.codebook_size},
          {"phoneme_vocab", c.model.phoneme_vocab},
          {"pitch_max_hz", c.model.pitch_max_hz},
          {"max_frames", c.model.max_frames},
          {"use_range_factor", c.model.use_range_factor},
          {"rescale_melody", c.model.rescale_melody}}},
        {"sampling",
         {{"temperature", c.sampling.temperature},
          {"top_k", c.sampling.top_k},
          {"greedy_acoustic", c.sampling.greedy_acoustic},
          {"greedy_range", c.sampling.greedy_range}}},
        {"data_mix",
         {{"singing_hours_cap", c.data_mix.singing_hours_cap},
          {"speech_hours_cap", c.data_mix.speech_hours_cap}}},
        {"train",
         {{"steps", c.train.steps},
          {"batch_size", c.train.batch_size},
          {"lr", c.train.lr},
          {"codec_epochs", c.train.codec_epochs},
          {"volume_augment_prob", c.train.volume_augment_prob},
          {"log_every", c.train.log_every}}}};
}

void from_json(const json& j, RunConfig& c) {
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<uint64_t>();
        c.seed_set = true;
    }
    if (j.contains("seed_set")) c.seed_set = j.at("seed_set").get<bool>();
    if (j.contains("assets_dir")) c.assets_dir = j.at("assets_dir");
    if (j.contains("prompt_encoder")) {
        const auto& p = j.at("prompt_encoder");
        if (p.contains("backend")) c.prompt_encoder.backend = p.at("backend");
        if (p.contains("pooled")) c.prompt_encoder.pooled = p.at("pooled");
        if (p.contains("width")) c.prompt_encoder.width = p.at("width");
        if (p.contains("toy_seed")) c.prompt_encoder.toy_seed = p.at("toy_seed");
    }
    if (j.contains("prompt")) {
        const auto& p = j.at("prompt");
        if (p.contains("p1")) c.prompt.p1 = p.at("p1");
        if (p.contains("p2")) c.prompt.p2 = p.at("p2");
        if (p.contains("volume_bands")) {
            const auto& b = p.at("volume_bands");
            if (b.contains("low")) c.prompt.bands.low = b.at("low");
            if (b.contains("medium")) c.prompt.bands.medium = b.at("medium");
            if (b.contains("high")) c.prompt.bands.high = b.at("high");
        }
        if (p.contains("range_thresholds")) {
            const auto& t = p.at("range_thresholds");
            if (t.contains("male_hz")) c.prompt.thresholds.male_hz = t.at("male_hz");
            if (t.contains("female_hz")) c.prompt.thresholds.female_hz = t.at("female_hz");
        }
    }
    if (j.contains("codec")) {
        const auto& k = j.at("codec");
        if (k.contains("n_q")) c.codec.n_q = k.at("n_q");
        if (k.contains("total_levels")) c.codec.total_levels = k.at("total_levels");
        if (k.contains("codebook_size")) c.codec.codebook_size = k.at("codebook_size");
        if (k.contains("sample_rate")) c.codec.sample_rate = k.at("sample_rate");
        if (k.contains("hop")) c.codec.hop = k.at("hop");
        if (k.contains("feature_dim")) c.codec.feature_dim = k.at("feature_dim");
        if (k.contains("conv_hidden")) c.codec.conv_hidden = k.at("conv_hidden");
        if (k.contains("mel")) {
            const auto& m = k.at("mel");
            if (m.contains("win")) c.codec.mel.win = m.at("win");
            if (m.contains("n_mels")) c.codec.mel.n_mels = m.at("n_mels");
            if (m.contains("fmin")) c.codec.mel.fmin = m.at("fmin");
            if (m.contains("fmax")) c.codec.mel.fmax = m.at("fmax");
        }
        c.codec.mel.sample_rate = c.codec.sample_rate;
        c.codec.mel.hop = c.codec.hop;
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        if (m.contains("hidden")) c.model.hidden = m.at("hidden");
        if (m.contains("global_layers")) c.model.global_layers = m.at("global_layers");
        if (m.contains("global_heads")) c.model.global_heads = m.at("global_heads");
        if (m.contains("local_layers")) c.model.local_layers = m.at("local_layers");
        if (m.contains("local_heads")) c.model.local_heads = m.at("local_heads");
        if (m.contains("ffn_mult")) c.model.ffn_mult = m.at("ffn_mult");
        if (m.contains("n_q")) c.model.n_q = m.at("n_q");
        if (m.contains("codebook_size")) c.model.codebook_size = m.at("codebook_size");
        if (m.contains("phoneme_vocab")) c.model.phoneme_vocab = m.at("phoneme_vocab");
        if (m.contains("pitch_max_hz")) c.model.pitch_max_hz = m.at("pitch_max_hz");
        if (m.contains("max_frames")) c.model.max_frames = m.at("max_frames");
        if (m.contains("use_range_factor")) c.model.use_range_factor = m.at("use_range_factor");
        if (m.contains("rescale_melody")) c.model.rescale_melody = m.at("rescale_melody");
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        if (s.contains("temperature")) c.sampling.temperature = s.at("temperature");
        if (s.contains("top_k")) c.sampling.top_k = s.at("top_k");
        if (s.contains("greedy_acoustic")) c.sampling.greedy_acoustic = s.at("greedy_acoustic");
        if (s.contains("greedy_range")) c.sampling.greedy_range = s.at("greedy_range");
    }
    if (j.contains("data_mix")) {
        const auto& d = j.at("data_mix");
        if (d.contains("singing_hours_cap"))
            c.data_mix.singing_hours_cap = d.at("singing_hours_cap");
        if (d.contains("speech_hours_cap"))
            c.data_mix.speech_hours_cap = d.at("speech_hours_cap");
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (t.contains("steps")) c.train.steps = t.at("steps");
        if (t.contains("batch_size")) c.train.batch_size = t.at("batch_size");
        if (t.contains("lr")) c.train.lr = t.at("lr");
        if (t.contains("codec_epochs")) c.train.codec_epochs = t.at("codec_epochs");
        if (t.contains("volume_augment_prob"))
            c.train.volume_augment_prob = t.at("volume_augment_prob");
        if (t.contains("log_every")) c.train.log_every = t.at("log_every");
    }
}

}  // namespace

RunConfig RunConfig::defaults() {
    RunConfig c;
    // keep the model's codec-facing dimensions in sync with the codec defaults
    c.model.codebook_size = c.codec.codebook_size;
    c.model.n_q = c.codec.n_q;
    c.prompt_encoder.width = c.model.prompt_width;
    return c;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    RunConfig c = defaults();
    from_json(j, c);
    c.model.prompt_width = c.prompt_encoder.width;
    return c;
}

void RunConfig::apply_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config override parse error: ") + e.what());
    }
    from_json(j, *this);
    model.prompt_width = prompt_encoder.width;
}

std::string RunConfig::resolved_json() const { return to_json(*this).dump(2); }

void RunConfig::require_seed() const {
    require_config(seed_set, "a seed is mandatory for training runs (set \"seed\")");
}

}  // namespace svs
