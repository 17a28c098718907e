#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svs/codec.hpp"
#include "svs/nn.hpp"
#include "svs/prompt_encoder.hpp"

namespace svs {

enum class SegmentKind { prompt, separator, phoneme, melody, range_factor, acoustic };
constexpr int kSegmentKinds = 6;

struct ModelConfig {
    int hidden = 240;  // must be divisible by n_q and by the head counts
    int global_layers = 4;
    int global_heads = 4;
    int local_layers = 2;
    int local_heads = 4;
    int ffn_mult = 4;
    int n_q = 3;
    int codebook_size = 64;   // K_a
    int phoneme_vocab = 64;
    int pitch_max_hz = 1200;  // pitch tokens are integer Hz, 0..max (0 = unvoiced)
    int max_frames = 1024;
    int prompt_width = 32;    // backend embedding width
    bool use_range_factor = true;  // ablation: drop the explicit range-factor frame
    bool rescale_melody = true;    // ablation: feed raw F0 instead of the rescaled melody
    bool pooled_prompt = false;

    int sub_width() const { return hidden / n_q; }

    // unified token id space
    static constexpr int kSepToken = 0;
    static constexpr int kEndToken = 1;  // safety terminator, never emitted in layouts
    int phoneme_token(int phoneme_id) const { return 2 + phoneme_id; }
    int pitch_token(int hz) const { return 2 + phoneme_vocab + hz; }
    int acoustic_token(int codebook, int index) const {
        return 2 + phoneme_vocab + pitch_max_hz + 1 + codebook * codebook_size + index;
    }
    int pitch_base() const { return 2 + phoneme_vocab; }
    int acoustic_base() const { return pitch_base() + pitch_max_hz + 1; }
    int vocab_size() const { return acoustic_base() + n_q * codebook_size; }

    void validate() const;
};

// The single concatenated conditional+target sequence. Every frame holds n_q
// positions; non-acoustic items repeat their token n_q times. Prompt frames
// carry continuous backend vectors instead of tokens.
struct TokenLayoutSequence {
    struct Span {
        SegmentKind kind;
        int begin = 0;  // frame indices, [begin, end)
        int end = 0;
    };

    int n_q = 0;
    std::vector<SegmentKind> frame_kind;
    std::vector<std::vector<int>> frame_tokens;      // empty for prompt frames
    std::vector<std::vector<float>> prompt_raw;      // backend-width vectors, frame order
    std::vector<bool> loss_frame;
    std::vector<Span> spans;

    int frames() const { return static_cast<int>(frame_kind.size()); }
    int positions() const { return frames() * n_q; }
    bool training_mode() const;
    int melody_frames() const;
    std::optional<Span> span_of(SegmentKind kind) const;

    void validate(const ModelConfig& cfg) const;
};

// Lays out prompt -> phoneme -> melody (-> range factor) -> acoustic with
// separator frames in between. Training mode requires the targets (range
// factor and units together, unless the config drops the range factor);
// inference mode omits both and the sequence ends at the melody separator.
TokenLayoutSequence build_sequence(const PromptEmbedding& prompt,
                                   const std::vector<int>& phoneme_frames,
                                   const std::vector<int>& melody,
                                   std::optional<int> range_factor,
                                   const AcousticUnitSequence* units, const ModelConfig& cfg);

struct SamplingConfig {
    double temperature = 0.8;
    int top_k = 16;          // <= 0 disables
    bool greedy_acoustic = false;
    bool greedy_range = true;
};

struct InferenceResult {
    int range_factor = 0;  // Hz; 0 when the model runs without the factor
    AcousticUnitSequence units;
    // probability of each sampled decision under the sampling distribution,
    // range factor first (when enabled), then acoustic tokens in order
    std::vector<double> step_probs;
};

class MultiscaleTransformer {
  public:
    MultiscaleTransformer(const ModelConfig& cfg, uint64_t seed);

    const ModelConfig& config() const { return cfg_; }
    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    int64_t trained_steps() const { return trained_steps_; }
    void note_trained_steps(int64_t n) { trained_steps_ += n; }

    const nn::Tensor& prompt_projection_w() const;
    const nn::Tensor& prompt_projection_b() const;

    struct ForwardHandles {
        nn::Graph::Var sub_embed;   // [L*n_q, sub_width], token+segment embeddings
        nn::Graph::Var frame_input; // [L, hidden], global input after position add
        nn::Graph::Var global_h;    // [L, hidden]
        nn::Graph::Var local_h;     // [L*n_q, hidden]
    };
    // One differentiable pass over a (possibly partial) layout. Logits are
    // produced lazily for chosen rows via position_logits.
    ForwardHandles forward(nn::Graph& g, const TokenLayoutSequence& seq) const;
    nn::Graph::Var position_logits(nn::Graph& g, nn::Graph::Var local_h,
                                   const std::vector<int>& rows) const;

    // Accumulates gradients into params() and returns the mean cross-entropy
    // over masked positions. Grads are zeroed at entry.
    double train_step(const std::vector<TokenLayoutSequence>& batch);

    InferenceResult infer(const TokenLayoutSequence& prefix, const SamplingConfig& sampling,
                          Rng& rng) const;

    // Teacher-forced product of stepwise probabilities of a complete training
    // sequence under the sampling distribution (temperature / top-k applied).
    double score_completion(const TokenLayoutSequence& full,
                            const SamplingConfig& sampling) const;

    // aux carries pipeline metadata the checkpoint must be reproducible from
    // (phoneme vocabulary, prompt backend identity)
    void save(const std::filesystem::path& path, const std::string& rng_state = "",
              const std::string& aux = "") const;
    static struct LoadedModel load(const std::filesystem::path& path);

  private:
    struct TokenRow {
        int token = 0;
        SegmentKind kind = SegmentKind::separator;
    };
    std::vector<int> segment_row_ids(const TokenLayoutSequence& seq) const;
    nn::Graph::Var transformer_stack(nn::Graph& g, nn::Graph::Var x, const std::string& prefix,
                                     int layers, int heads, const std::vector<int>& att_begin,
                                     const std::vector<int>& att_end) const;

    // restricted softmax over [lo, hi) token ids with temperature/top-k
    std::vector<double> sampling_distribution(const nn::Tensor& logits_row, int lo, int hi,
                                              const SamplingConfig& sampling) const;

    ModelConfig cfg_;
    nn::ParamStore params_;
    int64_t trained_steps_ = 0;
};

struct LoadedModel {
    MultiscaleTransformer model;
    std::string rng_state;
    std::string aux;
};

}  // namespace svs
