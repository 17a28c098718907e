#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "svs/nn.hpp"
#include "svs/prompt.hpp"

namespace svs {

// Frame-level prompt representation. `frames` hold the projected vectors after
// the repeat rule: each token's projection is repeated n_q times and
// concatenated, so every frame vector has the transformer's hidden width.
// `raw` keeps the frozen backend's token vectors for in-graph projection
// during training.
struct PromptEmbedding {
    std::vector<std::vector<float>> raw;     // tokens x backend width
    std::vector<std::vector<float>> frames;  // tokens (or 1 if pooled) x hidden width
    std::string encoder_id;
    bool pooled = false;

    int frame_width() const { return frames.empty() ? 0 : static_cast<int>(frames[0].size()); }
    int raw_width() const { return raw.empty() ? 0 : static_cast<int>(raw[0].size()); }
};

// A frozen text encoder. Implementations must be deterministic and reentrant.
class TextBackend {
  public:
    virtual ~TextBackend() = default;
    virtual std::string id() const = 0;
    virtual int width() const = 0;
    virtual std::vector<std::vector<float>> embed(const std::string& sentence) const = 0;
    virtual uint64_t param_checksum() const = 0;
};

class BackendRegistry {
  public:
    using Factory = std::function<std::unique_ptr<TextBackend>()>;

    void register_backend(const std::string& name, Factory factory);
    std::unique_ptr<TextBackend> create(const std::string& name) const;
    std::vector<std::string> names() const;

  private:
    std::map<std::string, Factory> factories_;
};

// Projects backend token vectors with the trainable linear map and applies the
// n_q repeat rule. W is [backend_width, hidden/n_q], b is [1, hidden/n_q].
PromptEmbedding encode_prompt(const std::string& sentence, const TextBackend& backend,
                              const nn::Tensor& proj_w, const nn::Tensor& proj_b, int n_q,
                              bool pooled = false);

// ---- built-in backend --------------------------------------------------------

struct ToyEncoderConfig {
    int width = 32;
    // generous bucket spaces keep unseen words from colliding with trained
    // filler vocabulary
    int word_buckets = 4096;
    int trigram_buckets = 2048;
    uint64_t seed = 7;
};

// Keyword-aware bag-of-subwords encoder: bank keywords get dedicated embedding
// rows, every other word hashes into shared buckets, and each word vector also
// mixes in its character trigrams. Dependency-free default backend.
class ToyTextEncoder : public TextBackend {
  public:
    ToyTextEncoder(const ToyEncoderConfig& cfg, const KeywordBank& bank);

    std::string id() const override { return "toy"; }
    int width() const override { return cfg_.width; }
    std::vector<std::vector<float>> embed(const std::string& sentence) const override;
    uint64_t param_checksum() const override;

    nn::ParamStore& trainable_params() { return params_; }
    const std::vector<std::string>& keyword_list() const { return keywords_; }

    static std::vector<std::string> tokenize(const std::string& sentence);
    // embedding table rows a word draws on (keyword/bucket row + trigrams)
    std::vector<int> word_rows(const std::string& word) const;
    bool is_keyword(const std::string& word) const { return keyword_rows_.count(word) > 0; }

  private:
    ToyEncoderConfig cfg_;
    std::vector<std::string> keywords_;
    std::map<std::string, int> keyword_rows_;
    nn::ParamStore params_;  // one table: (keywords + word buckets + trigram buckets) x width
};

// ---- fine-tuning ---------------------------------------------------------------

struct FinetuneOptions {
    int epochs = 60;
    float lr = 0.02f;
    // drops non-keyword words during tuning so the head cannot lean on
    // template-specific phrasing
    double filler_dropout = 0.3;
    uint64_t seed = 11;
};

struct FinetuneReport {
    double train_accuracy = 0.0;    // exact label-set match
    double heldout_accuracy = 0.0;
    int epochs = 0;
};

// Multi-label category prediction head over mean-pooled sentence vectors; the
// backend's embedding table is updated in place. Throws ConfigError when the
// backend is not tunable or a pair's labels fall outside the category space.
FinetuneReport finetune_multilabel(
    TextBackend& backend,
    const std::vector<std::pair<std::string, AttributeLabels>>& train_pairs,
    const std::vector<std::pair<std::string, AttributeLabels>>& heldout_pairs,
    const FinetuneOptions& opts = {});

}  // namespace svs
