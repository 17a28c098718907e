#include "svs/prompt_encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace svs {

void BackendRegistry::register_backend(const std::string& name, Factory factory) {
    require_config(factories_.count(name) == 0, "backend already registered: " + name);
    factories_[name] = std::move(factory);
}

std::unique_ptr<TextBackend> BackendRegistry::create(const std::string& name) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) {
        std::string known;
        for (const auto& [n, f] : factories_) {
            if (!known.empty()) known += ", ";
            known += n;
        }
        throw ConfigError("unknown prompt encoder backend '" + name +
                          "' (registered: " + known + ")");
    }
    return it->second();
}

std::vector<std::string> BackendRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [n, f] : factories_) out.push_back(n);
    return out;
}

PromptEmbedding encode_prompt(const std::string& sentence, const TextBackend& backend,
                              const nn::Tensor& proj_w, const nn::Tensor& proj_b, int n_q,
                              bool pooled) {
    require_input(!sentence.empty(), "encode_prompt: empty sentence");
    require_input(proj_w.rows == backend.width(),
                  "encode_prompt: projection rows must match backend width");
    require_input(proj_b.rows == 1 && proj_b.cols == proj_w.cols,
                  "encode_prompt: projection bias shape mismatch");
    require_input(n_q >= 1, "encode_prompt: n_q must be positive");

    PromptEmbedding emb;
    emb.encoder_id = backend.id();
    emb.pooled = pooled;
    emb.raw = backend.embed(sentence);
    require_input(!emb.raw.empty(), "encode_prompt: backend produced no tokens");

    if (pooled) {
        std::vector<float> mean(backend.width(), 0.0f);
        for (const auto& v : emb.raw) {
            for (size_t j = 0; j < mean.size(); ++j) mean[j] += v[j];
        }
        for (auto& m : mean) m /= static_cast<float>(emb.raw.size());
        emb.raw.assign(1, std::move(mean));
    }

    const int sub = proj_w.cols;
    for (const auto& v : emb.raw) {
        std::vector<float> proj(sub, 0.0f);
        for (int j = 0; j < sub; ++j) {
            float acc = proj_b.at(0, j);
            for (int i = 0; i < proj_w.rows; ++i) acc += v[i] * proj_w.at(i, j);
            proj[j] = acc;
        }
        std::vector<float> frame(static_cast<size_t>(sub) * n_q);
        for (int r = 0; r < n_q; ++r) {
            std::copy(proj.begin(), proj.end(), frame.begin() + static_cast<size_t>(r) * sub);
        }
        emb.frames.push_back(std::move(frame));
    }
    return emb;
}

// ---- toy encoder ----------------------------------------------------------------

namespace {

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

std::vector<std::string> ToyTextEncoder::tokenize(const std::string& sentence) {
    std::vector<std::string> words;
    std::string cur;
    for (char raw : sentence) {
        const unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c) || raw == '-') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

ToyTextEncoder::ToyTextEncoder(const ToyEncoderConfig& cfg, const KeywordBank& bank)
    : cfg_(cfg) {
    for (const auto& [attr, cats] : bank.entries) {
        for (const auto& [cat, words] : cats) {
            for (const auto& w : words) keywords_.push_back(w);
        }
    }
    std::sort(keywords_.begin(), keywords_.end());
    keywords_.erase(std::unique(keywords_.begin(), keywords_.end()), keywords_.end());
    for (size_t i = 0; i < keywords_.size(); ++i) {
        keyword_rows_[keywords_[i]] = static_cast<int>(i);
    }
    const int rows =
        static_cast<int>(keywords_.size()) + cfg_.word_buckets + cfg_.trigram_buckets;
    Rng rng(cfg_.seed);
    nn::Parameter& table = params_.add_normal("table", rows, cfg_.width, rng, 0.3f);
    // keyword rows stay salient; hashed filler vocabulary starts quiet so
    // unseen words perturb a sentence only mildly
    for (int r = static_cast<int>(keywords_.size()); r < rows; ++r) {
        for (int c = 0; c < cfg_.width; ++c) table.value.at(r, c) *= 0.15f;
    }
}

std::vector<int> ToyTextEncoder::word_rows(const std::string& word) const {
    std::vector<int> ids;
    auto it = keyword_rows_.find(word);
    if (it != keyword_rows_.end()) {
        ids.push_back(it->second);
    } else {
        ids.push_back(static_cast<int>(keywords_.size()) +
                      static_cast<int>(fnv1a(word) % cfg_.word_buckets));
    }
    const std::string padded = "#" + word + "#";
    const int tri_base = static_cast<int>(keywords_.size()) + cfg_.word_buckets;
    for (size_t i = 0; i + 3 <= padded.size(); ++i) {
        ids.push_back(tri_base +
                      static_cast<int>(fnv1a(padded.substr(i, 3)) % cfg_.trigram_buckets));
    }
    return ids;
}

std::vector<std::vector<float>> ToyTextEncoder::embed(const std::string& sentence) const {
    require_input(!sentence.empty(), "toy encoder: empty sentence");
    const auto words = tokenize(sentence);
    require_input(!words.empty(), "toy encoder: sentence has no words");
    const nn::Tensor& table = params_[0].value;

    std::vector<std::vector<float>> out;
    for (const auto& word : words) {
        const auto ids = word_rows(word);
        std::vector<float> vec(cfg_.width, 0.0f);
        for (int id : ids) {
            for (int j = 0; j < cfg_.width; ++j) vec[j] += table.at(id, j);
        }
        for (auto& x : vec) x /= static_cast<float>(ids.size());
        out.push_back(std::move(vec));
    }
    return out;
}

uint64_t ToyTextEncoder::param_checksum() const { return params_.checksum(); }

// ---- fine-tuning -----------------------------------------------------------------

namespace {

// category outputs: male, female | vol low, vol medium, vol high | range low, range high
constexpr int kCategoryCount = 7;

nn::Tensor label_targets(const AttributeLabels& l) {
    nn::Tensor t(1, kCategoryCount);
    if (l.gender == Gender::male) t.at(0, 0) = 1.0f;
    if (l.gender == Gender::female) t.at(0, 1) = 1.0f;
    if (l.volume == Volume::low) t.at(0, 2) = 1.0f;
    if (l.volume == Volume::medium) t.at(0, 3) = 1.0f;
    if (l.volume == Volume::high) t.at(0, 4) = 1.0f;
    if (l.vocal_range == VocalRange::low) t.at(0, 5) = 1.0f;
    if (l.vocal_range == VocalRange::high) t.at(0, 6) = 1.0f;
    return t;
}

bool prediction_matches(const nn::Tensor& logits, const nn::Tensor& targets) {
    for (int j = 0; j < kCategoryCount; ++j) {
        const bool on = logits.at(0, j) > 0.0f;  // sigmoid > 0.5
        if (on != (targets.at(0, j) > 0.5f)) return false;
    }
    return true;
}

}  // namespace

FinetuneReport finetune_multilabel(
    TextBackend& backend,
    const std::vector<std::pair<std::string, AttributeLabels>>& train_pairs,
    const std::vector<std::pair<std::string, AttributeLabels>>& heldout_pairs,
    const FinetuneOptions& opts) {
    auto* toy = dynamic_cast<ToyTextEncoder*>(&backend);
    require_config(toy != nullptr,
                   "finetune_multilabel: backend '" + backend.id() + "' is not tunable");
    require_config(!train_pairs.empty(), "finetune_multilabel: no training pairs");
    for (const auto& [sentence, labels] : train_pairs) {
        require_config(labels.present_count() >= 1 && labels.valid(),
                       "finetune_multilabel: labels outside the category space for: " +
                           sentence);
    }

    nn::ParamStore& enc_params = toy->trainable_params();
    nn::ParamStore head;
    Rng rng(opts.seed);
    head.add_normal("head.w", 2 * backend.width(), kCategoryCount, rng, 0.1f);
    head.add("head.b", 1, kCategoryCount);

    // mean over all word vectors, each word a mean over its table rows;
    // during training non-keyword words may be dropped
    auto forward = [&](nn::Graph& g, const std::string& sentence, Rng* dropout_rng) {
        nn::Graph::Var table = g.param(enc_params[0]);
        std::vector<nn::Graph::Var> word_vecs;
        for (const auto& w : ToyTextEncoder::tokenize(sentence)) {
            if (dropout_rng != nullptr && !toy->is_keyword(w) &&
                dropout_rng->uniform() < opts.filler_dropout) {
                continue;
            }
            word_vecs.push_back(g.mean_rows(g.rows_gather(table, toy->word_rows(w))));
        }
        if (word_vecs.empty()) {
            word_vecs.push_back(g.mean_rows(
                g.rows_gather(table, toy->word_rows("song"))));
        }
        // max pooling keeps keyword saliency independent of sentence length
        nn::Graph::Var stacked = g.concat_rows(word_vecs);
        nn::Graph::Var pooled = g.concat_cols({g.max_rows(stacked), g.mean_rows(stacked)});
        return g.add_rowvec(g.matmul(pooled, g.param(*head.find("head.w"))),
                            g.param(*head.find("head.b")));
    };

    auto accuracy = [&](const std::vector<std::pair<std::string, AttributeLabels>>& pairs) {
        if (pairs.empty()) return 0.0;
        int correct = 0;
        for (const auto& [sentence, labels] : pairs) {
            nn::Graph g;
            const nn::Graph::Var logits = forward(g, sentence, nullptr);
            if (prediction_matches(g.val(logits), label_targets(labels))) ++correct;
        }
        return static_cast<double>(correct) / pairs.size();
    };

    nn::Adam opt_enc(nn::AdamConfig{.lr = opts.lr, .beta1 = 0.9f, .beta2 = 0.98f,
                                    .eps = 1e-9f, .grad_clip = 0.0f});
    nn::Adam opt_head(nn::AdamConfig{.lr = opts.lr, .beta1 = 0.9f, .beta2 = 0.98f,
                                     .eps = 1e-9f, .grad_clip = 0.0f});

    std::vector<size_t> order(train_pairs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_int(static_cast<int64_t>(i))]);
        }
        for (size_t idx : order) {
            const auto& [sentence, labels] = train_pairs[idx];
            enc_params.zero_grads();
            head.zero_grads();
            nn::Graph g;
            const nn::Graph::Var logits = forward(g, sentence, &rng);
            const nn::Graph::Var loss = g.bce_with_logits_sum(logits, label_targets(labels));
            g.backward(loss);
            opt_enc.step(enc_params);
            opt_head.step(head);
        }
    }

    FinetuneReport report;
    report.epochs = opts.epochs;
    report.train_accuracy = accuracy(train_pairs);
    report.heldout_accuracy = accuracy(heldout_pairs);
    return report;
}

}  // namespace svs
