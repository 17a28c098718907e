#include "svs/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;
using nn::Graph;
using nn::Tensor;

void ModelConfig::validate() const {
    require_config(n_q >= 1, "model: n_q must be positive");
    require_config(hidden % n_q == 0, "model: hidden width must be divisible by n_q");
    require_config(hidden % global_heads == 0 && hidden % local_heads == 0,
                   "model: hidden width must be divisible by the head counts");
    require_config(global_layers >= 1 && local_layers >= 1, "model: need at least one layer");
    require_config(codebook_size >= 1 && phoneme_vocab >= 1 && pitch_max_hz >= 1,
                   "model: bad vocabulary sizes");
    require_config(max_frames >= 8, "model: max_frames too small");
    require_config(prompt_width >= 1, "model: prompt width must be positive");
}

bool TokenLayoutSequence::training_mode() const {
    return span_of(SegmentKind::acoustic).has_value();
}

int TokenLayoutSequence::melody_frames() const {
    const auto span = span_of(SegmentKind::melody);
    return span ? span->end - span->begin : 0;
}

std::optional<TokenLayoutSequence::Span> TokenLayoutSequence::span_of(
    SegmentKind kind) const {
    for (const auto& s : spans) {
        if (s.kind == kind) return s;
    }
    return std::nullopt;
}

void TokenLayoutSequence::validate(const ModelConfig& cfg) const {
    require_input(n_q == cfg.n_q, "layout: n_q disagrees with model config");
    require_input(frames() > 0, "layout: empty sequence");
    size_t prompt_seen = 0;
    for (int f = 0; f < frames(); ++f) {
        const SegmentKind kind = frame_kind[f];
        if (kind == SegmentKind::prompt) {
            require_input(frame_tokens[f].empty(), "layout: prompt frame carries tokens");
            ++prompt_seen;
            require_input(!loss_frame[f], "layout: prompt frame marked for loss");
            continue;
        }
        require_input(static_cast<int>(frame_tokens[f].size()) == n_q,
                      "layout: frame " + std::to_string(f) + " is not rectangular");
        if (kind != SegmentKind::acoustic) {
            // repeat rule: the n_q copies of a non-acoustic item must agree
            for (int c = 1; c < n_q; ++c) {
                require_input(frame_tokens[f][c] == frame_tokens[f][0],
                              "layout: inconsistent repeated item at frame " +
                                  std::to_string(f));
            }
        }
        for (int c = 0; c < n_q; ++c) {
            const int tok = frame_tokens[f][c];
            bool ok = false;
            switch (kind) {
                case SegmentKind::separator: ok = tok == ModelConfig::kSepToken; break;
                case SegmentKind::phoneme:
                    ok = tok >= cfg.phoneme_token(0) && tok < cfg.pitch_base();
                    break;
                case SegmentKind::melody:
                    ok = tok >= cfg.pitch_token(0) && tok < cfg.acoustic_base();
                    break;
                case SegmentKind::range_factor:
                    ok = tok > cfg.pitch_token(0) && tok < cfg.acoustic_base();
                    break;
                case SegmentKind::acoustic:
                    ok = tok >= cfg.acoustic_token(c, 0) &&
                         tok < cfg.acoustic_token(c, cfg.codebook_size);
                    break;
                default: ok = false;
            }
            require_input(ok, "layout: token out of segment range at frame " +
                                  std::to_string(f));
        }
        const bool should_mask =
            kind == SegmentKind::range_factor || kind == SegmentKind::acoustic;
        require_input(loss_frame[f] == should_mask,
                      "layout: loss mask must cover exactly range factor and acoustic "
                      "frames (frame " +
                          std::to_string(f) + ")");
    }
    require_input(prompt_seen == prompt_raw.size(),
                  "layout: prompt vector count disagrees with prompt frames");

    // segment order: prompt -> phoneme -> melody -> [range_factor] -> acoustic
    std::vector<SegmentKind> order;
    for (const auto& s : spans) order.push_back(s.kind);
    std::vector<SegmentKind> expected = {SegmentKind::prompt, SegmentKind::phoneme,
                                         SegmentKind::melody};
    if (training_mode()) {
        if (span_of(SegmentKind::range_factor)) expected.push_back(SegmentKind::range_factor);
        expected.push_back(SegmentKind::acoustic);
    }
    require_input(order == expected, "layout: segments out of order");
}

TokenLayoutSequence build_sequence(const PromptEmbedding& prompt,
                                   const std::vector<int>& phoneme_frames,
                                   const std::vector<int>& melody,
                                   std::optional<int> range_factor,
                                   const AcousticUnitSequence* units, const ModelConfig& cfg) {
    cfg.validate();
    const int t_frames = static_cast<int>(melody.size());
    require_input(static_cast<int>(phoneme_frames.size()) == t_frames,
                  "build_sequence: phoneme segment has " +
                      std::to_string(phoneme_frames.size()) + " frames, melody segment has " +
                      std::to_string(t_frames));
    require_input(t_frames > 0, "build_sequence: melody segment is empty");
    require_input(!prompt.raw.empty(), "build_sequence: prompt segment is empty");

    const bool want_rf = cfg.use_range_factor;
    const bool training = units != nullptr;
    if (training) {
        require_input(units->frames() == t_frames,
                      "build_sequence: acoustic segment has " +
                          std::to_string(units->frames()) + " frames, melody segment has " +
                          std::to_string(t_frames));
        require_input(units->n_q == cfg.n_q, "build_sequence: units n_q mismatch");
        require_input(units->codebook_size == cfg.codebook_size,
                      "build_sequence: units codebook size mismatch");
        require_input(range_factor.has_value() == want_rf,
                      want_rf ? "build_sequence: training mode needs a range factor"
                              : "build_sequence: range factor supplied but disabled");
    } else {
        require_input(!range_factor.has_value(),
                      "build_sequence: range factor without acoustic targets");
    }
    if (range_factor) {
        require_input(*range_factor >= 1 && *range_factor <= cfg.pitch_max_hz,
                      "build_sequence: range factor outside the pitch vocabulary");
    }

    TokenLayoutSequence seq;
    seq.n_q = cfg.n_q;
    auto push_frame = [&seq, &cfg](SegmentKind kind, int token, bool loss) {
        seq.frame_kind.push_back(kind);
        seq.frame_tokens.emplace_back(kind == SegmentKind::prompt
                                          ? std::vector<int>{}
                                          : std::vector<int>(cfg.n_q, token));
        seq.loss_frame.push_back(loss);
    };
    auto push_sep = [&]() { push_frame(SegmentKind::separator, ModelConfig::kSepToken, false); };

    int begin = 0;
    for (const auto& raw : prompt.raw) {
        require_input(static_cast<int>(raw.size()) == cfg.prompt_width,
                      "build_sequence: prompt vector width mismatch");
        push_frame(SegmentKind::prompt, 0, false);
        seq.prompt_raw.push_back(raw);
    }
    seq.spans.push_back({SegmentKind::prompt, begin, seq.frames()});
    push_sep();

    begin = seq.frames();
    for (int pid : phoneme_frames) {
        require_input(pid >= 0 && pid < cfg.phoneme_vocab,
                      "build_sequence: phoneme id out of vocabulary");
        push_frame(SegmentKind::phoneme, cfg.phoneme_token(pid), false);
    }
    seq.spans.push_back({SegmentKind::phoneme, begin, seq.frames()});
    push_sep();

    begin = seq.frames();
    for (int hz : melody) {
        require_input(hz >= 0 && hz <= cfg.pitch_max_hz,
                      "build_sequence: melody value outside the pitch vocabulary");
        push_frame(SegmentKind::melody, cfg.pitch_token(hz), false);
    }
    seq.spans.push_back({SegmentKind::melody, begin, seq.frames()});
    push_sep();

    if (training) {
        if (want_rf) {
            begin = seq.frames();
            push_frame(SegmentKind::range_factor, cfg.pitch_token(*range_factor), true);
            seq.spans.push_back({SegmentKind::range_factor, begin, seq.frames()});
            push_sep();
        }
        begin = seq.frames();
        for (int t = 0; t < t_frames; ++t) {
            seq.frame_kind.push_back(SegmentKind::acoustic);
            std::vector<int> toks(cfg.n_q);
            for (int c = 0; c < cfg.n_q; ++c) {
                toks[c] = cfg.acoustic_token(c, units->at(t, c));
            }
            seq.frame_tokens.push_back(std::move(toks));
            seq.loss_frame.push_back(true);
        }
        seq.spans.push_back({SegmentKind::acoustic, begin, seq.frames()});
    }

    require_input(seq.frames() <= cfg.max_frames,
                  "build_sequence: sequence of " + std::to_string(seq.frames()) +
                      " frames exceeds the configured capacity of " +
                      std::to_string(cfg.max_frames));
    seq.validate(cfg);
    return seq;
}

// ---- model ------------------------------------------------------------------

namespace {

void add_block_params(nn::ParamStore& params, const std::string& prefix, int hidden,
                      int ffn_mult, Rng& rng) {
    const float std_attn = 0.02f;
    params.add_const(prefix + ".ln1.g", 1, hidden, 1.0f);
    params.add(prefix + ".ln1.b", 1, hidden);
    for (const char* w : {"wq", "wk", "wv", "wo"}) {
        params.add_normal(prefix + ".attn." + w, hidden, hidden, rng, std_attn);
        params.add(prefix + ".attn.b" + std::string(1, w[1]), 1, hidden);
    }
    params.add_const(prefix + ".ln2.g", 1, hidden, 1.0f);
    params.add(prefix + ".ln2.b", 1, hidden);
    params.add_normal(prefix + ".ffn.w1", hidden, hidden * ffn_mult, rng, std_attn);
    params.add(prefix + ".ffn.b1", 1, hidden * ffn_mult);
    params.add_normal(prefix + ".ffn.w2", hidden * ffn_mult, hidden, rng, std_attn);
    params.add(prefix + ".ffn.b2", 1, hidden);
}

}  // namespace

MultiscaleTransformer::MultiscaleTransformer(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    const int w = cfg_.sub_width();
    const int h = cfg_.hidden;
    params_.add_normal("tok_table", cfg_.vocab_size(), w, rng, 0.02f);
    params_.add_normal("seg_table", kSegmentKinds, w, rng, 0.02f);
    params_.add_normal("pos_table", cfg_.max_frames, h, rng, 0.02f);
    params_.add_normal("prompt_proj.w", cfg_.prompt_width, w, rng, 0.08f);
    params_.add("prompt_proj.b", 1, w);
    for (int i = 0; i < cfg_.global_layers; ++i) {
        add_block_params(params_, "g" + std::to_string(i), h, cfg_.ffn_mult, rng);
    }
    params_.add_const("g.lnf.g", 1, h, 1.0f);
    params_.add("g.lnf.b", 1, h);
    params_.add_normal("ctx_proj.w", w, h, rng, 0.08f);
    params_.add("ctx_proj.b", 1, h);
    params_.add_normal("local_in.w", w, h, rng, 0.08f);
    params_.add("local_in.b", 1, h);
    params_.add_normal("local_start", 1, w, rng, 0.02f);
    for (int i = 0; i < cfg_.local_layers; ++i) {
        add_block_params(params_, "l" + std::to_string(i), h, cfg_.ffn_mult, rng);
    }
    params_.add_const("l.lnf.g", 1, h, 1.0f);
    params_.add("l.lnf.b", 1, h);
    params_.add_normal("lm.w", cfg_.vocab_size(), h, rng, 0.02f);
    params_.add("lm.b", 1, cfg_.vocab_size());
}

const Tensor& MultiscaleTransformer::prompt_projection_w() const {
    return params_.find("prompt_proj.w")->value;
}

const Tensor& MultiscaleTransformer::prompt_projection_b() const {
    return params_.find("prompt_proj.b")->value;
}

std::vector<int> MultiscaleTransformer::segment_row_ids(
    const TokenLayoutSequence& seq) const {
    std::vector<int> ids;
    ids.reserve(seq.positions());
    for (int f = 0; f < seq.frames(); ++f) {
        for (int c = 0; c < seq.n_q; ++c) {
            ids.push_back(static_cast<int>(seq.frame_kind[f]));
        }
    }
    return ids;
}

Graph::Var MultiscaleTransformer::transformer_stack(Graph& g, Graph::Var x,
                                                    const std::string& prefix, int layers,
                                                    int heads,
                                                    const std::vector<int>& att_begin,
                                                    const std::vector<int>& att_end) const {
    auto* self = const_cast<MultiscaleTransformer*>(this);
    auto p = [&](const std::string& name) -> Graph::Var {
        nn::Parameter* param = self->params_.find(prefix + name);
        require_input(param != nullptr, "missing parameter " + prefix + name);
        return g.param(*param);
    };
    const int h = cfg_.hidden;
    const int dh = h / heads;
    const float inv_sqrt_dh = 1.0f / std::sqrt(static_cast<float>(dh));

    for (int layer = 0; layer < layers; ++layer) {
        const std::string lp = std::to_string(layer);
        Graph::Var xn = g.layernorm(x, p(lp + ".ln1.g"), p(lp + ".ln1.b"));
        Graph::Var q = g.add_rowvec(g.matmul(xn, p(lp + ".attn.wq")), p(lp + ".attn.bq"));
        Graph::Var k = g.add_rowvec(g.matmul(xn, p(lp + ".attn.wk")), p(lp + ".attn.bk"));
        Graph::Var v = g.add_rowvec(g.matmul(xn, p(lp + ".attn.wv")), p(lp + ".attn.bv"));
        std::vector<Graph::Var> head_ctx;
        for (int head = 0; head < heads; ++head) {
            Graph::Var qh = g.slice_cols(q, head * dh, dh);
            Graph::Var kh = g.slice_cols(k, head * dh, dh);
            Graph::Var vh = g.slice_cols(v, head * dh, dh);
            Graph::Var scores = g.scale(g.matmul_nt(qh, kh), inv_sqrt_dh);
            Graph::Var probs = g.softmax_rows_banded(scores, att_begin, att_end);
            head_ctx.push_back(g.matmul(probs, vh));
        }
        Graph::Var ctx = g.concat_cols(head_ctx);
        Graph::Var attn_out =
            g.add_rowvec(g.matmul(ctx, p(lp + ".attn.wo")), p(lp + ".attn.bo"));
        x = g.add(x, attn_out);

        Graph::Var xn2 = g.layernorm(x, p(lp + ".ln2.g"), p(lp + ".ln2.b"));
        Graph::Var ff =
            g.gelu(g.add_rowvec(g.matmul(xn2, p(lp + ".ffn.w1")), p(lp + ".ffn.b1")));
        Graph::Var ff2 = g.add_rowvec(g.matmul(ff, p(lp + ".ffn.w2")), p(lp + ".ffn.b2"));
        x = g.add(x, ff2);
    }
    return g.layernorm(x, p(".lnf.g"), p(".lnf.b"));
}

MultiscaleTransformer::ForwardHandles MultiscaleTransformer::forward(
    Graph& g, const TokenLayoutSequence& seq) const {
    auto* self = const_cast<MultiscaleTransformer*>(this);
    const int n_q = cfg_.n_q;
    const int w = cfg_.sub_width();
    const int h = cfg_.hidden;
    const int l_frames = seq.frames();
    require_input(l_frames > 0, "forward: empty sequence");
    require_input(l_frames <= cfg_.max_frames,
                  "forward: sequence of " + std::to_string(l_frames) +
                      " frames exceeds the configured capacity of " +
                      std::to_string(cfg_.max_frames));
    require_input(seq.n_q == n_q, "forward: layout n_q mismatch");

    // prompt frames form a contiguous prefix; everything after is tokens
    int prompt_frames = 0;
    while (prompt_frames < l_frames &&
           seq.frame_kind[prompt_frames] == SegmentKind::prompt) {
        ++prompt_frames;
    }
    for (int f = prompt_frames; f < l_frames; ++f) {
        require_input(seq.frame_kind[f] != SegmentKind::prompt,
                      "forward: prompt frames must form a prefix");
    }

    std::vector<Graph::Var> embed_parts;
    if (prompt_frames > 0) {
        require_input(static_cast<int>(seq.prompt_raw.size()) == prompt_frames,
                      "forward: prompt vectors missing");
        Tensor raw(prompt_frames, cfg_.prompt_width);
        for (int i = 0; i < prompt_frames; ++i) {
            require_input(static_cast<int>(seq.prompt_raw[i].size()) == cfg_.prompt_width,
                          "forward: prompt vector width mismatch");
            for (int j = 0; j < cfg_.prompt_width; ++j) raw.at(i, j) = seq.prompt_raw[i][j];
        }
        Graph::Var proj = g.add_rowvec(
            g.matmul(g.input(std::move(raw)), g.param(*self->params_.find("prompt_proj.w"))),
            g.param(*self->params_.find("prompt_proj.b")));
        std::vector<int> repeat_ids;
        repeat_ids.reserve(static_cast<size_t>(prompt_frames) * n_q);
        for (int i = 0; i < prompt_frames; ++i) {
            for (int c = 0; c < n_q; ++c) repeat_ids.push_back(i);
        }
        embed_parts.push_back(g.rows_gather(proj, std::move(repeat_ids)));
    }
    if (prompt_frames < l_frames) {
        std::vector<int> token_ids;
        token_ids.reserve(static_cast<size_t>(l_frames - prompt_frames) * n_q);
        for (int f = prompt_frames; f < l_frames; ++f) {
            require_input(static_cast<int>(seq.frame_tokens[f].size()) == n_q,
                          "forward: ragged frame tokens");
            for (int c = 0; c < n_q; ++c) token_ids.push_back(seq.frame_tokens[f][c]);
        }
        embed_parts.push_back(
            g.rows_gather(g.param(*self->params_.find("tok_table")), std::move(token_ids)));
    }
    Graph::Var tok_embed =
        embed_parts.size() == 1 ? embed_parts[0] : g.concat_rows(embed_parts);
    Graph::Var seg_embed =
        g.rows_gather(g.param(*self->params_.find("seg_table")), segment_row_ids(seq));
    Graph::Var sub = g.add(tok_embed, seg_embed);  // [L*n_q, w]

    std::vector<int> pos_ids(l_frames);
    for (int f = 0; f < l_frames; ++f) pos_ids[f] = f;
    Graph::Var x = g.add(g.reshape(sub, l_frames, h),
                         g.rows_gather(g.param(*self->params_.find("pos_table")), pos_ids));

    // global: causal over frames
    std::vector<int> gbegin(l_frames, 0), gend(l_frames);
    for (int f = 0; f < l_frames; ++f) gend[f] = f + 1;
    Graph::Var frame_input = x;
    Graph::Var global_h =
        transformer_stack(g, x, "g", cfg_.global_layers, cfg_.global_heads, gbegin, gend);

    // frame context: h shifted down one frame, split back to sub width
    Graph::Var h_prev =
        l_frames == 1
            ? g.constant(Tensor::zeros(1, h))
            : g.concat_rows({g.constant(Tensor::zeros(1, h)),
                             g.slice_rows(global_h, 0, l_frames - 1)});
    Graph::Var ctx = g.add_rowvec(
        g.matmul(g.reshape(h_prev, l_frames * n_q, w),
                 g.param(*self->params_.find("ctx_proj.w"))),
        g.param(*self->params_.find("ctx_proj.b")));

    Graph::Var shifted =
        g.shift_rows_in_blocks(sub, n_q, g.param(*self->params_.find("local_start")));
    Graph::Var local_in = g.add(
        g.add_rowvec(g.matmul(shifted, g.param(*self->params_.find("local_in.w"))),
                     g.param(*self->params_.find("local_in.b"))),
        ctx);

    // local: causal within each frame, no cross-frame attention, no positional
    // embedding of its own
    std::vector<int> lbegin(seq.positions()), lend(seq.positions());
    for (int r = 0; r < seq.positions(); ++r) {
        lbegin[r] = (r / n_q) * n_q;
        lend[r] = r + 1;
    }
    Graph::Var local_h =
        transformer_stack(g, local_in, "l", cfg_.local_layers, cfg_.local_heads, lbegin, lend);

    return ForwardHandles{sub, frame_input, global_h, local_h};
}

Graph::Var MultiscaleTransformer::position_logits(Graph& g, Graph::Var local_h,
                                                  const std::vector<int>& rows) const {
    auto* self = const_cast<MultiscaleTransformer*>(this);
    Graph::Var picked = g.rows_gather(local_h, rows);
    return g.add_rowvec(g.matmul_nt(picked, g.param(*self->params_.find("lm.w"))),
                        g.param(*self->params_.find("lm.b")));
}

double MultiscaleTransformer::train_step(const std::vector<TokenLayoutSequence>& batch) {
    require_config(!batch.empty(), "train_step: empty batch");
    size_t total_masked = 0;
    for (const auto& seq : batch) {
        seq.validate(cfg_);
        for (int f = 0; f < seq.frames(); ++f) {
            if (seq.loss_frame[f]) total_masked += static_cast<size_t>(cfg_.n_q);
        }
    }
    require_config(total_masked > 0, "train_step: batch has no masked positions");

    params_.zero_grads();
    double total_ce = 0.0;
    for (const auto& seq : batch) {
        std::vector<int> rows;
        std::vector<int> targets;
        for (int f = 0; f < seq.frames(); ++f) {
            if (!seq.loss_frame[f]) continue;
            for (int c = 0; c < cfg_.n_q; ++c) {
                rows.push_back(f * cfg_.n_q + c);
                targets.push_back(seq.frame_tokens[f][c]);
            }
        }
        if (rows.empty()) continue;
        Graph g;
        const ForwardHandles fwd = forward(g, seq);
        Graph::Var logits = position_logits(g, fwd.local_h, rows);
        Graph::Var ce = g.cross_entropy_sum(logits, targets);
        Graph::Var loss = g.scale(ce, 1.0f / static_cast<float>(total_masked));
        g.backward(loss);
        total_ce += g.val(ce).at(0, 0);
    }
    return total_ce / static_cast<double>(total_masked);
}

std::vector<double> MultiscaleTransformer::sampling_distribution(
    const Tensor& logits_row, int lo, int hi, const SamplingConfig& sampling) const {
    require_input(lo >= 0 && hi > lo && hi <= logits_row.cols,
                  "sampling: bad token range");
    const int n = hi - lo;
    std::vector<double> dist(n, 0.0);
    const double temp = sampling.temperature > 0.0 ? sampling.temperature : 1.0;
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        mx = std::max(mx, static_cast<double>(logits_row.at(0, lo + i)));
    }
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        dist[i] = std::exp((logits_row.at(0, lo + i) - mx) / temp);
        z += dist[i];
    }
    for (auto& d : dist) d /= z;
    if (sampling.top_k > 0 && sampling.top_k < n) {
        std::vector<int> idx(n);
        for (int i = 0; i < n; ++i) idx[i] = i;
        std::nth_element(idx.begin(), idx.begin() + sampling.top_k - 1, idx.end(),
                         [&dist](int a, int b) {
                             return dist[a] > dist[b] || (dist[a] == dist[b] && a < b);
                         });
        std::vector<double> kept(n, 0.0);
        double kz = 0.0;
        for (int i = 0; i < sampling.top_k; ++i) {
            kept[idx[i]] = dist[idx[i]];
            kz += dist[idx[i]];
        }
        for (auto& d : kept) d /= kz;
        dist = std::move(kept);
    }
    return dist;
}

namespace {

int pick_from(const std::vector<double>& dist, bool greedy, Rng& rng, double* prob_out) {
    int choice = 0;
    if (greedy) {
        for (size_t i = 1; i < dist.size(); ++i) {
            if (dist[i] > dist[choice]) choice = static_cast<int>(i);
        }
    } else {
        const double u = rng.uniform();
        double acc = 0.0;
        choice = static_cast<int>(dist.size()) - 1;
        for (size_t i = 0; i < dist.size(); ++i) {
            acc += dist[i];
            if (u < acc) {
                choice = static_cast<int>(i);
                break;
            }
        }
    }
    if (prob_out != nullptr) *prob_out = dist[choice];
    return choice;
}

}  // namespace

InferenceResult MultiscaleTransformer::infer(const TokenLayoutSequence& prefix,
                                             const SamplingConfig& sampling, Rng& rng) const {
    if (trained_steps_ <= 0) {
        throw InvalidInputError(
            "infer: model has no trained steps; train or load a checkpoint first");
    }
    require_input(!prefix.training_mode(), "infer: prefix must be an inference-mode layout");
    prefix.validate(cfg_);
    const int t_frames = prefix.melody_frames();
    require_input(t_frames > 0, "infer: prefix has no melody segment");

    TokenLayoutSequence seq = prefix;
    InferenceResult result;
    result.units.n_q = cfg_.n_q;
    result.units.codebook_size = cfg_.codebook_size;
    result.units.units.assign(static_cast<size_t>(t_frames) * cfg_.n_q, 0);

    auto grow_frame = [&seq, this](SegmentKind kind, int token, bool loss) {
        seq.frame_kind.push_back(kind);
        seq.frame_tokens.emplace_back(std::vector<int>(cfg_.n_q, token));
        seq.loss_frame.push_back(loss);
    };

    // logits for the next sub-position c of the last frame
    auto next_logits = [&](int c) {
        Graph g;
        const ForwardHandles fwd = forward(g, seq);
        const int row = (seq.frames() - 1) * cfg_.n_q + c;
        Graph::Var logits = position_logits(g, fwd.local_h, {row});
        return g.val(logits);
    };

    if (cfg_.use_range_factor) {
        // placeholder frame; sub-position 0 is sampled, the repeats are forced
        grow_frame(SegmentKind::range_factor, cfg_.pitch_token(1), false);
        const Tensor logits = next_logits(0);
        const auto dist = sampling_distribution(logits, cfg_.pitch_token(1),
                                                cfg_.pitch_token(cfg_.pitch_max_hz) + 1,
                                                sampling);
        double prob = 0.0;
        const int pick = pick_from(dist, sampling.greedy_range, rng, &prob);
        result.range_factor = 1 + pick;
        result.step_probs.push_back(prob);
        const int tok = cfg_.pitch_token(result.range_factor);
        for (int c = 0; c < cfg_.n_q; ++c) seq.frame_tokens.back()[c] = tok;
        grow_frame(SegmentKind::separator, ModelConfig::kSepToken, false);
    }

    for (int t = 0; t < t_frames; ++t) {
        grow_frame(SegmentKind::acoustic, cfg_.acoustic_token(0, 0), false);
        for (int c = 0; c < cfg_.n_q; ++c) {
            const Tensor logits = next_logits(c);
            const int lo = cfg_.acoustic_token(c, 0);
            const int hi = cfg_.acoustic_token(c, cfg_.codebook_size);
            const auto dist = sampling_distribution(logits, lo, hi, sampling);
            double prob = 0.0;
            const int pick = pick_from(dist, sampling.greedy_acoustic, rng, &prob);
            const int token = lo + pick;
            // the restricted support makes specials unreachable; keep the
            // guard for future support changes
            if (token < lo || token >= hi) {
                throw DecodingError("sampled special token mid-stream at frame " +
                                    std::to_string(t) + " codebook " + std::to_string(c));
            }
            seq.frame_tokens.back()[c] = token;
            result.units.set(t, c, pick);
            result.step_probs.push_back(prob);
        }
    }
    return result;
}

double MultiscaleTransformer::score_completion(const TokenLayoutSequence& full,
                                               const SamplingConfig& sampling) const {
    require_input(full.training_mode(), "score_completion: need a training-mode layout");
    full.validate(cfg_);

    std::vector<int> rows;
    std::vector<std::pair<int, int>> ranges;  // token [lo, hi) per row
    std::vector<int> actual;
    const auto rf_span = full.span_of(SegmentKind::range_factor);
    if (rf_span) {
        rows.push_back(rf_span->begin * cfg_.n_q);
        ranges.emplace_back(cfg_.pitch_token(1), cfg_.pitch_token(cfg_.pitch_max_hz) + 1);
        actual.push_back(full.frame_tokens[rf_span->begin][0]);
    }
    const auto ac_span = full.span_of(SegmentKind::acoustic);
    require_input(ac_span.has_value(), "score_completion: no acoustic span");
    for (int f = ac_span->begin; f < ac_span->end; ++f) {
        for (int c = 0; c < cfg_.n_q; ++c) {
            rows.push_back(f * cfg_.n_q + c);
            ranges.emplace_back(cfg_.acoustic_token(c, 0),
                                cfg_.acoustic_token(c, cfg_.codebook_size));
            actual.push_back(full.frame_tokens[f][c]);
        }
    }

    Graph g;
    const ForwardHandles fwd = forward(g, full);
    Graph::Var logits = position_logits(g, fwd.local_h, rows);
    const Tensor& lv = g.val(logits);

    double log_prob = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
        Tensor row(1, lv.cols);
        for (int cidx = 0; cidx < lv.cols; ++cidx) {
            row.at(0, cidx) = lv.at(static_cast<int>(i), cidx);
        }
        const auto dist =
            sampling_distribution(row, ranges[i].first, ranges[i].second, sampling);
        const int offset = actual[i] - ranges[i].first;
        const double p = dist[offset];
        if (p <= 0.0) return 0.0;
        log_prob += std::log(p);
    }
    return std::exp(log_prob);
}

// ---- persistence ----------------------------------------------------------------

namespace {

json model_config_to_json(const ModelConfig& c) {
    return json{{"hidden", c.hidden},
                {"global_layers", c.global_layers},
                {"global_heads", c.global_heads},
                {"local_layers", c.local_layers},
                {"local_heads", c.local_heads},
                {"ffn_mult", c.ffn_mult},
                {"n_q", c.n_q},
                {"codebook_size", c.codebook_size},
                {"phoneme_vocab", c.phoneme_vocab},
                {"pitch_max_hz", c.pitch_max_hz},
                {"max_frames", c.max_frames},
                {"prompt_width", c.prompt_width},
                {"use_range_factor", c.use_range_factor},
                {"rescale_melody", c.rescale_melody},
                {"pooled_prompt", c.pooled_prompt}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.hidden = j.at("hidden");
    c.global_layers = j.at("global_layers");
    c.global_heads = j.at("global_heads");
    c.local_layers = j.at("local_layers");
    c.local_heads = j.at("local_heads");
    c.ffn_mult = j.at("ffn_mult");
    c.n_q = j.at("n_q");
    c.codebook_size = j.at("codebook_size");
    c.phoneme_vocab = j.at("phoneme_vocab");
    c.pitch_max_hz = j.at("pitch_max_hz");
    c.max_frames = j.at("max_frames");
    c.prompt_width = j.at("prompt_width");
    c.use_range_factor = j.at("use_range_factor");
    c.rescale_melody = j.value("rescale_melody", true);
    c.pooled_prompt = j.at("pooled_prompt");
    return c;
}

void write_blob(std::ostream& out, const std::string& s) {
    const uint32_t n = static_cast<uint32_t>(s.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(s.data(), n);
}

std::string read_blob(std::istream& in) {
    uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    std::string s(n, '\0');
    in.read(s.data(), n);
    return s;
}

void write_tensor(std::ostream& out, const Tensor& t) {
    const uint32_t r = static_cast<uint32_t>(t.rows), c = static_cast<uint32_t>(t.cols);
    out.write(reinterpret_cast<const char*>(&r), 4);
    out.write(reinterpret_cast<const char*>(&c), 4);
    out.write(reinterpret_cast<const char*>(t.v.data()),
              static_cast<std::streamsize>(t.v.size() * sizeof(float)));
}

Tensor read_tensor(std::istream& in) {
    uint32_t r = 0, c = 0;
    in.read(reinterpret_cast<char*>(&r), 4);
    in.read(reinterpret_cast<char*>(&c), 4);
    Tensor t(static_cast<int>(r), static_cast<int>(c));
    in.read(reinterpret_cast<char*>(t.v.data()),
            static_cast<std::streamsize>(t.v.size() * sizeof(float)));
    return t;
}

}  // namespace

void MultiscaleTransformer::save(const std::filesystem::path& path,
                                 const std::string& rng_state,
                                 const std::string& aux) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write model checkpoint: " + path.string());
        out.write("SVSM", 4);
        const uint32_t version = 1;
        out.write(reinterpret_cast<const char*>(&version), 4);
        write_blob(out, model_config_to_json(cfg_).dump());
        const int64_t steps = trained_steps_;
        out.write(reinterpret_cast<const char*>(&steps), 8);
        write_blob(out, rng_state);
        write_blob(out, aux);
        const uint32_t n_params = static_cast<uint32_t>(params_.count());
        out.write(reinterpret_cast<const char*>(&n_params), 4);
        for (size_t i = 0; i < params_.count(); ++i) {
            write_blob(out, params_[i].name);
            write_tensor(out, params_[i].value);
        }
        if (!out) throw DataError("failed writing model checkpoint: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

LoadedModel MultiscaleTransformer::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SVSM", 4) != 0)
        throw DataError("bad model checkpoint magic: " + path.string());
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw DataError("unsupported model checkpoint version");
    const ModelConfig cfg = model_config_from_json(json::parse(read_blob(in)));
    MultiscaleTransformer model(cfg, /*seed=*/0);
    int64_t steps = 0;
    in.read(reinterpret_cast<char*>(&steps), 8);
    model.trained_steps_ = steps;
    const std::string rng_state = read_blob(in);
    const std::string aux = read_blob(in);
    uint32_t n_params = 0;
    in.read(reinterpret_cast<char*>(&n_params), 4);
    for (uint32_t i = 0; i < n_params; ++i) {
        const std::string name = read_blob(in);
        nn::Parameter* p = model.params_.find(name);
        if (p == nullptr) throw DataError("model checkpoint has unknown parameter " + name);
        p->value = read_tensor(in);
    }
    if (!in) throw DataError("truncated model checkpoint: " + path.string());
    return LoadedModel{std::move(model), rng_state, aux};
}

}  // namespace svs
