#include "svs/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace svs {

using nlohmann::json;
using nn::Graph;
using nn::Tensor;

void AcousticUnitSequence::validate() const {
    require_input(n_q > 0 && codebook_size > 0, "unit sequence: bad shape metadata");
    require_input(units.size() % static_cast<size_t>(n_q) == 0,
                  "unit sequence is not rectangular");
    for (uint16_t u : units) {
        require_input(u < codebook_size, "unit index out of range: " + std::to_string(u));
    }
}

void write_units_file(const std::filesystem::path& path, const AcousticUnitSequence& units) {
    units.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write units file: " + path.string());
    auto put_u32 = [&out](uint32_t v) {
        const unsigned char b[4] = {
            static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
            static_cast<unsigned char>((v >> 16) & 0xff),
            static_cast<unsigned char>((v >> 24) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    out.write("SVSU", 4);
    put_u32(static_cast<uint32_t>(units.frames()));
    put_u32(static_cast<uint32_t>(units.n_q));
    put_u32(static_cast<uint32_t>(units.codebook_size));
    for (uint16_t u : units.units) {
        const unsigned char b[2] = {static_cast<unsigned char>(u & 0xff),
                                    static_cast<unsigned char>((u >> 8) & 0xff)};
        out.write(reinterpret_cast<const char*>(b), 2);
    }
}

AcousticUnitSequence read_units_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open units file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SVSU", 4) != 0)
        throw DataError("bad units file magic: " + path.string());
    auto get_u32 = [&in]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        return static_cast<uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
               (static_cast<uint32_t>(b[3]) << 24);
    };
    const uint32_t frames = get_u32();
    AcousticUnitSequence units;
    units.n_q = static_cast<int>(get_u32());
    units.codebook_size = static_cast<int>(get_u32());
    units.units.resize(static_cast<size_t>(frames) * units.n_q);
    for (auto& u : units.units) {
        unsigned char b[2];
        in.read(reinterpret_cast<char*>(b), 2);
        u = static_cast<uint16_t>(b[0] | (b[1] << 8));
    }
    if (!in) throw DataError("truncated units file: " + path.string());
    units.validate();
    return units;
}

void CodecConfig::validate() const {
    require_config(n_q >= 1 && n_q <= total_levels, "codec: need 1 <= n_q <= total levels");
    // K_a = 1 is allowed as a degenerate sanity configuration
    require_config(codebook_size >= 1, "codec: codebook size must be >= 1");
    require_config(codebook_size <= 65536, "codec: codebook size exceeds uint16 units");
    require_config(hop > 0 && sample_rate > 0 && feature_dim > 0 && conv_hidden > 0,
                   "codec: bad dimensions");
}

RvqResult rvq_quantize(const std::vector<float>& feature,
                       const std::vector<nn::Tensor>& codebooks) {
    require_input(!codebooks.empty(), "rvq_quantize: no codebooks");
    const int dim = static_cast<int>(feature.size());
    RvqResult res;
    std::vector<float> residual = feature;
    for (const auto& cb : codebooks) {
        require_input(cb.cols == dim, "rvq_quantize: feature/codebook dimension mismatch");
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < cb.rows; ++k) {
            double d = 0.0;
            for (int j = 0; j < dim; ++j) {
                const double diff = residual[j] - cb.at(k, j);
                d += diff * diff;
            }
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        res.indices.push_back(best);
        double energy = 0.0;
        for (int j = 0; j < dim; ++j) {
            residual[j] -= cb.at(best, j);
            energy += static_cast<double>(residual[j]) * residual[j];
        }
        res.residual_energy.push_back(energy);
    }
    return res;
}

// ---- codec -------------------------------------------------------------------

Codec::Codec(const CodecConfig& cfg, uint64_t seed) : cfg_(cfg), mel_(cfg.mel) {
    cfg_.validate();
    require_config(cfg_.mel.hop == cfg_.hop && cfg_.mel.sample_rate == cfg_.sample_rate,
                   "codec: mel front end disagrees with codec hop/sample rate");
    Rng rng(seed);
    const int m = cfg_.mel.n_mels;
    const int ch = cfg_.conv_hidden;
    const int d = cfg_.feature_dim;
    params_.add_normal("enc.w1", 3 * m, ch, rng, 0.08f);
    params_.add("enc.b1", 1, ch);
    params_.add_normal("enc.w2", 3 * ch, ch, rng, 0.08f);
    params_.add("enc.b2", 1, ch);
    params_.add_normal("enc.w3", ch, d, rng, 0.08f);
    params_.add("enc.b3", 1, d);
    params_.add_normal("dec.w1", d, ch, rng, 0.08f);
    params_.add("dec.b1", 1, ch);
    params_.add_normal("dec.w2", 3 * ch, ch, rng, 0.08f);
    params_.add("dec.b2", 1, ch);
    params_.add_normal("dec.w3", ch, m, rng, 0.08f);
    params_.add("dec.b3", 1, m);
    codebooks_.assign(cfg_.total_levels, Tensor::zeros(cfg_.codebook_size, d));
}

namespace {

// k = 3 temporal unfold with edge replication, composed from tape ops so the
// convolution stays differentiable
Graph::Var unfold3(Graph& g, Graph::Var x) {
    const int t = g.val(x).rows;
    Graph::Var up, down;
    if (t == 1) {
        up = x;
        down = x;
    } else {
        down = g.concat_rows({g.slice_rows(x, 0, 1), g.slice_rows(x, 0, t - 1)});
        up = g.concat_rows({g.slice_rows(x, 1, t - 1), g.slice_rows(x, t - 1, 1)});
    }
    return g.concat_cols({down, x, up});
}

}  // namespace

Graph::Var Codec::encode_graph(Graph& g, const Tensor& mel_norm) const {
    auto* self = const_cast<Codec*>(this);
    Graph::Var x = g.input(mel_norm);
    x = g.gelu(g.add_rowvec(g.matmul(unfold3(g, x), g.param(*self->params_.find("enc.w1"))),
                            g.param(*self->params_.find("enc.b1"))));
    x = g.gelu(g.add_rowvec(g.matmul(unfold3(g, x), g.param(*self->params_.find("enc.w2"))),
                            g.param(*self->params_.find("enc.b2"))));
    return g.add_rowvec(g.matmul(x, g.param(*self->params_.find("enc.w3"))),
                        g.param(*self->params_.find("enc.b3")));
}

Graph::Var Codec::decode_graph(Graph& g, Graph::Var latent) const {
    auto* self = const_cast<Codec*>(this);
    Graph::Var x =
        g.gelu(g.add_rowvec(g.matmul(latent, g.param(*self->params_.find("dec.w1"))),
                            g.param(*self->params_.find("dec.b1"))));
    x = g.gelu(g.add_rowvec(g.matmul(unfold3(g, x), g.param(*self->params_.find("dec.w2"))),
                            g.param(*self->params_.find("dec.b2"))));
    return g.add_rowvec(g.matmul(x, g.param(*self->params_.find("dec.w3"))),
                        g.param(*self->params_.find("dec.b3")));
}

Tensor Codec::normalized_mel(const std::vector<std::vector<double>>& log_mel) const {
    Tensor t(static_cast<int>(log_mel.size()), cfg_.mel.n_mels);
    for (size_t r = 0; r < log_mel.size(); ++r) {
        require_input(static_cast<int>(log_mel[r].size()) == cfg_.mel.n_mels,
                      "codec: mel frame width mismatch");
        for (int c = 0; c < cfg_.mel.n_mels; ++c) {
            t.at(static_cast<int>(r), c) =
                (static_cast<float>(log_mel[r][c]) + cfg_.mel_shift) * cfg_.mel_scale;
        }
    }
    return t;
}

std::vector<std::vector<double>> Codec::extract_log_mel(const std::vector<float>& audio) const {
    return mel_.log_mel(audio);
}

std::vector<std::vector<double>> Codec::extract_linear_mel(
    const std::vector<float>& audio) const {
    return mel_.linear_mel(audio);
}

std::vector<std::vector<double>> Codec::log_from_linear(
    const std::vector<std::vector<double>>& linear) const {
    return mel_.to_log(linear);
}

CodecTrainStats Codec::train(const std::vector<std::vector<std::vector<double>>>& train_mels,
                             const std::vector<std::vector<std::vector<double>>>& heldout_mels,
                             int epochs, uint64_t seed) {
    require_config(train_mels.size() >= 10, "train_codec: need at least 10 utterances");
    Rng rng(seed);
    const int d = cfg_.feature_dim;
    const int k = cfg_.codebook_size;

    std::vector<Tensor> norm_train;
    for (const auto& m : train_mels) norm_train.push_back(normalized_mel(m));
    std::vector<Tensor> norm_heldout;
    for (const auto& m : heldout_mels) norm_heldout.push_back(normalized_mel(m));

    auto heldout_loss = [&]() {
        if (norm_heldout.empty()) return 0.0;
        double total = 0.0;
        size_t frames = 0;
        for (const auto& m : norm_heldout) {
            Graph g;
            Graph::Var z = encode_graph(g, m);
            Tensor q(m.rows, d);
            for (int t = 0; t < m.rows; ++t) {
                std::vector<float> f(d);
                for (int j = 0; j < d; ++j) f[j] = g.val(z).at(t, j);
                auto res = rvq_quantize(f, codebooks_);
                for (int j = 0; j < d; ++j) {
                    float acc = 0.0f;
                    for (size_t s = 0; s < codebooks_.size(); ++s)
                        acc += codebooks_[s].at(res.indices[s], j);
                    q.at(t, j) = acc;
                }
            }
            Graph::Var out = decode_graph(g, g.straight_through(z, q));
            Graph::Var loss = g.mse_sum(out, m);
            total += g.val(loss).at(0, 0);
            frames += static_cast<size_t>(m.rows) * m.cols;
        }
        return total / static_cast<double>(frames);
    };

    // k-means initialization of every quantizer level on residuals from the
    // untrained encoder. Entry 0 of every codebook is pinned to the zero
    // vector, which makes the residual-energy monotonicity of the greedy
    // quantizer unconditional.
    {
        std::vector<std::vector<float>> latents;
        for (const auto& m : norm_train) {
            Graph g;
            Graph::Var z = encode_graph(g, m);
            for (int t = 0; t < m.rows; ++t) {
                std::vector<float> f(d);
                for (int j = 0; j < d; ++j) f[j] = g.val(z).at(t, j);
                latents.push_back(std::move(f));
            }
        }
        std::vector<std::vector<float>> residuals = latents;
        for (auto& cb : codebooks_) {
            for (int j = 0; j < d; ++j) cb.at(0, j) = 0.0f;
            // seed with random residuals
            for (int kk = 1; kk < k; ++kk) {
                const auto& r =
                    residuals[rng.uniform_int(static_cast<int64_t>(residuals.size()))];
                for (int j = 0; j < d; ++j) cb.at(kk, j) = r[j];
            }
            for (int iter = 0; iter < 8; ++iter) {
                std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
                std::vector<int> counts(k, 0);
                for (const auto& r : residuals) {
                    auto res = rvq_quantize(r, {cb});
                    const int idx = res.indices[0];
                    ++counts[idx];
                    for (int j = 0; j < d; ++j) sums[idx][j] += r[j];
                }
                for (int kk = 1; kk < k; ++kk) {
                    if (counts[kk] == 0) continue;
                    for (int j = 0; j < d; ++j)
                        cb.at(kk, j) = static_cast<float>(sums[kk][j] / counts[kk]);
                }
            }
            for (auto& r : residuals) {
                auto res = rvq_quantize(r, {cb});
                for (int j = 0; j < d; ++j) r[j] -= cb.at(res.indices[0], j);
            }
        }
    }

    CodecTrainStats stats;
    stats.initial_heldout_loss = heldout_loss();

    nn::Adam opt(nn::AdamConfig{.lr = 2e-3f, .beta1 = 0.9f, .beta2 = 0.98f,
                                .eps = 1e-9f, .grad_clip = 5.0f});
    // EMA state per level
    std::vector<std::vector<double>> ema_count(cfg_.total_levels,
                                               std::vector<double>(k, 1.0));
    std::vector<Tensor> ema_sum(cfg_.total_levels, Tensor::zeros(k, d));
    for (int s = 0; s < cfg_.total_levels; ++s)
        for (int kk = 0; kk < k; ++kk)
            for (int j = 0; j < d; ++j) ema_sum[s].at(kk, j) = codebooks_[s].at(kk, j);
    const double gamma = 0.99;
    const float commit_weight = 0.1f;

    double train_loss = 0.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::vector<size_t> order(norm_train.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[rng.uniform_int(static_cast<int64_t>(i))]);
        }
        double epoch_loss = 0.0;
        size_t epoch_frames = 0;
        for (size_t oi = 0; oi < order.size(); ++oi) {
            const Tensor& m = norm_train[order[oi]];
            // quantizer dropout: train every depth so shallow decodes degrade
            // gracefully
            const int levels = 1 + static_cast<int>(rng.uniform_int(cfg_.total_levels));

            params_.zero_grads();
            Graph g;
            Graph::Var z = encode_graph(g, m);
            Tensor q(m.rows, d);
            std::vector<std::vector<int>> assign(m.rows);
            for (int t = 0; t < m.rows; ++t) {
                std::vector<float> f(d);
                for (int j = 0; j < d; ++j) f[j] = g.val(z).at(t, j);
                std::vector<Tensor> used(codebooks_.begin(), codebooks_.begin() + levels);
                auto res = rvq_quantize(f, used);
                assign[t] = res.indices;
                for (int j = 0; j < d; ++j) {
                    float acc = 0.0f;
                    for (int s = 0; s < levels; ++s)
                        acc += codebooks_[s].at(res.indices[s], j);
                    q.at(t, j) = acc;
                }
            }
            Graph::Var dec = decode_graph(g, g.straight_through(z, q));
            const float inv = 1.0f / (static_cast<float>(m.rows) * m.cols);
            Graph::Var recon = g.scale(g.mse_sum(dec, m), inv);
            Graph::Var commit = g.scale(g.mse_sum(z, q), commit_weight * inv);
            Graph::Var loss = g.add(recon, commit);
            g.backward(loss);
            opt.step(params_);
            epoch_loss += g.val(recon).at(0, 0) * m.rows * m.cols;
            epoch_frames += static_cast<size_t>(m.rows) * m.cols;

            // EMA codebook update on the levels used this step; every entry
            // decays so starved ones drift toward the dead threshold
            std::vector<float> residual(d);
            for (int t = 0; t < m.rows; ++t) {
                for (int j = 0; j < d; ++j) residual[j] = g.val(z).at(t, j);
                for (int s = 0; s < levels; ++s) {
                    for (int kk = 0; kk < k; ++kk) {
                        ema_count[s][kk] *= gamma;
                        for (int j = 0; j < d; ++j) {
                            ema_sum[s].at(kk, j) =
                                static_cast<float>(gamma * ema_sum[s].at(kk, j));
                        }
                    }
                    const int idx = assign[t][s];
                    ema_count[s][idx] += 1.0 - gamma;
                    for (int j = 0; j < d; ++j) {
                        ema_sum[s].at(idx, j) +=
                            static_cast<float>((1.0 - gamma) * residual[j]);
                        residual[j] -= codebooks_[s].at(idx, j);
                    }
                }
            }
            for (int s = 0; s < levels; ++s) {
                for (int kk = 1; kk < k; ++kk) {
                    if (ema_count[s][kk] < 1e-6) continue;
                    for (int j = 0; j < d; ++j) {
                        codebooks_[s].at(kk, j) =
                            static_cast<float>(ema_sum[s].at(kk, j) / ema_count[s][kk]);
                    }
                }
            }
        }
        train_loss = epoch_loss / static_cast<double>(epoch_frames);

        // revive starved entries at the worst-quantized residuals so a few
        // dominant entries cannot capture the whole stage (entry 0 stays the
        // zero vector)
        {
            std::vector<std::vector<std::pair<double, std::vector<float>>>> worst(
                cfg_.total_levels);
            size_t visited = 0;
            for (const auto& m : norm_train) {
                Graph g;
                Graph::Var z = encode_graph(g, m);
                for (int t = 0; t < m.rows && visited < 2048; ++t, ++visited) {
                    std::vector<float> residual(d);
                    for (int j = 0; j < d; ++j) residual[j] = g.val(z).at(t, j);
                    for (int s = 0; s < cfg_.total_levels; ++s) {
                        auto res = rvq_quantize(residual, {codebooks_[s]});
                        worst[s].emplace_back(res.residual_energy[0], residual);
                        for (int j = 0; j < d; ++j) {
                            residual[j] -= codebooks_[s].at(res.indices[0], j);
                        }
                    }
                }
                if (visited >= 2048) break;
            }
            const double dead_below = 0.3 / k;
            for (int s = 0; s < cfg_.total_levels; ++s) {
                std::sort(worst[s].begin(), worst[s].end(),
                          [](const auto& a, const auto& b) { return a.first > b.first; });
                size_t next = 0;
                for (int kk = 1; kk < k; ++kk) {
                    if (ema_count[s][kk] > dead_below) continue;
                    if (next >= worst[s].size()) break;
                    const auto& vec = worst[s][next++].second;
                    for (int j = 0; j < d; ++j) {
                        codebooks_[s].at(kk, j) = vec[j];
                        ema_sum[s].at(kk, j) = static_cast<float>(vec[j] / k);
                    }
                    ema_count[s][kk] = 1.0 / k;
                }
            }
        }
    }

    trained_ = true;
    stats.final_train_loss = train_loss;
    stats.final_heldout_loss = heldout_loss();

    // utilization of the unit-facing levels on the training corpus
    stats.codebook_utilization.assign(cfg_.n_q, 0.0);
    std::vector<std::vector<char>> used(cfg_.n_q, std::vector<char>(k, 0));
    for (const auto& m : norm_train) {
        Graph g;
        Graph::Var z = encode_graph(g, m);
        for (int t = 0; t < m.rows; ++t) {
            std::vector<float> f(d);
            for (int j = 0; j < d; ++j) f[j] = g.val(z).at(t, j);
            std::vector<Tensor> cbs(codebooks_.begin(), codebooks_.begin() + cfg_.n_q);
            auto res = rvq_quantize(f, cbs);
            for (int s = 0; s < cfg_.n_q; ++s) used[s][res.indices[s]] = 1;
        }
    }
    for (int s = 0; s < cfg_.n_q; ++s) {
        int n = 0;
        for (char u : used[s]) n += u;
        stats.codebook_utilization[s] = static_cast<double>(n) / k;
    }
    return stats;
}

AcousticUnitSequence Codec::encode(const std::vector<float>& audio, int sample_rate) const {
    require_input(sample_rate == cfg_.sample_rate,
                  "encode: wrong sample rate " + std::to_string(sample_rate) + ", expected " +
                      std::to_string(cfg_.sample_rate));
    return encode_features(extract_log_mel(audio));
}

AcousticUnitSequence Codec::encode_features(const std::vector<std::vector<double>>& log_mel,
                                            int n_q_override) const {
    const int n_q = n_q_override > 0 ? n_q_override : cfg_.n_q;
    require_input(n_q <= cfg_.total_levels, "encode: n_q exceeds trained levels");
    const Tensor m = normalized_mel(log_mel);
    AcousticUnitSequence units;
    units.n_q = n_q;
    units.codebook_size = cfg_.codebook_size;
    units.units.assign(static_cast<size_t>(m.rows) * n_q, 0);
    if (m.rows == 0) return units;

    Graph g;
    Graph::Var z = encode_graph(g, m);
    std::vector<Tensor> cbs(codebooks_.begin(), codebooks_.begin() + n_q);
    std::vector<float> f(cfg_.feature_dim);
    for (int t = 0; t < m.rows; ++t) {
        for (int j = 0; j < cfg_.feature_dim; ++j) f[j] = g.val(z).at(t, j);
        auto res = rvq_quantize(f, cbs);
        for (int c = 0; c < n_q; ++c) units.set(t, c, res.indices[c]);
    }
    return units;
}

std::vector<std::vector<double>> Codec::decode_features(
    const AcousticUnitSequence& units) const {
    units.validate();
    require_input(units.codebook_size == cfg_.codebook_size,
                  "decode: codebook size mismatch");
    require_input(units.n_q <= cfg_.total_levels, "decode: too many levels");
    const int t_frames = units.frames();
    std::vector<std::vector<double>> out;
    if (t_frames == 0) return out;

    Tensor latent(t_frames, cfg_.feature_dim);
    for (int t = 0; t < t_frames; ++t) {
        for (int j = 0; j < cfg_.feature_dim; ++j) {
            float acc = 0.0f;
            for (int c = 0; c < units.n_q; ++c) acc += codebooks_[c].at(units.at(t, c), j);
            latent.at(t, j) = acc;
        }
    }
    Graph g;
    Graph::Var dec = decode_graph(g, g.input(latent));
    out.assign(t_frames, std::vector<double>(cfg_.mel.n_mels, 0.0));
    for (int t = 0; t < t_frames; ++t) {
        for (int c = 0; c < cfg_.mel.n_mels; ++c) {
            out[t][c] = g.val(dec).at(t, c) / cfg_.mel_scale - cfg_.mel_shift;
        }
    }
    return out;
}

std::vector<float> Codec::decode(const AcousticUnitSequence& units) const {
    if (units.frames() == 0) return {};
    return mel_.reconstruct(decode_features(units));
}

double Codec::reconstruction_distortion(const std::vector<std::vector<double>>& log_mel,
                                        int n_q_used) const {
    const auto units = encode_features(log_mel, n_q_used);
    const auto rec = decode_features(units);
    double acc = 0.0;
    size_t n = 0;
    for (size_t t = 0; t < log_mel.size(); ++t) {
        for (size_t c = 0; c < log_mel[t].size(); ++c) {
            const double d = rec[t][c] - log_mel[t][c];
            acc += d * d;
            ++n;
        }
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

// ---- persistence --------------------------------------------------------------

namespace {

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

json codec_config_to_json(const CodecConfig& c) {
    return json{{"n_q", c.n_q},
                {"total_levels", c.total_levels},
                {"codebook_size", c.codebook_size},
                {"sample_rate", c.sample_rate},
                {"hop", c.hop},
                {"feature_dim", c.feature_dim},
                {"conv_hidden", c.conv_hidden},
                {"mel_shift", c.mel_shift},
                {"mel_scale", c.mel_scale},
                {"mel",
                 {{"sample_rate", c.mel.sample_rate},
                  {"hop", c.mel.hop},
                  {"win", c.mel.win},
                  {"n_mels", c.mel.n_mels},
                  {"fmin", c.mel.fmin},
                  {"fmax", c.mel.fmax},
                  {"log_floor", c.mel.log_floor}}}};
}

CodecConfig codec_config_from_json(const json& j) {
    CodecConfig c;
    c.n_q = j.at("n_q");
    c.total_levels = j.at("total_levels");
    c.codebook_size = j.at("codebook_size");
    c.sample_rate = j.at("sample_rate");
    c.hop = j.at("hop");
    c.feature_dim = j.at("feature_dim");
    c.conv_hidden = j.at("conv_hidden");
    c.mel_shift = j.at("mel_shift");
    c.mel_scale = j.at("mel_scale");
    const auto& m = j.at("mel");
    c.mel.sample_rate = m.at("sample_rate");
    c.mel.hop = m.at("hop");
    c.mel.win = m.at("win");
    c.mel.n_mels = m.at("n_mels");
    c.mel.fmin = m.at("fmin");
    c.mel.fmax = m.at("fmax");
    c.mel.log_floor = m.at("log_floor");
    return c;
}

}  // namespace

void Codec::save(const std::filesystem::path& path) const {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DataError("cannot write codec checkpoint: " + path.string());
        out.write("SVSC", 4);
        const uint32_t version = 1;
        out.write(reinterpret_cast<const char*>(&version), 4);
        const std::string cfg = codec_config_to_json(cfg_).dump();
        const uint32_t cfg_len = static_cast<uint32_t>(cfg.size());
        out.write(reinterpret_cast<const char*>(&cfg_len), 4);
        out.write(cfg.data(), cfg_len);
        const uint8_t trained = trained_ ? 1 : 0;
        out.write(reinterpret_cast<const char*>(&trained), 1);
        const uint32_t n_params = static_cast<uint32_t>(params_.count());
        out.write(reinterpret_cast<const char*>(&n_params), 4);
        for (size_t i = 0; i < params_.count(); ++i) {
            const auto& p = params_[i];
            const uint32_t name_len = static_cast<uint32_t>(p.name.size());
            out.write(reinterpret_cast<const char*>(&name_len), 4);
            out.write(p.name.data(), name_len);
            write_tensor(out, p.value);
        }
        const uint32_t n_cbs = static_cast<uint32_t>(codebooks_.size());
        out.write(reinterpret_cast<const char*>(&n_cbs), 4);
        for (const auto& cb : codebooks_) write_tensor(out, cb);
        if (!out) throw DataError("failed writing codec checkpoint: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

Codec Codec::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open codec checkpoint: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "SVSC", 4) != 0)
        throw DataError("bad codec checkpoint magic: " + path.string());
    uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    if (version != 1) throw DataError("unsupported codec checkpoint version");
    uint32_t cfg_len = 0;
    in.read(reinterpret_cast<char*>(&cfg_len), 4);
    std::string cfg_str(cfg_len, '\0');
    in.read(cfg_str.data(), cfg_len);
    Codec codec(codec_config_from_json(json::parse(cfg_str)));
    uint8_t trained = 0;
    in.read(reinterpret_cast<char*>(&trained), 1);
    codec.trained_ = trained != 0;
    uint32_t n_params = 0;
    in.read(reinterpret_cast<char*>(&n_params), 4);
    for (uint32_t i = 0; i < n_params; ++i) {
        uint32_t name_len = 0;
        in.read(reinterpret_cast<char*>(&name_len), 4);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        nn::Parameter* p = codec.params_.find(name);
        if (p == nullptr) throw DataError("codec checkpoint has unknown parameter " + name);
        p->value = read_tensor(in);
    }
    uint32_t n_cbs = 0;
    in.read(reinterpret_cast<char*>(&n_cbs), 4);
    codec.codebooks_.clear();
    for (uint32_t i = 0; i < n_cbs; ++i) codec.codebooks_.push_back(read_tensor(in));
    if (!in) throw DataError("truncated codec checkpoint: " + path.string());
    return codec;
}

}  // namespace svs
