#include "svs/nn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

namespace svs::nn {

namespace {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<Mat>;
using CMap = Eigen::Map<const Mat>;

Map map(Tensor& t) { return Map(t.v.data(), t.rows, t.cols); }
CMap map(const Tensor& t) { return CMap(t.v.data(), t.rows, t.cols); }

constexpr float kGeluC = 0.7978845608f;  // sqrt(2/pi)

}  // namespace

Parameter& ParamStore::add(const std::string& name, int rows, int cols) {
    require_config(find(name) == nullptr, "duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->value = Tensor::zeros(rows, cols);
    p->grad = Tensor::zeros(rows, cols);
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParamStore::add_normal(const std::string& name, int rows, int cols, Rng& rng,
                                  float stddev) {
    Parameter& p = add(name, rows, cols);
    for (auto& x : p.value.v) x = rng.normal_f(0.0f, stddev);
    return p;
}

Parameter& ParamStore::add_const(const std::string& name, int rows, int cols, float value) {
    Parameter& p = add(name, rows, cols);
    std::fill(p.value.v.begin(), p.value.v.end(), value);
    return p;
}

Parameter* ParamStore::find(const std::string& name) {
    for (auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

const Parameter* ParamStore::find(const std::string& name) const {
    for (const auto& p : params_) {
        if (p->name == name) return p.get();
    }
    return nullptr;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0f);
}

uint64_t ParamStore::checksum() const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, size_t n) {
        const unsigned char* b = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    for (const auto& p : params_) {
        mix(p->name.data(), p->name.size());
        mix(p->value.v.data(), p->value.v.size() * sizeof(float));
    }
    return h;
}

// ---- graph -------------------------------------------------------------------

Graph::Var Graph::push(Tensor val, std::vector<Var> inputs, std::function<void()> back) {
    Node n;
    n.grad = Tensor::zeros(val.rows, val.cols);
    n.val = std::move(val);
    n.inputs = std::move(inputs);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Var>(nodes_.size() - 1);
}

Graph::Var Graph::input(Tensor t) { return push(std::move(t), {}, {}); }

Graph::Var Graph::constant(Tensor t) { return push(std::move(t), {}, {}); }

Graph::Var Graph::param(Parameter& p) {
    const Var v = push(p.value, {}, {});
    nodes_[v].bound = &p;
    return v;
}

Graph::Var Graph::matmul(Var a, Var b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    require_input(ta.cols == tb.rows, "matmul: inner dimensions differ");
    Tensor out(ta.rows, tb.cols);
    map(out).noalias() = map(ta) * map(tb);
    const Var v = push(std::move(out), {a, b}, {});
    nodes_[v].back = [this, v, a, b]() {
        const Tensor& g = nodes_[v].grad;
        map(nodes_[a].grad).noalias() += map(g) * map(nodes_[b].val).transpose();
        map(nodes_[b].grad).noalias() += map(nodes_[a].val).transpose() * map(g);
    };
    return v;
}

Graph::Var Graph::matmul_nt(Var a, Var b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    require_input(ta.cols == tb.cols, "matmul_nt: inner dimensions differ");
    Tensor out(ta.rows, tb.rows);
    map(out).noalias() = map(ta) * map(tb).transpose();
    const Var v = push(std::move(out), {a, b}, {});
    nodes_[v].back = [this, v, a, b]() {
        const Tensor& g = nodes_[v].grad;
        map(nodes_[a].grad).noalias() += map(g) * map(nodes_[b].val);
        map(nodes_[b].grad).noalias() += map(g).transpose() * map(nodes_[a].val);
    };
    return v;
}

Graph::Var Graph::add(Var a, Var b) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[b].val;
    require_input(ta.same_shape(tb), "add: shapes differ");
    Tensor out = ta;
    map(out) += map(tb);
    const Var v = push(std::move(out), {a, b}, {});
    nodes_[v].back = [this, v, a, b]() {
        map(nodes_[a].grad) += map(nodes_[v].grad);
        map(nodes_[b].grad) += map(nodes_[v].grad);
    };
    return v;
}

Graph::Var Graph::add_rowvec(Var a, Var bias) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tb = nodes_[bias].val;
    require_input(tb.rows == 1 && tb.cols == ta.cols, "add_rowvec: bias must be [1, cols]");
    Tensor out = ta;
    map(out).rowwise() += map(tb).row(0);
    const Var v = push(std::move(out), {a, bias}, {});
    nodes_[v].back = [this, v, a, bias]() {
        map(nodes_[a].grad) += map(nodes_[v].grad);
        map(nodes_[bias].grad).row(0) += map(nodes_[v].grad).colwise().sum();
    };
    return v;
}

Graph::Var Graph::scale(Var a, float s) {
    Tensor out = nodes_[a].val;
    map(out) *= s;
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, s]() { map(nodes_[a].grad) += s * map(nodes_[v].grad); };
    return v;
}

Graph::Var Graph::slice_rows(Var a, int r0, int n) {
    const Tensor& ta = nodes_[a].val;
    require_input(r0 >= 0 && n >= 0 && r0 + n <= ta.rows, "slice_rows: out of range");
    Tensor out(n, ta.cols);
    map(out) = map(ta).middleRows(r0, n);
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, r0, n]() {
        map(nodes_[a].grad).middleRows(r0, n) += map(nodes_[v].grad);
    };
    return v;
}

Graph::Var Graph::slice_cols(Var a, int c0, int n) {
    const Tensor& ta = nodes_[a].val;
    require_input(c0 >= 0 && n >= 0 && c0 + n <= ta.cols, "slice_cols: out of range");
    Tensor out(ta.rows, n);
    map(out) = map(ta).middleCols(c0, n);
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, c0, n]() {
        map(nodes_[a].grad).middleCols(c0, n) += map(nodes_[v].grad);
    };
    return v;
}

Graph::Var Graph::concat_rows(const std::vector<Var>& parts) {
    require_input(!parts.empty(), "concat_rows: no parts");
    int rows = 0;
    const int cols = nodes_[parts[0]].val.cols;
    for (Var p : parts) {
        require_input(nodes_[p].val.cols == cols, "concat_rows: column mismatch");
        rows += nodes_[p].val.rows;
    }
    Tensor out(rows, cols);
    int r = 0;
    for (Var p : parts) {
        map(out).middleRows(r, nodes_[p].val.rows) = map(nodes_[p].val);
        r += nodes_[p].val.rows;
    }
    const Var v = push(std::move(out), parts, {});
    nodes_[v].back = [this, v, parts]() {
        int r = 0;
        for (Var p : parts) {
            map(nodes_[p].grad) += map(nodes_[v].grad).middleRows(r, nodes_[p].val.rows);
            r += nodes_[p].val.rows;
        }
    };
    return v;
}

Graph::Var Graph::concat_cols(const std::vector<Var>& parts) {
    require_input(!parts.empty(), "concat_cols: no parts");
    int cols = 0;
    const int rows = nodes_[parts[0]].val.rows;
    for (Var p : parts) {
        require_input(nodes_[p].val.rows == rows, "concat_cols: row mismatch");
        cols += nodes_[p].val.cols;
    }
    Tensor out(rows, cols);
    int c = 0;
    for (Var p : parts) {
        map(out).middleCols(c, nodes_[p].val.cols) = map(nodes_[p].val);
        c += nodes_[p].val.cols;
    }
    const Var v = push(std::move(out), parts, {});
    nodes_[v].back = [this, v, parts]() {
        int c = 0;
        for (Var p : parts) {
            map(nodes_[p].grad) += map(nodes_[v].grad).middleCols(c, nodes_[p].val.cols);
            c += nodes_[p].val.cols;
        }
    };
    return v;
}

Graph::Var Graph::reshape(Var a, int r, int c) {
    const Tensor& ta = nodes_[a].val;
    require_input(static_cast<size_t>(r) * c == ta.size(), "reshape: element count differs");
    Tensor out(r, c);
    out.v = ta.v;
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a]() {
        const auto& g = nodes_[v].grad.v;
        auto& ga = nodes_[a].grad.v;
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
    return v;
}

Graph::Var Graph::rows_gather(Var table, std::vector<int> ids) {
    const Tensor& tt = nodes_[table].val;
    Tensor out(static_cast<int>(ids.size()), tt.cols);
    for (size_t i = 0; i < ids.size(); ++i) {
        require_input(ids[i] >= 0 && ids[i] < tt.rows, "rows_gather: id out of range");
        map(out).row(static_cast<int>(i)) = map(tt).row(ids[i]);
    }
    const Var v = push(std::move(out), {table}, {});
    nodes_[v].back = [this, v, table, ids = std::move(ids)]() {
        for (size_t i = 0; i < ids.size(); ++i) {
            map(nodes_[table].grad).row(ids[i]) +=
                map(nodes_[v].grad).row(static_cast<int>(i));
        }
    };
    return v;
}

Graph::Var Graph::layernorm(Var a, Var gamma, Var beta, float eps) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& tg = nodes_[gamma].val;
    const Tensor& tb = nodes_[beta].val;
    require_input(tg.rows == 1 && tg.cols == ta.cols && tb.rows == 1 && tb.cols == ta.cols,
                  "layernorm: gamma/beta must be [1, cols]");
    const int n = ta.cols;
    Tensor out(ta.rows, n);
    Tensor xhat(ta.rows, n);
    std::vector<float> inv_sigma(ta.rows);
    for (int r = 0; r < ta.rows; ++r) {
        float mean = 0.0f;
        for (int c = 0; c < n; ++c) mean += ta.at(r, c);
        mean /= n;
        float var = 0.0f;
        for (int c = 0; c < n; ++c) {
            const float d = ta.at(r, c) - mean;
            var += d * d;
        }
        var /= n;
        inv_sigma[r] = 1.0f / std::sqrt(var + eps);
        for (int c = 0; c < n; ++c) {
            xhat.at(r, c) = (ta.at(r, c) - mean) * inv_sigma[r];
            out.at(r, c) = xhat.at(r, c) * tg.at(0, c) + tb.at(0, c);
        }
    }
    const Var v = push(std::move(out), {a, gamma, beta}, {});
    nodes_[v].back = [this, v, a, gamma, beta, xhat = std::move(xhat),
                      inv_sigma = std::move(inv_sigma), n]() {
        const Tensor& g = nodes_[v].grad;
        const Tensor& tg = nodes_[gamma].val;
        for (int r = 0; r < g.rows; ++r) {
            float sum_gy = 0.0f, sum_gyx = 0.0f;
            for (int c = 0; c < n; ++c) {
                const float gy = g.at(r, c) * tg.at(0, c);
                sum_gy += gy;
                sum_gyx += gy * xhat.at(r, c);
                nodes_[gamma].grad.at(0, c) += g.at(r, c) * xhat.at(r, c);
                nodes_[beta].grad.at(0, c) += g.at(r, c);
            }
            for (int c = 0; c < n; ++c) {
                const float gy = g.at(r, c) * tg.at(0, c);
                nodes_[a].grad.at(r, c) +=
                    inv_sigma[r] * (gy - (sum_gy + xhat.at(r, c) * sum_gyx) / n);
            }
        }
    };
    return v;
}

Graph::Var Graph::gelu(Var a) {
    const Tensor& ta = nodes_[a].val;
    Tensor out(ta.rows, ta.cols);
    for (size_t i = 0; i < ta.size(); ++i) {
        const float x = ta.v[i];
        out.v[i] = 0.5f * x * (1.0f + std::tanh(kGeluC * (x + 0.044715f * x * x * x)));
    }
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a]() {
        const Tensor& ta = nodes_[a].val;
        for (size_t i = 0; i < ta.size(); ++i) {
            const float x = ta.v[i];
            const float t = std::tanh(kGeluC * (x + 0.044715f * x * x * x));
            const float dt = (1.0f - t * t) * kGeluC * (1.0f + 3.0f * 0.044715f * x * x);
            nodes_[a].grad.v[i] += nodes_[v].grad.v[i] * (0.5f * (1.0f + t) + 0.5f * x * dt);
        }
    };
    return v;
}

Graph::Var Graph::mean_rows(Var a) {
    const Tensor& ta = nodes_[a].val;
    require_input(ta.rows > 0, "mean_rows: empty input");
    Tensor out(1, ta.cols);
    map(out).row(0) = map(ta).colwise().mean();
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a]() {
        const float inv = 1.0f / nodes_[a].val.rows;
        map(nodes_[a].grad).rowwise() += inv * map(nodes_[v].grad).row(0);
    };
    return v;
}

Graph::Var Graph::max_rows(Var a) {
    const Tensor& ta = nodes_[a].val;
    require_input(ta.rows > 0, "max_rows: empty input");
    Tensor out(1, ta.cols);
    std::vector<int> arg(ta.cols, 0);
    for (int c = 0; c < ta.cols; ++c) {
        float best = ta.at(0, c);
        for (int r = 1; r < ta.rows; ++r) {
            if (ta.at(r, c) > best) {
                best = ta.at(r, c);
                arg[c] = r;
            }
        }
        out.at(0, c) = best;
    }
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, arg = std::move(arg)]() {
        for (int c = 0; c < nodes_[v].grad.cols; ++c) {
            nodes_[a].grad.at(arg[c], c) += nodes_[v].grad.at(0, c);
        }
    };
    return v;
}

Graph::Var Graph::softmax_rows_banded(Var a, std::vector<int> begin, std::vector<int> end) {
    const Tensor& ta = nodes_[a].val;
    require_input(static_cast<int>(begin.size()) == ta.rows &&
                      static_cast<int>(end.size()) == ta.rows,
                  "softmax_rows_banded: band lists must match row count");
    Tensor out(ta.rows, ta.cols);  // zero outside the band
    for (int r = 0; r < ta.rows; ++r) {
        require_input(begin[r] >= 0 && end[r] > begin[r] && end[r] <= ta.cols,
                      "softmax_rows_banded: bad band");
        float mx = -std::numeric_limits<float>::infinity();
        for (int c = begin[r]; c < end[r]; ++c) mx = std::max(mx, ta.at(r, c));
        float z = 0.0f;
        for (int c = begin[r]; c < end[r]; ++c) {
            out.at(r, c) = std::exp(ta.at(r, c) - mx);
            z += out.at(r, c);
        }
        for (int c = begin[r]; c < end[r]; ++c) out.at(r, c) /= z;
    }
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, begin = std::move(begin), end = std::move(end)]() {
        const Tensor& p = nodes_[v].val;
        const Tensor& g = nodes_[v].grad;
        for (int r = 0; r < p.rows; ++r) {
            float dot = 0.0f;
            for (int c = begin[r]; c < end[r]; ++c) dot += p.at(r, c) * g.at(r, c);
            for (int c = begin[r]; c < end[r]; ++c) {
                nodes_[a].grad.at(r, c) += p.at(r, c) * (g.at(r, c) - dot);
            }
        }
    };
    return v;
}

Graph::Var Graph::shift_rows_in_blocks(Var a, int block, Var start) {
    const Tensor& ta = nodes_[a].val;
    const Tensor& ts = nodes_[start].val;
    require_input(block > 0 && ta.rows % block == 0,
                  "shift_rows_in_blocks: rows not a multiple of block");
    require_input(ts.rows == 1 && ts.cols == ta.cols,
                  "shift_rows_in_blocks: start must be [1, cols]");
    Tensor out(ta.rows, ta.cols);
    for (int r = 0; r < ta.rows; ++r) {
        if (r % block == 0) {
            map(out).row(r) = map(ts).row(0);
        } else {
            map(out).row(r) = map(ta).row(r - 1);
        }
    }
    const Var v = push(std::move(out), {a, start}, {});
    nodes_[v].back = [this, v, a, start, block]() {
        const Tensor& g = nodes_[v].grad;
        for (int r = 0; r < g.rows; ++r) {
            if (r % block == 0) {
                map(nodes_[start].grad).row(0) += map(g).row(r);
            } else {
                map(nodes_[a].grad).row(r - 1) += map(g).row(r);
            }
        }
    };
    return v;
}

Graph::Var Graph::cross_entropy_sum(Var logits, std::vector<int> targets) {
    const Tensor& tl = nodes_[logits].val;
    require_input(static_cast<int>(targets.size()) == tl.rows,
                  "cross_entropy_sum: target count must match rows");
    Tensor probs(tl.rows, tl.cols);
    double loss = 0.0;
    for (int r = 0; r < tl.rows; ++r) {
        require_input(targets[r] >= 0 && targets[r] < tl.cols,
                      "cross_entropy_sum: target out of range");
        float mx = -std::numeric_limits<float>::infinity();
        for (int c = 0; c < tl.cols; ++c) mx = std::max(mx, tl.at(r, c));
        double z = 0.0;
        for (int c = 0; c < tl.cols; ++c) {
            probs.at(r, c) = std::exp(tl.at(r, c) - mx);
            z += probs.at(r, c);
        }
        for (int c = 0; c < tl.cols; ++c) probs.at(r, c) /= static_cast<float>(z);
        loss -= std::log(std::max(1e-30, static_cast<double>(probs.at(r, targets[r]))));
    }
    Tensor out(1, 1);
    out.at(0, 0) = static_cast<float>(loss);
    const Var v = push(std::move(out), {logits}, {});
    nodes_[v].back = [this, v, logits, probs = std::move(probs),
                      targets = std::move(targets)]() {
        const float g = nodes_[v].grad.at(0, 0);
        Tensor& gl = nodes_[logits].grad;
        for (int r = 0; r < gl.rows; ++r) {
            for (int c = 0; c < gl.cols; ++c) {
                const float onehot = c == targets[r] ? 1.0f : 0.0f;
                gl.at(r, c) += g * (probs.at(r, c) - onehot);
            }
        }
    };
    return v;
}

Graph::Var Graph::bce_with_logits_sum(Var logits, Tensor targets) {
    const Tensor& tl = nodes_[logits].val;
    require_input(tl.same_shape(targets), "bce_with_logits_sum: shapes differ");
    double loss = 0.0;
    for (size_t i = 0; i < tl.size(); ++i) {
        const double z = tl.v[i];
        const double t = targets.v[i];
        loss += std::max(z, 0.0) - t * z + std::log1p(std::exp(-std::abs(z)));
    }
    Tensor out(1, 1);
    out.at(0, 0) = static_cast<float>(loss);
    const Var v = push(std::move(out), {logits}, {});
    nodes_[v].back = [this, v, logits, targets = std::move(targets)]() {
        const float g = nodes_[v].grad.at(0, 0);
        const Tensor& tl = nodes_[logits].val;
        for (size_t i = 0; i < tl.size(); ++i) {
            const float sig = 1.0f / (1.0f + std::exp(-tl.v[i]));
            nodes_[logits].grad.v[i] += g * (sig - targets.v[i]);
        }
    };
    return v;
}

Graph::Var Graph::mse_sum(Var a, Tensor target) {
    const Tensor& ta = nodes_[a].val;
    require_input(ta.same_shape(target), "mse_sum: shapes differ");
    double loss = 0.0;
    for (size_t i = 0; i < ta.size(); ++i) {
        const double d = ta.v[i] - target.v[i];
        loss += d * d;
    }
    Tensor out(1, 1);
    out.at(0, 0) = static_cast<float>(loss);
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a, target = std::move(target)]() {
        const float g = nodes_[v].grad.at(0, 0);
        auto& ga = nodes_[a].grad;
        const auto& ta = nodes_[a].val;
        for (size_t i = 0; i < ta.size(); ++i) {
            ga.v[i] += g * 2.0f * (ta.v[i] - target.v[i]);
        }
    };
    return v;
}

Graph::Var Graph::sum_all(Var a) {
    Tensor out(1, 1);
    out.at(0, 0) = map(nodes_[a].val).sum();
    const Var v = push(std::move(out), {a}, {});
    nodes_[v].back = [this, v, a]() {
        map(nodes_[a].grad).array() += nodes_[v].grad.at(0, 0);
    };
    return v;
}

Graph::Var Graph::straight_through(Var a, Tensor quantized) {
    require_input(nodes_[a].val.same_shape(quantized), "straight_through: shapes differ");
    const Var v = push(std::move(quantized), {a}, {});
    nodes_[v].back = [this, v, a]() { map(nodes_[a].grad) += map(nodes_[v].grad); };
    return v;
}

void Graph::backward(Var root) {
    require_input(root >= 0 && root < static_cast<Var>(nodes_.size()),
                  "backward: bad root");
    require_input(nodes_[root].val.rows == 1 && nodes_[root].val.cols == 1,
                  "backward: root must be a scalar");

    // mark nodes on a path to the root
    std::vector<char> needed(nodes_.size(), 0);
    needed[root] = 1;
    for (Var v = root; v >= 0; --v) {
        if (!needed[v]) continue;
        for (Var in : nodes_[v].inputs) needed[in] = 1;
    }

    nodes_[root].grad.at(0, 0) = 1.0f;
    for (Var v = root; v >= 0; --v) {
        if (!needed[v] || !nodes_[v].back) continue;
        nodes_[v].back();
    }
    // flush gradients of bound parameter leaves
    for (Var v = 0; v <= root; ++v) {
        if (needed[v] && nodes_[v].bound) {
            map(nodes_[v].bound->grad) += map(nodes_[v].grad);
        }
    }
}

void Adam::step(ParamStore& params) {
    if (m_.empty()) {
        for (size_t i = 0; i < params.count(); ++i) {
            m_.push_back(Tensor::zeros(params[i].value.rows, params[i].value.cols));
            v_.push_back(Tensor::zeros(params[i].value.rows, params[i].value.cols));
        }
    }
    require_input(m_.size() == params.count(), "Adam: parameter set changed");

    if (cfg_.grad_clip > 0.0f) {
        double norm2 = 0.0;
        for (size_t i = 0; i < params.count(); ++i) {
            for (float g : params[i].grad.v) norm2 += static_cast<double>(g) * g;
        }
        const double norm = std::sqrt(norm2);
        if (norm > cfg_.grad_clip) {
            const float s = static_cast<float>(cfg_.grad_clip / norm);
            for (size_t i = 0; i < params.count(); ++i) {
                for (float& g : params[i].grad.v) g *= s;
            }
        }
    }

    ++t_;
    const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(t_));
    const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(t_));
    for (size_t i = 0; i < params.count(); ++i) {
        Parameter& p = params[i];
        for (size_t k = 0; k < p.value.v.size(); ++k) {
            const float g = p.grad.v[k];
            m_[i].v[k] = cfg_.beta1 * m_[i].v[k] + (1.0f - cfg_.beta1) * g;
            v_[i].v[k] = cfg_.beta2 * v_[i].v[k] + (1.0f - cfg_.beta2) * g * g;
            const float mhat = m_[i].v[k] / bc1;
            const float vhat = v_[i].v[k] / bc2;
            p.value.v[k] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

}  // namespace svs::nn
