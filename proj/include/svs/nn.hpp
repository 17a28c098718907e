#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "svs/common.hpp"

namespace svs::nn {

// Keeps every tensor buffer on the same 64-byte boundary so Eigen's
// vectorized kernels take identical code paths run after run; heap-dependent
// alignment would otherwise reorder float sums and break bit reproducibility.
template <typename T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t kAlign{64};

    AlignedAllocator() = default;
    template <typename U>
    AlignedAllocator(const AlignedAllocator<U>&) {}

    T* allocate(size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), kAlign));
    }
    void deallocate(T* p, size_t) noexcept { ::operator delete(p, kAlign); }

    template <typename U>
    bool operator==(const AlignedAllocator<U>&) const {
        return true;
    }
    template <typename U>
    bool operator!=(const AlignedAllocator<U>&) const {
        return false;
    }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

// Dense row-major float matrix. Vectors are 1 x n.
struct Tensor {
    int rows = 0;
    int cols = 0;
    FloatBuffer v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0f) {}

    static Tensor zeros(int r, int c) { return Tensor(r, c); }
    static Tensor full(int r, int c, float x) {
        Tensor t(r, c);
        std::fill(t.v.begin(), t.v.end(), x);
        return t;
    }

    float& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    float at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
};

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;  // accumulated until zero_grads
};

class ParamStore {
  public:
    Parameter& add(const std::string& name, int rows, int cols);
    Parameter& add_normal(const std::string& name, int rows, int cols, Rng& rng,
                          float stddev = 0.02f);
    Parameter& add_const(const std::string& name, int rows, int cols, float value);

    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;
    void zero_grads();
    size_t count() const { return params_.size(); }
    Parameter& operator[](size_t i) { return *params_[i]; }
    const Parameter& operator[](size_t i) const { return *params_[i]; }

    uint64_t checksum() const;  // FNV-1a over parameter bytes, order-sensitive

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
};

// Reverse-mode tape. One Graph per forward pass; parameters live outside and
// accumulate gradients across graphs.
class Graph {
  public:
    using Var = int;

    Graph() = default;
    // backward closures capture this; pin the graph in place
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;
    Graph(Graph&&) = delete;
    Graph& operator=(Graph&&) = delete;

    Var input(Tensor t);           // leaf whose gradient is retained
    Var constant(Tensor t);        // leaf without gradient
    Var param(Parameter& p);       // leaf bound to a Parameter

    Var matmul(Var a, Var b);      // [m,k] x [k,n]
    Var matmul_nt(Var a, Var b);   // [m,k] x [n,k]^T -> [m,n]
    Var add(Var a, Var b);
    Var add_rowvec(Var a, Var bias);  // bias [1,n] broadcast over rows
    Var scale(Var a, float s);
    Var slice_rows(Var a, int r0, int n);
    Var slice_cols(Var a, int c0, int n);
    Var concat_rows(const std::vector<Var>& parts);
    Var concat_cols(const std::vector<Var>& parts);
    Var reshape(Var a, int r, int c);  // contiguous reinterpretation
    Var rows_gather(Var table, std::vector<int> ids);
    Var layernorm(Var a, Var gamma, Var beta, float eps = 1e-5f);
    Var gelu(Var a);
    Var mean_rows(Var a);  // [m,n] -> [1,n]
    Var max_rows(Var a);   // columnwise max, gradient to the first argmax row

    // Per-row softmax restricted to columns [begin[i], end[i]); everything
    // outside the band is exactly zero and receives exactly zero gradient.
    Var softmax_rows_banded(Var a, std::vector<int> begin, std::vector<int> end);

    // Within each nq-row block, shift rows down by one; the first row of each
    // block becomes start (a [1,w] var). Feeds the local transformer with the
    // previous intra-frame token.
    Var shift_rows_in_blocks(Var a, int block, Var start);

    // sum_i -log softmax(logits_i)[target_i]; caller divides by the count
    Var cross_entropy_sum(Var logits, std::vector<int> targets);
    // elementwise sigmoid binary cross-entropy against 0/1 targets, summed
    Var bce_with_logits_sum(Var logits, Tensor targets);
    Var mse_sum(Var a, Tensor target);
    Var sum_all(Var a);  // scalar

    // forward value = quantized, backward passes gradient straight to a
    Var straight_through(Var a, Tensor quantized);

    void backward(Var root);  // root must be 1x1

    const Tensor& val(Var v) const { return nodes_[v].val; }
    const Tensor& grad(Var v) const { return nodes_[v].grad; }
    size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor val;
        Tensor grad;
        std::vector<Var> inputs;
        std::function<void()> back;  // empty for leaves
        Parameter* bound = nullptr;
    };

    Var push(Tensor val, std::vector<Var> inputs, std::function<void()> back);
    std::vector<Node> nodes_;
};

struct AdamConfig {
    float lr = 1e-3f;
    float beta1 = 0.9f;
    float beta2 = 0.98f;
    float eps = 1e-9f;
    float grad_clip = 1.0f;  // global L2 norm; <= 0 disables
};

class Adam {
  public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
    void step(ParamStore& params);
    int steps_taken() const { return t_; }

  private:
    AdamConfig cfg_;
    int t_ = 0;
    std::vector<Tensor> m_, v_;
};

}  // namespace svs::nn
