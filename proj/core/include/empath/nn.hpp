#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "empath/rng.hpp"

namespace empath::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// A named tensor with its gradient accumulator. Models expose their
// parameters as an ordered registry of these; the optimizer, checkpoint
// writer and gradient checker all walk that registry.
struct Param {
    std::string name;
    Mat w;
    Mat g;

    void init_zero(const std::string& n, Eigen::Index rows, Eigen::Index cols);
    void init_normal(const std::string& n, Eigen::Index rows, Eigen::Index cols, double stddev,
                     Rng& rng);
    void zero_grad() { g.setZero(); }
};

void zero_grads(std::span<Param* const> params);

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

Mat gelu(const Mat& x);
Mat gelu_backward(const Mat& x, const Mat& dy);

// Row-wise softmax with max subtraction.
Mat softmax_rows(const Mat& x);
// dL/dx given y = softmax_rows(x) and dL/dy.
Mat softmax_rows_backward(const Mat& y, const Mat& dy);

// log(softmax(v)) for one logit vector.
Vec log_softmax(const Vec& v);

// Inverted-scaling dropout mask (entries 0 or 1/(1-p)).
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng);

// ---------------------------------------------------------------------------
// Layers. forward() is const and writes activations into an external cache,
// so trained models can serve concurrent inference; backward() accumulates
// into the layer's grads and is single-threaded by contract.
// ---------------------------------------------------------------------------

struct Linear {
    Param W;  // d_in x d_out
    Param b;  // 1 x d_out
    bool has_bias = true;

    struct Cache {
        Mat x;
    };

    void init(const std::string& name, int d_in, int d_out, Rng& rng, bool with_bias = true);
    void collect(std::vector<Param*>& out);
    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Cache& cache, const Mat& dy);
};

struct LayerNorm {
    Param gain;  // 1 x d
    Param bias;  // 1 x d
    static constexpr double kEps = 1e-5;

    struct Cache {
        Mat xhat;
        Vec inv_std;
    };

    void init(const std::string& name, int d);
    void collect(std::vector<Param*>& out);
    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Cache& cache, const Mat& dy);
};

struct Embedding {
    Param table;  // rows x d

    struct Cache {
        std::vector<int> ids;
    };

    void init(const std::string& name, int rows, int d, double stddev, Rng& rng);
    void collect(std::vector<Param*>& out);
    Mat forward(std::span<const int> ids, Cache* cache) const;
    void backward(const Cache& cache, const Mat& dy);
};

// Multi-head scaled dot-product attention; self when kv == q input, cross
// when kv comes from encoder memory.
struct MultiHeadAttention {
    int n_heads = 1;
    Linear wq, wk, wv, wo;

    struct Cache {
        Linear::Cache q_c, k_c, v_c, o_c;
        Mat Q, K, V;
        std::vector<Mat> attn;        // post-softmax weights per head
        std::vector<Mat> attn_mask;   // dropout masks per head (empty when off)
        Mat concat;
    };

    void init(const std::string& name, int d_model, int heads, Rng& rng);
    void collect(std::vector<Param*>& out);

    Mat forward(const Mat& q_in, const Mat& kv_in, bool causal, double dropout_p, Rng* rng,
                Cache* cache) const;
    // Returns gradient w.r.t. q_in; adds gradient w.r.t. kv_in to *dkv_in
    // (pass the same accumulator as dq for self-attention).
    Mat backward(const Cache& cache, const Mat& dy, Mat* dkv_in);
};

struct FeedForward {
    Linear fc1, fc2;

    struct Cache {
        Linear::Cache fc1_c, fc2_c;
        Mat pre_act;
    };

    void init(const std::string& name, int d_model, int d_ff, Rng& rng);
    void collect(std::vector<Param*>& out);
    Mat forward(const Mat& x, Cache* cache) const;
    Mat backward(const Cache& cache, const Mat& dy);
};

// Post-norm transformer encoder block: x = LN(x + Drop(Attn(x)));
// x = LN(x + Drop(FFN(x))).
struct EncoderLayer {
    MultiHeadAttention attn;
    LayerNorm ln1;
    FeedForward ff;
    LayerNorm ln2;

    struct Cache {
        MultiHeadAttention::Cache attn_c;
        Mat attn_drop_mask;
        LayerNorm::Cache ln1_c;
        FeedForward::Cache ff_c;
        Mat ff_drop_mask;
        LayerNorm::Cache ln2_c;
    };

    void init(const std::string& name, int d_model, int n_heads, int d_ff, Rng& rng);
    void collect(std::vector<Param*>& out);
    Mat forward(const Mat& x, double dropout_p, Rng* rng, Cache* cache) const;
    Mat backward(const Cache& cache, const Mat& dy);
};

// Decoder block: causal self-attention, cross-attention to encoder memory,
// feed-forward; post-norm residuals throughout.
struct DecoderLayer {
    MultiHeadAttention self_attn;
    LayerNorm ln1;
    MultiHeadAttention cross_attn;
    LayerNorm ln2;
    FeedForward ff;
    LayerNorm ln3;

    struct Cache {
        MultiHeadAttention::Cache self_c;
        Mat self_drop_mask;
        LayerNorm::Cache ln1_c;
        MultiHeadAttention::Cache cross_c;
        Mat cross_drop_mask;
        LayerNorm::Cache ln2_c;
        FeedForward::Cache ff_c;
        Mat ff_drop_mask;
        LayerNorm::Cache ln3_c;
    };

    void init(const std::string& name, int d_model, int n_heads, int d_ff, Rng& rng);
    void collect(std::vector<Param*>& out);
    Mat forward(const Mat& x, const Mat& memory, double dropout_p, Rng* rng,
                Cache* cache) const;
    // Returns dx; accumulates the gradient w.r.t. memory into *dmemory.
    Mat backward(const Cache& cache, const Mat& dy, Mat* dmemory);
};

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double eps = 1e-6;
};

class Adam {
public:
    Adam(std::vector<Param*> params, AdamConfig cfg);
    void step();  // applies current grads; caller zeroes them afterwards

private:
    std::vector<Param*> params_;
    AdamConfig cfg_;
    std::vector<Mat> m_, v_;
    long t_ = 0;
};

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst_param;
    int coords_checked = 0;
};

// Central-difference check over a random coordinate subset that is
// guaranteed to touch every parameter, >= min_coords total. `loss_fn` must
// be a pure function of the current weights; `grad_fn` must zero the grads
// and repopulate them analytically.
GradCheckResult grad_check_params(std::span<Param* const> params,
                                  const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn, double epsilon,
                                  int min_coords, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Training history
// ---------------------------------------------------------------------------

struct HistoryRow {
    int epoch = 0;
    std::string split;  // "train" | "val"
    double loss = 0.0;
    double accuracy = 0.0;
};

using TrainHistory = std::vector<HistoryRow>;

void save_history_csv(const TrainHistory& history, const std::string& path);

}  // namespace empath::nn
