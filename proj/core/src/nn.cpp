#include "empath/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "empath/error.hpp"

namespace empath::nn {

void Param::init_zero(const std::string& n, Eigen::Index rows, Eigen::Index cols) {
    name = n;
    w = Mat::Zero(rows, cols);
    g = Mat::Zero(rows, cols);
}

void Param::init_normal(const std::string& n, Eigen::Index rows, Eigen::Index cols,
                        double stddev, Rng& rng) {
    init_zero(n, rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = rng.normal(0.0, stddev);
}

void zero_grads(std::span<Param* const> params) {
    for (Param* p : params) p->zero_grad();
}

// ---------------------------------------------------------------------------

Mat gelu(const Mat& x) {
    return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); });
}

Mat gelu_backward(const Mat& x, const Mat& dy) {
    Mat dx = x.unaryExpr([](double v) {
        const double phi = std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
        const double Phi = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
        return Phi + v * phi;
    });
    return dx.cwiseProduct(dy);
}

Mat softmax_rows(const Mat& x) {
    Mat y = x;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double mx = y.row(i).maxCoeff();
        y.row(i) = (y.row(i).array() - mx).exp().matrix();
        y.row(i) /= y.row(i).sum();
    }
    return y;
}

Mat softmax_rows_backward(const Mat& y, const Mat& dy) {
    Mat dx(y.rows(), y.cols());
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double dot = y.row(i).cwiseProduct(dy.row(i)).sum();
        dx.row(i) = (y.row(i).array() * (dy.row(i).array() - dot)).matrix();
    }
    return dx;
}

Vec log_softmax(const Vec& v) {
    const double mx = v.maxCoeff();
    const double lse = std::log((v.array() - mx).exp().sum()) + mx;
    return (v.array() - lse).matrix();
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
    Mat mask(rows, cols);
    const double keep_scale = 1.0 / (1.0 - p);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            mask(i, j) = rng.uniform() < p ? 0.0 : keep_scale;
    return mask;
}

// ---------------------------------------------------------------------------

void Linear::init(const std::string& name, int d_in, int d_out, Rng& rng, bool with_bias) {
    // Xavier-style scale.
    const double stddev = std::sqrt(2.0 / static_cast<double>(d_in + d_out));
    W.init_normal(name + ".W", d_in, d_out, stddev, rng);
    has_bias = with_bias;
    if (has_bias) b.init_zero(name + ".b", 1, d_out);
}

void Linear::collect(std::vector<Param*>& out) {
    out.push_back(&W);
    if (has_bias) out.push_back(&b);
}

Mat Linear::forward(const Mat& x, Cache* cache) const {
    if (cache) cache->x = x;
    Mat y = x * W.w;
    if (has_bias) y.rowwise() += b.w.row(0);
    return y;
}

Mat Linear::backward(const Cache& cache, const Mat& dy) {
    W.g += cache.x.transpose() * dy;
    if (has_bias) b.g.row(0) += dy.colwise().sum();
    return dy * W.w.transpose();
}

void LayerNorm::init(const std::string& name, int d) {
    gain.init_zero(name + ".gain", 1, d);
    gain.w.setOnes();
    bias.init_zero(name + ".bias", 1, d);
}

void LayerNorm::collect(std::vector<Param*>& out) {
    out.push_back(&gain);
    out.push_back(&bias);
}

Mat LayerNorm::forward(const Mat& x, Cache* cache) const {
    const Eigen::Index T = x.rows(), d = x.cols();
    Mat xhat(T, d);
    Vec inv_std(T);
    for (Eigen::Index i = 0; i < T; ++i) {
        const double mu = x.row(i).mean();
        const double var = (x.row(i).array() - mu).square().mean();
        const double is = 1.0 / std::sqrt(var + kEps);
        xhat.row(i) = ((x.row(i).array() - mu) * is).matrix();
        inv_std(i) = is;
    }
    Mat y = xhat;
    y.array().rowwise() *= gain.w.row(0).array();
    y.array().rowwise() += bias.w.row(0).array();
    if (cache) {
        cache->xhat = std::move(xhat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Mat LayerNorm::backward(const Cache& cache, const Mat& dy) {
    const Eigen::Index T = dy.rows(), d = dy.cols();
    gain.g.row(0) += dy.cwiseProduct(cache.xhat).colwise().sum();
    bias.g.row(0) += dy.colwise().sum();
    Mat dx(T, d);
    for (Eigen::Index i = 0; i < T; ++i) {
        const auto dxhat = (dy.row(i).array() * gain.w.row(0).array()).eval();
        const double m1 = dxhat.mean();
        const double m2 = (dxhat * cache.xhat.row(i).array()).mean();
        dx.row(i) =
            (cache.inv_std(i) * (dxhat - m1 - cache.xhat.row(i).array() * m2)).matrix();
    }
    return dx;
}

void Embedding::init(const std::string& name, int rows, int d, double stddev, Rng& rng) {
    table.init_normal(name, rows, d, stddev, rng);
}

void Embedding::collect(std::vector<Param*>& out) { out.push_back(&table); }

Mat Embedding::forward(std::span<const int> ids, Cache* cache) const {
    Mat out(static_cast<Eigen::Index>(ids.size()), table.w.cols());
    for (size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= table.w.rows())
            throw InputError(table.name + ": id " + std::to_string(ids[i]) + " out of range");
        out.row(static_cast<Eigen::Index>(i)) = table.w.row(ids[i]);
    }
    if (cache) cache->ids.assign(ids.begin(), ids.end());
    return out;
}

void Embedding::backward(const Cache& cache, const Mat& dy) {
    for (size_t i = 0; i < cache.ids.size(); ++i)
        table.g.row(cache.ids[i]) += dy.row(static_cast<Eigen::Index>(i));
}

// ---------------------------------------------------------------------------

void MultiHeadAttention::init(const std::string& name, int d_model, int heads, Rng& rng) {
    n_heads = heads;
    wq.init(name + ".wq", d_model, d_model, rng);
    // Keys carry no bias: a shared key offset shifts every score in a row
    // equally and softmax cancels it, so the parameter would be dead weight.
    wk.init(name + ".wk", d_model, d_model, rng, /*with_bias=*/false);
    wv.init(name + ".wv", d_model, d_model, rng);
    wo.init(name + ".wo", d_model, d_model, rng);
}

void MultiHeadAttention::collect(std::vector<Param*>& out) {
    wq.collect(out);
    wk.collect(out);
    wv.collect(out);
    wo.collect(out);
}

Mat MultiHeadAttention::forward(const Mat& q_in, const Mat& kv_in, bool causal,
                                double dropout_p, Rng* rng, Cache* cache) const {
    const Eigen::Index d = q_in.cols();
    const Eigen::Index dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const Eigen::Index Tq = q_in.rows(), Tk = kv_in.rows();

    Cache local;
    Cache& c = cache ? *cache : local;
    c.Q = wq.forward(q_in, &c.q_c);
    c.K = wk.forward(kv_in, &c.k_c);
    c.V = wv.forward(kv_in, &c.v_c);
    c.attn.clear();
    c.attn_mask.clear();

    Mat concat(Tq, d);
    for (int h = 0; h < n_heads; ++h) {
        const auto Qh = c.Q.middleCols(h * dh, dh);
        const auto Kh = c.K.middleCols(h * dh, dh);
        const auto Vh = c.V.middleCols(h * dh, dh);
        Mat scores = scale * (Qh * Kh.transpose());
        if (causal) {
            for (Eigen::Index i = 0; i < Tq; ++i)
                for (Eigen::Index j = i + 1; j < Tk; ++j) scores(i, j) = -1e30;
        }
        Mat A = softmax_rows(scores);
        c.attn.push_back(A);
        if (dropout_p > 0.0 && rng) {
            Mat mask = dropout_mask(A.rows(), A.cols(), dropout_p, *rng);
            A = A.cwiseProduct(mask);
            c.attn_mask.push_back(std::move(mask));
        }
        concat.middleCols(h * dh, dh) = A * Vh;
    }
    c.concat = concat;
    return wo.forward(concat, &c.o_c);
}

Mat MultiHeadAttention::backward(const Cache& c, const Mat& dy, Mat* dkv_in) {
    const Eigen::Index d = c.Q.cols();
    const Eigen::Index dh = d / n_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Mat dconcat = wo.backward(c.o_c, dy);
    Mat dQ = Mat::Zero(c.Q.rows(), d), dK = Mat::Zero(c.K.rows(), d),
        dV = Mat::Zero(c.V.rows(), d);
    for (int h = 0; h < n_heads; ++h) {
        const auto Qh = c.Q.middleCols(h * dh, dh);
        const auto Kh = c.K.middleCols(h * dh, dh);
        const auto Vh = c.V.middleCols(h * dh, dh);
        const Mat& A = c.attn[static_cast<size_t>(h)];
        const auto dOh = dconcat.middleCols(h * dh, dh);

        Mat dA;
        if (!c.attn_mask.empty()) {
            const Mat& mask = c.attn_mask[static_cast<size_t>(h)];
            dV.middleCols(h * dh, dh) = A.cwiseProduct(mask).transpose() * dOh;
            dA = (dOh * Vh.transpose()).cwiseProduct(mask);
        } else {
            dV.middleCols(h * dh, dh) = A.transpose() * dOh;
            dA = dOh * Vh.transpose();
        }
        Mat dS = softmax_rows_backward(A, dA);
        dQ.middleCols(h * dh, dh) = scale * (dS * Kh);
        dK.middleCols(h * dh, dh) = scale * (dS.transpose() * Qh);
    }
    Mat dq_in = wq.backward(c.q_c, dQ);
    *dkv_in += wk.backward(c.k_c, dK);
    *dkv_in += wv.backward(c.v_c, dV);
    return dq_in;
}

// ---------------------------------------------------------------------------

void FeedForward::init(const std::string& name, int d_model, int d_ff, Rng& rng) {
    fc1.init(name + ".fc1", d_model, d_ff, rng);
    fc2.init(name + ".fc2", d_ff, d_model, rng);
}

void FeedForward::collect(std::vector<Param*>& out) {
    fc1.collect(out);
    fc2.collect(out);
}

Mat FeedForward::forward(const Mat& x, Cache* cache) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    c.pre_act = fc1.forward(x, &c.fc1_c);
    return fc2.forward(gelu(c.pre_act), &c.fc2_c);
}

Mat FeedForward::backward(const Cache& c, const Mat& dy) {
    Mat dh = fc2.backward(c.fc2_c, dy);
    return fc1.backward(c.fc1_c, gelu_backward(c.pre_act, dh));
}

// ---------------------------------------------------------------------------

namespace {

Mat maybe_dropout(const Mat& x, double p, Rng* rng, Mat* mask_out) {
    if (p <= 0.0 || rng == nullptr) {
        if (mask_out) mask_out->resize(0, 0);
        return x;
    }
    Mat mask = dropout_mask(x.rows(), x.cols(), p, *rng);
    Mat y = x.cwiseProduct(mask);
    if (mask_out) *mask_out = std::move(mask);
    return y;
}

Mat apply_saved_mask(const Mat& dy, const Mat& mask) {
    if (mask.size() == 0) return dy;
    return dy.cwiseProduct(mask);
}

}  // namespace

void EncoderLayer::init(const std::string& name, int d_model, int n_heads, int d_ff,
                        Rng& rng) {
    attn.init(name + ".attn", d_model, n_heads, rng);
    ln1.init(name + ".ln1", d_model);
    ff.init(name + ".ff", d_model, d_ff, rng);
    ln2.init(name + ".ln2", d_model);
}

void EncoderLayer::collect(std::vector<Param*>& out) {
    attn.collect(out);
    ln1.collect(out);
    ff.collect(out);
    ln2.collect(out);
}

Mat EncoderLayer::forward(const Mat& x, double dropout_p, Rng* rng, Cache* cache) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    Mat a = attn.forward(x, x, /*causal=*/false, dropout_p, rng, &c.attn_c);
    a = maybe_dropout(a, dropout_p, rng, &c.attn_drop_mask);
    Mat h = ln1.forward(x + a, &c.ln1_c);
    Mat f = ff.forward(h, &c.ff_c);
    f = maybe_dropout(f, dropout_p, rng, &c.ff_drop_mask);
    return ln2.forward(h + f, &c.ln2_c);
}

Mat EncoderLayer::backward(const Cache& c, const Mat& dy) {
    Mat dr2 = ln2.backward(c.ln2_c, dy);
    Mat df = apply_saved_mask(dr2, c.ff_drop_mask);
    Mat dh = dr2 + ff.backward(c.ff_c, df);
    Mat dr1 = ln1.backward(c.ln1_c, dh);
    Mat da = apply_saved_mask(dr1, c.attn_drop_mask);
    Mat dx = dr1;
    Mat dq = attn.backward(c.attn_c, da, &dx);
    dx += dq;
    return dx;
}

void DecoderLayer::init(const std::string& name, int d_model, int n_heads, int d_ff,
                        Rng& rng) {
    self_attn.init(name + ".self", d_model, n_heads, rng);
    ln1.init(name + ".ln1", d_model);
    cross_attn.init(name + ".cross", d_model, n_heads, rng);
    ln2.init(name + ".ln2", d_model);
    ff.init(name + ".ff", d_model, d_ff, rng);
    ln3.init(name + ".ln3", d_model);
}

void DecoderLayer::collect(std::vector<Param*>& out) {
    self_attn.collect(out);
    ln1.collect(out);
    cross_attn.collect(out);
    ln2.collect(out);
    ff.collect(out);
    ln3.collect(out);
}

Mat DecoderLayer::forward(const Mat& x, const Mat& memory, double dropout_p, Rng* rng,
                          Cache* cache) const {
    Cache local;
    Cache& c = cache ? *cache : local;
    Mat a = self_attn.forward(x, x, /*causal=*/true, dropout_p, rng, &c.self_c);
    a = maybe_dropout(a, dropout_p, rng, &c.self_drop_mask);
    Mat h1 = ln1.forward(x + a, &c.ln1_c);
    Mat cr = cross_attn.forward(h1, memory, /*causal=*/false, dropout_p, rng, &c.cross_c);
    cr = maybe_dropout(cr, dropout_p, rng, &c.cross_drop_mask);
    Mat h2 = ln2.forward(h1 + cr, &c.ln2_c);
    Mat f = ff.forward(h2, &c.ff_c);
    f = maybe_dropout(f, dropout_p, rng, &c.ff_drop_mask);
    return ln3.forward(h2 + f, &c.ln3_c);
}

Mat DecoderLayer::backward(const Cache& c, const Mat& dy, Mat* dmemory) {
    Mat dr3 = ln3.backward(c.ln3_c, dy);
    Mat df = apply_saved_mask(dr3, c.ff_drop_mask);
    Mat dh2 = dr3 + ff.backward(c.ff_c, df);
    Mat dr2 = ln2.backward(c.ln2_c, dh2);
    Mat dcr = apply_saved_mask(dr2, c.cross_drop_mask);
    Mat dh1 = dr2 + cross_attn.backward(c.cross_c, dcr, dmemory);
    Mat dr1 = ln1.backward(c.ln1_c, dh1);
    Mat da = apply_saved_mask(dr1, c.self_drop_mask);
    Mat dx = dr1;
    Mat dq = self_attn.backward(c.self_c, da, &dx);
    dx += dq;
    return dx;
}

// ---------------------------------------------------------------------------

Adam::Adam(std::vector<Param*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (Param* p : params_) {
        m_.push_back(Mat::Zero(p->w.rows(), p->w.cols()));
        v_.push_back(Mat::Zero(p->w.rows(), p->w.cols()));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params_.size(); ++i) {
        Param& p = *params_[i];
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.g;
        v_[i] = (cfg_.beta2 * v_[i].array() + (1.0 - cfg_.beta2) * p.g.array().square()).matrix();
        p.w.array() -= cfg_.learning_rate * (m_[i].array() / bc1) /
                       ((v_[i].array() / bc2).sqrt() + cfg_.eps);
    }
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check_params(std::span<Param* const> params,
                                  const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn, double epsilon,
                                  int min_coords, std::uint64_t seed) {
    if (params.empty()) throw std::logic_error("grad check: no parameters");
    grad_fn();  // populate analytic gradients
    std::vector<Mat> analytic;
    analytic.reserve(params.size());
    for (const Param* p : params) analytic.push_back(p->g);

    Rng rng(seed);
    GradCheckResult result;
    auto check_coord = [&](size_t pi, Eigen::Index idx) {
        Param& p = *params[pi];
        double* w = p.w.data() + idx;
        const double saved = *w;
        *w = saved + epsilon;
        const double lp = loss_fn();
        *w = saved - epsilon;
        const double lm = loss_fn();
        *w = saved;
        const double numeric = (lp - lm) / (2.0 * epsilon);
        const double a = *(analytic[pi].data() + idx);
        const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-12});
        const double rel = std::fabs(a - numeric) / denom;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst_param = p.name;
        }
        ++result.coords_checked;
    };

    // Every parameter group gets its share; then random top-up until the
    // total coordinate budget is met.
    const int per_param = std::max(
        1, (min_coords + static_cast<int>(params.size()) - 1) / static_cast<int>(params.size()));
    for (size_t pi = 0; pi < params.size(); ++pi) {
        const Eigen::Index n = params[pi]->w.size();
        if (n == 0) throw std::logic_error("grad check: empty parameter " + params[pi]->name);
        const int coords = static_cast<int>(std::min<Eigen::Index>(per_param, n));
        for (int c = 0; c < coords; ++c)
            check_coord(pi, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    }
    while (result.coords_checked < min_coords) {
        const size_t pi = static_cast<size_t>(rng.below(params.size()));
        const Eigen::Index n = params[pi]->w.size();
        check_coord(pi, static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
    }
    return result;
}

void save_history_csv(const TrainHistory& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write history file: " + path);
    out << "epoch,split,loss,accuracy\n";
    char buf[96];
    for (const HistoryRow& row : history) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%.17g\n", row.epoch, row.split.c_str(),
                      row.loss, row.accuracy);
        out << buf;
    }
}

}  // namespace empath::nn
