#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "empath/nn.hpp"
#include "oracles.hpp"

using namespace empath;
using nn::Mat;
using nn::Vec;

namespace {

Mat random_mat(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal(0.0, 0.5);
    return m;
}

// Scalar loss for layer-level checks: weighted sum of outputs, which makes
// dL/dy the weight matrix itself.
double weighted_sum(const Mat& y, const Mat& w) { return y.cwiseProduct(w).sum(); }

}  // namespace

TEST_CASE("softmax rows sum to one and are stable under shift") {
    Rng rng(1);
    Mat x = random_mat(5, 7, rng);
    Mat y = nn::softmax_rows(x);
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        CHECK(std::fabs(y.row(i).sum() - 1.0) < 1e-12);
        for (Eigen::Index j = 0; j < y.cols(); ++j) CHECK(y(i, j) > 0.0);
    }
    Mat shifted = x;
    shifted.array() += 1000.0;
    CHECK((nn::softmax_rows(shifted) - y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("log_softmax agrees with the naive cross-entropy oracle") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(40));
        std::vector<double> logits(static_cast<size_t>(n));
        Vec v(n);
        for (int i = 0; i < n; ++i) {
            logits[static_cast<size_t>(i)] = rng.normal(0.0, 3.0);
            v(i) = logits[static_cast<size_t>(i)];
        }
        const int gold = static_cast<int>(rng.below(static_cast<uint64_t>(n)));
        const double ce = -nn::log_softmax(v)(gold);
        CHECK(std::fabs(ce - oracles::brute_cross_entropy(logits, gold)) < 1e-10);
    }
}

TEST_CASE("linear layer gradients pass central differences") {
    Rng rng(3);
    nn::Linear lin;
    lin.init("lin", 6, 4, rng);
    Mat x = random_mat(5, 6, rng);
    Mat w = random_mat(5, 4, rng);

    std::vector<nn::Param*> params;
    lin.collect(params);
    nn::Linear::Cache cache;
    auto loss = [&] { return weighted_sum(lin.forward(x, nullptr), w); };
    auto grads = [&] {
        nn::zero_grads(params);
        lin.forward(x, &cache);
        lin.backward(cache, w);
    };
    auto r = nn::grad_check_params(params, loss, grads, 1e-6, 50, 11);
    CHECK(r.max_rel_error < 1e-7);
}

TEST_CASE("layer norm gradients pass central differences") {
    Rng rng(4);
    nn::LayerNorm ln;
    ln.init("ln", 8);
    // Give gain/bias non-trivial values.
    for (Eigen::Index i = 0; i < 8; ++i) {
        ln.gain.w(0, i) = 0.5 + 0.1 * static_cast<double>(i);
        ln.bias.w(0, i) = 0.05 * static_cast<double>(i);
    }
    Mat x = random_mat(4, 8, rng);
    Mat w = random_mat(4, 8, rng);

    std::vector<nn::Param*> params;
    ln.collect(params);
    nn::LayerNorm::Cache cache;
    auto loss = [&] { return weighted_sum(ln.forward(x, nullptr), w); };
    auto grads = [&] {
        nn::zero_grads(params);
        ln.forward(x, &cache);
        ln.backward(cache, w);
    };
    auto r = nn::grad_check_params(params, loss, grads, 1e-6, 32, 12);
    CHECK(r.max_rel_error < 1e-7);

    // Input gradient via a wrapper parameter.
    nn::Param xp;
    xp.init_zero("x", 4, 8);
    xp.w = x;
    std::vector<nn::Param*> xparam{&xp};
    auto loss_x = [&] { return weighted_sum(ln.forward(xp.w, nullptr), w); };
    auto grads_x = [&] {
        nn::zero_grads(std::span<nn::Param* const>(xparam));
        nn::LayerNorm::Cache c2;
        ln.forward(xp.w, &c2);
        xp.g = ln.backward(c2, w);
    };
    auto rx = nn::grad_check_params(xparam, loss_x, grads_x, 1e-6, 32, 13);
    CHECK(rx.max_rel_error < 1e-7);
}

TEST_CASE("encoder layer end-to-end gradient check") {
    Rng rng(5);
    nn::EncoderLayer layer;
    layer.init("enc", 8, 2, 16, rng);
    Mat x = random_mat(6, 8, rng);
    Mat w = random_mat(6, 8, rng);

    std::vector<nn::Param*> params;
    layer.collect(params);
    nn::EncoderLayer::Cache cache;
    auto loss = [&] { return weighted_sum(layer.forward(x, 0.0, nullptr, nullptr), w); };
    auto grads = [&] {
        nn::zero_grads(params);
        layer.forward(x, 0.0, nullptr, &cache);
        layer.backward(cache, w);
    };
    auto r = nn::grad_check_params(params, loss, grads, 1e-5, 120, 14);
    CHECK(r.max_rel_error < 1e-5);
}

TEST_CASE("decoder layer gradient check including memory path") {
    Rng rng(6);
    nn::DecoderLayer layer;
    layer.init("dec", 8, 2, 16, rng);
    Mat x = random_mat(5, 8, rng);
    Mat mem = random_mat(7, 8, rng);
    Mat w = random_mat(5, 8, rng);

    std::vector<nn::Param*> params;
    layer.collect(params);
    nn::DecoderLayer::Cache cache;
    auto loss = [&] { return weighted_sum(layer.forward(x, mem, 0.0, nullptr, nullptr), w); };
    auto grads = [&] {
        nn::zero_grads(params);
        layer.forward(x, mem, 0.0, nullptr, &cache);
        Mat dmem = Mat::Zero(mem.rows(), mem.cols());
        layer.backward(cache, w, &dmem);
    };
    auto r = nn::grad_check_params(params, loss, grads, 1e-5, 150, 15);
    CHECK(r.max_rel_error < 1e-5);

    // Memory gradient check through a wrapper parameter.
    nn::Param mp;
    mp.init_zero("mem", 7, 8);
    mp.w = mem;
    std::vector<nn::Param*> mparam{&mp};
    auto loss_m = [&] { return weighted_sum(layer.forward(x, mp.w, 0.0, nullptr, nullptr), w); };
    auto grads_m = [&] {
        nn::zero_grads(std::span<nn::Param* const>(mparam));
        nn::DecoderLayer::Cache c2;
        layer.forward(x, mp.w, 0.0, nullptr, &c2);
        Mat dmem = Mat::Zero(7, 8);
        layer.backward(c2, w, &dmem);
        mp.g = dmem;
    };
    auto rm = nn::grad_check_params(mparam, loss_m, grads_m, 1e-5, 56, 16);
    CHECK(rm.max_rel_error < 1e-5);
}

TEST_CASE("causal attention masks the future") {
    Rng rng(7);
    nn::MultiHeadAttention attn;
    attn.init("attn", 8, 2, rng);
    Mat x = random_mat(6, 8, rng);

    nn::MultiHeadAttention::Cache cache;
    Mat y1 = attn.forward(x, x, true, 0.0, nullptr, &cache);
    // Changing a later position must not affect earlier outputs.
    Mat x2 = x;
    x2.row(5).array() += 10.0;
    Mat y2 = attn.forward(x2, x2, true, 0.0, nullptr, nullptr);
    CHECK((y1.topRows(5) - y2.topRows(5)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((y1.row(5) - y2.row(5)).cwiseAbs().maxCoeff() > 1e-6);

    // Attention weights are lower-triangular.
    for (const Mat& A : cache.attn)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = i + 1; j < A.cols(); ++j) CHECK(A(i, j) == 0.0);
}

TEST_CASE("dropout mask scales kept entries and zeroes the rest") {
    Rng rng(8);
    Mat mask = nn::dropout_mask(200, 50, 0.1, rng);
    long zeros = 0;
    for (Eigen::Index i = 0; i < mask.rows(); ++i)
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            if (mask(i, j) == 0.0)
                zeros++;
            else
                CHECK(mask(i, j) == doctest::Approx(1.0 / 0.9));
        }
    const double rate = static_cast<double>(zeros) / static_cast<double>(mask.size());
    CHECK(rate > 0.08);
    CHECK(rate < 0.12);
}

TEST_CASE("adam converges on a quadratic") {
    nn::Param p;
    p.init_zero("p", 3, 1);
    p.w << 5.0, -3.0, 2.0;
    std::vector<nn::Param*> params{&p};
    nn::Adam adam(params, {0.05, 0.9, 0.98, 1e-6});
    for (int step = 0; step < 500; ++step) {
        p.g = p.w;  // d/dw of 0.5*||w||^2
        adam.step();
    }
    CHECK(p.w.cwiseAbs().maxCoeff() < 1e-3);
}
