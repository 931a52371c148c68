#include "empath/predictor.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "empath/checkpoint.hpp"
#include "empath/error.hpp"

namespace empath {

using nn::Mat;
using nn::Vec;

void PredictorConfig::validate() const {
    if (d_model <= 0 || n_layers <= 0 || n_heads <= 0)
        throw InputError("config: dimensions must be positive");
    if (d_model % n_heads != 0) throw InputError("config: d_model must be divisible by n_heads");
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw InputError("config: learning rate must be in (0,1]");
    if (dropout < 0.0 || dropout >= 1.0) throw InputError("config: dropout must be in [0,1)");
    if (max_tokens <= 0) throw InputError("config: max_tokens must be positive");
    if (k < 1) throw InputError("config: k must be >= 1");
    if (batch_size <= 0) throw InputError("config: batch_size must be positive");
    if (epochs < 0) throw InputError("config: epochs must be >= 0");
}

EncodedContext encode_context(std::span<const Turn> turns, Role first_role,
                              const Vocab& vocab, int max_tokens,
                              std::span<const int> label_rows) {
    if (turns.empty()) throw InputError("encode_context: empty turn list");
    if (!label_rows.empty() && label_rows.size() != turns.size())
        throw InputError("encode_context: label_rows size mismatch");

    EncodedContext ec;
    for (size_t t = 0; t < turns.size(); ++t) {
        const int label_row = label_rows.empty() ? turns[t].label : label_rows[t];
        const int seg = (static_cast<int>(t) + (first_role == Role::Speaker ? 0 : 1)) % 2;
        if (t > 0) {  // separator carries the following turn's label/segment
            ec.token_ids.push_back(kEosId);
            ec.label_ids.push_back(label_row);
            ec.seg_ids.push_back(seg);
        }
        for (int id : encode(turns[t].text, vocab, 1 << 20)) {
            ec.token_ids.push_back(id);
            ec.label_ids.push_back(label_row);
            ec.seg_ids.push_back(seg);
        }
    }
    // Keep the most recent max_tokens elements.
    const size_t n = ec.token_ids.size();
    if (static_cast<int>(n) > max_tokens) {
        const size_t drop = n - static_cast<size_t>(max_tokens);
        ec.token_ids.erase(ec.token_ids.begin(), ec.token_ids.begin() + static_cast<long>(drop));
        ec.label_ids.erase(ec.label_ids.begin(), ec.label_ids.begin() + static_cast<long>(drop));
        ec.seg_ids.erase(ec.seg_ids.begin(), ec.seg_ids.begin() + static_cast<long>(drop));
    }
    ec.pos_ids.resize(ec.token_ids.size());
    std::iota(ec.pos_ids.begin(), ec.pos_ids.end(), 0);
    return ec;
}

PredictorModel PredictorModel::init(const PredictorConfig& cfg, int vocab_size, Rng& rng) {
    cfg.validate();
    if (vocab_size <= kNumReservedTokens) throw InputError("predictor: vocab too small");
    PredictorModel m;
    m.cfg_ = cfg;
    m.vocab_size_ = vocab_size;
    const double emb_std = 0.02;
    m.tok_emb_.init("tok_emb", vocab_size, cfg.d_model, emb_std, rng);
    m.pos_emb_.init("pos_emb", cfg.max_tokens, cfg.d_model, emb_std, rng);
    m.label_emb_.init("label_emb", kNumLabelRows, cfg.d_model, emb_std, rng);
    m.seg_emb_.init("seg_emb", 2, cfg.d_model, emb_std, rng);
    m.layers_.resize(static_cast<size_t>(cfg.n_layers));
    for (int l = 0; l < cfg.n_layers; ++l)
        m.layers_[static_cast<size_t>(l)].init("enc.l" + std::to_string(l), cfg.d_model,
                                               cfg.n_heads, cfg.ff_dim(), rng);
    m.pool_q_.init_normal("pool.q", cfg.d_model, 1, emb_std, rng);
    m.hidden_.init("head.hidden", cfg.d_model, cfg.d_model, rng);
    m.out_.init("head.out", cfg.d_model, kNumLabels, rng);
    return m;
}

std::vector<nn::Param*> PredictorModel::params() {
    std::vector<nn::Param*> out;
    tok_emb_.collect(out);
    pos_emb_.collect(out);
    label_emb_.collect(out);
    seg_emb_.collect(out);
    for (auto& layer : layers_) layer.collect(out);
    out.push_back(&pool_q_);
    hidden_.collect(out);
    out_.collect(out);
    return out;
}

Vec PredictorModel::forward(const EncodedContext& ctx, bool training, Rng* rng,
                            Trace* trace) const {
    if (ctx.token_ids.empty()) throw InputError("predictor forward: empty context");
    Trace local;
    Trace& t = trace ? *trace : local;
    t.ctx = ctx;

    Mat x = tok_emb_.forward(ctx.token_ids, &t.tok_c);
    x += pos_emb_.forward(ctx.pos_ids, &t.pos_c);
    x += label_emb_.forward(ctx.label_ids, &t.label_c);
    x += seg_emb_.forward(ctx.seg_ids, &t.seg_c);

    Rng* drop_rng = training ? rng : nullptr;
    const double p = training ? cfg_.dropout : 0.0;
    if (p > 0.0 && drop_rng) {
        nn::Mat mask = nn::dropout_mask(x.rows(), x.cols(), p, *drop_rng);
        x = x.cwiseProduct(mask);
        t.emb_drop_mask = std::move(mask);
    } else {
        t.emb_drop_mask.resize(0, 0);
    }

    t.layer_c.resize(layers_.size());
    for (size_t l = 0; l < layers_.size(); ++l)
        x = layers_[l].forward(x, p, drop_rng, &t.layer_c[l]);
    t.enc_out = x;

    // Learned-query attention pooling.
    Vec scores = x * pool_q_.w;
    const double mx = scores.maxCoeff();
    Vec alpha = (scores.array() - mx).exp().matrix();
    alpha /= alpha.sum();
    t.alpha = alpha;
    t.pooled = x.transpose() * alpha;

    Mat h_pre = hidden_.forward(t.pooled.transpose(), &t.hidden_c);
    t.hidden_pre = h_pre;
    Mat logits = out_.forward(nn::gelu(h_pre), &t.out_c);
    t.logits = logits.row(0).transpose();

    Vec log_p = nn::log_softmax(t.logits);
    t.probs = log_p.array().exp().matrix();
    return t.probs;
}

double PredictorModel::loss(const EncodedContext& ctx, LabelId gold, bool training,
                            Rng* rng, Trace* trace) const {
    Trace local;
    Trace& t = trace ? *trace : local;
    forward(ctx, training, rng, &t);
    const double p = t.probs(gold);
    return -std::log(std::max(p, 1e-300));
}

void PredictorModel::backward(const Trace& t, LabelId gold) {
    // d(CE)/d(logits) = probs - onehot(gold)
    Mat dlogits = t.probs.transpose();
    dlogits(0, gold) -= 1.0;

    Mat dh = out_.backward(t.out_c, dlogits);
    Mat dpooled_row = hidden_.backward(t.hidden_c, nn::gelu_backward(t.hidden_pre, dh));
    Vec dpooled = dpooled_row.row(0).transpose();

    // pooled = enc_out^T * alpha
    Vec dalpha = t.enc_out * dpooled;
    Mat dx = t.alpha * dpooled.transpose();  // T x d
    // softmax backward on the pooling scores
    const double dot = t.alpha.dot(dalpha);
    Vec dscores = t.alpha.cwiseProduct((dalpha.array() - dot).matrix());
    // scores = enc_out * pool_q
    pool_q_.g += t.enc_out.transpose() * dscores;
    dx += dscores * pool_q_.w.transpose();

    for (size_t l = layers_.size(); l-- > 0;)
        dx = layers_[l].backward(t.layer_c[l], dx);

    if (t.emb_drop_mask.size() != 0) dx = dx.cwiseProduct(t.emb_drop_mask);
    tok_emb_.backward(t.tok_c, dx);
    pos_emb_.backward(t.pos_c, dx);
    label_emb_.backward(t.label_c, dx);
    seg_emb_.backward(t.seg_c, dx);
}

LabelId PredictorModel::predict(const EncodedContext& ctx) const {
    Trace trace;
    forward(ctx, false, nullptr, &trace);
    LabelId best = 0;
    for (int i = 1; i < kNumLabels; ++i)
        if (trace.logits(i) > trace.logits(best)) best = i;  // strict > keeps the lowest id
    return best;
}

std::vector<PredictionExample> make_prediction_dataset(const Corpus& corpus,
                                                       const Vocab& vocab,
                                                       const PredictorConfig& cfg) {
    std::vector<PredictionExample> out;
    for (const Dialogue& d : corpus.dialogues) {
        for (size_t t = 1; t < d.turns.size(); t += 2) {  // 0-based odd = listener turns
            const size_t ctx_begin = t > static_cast<size_t>(cfg.k) ? t - static_cast<size_t>(cfg.k) : 0;
            std::span<const Turn> ctx_turns(d.turns.data() + ctx_begin, t - ctx_begin);
            PredictionExample ex;
            ex.ctx = encode_context(ctx_turns, role_of_turn(ctx_begin + 1), vocab,
                                    cfg.max_tokens);
            ex.gold = d.turns[t].label;
            out.push_back(std::move(ex));
        }
    }
    return out;
}

std::pair<double, double> evaluate_predictor(const PredictorModel& model,
                                             const std::vector<PredictionExample>& data) {
    if (data.empty()) return {0.0, 0.0};
    double loss_sum = 0.0;
    long correct = 0;
    for (const PredictionExample& ex : data) {
        PredictorModel::Trace trace;
        const Vec probs = model.forward(ex.ctx, false, nullptr, &trace);
        loss_sum += -std::log(std::max(probs(ex.gold), 1e-300));
        LabelId best = 0;
        for (int i = 1; i < kNumLabels; ++i)
            if (trace.logits(i) > trace.logits(best)) best = i;
        if (best == ex.gold) ++correct;
    }
    const double n = static_cast<double>(data.size());
    return {loss_sum / n, static_cast<double>(correct) / n};
}

TrainResult train_predictor(PredictorModel& model,
                            const std::vector<PredictionExample>& train,
                            const std::vector<PredictionExample>& val) {
    if (train.empty()) throw InputError("train: empty dataset");
    const PredictorConfig& cfg = model.config();
    auto params = model.params();
    nn::Adam adam(params, {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    Rng shuffle_rng(fork_seed(cfg.seed, "predictor.shuffle"));
    Rng dropout_rng(fork_seed(cfg.seed, "predictor.dropout"));

    TrainResult result;
    auto record_eval = [&](int epoch) {
        auto [tr_loss, tr_acc] = evaluate_predictor(model, train);
        result.history.push_back({epoch, "train", tr_loss, tr_acc});
        if (!val.empty()) {
            auto [v_loss, v_acc] = evaluate_predictor(model, val);
            result.history.push_back({epoch, "val", v_loss, v_acc});
            return v_loss;
        }
        return tr_loss;
    };

    double best_val = record_eval(0);
    result.best_epoch = 0;
    std::vector<Mat> best_params;
    auto snapshot = [&] {
        best_params.clear();
        for (nn::Param* p : params) best_params.push_back(p->w);
    };
    snapshot();

    std::vector<size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        long epoch_correct = 0;
        size_t i = 0;
        while (i < order.size()) {
            const size_t batch_end = std::min(order.size(), i + static_cast<size_t>(cfg.batch_size));
            const double batch_n = static_cast<double>(batch_end - i);
            nn::zero_grads(params);
            for (; i < batch_end; ++i) {
                const PredictionExample& ex = train[order[i]];
                PredictorModel::Trace trace;
                model.forward(ex.ctx, true, &dropout_rng, &trace);
                const double ex_loss = -std::log(std::max(trace.probs(ex.gold), 1e-300));
                if (!std::isfinite(ex_loss))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch));
                epoch_loss += ex_loss;
                LabelId best = 0;
                for (int c = 1; c < kNumLabels; ++c)
                    if (trace.logits(c) > trace.logits(best)) best = c;
                if (best == ex.gold) ++epoch_correct;
                model.backward(trace, ex.gold);
            }
            // Mean gradient over the batch.
            for (nn::Param* p : params) p->g /= batch_n;
            adam.step();
        }
        const double n = static_cast<double>(train.size());
        result.history.push_back({epoch, "train", epoch_loss / n,
                                  static_cast<double>(epoch_correct) / n});
        if (!val.empty()) {
            auto [v_loss, v_acc] = evaluate_predictor(model, val);
            result.history.push_back({epoch, "val", v_loss, v_acc});
            if (v_loss < best_val) {
                best_val = v_loss;
                result.best_epoch = epoch;
                snapshot();
            }
        }
    }

    if (!val.empty()) {  // restore the minimum-validation-loss checkpoint
        for (size_t i = 0; i < params.size(); ++i) params[i]->w = best_params[i];
    } else {
        result.best_epoch = cfg.epochs;
    }
    auto [fl, fa] = evaluate_predictor(model, train);
    result.final_train_loss = fl;
    result.final_train_accuracy = fa;
    return result;
}

nn::GradCheckResult grad_check(PredictorModel& model, const PredictionExample& sample,
                               double epsilon, int min_coords) {
    auto params = model.params();
    auto loss_fn = [&] { return model.loss(sample.ctx, sample.gold); };
    auto grad_fn = [&] {
        nn::zero_grads(params);
        PredictorModel::Trace trace;
        model.loss(sample.ctx, sample.gold, false, nullptr, &trace);
        model.backward(trace, sample.gold);
    };
    return nn::grad_check_params(params, loss_fn, grad_fn, epsilon, min_coords,
                                 fork_seed(model.config().seed, "predictor.gradcheck"));
}

namespace {

std::map<std::string, std::string> predictor_fields(const PredictorConfig& cfg,
                                                    int vocab_size) {
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    return {
        {"vocab_size", std::to_string(vocab_size)},
        {"d_model", std::to_string(cfg.d_model)},
        {"n_layers", std::to_string(cfg.n_layers)},
        {"n_heads", std::to_string(cfg.n_heads)},
        {"d_ff", std::to_string(cfg.d_ff)},
        {"dropout", fmt(cfg.dropout)},
        {"max_tokens", std::to_string(cfg.max_tokens)},
        {"k", std::to_string(cfg.k)},
        {"learning_rate", fmt(cfg.learning_rate)},
        {"adam_beta1", fmt(cfg.adam_beta1)},
        {"adam_beta2", fmt(cfg.adam_beta2)},
        {"adam_eps", fmt(cfg.adam_eps)},
        {"batch_size", std::to_string(cfg.batch_size)},
        {"epochs", std::to_string(cfg.epochs)},
        {"seed", std::to_string(cfg.seed)},
    };
}

PredictorConfig predictor_config_from(const CheckpointHeader& h) {
    PredictorConfig cfg;
    cfg.d_model = static_cast<int>(h.get_long("d_model"));
    cfg.n_layers = static_cast<int>(h.get_long("n_layers"));
    cfg.n_heads = static_cast<int>(h.get_long("n_heads"));
    cfg.d_ff = static_cast<int>(h.get_long("d_ff"));
    cfg.dropout = h.get_double("dropout");
    cfg.max_tokens = static_cast<int>(h.get_long("max_tokens"));
    cfg.k = static_cast<int>(h.get_long("k"));
    cfg.learning_rate = h.get_double("learning_rate");
    cfg.adam_beta1 = h.get_double("adam_beta1");
    cfg.adam_beta2 = h.get_double("adam_beta2");
    cfg.adam_eps = h.get_double("adam_eps");
    cfg.batch_size = static_cast<int>(h.get_long("batch_size"));
    cfg.epochs = static_cast<int>(h.get_long("epochs"));
    cfg.seed = static_cast<std::uint64_t>(h.get_long("seed"));
    return cfg;
}

}  // namespace

void PredictorModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    auto params = const_cast<PredictorModel*>(this)->params();
    write_checkpoint(out, "predictor", predictor_fields(cfg_, vocab_size_), params);
}

PredictorModel PredictorModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    CheckpointHeader header = read_checkpoint_header(in, path);
    if (header.model != "predictor")
        throw InputError(path + ": checkpoint is a '" + header.model + "', expected predictor");
    PredictorConfig cfg = predictor_config_from(header);
    Rng rng(fork_seed(cfg.seed, "predictor.init"));
    PredictorModel model = init(cfg, static_cast<int>(header.get_long("vocab_size")), rng);
    auto params = model.params();
    read_checkpoint_tensors(in, path, params);
    return model;
}

}  // namespace empath
