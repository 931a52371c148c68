#include "empath/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "empath/checkpoint.hpp"
#include "empath/error.hpp"

namespace empath {

using nn::Mat;
using nn::Vec;

void GeneratorConfig::validate() const {
    if (d_model <= 0 || n_enc_layers <= 0 || n_dec_layers <= 0 || n_heads <= 0)
        throw InputError("config: dimensions must be positive");
    if (d_model % n_heads != 0) throw InputError("config: d_model must be divisible by n_heads");
    if (learning_rate <= 0.0 || learning_rate > 1.0)
        throw InputError("config: learning rate must be in (0,1]");
    if (dropout < 0.0 || dropout >= 1.0) throw InputError("config: dropout must be in [0,1)");
    if (max_decode_len < 1) throw InputError("config: max_decode_len must be >= 1");
    if (top_k < 1) throw InputError("config: top_k must be >= 1");
    if (temperature <= 0.0) throw InputError("config: temperature must be positive");
    if (batch_size <= 0) throw InputError("config: batch_size must be positive");
    if (epochs < 0) throw InputError("config: epochs must be >= 0");
}

GeneratorModel GeneratorModel::init(const GeneratorConfig& cfg, int vocab_size, Rng& rng) {
    cfg.validate();
    if (vocab_size <= kNumReservedTokens) throw InputError("generator: vocab too small");
    GeneratorModel m;
    m.cfg_ = cfg;
    m.vocab_size_ = vocab_size;
    const double emb_std = 0.02;
    m.tok_emb_.init("tok_emb", vocab_size, cfg.d_model, emb_std, rng);
    m.enc_pos_emb_.init("enc_pos_emb", cfg.max_tokens, cfg.d_model, emb_std, rng);
    m.label_emb_.init("label_emb", kNumLabelRows, cfg.d_model, emb_std, rng);
    m.seg_emb_.init("seg_emb", 2, cfg.d_model, emb_std, rng);
    m.enc_layers_.resize(static_cast<size_t>(cfg.n_enc_layers));
    for (int l = 0; l < cfg.n_enc_layers; ++l)
        m.enc_layers_[static_cast<size_t>(l)].init("enc.l" + std::to_string(l), cfg.d_model,
                                                   cfg.n_heads, cfg.ff_dim(), rng);
    m.dec_pos_emb_.init("dec_pos_emb", cfg.max_decode_len + 2, cfg.d_model, emb_std, rng);
    m.cond_emb_.init("cond_emb", kNumLabels, cfg.d_model, emb_std, rng);
    m.dec_layers_.resize(static_cast<size_t>(cfg.n_dec_layers));
    for (int l = 0; l < cfg.n_dec_layers; ++l)
        m.dec_layers_[static_cast<size_t>(l)].init("dec.l" + std::to_string(l), cfg.d_model,
                                                   cfg.n_heads, cfg.ff_dim(), rng);
    m.out_proj_.init("out_proj", cfg.d_model, vocab_size, rng);
    return m;
}

std::vector<nn::Param*> GeneratorModel::params() {
    std::vector<nn::Param*> out;
    tok_emb_.collect(out);  // shared by encoder and decoder; registered once
    enc_pos_emb_.collect(out);
    label_emb_.collect(out);
    seg_emb_.collect(out);
    for (auto& layer : enc_layers_) layer.collect(out);
    dec_pos_emb_.collect(out);
    cond_emb_.collect(out);
    for (auto& layer : dec_layers_) layer.collect(out);
    out_proj_.collect(out);
    return out;
}

Mat GeneratorModel::encode(const EncodedContext& ctx, bool training, Rng* rng,
                           Trace* trace) const {
    if (ctx.token_ids.empty()) throw InputError("generator encode: empty context");
    Trace& t = *trace;
    t.ctx = ctx;
    Mat x = tok_emb_.forward(ctx.token_ids, &t.enc_tok_c);
    x += enc_pos_emb_.forward(ctx.pos_ids, &t.enc_pos_c);
    x += label_emb_.forward(ctx.label_ids, &t.enc_label_c);
    x += seg_emb_.forward(ctx.seg_ids, &t.enc_seg_c);

    Rng* drop_rng = training ? rng : nullptr;
    const double p = training ? cfg_.dropout : 0.0;
    if (p > 0.0 && drop_rng) {
        Mat mask = nn::dropout_mask(x.rows(), x.cols(), p, *drop_rng);
        x = x.cwiseProduct(mask);
        t.enc_drop_mask = std::move(mask);
    } else {
        t.enc_drop_mask.resize(0, 0);
    }
    t.enc_layer_c.resize(enc_layers_.size());
    for (size_t l = 0; l < enc_layers_.size(); ++l)
        x = enc_layers_[l].forward(x, p, drop_rng, &t.enc_layer_c[l]);
    t.memory = x;
    return x;
}

Mat GeneratorModel::decode_logits(std::span<const int> dec_input_ids, const Mat& memory,
                                  std::optional<LabelId> condition, bool training, Rng* rng,
                                  Trace* trace) const {
    Trace& t = *trace;
    const bool use_cond = cfg_.conditioned();
    if (use_cond && !condition)
        throw InputError("generator: condition label required in conditioned mode");
    t.dec_input_ids.assign(dec_input_ids.begin(), dec_input_ids.end());
    t.has_condition = use_cond;
    if (use_cond) t.condition = *condition;

    const bool prefix = use_cond && cfg_.condition_injection == ConditionInjection::Prefix;
    const Eigen::Index n_tokens = static_cast<Eigen::Index>(dec_input_ids.size());
    const Eigen::Index stream_len = n_tokens + (prefix ? 1 : 0);
    if (stream_len > dec_pos_emb_.table.w.rows())
        throw InputError("generator: decoder sequence exceeds max_decode_len");

    std::vector<int> pos_ids(static_cast<size_t>(stream_len));
    std::iota(pos_ids.begin(), pos_ids.end(), 0);

    Mat tok = tok_emb_.forward(dec_input_ids, &t.dec_tok_c);
    Mat x(stream_len, cfg_.d_model);
    if (prefix) {
        x.row(0) = cond_emb_.table.w.row(*condition);
        x.bottomRows(n_tokens) = tok;
    } else {
        x = tok;
    }
    x += dec_pos_emb_.forward(pos_ids, &t.dec_pos_c);
    if (use_cond && cfg_.condition_injection == ConditionInjection::Add)
        x.rowwise() += cond_emb_.table.w.row(*condition);

    Rng* drop_rng = training ? rng : nullptr;
    const double p = training ? cfg_.dropout : 0.0;
    if (p > 0.0 && drop_rng) {
        Mat mask = nn::dropout_mask(x.rows(), x.cols(), p, *drop_rng);
        x = x.cwiseProduct(mask);
        t.dec_drop_mask = std::move(mask);
    } else {
        t.dec_drop_mask.resize(0, 0);
    }

    t.dec_layer_c.resize(dec_layers_.size());
    for (size_t l = 0; l < dec_layers_.size(); ++l)
        x = dec_layers_[l].forward(x, memory, p, drop_rng, &t.dec_layer_c[l]);
    Mat logits = out_proj_.forward(x, &t.out_c);
    if (prefix) return logits.bottomRows(n_tokens);  // drop the pseudo-token's output
    return logits;
}

GeneratorModel::StepLogProbs GeneratorModel::forward_teacher(
    const EncodedContext& ctx, std::span<const int> response_ids,
    std::optional<LabelId> condition, bool training, Rng* rng, Trace* trace) const {
    Trace local;
    Trace& t = trace ? *trace : local;
    const Mat memory = encode(ctx, training, rng, &t);

    std::vector<int> dec_input;
    dec_input.reserve(response_ids.size() + 1);
    dec_input.push_back(kBosId);
    dec_input.insert(dec_input.end(), response_ids.begin(), response_ids.end());

    Mat logits = decode_logits(dec_input, memory, condition, training, rng, &t);
    StepLogProbs out;
    out.log_probs.resize(logits.rows(), logits.cols());
    t.step_probs.resize(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Vec lp = nn::log_softmax(logits.row(i).transpose());
        out.log_probs.row(i) = lp.transpose();
        t.step_probs.row(i) = lp.array().exp().matrix().transpose();
    }
    return out;
}

double GeneratorModel::loss(const EncodedContext& ctx, std::span<const int> response_ids,
                            std::optional<LabelId> condition, bool training, Rng* rng,
                            Trace* trace) const {
    StepLogProbs lp = forward_teacher(ctx, response_ids, condition, training, rng, trace);
    double nll = 0.0;
    const Eigen::Index steps = lp.log_probs.rows();
    for (Eigen::Index s = 0; s < steps; ++s) {
        const int target = s + 1 <= static_cast<Eigen::Index>(response_ids.size())
                               ? response_ids[static_cast<size_t>(s)]
                               : kEosId;
        nll -= lp.log_probs(s, target);
    }
    return nll / static_cast<double>(steps);
}

void GeneratorModel::backward(const Trace& t, std::span<const int> response_ids) {
    const Eigen::Index steps = t.step_probs.rows();
    const double scale = 1.0 / static_cast<double>(steps);
    Mat dlogits_steps = t.step_probs * scale;
    for (Eigen::Index s = 0; s < steps; ++s) {
        const int target = s + 1 <= static_cast<Eigen::Index>(response_ids.size())
                               ? response_ids[static_cast<size_t>(s)]
                               : kEosId;
        dlogits_steps(s, target) -= scale;
    }

    const bool prefix = t.has_condition && cfg_.condition_injection == ConditionInjection::Prefix;
    Mat dlogits;
    if (prefix) {
        dlogits = Mat::Zero(steps + 1, dlogits_steps.cols());
        dlogits.bottomRows(steps) = dlogits_steps;
    } else {
        dlogits = dlogits_steps;
    }

    Mat dx = out_proj_.backward(t.out_c, dlogits);
    Mat dmemory = Mat::Zero(t.memory.rows(), t.memory.cols());
    for (size_t l = dec_layers_.size(); l-- > 0;)
        dx = dec_layers_[l].backward(t.dec_layer_c[l], dx, &dmemory);
    if (t.dec_drop_mask.size() != 0) dx = dx.cwiseProduct(t.dec_drop_mask);

    if (t.has_condition && cfg_.condition_injection == ConditionInjection::Add)
        cond_emb_.table.g.row(t.condition) += dx.colwise().sum();
    dec_pos_emb_.backward(t.dec_pos_c, dx);
    if (prefix) {
        cond_emb_.table.g.row(t.condition) += dx.row(0);
        tok_emb_.backward(t.dec_tok_c, dx.bottomRows(dx.rows() - 1));
    } else {
        tok_emb_.backward(t.dec_tok_c, dx);
    }

    // Encoder backward from the accumulated memory gradient.
    Mat denc = dmemory;
    for (size_t l = enc_layers_.size(); l-- > 0;)
        denc = enc_layers_[l].backward(t.enc_layer_c[l], denc);
    if (t.enc_drop_mask.size() != 0) denc = denc.cwiseProduct(t.enc_drop_mask);
    tok_emb_.backward(t.enc_tok_c, denc);
    enc_pos_emb_.backward(t.enc_pos_c, denc);
    label_emb_.backward(t.enc_label_c, denc);
    seg_emb_.backward(t.enc_seg_c, denc);
}

namespace {

int argmax_lowest_id(const Vec& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i)
        if (v(i) > v(best)) best = i;
    return best;
}

}  // namespace

std::vector<int> GeneratorModel::generate_ids(const EncodedContext& ctx,
                                              std::optional<LabelId> condition,
                                              Rng* rng) const {
    if (cfg_.decode_mode == DecodeMode::TopK && rng == nullptr)
        throw InputError("generator: top-k decoding needs a random source");
    Trace trace;
    const Mat memory = encode(ctx, false, nullptr, &trace);

    std::vector<int> generated;
    std::vector<int> dec_input{kBosId};
    while (static_cast<int>(generated.size()) < cfg_.max_decode_len) {
        Mat logits = decode_logits(dec_input, memory, condition, false, nullptr, &trace);
        Vec last = logits.row(logits.rows() - 1).transpose();
        int next;
        if (cfg_.decode_mode == DecodeMode::Greedy) {
            next = argmax_lowest_id(last);
        } else {
            // Top-k by (logit desc, id asc), softmax at cfg temperature.
            std::vector<int> idx(static_cast<size_t>(last.size()));
            std::iota(idx.begin(), idx.end(), 0);
            const size_t kk = std::min<size_t>(static_cast<size_t>(cfg_.top_k), idx.size());
            std::partial_sort(idx.begin(), idx.begin() + static_cast<long>(kk), idx.end(),
                              [&](int a, int b) {
                                  if (last(a) != last(b)) return last(a) > last(b);
                                  return a < b;
                              });
            Vec scaled(static_cast<Eigen::Index>(kk));
            for (size_t i = 0; i < kk; ++i) scaled(static_cast<Eigen::Index>(i)) = last(idx[i]) / cfg_.temperature;
            Vec lp = nn::log_softmax(scaled);
            const double u = rng->uniform();
            double acc = 0.0;
            next = idx[kk - 1];
            for (size_t i = 0; i < kk; ++i) {
                acc += std::exp(lp(static_cast<Eigen::Index>(i)));
                if (u < acc) {
                    next = idx[i];
                    break;
                }
            }
        }
        generated.push_back(next);
        if (next == kEosId) break;
        dec_input.push_back(next);
    }
    if (!generated.empty() && generated.back() == kEosId) generated.pop_back();
    return generated;
}

std::string GeneratorModel::generate(const EncodedContext& ctx,
                                     std::optional<LabelId> condition, const Vocab& vocab,
                                     Rng* rng) const {
    return decode(generate_ids(ctx, condition, rng), vocab);
}

std::vector<GenExample> make_generation_dataset(const Corpus& corpus, const Vocab& vocab,
                                                const GeneratorConfig& cfg) {
    std::vector<GenExample> out;
    for (const Dialogue& d : corpus.dialogues) {
        for (size_t t = 1; t < d.turns.size(); t += 2) {  // 0-based odd = listener turns
            const size_t ctx_begin = t > static_cast<size_t>(cfg.k) ? t - static_cast<size_t>(cfg.k) : 0;
            std::span<const Turn> ctx_turns(d.turns.data() + ctx_begin, t - ctx_begin);
            GenExample ex;
            ex.ctx = encode_context(ctx_turns, role_of_turn(ctx_begin + 1), vocab,
                                    cfg.max_tokens);
            ex.response_ids = encode(d.turns[t].text, vocab, cfg.max_decode_len - 1);
            if (ex.response_ids.empty()) continue;
            ex.gold_label = d.turns[t].label;
            out.push_back(std::move(ex));
        }
    }
    return out;
}

namespace {

std::optional<LabelId> condition_for(const GeneratorModel& model, const GenExample& ex,
                                     const std::optional<LabelId>* override_cond) {
    if (!model.config().conditioned()) return std::nullopt;
    if (override_cond) return *override_cond;
    return ex.gold_label;
}

}  // namespace

std::pair<double, double> evaluate_generator(const GeneratorModel& model,
                                             const std::vector<GenExample>& data) {
    if (data.empty()) return {0.0, 0.0};
    double loss_sum = 0.0;
    long correct = 0, total = 0;
    for (const GenExample& ex : data) {
        auto lp = model.forward_teacher(ex.ctx, ex.response_ids, condition_for(model, ex, nullptr));
        const Eigen::Index steps = lp.log_probs.rows();
        double nll = 0.0;
        for (Eigen::Index s = 0; s < steps; ++s) {
            const int target = s + 1 <= static_cast<Eigen::Index>(ex.response_ids.size())
                                   ? ex.response_ids[static_cast<size_t>(s)]
                                   : kEosId;
            nll -= lp.log_probs(s, target);
            if (argmax_lowest_id(lp.log_probs.row(s).transpose()) == target) ++correct;
            ++total;
        }
        loss_sum += nll / static_cast<double>(steps);
    }
    return {loss_sum / static_cast<double>(data.size()),
            total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0};
}

TrainResult train_generator(GeneratorModel& model, const std::vector<GenExample>& train,
                            const std::vector<GenExample>& val) {
    if (train.empty()) throw InputError("train: empty dataset");
    const GeneratorConfig& cfg = model.config();
    if (cfg.condition_mode == ConditionMode::Predicted)
        throw InputError("train: condition mode must be ground_truth or none");
    auto params = model.params();
    nn::Adam adam(params, {cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
    Rng shuffle_rng(fork_seed(cfg.seed, "generator.shuffle"));
    Rng dropout_rng(fork_seed(cfg.seed, "generator.dropout"));

    TrainResult result;
    auto eval_and_record = [&](int epoch) {
        auto [tr_loss, tr_acc] = evaluate_generator(model, train);
        result.history.push_back({epoch, "train", tr_loss, tr_acc});
        if (!val.empty()) {
            auto [v_loss, v_acc] = evaluate_generator(model, val);
            result.history.push_back({epoch, "val", v_loss, v_acc});
            return v_loss;
        }
        return tr_loss;
    };

    double best_val = eval_and_record(0);
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
        size_t i = 0;
        while (i < order.size()) {
            const size_t batch_end = std::min(order.size(), i + static_cast<size_t>(cfg.batch_size));
            const double batch_n = static_cast<double>(batch_end - i);
            nn::zero_grads(params);
            for (; i < batch_end; ++i) {
                const GenExample& ex = train[order[i]];
                GeneratorModel::Trace trace;
                const double ex_loss =
                    model.loss(ex.ctx, ex.response_ids, condition_for(model, ex, nullptr), true,
                               &dropout_rng, &trace);
                if (!std::isfinite(ex_loss))
                    throw std::runtime_error("train: non-finite loss at epoch " +
                                             std::to_string(epoch));
                epoch_loss += ex_loss;
                model.backward(trace, ex.response_ids);
            }
            for (nn::Param* p : params) p->g /= batch_n;
            adam.step();
        }
        result.history.push_back({epoch, "train", epoch_loss / static_cast<double>(train.size()),
                                  0.0});
        if (!val.empty()) {
            auto [v_loss, v_acc] = evaluate_generator(model, val);
            result.history.push_back({epoch, "val", v_loss, v_acc});
            if (v_loss < best_val) {
                best_val = v_loss;
                result.best_epoch = epoch;
                snapshot();
            }
        }
    }

    if (!val.empty()) {
        for (size_t i = 0; i < params.size(); ++i) params[i]->w = best_params[i];
    } else {
        result.best_epoch = cfg.epochs;
    }
    auto [fl, fa] = evaluate_generator(model, train);
    result.final_train_loss = fl;
    result.final_train_accuracy = fa;
    return result;
}

double perplexity(const GeneratorModel& model, const std::vector<GenExample>& data,
                  std::span<const std::optional<LabelId>> conditions) {
    if (data.empty()) throw InputError("perplexity: empty dataset");
    if (!conditions.empty() && conditions.size() != data.size())
        throw InputError("perplexity: conditions size mismatch");
    double nll = 0.0;
    long tokens = 0;
    for (size_t i = 0; i < data.size(); ++i) {
        const GenExample& ex = data[i];
        const std::optional<LabelId>* ov = conditions.empty() ? nullptr : &conditions[i];
        auto lp = model.forward_teacher(ex.ctx, ex.response_ids, condition_for(model, ex, ov));
        const Eigen::Index steps = lp.log_probs.rows();
        for (Eigen::Index s = 0; s < steps; ++s) {
            const int target = s + 1 <= static_cast<Eigen::Index>(ex.response_ids.size())
                                   ? ex.response_ids[static_cast<size_t>(s)]
                                   : kEosId;
            nll -= lp.log_probs(s, target);
            ++tokens;
        }
    }
    return std::exp(nll / static_cast<double>(tokens));
}

nn::GradCheckResult grad_check(GeneratorModel& model, const GenExample& sample,
                               double epsilon, int min_coords) {
    auto params = model.params();
    const auto cond = model.config().conditioned()
                          ? std::optional<LabelId>(sample.gold_label)
                          : std::nullopt;
    auto loss_fn = [&] { return model.loss(sample.ctx, sample.response_ids, cond); };
    auto grad_fn = [&] {
        nn::zero_grads(params);
        GeneratorModel::Trace trace;
        model.loss(sample.ctx, sample.response_ids, cond, false, nullptr, &trace);
        model.backward(trace, sample.response_ids);
    };
    return nn::grad_check_params(params, loss_fn, grad_fn, epsilon, min_coords,
                                 fork_seed(model.config().seed, "generator.gradcheck"));
}

namespace {

const char* decode_mode_name(DecodeMode m) {
    return m == DecodeMode::Greedy ? "greedy" : "top_k";
}
const char* condition_mode_name(ConditionMode m) {
    switch (m) {
        case ConditionMode::GroundTruth: return "ground_truth";
        case ConditionMode::Predicted: return "predicted";
        case ConditionMode::None: return "none";
    }
    return "ground_truth";
}
const char* injection_name(ConditionInjection m) {
    return m == ConditionInjection::Prefix ? "prefix" : "add";
}

}  // namespace

DecodeMode parse_decode_mode(const std::string& s) {
    if (s == "greedy") return DecodeMode::Greedy;
    if (s == "top_k") return DecodeMode::TopK;
    throw InputError("unknown decode mode: '" + s + "'");
}

ConditionMode parse_condition_mode(const std::string& s) {
    if (s == "ground_truth" || s == "gt") return ConditionMode::GroundTruth;
    if (s == "predicted") return ConditionMode::Predicted;
    if (s == "none") return ConditionMode::None;
    throw InputError("unknown condition mode: '" + s + "'");
}

ConditionInjection parse_condition_injection(const std::string& s) {
    if (s == "prefix") return ConditionInjection::Prefix;
    if (s == "add") return ConditionInjection::Add;
    throw InputError("unknown condition injection: '" + s + "'");
}

void GeneratorModel::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    char buf[40];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::map<std::string, std::string> fields = {
        {"vocab_size", std::to_string(vocab_size_)},
        {"d_model", std::to_string(cfg_.d_model)},
        {"n_enc_layers", std::to_string(cfg_.n_enc_layers)},
        {"n_dec_layers", std::to_string(cfg_.n_dec_layers)},
        {"n_heads", std::to_string(cfg_.n_heads)},
        {"d_ff", std::to_string(cfg_.d_ff)},
        {"dropout", fmt(cfg_.dropout)},
        {"max_tokens", std::to_string(cfg_.max_tokens)},
        {"k", std::to_string(cfg_.k)},
        {"max_decode_len", std::to_string(cfg_.max_decode_len)},
        {"decode_mode", decode_mode_name(cfg_.decode_mode)},
        {"top_k", std::to_string(cfg_.top_k)},
        {"temperature", fmt(cfg_.temperature)},
        {"condition_mode", condition_mode_name(cfg_.condition_mode)},
        {"condition_injection", injection_name(cfg_.condition_injection)},
        {"learning_rate", fmt(cfg_.learning_rate)},
        {"adam_beta1", fmt(cfg_.adam_beta1)},
        {"adam_beta2", fmt(cfg_.adam_beta2)},
        {"adam_eps", fmt(cfg_.adam_eps)},
        {"batch_size", std::to_string(cfg_.batch_size)},
        {"epochs", std::to_string(cfg_.epochs)},
        {"seed", std::to_string(cfg_.seed)},
    };
    auto params = const_cast<GeneratorModel*>(this)->params();
    write_checkpoint(out, "generator", fields, params);
}

GeneratorModel GeneratorModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    CheckpointHeader h = read_checkpoint_header(in, path);
    if (h.model != "generator")
        throw InputError(path + ": checkpoint is a '" + h.model + "', expected generator");
    GeneratorConfig cfg;
    cfg.d_model = static_cast<int>(h.get_long("d_model"));
    cfg.n_enc_layers = static_cast<int>(h.get_long("n_enc_layers"));
    cfg.n_dec_layers = static_cast<int>(h.get_long("n_dec_layers"));
    cfg.n_heads = static_cast<int>(h.get_long("n_heads"));
    cfg.d_ff = static_cast<int>(h.get_long("d_ff"));
    cfg.dropout = h.get_double("dropout");
    cfg.max_tokens = static_cast<int>(h.get_long("max_tokens"));
    cfg.k = static_cast<int>(h.get_long("k"));
    cfg.max_decode_len = static_cast<int>(h.get_long("max_decode_len"));
    cfg.decode_mode = parse_decode_mode(h.get("decode_mode"));
    cfg.top_k = static_cast<int>(h.get_long("top_k"));
    cfg.temperature = h.get_double("temperature");
    cfg.condition_mode = parse_condition_mode(h.get("condition_mode"));
    cfg.condition_injection = parse_condition_injection(h.get("condition_injection"));
    cfg.learning_rate = h.get_double("learning_rate");
    cfg.adam_beta1 = h.get_double("adam_beta1");
    cfg.adam_beta2 = h.get_double("adam_beta2");
    cfg.adam_eps = h.get_double("adam_eps");
    cfg.batch_size = static_cast<int>(h.get_long("batch_size"));
    cfg.epochs = static_cast<int>(h.get_long("epochs"));
    cfg.seed = static_cast<std::uint64_t>(h.get_long("seed"));

    Rng rng(fork_seed(cfg.seed, "generator.init"));
    GeneratorModel model = init(cfg, static_cast<int>(h.get_long("vocab_size")), rng);
    auto params = model.params();
    read_checkpoint_tensors(in, path, params);
    return model;
}

}  // namespace empath
