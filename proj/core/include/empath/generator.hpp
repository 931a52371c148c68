#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "empath/predictor.hpp"

namespace empath {

enum class DecodeMode { Greedy, TopK };
enum class ConditionMode { GroundTruth, Predicted, None };
// Where the condition label enters the decoder: as a pseudo-token prefixed
// to the visible sequence (default) or added to every token embedding.
enum class ConditionInjection { Prefix, Add };

struct GeneratorConfig {
    int d_model = 64;
    int n_enc_layers = 2;
    int n_dec_layers = 2;
    int n_heads = 2;
    int d_ff = 0;  // 0 -> 4 * d_model
    double dropout = 0.1;
    int max_tokens = kDefaultMaxTokens;
    int k = 4;
    int max_decode_len = 30;
    DecodeMode decode_mode = DecodeMode::Greedy;
    int top_k = 5;
    double temperature = 0.7;
    ConditionMode condition_mode = ConditionMode::GroundTruth;
    ConditionInjection condition_injection = ConditionInjection::Prefix;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.98;
    double adam_eps = 1e-6;
    int batch_size = 16;
    int epochs = 10;
    std::uint64_t seed = 42;

    int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
    bool conditioned() const { return condition_mode != ConditionMode::None; }
    void validate() const;
};

struct GenExample {
    EncodedContext ctx;          // encoded context turns
    std::vector<int> response_ids;  // gold response tokens (no BOS/EOS)
    LabelId gold_label = 0;
};

// Label-conditioned encoder-decoder. The encoder consumes the same input
// representation as the predictor; the decoder sees the condition label
// embedding (prefix pseudo-token or added per position) and cross-attends
// to the encoder states. Token embeddings are shared encoder/decoder.
class GeneratorModel {
public:
    static GeneratorModel init(const GeneratorConfig& cfg, int vocab_size, Rng& rng);

    struct Trace;
    struct StepLogProbs {
        nn::Mat log_probs;  // steps x vocab, teacher-forced
    };

    // Teacher-forced pass over BOS-prefixed, EOS-terminated targets.
    // Returns per-step log-probabilities of the whole vocab.
    StepLogProbs forward_teacher(const EncodedContext& ctx,
                                 std::span<const int> response_ids,
                                 std::optional<LabelId> condition, bool training = false,
                                 Rng* rng = nullptr, Trace* trace = nullptr) const;
    // Mean per-token cross-entropy of the gold continuation.
    double loss(const EncodedContext& ctx, std::span<const int> response_ids,
                std::optional<LabelId> condition, bool training = false, Rng* rng = nullptr,
                Trace* trace = nullptr) const;
    void backward(const Trace& trace, std::span<const int> response_ids);

    // Autoregressive decode until EOS or cfg.max_decode_len emitted tokens.
    std::vector<int> generate_ids(const EncodedContext& ctx,
                                  std::optional<LabelId> condition, Rng* rng = nullptr) const;
    std::string generate(const EncodedContext& ctx, std::optional<LabelId> condition,
                         const Vocab& vocab, Rng* rng = nullptr) const;

    std::vector<nn::Param*> params();
    nn::Param& condition_table() { return cond_emb_.table; }
    const GeneratorConfig& config() const { return cfg_; }
    int vocab_size() const { return vocab_size_; }

    void save(const std::string& path) const;
    static GeneratorModel load(const std::string& path);

private:
    GeneratorModel() = default;

    nn::Mat encode(const EncodedContext& ctx, bool training, Rng* rng, Trace* trace) const;
    // Decoder forward over an explicit input id sequence (BOS-prefixed).
    nn::Mat decode_logits(std::span<const int> dec_input_ids, const nn::Mat& memory,
                          std::optional<LabelId> condition, bool training, Rng* rng,
                          Trace* trace) const;

    GeneratorConfig cfg_;
    int vocab_size_ = 0;
    nn::Embedding tok_emb_;  // shared by encoder and decoder
    nn::Embedding enc_pos_emb_, label_emb_, seg_emb_;
    std::vector<nn::EncoderLayer> enc_layers_;
    nn::Embedding dec_pos_emb_;
    nn::Embedding cond_emb_;  // 41 x d
    std::vector<nn::DecoderLayer> dec_layers_;
    nn::Linear out_proj_;  // d -> vocab
};

struct GeneratorModel::Trace {
    EncodedContext ctx;
    nn::Embedding::Cache enc_tok_c, enc_pos_c, enc_label_c, enc_seg_c;
    nn::Mat enc_drop_mask;
    std::vector<nn::EncoderLayer::Cache> enc_layer_c;
    nn::Mat memory;

    std::vector<int> dec_input_ids;
    bool has_condition = false;
    LabelId condition = 0;
    nn::Embedding::Cache dec_tok_c, dec_pos_c;
    nn::Mat dec_drop_mask;
    std::vector<nn::DecoderLayer::Cache> dec_layer_c;
    nn::Linear::Cache out_c;
    nn::Mat step_probs;  // steps x vocab (softmax rows)
};

// One triple per listener turn with at least one preceding turn.
std::vector<GenExample> make_generation_dataset(const Corpus& corpus, const Vocab& vocab,
                                                const GeneratorConfig& cfg);

// Teacher-forced training with Adam; condition per cfg.condition_mode
// (ground-truth labels or none). Checkpoint selection by validation loss.
TrainResult train_generator(GeneratorModel& model, const std::vector<GenExample>& train,
                            const std::vector<GenExample>& val);

// exp(mean token-level NLL) under teacher forcing. `conditions[i]` overrides
// the gold label for example i (e.g. a predicted label); pass empty to use
// gold labels in conditioned mode. Unconditioned models ignore conditions.
double perplexity(const GeneratorModel& model, const std::vector<GenExample>& data,
                  std::span<const std::optional<LabelId>> conditions = {});

std::pair<double, double> evaluate_generator(const GeneratorModel& model,
                                             const std::vector<GenExample>& data);

nn::GradCheckResult grad_check(GeneratorModel& model, const GenExample& sample,
                               double epsilon = 1e-5, int min_coords = 200);

DecodeMode parse_decode_mode(const std::string& s);
ConditionMode parse_condition_mode(const std::string& s);
ConditionInjection parse_condition_injection(const std::string& s);

}  // namespace empath
