#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "empath/corpus.hpp"
#include "empath/nn.hpp"
#include "empath/tokenizer.hpp"

namespace empath {

// Per-token label rows for the predictor/generator input representation:
// rows 0..40 are the taxonomy labels; two extra rows cover live inference.
inline constexpr int kUnknownLabelRow = kNumLabels;        // unlabeled incoming turn
inline constexpr int kToPredictLabelRow = kNumLabels + 1;  // current listener slot
inline constexpr int kNumLabelRows = kNumLabels + 2;

struct PredictorConfig {
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 2;
    int d_ff = 0;  // 0 -> 4 * d_model
    double dropout = 0.1;
    int max_tokens = kDefaultMaxTokens;
    int k = 4;  // context turns
    double learning_rate = 1e-3;  // paper-scale 5e-5 stays available via config
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.98;
    double adam_eps = 1e-6;
    int batch_size = 16;
    int epochs = 10;
    std::uint64_t seed = 42;

    int ff_dim() const { return d_ff > 0 ? d_ff : 4 * d_model; }
    void validate() const;
};

// Aligned id sequences for the concatenated context turns: token, position,
// source-turn label and speaker/listener segment per token.
struct EncodedContext {
    std::vector<int> token_ids;
    std::vector<int> pos_ids;
    std::vector<int> label_ids;  // label ROW ids (may use the reserved rows)
    std::vector<int> seg_ids;    // 0 speaker, 1 listener
};

// Concatenates turns oldest -> newest with an EOS separator before each
// turn after the first; the separator carries the following turn's label
// and segment. Truncation keeps the most recent tokens; positions are
// assigned after truncation. `label_rows`, when non-empty, overrides the
// per-turn label rows (used for unlabeled turns at live inference).
EncodedContext encode_context(std::span<const Turn> turns, Role first_role,
                              const Vocab& vocab, int max_tokens,
                              std::span<const int> label_rows = {});

class PredictorModel {
public:
    static PredictorModel init(const PredictorConfig& cfg, int vocab_size, Rng& rng);

    struct Trace;
    // Probability vector over the 41 labels (sums to 1). Training mode
    // applies dropout from `rng`.
    nn::Vec forward(const EncodedContext& ctx, bool training = false, Rng* rng = nullptr,
                    Trace* trace = nullptr) const;
    // Cross-entropy of the gold label; fills grads via backward() on a trace.
    double loss(const EncodedContext& ctx, LabelId gold, bool training = false,
                Rng* rng = nullptr, Trace* trace = nullptr) const;
    void backward(const Trace& trace, LabelId gold);

    LabelId predict(const EncodedContext& ctx) const;  // argmax, ties -> lowest id

    std::vector<nn::Param*> params();
    const PredictorConfig& config() const { return cfg_; }
    int vocab_size() const { return vocab_size_; }

    void save(const std::string& path) const;
    static PredictorModel load(const std::string& path);

private:
    PredictorModel() = default;

    PredictorConfig cfg_;
    int vocab_size_ = 0;
    nn::Embedding tok_emb_, pos_emb_, label_emb_, seg_emb_;
    std::vector<nn::EncoderLayer> layers_;
    nn::Param pool_q_;  // d x 1 learned pooling query
    nn::Linear hidden_;
    nn::Linear out_;
};

struct PredictorModel::Trace {
    EncodedContext ctx;
    nn::Embedding::Cache tok_c, pos_c, label_c, seg_c;
    nn::Mat emb_drop_mask;
    std::vector<nn::EncoderLayer::Cache> layer_c;
    nn::Mat enc_out;
    nn::Vec alpha;    // pooling weights
    nn::Vec pooled;
    nn::Linear::Cache hidden_c;
    nn::Mat hidden_pre;
    nn::Linear::Cache out_c;
    nn::Vec logits;  // argmax ties are resolved on these, not on probs
    nn::Vec probs;
};

struct PredictionExample {
    EncodedContext ctx;
    LabelId gold = 0;
};

// One example per listener turn with at least one preceding turn; the
// context is the previous up-to-k turns.
std::vector<PredictionExample> make_prediction_dataset(const Corpus& corpus,
                                                       const Vocab& vocab,
                                                       const PredictorConfig& cfg);

struct TrainResult {
    nn::TrainHistory history;
    int best_epoch = 0;          // epoch with minimum validation loss
    double final_train_loss = 0.0;
    double final_train_accuracy = 0.0;
};

// Adam + cross-entropy; per-epoch shuffling from the config seed. When a
// validation set is given, the returned model is the minimum-val-loss
// checkpoint. History rows: epoch 0 is the pre-update evaluation.
TrainResult train_predictor(PredictorModel& model,
                            const std::vector<PredictionExample>& train,
                            const std::vector<PredictionExample>& val);

// Max relative error between analytic and central-difference gradients over
// >= min_coords coordinates spanning every parameter group. Dropout is
// disabled by contract (evaluation-mode forward).
nn::GradCheckResult grad_check(PredictorModel& model, const PredictionExample& sample,
                               double epsilon = 1e-5, int min_coords = 200);

// Mean loss / argmax accuracy without dropout.
std::pair<double, double> evaluate_predictor(const PredictorModel& model,
                                             const std::vector<PredictionExample>& data);

}  // namespace empath
