#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "empath/labels.hpp"
#include "empath/pipeline.hpp"

namespace empath {

using TokenSeq = std::vector<std::string>;

struct PredictionEval {
    std::array<double, kNumLabels> precision{};
    std::array<double, kNumLabels> recall{};
    std::array<double, kNumLabels> f1{};
    std::array<long, kNumLabels> support{};
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double balanced_accuracy = 0.0;  // macro recall over gold-present classes
};

// Per-class P/R/F1 with the 0 convention for empty denominators; weighted
// scores are gold-support-weighted means.
PredictionEval prediction_scores(std::span<const LabelId> preds,
                                 std::span<const LabelId> golds);

// (distinct n-grams across all responses) / (total n-grams); sequences
// shorter than n contribute nothing; 0 when no n-grams exist.
double distinct_n(const std::vector<TokenSeq>& responses, int n);

// token -> dense vector table; OOV tokens fall back to the zero vector.
// File format: one "token v1 ... vd" line per token.
class EmbeddingTable {
public:
    explicit EmbeddingTable(int dim) : dim_(dim) {}
    static EmbeddingTable load(const std::string& path);

    void insert(const std::string& token, Eigen::VectorXd v);
    Eigen::VectorXd lookup(const std::string& token) const;  // zero vector when absent
    int dim() const { return dim_; }
    size_t size() const { return vectors_.size(); }

private:
    int dim_;
    std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// Per dimension, the sentence value with the largest absolute magnitude
// (sign preserved; exact-magnitude ties resolve toward the larger value).
Eigen::VectorXd extrema_vector(const TokenSeq& sentence, const EmbeddingTable& emb);

// Mean cosine between candidate and reference extrema vectors; pairs with a
// zero-norm side (e.g. all tokens OOV) score 0.
double extrema_similarity(const std::vector<TokenSeq>& candidates,
                          const std::vector<TokenSeq>& references,
                          const EmbeddingTable& emb);

struct GenerationEval {
    std::optional<double> perplexity;  // teacher-forced; injected by the caller
    double distinct1 = 0.0;
    double distinct2 = 0.0;
    double extrema = 0.0;
};

struct MethodReport {
    Method method = Method::Gt;
    size_t rows = 0;
    std::optional<PredictionEval> prediction;  // absent for end_to_end
    GenerationEval generation;
};

struct EvalReport {
    std::vector<MethodReport> methods;
};

// Assembles one report row per requested method from pipeline rows:
// prediction scores from condition-vs-gold labels, diversity and extrema
// from the generated responses against the gold ones. Perplexities are
// computed by the caller (they need the models) and passed by method.
EvalReport evaluate_run(const std::vector<PipelineRow>& rows,
                        const std::vector<Method>& methods, const EmbeddingTable& emb,
                        const std::map<Method, double>& ppl_by_method);

// Human-readable table mirroring the paper's prediction/generation columns.
std::string format_eval_table(const EvalReport& report);
std::string eval_report_csv(const EvalReport& report);

}  // namespace empath
