#include "empath/metrics.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "empath/error.hpp"
#include "empath/tokenizer.hpp"

namespace empath {

PredictionEval prediction_scores(std::span<const LabelId> preds,
                                 std::span<const LabelId> golds) {
    if (preds.size() != golds.size()) throw InputError("prediction_scores: length mismatch");
    if (preds.empty()) throw InputError("prediction_scores: empty input");

    std::array<long, kNumLabels> tp{}, fp{}, fn{};
    for (size_t i = 0; i < preds.size(); ++i) {
        const LabelId p = preds[i], g = golds[i];
        if (p < 0 || p >= kNumLabels || g < 0 || g >= kNumLabels)
            throw InputError("prediction_scores: label id out of range");
        if (p == g) {
            tp[static_cast<size_t>(p)]++;
        } else {
            fp[static_cast<size_t>(p)]++;
            fn[static_cast<size_t>(g)]++;
        }
    }

    PredictionEval eval;
    for (int c = 0; c < kNumLabels; ++c) {
        const auto ci = static_cast<size_t>(c);
        eval.support[ci] = tp[ci] + fn[ci];
        const long pred_count = tp[ci] + fp[ci];
        eval.precision[ci] = pred_count > 0 ? static_cast<double>(tp[ci]) / static_cast<double>(pred_count) : 0.0;
        eval.recall[ci] = eval.support[ci] > 0
                              ? static_cast<double>(tp[ci]) / static_cast<double>(eval.support[ci])
                              : 0.0;
        const double pr = eval.precision[ci] + eval.recall[ci];
        eval.f1[ci] = pr > 0.0 ? 2.0 * eval.precision[ci] * eval.recall[ci] / pr : 0.0;
    }

    const double total = static_cast<double>(golds.size());
    int present = 0;
    for (int c = 0; c < kNumLabels; ++c) {
        const auto ci = static_cast<size_t>(c);
        if (eval.support[ci] == 0) continue;
        const double w = static_cast<double>(eval.support[ci]) / total;
        eval.weighted_precision += w * eval.precision[ci];
        eval.weighted_recall += w * eval.recall[ci];
        eval.weighted_f1 += w * eval.f1[ci];
        eval.balanced_accuracy += eval.recall[ci];
        ++present;
    }
    eval.balanced_accuracy /= static_cast<double>(present);
    return eval;
}

double distinct_n(const std::vector<TokenSeq>& responses, int n) {
    if (n < 1) throw InputError("distinct_n: n must be >= 1");
    std::set<std::vector<std::string>> seen;
    long total = 0;
    for (const TokenSeq& r : responses) {
        if (static_cast<int>(r.size()) < n) continue;
        for (size_t i = 0; i + static_cast<size_t>(n) <= r.size(); ++i) {
            seen.insert(std::vector<std::string>(r.begin() + static_cast<long>(i),
                                                 r.begin() + static_cast<long>(i) + n));
            ++total;
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(seen.size()) / static_cast<double>(total);
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open embedding file: " + path);
    std::string line;
    size_t line_no = 0;
    int dim = -1;
    EmbeddingTable table(0);
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        std::vector<double> values;
        double v;
        while (ss >> v) values.push_back(v);
        if (values.empty())
            throw InputError(path + ":" + std::to_string(line_no) + ": no vector values");
        if (dim < 0) {
            dim = static_cast<int>(values.size());
            table.dim_ = dim;
        } else if (static_cast<int>(values.size()) != dim) {
            throw InputError(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(dim) + " values, got " +
                             std::to_string(values.size()));
        }
        Eigen::VectorXd vec(dim);
        for (int i = 0; i < dim; ++i) vec(i) = values[static_cast<size_t>(i)];
        if (!vec.allFinite())
            throw InputError(path + ":" + std::to_string(line_no) + ": non-finite value");
        table.insert(token, std::move(vec));
    }
    if (dim < 0) throw InputError(path + ": empty embedding file");
    return table;
}

void EmbeddingTable::insert(const std::string& token, Eigen::VectorXd v) {
    vectors_[token] = std::move(v);
}

Eigen::VectorXd EmbeddingTable::lookup(const std::string& token) const {
    auto it = vectors_.find(token);
    if (it == vectors_.end()) return Eigen::VectorXd::Zero(dim_);
    return it->second;
}

Eigen::VectorXd extrema_vector(const TokenSeq& sentence, const EmbeddingTable& emb) {
    Eigen::VectorXd extrema = Eigen::VectorXd::Zero(emb.dim());
    bool first = true;
    for (const std::string& tok : sentence) {
        const Eigen::VectorXd v = emb.lookup(tok);
        if (first) {
            extrema = v;
            first = false;
            continue;
        }
        for (int d = 0; d < emb.dim(); ++d) {
            const double a = std::fabs(v(d)), b = std::fabs(extrema(d));
            if (a > b || (a == b && v(d) > extrema(d))) extrema(d) = v(d);
        }
    }
    return extrema;
}

double extrema_similarity(const std::vector<TokenSeq>& candidates,
                          const std::vector<TokenSeq>& references,
                          const EmbeddingTable& emb) {
    if (candidates.size() != references.size())
        throw InputError("extrema_similarity: length mismatch");
    if (candidates.empty()) throw InputError("extrema_similarity: empty input");
    if (emb.dim() < 1) throw InputError("extrema_similarity: embedding dimension must be >= 1");
    double sum = 0.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        const Eigen::VectorXd a = extrema_vector(candidates[i], emb);
        const Eigen::VectorXd b = extrema_vector(references[i], emb);
        const double na = a.norm(), nb = b.norm();
        sum += (na == 0.0 || nb == 0.0) ? 0.0 : a.dot(b) / (na * nb);
    }
    return sum / static_cast<double>(candidates.size());
}

EvalReport evaluate_run(const std::vector<PipelineRow>& rows,
                        const std::vector<Method>& methods, const EmbeddingTable& emb,
                        const std::map<Method, double>& ppl_by_method) {
    EvalReport report;
    for (Method m : methods) {
        MethodReport mr;
        mr.method = m;
        std::vector<LabelId> preds, golds;
        std::vector<TokenSeq> generated, references;
        for (const PipelineRow& row : rows) {
            if (row.method != m) continue;
            ++mr.rows;
            golds.push_back(row.gold_label);
            if (row.condition) preds.push_back(*row.condition);
            generated.push_back(split_tokens(row.response));
            references.push_back(split_tokens(row.gold_response));
        }
        if (mr.rows > 0) {
            if (preds.size() == golds.size())  // labelled method (everything but end_to_end)
                mr.prediction = prediction_scores(preds, golds);
            else if (!preds.empty())
                throw InputError("evaluate_run: misaligned prediction rows for method " +
                                 method_name(m));
            mr.generation.distinct1 = distinct_n(generated, 1);
            mr.generation.distinct2 = distinct_n(generated, 2);
            mr.generation.extrema = extrema_similarity(generated, references, emb);
            if (auto it = ppl_by_method.find(m); it != ppl_by_method.end())
                mr.generation.perplexity = it->second;
        }
        report.methods.push_back(std::move(mr));
    }
    return report;
}

}  // namespace empath
