#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "empath/corpus.hpp"
#include "empath/rng.hpp"

namespace empath {

// Next-label context: the label sequence feeding the decision tree and the
// raw turns feeding the equal-sampling baseline's emotion scan.
struct PredictionContext {
    std::vector<LabelId> recent_labels;  // oldest -> newest, last up-to-(k-1)
    std::vector<Turn> recent_turns;      // oldest -> newest, last up-to-3

    static PredictionContext from_turns(std::span<const Turn> turns, int k);
};

// Prefix trie over training label windows. The node for a label sequence
// holds the empirical counts of the label that followed it; probabilities
// are count/total. Raw counts, no smoothing.
class PolicyTree {
public:
    struct Node {
        std::map<LabelId, long> counts;  // next-label counts after this prefix
        long total = 0;
        std::map<LabelId, std::unique_ptr<Node>> children;
    };

    // How a prediction was answered: the longest stored suffix of the
    // history that matched, or the global marginal when nothing did.
    struct Match {
        std::vector<LabelId> prefix;          // matched suffix, oldest -> newest
        int level = 0;                        // matched length; 0 = global marginal
        const std::map<LabelId, long>* counts = nullptr;
        long total = 0;
    };

    static PolicyTree build(const std::vector<LabelWindow>& windows, int k);

    int k() const { return k_; }
    long window_count() const { return window_count_; }
    const Node& root() const { return root_; }
    const std::map<LabelId, long>& global_counts() const { return global_counts_; }

    // Exact-prefix node lookup (no backoff); nullptr when absent.
    const Node* node_for(std::span<const LabelId> prefix) const;

    // Longest-suffix backoff: tries suffix lengths min(k-1, |history|) .. 1,
    // then the global marginal. Throws "untrained policy" if even the global
    // distribution is empty.
    Match lookup(std::span<const LabelId> recent_labels) const;

    // Highest-count child of the matched node; ties broken by lowest label id.
    LabelId predict_argmax(const PredictionContext& ctx, Match* match = nullptr) const;

    // Samples a child proportionally to counts.
    LabelId predict_sampled(const PredictionContext& ctx, Rng& rng,
                            Match* match = nullptr) const;

    // DOT digraph rooted at `root`; edge labels are probabilities to two
    // decimals; edges below min_prob are pruned from the rendering only.
    std::string export_dot(LabelId root, int max_depth, double min_prob) const;

    // Versioned text format: one "prefix -> child count" triple per line.
    void save(std::ostream& out) const;
    static PolicyTree load(std::istream& in, const std::string& origin);

private:
    int k_ = 0;
    long window_count_ = 0;
    Node root_;  // depth-0 node: children are the per-first-label roots
    std::map<LabelId, long> global_counts_;
};

// Equal-sampling baseline: uniform over the 8 intents plus the most recent
// emotion-kind label among the last 3 turns (if any; Neutral never counts).
LabelId predict_equally_sampled(const PredictionContext& ctx, Rng& rng);
std::vector<LabelId> equal_sampling_candidates(const PredictionContext& ctx);

void save_policy_tree(const PolicyTree& tree, const std::string& path);
PolicyTree load_policy_tree(const std::string& path);

}  // namespace empath
