#include "empath/policy_tree.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "empath/error.hpp"

namespace empath {

PredictionContext PredictionContext::from_turns(std::span<const Turn> turns, int k) {
    PredictionContext ctx;
    const size_t n_labels = std::min(turns.size(), static_cast<size_t>(k > 0 ? k - 1 : 0));
    for (size_t i = turns.size() - n_labels; i < turns.size(); ++i)
        ctx.recent_labels.push_back(turns[i].label);
    const size_t n_turns = std::min<size_t>(turns.size(), 3);
    for (size_t i = turns.size() - n_turns; i < turns.size(); ++i)
        ctx.recent_turns.push_back(turns[i]);
    return ctx;
}

PolicyTree PolicyTree::build(const std::vector<LabelWindow>& windows, int k) {
    if (windows.empty()) throw InputError("build_tree: no windows");
    if (k < 2) throw InputError("build_tree: k must be >= 2");
    PolicyTree tree;
    tree.k_ = k;
    tree.window_count_ = static_cast<long>(windows.size());
    for (const LabelWindow& w : windows) {
        if (static_cast<int>(w.labels.size()) != k)
            throw InputError("build_tree: window length mismatch (expected " +
                             std::to_string(k) + ", got " + std::to_string(w.labels.size()) + ")");
        Node* node = &tree.root_;
        for (int j = 0; j + 1 < k; ++j) {
            const LabelId prefix_label = w.labels[static_cast<size_t>(j)];
            const LabelId next = w.labels[static_cast<size_t>(j) + 1];
            auto& child = node->children[prefix_label];
            if (!child) child = std::make_unique<Node>();
            node = child.get();
            node->counts[next]++;
            node->total++;
            tree.global_counts_[next]++;
        }
    }
    return tree;
}

const PolicyTree::Node* PolicyTree::node_for(std::span<const LabelId> prefix) const {
    const Node* node = &root_;
    for (LabelId id : prefix) {
        auto it = node->children.find(id);
        if (it == node->children.end()) return nullptr;
        node = it->second.get();
    }
    return node == &root_ ? nullptr : node;
}

PolicyTree::Match PolicyTree::lookup(std::span<const LabelId> recent_labels) const {
    const size_t max_len =
        std::min(recent_labels.size(), static_cast<size_t>(k_ > 0 ? k_ - 1 : 0));
    for (size_t len = max_len; len >= 1; --len) {
        auto suffix = recent_labels.subspan(recent_labels.size() - len, len);
        if (const Node* node = node_for(suffix); node && node->total > 0) {
            Match m;
            m.prefix.assign(suffix.begin(), suffix.end());
            m.level = static_cast<int>(len);
            m.counts = &node->counts;
            m.total = node->total;
            return m;
        }
    }
    // Global marginal over next labels.
    long total = 0;
    for (const auto& [id, c] : global_counts_) total += c;
    if (total == 0) throw InputError("untrained policy");
    Match m;
    m.level = 0;
    m.counts = &global_counts_;
    m.total = total;
    return m;
}

namespace {

LabelId argmax_counts(const std::map<LabelId, long>& counts) {
    LabelId best = -1;
    long best_count = -1;
    for (const auto& [id, c] : counts) {  // id-ascending, so ties keep the lowest id
        if (c > best_count) {
            best = id;
            best_count = c;
        }
    }
    return best;
}

}  // namespace

LabelId PolicyTree::predict_argmax(const PredictionContext& ctx, Match* match) const {
    if (ctx.recent_labels.empty()) throw InputError("predict: empty label history");
    Match m = lookup(ctx.recent_labels);
    if (match) *match = m;
    return argmax_counts(*m.counts);
}

LabelId PolicyTree::predict_sampled(const PredictionContext& ctx, Rng& rng,
                                    Match* match) const {
    if (ctx.recent_labels.empty()) throw InputError("predict: empty label history");
    Match m = lookup(ctx.recent_labels);
    if (match) *match = m;
    long r = static_cast<long>(rng.below(static_cast<std::uint64_t>(m.total)));
    for (const auto& [id, c] : *m.counts) {
        r -= c;
        if (r < 0) return id;
    }
    return m.counts->rbegin()->first;  // unreachable with consistent totals
}

std::vector<LabelId> equal_sampling_candidates(const PredictionContext& ctx) {
    const LabelSet& labels = LabelSet::instance();
    std::vector<LabelId> candidates = labels.intent_ids();
    for (auto it = ctx.recent_turns.rbegin(); it != ctx.recent_turns.rend(); ++it) {
        if (labels.is_emotion(it->label)) {
            candidates.push_back(it->label);
            break;
        }
    }
    return candidates;
}

LabelId predict_equally_sampled(const PredictionContext& ctx, Rng& rng) {
    const std::vector<LabelId> candidates = equal_sampling_candidates(ctx);
    return candidates[rng.below(candidates.size())];
}

std::string PolicyTree::export_dot(LabelId root, int max_depth, double min_prob) const {
    const LabelId ids[1] = {root};
    const Node* root_node = node_for(ids);
    if (!root_node) {
        throw InputError("export_dot: label '" + LabelSet::instance().by_id(root).name +
                         "' is not a tree root");
    }
    std::ostringstream out;
    out << "digraph policy_tree {\n";
    out << "  rankdir=LR;\n";
    out << "  node [shape=box];\n";
    int next_id = 0;
    char prob[16];

    // Emit depth-first, children in label-id order; edge label = count/total.
    struct Frame {
        const Node* node;
        int dot_id;
        int depth;
    };
    auto emit_node = [&](LabelId label) {
        const int id = next_id++;
        out << "  n" << id << " [label=\"" << LabelSet::instance().by_id(label).name << "\"];\n";
        return id;
    };
    std::vector<Frame> stack;
    stack.push_back({root_node, emit_node(root), 0});
    while (!stack.empty()) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.depth >= max_depth || f.node == nullptr || f.node->total == 0) continue;
        // Collect children in reverse so the stack pops them in id order.
        std::vector<std::pair<LabelId, long>> entries(f.node->counts.begin(),
                                                      f.node->counts.end());
        std::vector<Frame> pending;
        for (const auto& [child_label, count] : entries) {
            const double p = static_cast<double>(count) / static_cast<double>(f.node->total);
            if (p < min_prob) continue;
            const int child_id = emit_node(child_label);
            std::snprintf(prob, sizeof(prob), "%.2f", p);
            out << "  n" << f.dot_id << " -> n" << child_id << " [label=\"" << prob << "\"];\n";
            auto it = f.node->children.find(child_label);
            const Node* child_node = it == f.node->children.end() ? nullptr : it->second.get();
            pending.push_back({child_node, child_id, f.depth + 1});
        }
        for (auto it = pending.rbegin(); it != pending.rend(); ++it) stack.push_back(*it);
    }
    out << "}\n";
    return out.str();
}

void PolicyTree::save(std::ostream& out) const {
    out << "empath-policy-tree v1\n";
    out << "k " << k_ << "\n";
    out << "windows " << window_count_ << "\n";
    // DFS in id order; one line per (prefix, child, count).
    std::vector<LabelId> prefix;
    auto walk = [&](auto&& self, const Node& node) -> void {
        for (const auto& [child, count] : node.counts) {
            for (size_t i = 0; i < prefix.size(); ++i) out << prefix[i] << ' ';
            out << "-> " << child << ' ' << count << "\n";
        }
        for (const auto& [label, child_node] : node.children) {
            prefix.push_back(label);
            self(self, *child_node);
            prefix.pop_back();
        }
    };
    walk(walk, root_);
}

PolicyTree PolicyTree::load(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line) || line != "empath-policy-tree v1")
        throw InputError(origin + ": not a policy tree file (bad header)");
    PolicyTree tree;
    size_t line_no = 1;
    auto read_kv = [&](const std::string& key) -> long {
        if (!std::getline(in, line)) throw InputError(origin + ": truncated header");
        ++line_no;
        std::istringstream ss(line);
        std::string k;
        long v;
        if (!(ss >> k >> v) || k != key)
            throw InputError(origin + ":" + std::to_string(line_no) + ": expected '" + key + " <n>'");
        return v;
    };
    tree.k_ = static_cast<int>(read_kv("k"));
    tree.window_count_ = read_kv("windows");

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::vector<LabelId> prefix;
        std::string tok;
        LabelId child = -1;
        long count = -1;
        bool arrow = false;
        while (ss >> tok) {
            if (tok == "->") {
                arrow = true;
                if (!(ss >> child >> count)) break;
                break;
            }
            try {
                prefix.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw InputError(origin + ":" + std::to_string(line_no) + ": bad label id '" + tok + "'");
            }
        }
        if (!arrow || child < 0 || child >= kNumLabels || count <= 0 || prefix.empty() ||
            static_cast<int>(prefix.size()) >= tree.k_)
            throw InputError(origin + ":" + std::to_string(line_no) + ": malformed triple");
        for (LabelId id : prefix)
            if (id < 0 || id >= kNumLabels)
                throw InputError(origin + ":" + std::to_string(line_no) + ": bad label id");
        Node* node = &tree.root_;
        for (LabelId id : prefix) {
            auto& c = node->children[id];
            if (!c) c = std::make_unique<Node>();
            node = c.get();
        }
        node->counts[child] += count;
        node->total += count;
        tree.global_counts_[child] += count;
    }

    // Count conservation at depth 1: each window contributes one transition there.
    long depth1_total = 0;
    for (const auto& [label, child] : tree.root_.children) depth1_total += child->total;
    if (depth1_total != tree.window_count_)
        throw InputError(origin + ": window count " + std::to_string(tree.window_count_) +
                         " does not match depth-1 totals " + std::to_string(depth1_total));
    return tree;
}

void save_policy_tree(const PolicyTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write policy tree file: " + path);
    tree.save(out);
}

PolicyTree load_policy_tree(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open policy tree file: " + path);
    return PolicyTree::load(in, path);
}

}  // namespace empath
