#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "empath/error.hpp"
#include "empath/policy_tree.hpp"
#include "empath/synth.hpp"
#include "oracles.hpp"

using namespace empath;

namespace {

LabelId id_of(const char* name) { return *LabelSet::instance().find(name); }

LabelWindow window(std::initializer_list<const char*> names) {
    LabelWindow w;
    for (const char* n : names) w.labels.push_back(id_of(n));
    return w;
}

PredictionContext ctx_of(std::initializer_list<const char*> names) {
    PredictionContext ctx;
    for (const char* n : names) ctx.recent_labels.push_back(id_of(n));
    return ctx;
}

long count_at(const PolicyTree& tree, std::initializer_list<const char*> prefix,
              const char* child) {
    std::vector<LabelId> ids;
    for (const char* n : prefix) ids.push_back(id_of(n));
    const PolicyTree::Node* node = tree.node_for(ids);
    REQUIRE(node != nullptr);
    auto it = node->counts.find(id_of(child));
    return it == node->counts.end() ? 0 : it->second;
}

}  // namespace

TEST_CASE("build_tree counts a single window") {
    auto tree = PolicyTree::build({window({"Angry", "Questioning", "Angry", "Consoling"})}, 4);
    CHECK(count_at(tree, {"Angry"}, "Questioning") == 1);
    CHECK(count_at(tree, {"Angry", "Questioning"}, "Angry") == 1);
    CHECK(count_at(tree, {"Angry", "Questioning", "Angry"}, "Consoling") == 1);
    CHECK(tree.window_count() == 1);
}

TEST_CASE("two identical windows double counts, probabilities unchanged") {
    auto w = window({"Angry", "Questioning", "Angry", "Consoling"});
    auto tree1 = PolicyTree::build({w}, 4);
    auto tree2 = PolicyTree::build({w, w}, 4);
    CHECK(count_at(tree2, {"Angry"}, "Questioning") == 2);
    CHECK(count_at(tree2, {"Angry", "Questioning"}, "Angry") == 2);
    // Argmax invariance under count scaling.
    CHECK(tree1.predict_argmax(ctx_of({"Angry", "Questioning", "Angry"})) ==
          tree2.predict_argmax(ctx_of({"Angry", "Questioning", "Angry"})));
}

TEST_CASE("build_tree validates windows") {
    CHECK_THROWS_AS(PolicyTree::build({}, 4), InputError);
    CHECK_THROWS_AS(PolicyTree::build({window({"Angry", "Sad"})}, 4), InputError);
}

TEST_CASE("tree counts equal brute-force enumeration on the micro fixture") {
    SynthConfig cfg;
    cfg.n_dialogues = 30;
    cfg.seed = 7;
    cfg.id_prefix = "micro";
    Corpus corpus = synth_corpus(cfg);
    auto windows = extract_windows(corpus, 4);
    auto tree = PolicyTree::build(windows, 4);
    auto brute = oracles::prefix_next_counts(windows);

    long checked = 0;
    for (const auto& [prefix, next_counts] : brute) {
        const PolicyTree::Node* node = tree.node_for(prefix);
        REQUIRE(node != nullptr);
        CHECK(static_cast<size_t>(node->counts.size()) == next_counts.size());
        for (const auto& [next, count] : next_counts) {
            CHECK(node->counts.at(next) == count);
            ++checked;
        }
    }
    CHECK(checked > 0);
}

TEST_CASE("count conservation and probability normalization at every depth") {
    SynthConfig cfg;
    cfg.n_dialogues = 40;
    cfg.seed = 31;
    auto windows = extract_windows(synth_corpus(cfg), 4);
    auto tree = PolicyTree::build(windows, 4);

    // Sum of totals at each depth equals the number of windows.
    for (int depth = 1; depth <= 3; ++depth) {
        long total = 0;
        std::vector<std::pair<const PolicyTree::Node*, int>> stack{{&tree.root(), 0}};
        while (!stack.empty()) {
            auto [node, d] = stack.back();
            stack.pop_back();
            if (d == depth) {
                total += node->total;
                // exact-integer normalization: child counts sum to total
                long sum = 0;
                for (const auto& [id, c] : node->counts) sum += c;
                CHECK(sum == node->total);
                continue;
            }
            for (const auto& [id, child] : node->children) stack.push_back({child.get(), d + 1});
        }
        CHECK(total == tree.window_count());
    }
}

TEST_CASE("predict_argmax follows the only child and breaks ties by lowest id") {
    auto tree = PolicyTree::build({window({"Angry", "Questioning", "Angry", "Consoling"})}, 4);
    CHECK(tree.predict_argmax(ctx_of({"Angry", "Questioning", "Angry"})) == id_of("Consoling"));

    // Tie: Questioning (32) vs Encouraging (35) -> lower id wins.
    auto tie_tree = PolicyTree::build(
        {window({"Sad", "Questioning", "Sad", "Consoling"}),
         window({"Sad", "Encouraging", "Sad", "Consoling"})},
        4);
    CHECK(tie_tree.predict_argmax(ctx_of({"Sad"})) == id_of("Questioning"));
}

TEST_CASE("backoff finds the longest stored suffix") {
    // Train on (Sad, Questioning, Sad, Consoling); probe a 3-label history
    // whose full form is unseen but whose length-1 suffix is Sad.
    auto tree = PolicyTree::build({window({"Sad", "Questioning", "Sad", "Consoling"})}, 4);
    PolicyTree::Match match;
    const LabelId pred = tree.predict_argmax(ctx_of({"Joyful", "Wishing", "Sad"}), &match);
    CHECK(pred == id_of("Questioning"));  // node (Sad) -> Questioning
    CHECK(match.level == 1);
    CHECK(match.prefix == std::vector<LabelId>{id_of("Sad")});

    // Fully unseen history -> global marginal.
    PolicyTree::Match global_match;
    tree.predict_argmax(ctx_of({"Neutral"}), &global_match);
    CHECK(global_match.level == 0);

    // Empty-history precondition.
    CHECK_THROWS_AS(tree.predict_argmax(PredictionContext{}), InputError);
}

TEST_CASE("trie node distribution equals brute-force conditional frequency") {
    Rng rng(404);
    for (int trial = 0; trial < 30; ++trial) {
        // Random windows over a small label alphabet.
        std::vector<LabelWindow> windows;
        const int n = 5 + static_cast<int>(rng.below(60));
        for (int i = 0; i < n; ++i) {
            LabelWindow w;
            for (int j = 0; j < 4; ++j)
                w.labels.push_back(static_cast<LabelId>(rng.below(5)));
            windows.push_back(std::move(w));
        }
        auto tree = PolicyTree::build(windows, 4);
        auto brute = oracles::prefix_next_counts(windows);
        for (const auto& [prefix, next_counts] : brute) {
            const PolicyTree::Node* node = tree.node_for(prefix);
            REQUIRE(node != nullptr);
            long brute_total = 0;
            for (const auto& [next, count] : next_counts) brute_total += count;
            CHECK(node->total == brute_total);
            for (const auto& [next, count] : next_counts) CHECK(node->counts.at(next) == count);
        }
    }
}

TEST_CASE("predict_sampled matches the node distribution") {
    SUBCASE("single child is certain") {
        auto tree = PolicyTree::build({window({"Angry", "Questioning", "Angry", "Consoling"})}, 4);
        Rng rng(1);
        for (int i = 0; i < 50; ++i)
            CHECK(tree.predict_sampled(ctx_of({"Angry"}), rng) == id_of("Questioning"));
    }
    SUBCASE("3:1 split lands near 0.75 over 100k draws") {
        auto tree = PolicyTree::build(
            {window({"Sad", "Questioning", "Sad", "Consoling"}),
             window({"Sad", "Questioning", "Sad", "Consoling"}),
             window({"Sad", "Questioning", "Sad", "Consoling"}),
             window({"Sad", "Encouraging", "Sad", "Consoling"})},
            4);
        Rng rng(9);
        long hits = 0;
        const int draws = 100000;
        for (int i = 0; i < draws; ++i)
            if (tree.predict_sampled(ctx_of({"Sad"}), rng) == id_of("Questioning")) ++hits;
        const double freq = static_cast<double>(hits) / draws;
        CHECK(freq > 0.74);
        CHECK(freq < 0.76);
    }
    SUBCASE("fixed seed reproduces the same label") {
        auto tree = PolicyTree::build(
            {window({"Sad", "Questioning", "Sad", "Consoling"}),
             window({"Sad", "Encouraging", "Sad", "Agreeing"})},
            4);
        Rng rng1(33), rng2(33);
        CHECK(tree.predict_sampled(ctx_of({"Sad"}), rng1) ==
              tree.predict_sampled(ctx_of({"Sad"}), rng2));
    }
}

TEST_CASE("sampling distribution passes a chi-square test on fixed fixtures") {
    // Node (Sad) -> {Questioning: 4, Encouraging: 3, Consoling: 2, Agreeing: 1}.
    std::vector<LabelWindow> windows;
    auto add = [&](const char* intent, int times) {
        for (int i = 0; i < times; ++i)
            windows.push_back(window({"Sad", intent, "Sad", "Consoling"}));
    };
    add("Questioning", 4);
    add("Encouraging", 3);
    add("Consoling", 2);
    add("Agreeing", 1);
    auto tree = PolicyTree::build(windows, 4);

    const int draws = 10000;
    Rng rng(77);
    std::map<LabelId, long> observed;
    for (int i = 0; i < draws; ++i) observed[tree.predict_sampled(ctx_of({"Sad"}), rng)]++;

    const std::vector<std::pair<LabelId, double>> expected = {
        {id_of("Questioning"), 0.4}, {id_of("Encouraging"), 0.3},
        {id_of("Consoling"), 0.2},   {id_of("Agreeing"), 0.1}};
    double chi2 = 0.0;
    for (const auto& [label, p] : expected) {
        const double exp_count = p * draws;
        const double diff = static_cast<double>(observed[label]) - exp_count;
        chi2 += diff * diff / exp_count;
    }
    CHECK(chi2 < oracles::chi2_critical_01(3));  // dof = 4 - 1
}

TEST_CASE("equal sampling candidates") {
    SUBCASE("emotion among last 3 turns joins the 8 intents") {
        PredictionContext ctx;
        for (const char* name : {"Sad", "Questioning", "Sad"}) {
            Turn t;
            t.text = "x";
            t.label = id_of(name);
            ctx.recent_turns.push_back(t);
        }
        auto candidates = equal_sampling_candidates(ctx);
        CHECK(candidates.size() == 9);
        CHECK(candidates.back() == id_of("Sad"));
    }
    SUBCASE("no emotion leaves the 8 intents") {
        PredictionContext ctx;
        for (const char* name : {"Questioning", "Neutral", "Agreeing"}) {
            Turn t;
            t.text = "x";
            t.label = id_of(name);
            ctx.recent_turns.push_back(t);
        }
        CHECK(equal_sampling_candidates(ctx).size() == 8);

        PredictionContext empty;
        CHECK(equal_sampling_candidates(empty).size() == 8);  // empty-history fallback
    }
    SUBCASE("the most recent emotion wins and Neutral never counts") {
        PredictionContext ctx;
        for (const char* name : {"Joyful", "Sad", "Neutral"}) {
            Turn t;
            t.text = "x";
            t.label = id_of(name);
            ctx.recent_turns.push_back(t);
        }
        auto candidates = equal_sampling_candidates(ctx);
        REQUIRE(candidates.size() == 9);
        CHECK(candidates.back() == id_of("Sad"));
    }
    SUBCASE("9 candidates drawn uniformly over 90k samples") {
        PredictionContext ctx;
        Turn t;
        t.text = "x";
        t.label = id_of("Sad");
        ctx.recent_turns.push_back(t);
        Rng rng(123);
        std::map<LabelId, long> observed;
        const int draws = 90000;
        for (int i = 0; i < draws; ++i) observed[predict_equally_sampled(ctx, rng)]++;
        REQUIRE(observed.size() == 9);
        for (const auto& [label, count] : observed) {
            const double freq = static_cast<double>(count) / draws;
            CHECK(freq > 1.0 / 9.0 - 0.003);
            CHECK(freq < 1.0 / 9.0 + 0.003);
        }
    }
}

TEST_CASE("export_dot renders the single-window chain") {
    auto tree = PolicyTree::build({window({"Angry", "Questioning", "Angry", "Consoling"})}, 4);
    const std::string dot = tree.export_dot(id_of("Angry"), 3, 0.0);
    CHECK(dot.find("digraph") != std::string::npos);
    // 4 nodes in a chain, all edges at probability 1.00.
    CHECK(dot.find("n0 -> n1 [label=\"1.00\"]") != std::string::npos);
    CHECK(dot.find("n1 -> n2 [label=\"1.00\"]") != std::string::npos);
    CHECK(dot.find("n2 -> n3 [label=\"1.00\"]") != std::string::npos);
    CHECK(dot.find("n4") == std::string::npos);

    SUBCASE("min_prob above 1 prunes everything but the root") {
        const std::string pruned = tree.export_dot(id_of("Angry"), 3, 1.1);
        CHECK(pruned.find("n0") != std::string::npos);
        CHECK(pruned.find("->") == std::string::npos);
    }
    SUBCASE("unknown root is an error") {
        CHECK_THROWS_AS(tree.export_dot(id_of("Wishing"), 3, 0.0), InputError);
    }
}

TEST_CASE("micro fixture DOT rendering matches the golden file") {
    SynthConfig cfg;
    cfg.n_dialogues = 30;
    cfg.seed = 7;
    cfg.id_prefix = "micro";
    auto tree = PolicyTree::build(extract_windows(synth_corpus(cfg), 4), 4);
    const std::string dot = tree.export_dot(id_of("Angry"), 3, 0.0);
    std::ifstream golden(std::string(EMPATH_GOLDEN_DIR) + "/micro_tree_angry.dot");
    REQUIRE(golden.good());
    std::stringstream buffer;
    buffer << golden.rdbuf();
    CHECK(dot == buffer.str());
}

TEST_CASE("tree serialization round-trips") {
    SynthConfig cfg;
    cfg.n_dialogues = 25;
    cfg.seed = 5;
    auto windows = extract_windows(synth_corpus(cfg), 4);
    auto tree = PolicyTree::build(windows, 4);

    std::stringstream buffer;
    tree.save(buffer);
    PolicyTree loaded = PolicyTree::load(buffer, "mem");
    CHECK(loaded.k() == tree.k());
    CHECK(loaded.window_count() == tree.window_count());
    CHECK(loaded.global_counts() == tree.global_counts());

    std::ostringstream first, again;
    tree.save(first);
    loaded.save(again);
    CHECK(first.str() == again.str());

    SUBCASE("bad header is rejected") {
        std::istringstream bad("not a tree\n");
        CHECK_THROWS_AS(PolicyTree::load(bad, "mem"), InputError);
    }
}

TEST_CASE("untrained policy error when even the global distribution is empty") {
    PolicyTree untrained;
    CHECK_THROWS_WITH_AS(untrained.predict_argmax(ctx_of({"Sad"})), "untrained policy",
                         InputError);
    // A trained tree never fails: unseen histories reach the global marginal.
    auto tree = PolicyTree::build({window({"Sad", "Questioning", "Sad", "Consoling"})}, 4);
    PolicyTree::Match match;
    CHECK_NOTHROW(tree.predict_argmax(ctx_of({"Neutral"}), &match));
    CHECK(match.level == 0);
}
