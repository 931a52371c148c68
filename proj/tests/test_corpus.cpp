#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "empath/corpus_io.hpp"
#include "empath/error.hpp"
#include "empath/rng.hpp"
#include "empath/synth.hpp"
#include "oracles.hpp"

using namespace empath;

namespace {

Dialogue make_dialogue(const std::string& id, std::initializer_list<const char*> labels) {
    Dialogue d;
    d.id = id;
    int i = 0;
    for (const char* name : labels) {
        Turn t;
        t.text = "turn " + std::to_string(++i);
        t.label = *LabelSet::instance().find(name);
        d.turns.push_back(t);
    }
    return d;
}

}  // namespace

TEST_CASE("label set invariants") {
    const LabelSet& labels = LabelSet::instance();
    CHECK(labels.all().size() == 41);
    int emotions = 0, intents = 0, neutral = 0;
    std::set<std::string> names;
    for (const Label& l : labels.all()) {
        names.insert(l.name);
        CHECK(labels.by_id(l.id) == l);
        switch (l.kind) {
            case LabelKind::Emotion: emotions++; break;
            case LabelKind::Intent: intents++; break;
            case LabelKind::Neutral: neutral++; break;
        }
    }
    CHECK(emotions == 32);
    CHECK(intents == 8);
    CHECK(neutral == 1);
    CHECK(names.size() == 41);  // name -> id is a bijection
    for (const char* intent : {"Questioning", "Agreeing", "Acknowledging", "Encouraging",
                               "Consoling", "Sympathizing", "Wishing", "Suggesting"}) {
        auto id = labels.find(intent);
        REQUIRE(id.has_value());
        CHECK(labels.by_id(*id).kind == LabelKind::Intent);
    }
    CHECK(labels.find("  sAd ") == labels.find("Sad"));  // trim + case-insensitive
    CHECK(!labels.find("Excited-ish").has_value());      // no fuzzy matching
}

TEST_CASE("load_corpus echoes a small jsonl file") {
    std::istringstream in(
        R"({"id": "d1", "source": "ED", "turns": [{"text": "hi there", "label": "Sad"}, )"
        R"({"text": "what happened?", "label": "Questioning"}, )"
        R"({"text": "my dog ran away", "label": "Sad"}, )"
        R"({"text": "so sorry to hear", "label": "Sympathizing"}]})"
        "\n");
    Corpus c = load_corpus_jsonl(in, "test");
    REQUIRE(c.dialogues.size() == 1);
    CHECK(c.dialogues[0].id == "d1");
    CHECK(c.dialogues[0].source == Source::ED);
    REQUIRE(c.dialogues[0].turns.size() == 4);
    CHECK(c.dialogues[0].turns[1].label == *LabelSet::instance().find("Questioning"));
    CHECK(role_of_turn(1) == Role::Speaker);
    CHECK(role_of_turn(2) == Role::Listener);
}

TEST_CASE("load_corpus rejects bad input") {
    SUBCASE("unknown label names the dialogue") {
        std::istringstream in(
            R"({"id": "bad-dlg", "turns": [{"text": "a", "label": "Excited-ish"}, {"text": "b", "label": "Sad"}]})");
        CHECK_THROWS_WITH_AS(load_corpus_jsonl(in, "test"),
                             doctest::Contains("bad-dlg"), InputError);
    }
    SUBCASE("parse failure reports the line number") {
        std::istringstream in("{\"id\": \"ok\", \"turns\": [{\"text\": \"a\", \"label\": "
                              "\"Sad\"}, {\"text\": \"b\", \"label\": \"Sad\"}]}\n{broken\n");
        CHECK_THROWS_WITH_AS(load_corpus_jsonl(in, "test"), doctest::Contains("test:2"),
                             InputError);
    }
    SUBCASE("dialogue with fewer than 2 turns") {
        std::istringstream in(R"({"id": "short", "turns": [{"text": "a", "label": "Sad"}]})");
        CHECK_THROWS_WITH_AS(load_corpus_jsonl(in, "test"),
                             doctest::Contains("fewer than 2 turns"), InputError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), InputError);
    }
}

TEST_CASE("corpus round-trips through the canonical format") {
    SynthConfig cfg;
    cfg.n_dialogues = 12;
    cfg.seed = 99;
    Corpus original = synth_corpus(cfg);
    std::stringstream buffer;
    save_corpus_jsonl(original, buffer);
    Corpus reloaded = load_corpus_jsonl(buffer, "roundtrip");
    CHECK(original == reloaded);

    // Serialization itself is byte-stable.
    std::stringstream again;
    save_corpus_jsonl(reloaded, again);
    CHECK(buffer.str() == again.str());
}

TEST_CASE("csv importer emits the canonical layout") {
    std::istringstream in(
        "conv_id,utterance_idx,utterance,label,source\n"
        "c1,1,\"hello, you\",Sad,ED\n"
        "c1,2,what happened ?,Questioning,ED\n"
        "c2,2,sounds nice,Acknowledging,\n"
        "c2,1,i got a new job,Joyful,\n");
    Corpus c = load_corpus_csv(in, "test.csv");
    REQUIRE(c.dialogues.size() == 2);
    CHECK(c.dialogues[0].turns[0].text == "hello, you");  // quoted comma preserved
    CHECK(c.dialogues[0].source == Source::ED);
    CHECK(c.dialogues[1].id == "c2");
    CHECK(c.dialogues[1].turns[0].text == "i got a new job");  // ordered by utterance_idx
    CHECK(c.dialogues[1].source == Source::Custom);
}

TEST_CASE("ingest report mirrors the dialogue/turn statistics") {
    Corpus c;
    c.dialogues.push_back(make_dialogue("a", {"Sad", "Questioning", "Sad"}));
    c.dialogues.push_back(make_dialogue("b", {"Angry", "Consoling", "Angry", "Questioning"}));
    c.dialogues.push_back(make_dialogue("c", {"Joyful", "Wishing", "Joyful"}));
    const std::string report = ingest_report(c);
    CHECK(report.find("custom") != std::string::npos);
    CHECK(report.find("3") != std::string::npos);
    CHECK(report.find("10") != std::string::npos);
    CHECK(report.find("3.33") != std::string::npos);  // 10 turns / 3 dialogues
}

TEST_CASE("split_corpus basic fractions") {
    Corpus c;
    for (int i = 0; i < 10; ++i)
        c.dialogues.push_back(make_dialogue("d" + std::to_string(i), {"Sad", "Questioning"}));
    SplitResult s = split_corpus(c, {0.8, 0.1, 0.1}, 7);
    CHECK(s.train.dialogues.size() == 8);
    CHECK(s.val.dialogues.size() == 1);
    CHECK(s.test.dialogues.size() == 1);

    SplitResult s2 = split_corpus(c, {0.8, 0.1, 0.1}, 7);
    CHECK(s.train == s2.train);  // deterministic for a fixed seed
    CHECK(s.val == s2.val);
    CHECK(s.test == s2.test);
}

TEST_CASE("split_corpus remainder goes to val then test") {
    Corpus c;
    for (int i = 0; i < 7; ++i)
        c.dialogues.push_back(make_dialogue("d" + std::to_string(i), {"Sad", "Questioning"}));
    SplitResult s = split_corpus(c, {0.8, 0.1, 0.1}, 3);
    CHECK(s.train.dialogues.size() == 5);  // floor(5.6), remainders -> val, test
    CHECK(s.val.dialogues.size() == 1);
    CHECK(s.test.dialogues.size() == 1);
}

TEST_CASE("split_corpus errors") {
    Corpus empty;
    CHECK_THROWS_AS(split_corpus(empty, {0.8, 0.1, 0.1}, 1), InputError);
    Corpus c;
    c.dialogues.push_back(make_dialogue("d", {"Sad", "Questioning"}));
    CHECK_THROWS_AS(split_corpus(c, {0.9, 0.2, -0.1}, 1), InputError);
    CHECK_THROWS_AS(split_corpus(c, {0.5, 0.2, 0.2}, 1), InputError);
}

TEST_CASE("split partitions are disjoint and exhaustive") {
    Rng rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        Corpus c;
        const int n = 1 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i)
            c.dialogues.push_back(make_dialogue("d" + std::to_string(i), {"Sad", "Questioning"}));
        SplitResult s = split_corpus(c, {0.8, 0.1, 0.1}, rng.next_u64());
        std::set<std::string> ids;
        size_t total = 0;
        for (const Corpus* part : {&s.train, &s.val, &s.test}) {
            for (const Dialogue& d : part->dialogues) ids.insert(d.id);
            total += part->dialogues.size();
        }
        CHECK(total == static_cast<size_t>(n));
        CHECK(ids.size() == static_cast<size_t>(n));
    }
}

TEST_CASE("extract_windows on fixed dialogues") {
    Corpus c;
    c.dialogues.push_back(make_dialogue("four", {"Sad", "Questioning", "Sad", "Consoling"}));
    CHECK(extract_windows(c, 4).size() == 1);

    Corpus c3;
    c3.dialogues.push_back(make_dialogue("three", {"Sad", "Questioning", "Sad"}));
    CHECK(extract_windows(c3, 4).empty());

    Corpus c8;
    c8.dialogues.push_back(make_dialogue("eight", {"Sad", "Questioning", "Sad", "Consoling",
                                                   "Sad", "Encouraging", "Joyful", "Wishing"}));
    auto windows = extract_windows(c8, 4);
    REQUIRE(windows.size() == 3);
    CHECK(windows[0].start_turn_index == 1);
    CHECK(windows[1].start_turn_index == 3);
    CHECK(windows[2].start_turn_index == 5);
    // Window content matches the dialogue slice.
    CHECK(windows[1].labels ==
          std::vector<LabelId>{c8.dialogues[0].turns[2].label, c8.dialogues[0].turns[3].label,
                               c8.dialogues[0].turns[4].label, c8.dialogues[0].turns[5].label});
}

TEST_CASE("extract_windows rejects bad k") {
    Corpus c;
    c.dialogues.push_back(make_dialogue("d", {"Sad", "Questioning"}));
    CHECK_THROWS_AS(extract_windows(c, 3), InputError);
    CHECK_THROWS_AS(extract_windows(c, 0), InputError);
}

TEST_CASE("window count matches brute-force enumeration on random sizes") {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int turns = 2 + static_cast<int>(rng.below(14));
        const int k = 2 * (1 + static_cast<int>(rng.below(4)));
        Dialogue d;
        d.id = "r";
        for (int i = 0; i < turns; ++i) {
            Turn t;
            t.text = "x";
            t.label = static_cast<LabelId>(rng.below(kNumLabels));
            d.turns.push_back(t);
        }
        auto windows = extract_windows(d, k);
        auto starts = oracles::window_starts(turns, k);
        REQUIRE(windows.size() == starts.size());
        for (size_t i = 0; i < windows.size(); ++i)
            CHECK(windows[i].start_turn_index == starts[i]);
        // Closed form from the docs.
        const size_t closed = turns < k ? 0 : static_cast<size_t>((turns - k) / 2 + 1);
        CHECK(windows.size() == closed);
    }
}

TEST_CASE("bundled micro fixture matches the generator that produced it") {
    SynthConfig cfg;
    cfg.n_dialogues = 30;
    cfg.noise = 0.2;
    cfg.seed = 7;
    cfg.id_prefix = "micro";
    Corpus generated = synth_corpus(cfg);
    Corpus loaded = load_corpus(std::string(EMPATH_DATA_DIR) + "/micro_corpus.jsonl");
    CHECK(generated == loaded);
    CHECK(loaded.dialogues.size() == 30);
}
