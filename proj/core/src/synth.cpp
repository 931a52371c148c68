#include "empath/synth.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "empath/error.hpp"
#include "empath/rng.hpp"
#include "empath/tokenizer.hpp"

namespace empath {

namespace {

struct EmotionSpec {
    const char* name;
    bool topic_driven;                // listener intent depends on the topic word
    const char* intent_plain;         // used when !topic_driven
    const char* intent_by_topic[2];   // used when topic_driven (work, family)
    const char* follow_up_intent;     // listener intent after the turn-3 echo
    const char* speaker_templates[2];
};

// {topic} expands to a topic keyword, {filler} to a small filler word.
const EmotionSpec kEmotions[] = {
    {"Angry", false, "Consoling", {nullptr, nullptr}, "Questioning",
     {"i am so angry about the {filler} mess today", "this {filler} situation makes me angry"}},
    {"Afraid", false, "Encouraging", {nullptr, nullptr}, "Suggesting",
     {"i am afraid of what comes {filler} next", "something about the {filler} dark makes me afraid"}},
    {"Sad", true, nullptr, {"Suggesting", "Sympathizing"}, "Consoling",
     {"i feel sad about my {topic} lately", "my {topic} keeps making me sad these days"}},
    {"Joyful", true, nullptr, {"Acknowledging", "Wishing"}, "Agreeing",
     {"i am joyful about my {topic} right now", "my {topic} brought me real joy this week"}},
    {"Lonely", true, nullptr, {"Questioning", "Consoling"}, "Sympathizing",
     {"i have been lonely since leaving my {topic}", "being away from my {topic} feels lonely"}},
    {"Excited", true, nullptr, {"Encouraging", "Agreeing"}, "Acknowledging",
     {"i am excited about my {topic} plans", "big {topic} news got me excited today"}},
};

const char* kTopicWords[2][2] = {{"job", "work"}, {"family", "home"}};
const char* kFillerWords[] = {"whole", "little", "same", "usual"};

const std::map<std::string, std::vector<std::string>>& intent_templates() {
    static const std::map<std::string, std::vector<std::string>> t = {
        {"Questioning", {"what happened exactly ?", "how are you holding up ?"}},
        {"Agreeing", {"exactly , i get that entirely", "true , i agree with you there"}},
        {"Acknowledging", {"that sounds really special", "sounds like a big deal for you"}},
        {"Encouraging", {"just give it a try anyway", "you can handle this for sure"}},
        {"Consoling", {"i hope everything works out for you", "it will get better soon enough"}},
        {"Sympathizing", {"i am so sorry to hear that", "that must be really hard on you"}},
        {"Wishing", {"congrats , that is a step forward", "wishing you the best with it"}},
        {"Suggesting", {"maybe you should talk to someone", "perhaps try a different approach here"}},
    };
    return t;
}

std::string expand(std::string text, const std::string& key, const std::string& value) {
    const std::string slot = "{" + key + "}";
    if (auto pos = text.find(slot); pos != std::string::npos)
        text.replace(pos, slot.size(), value);
    return text;
}

LabelId label_id(const std::string& name) {
    auto id = LabelSet::instance().find(name);
    if (!id) throw std::logic_error("synth: unknown label " + name);
    return *id;
}

}  // namespace

Corpus synth_corpus(const SynthConfig& cfg) {
    if (cfg.n_dialogues <= 0) throw InputError("synth: n_dialogues must be positive");
    if (cfg.noise < 0.0 || cfg.noise > 1.0) throw InputError("synth: noise must be in [0,1]");
    Rng rng(fork_seed(cfg.seed, "synth"));
    const auto& intents = intent_templates();
    const size_t n_emotions = std::size(kEmotions);

    auto listener_turn = [&](const std::string& rule_intent) {
        // Planted rule with `noise` probability of a uniformly random intent.
        std::string intent = rule_intent;
        if (rng.uniform() < cfg.noise) {
            auto it = intents.begin();
            std::advance(it, static_cast<long>(rng.below(intents.size())));
            intent = it->first;
        }
        const auto& templates = intents.at(intent);
        Turn t;
        t.text = templates[rng.below(templates.size())];
        t.label = label_id(intent);
        return t;
    };

    Corpus corpus;
    for (int i = 0; i < cfg.n_dialogues; ++i) {
        Dialogue d;
        char id[40];
        std::snprintf(id, sizeof(id), "%s-%04d", cfg.id_prefix.c_str(), i);
        d.id = id;
        d.source = Source::Custom;

        const size_t e1 = rng.below(n_emotions);
        const size_t topic = rng.below(2);
        const EmotionSpec& spec1 = kEmotions[e1];

        Turn opener;
        opener.text = spec1.speaker_templates[rng.below(2)];
        opener.text = expand(opener.text, "topic", kTopicWords[topic][rng.below(2)]);
        opener.text = expand(opener.text, "filler", kFillerWords[rng.below(std::size(kFillerWords))]);
        opener.label = label_id(spec1.name);
        d.turns.push_back(opener);

        const std::string intent1 =
            spec1.topic_driven ? spec1.intent_by_topic[topic] : spec1.intent_plain;
        d.turns.push_back(listener_turn(intent1));

        // Turn 3: emotional contagion -- echo the opener's emotion most of
        // the time, otherwise drift to a random one.
        const size_t e2 = rng.uniform() < 0.8 ? e1 : rng.below(n_emotions);
        const EmotionSpec& spec2 = kEmotions[e2];
        Turn echo;
        echo.text = "yeah i still feel " + to_lower(spec2.name) + " about all of it";
        echo.label = label_id(spec2.name);
        d.turns.push_back(echo);

        d.turns.push_back(listener_turn(spec2.follow_up_intent));

        if (rng.uniform() < cfg.p_six_turns) {
            const size_t e3 = rng.uniform() < 0.8 ? e2 : rng.below(n_emotions);
            const EmotionSpec& spec3 = kEmotions[e3];
            Turn more;
            more.text = "honestly it keeps me " + to_lower(spec3.name) + " even now";
            more.label = label_id(spec3.name);
            d.turns.push_back(more);
            d.turns.push_back(listener_turn(spec3.follow_up_intent));
        }
        if (rng.uniform() < cfg.p_trailing_speaker) {
            Turn trailing;
            trailing.text = "thanks for listening to me today";
            trailing.label = kNeutralId;
            d.turns.push_back(trailing);
        }
        corpus.dialogues.push_back(std::move(d));
    }
    return corpus;
}

namespace {

double hash_value(const std::string& token, int dim_index) {
    std::uint64_t h = fork_seed(static_cast<std::uint64_t>(dim_index) * 7919u + 17u, token);
    // Map to [-1, 1).
    return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

std::set<std::string> corpus_tokens(const Corpus& corpus) {
    std::set<std::string> tokens;
    for (const Dialogue& d : corpus.dialogues)
        for (const Turn& t : d.turns)
            for (const std::string& tok : split_tokens(t.text)) tokens.insert(tok);
    return tokens;
}

}  // namespace

EmbeddingTable hash_embeddings(const Corpus& corpus, int dim) {
    EmbeddingTable table(dim);
    for (const std::string& tok : corpus_tokens(corpus)) {
        Eigen::VectorXd v(dim);
        for (int j = 0; j < dim; ++j) v(j) = hash_value(tok, j);
        table.insert(tok, std::move(v));
    }
    return table;
}

void write_hash_embeddings(const Corpus& corpus, int dim, std::ostream& out) {
    char buf[32];
    for (const std::string& tok : corpus_tokens(corpus)) {
        out << tok;
        for (int j = 0; j < dim; ++j) {
            std::snprintf(buf, sizeof(buf), " %.6f", hash_value(tok, j));
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace empath
