#include "empath/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "empath/error.hpp"

namespace empath {

using nlohmann::json;

CorpusFormat parse_corpus_format(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "jsonl") return CorpusFormat::Jsonl;
    if (n == "csv") return CorpusFormat::Csv;
    throw InputError("unknown corpus format: '" + std::string(name) + "' (expected jsonl or csv)");
}

namespace {

LabelId resolve_label(const std::string& name, const std::string& dialogue_id,
                      const std::string& origin, size_t line_no) {
    auto id = LabelSet::instance().find(name);
    if (!id)
        throw InputError(origin + ":" + std::to_string(line_no) + ": unknown label '" + name +
                         "' in dialogue '" + dialogue_id + "'");
    return *id;
}

}  // namespace

Corpus load_corpus_jsonl(std::istream& in, const std::string& origin) {
    Corpus corpus;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
        Dialogue d;
        try {
            d.id = obj.at("id").get<std::string>();
            d.source = obj.contains("source") ? parse_source(obj.at("source").get<std::string>())
                                              : Source::Custom;
            for (const json& jt : obj.at("turns")) {
                Turn t;
                t.text = trim(jt.at("text").get<std::string>());
                if (t.text.empty())
                    throw InputError(origin + ":" + std::to_string(line_no) +
                                     ": empty turn text in dialogue '" + d.id + "'");
                t.label = resolve_label(jt.at("label").get<std::string>(), d.id, origin, line_no);
                d.turns.push_back(std::move(t));
            }
        } catch (const json::exception& e) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (d.turns.size() < 2)
            throw InputError(origin + ":" + std::to_string(line_no) + ": dialogue '" + d.id +
                             "' has fewer than 2 turns");
        corpus.dialogues.push_back(std::move(d));
    }
    return corpus;
}

namespace {

// Minimal RFC-4180 field splitter for one record (no embedded newlines).
std::vector<std::string> split_csv_record(const std::string& line, const std::string& origin,
                                          size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c == '\r' && i + 1 == line.size()) {
            // tolerate CRLF
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw InputError(origin + ":" + std::to_string(line_no) + ": unterminated quoted field");
    fields.push_back(cur);
    return fields;
}

}  // namespace

Corpus load_corpus_csv(std::istream& in, const std::string& origin) {
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw InputError(origin + ": empty csv file");
    ++line_no;
    auto header = split_csv_record(line, origin, line_no);
    for (auto& h : header) h = to_lower(trim(h));
    const std::vector<std::string> want = {"conv_id", "utterance_idx", "utterance", "label"};
    if (header.size() < want.size() || !std::equal(want.begin(), want.end(), header.begin()))
        throw InputError(origin + ":1: expected header conv_id,utterance_idx,utterance,label[,source]");
    const bool has_source = header.size() >= 5 && header[4] == "source";

    struct Row {
        long idx;
        Turn turn;
    };
    std::vector<std::string> order;
    std::map<std::string, std::vector<Row>> by_dialogue;
    std::map<std::string, Source> sources;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_record(line, origin, line_no);
        if (fields.size() < 4)
            throw InputError(origin + ":" + std::to_string(line_no) + ": expected at least 4 fields");
        const std::string conv_id = trim(fields[0]);
        long idx = 0;
        try {
            idx = std::stol(trim(fields[1]));
        } catch (const std::exception&) {
            throw InputError(origin + ":" + std::to_string(line_no) + ": bad utterance_idx '" +
                             fields[1] + "'");
        }
        Turn t;
        t.text = trim(fields[2]);
        if (t.text.empty())
            throw InputError(origin + ":" + std::to_string(line_no) + ": empty utterance in dialogue '" +
                             conv_id + "'");
        t.label = resolve_label(trim(fields[3]), conv_id, origin, line_no);
        if (by_dialogue.find(conv_id) == by_dialogue.end()) order.push_back(conv_id);
        by_dialogue[conv_id].push_back({idx, std::move(t)});
        if (has_source && fields.size() >= 5 && !trim(fields[4]).empty())
            sources[conv_id] = parse_source(fields[4]);
    }

    Corpus corpus;
    for (const std::string& id : order) {
        auto& rows = by_dialogue[id];
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.idx < b.idx; });
        Dialogue d;
        d.id = id;
        d.source = sources.count(id) ? sources[id] : Source::Custom;
        for (auto& r : rows) d.turns.push_back(std::move(r.turn));
        if (d.turns.size() < 2)
            throw InputError(origin + ": dialogue '" + id + "' has fewer than 2 turns");
        corpus.dialogues.push_back(std::move(d));
    }
    return corpus;
}

Corpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path);
    Corpus corpus = format == CorpusFormat::Jsonl ? load_corpus_jsonl(in, path)
                                                  : load_corpus_csv(in, path);
    validate_corpus(corpus);
    return corpus;
}

void save_corpus_jsonl(const Corpus& corpus, std::ostream& out) {
    const LabelSet& labels = LabelSet::instance();
    for (const Dialogue& d : corpus.dialogues) {
        json turns = json::array();
        for (const Turn& t : d.turns)
            turns.push_back({{"text", t.text}, {"label", labels.by_id(t.label).name}});
        json obj = {{"id", d.id}, {"source", source_name(d.source)}, {"turns", turns}};
        out << obj.dump() << "\n";
    }
}

void save_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write corpus file: " + path);
    save_corpus_jsonl(corpus, out);
}

}  // namespace empath
