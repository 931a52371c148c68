#include "empath/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>

#include "empath/error.hpp"

namespace empath {

namespace {
const char* kReservedTokens[kNumReservedTokens] = {"<pad>", "<unk>", "<bos>", "<eos>"};
}

Vocab::Vocab() {
    for (const char* t : kReservedTokens) add(t);
}

int Vocab::add(const std::string& token) {
    auto it = index_.find(token);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
    index_.emplace(token, id);
    return id;
}

int Vocab::id_of(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(int id) const {
    if (id < 0 || id >= size())
        throw InputError("token id out of range: " + std::to_string(id));
    return tokens_[static_cast<size_t>(id)];
}

bool Vocab::contains(const std::string& token) const {
    return index_.find(token) != index_.end();
}

void Vocab::save(std::ostream& out) const {
    for (const std::string& t : tokens_) out << t << "\n";
}

Vocab Vocab::load(std::istream& in, const std::string& origin) {
    Vocab v;
    std::string line;
    int id = 0;
    while (std::getline(in, line)) {
        if (id < kNumReservedTokens) {
            if (line != kReservedTokens[id])
                throw InputError(origin + ": reserved token mismatch at id " + std::to_string(id));
        } else {
            if (line.empty()) throw InputError(origin + ": empty token at id " + std::to_string(id));
            v.add(line);
        }
        ++id;
    }
    if (id < kNumReservedTokens) throw InputError(origin + ": vocab file truncated");
    return v;
}

std::vector<std::string> split_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (char ch : text) {
        const unsigned char c = static_cast<unsigned char>(ch);
        if (std::isspace(c)) {
            flush();
        } else if (std::isalnum(c)) {
            cur += static_cast<char>(std::tolower(c));
        } else {
            flush();
            tokens.emplace_back(1, ch);
        }
    }
    flush();
    return tokens;
}

Vocab build_vocab(const Corpus& corpus, int min_freq, int max_size) {
    if (corpus.dialogues.empty()) throw InputError("build_vocab: corpus is empty");
    if (max_size <= kNumReservedTokens)
        throw InputError("build_vocab: max_size must be > " + std::to_string(kNumReservedTokens));

    struct Entry {
        long freq = 0;
        size_t first_seen = 0;
    };
    std::unordered_map<std::string, Entry> counts;
    std::vector<std::string> first_order;
    size_t tick = 0;
    for (const Dialogue& d : corpus.dialogues) {
        for (const Turn& t : d.turns) {
            for (std::string& tok : split_tokens(t.text)) {
                auto [it, inserted] = counts.try_emplace(std::move(tok));
                if (inserted) {
                    it->second.first_seen = tick++;
                    first_order.push_back(it->first);
                }
                it->second.freq++;
            }
        }
    }

    std::stable_sort(first_order.begin(), first_order.end(),
                     [&](const std::string& a, const std::string& b) {
                         const Entry& ea = counts.at(a);
                         const Entry& eb = counts.at(b);
                         if (ea.freq != eb.freq) return ea.freq > eb.freq;
                         return ea.first_seen < eb.first_seen;
                     });

    Vocab vocab;
    for (const std::string& tok : first_order) {
        if (vocab.size() >= max_size) break;
        if (counts[tok].freq < min_freq) continue;
        vocab.add(tok);
    }
    return vocab;
}

std::vector<int> encode(std::string_view text, const Vocab& vocab, int max_tokens) {
    std::vector<int> ids;
    for (const std::string& tok : split_tokens(text)) {
        if (static_cast<int>(ids.size()) >= max_tokens) break;
        ids.push_back(vocab.id_of(tok));
    }
    return ids;
}

std::string decode(const std::vector<int>& ids, const Vocab& vocab) {
    std::string out;
    for (int id : ids) {
        const std::string& tok = vocab.token_of(id);  // validates range
        if (id == kPadId || id == kBosId || id == kEosId) continue;
        if (!out.empty()) out += ' ';
        out += tok;  // UNK decodes to the literal "<unk>"
    }
    return out;
}

void save_vocab(const Vocab& vocab, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write vocab file: " + path);
    vocab.save(out);
}

Vocab load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open vocab file: " + path);
    return Vocab::load(in, path);
}

}  // namespace empath
