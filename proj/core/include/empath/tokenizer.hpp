#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "empath/corpus.hpp"

namespace empath {

// Word-level vocabulary. Reserved ids 0..3 are fixed; the EOS token doubles
// as the turn separator when contexts are concatenated for the neural models.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kNumReservedTokens = 4;

inline constexpr int kDefaultMinFreq = 2;
inline constexpr int kDefaultMaxVocab = 10000;
inline constexpr int kDefaultMaxTokens = 100;

class Vocab {
public:
    Vocab();  // reserved tokens only

    int add(const std::string& token);  // appends if absent; returns id
    int id_of(const std::string& token) const;  // kUnkId when absent
    const std::string& token_of(int id) const;  // throws on out-of-range id
    bool contains(const std::string& token) const;
    int size() const { return static_cast<int>(tokens_.size()); }

    void save(std::ostream& out) const;  // one token per line; line number = id
    static Vocab load(std::istream& in, const std::string& origin);

    bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

// Lowercase and split on whitespace; each punctuation character becomes its
// own token ("Hello!" -> ["hello", "!"]).
std::vector<std::string> split_tokens(std::string_view text);

// Tokens ranked by (frequency desc, first occurrence asc), filtered by
// min_freq and truncated to max_size including the reserved ids.
Vocab build_vocab(const Corpus& corpus, int min_freq = kDefaultMinFreq,
                  int max_size = kDefaultMaxVocab);

std::vector<int> encode(std::string_view text, const Vocab& vocab,
                        int max_tokens = kDefaultMaxTokens);

// Inverse of encode up to lowercasing and UNK loss; strips PAD/BOS/EOS and
// renders UNK as the literal "<unk>".
std::string decode(const std::vector<int>& ids, const Vocab& vocab);

void save_vocab(const Vocab& vocab, const std::string& path);
Vocab load_vocab(const std::string& path);

}  // namespace empath
