#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "empath/labels.hpp"

namespace empath {

enum class Role : std::uint8_t { Speaker, Listener };
enum class Source : std::uint8_t { ED, EDOS, OS, Custom };

std::string source_name(Source s);
Source parse_source(std::string_view name);  // case-insensitive; throws InputError

// Roles are never stored on disk; they are derived from turn position:
// odd-numbered turns (1-indexed) are Speaker, even-numbered are Listener.
struct Turn {
    std::string text;
    LabelId label = kNeutralId;

    bool operator==(const Turn&) const = default;
};

struct Dialogue {
    std::string id;
    Source source = Source::Custom;
    std::vector<Turn> turns;  // length >= 2, roles alternate starting with Speaker

    bool operator==(const Dialogue&) const = default;
};

inline Role role_of_turn(size_t index_1based) {
    return index_1based % 2 == 1 ? Role::Speaker : Role::Listener;
}

struct Corpus {
    std::vector<Dialogue> dialogues;

    bool operator==(const Corpus&) const = default;
    size_t total_turns() const;
};

// k consecutive turn labels from one dialogue, starting at a speaker turn.
struct LabelWindow {
    std::vector<LabelId> labels;  // length exactly k
    int start_turn_index = 1;     // 1-based turn index of the first label
};

// Validates turn counts and label ids; throws InputError naming the dialogue.
void validate_corpus(const Corpus& corpus);

// Dialogue-level partition. Ratios must sum to 1 (+-1e-9) and be >= 0.
// Sizes are floor(ratio*N) with the remainder assigned to val, then test.
// Shuffle is a seeded Fisher-Yates, so the partition is deterministic.
struct SplitResult {
    Corpus train, val, test;
};
SplitResult split_corpus(const Corpus& corpus, std::array<double, 3> ratios,
                         std::uint64_t seed);

// Sliding windows of k labels, stride 2, starting at speaker turns
// (1-based start indices 1, 3, 5, ... while start + k - 1 <= T).
// k must be even and >= 2.
std::vector<LabelWindow> extract_windows(const Corpus& corpus, int k);
std::vector<LabelWindow> extract_windows(const Dialogue& d, int k);

// Plain-text ingest report: one row per source plus a total row
// (dialogues, turns, turns/dialogue).
std::string ingest_report(const Corpus& corpus);

}  // namespace empath
