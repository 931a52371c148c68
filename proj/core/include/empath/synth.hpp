#pragma once

#include <iosfwd>

#include "empath/corpus.hpp"
#include "empath/metrics.hpp"

namespace empath {

// Synthetic empathetic-dialogue corpus with planted transition rules:
//  - turn 1: speaker emotion; for some emotions the following listener
//    intent is a pure function of the emotion, for others it depends on a
//    topic keyword that only appears in the utterance text;
//  - turn 3: speaker follow-up emotion (mostly mirroring turn 1);
//  - every listener intent is replaced by a uniformly random intent with
//    probability `noise`.
// The label-only rules are learnable from label sequences alone; the
// topic rules require reading the text, which separates the predictors.
struct SynthConfig {
    int n_dialogues = 30;
    double noise = 0.2;
    std::uint64_t seed = 7;
    double p_six_turns = 0.25;
    double p_trailing_speaker = 0.1;
    std::string id_prefix = "synth";
};

Corpus synth_corpus(const SynthConfig& cfg);

// Deterministic pseudo-embeddings for every token of the corpus (hash-mixed
// values in [-1, 1]); the desk-scale stand-in for a real embedding table.
EmbeddingTable hash_embeddings(const Corpus& corpus, int dim);
void write_hash_embeddings(const Corpus& corpus, int dim, std::ostream& out);

}  // namespace empath
