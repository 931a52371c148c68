#pragma once

#include <iosfwd>
#include <string>

#include "empath/corpus.hpp"

namespace empath {

enum class CorpusFormat { Jsonl, Csv };

CorpusFormat parse_corpus_format(std::string_view name);

// Canonical interchange format: UTF-8, one JSON object per line,
// {"id": ..., "source": ..., "turns": [{"text": ..., "label": ...}, ...]}.
// Roles are derived from turn position and never stored.
Corpus load_corpus(const std::string& path, CorpusFormat format = CorpusFormat::Jsonl);
Corpus load_corpus_jsonl(std::istream& in, const std::string& origin);

// Thin importer for ED/EDOS-style column layouts. Expected header:
//   conv_id,utterance_idx,utterance,label[,source]
// Rows are grouped by conv_id (order of first appearance) and ordered by
// utterance_idx within a dialogue.
Corpus load_corpus_csv(std::istream& in, const std::string& origin);

void save_corpus(const Corpus& corpus, const std::string& path);
void save_corpus_jsonl(const Corpus& corpus, std::ostream& out);

}  // namespace empath
