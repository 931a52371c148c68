#include "empath/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "empath/error.hpp"
#include "empath/rng.hpp"

namespace empath {

std::string source_name(Source s) {
    switch (s) {
        case Source::ED: return "ED";
        case Source::EDOS: return "EDOS";
        case Source::OS: return "OS";
        case Source::Custom: return "custom";
    }
    return "custom";
}

Source parse_source(std::string_view name) {
    const std::string n = to_lower(trim(name));
    if (n == "ed") return Source::ED;
    if (n == "edos") return Source::EDOS;
    if (n == "os") return Source::OS;
    if (n == "custom") return Source::Custom;
    throw InputError("unknown corpus source: '" + std::string(name) + "'");
}

size_t Corpus::total_turns() const {
    size_t n = 0;
    for (const auto& d : dialogues) n += d.turns.size();
    return n;
}

void validate_corpus(const Corpus& corpus) {
    for (const Dialogue& d : corpus.dialogues) {
        if (d.turns.size() < 2)
            throw InputError("dialogue '" + d.id + "' has fewer than 2 turns");
        for (const Turn& t : d.turns) {
            if (trim(t.text).empty())
                throw InputError("dialogue '" + d.id + "' has an empty turn text");
            if (t.label < 0 || t.label >= kNumLabels)
                throw InputError("dialogue '" + d.id + "' has an out-of-range label id");
        }
    }
}

SplitResult split_corpus(const Corpus& corpus, std::array<double, 3> ratios,
                         std::uint64_t seed) {
    if (corpus.dialogues.empty()) throw InputError("split: corpus is empty");
    double sum = 0.0;
    for (double r : ratios) {
        if (r < 0.0) throw InputError("split: negative ratio");
        sum += r;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw InputError("split: ratios must sum to 1");

    const size_t n = corpus.dialogues.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    rng.shuffle(order);

    std::array<size_t, 3> sizes{};
    for (int i = 0; i < 3; ++i)
        sizes[static_cast<size_t>(i)] =
            static_cast<size_t>(std::floor(ratios[static_cast<size_t>(i)] * static_cast<double>(n)));
    size_t assigned = sizes[0] + sizes[1] + sizes[2];
    // At most 2 dialogues remain after flooring; they go to val, then test.
    if (assigned < n) { sizes[1]++; assigned++; }
    if (assigned < n) { sizes[2]++; assigned++; }
    if (assigned != n) throw std::logic_error("split: remainder assignment failed");

    SplitResult out;
    size_t pos = 0;
    Corpus* parts[3] = {&out.train, &out.val, &out.test};
    for (int i = 0; i < 3; ++i) {
        for (size_t j = 0; j < sizes[static_cast<size_t>(i)]; ++j, ++pos)
            parts[i]->dialogues.push_back(corpus.dialogues[order[pos]]);
    }
    return out;
}

std::vector<LabelWindow> extract_windows(const Dialogue& d, int k) {
    if (k < 2 || k % 2 != 0) throw InputError("window size k must be even and >= 2");
    std::vector<LabelWindow> windows;
    const int turns = static_cast<int>(d.turns.size());
    for (int start = 1; start + k - 1 <= turns; start += 2) {
        LabelWindow w;
        w.start_turn_index = start;
        w.labels.reserve(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i)
            w.labels.push_back(d.turns[static_cast<size_t>(start - 1 + i)].label);
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<LabelWindow> extract_windows(const Corpus& corpus, int k) {
    std::vector<LabelWindow> windows;
    for (const Dialogue& d : corpus.dialogues) {
        auto w = extract_windows(d, k);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    return windows;
}

std::string ingest_report(const Corpus& corpus) {
    std::map<std::string, std::pair<size_t, size_t>> rows;  // source -> (dialogues, turns)
    for (const Dialogue& d : corpus.dialogues) {
        auto& row = rows[source_name(d.source)];
        row.first += 1;
        row.second += d.turns.size();
    }
    char buf[128];
    std::string out = "source      dialogues      turns   turns/dialogue\n";
    auto emit = [&](const std::string& name, size_t dials, size_t turns) {
        const double tpd = dials == 0 ? 0.0
                                      : static_cast<double>(turns) / static_cast<double>(dials);
        std::snprintf(buf, sizeof(buf), "%-10s %10zu %10zu %16.2f\n", name.c_str(), dials,
                      turns, tpd);
        out += buf;
    };
    for (const auto& [name, row] : rows) emit(name, row.first, row.second);
    emit("total", corpus.dialogues.size(), corpus.total_turns());
    return out;
}

}  // namespace empath
