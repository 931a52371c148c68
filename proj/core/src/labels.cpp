#include "empath/labels.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>

namespace empath {

namespace {

const char* kEmotionNames[kNumEmotions] = {
    "Afraid",     "Angry",        "Annoyed",     "Anticipating", "Anxious",
    "Apprehensive", "Ashamed",    "Caring",      "Confident",    "Content",
    "Devastated", "Disappointed", "Disgusted",   "Embarrassed",  "Excited",
    "Faithful",   "Furious",      "Grateful",    "Guilty",       "Hopeful",
    "Impressed",  "Jealous",      "Joyful",      "Lonely",       "Nostalgic",
    "Prepared",   "Proud",        "Sad",         "Sentimental",  "Surprised",
    "Terrified",  "Trusting",
};

const char* kIntentNames[kNumIntents] = {
    "Questioning", "Agreeing", "Acknowledging", "Encouraging",
    "Consoling",   "Sympathizing", "Wishing",   "Suggesting",
};

}  // namespace

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

LabelSet::LabelSet() {
    labels_.reserve(kNumLabels);
    for (int i = 0; i < kNumEmotions; ++i)
        labels_.push_back({i, kEmotionNames[i], LabelKind::Emotion});
    for (int i = 0; i < kNumIntents; ++i)
        labels_.push_back({kFirstIntentId + i, kIntentNames[i], LabelKind::Intent});
    labels_.push_back({kNeutralId, "Neutral", LabelKind::Neutral});
    for (const Label& l : labels_) index_.emplace(to_lower(l.name), l.id);
}

const Label& LabelSet::by_id(LabelId id) const {
    if (id < 0 || id >= kNumLabels)
        throw std::out_of_range("label id out of range: " + std::to_string(id));
    return labels_[static_cast<size_t>(id)];
}

std::optional<LabelId> LabelSet::find(std::string_view name) const {
    auto it = index_.find(to_lower(trim(name)));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<LabelId> LabelSet::intent_ids() const {
    std::vector<LabelId> ids;
    for (int i = 0; i < kNumIntents; ++i) ids.push_back(kFirstIntentId + i);
    return ids;
}

const LabelSet& LabelSet::instance() {
    static const LabelSet set;
    return set;
}

}  // namespace empath
