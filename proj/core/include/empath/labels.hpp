#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace empath {

// Closed label space: 32 emotions, 8 listener response intents, Neutral.
// Ids are stable: emotions 0..31 (alphabetical), intents 32..39, Neutral 40.
enum class LabelKind : std::uint8_t { Emotion, Intent, Neutral };

using LabelId = int;

inline constexpr int kNumLabels = 41;
inline constexpr int kNumEmotions = 32;
inline constexpr int kNumIntents = 8;
inline constexpr LabelId kFirstIntentId = 32;
inline constexpr LabelId kNeutralId = 40;

struct Label {
    LabelId id = 0;
    std::string name;
    LabelKind kind = LabelKind::Emotion;

    bool operator==(const Label&) const = default;
};

// Immutable singleton-style registry of the 41 labels.
class LabelSet {
public:
    LabelSet();

    const Label& by_id(LabelId id) const;
    // Case-insensitive lookup after trimming; no fuzzy matching.
    std::optional<LabelId> find(std::string_view name) const;

    const std::vector<Label>& all() const { return labels_; }
    std::vector<LabelId> intent_ids() const;
    bool is_intent(LabelId id) const { return by_id(id).kind == LabelKind::Intent; }
    bool is_emotion(LabelId id) const { return by_id(id).kind == LabelKind::Emotion; }

    static const LabelSet& instance();

private:
    std::vector<Label> labels_;
    std::unordered_map<std::string, LabelId> index_;
};

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace empath
