#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcprobe/gateway.hpp"
#include "lcprobe/psychometric.hpp"

namespace lcprobe {

struct Characteristic {
    std::optional<std::string> construct_id;  // empty for null characteristics
    std::string text;
    std::optional<std::string> source_item_id;
    std::optional<double> score;  // Likert units

    bool is_null() const { return !construct_id.has_value(); }
};

struct ContextProvenance {
    std::string profile_id;
    std::string renderer_id;
    uint64_t seed = 0;
};

// The probe state: ordered characteristics plus one learning objective.
// Order is part of identity (prompt reproducibility).
struct LearningContext {
    std::string context_id;
    std::vector<Characteristic> characteristics;
    std::string objective;
    ContextProvenance provenance;
};

// --- Score banding ---
// Five bands by z-score, cut at mu-1.5sd, mu-0.5sd, mu+0.5sd, mu+1.5sd.

enum class ScoreBand { very_low, low, moderate, high, very_high };

ScoreBand band_for_score(double score, const ConstructSpec& construct);
std::string band_label(ScoreBand band);
// (frequency adverb, degree adverb) for the band
std::pair<std::string, std::string> band_adverbs(ScoreBand band);

// --- Renderers ---

class TextRenderer {
public:
    virtual ~TextRenderer() = default;
    virtual std::string id() const = 0;
    virtual std::string render(const ItemSpec& item, ScoreBand band) = 0;
};

// Deterministic rule-based re-expression of a first-person questionnaire
// statement into a third-person observation at the band's intensity.
class TemplateRenderer : public TextRenderer {
public:
    std::string id() const override { return "template-v1"; }
    std::string render(const ItemSpec& item, ScoreBand band) override;
};

// Opt-in LLM re-expression; constrained to rephrasing, never new facts.
// Falls back to the template renderer after `retries` bad responses.
class LlmRenderer : public TextRenderer {
public:
    LlmRenderer(Backend& backend, std::string prompt_template, int retries = 2);

    std::string id() const override { return "llm:" + backend_.id(); }
    std::string render(const ItemSpec& item, ScoreBand band) override;

    static std::string default_prompt_template();

private:
    Backend& backend_;
    std::string prompt_template_;
    int retries_;
    TemplateRenderer fallback_;
};

// --- Operations ---

// Per construct, the item with the maximal factor loading (earliest in model
// order on ties; ties logged).
std::map<std::string, std::string> select_marker_items(const PsychometricModel& model);

Characteristic render_characteristic(const ItemSpec& item, double score,
                                     const ConstructSpec& construct, TextRenderer& renderer);

struct AssembleOptions {
    std::string context_id;
    // absent = all model constructs in model order; an explicitly empty list
    // yields the objective-only control context
    std::optional<std::vector<std::string>> constructs;
    std::vector<std::string> nulls;  // distractor sentences, interleaved by seeded shuffle
    uint64_t seed = 0;
    TextRenderer* renderer = nullptr;  // null = builtin TemplateRenderer
};

LearningContext assemble_context(const LearnerProfile& profile, const PsychometricModel& model,
                                 const std::string& objective, const AssembleOptions& options);

// s minus one characteristic; id becomes "<parent>:-<index>".
LearningContext omit_characteristic(const LearningContext& context, std::size_t index);

// --- Null characteristic catalog ---

struct NullCharacteristic {
    std::string id;  // annotation key, "null-1".."null-8"
    std::string text;
};

const std::vector<NullCharacteristic>& null_characteristic_catalog();

// --- Archive IO (JSON lines, lossless round-trip) ---

nlohmann::json context_to_json(const LearningContext& context);
LearningContext context_from_json(const nlohmann::json& doc);

void write_context_archive(const std::string& path, const std::vector<LearningContext>& contexts);
std::vector<LearningContext> read_context_archive(const std::string& path);

nlohmann::json profile_to_json(const LearnerProfile& profile);
LearnerProfile profile_from_json(const nlohmann::json& doc);

void write_profile_archive(const std::string& path, const std::vector<LearnerProfile>& profiles);
std::vector<LearnerProfile> read_profile_archive(const std::string& path);

}  // namespace lcprobe
