#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcprobe/context.hpp"
#include "lcprobe/gateway.hpp"

namespace lcprobe {

// Sparse distribution over strategy names; absent names read as probability 0.
using Policy = std::map<std::string, double>;

void validate_policy(const Policy& policy, double tolerance = 1e-6);

struct Strategy {
    std::string name;
    std::string definition;
};

class ActionSpace {
public:
    static ActionSpace create(std::vector<Strategy> strategies);

    const std::vector<Strategy>& strategies() const { return strategies_; }
    std::size_t size() const { return strategies_.size(); }
    bool contains(const std::string& name) const;

    // canonical name for a case/punctuation-insensitive token, or empty
    std::string resolve(const std::string& token) const;

    // lowercase alphanumerics only
    static std::string normalize(const std::string& text);

private:
    std::vector<Strategy> strategies_;
    std::map<std::string, std::string> by_normalized_;
};

// The built-in 22-strategy catalog (text-medium instructional strategies).
ActionSpace default_action_space();
ActionSpace load_action_catalog(const std::string& path);

// --- Decision state ---

struct DecisionState {
    std::string ref;  // context_id, or "objective-only"
    std::vector<std::string> characteristics;
    std::string objective;
};

DecisionState to_decision_state(const LearningContext& context);
DecisionState objective_only_state(const std::string& objective);

// --- Prompt template ---

struct PromptTemplate {
    std::string text;  // with {{STATE}}, {{ACTIONS}}, {{K}} placeholders
    std::string hash;  // sha256 of text; enters provenance
};

PromptTemplate default_prompt_template();
PromptTemplate load_prompt_template(const std::string& path);

// Byte-stable prompt: the state verbatim, every strategy with its definition,
// and the exactly-k machine-readable reply instruction.
std::string build_prompt(const DecisionState& state, const ActionSpace& actions, int k,
                         const PromptTemplate& prompt_template);

// Resolve raw model output into exactly k distinct canonical names.
// Primary path parses the first JSON array; fallback scans lines for unique
// name matches. Throws ParseError otherwise.
std::vector<std::string> parse_selection(const std::string& raw, const ActionSpace& actions,
                                         int k);

// --- Policy estimation ---

struct PolicyEstimate {
    std::string state_ref;
    Policy probabilities;  // raw_counts / (valid_trials * k)
    int trials = 0;        // N attempted
    int valid_trials = 0;  // N_v
    int k = 0;
    std::map<std::string, int> raw_counts;
    bool degraded = false;  // valid_trials < ceil(0.9 * trials)

    // run metadata
    std::string estimate_id;
    std::string backend_id;
    std::string prompt_hash;
    std::string template_hash;
    uint64_t seed = 0;
    std::string timestamp;
};

struct EstimateOptions {
    int trials = 100;
    int k = 5;
    uint64_t seed = 0;
    int retry_budget = 3;  // retries per trial on parse errors
    int parallelism = 1;
    std::string persist_dir;  // when set, the estimate record is written here
    const PromptTemplate* prompt_template = nullptr;  // null = builtin default
    std::map<std::string, std::string> decoding_params;
};

// N independent trials of the top-k task; parse failures retry up to the
// budget, then the trial is dropped and the denominator shrinks.
PolicyEstimate estimate_policy(Backend& backend, const DecisionState& state,
                               const ActionSpace& actions, const EstimateOptions& options);

nlohmann::json estimate_to_json(const PolicyEstimate& estimate);
PolicyEstimate estimate_from_json(const nlohmann::json& doc);
std::string persist_estimate(const PolicyEstimate& estimate, const std::string& dir);

}  // namespace lcprobe
