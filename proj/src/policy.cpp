#include "lcprobe/policy.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include "lcprobe/common.hpp"

namespace lcprobe {

using nlohmann::json;

void validate_policy(const Policy& policy, double tolerance) {
    double sum = 0.0;
    for (const auto& [name, p] : policy) {
        if (p < -tolerance || p > 1.0 + tolerance)
            throw ValidationError("policy: probability of '" + name + "' outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance)
        throw ValidationError("policy: probabilities sum to " + std::to_string(sum) +
                              ", expected 1");
}

// --- ActionSpace ---

std::string ActionSpace::normalize(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (unsigned char c : text)
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

ActionSpace ActionSpace::create(std::vector<Strategy> strategies) {
    if (strategies.empty()) throw ValidationError("action space: must be non-empty");
    ActionSpace space;
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        const auto& s = strategies[i];
        if (s.name.empty())
            throw ValidationError("strategies[" + std::to_string(i) + "].name: must be non-empty");
        const std::string norm = normalize(s.name);
        if (space.by_normalized_.count(norm))
            throw ValidationError("strategies[" + std::to_string(i) + "].name: duplicate name '" +
                                  s.name + "'");
        space.by_normalized_[norm] = s.name;
    }
    space.strategies_ = std::move(strategies);
    return space;
}

bool ActionSpace::contains(const std::string& name) const {
    auto it = by_normalized_.find(normalize(name));
    return it != by_normalized_.end() && it->second == name;
}

std::string ActionSpace::resolve(const std::string& token) const {
    auto it = by_normalized_.find(normalize(token));
    return it == by_normalized_.end() ? std::string() : it->second;
}

ActionSpace default_action_space() {
    return ActionSpace::create({
        {"Accessible Vocabulary and Syntax",
         "Use plain wording and short sentence structures so instructions and explanations are "
         "easy to follow."},
        {"Check-ins",
         "Pause regularly to ask how the learner is doing and adjust instruction accordingly."},
        {"Chunking",
         "Break content and tasks into small, manageable pieces presented one at a time."},
        {"Clear Structure and Presentation",
         "Organize material with explicit goals, ordered steps, and consistent formatting."},
        {"Competency-based Learning and Assessment",
         "Advance the learner by demonstrated mastery of specific skills rather than time "
         "spent."},
        {"Cultural and Life Experiences Connections",
         "Link new ideas to the learner's own background, culture, and everyday experiences."},
        {"Debriefing",
         "Review an activity afterwards to consolidate what was learned and what to improve."},
        {"Error Analysis",
         "Examine the learner's mistakes together to locate and correct the underlying "
         "misconception."},
        {"Explaining Their Thinking",
         "Prompt the learner to verbalize how they reached an answer to expose and refine their "
         "reasoning."},
        {"Explicit Instruction",
         "Teach skills directly with clear modeling, demonstration, and guided steps."},
        {"Foster Growth Mindset",
         "Frame ability as improvable and praise effort and strategy use over innate talent."},
        {"Goal Setting and Monitoring",
         "Help the learner set specific goals and track progress toward them."},
        {"Guided Practice",
         "Work through problems with the learner, gradually handing over responsibility."},
        {"Immediate Feedback",
         "Give corrective and affirming feedback right after each response or step."},
        {"Inquiry-based Learning",
         "Drive learning through questions the learner investigates rather than answers given "
         "up front."},
        {"Metaphors and Analogies",
         "Explain unfamiliar concepts through comparisons to familiar ones."},
        {"Mnemonic Device",
         "Provide memory aids such as acronyms or vivid associations for hard-to-retain facts."},
        {"Pairing Non-examples with Examples",
         "Contrast correct examples with near-miss non-examples to sharpen concept boundaries."},
        {"Problem-based Learning",
         "Anchor instruction in a rich, open problem the learner works to solve."},
        {"Real-world Math",
         "Connect abstract mathematical content to authentic real-life tasks and data."},
        {"Strengths-based Approach",
         "Build instruction on what the learner already does well."},
        {"Worked Examples",
         "Present fully worked solutions the learner studies before attempting similar "
         "problems."},
    });
}

ActionSpace load_action_catalog(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("action catalog " + path + ": " + e.what());
    }
    if (!doc.contains("strategies") || !doc["strategies"].is_array())
        throw ValidationError("action catalog " + path + ": missing 'strategies' array");
    std::vector<Strategy> strategies;
    for (std::size_t i = 0; i < doc["strategies"].size(); ++i) {
        const auto& js = doc["strategies"][i];
        Strategy s;
        if (!js.contains("name"))
            throw ValidationError("strategies[" + std::to_string(i) + "]: missing 'name'");
        s.name = js["name"].get<std::string>();
        s.definition = js.value("definition", std::string());
        strategies.push_back(std::move(s));
    }
    return ActionSpace::create(std::move(strategies));
}

// --- Decision state ---

DecisionState to_decision_state(const LearningContext& context) {
    DecisionState state;
    state.ref = context.context_id;
    for (const auto& c : context.characteristics) state.characteristics.push_back(c.text);
    state.objective = context.objective;
    return state;
}

DecisionState objective_only_state(const std::string& objective) {
    DecisionState state;
    state.ref = "objective-only";
    state.objective = objective;
    return state;
}

// --- Prompt ---

PromptTemplate default_prompt_template() {
    PromptTemplate t;
    t.text =
        "You are planning one-on-one instruction for a learner.\n"
        "\n"
        "{{STATE}}\n"
        "\n"
        "Available instructional strategies:\n"
        "{{ACTIONS}}\n"
        "\n"
        "From this list, select the {{K}} most critical strategies to prioritize in 1:1 "
        "instruction with this learner.\n"
        "Respond with a JSON array containing exactly {{K}} distinct strategy names copied "
        "verbatim from the list, and nothing else.\n";
    t.hash = sha256_hex(t.text);
    return t;
}

PromptTemplate load_prompt_template(const std::string& path) {
    PromptTemplate t;
    t.text = read_file(path);
    for (const char* placeholder : {"{{STATE}}", "{{ACTIONS}}", "{{K}}"})
        if (t.text.find(placeholder) == std::string::npos)
            throw ValidationError("prompt template " + path + ": missing placeholder " +
                                  placeholder);
    t.hash = sha256_hex(t.text);
    return t;
}

namespace {

std::string substitute_all(std::string text, const std::string& key, const std::string& value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos)) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render_state(const DecisionState& state) {
    std::string out;
    if (!state.characteristics.empty()) {
        out += "Learner profile:\n";
        for (const auto& c : state.characteristics) out += "- " + c + "\n";
    }
    out += "Learning objective: " + state.objective;
    return out;
}

}  // namespace

std::string build_prompt(const DecisionState& state, const ActionSpace& actions, int k,
                         const PromptTemplate& prompt_template) {
    if (k < 1 || static_cast<std::size_t>(k) > actions.size())
        throw ValidationError("build_prompt: k=" + std::to_string(k) +
                              " outside [1, " + std::to_string(actions.size()) + "]");
    if (state.objective.empty())
        throw ValidationError("build_prompt: state objective must be non-empty");

    std::string action_list;
    for (std::size_t i = 0; i < actions.strategies().size(); ++i) {
        const auto& s = actions.strategies()[i];
        action_list += std::to_string(i + 1) + ". " + s.name;
        if (!s.definition.empty()) action_list += ": " + s.definition;
        action_list += "\n";
    }
    if (!action_list.empty()) action_list.pop_back();

    std::string prompt = substitute_all(prompt_template.text, "{{STATE}}", render_state(state));
    prompt = substitute_all(prompt, "{{ACTIONS}}", action_list);
    prompt = substitute_all(prompt, "{{K}}", std::to_string(k));
    return prompt;
}

// --- Parsing ---

namespace {

std::vector<std::string> resolve_tokens(const std::vector<std::string>& tokens,
                                        const ActionSpace& actions, int k) {
    std::vector<std::string> names;
    std::set<std::string> seen;
    for (const auto& token : tokens) {
        const std::string canonical = actions.resolve(token);
        if (canonical.empty())
            throw ParseError("selection contains a name outside the action space: '" + token +
                             "'");
        if (!seen.insert(canonical).second)
            throw ParseError("duplicate selection: '" + canonical + "'");
        names.push_back(canonical);
    }
    if (static_cast<int>(names.size()) != k)
        throw ParseError("expected exactly " + std::to_string(k) + " selections, got " +
                         std::to_string(names.size()));
    return names;
}

}  // namespace

std::vector<std::string> parse_selection(const std::string& raw, const ActionSpace& actions,
                                         int k) {
    // primary path: first JSON array of strings in the output
    const auto open = raw.find('[');
    if (open != std::string::npos) {
        const auto close = raw.find(']', open);
        if (close != std::string::npos) {
            const json arr = json::parse(raw.substr(open, close - open + 1), nullptr, false);
            if (!arr.is_discarded() && arr.is_array()) {
                std::vector<std::string> tokens;
                bool all_strings = true;
                for (const auto& e : arr) {
                    if (!e.is_string()) {
                        all_strings = false;
                        break;
                    }
                    tokens.push_back(e.get<std::string>());
                }
                if (all_strings) return resolve_tokens(tokens, actions, k);
            }
        }
    }

    // fallback: scan lines for unique name matches
    std::vector<std::string> names;
    std::set<std::string> seen;
    std::istringstream in(raw);
    std::string line;
    while (std::getline(in, line)) {
        const std::string norm_line = ActionSpace::normalize(line);
        if (norm_line.empty()) continue;
        std::string matched;
        int matches = 0;
        for (const auto& s : actions.strategies()) {
            if (norm_line.find(ActionSpace::normalize(s.name)) != std::string::npos) {
                matched = s.name;
                ++matches;
            }
        }
        if (matches == 1 && seen.insert(matched).second) names.push_back(matched);
    }
    if (static_cast<int>(names.size()) != k)
        throw ParseError("could not resolve exactly " + std::to_string(k) +
                         " distinct strategy names from model output (got " +
                         std::to_string(names.size()) + ")");
    return names;
}

// --- Estimation ---

namespace {

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sanitize_ref(const std::string& ref) {
    std::string out;
    for (char c : ref)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ||
                              c == '_'
                          ? c
                          : '_');
    return out;
}

}  // namespace

PolicyEstimate estimate_policy(Backend& backend, const DecisionState& state,
                               const ActionSpace& actions, const EstimateOptions& options) {
    if (options.trials < 1) throw ValidationError("estimate_policy: trials must be >= 1");
    if (options.k < 1 || static_cast<std::size_t>(options.k) > actions.size())
        throw ValidationError("estimate_policy: k outside [1, |actions|]");
    if (options.parallelism < 1)
        throw ValidationError("estimate_policy: parallelism must be >= 1");
    if (options.retry_budget < 0)
        throw ValidationError("estimate_policy: retry_budget must be >= 0");

    const PromptTemplate prompt_template =
        options.prompt_template ? *options.prompt_template : default_prompt_template();
    const std::string prompt = build_prompt(state, actions, options.k, prompt_template);
    const std::string prompt_hash = sha256_hex(prompt);

    const int n = options.trials;
    std::vector<std::vector<std::string>> outcomes(static_cast<std::size_t>(n));
    std::vector<char> valid(static_cast<std::size_t>(n), 0);

    std::atomic<int> next{0};
    std::atomic<bool> aborted{false};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (int t = next.fetch_add(1); t < n && !aborted; t = next.fetch_add(1)) {
            for (int attempt = 0; attempt <= options.retry_budget; ++attempt) {
                CompletionRequest request;
                request.prompt = prompt;
                request.params = options.decoding_params;
                request.backend_id = backend.id();
                request.tag = state.ref + "#s" + std::to_string(options.seed) + "#t" +
                              std::to_string(t) + "#a" + std::to_string(attempt);
                try {
                    const std::string raw = backend.complete(request);
                    outcomes[static_cast<std::size_t>(t)] =
                        parse_selection(raw, actions, options.k);
                    valid[static_cast<std::size_t>(t)] = 1;
                    break;
                } catch (const ParseError& e) {
                    if (attempt == options.retry_budget)
                        log_warn("estimate_policy: trial " + std::to_string(t) +
                                 " dropped after retries: " + e.what());
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    aborted = true;
                    return;
                }
            }
        }
    };

    if (options.parallelism == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        const int thread_count = std::min(options.parallelism, n);
        pool.reserve(static_cast<std::size_t>(thread_count));
        for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    PolicyEstimate estimate;
    estimate.state_ref = state.ref;
    estimate.trials = n;
    estimate.k = options.k;
    estimate.backend_id = backend.id();
    estimate.prompt_hash = prompt_hash;
    estimate.template_hash = prompt_template.hash;
    estimate.seed = options.seed;
    estimate.timestamp = utc_timestamp();

    for (int t = 0; t < n; ++t) {
        if (!valid[static_cast<std::size_t>(t)]) continue;
        ++estimate.valid_trials;
        for (const auto& name : outcomes[static_cast<std::size_t>(t)])
            ++estimate.raw_counts[name];
    }
    if (estimate.valid_trials == 0)
        throw Error("estimate_policy: no valid trials for state '" + state.ref + "'");

    const int degraded_floor = (9 * n + 9) / 10;  // ceil(0.9 N)
    estimate.degraded = estimate.valid_trials < degraded_floor;
    if (estimate.degraded)
        log_warn("estimate_policy: estimate for '" + state.ref + "' degraded (" +
                 std::to_string(estimate.valid_trials) + "/" + std::to_string(n) +
                 " valid trials)");

    const double denom = static_cast<double>(estimate.valid_trials) * options.k;
    for (const auto& [name, count] : estimate.raw_counts)
        estimate.probabilities[name] = static_cast<double>(count) / denom;

    estimate.estimate_id = sanitize_ref(state.ref) + "-" + prompt_hash.substr(0, 8) + "-s" +
                           std::to_string(options.seed);

    if (!options.persist_dir.empty()) persist_estimate(estimate, options.persist_dir);
    return estimate;
}

json estimate_to_json(const PolicyEstimate& e) {
    json doc;
    doc["schema_version"] = 1;
    doc["state_ref"] = e.state_ref;
    doc["trials"] = e.trials;
    doc["valid_trials"] = e.valid_trials;
    doc["k"] = e.k;
    doc["degraded"] = e.degraded;
    doc["raw_counts"] = e.raw_counts;
    doc["probabilities"] = e.probabilities;
    doc["meta"] = json{{"estimate_id", e.estimate_id}, {"backend_id", e.backend_id},
                       {"prompt_hash", e.prompt_hash},  {"template_hash", e.template_hash},
                       {"seed", e.seed},                {"timestamp", e.timestamp}};
    return doc;
}

PolicyEstimate estimate_from_json(const json& doc) {
    PolicyEstimate e;
    e.state_ref = doc.at("state_ref").get<std::string>();
    e.trials = doc.at("trials").get<int>();
    e.valid_trials = doc.at("valid_trials").get<int>();
    e.k = doc.at("k").get<int>();
    e.degraded = doc.value("degraded", false);
    for (auto it = doc.at("raw_counts").begin(); it != doc.at("raw_counts").end(); ++it)
        e.raw_counts[it.key()] = it.value().get<int>();
    for (auto it = doc.at("probabilities").begin(); it != doc.at("probabilities").end(); ++it)
        e.probabilities[it.key()] = it.value().get<double>();
    if (doc.contains("meta")) {
        const auto& m = doc["meta"];
        e.estimate_id = m.value("estimate_id", std::string());
        e.backend_id = m.value("backend_id", std::string());
        e.prompt_hash = m.value("prompt_hash", std::string());
        e.template_hash = m.value("template_hash", std::string());
        e.seed = m.value("seed", uint64_t{0});
        e.timestamp = m.value("timestamp", std::string());
    }
    return e;
}

std::string persist_estimate(const PolicyEstimate& estimate, const std::string& dir) {
    const auto path =
        (std::filesystem::path(dir) / (estimate.estimate_id + ".json")).string();
    write_file(path, estimate_to_json(estimate).dump(2) + "\n");
    return path;
}

}  // namespace lcprobe
