#include "lcprobe/context.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "lcprobe/common.hpp"

namespace lcprobe {

using nlohmann::json;

// --- Banding ---

ScoreBand band_for_score(double score, const ConstructSpec& construct) {
    const double z = (score - construct.mean) / construct.sd;
    if (z < -1.5) return ScoreBand::very_low;
    if (z < -0.5) return ScoreBand::low;
    if (z < 0.5) return ScoreBand::moderate;
    if (z < 1.5) return ScoreBand::high;
    return ScoreBand::very_high;
}

std::string band_label(ScoreBand band) {
    switch (band) {
        case ScoreBand::very_low: return "very low";
        case ScoreBand::low: return "low";
        case ScoreBand::moderate: return "moderate";
        case ScoreBand::high: return "high";
        case ScoreBand::very_high: return "very high";
    }
    return "moderate";
}

std::pair<std::string, std::string> band_adverbs(ScoreBand band) {
    switch (band) {
        case ScoreBand::very_low: return {"rarely", "slightly"};
        case ScoreBand::low: return {"occasionally", "somewhat"};
        case ScoreBand::moderate: return {"sometimes", "moderately"};
        case ScoreBand::high: return {"often", "considerably"};
        case ScoreBand::very_high: return {"frequently", "strongly"};
    }
    return {"sometimes", "moderately"};
}

// --- Template renderer ---

namespace {

const std::set<std::string>& stative_verbs() {
    // verbs that take the degree adverb ("strongly believes") rather than the
    // frequency adverb ("frequently has")
    static const std::set<std::string> verbs = {
        "believe", "think", "feel", "like", "love", "prefer", "want",
        "expect",  "enjoy", "agree", "value", "trust", "hope", "care"};
    return verbs;
}

std::string third_person_verb(const std::string& verb) {
    static const std::map<std::string, std::string> irregular = {
        {"have", "has"}, {"am", "is"}, {"do", "does"}, {"go", "goes"}};
    if (auto it = irregular.find(verb); it != irregular.end()) return it->second;
    const auto n = verb.size();
    if (n >= 2 && verb[n - 1] == 'y' &&
        std::string("aeiou").find(verb[n - 2]) == std::string::npos)
        return verb.substr(0, n - 1) + "ies";
    if (verb.ends_with("s") || verb.ends_with("x") || verb.ends_with("z") ||
        verb.ends_with("ch") || verb.ends_with("sh") || verb.ends_with("o"))
        return verb + "es";
    return verb + "s";
}

// first-person -> third-person token map for the remainder of the sentence
std::string swap_pronouns(const std::string& text) {
    static const std::map<std::string, std::string> map = {
        {"I", "they"},       {"I'm", "they're"},   {"I've", "they've"},
        {"I'll", "they'll"}, {"my", "their"},      {"My", "Their"},
        {"me", "them"},      {"myself", "themselves"}, {"mine", "theirs"},
        {"am", "are"}};
    std::ostringstream out;
    std::istringstream in(text);
    std::string token;
    bool first = true;
    while (in >> token) {
        std::size_t start = 0, end = token.size();
        while (start < end && !std::isalnum(static_cast<unsigned char>(token[start])) &&
               token[start] != '\'')
            ++start;
        while (end > start && !std::isalnum(static_cast<unsigned char>(token[end - 1])))
            --end;
        const std::string core = token.substr(start, end - start);
        std::string replaced = token;
        if (auto it = map.find(core); it != map.end())
            replaced = token.substr(0, start) + it->second + token.substr(end);
        if (!first) out << ' ';
        out << replaced;
        first = false;
    }
    return out.str();
}

}  // namespace

std::string TemplateRenderer::render(const ItemSpec& item, ScoreBand band) {
    const auto [freq_adverb, degree_adverb] = band_adverbs(band);
    std::string statement = item.statement;
    while (!statement.empty() && (statement.back() == '.' || statement.back() == ' '))
        statement.pop_back();

    if (!statement.starts_with("I ")) {
        // statements are expected in first person; degrade gracefully
        log_warn("template renderer: statement for item '" + item.id +
                 "' does not start with 'I '; using generic phrasing");
        return "The learner " + freq_adverb + " endorses the statement \"" + statement + "\".";
    }

    const std::string rest = statement.substr(2);
    const auto verb_end = rest.find(' ');
    const std::string verb = verb_end == std::string::npos ? rest : rest.substr(0, verb_end);
    const std::string remainder =
        verb_end == std::string::npos ? std::string() : rest.substr(verb_end + 1);

    const std::string adverb = stative_verbs().count(verb) ? degree_adverb : freq_adverb;
    std::string sentence = "The learner " + adverb + " " + third_person_verb(verb);
    if (!remainder.empty()) sentence += " " + swap_pronouns(remainder);
    sentence += ".";
    return sentence;
}

// --- LLM renderer ---

LlmRenderer::LlmRenderer(Backend& backend, std::string prompt_template, int retries)
    : backend_(backend), prompt_template_(std::move(prompt_template)), retries_(retries) {
    if (prompt_template_.empty()) prompt_template_ = default_prompt_template();
}

std::string LlmRenderer::default_prompt_template() {
    return "Rewrite the questionnaire statement below as one third-person sentence about "
           "\"the learner\", expressing that it applies to a \"{{BAND}}\" degree.\n"
           "Only re-express the statement. Do not add any information that is not in it, "
           "and do not mention numbers, scores, or scales.\n"
           "Statement: \"{{STATEMENT}}\"\n"
           "Respond with the rewritten sentence and nothing else.\n";
}

namespace {

std::string substitute(std::string text, const std::string& key, const std::string& value) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos))
        text.replace(pos, key.size(), value), pos += value.size();
    return text;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

bool acceptable_rendering(const std::string& text) {
    if (text.empty()) return false;
    if (text.find('\n') != std::string::npos) return false;
    // bands only, never the numeric score
    return std::none_of(text.begin(), text.end(),
                        [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

std::string LlmRenderer::render(const ItemSpec& item, ScoreBand band) {
    std::string prompt = substitute(prompt_template_, "{{STATEMENT}}", item.statement);
    prompt = substitute(prompt, "{{BAND}}", band_label(band));

    CompletionRequest request;
    request.prompt = prompt;
    request.backend_id = backend_.id();

    for (int attempt = 0; attempt <= retries_; ++attempt) {
        request.tag = "render:" + item.id + "#a" + std::to_string(attempt);
        try {
            const std::string reply = trim(backend_.complete(request));
            if (acceptable_rendering(reply)) return reply;
            log_warn("llm renderer: rejected rendering for item '" + item.id + "' (attempt " +
                     std::to_string(attempt) + ")");
        } catch (const Error& e) {
            log_warn("llm renderer: backend failure for item '" + item.id + "': " + e.what());
        }
    }
    log_warn("llm renderer: falling back to template renderer for item '" + item.id + "'");
    return fallback_.render(item, band);
}

// --- Operations ---

std::map<std::string, std::string> select_marker_items(const PsychometricModel& model) {
    std::map<std::string, std::string> marker;
    std::map<std::string, double> best;
    for (const auto& item : model.items()) {
        auto it = best.find(item.construct);
        if (it == best.end() || item.loading > it->second) {
            best[item.construct] = item.loading;
            marker[item.construct] = item.id;
        } else if (item.loading == it->second) {
            log_info("marker selection: loading tie on construct '" + item.construct +
                     "'; keeping earliest item '" + marker[item.construct] + "'");
        }
    }
    return marker;
}

Characteristic render_characteristic(const ItemSpec& item, double score,
                                     const ConstructSpec& construct, TextRenderer& renderer) {
    if (!std::isfinite(score)) throw ValidationError("render_characteristic: score must be finite");
    Characteristic c;
    c.construct_id = construct.id;
    c.source_item_id = item.id;
    c.score = score;
    c.text = renderer.render(item, band_for_score(score, construct));
    return c;
}

LearningContext assemble_context(const LearnerProfile& profile, const PsychometricModel& model,
                                 const std::string& objective, const AssembleOptions& options) {
    if (objective.empty()) throw ValidationError("assemble_context: objective must be non-empty");
    if (options.context_id.empty())
        throw ValidationError("assemble_context: context_id must be set");

    std::vector<std::string> constructs;
    if (options.constructs.has_value()) {
        constructs = *options.constructs;
    } else {
        for (const auto& c : model.constructs()) constructs.push_back(c.id);
    }
    for (const auto& id : constructs)
        model.construct_index(id);  // throws on unknown construct

    {
        std::set<std::string> seen;
        for (const auto& text : options.nulls)
            if (!seen.insert(text).second)
                throw ValidationError("assemble_context: duplicate null text: \"" + text + "\"");
    }

    TemplateRenderer builtin;
    TextRenderer& renderer = options.renderer ? *options.renderer : builtin;

    const auto markers = select_marker_items(model);
    std::vector<Characteristic> characteristics;
    for (const auto& construct_id : constructs) {
        const auto& item = model.item(markers.at(construct_id));
        const auto score_it = profile.construct_scores.find(construct_id);
        if (score_it == profile.construct_scores.end())
            throw ValidationError("assemble_context: profile lacks construct '" + construct_id +
                                  "'");
        characteristics.push_back(render_characteristic(item, score_it->second,
                                                        model.construct(construct_id), renderer));
    }

    // interleave nulls at seeded-random positions, in seeded-shuffled order
    Rng rng(mix_seed({options.seed, fnv1a64("null-interleave")}));
    std::vector<std::string> nulls = options.nulls;
    for (std::size_t i = nulls.size(); i > 1; --i)
        std::swap(nulls[i - 1], nulls[rng.index(i)]);
    for (const auto& text : nulls) {
        Characteristic c;
        c.text = text;
        const std::size_t pos = rng.index(characteristics.size() + 1);
        characteristics.insert(characteristics.begin() + static_cast<std::ptrdiff_t>(pos), c);
    }

    {
        std::set<std::string> seen;
        for (const auto& c : characteristics)
            if (!seen.insert(c.text).second)
                throw ValidationError("assemble_context: duplicate characteristic text: \"" +
                                      c.text + "\"");
    }

    LearningContext context;
    context.context_id = options.context_id;
    context.characteristics = std::move(characteristics);
    context.objective = objective;
    context.provenance = {profile.profile_id, renderer.id(), options.seed};
    return context;
}

LearningContext omit_characteristic(const LearningContext& context, std::size_t index) {
    if (index >= context.characteristics.size())
        throw ValidationError("omit_characteristic: index " + std::to_string(index) +
                              " out of range (size " +
                              std::to_string(context.characteristics.size()) + ")");
    LearningContext out = context;
    out.context_id = context.context_id + ":-" + std::to_string(index);
    out.characteristics.erase(out.characteristics.begin() + static_cast<std::ptrdiff_t>(index));
    return out;
}

// --- Null catalog ---

const std::vector<NullCharacteristic>& null_characteristic_catalog() {
    static const std::vector<NullCharacteristic> catalog = {
        {"null-1", "The learner has two siblings."},
        {"null-2", "The learner prefers physical books over digital ones."},
        {"null-3", "The learner enjoys crossword puzzles."},
        {"null-4", "The learner has a pet cat."},
        {"null-5", "The learner usually commutes to campus by bus."},
        {"null-6", "The learner's favorite color is green."},
        {"null-7", "The learner enjoys hiking on weekends."},
        {"null-8", "The learner was born in April."},
    };
    return catalog;
}

// --- Archive IO ---

json context_to_json(const LearningContext& context) {
    json doc;
    doc["schema_version"] = 1;
    doc["context_id"] = context.context_id;
    doc["objective"] = context.objective;
    json chars = json::array();
    for (const auto& c : context.characteristics) {
        json jc;
        jc["text"] = c.text;
        if (c.construct_id) jc["construct_id"] = *c.construct_id;
        if (c.source_item_id) jc["source_item_id"] = *c.source_item_id;
        if (c.score) jc["score"] = *c.score;
        chars.push_back(std::move(jc));
    }
    doc["characteristics"] = std::move(chars);
    doc["provenance"] = json{{"profile_id", context.provenance.profile_id},
                             {"renderer_id", context.provenance.renderer_id},
                             {"seed", context.provenance.seed}};
    return doc;
}

LearningContext context_from_json(const json& doc) {
    LearningContext context;
    context.context_id = doc.at("context_id").get<std::string>();
    context.objective = doc.at("objective").get<std::string>();
    for (const auto& jc : doc.at("characteristics")) {
        Characteristic c;
        c.text = jc.at("text").get<std::string>();
        if (jc.contains("construct_id")) c.construct_id = jc["construct_id"].get<std::string>();
        if (jc.contains("source_item_id"))
            c.source_item_id = jc["source_item_id"].get<std::string>();
        if (jc.contains("score")) c.score = jc["score"].get<double>();
        context.characteristics.push_back(std::move(c));
    }
    if (doc.contains("provenance")) {
        const auto& p = doc["provenance"];
        context.provenance.profile_id = p.value("profile_id", std::string());
        context.provenance.renderer_id = p.value("renderer_id", std::string());
        context.provenance.seed = p.value("seed", uint64_t{0});
    }
    return context;
}

void write_context_archive(const std::string& path,
                           const std::vector<LearningContext>& contexts) {
    std::string out;
    for (const auto& c : contexts) out += context_to_json(c).dump() + "\n";
    write_file(path, out);
}

std::vector<LearningContext> read_context_archive(const std::string& path) {
    std::vector<LearningContext> contexts;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded())
            throw ValidationError("context archive " + path + ": bad JSON at line " +
                                  std::to_string(line_no));
        contexts.push_back(context_from_json(doc));
    }
    return contexts;
}

json profile_to_json(const LearnerProfile& profile) {
    json doc;
    doc["schema_version"] = 1;
    doc["profile_id"] = profile.profile_id;
    doc["seed"] = profile.seed;
    doc["construct_scores"] = profile.construct_scores;
    json responses;
    for (const auto& [id, r] : profile.item_responses)
        responses[id] = json{{"raw", r.raw}, {"clamped", r.clamped}};
    doc["item_responses"] = std::move(responses);
    return doc;
}

LearnerProfile profile_from_json(const json& doc) {
    LearnerProfile profile;
    profile.profile_id = doc.at("profile_id").get<std::string>();
    profile.seed = doc.value("seed", uint64_t{0});
    for (auto it = doc.at("construct_scores").begin(); it != doc.at("construct_scores").end();
         ++it)
        profile.construct_scores[it.key()] = it.value().get<double>();
    for (auto it = doc.at("item_responses").begin(); it != doc.at("item_responses").end(); ++it)
        profile.item_responses[it.key()] = {it.value().at("raw").get<double>(),
                                            it.value().at("clamped").get<double>()};
    return profile;
}

void write_profile_archive(const std::string& path,
                           const std::vector<LearnerProfile>& profiles) {
    std::string out;
    for (const auto& p : profiles) out += profile_to_json(p).dump() + "\n";
    write_file(path, out);
}

std::vector<LearnerProfile> read_profile_archive(const std::string& path) {
    std::vector<LearnerProfile> profiles;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc = json::parse(line, nullptr, false);
        if (doc.is_discarded())
            throw ValidationError("profile archive " + path + ": bad JSON at line " +
                                  std::to_string(line_no));
        profiles.push_back(profile_from_json(doc));
    }
    return profiles;
}

}  // namespace lcprobe
