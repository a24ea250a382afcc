// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lcprobe/common.hpp"
#include "lcprobe/context.hpp"
#include "lcprobe/expert.hpp"
#include "lcprobe/metrics.hpp"
#include "lcprobe/policy.hpp"
#include "lcprobe/psychometric.hpp"
#include "lcprobe/runner.hpp"

#include "json.hpp"
#include "oracles.hpp"

using namespace lcprobe;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& message) {
        if (!condition) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += message;
        }
    }
    void note(const std::string& message) {
        if (!detail.empty()) detail += "; ";
        detail += message;
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const std::string kAssetDir = LCPROBE_ASSET_DIR;

struct WorkDir {
    WorkDir() {
        path = (fs::temp_directory_path() / "lcprobe_acceptance").string();
        fs::remove_all(path);
        fs::create_directories(path);
    }
    std::string path;
};

// trial-indexed scripted responses, for exact-arithmetic criteria
class SequenceBackend : public Backend {
public:
    explicit SequenceBackend(std::vector<std::string> by_trial)
        : by_trial_(std::move(by_trial)) {}
    std::string id() const override { return "sequence"; }
    std::string complete(const CompletionRequest& request) override {
        const auto pos = request.tag.rfind("#t");
        std::size_t trial = 0;
        for (std::size_t i = pos + 2;
             i < request.tag.size() && isdigit((unsigned char)request.tag[i]); ++i)
            trial = trial * 10 + static_cast<std::size_t>(request.tag[i] - '0');
        return by_trial_.at(trial % by_trial_.size());
    }

private:
    std::vector<std::string> by_trial_;
};

Policy random_policy(Rng& rng, const std::vector<std::string>& support) {
    Policy p;
    std::vector<double> raw;
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        raw.push_back(-std::log(rng.uniform_pos()));
        total += raw.back();
    }
    for (std::size_t i = 0; i < support.size(); ++i) p[support[i]] = raw[i] / total;
    return p;
}

std::map<std::string, double> weight_map(const std::vector<std::string>& names,
                                         const std::vector<double>& weights) {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = weights[i];
    return out;
}

LearningContext stress_context(const PsychometricModel& model, uint64_t seed) {
    const auto profile = sample_profile(model, "profile-acc", seed, 0);
    AssembleOptions options;
    options.context_id = "context-acc";
    options.seed = seed;
    for (const auto& n : null_characteristic_catalog()) options.nulls.push_back(n.text);
    return assemble_context(
        profile, model,
        "The learner wants to practice using the Fundamental Theorem of Calculus to evaluate "
        "definite integrals.",
        options);
}

// --- criteria ---

Check criterion_1_generator_moments() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const auto model = load_model(kAssetDir + "/mslq_statistics.json");
    const std::size_t n = 50000;
    const auto samples = sample_constructs(model, 20240801, n);
    const std::size_t dim = model.constructs().size();

    std::vector<double> mean(dim, 0.0);
    for (const auto& row : samples)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += row[j];
    for (auto& m : mean) m /= static_cast<double>(n);

    double worst_mean = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        const auto& c = model.constructs()[j];
        const double err = std::abs(mean[j] - c.mean) / c.sd;
        worst_mean = std::max(worst_mean, err);
        check.require(err <= 0.02, "mean of " + c.id + " off by " + fmt(err) + " sd");
    }

    std::vector<double> sd(dim, 0.0);
    for (const auto& row : samples)
        for (std::size_t j = 0; j < dim; ++j)
            sd[j] += (row[j] - mean[j]) * (row[j] - mean[j]);
    for (auto& v : sd) v = std::sqrt(v / static_cast<double>(n));

    double worst_corr = 0.0;
    for (std::size_t a = 0; a < dim; ++a) {
        for (std::size_t b = a + 1; b < dim; ++b) {
            double cov = 0.0;
            for (const auto& row : samples) cov += (row[a] - mean[a]) * (row[b] - mean[b]);
            cov /= static_cast<double>(n);
            const double corr = cov / (sd[a] * sd[b]);
            const double err = std::abs(corr - model.correlation()(a, b));
            worst_corr = std::max(worst_corr, err);
            check.require(err <= 0.03, "corr(" + model.constructs()[a].id + "," +
                                           model.constructs()[b].id + ") off by " + fmt(err));
        }
    }

    const double elapsed = seconds_since(start);
    check.require(elapsed < 60.0, "runtime " + fmt(elapsed) + "s exceeds 60s");
    check.note("max mean err " + fmt(worst_mean) + " sd, max corr err " + fmt(worst_corr) +
               ", " + fmt(elapsed) + "s");
    return check;
}

Check criterion_2_factor_structure() {
    Check check;
    const auto model = load_model(kAssetDir + "/mslq_statistics.json");
    const std::size_t n = 50000;
    const auto zs = sample_constructs(model, 20240802, n);

    std::vector<std::map<std::string, ItemResponse>> responses(n);
    for (std::size_t p = 0; p < n; ++p)
        responses[p] = sample_items(model, zs[p], mix_seed({20240802, 0xACC, p}));

    double worst = 0.0;
    for (const auto& item : model.items()) {
        const std::size_t ci = model.construct_index(item.construct);
        std::vector<double> z_col(n), x_col(n);
        for (std::size_t p = 0; p < n; ++p) {
            z_col[p] = zs[p][ci];
            x_col[p] = responses[p].at(item.id).raw;
        }
        const double corr = oracle::pearson_corr(z_col, x_col);
        const double err = std::abs(corr - item.loading);
        worst = std::max(worst, err);
        check.require(err <= 0.03,
                      "corr(raw " + item.id + ", z) off by " + fmt(err) + " from loading");
    }

    // loading-1 items reproduce the construct score bitwise
    const auto unit_model = PsychometricModel::create(
        {{"c", "C", 4.0, 1.3}}, Matrix::identity(1),
        {{"exact", "c", 1.0, "I check my answers."}});
    bool exact = true;
    for (std::size_t p = 0; p < 200; ++p) {
        const auto z = sample_constructs(unit_model, 9 + p, 1);
        const auto r = sample_items(unit_model, z[0], 77 + p);
        exact = exact && (r.at("exact").raw == z[0][0]);
    }
    check.require(exact, "loading-1 item failed to reproduce z bitwise");
    check.note("max loading err " + fmt(worst));
    return check;
}

Check criterion_3_tvd_suite() {
    Check check;
    const auto actions = default_action_space();
    std::vector<std::string> support;
    for (const auto& s : actions.strategies()) support.push_back(s.name);

    Rng rng(20240803);
    double worst_triangle = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const auto p = random_policy(rng, support);
        const auto q = random_policy(rng, support);
        const auto r = random_policy(rng, support);
        const double pq = tvd(p, q);
        check.require(pq == tvd(q, p), "symmetry violated");
        check.require(pq >= 0.0 && pq <= 1.0, "range violated");
        check.require(tvd(p, p) == 0.0, "identity violated");
        const double slack = tvd(p, r) + tvd(r, q) - pq;
        worst_triangle = std::min(worst_triangle, slack);
        check.require(slack >= -1e-12, "triangle inequality violated by " + fmt(-slack));
        if (!check.pass) break;
    }

    const Policy a = {{"A", 0.5}, {"B", 0.5}, {"C", 0.0}};
    const Policy b = {{"A", 0.25}, {"B", 0.25}, {"C", 0.5}};
    check.require(tvd(a, b) == 0.5, "hand case (0.5,0.5,0) vs (0.25,0.25,0.5) != 0.5");
    check.note("10000 triples over 22 actions, min triangle slack " + fmt(worst_triangle));
    return check;
}

const std::vector<std::string> kEight = {"Worked Examples",  "Guided Practice",
                                         "Check-ins",        "Chunking",
                                         "Goal Setting and Monitoring", "Real-world Math",
                                         "Error Analysis",   "Debriefing"};

Check criterion_4_estimator_consistency() {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    const std::vector<double> weights = {6.0, 4.0, 3.0, 2.0, 2.0, 1.0, 1.0, 0.5};

    ScriptedLaw law;
    law.k = 5;
    law.seed = 20240804;
    law.entries.push_back({"*", weight_map(kEight, weights)});
    ScriptedBackend backend(law);

    const auto actions = default_action_space();
    DecisionState state = objective_only_state("practice definite integrals");

    const auto oracle_policy = oracle::marginal_policy(kEight, weights, 5);
    for (const auto& [trials, bound] : std::vector<std::pair<int, double>>{{1000, 0.05},
                                                                           {10000, 0.02}}) {
        EstimateOptions options;
        options.trials = trials;
        options.k = 5;
        const auto estimate = estimate_policy(backend, state, actions, options);
        const double distance = oracle::policy_tvd(estimate.probabilities, oracle_policy);
        check.require(distance <= bound, "TVD to oracle marginal " + fmt(distance) + " > " +
                                             fmt(bound) + " at N=" + std::to_string(trials));
        check.note("N=" + std::to_string(trials) + " TVD " + fmt(distance));
    }

    const double elapsed = seconds_since(start);
    check.require(elapsed < 30.0, "runtime " + fmt(elapsed) + "s exceeds 30s");
    check.note(fmt(elapsed) + "s");
    return check;
}

Check criterion_5_estimation_arithmetic() {
    Check check;
    SequenceBackend backend({R"(["Worked Examples","Guided Practice"])",
                             R"(["Worked Examples","Check-ins"])"});
    EstimateOptions options;
    options.trials = 2;
    options.k = 2;
    const auto estimate = estimate_policy(
        backend, objective_only_state("objective"), default_action_space(), options);
    check.require(estimate.probabilities.at("Worked Examples") == 0.5,
                  "P(A) != 0.5 exactly");
    check.require(estimate.probabilities.at("Guided Practice") == 0.25,
                  "P(B) != 0.25 exactly");
    check.require(estimate.probabilities.at("Check-ins") == 0.25, "P(C) != 0.25 exactly");
    check.require(estimate.probabilities.size() == 3, "support leaked beyond {A,B,C}");
    check.note("counts (2,1,1) over 4 selections");
    return check;
}

Check criterion_6_krippendorff() {
    Check check;
    const double nan = std::nan("");

    const std::vector<std::vector<double>> perfect = {{1, 1}, {2, 2}, {3, 3}, {1, 1}};
    check.require(krippendorff_alpha(perfect, AlphaMetric::nominal) == 1.0,
                  "perfect agreement != 1.0");

    const std::vector<std::vector<double>> fixture = {{1, 1}, {2, 2}, {3, 3}, {3, 3}, {2, 2},
                                                      {1, 3}, {4, 4}, {1, 1}, {2, 2},
                                                      {nan, 5}};
    const double impl_nominal = krippendorff_alpha(fixture, AlphaMetric::nominal);
    const double oracle_nominal = oracle::krippendorff_alpha(fixture, false);
    check.require(std::abs(impl_nominal - oracle_nominal) <= 1e-6,
                  "fixture nominal differs from oracle by " +
                      fmt(std::abs(impl_nominal - oracle_nominal)));
    const double impl_ordinal = krippendorff_alpha(fixture, AlphaMetric::ordinal);
    const double oracle_ordinal = oracle::krippendorff_alpha(fixture, true);
    check.require(std::abs(impl_ordinal - oracle_ordinal) <= 1e-6,
                  "fixture ordinal differs from oracle by " +
                      fmt(std::abs(impl_ordinal - oracle_ordinal)));

    Rng rng(20240806);
    std::vector<std::vector<double>> random_units(5000);
    for (auto& unit : random_units)
        unit = {static_cast<double>(rng.index(4)), static_cast<double>(rng.index(4))};
    const double random_alpha = krippendorff_alpha(random_units, AlphaMetric::nominal);
    check.require(std::abs(random_alpha) <= 0.05,
                  "independent labels alpha " + fmt(random_alpha) + " outside +-0.05");

    check.note("fixture nominal " + fmt(impl_nominal) + ", ordinal " + fmt(impl_ordinal) +
               ", random " + fmt(random_alpha));
    return check;
}

Check criterion_7_influence_null() {
    Check check;
    const auto model = load_model(kAssetDir + "/mslq_statistics.json");
    const auto context = stress_context(model, 20240807);
    check.require(context.characteristics.size() == 23, "stress context is not 23-long");
    const auto actions = default_action_space();
    const std::vector<double> weights = {5, 4, 3, 2, 2, 1, 1, 0.5};

    // deterministic state-independent law: streams keyed by (entry, trial)
    {
        ScriptedLaw law;
        law.k = 5;
        law.seed = 7;
        law.entries.push_back({"*", weight_map(kEight, weights)});
        ScriptedBackend backend(law);
        double worst = 0.0;
        for (std::size_t i = 0; i < context.characteristics.size(); ++i) {
            InfluenceOptions options;
            options.trials = 200;
            options.k = 5;
            options.seed = i;
            const auto result = influence(backend, context, i, actions, options);
            worst = std::max(worst, result.influence);
        }
        check.require(worst == 0.0,
                      "deterministic backend influence not exactly 0 (max " + fmt(worst) + ")");
        check.note("deterministic max influence " + fmt(worst));
    }

    // stochastic state-independent law at N=1000
    {
        ScriptedLaw law;
        law.k = 5;
        law.seed = 7;
        law.stream_by_prompt = true;
        law.entries.push_back({"*", weight_map(kEight, weights)});
        ScriptedBackend backend(law);
        double worst = 0.0;
        for (std::size_t i = 0; i < context.characteristics.size(); ++i) {
            InfluenceOptions options;
            options.trials = 1000;
            options.k = 5;
            options.seed = i;
            const auto result = influence(backend, context, i, actions, options);
            worst = std::max(worst, result.influence);
        }
        check.require(worst <= 0.05,
                      "stochastic backend influence " + fmt(worst) + " exceeds 0.05");
        check.note("stochastic max influence " + fmt(worst));
    }
    return check;
}

Check criterion_8_planted_effect() {
    Check check;
    const auto model = load_model(kAssetDir + "/mslq_statistics.json");
    const auto context = stress_context(model, 20240808);
    const auto actions = default_action_space();

    // plant on the test-anxiety characteristic; shipped relevance (5,4) -> 4.5
    const std::string needle = "uneasy, upset feeling";
    std::size_t planted = context.characteristics.size();
    for (std::size_t i = 0; i < context.characteristics.size(); ++i)
        if (context.characteristics[i].text.find(needle) != std::string::npos) planted = i;
    check.require(planted < context.characteristics.size(),
                  "test-anxiety characteristic not found in the stress context");
    if (!check.pass) return check;

    const std::vector<double> base = {1, 1, 1, 1, 1, 0, 0, 0};
    const std::vector<double> shifted = {1.7, 1.7, 1.7, 1.7, 1.7, 1, 1, 1};
    const double oracle_gap = oracle::policy_tvd(oracle::marginal_policy(kEight, base, 5),
                                                 oracle::marginal_policy(kEight, shifted, 5));

    ScriptedLaw law;
    law.k = 5;
    law.seed = 20240808;
    law.entries.push_back({needle, weight_map(kEight, shifted)});
    law.entries.push_back({"*", weight_map(kEight, base)});
    ScriptedBackend backend(law);

    std::vector<double> influences;
    bool planted_within_tolerance = false;
    double planted_influence = 0.0;
    for (std::size_t i = 0; i < context.characteristics.size(); ++i) {
        InfluenceOptions options;
        options.trials = 1000;
        options.k = 5;
        options.seed = i;
        const auto result = influence(backend, context, i, actions, options);
        influences.push_back(result.influence);
        if (i == planted) {
            planted_influence = result.influence;
            planted_within_tolerance = std::abs(result.influence - oracle_gap) <= 0.05;
        }
    }
    check.require(planted_within_tolerance,
                  "planted influence " + fmt(planted_influence) + " not within 0.05 of oracle "
                  "gap " + fmt(oracle_gap));

    const auto annotations =
        load_annotations(kAssetDir + "/example_annotations.json", actions);
    const auto relevance = relevance_scores(annotations);
    const double planted_relevance = relevance.at("ta");
    check.require(planted_relevance >= 3.0, "relevance fixture for the planted characteristic "
                                            "is below 3");
    const double threshold = median(influences);
    const auto quadrant =
        quadrant_classify(planted_relevance, planted_influence, threshold, 3.0);
    check.require(quadrant == Quadrant::aligned,
                  "planted characteristic classified " + to_string(quadrant) + ", not aligned");
    check.note("oracle gap " + fmt(oracle_gap) + ", measured " + fmt(planted_influence) +
               ", relevance " + fmt(planted_relevance));
    return check;
}

// shared scaffolding for criteria 9, 10 and 12
struct CompareFixture {
    std::string dir;
    json config;          // expert-mixing intervention backend
    json blind_config;    // context-blind backend
    Policy expert_policy;
    std::set<std::string> expert_support;
};

CompareFixture build_compare_fixture(const WorkDir& work) {
    CompareFixture fx;
    fx.dir = work.path + "/criterion9";
    fs::create_directories(fx.dir);

    const auto actions = default_action_space();
    const auto annotations =
        load_annotations(kAssetDir + "/example_annotations.json", actions);
    const auto model = load_model(kAssetDir + "/mslq_statistics.json");

    std::vector<std::string> first_five;
    for (const auto& c : model.constructs()) {
        first_five.push_back(c.id);
        if (first_five.size() == 5) break;
    }
    fx.expert_policy = aggregate_expert_policy(annotations, first_five);
    for (const auto& [name, mass] : fx.expert_policy) fx.expert_support.insert(name);

    // base law: concentrated on procedural strategies
    const std::map<std::string, double> base_weights = {
        {"Worked Examples", 8.0},          {"Guided Practice", 6.0},
        {"Explicit Instruction", 5.0},     {"Chunking", 4.0},
        {"Immediate Feedback", 3.0},       {"Clear Structure and Presentation", 2.0},
        {"Error Analysis", 1.0},           {"Mnemonic Device", 1.0}};
    double base_total = 0.0;
    for (const auto& [name, w] : base_weights) base_total += w;

    // intervention law: 30% expert policy mixed in when a learner profile is present
    std::map<std::string, double> mixed_weights;
    for (const auto& [name, w] : base_weights) mixed_weights[name] += 0.7 * w / base_total;
    for (const auto& [name, mass] : fx.expert_policy) mixed_weights[name] += 0.3 * mass;

    json law;
    law["schema_version"] = 1;
    law["k"] = 5;
    law["seed"] = 909;
    law["stream_by_prompt"] = true;
    law["entries"] = json::array(
        {json{{"key", "Learner profile:"}, {"weights", mixed_weights}},
         json{{"key", "*"}, {"weights", base_weights}}});
    write_file(fx.dir + "/law_mixed.json", law.dump(2));

    // blind law support straddles the expert support so each deviation carries
    // genuine sampling noise (a non-overlapping law saturates the TVD and the
    // null effect would hold exactly instead of statistically)
    const std::map<std::string, double> blind_weights = {
        {"Worked Examples", 6.0},      {"Guided Practice", 5.0},
        {"Explicit Instruction", 4.0}, {"Chunking", 3.0},
        {"Immediate Feedback", 3.0},   {"Check-ins", 3.0},
        {"Goal Setting and Monitoring", 3.0}, {"Foster Growth Mindset", 2.0},
        {"Strengths-based Approach", 2.0},    {"Clear Structure and Presentation", 2.0},
        {"Real-world Math", 1.0},      {"Error Analysis", 1.0}};
    json blind_law;
    blind_law["schema_version"] = 1;
    blind_law["k"] = 5;
    blind_law["seed"] = 909;
    blind_law["stream_by_prompt"] = true;
    blind_law["entries"] = json::array({json{{"key", "*"}, {"weights", blind_weights}}});
    write_file(fx.dir + "/law_blind.json", blind_law.dump(2));

    // orientation fixture: expert-favored strategies are learner-centered (+1),
    // everything else content-centered (-1); also used for criterion 10
    json ann_doc = json::parse(read_file(kAssetDir + "/example_annotations.json"));
    for (const auto& rater : {"expert-1", "expert-2"}) {
        json task1;
        for (const auto& s : actions.strategies())
            task1[s.name] =
                json{{"label", fx.expert_support.count(s.name) ? "learner-centered"
                                                               : "content-centered"},
                     {"justification", "orientation fixture"}};
        ann_doc["task1"][rater] = task1;
    }
    write_file(fx.dir + "/annotations.json", ann_doc.dump(2));

    json cfg;
    cfg["schema_version"] = 1;
    cfg["statistics"] = kAssetDir + "/mslq_statistics.json";
    cfg["actions"] = kAssetDir + "/strategy_catalog.json";
    cfg["annotations"] = fx.dir + "/annotations.json";
    cfg["objective"] =
        "The learner wants to practice using the Fundamental Theorem of Calculus to evaluate "
        "definite integrals.";
    cfg["learners"] = 50;
    cfg["trials"] = 1000;
    cfg["k"] = 5;
    cfg["seed"] = 20240809;
    cfg["backend"] = json{{"type", "scripted"}, {"law", fx.dir + "/law_mixed.json"}};
    cfg["out"] = fx.dir + "/run_mixed";
    fx.config = cfg;

    fx.blind_config = cfg;
    fx.blind_config["backend"]["law"] = fx.dir + "/law_blind.json";
    fx.blind_config["out"] = fx.dir + "/run_blind";
    fx.blind_config["trials"] = 2000;
    return fx;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        rows.push_back(std::move(fields));
    }
    return rows;
}

Check criterion_9_deviation_structure(const CompareFixture& fx) {
    Check check;
    if (!cmd_generate(run_config_from_json(fx.config))) {
        check.require(false, "generate failed");
        return check;
    }
    CompareSummary mixed;
    cmd_compare(run_config_from_json(fx.config), &mixed);

    const auto rows = read_csv_rows(fx.config["out"].get<std::string>() +
                                    "/reports/fig3_deviation.csv");
    check.require(rows.size() == 51, "expected 50 learner rows plus header");
    int below = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double dev_control = std::stod(rows[i][1]);
        const double dev_intervention = std::stod(rows[i][2]);
        if (dev_intervention < dev_control) ++below;
    }
    check.require(below == 50, "only " + std::to_string(below) +
                                   "/50 learners below the deviation diagonal");
    check.require(mixed.fraction_relative_reduction_ge_10pct >= 0.0 &&
                      mixed.fraction_relative_reduction_ge_10pct <= 1.0,
                  ">=10%-reduction fraction not reported");
    check.note("50/50 below diagonal, ge10pct fraction " +
               fmt(mixed.fraction_relative_reduction_ge_10pct));

    // context-blind backend: reductions center on zero
    if (!cmd_generate(run_config_from_json(fx.blind_config))) {
        check.require(false, "blind generate failed");
        return check;
    }
    CompareSummary blind;
    cmd_compare(run_config_from_json(fx.blind_config), &blind);
    check.require(std::abs(blind.mean_reduction) <= 0.02,
                  "blind-backend mean reduction " + fmt(blind.mean_reduction) +
                      " outside +-0.02");
    check.note("blind mean reduction " + fmt(blind.mean_reduction));
    return check;
}

Check criterion_10_centeredness_ordering(const CompareFixture& fx) {
    Check check;
    const auto rows = read_csv_rows(fx.config["out"].get<std::string>() +
                                    "/reports/fig1_learner_centeredness.csv");
    check.require(rows.size() == 51, "expected 50 learner rows plus header");
    int ordered = 0;
    double min_gap_ci = 1e300, min_gap_ie = 1e300;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double f_control = std::stod(rows[i][1]);
        const double f_intervention = std::stod(rows[i][2]);
        const double f_expert = std::stod(rows[i][3]);
        if (f_control < f_intervention && f_intervention < f_expert) ++ordered;
        min_gap_ci = std::min(min_gap_ci, f_intervention - f_control);
        min_gap_ie = std::min(min_gap_ie, f_expert - f_intervention);
    }
    check.require(ordered == 50, "ordering F(control) < F(intervention) < F(expert) held for "
                                 "only " + std::to_string(ordered) + "/50 learners");
    check.note("min F gaps " + fmt(min_gap_ci) + " and " + fmt(min_gap_ie));
    return check;
}

Check criterion_11_spearman() {
    Check check;

    const auto up = spearman({1, 2, 3, 4, 5, 6}, {3, 8, 9, 20, 21, 40}, 1000, 1);
    check.require(up.rho.has_value() && *up.rho == 1.0, "monotone data rho != 1");
    const auto down = spearman({1, 2, 3, 4, 5, 6}, {40, 21, 20, 9, 8, 3}, 1000, 1);
    check.require(down.rho.has_value() && *down.rho == -1.0, "anti-monotone data rho != -1");

    const std::vector<double> xs = {1, 2, 3, 4, 5};
    const std::vector<double> ys = {2, 3, 1, 4, 5};
    const auto fixture = spearman(xs, ys, 1000, 1);
    check.require(fixture.rho.has_value() && std::abs(*fixture.rho - 0.7) <= 1e-9,
                  "n=5 fixture rho " + fmt(fixture.rho.value_or(-9)) + " != 0.7");
    check.require(std::abs(oracle::spearman_rho(xs, ys) - 0.7) <= 1e-12,
                  "rank oracle disagrees with the 0.7 fixture");

    std::vector<double> x8, y8;
    for (int i = 1; i <= 8; ++i) {
        x8.push_back(i);
        y8.push_back(i * i);
    }
    const auto perfect = spearman(x8, y8, 100000, 20240811);
    check.require(perfect.p_value.has_value() && *perfect.p_value < 0.01,
                  "permutation p for n=8 monotone " + fmt(perfect.p_value.value_or(1)) +
                      " not < 0.01");
    check.note("fixture rho " + fmt(*fixture.rho) + ", n=8 p " + fmt(*perfect.p_value));
    return check;
}

Check criterion_12_replay_determinism(const CompareFixture& fx) {
    Check check;
    const std::string base = fx.dir + "/replay";
    const std::string cache_dir = base + "/cache";

    json cfg = fx.config;
    cfg["learners"] = 6;
    cfg["trials"] = 50;
    cfg["permutations"] = 2000;
    cfg["cache"] = json{{"mode", "record"}, {"dir", cache_dir}};
    cfg["out"] = base + "/record";

    json replay_cfg = cfg;
    replay_cfg["cache"] = json{{"mode", "replay"}, {"dir", cache_dir}};
    replay_cfg["out"] = base + "/replay";

    cmd_generate(run_config_from_json(cfg));
    cmd_compare(run_config_from_json(cfg));
    cmd_ablate(run_config_from_json(cfg));

    cmd_generate(run_config_from_json(replay_cfg));
    cmd_compare(run_config_from_json(replay_cfg));
    cmd_ablate(run_config_from_json(replay_cfg));

    for (const char* report : {"reports/fig1_learner_centeredness.csv",
                               "reports/fig3_deviation.csv",
                               "reports/fig4_relevance_influence.csv"}) {
        const auto recorded = read_file(base + "/record/" + report);
        const auto replayed = read_file(base + "/replay/" + report);
        check.require(recorded == replayed,
                      std::string(report) + " differs between record and replay");
    }
    check.note("3 CSV reports byte-identical across record/replay");
    return check;
}

}  // namespace

int main() {
    set_log_enabled(false);
    WorkDir work;

    std::vector<std::pair<std::string, std::function<Check()>>> criteria;
    criteria.emplace_back("generator moments", criterion_1_generator_moments);
    criteria.emplace_back("factor structure", criterion_2_factor_structure);
    criteria.emplace_back("tvd metric suite", criterion_3_tvd_suite);
    criteria.emplace_back("estimator consistency", criterion_4_estimator_consistency);
    criteria.emplace_back("estimation arithmetic", criterion_5_estimation_arithmetic);
    criteria.emplace_back("krippendorff alpha", criterion_6_krippendorff);
    criteria.emplace_back("influence null case", criterion_7_influence_null);
    criteria.emplace_back("planted-effect recovery", criterion_8_planted_effect);

    const auto fixture = build_compare_fixture(work);
    criteria.emplace_back("deviation structure",
                          [&] { return criterion_9_deviation_structure(fixture); });
    criteria.emplace_back("centeredness ordering",
                          [&] { return criterion_10_centeredness_ordering(fixture); });
    criteria.emplace_back("spearman", criterion_11_spearman);
    criteria.emplace_back("replay determinism",
                          [&] { return criterion_12_replay_determinism(fixture); });

    bool all_pass = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check check;
        try {
            check = criteria[i].second();
        } catch (const std::exception& e) {
            check.pass = false;
            check.detail = std::string("exception: ") + e.what();
        }
        all_pass = all_pass && check.pass;
        std::printf("criterion %2zu: %s  %s%s%s\n", i + 1, check.pass ? "PASS" : "FAIL",
                    criteria[i].first.c_str(), check.detail.empty() ? "" : " — ",
                    check.detail.c_str());
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
