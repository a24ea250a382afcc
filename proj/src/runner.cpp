#include "lcprobe/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <set>

#include "lcprobe/common.hpp"
#include "lcprobe/context.hpp"
#include "lcprobe/psychometric.hpp"

namespace lcprobe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// stream domains for per-learner / per-ablation seeds
constexpr uint64_t kControlStream = 0x5C01;
constexpr uint64_t kInterventionStream = 0x5C02;
constexpr uint64_t kAblationStream = 0x5C03;
constexpr uint64_t kContextStream = 0x5C04;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string padded(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04zu", i);
    return buf;
}

void check_path(const std::string& path, const std::string& what) {
    if (path.empty()) return;
    if (!fs::exists(path)) throw ValidationError(what + ": path not found: " + path);
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("run config: root must be an object");
    RunConfig cfg;
    cfg.raw = doc;
    cfg.statistics_path = doc.value("statistics", std::string());
    cfg.actions_path = doc.value("actions", std::string());
    cfg.annotations_path = doc.value("annotations", std::string());
    cfg.prompt_template_path = doc.value("prompt_template", std::string());
    cfg.objective = doc.value("objective", std::string());
    cfg.learners = doc.value("learners", 50);
    cfg.trials = doc.value("trials", 100);
    cfg.k = doc.value("k", 5);
    cfg.seed = doc.value("seed", uint64_t{0});
    if (doc.contains("constructs"))
        for (const auto& c : doc["constructs"]) cfg.constructs.push_back(c.get<std::string>());
    cfg.null_count = doc.value("null_count", 8);
    if (doc.contains("backend")) {
        const auto& b = doc["backend"];
        cfg.backend.type = b.value("type", std::string("scripted"));
        cfg.backend.law_path = b.value("law", std::string());
        cfg.backend.http.endpoint = b.value("endpoint", std::string());
        cfg.backend.http.model = b.value("model", std::string());
        cfg.backend.http.api_key_env = b.value("api_key_env", std::string("LCPROBE_API_KEY"));
        if (b.contains("headers"))
            for (auto it = b["headers"].begin(); it != b["headers"].end(); ++it)
                cfg.backend.http.headers[it.key()] = it.value().get<std::string>();
        if (b.contains("backoff")) {
            const auto& bo = b["backoff"];
            cfg.backend.http.backoff.base =
                std::chrono::milliseconds(bo.value("base_ms", 1000));
            cfg.backend.http.backoff.factor = bo.value("factor", 2.0);
            cfg.backend.http.backoff.max_attempts = bo.value("max_attempts", 5);
        }
        cfg.backend.http.timeout_seconds = b.value("timeout_seconds", 120);
    }
    if (doc.contains("cache")) {
        cfg.cache.mode = doc["cache"].value("mode", std::string("off"));
        cfg.cache.dir = doc["cache"].value("dir", std::string());
    }
    cfg.out = doc.value("out", std::string());
    if (doc.contains("thresholds")) {
        cfg.relevance_threshold = doc["thresholds"].value("relevance", 3.0);
        if (doc["thresholds"].contains("influence") && !doc["thresholds"]["influence"].is_null())
            cfg.influence_threshold = doc["thresholds"]["influence"].get<double>();
    }
    cfg.retry_budget = doc.value("retry_budget", 3);
    cfg.parallelism = doc.value("parallelism", 1);
    cfg.permutations = doc.value("permutations", std::size_t{100000});
    cfg.shared_baseline = doc.value("shared_baseline", false);
    cfg.renderer = doc.value("renderer", std::string("template"));
    if (doc.contains("decoding_params"))
        for (auto it = doc["decoding_params"].begin(); it != doc["decoding_params"].end(); ++it)
            cfg.decoding_params[it.key()] = it.value().is_string()
                                                ? it.value().get<std::string>()
                                                : it.value().dump();

    if (cfg.trials < 1) throw ValidationError("run config: trials must be >= 1");
    if (cfg.k < 1) throw ValidationError("run config: k must be >= 1");
    if (cfg.backend.type != "scripted" && cfg.backend.type != "http")
        throw ValidationError("run config: backend.type must be scripted or http");
    if (cfg.cache.mode != "off" && cfg.cache.mode != "record" && cfg.cache.mode != "replay")
        throw ValidationError("run config: cache.mode must be off, record or replay");

    check_path(cfg.statistics_path, "run config statistics");
    check_path(cfg.actions_path, "run config actions");
    check_path(cfg.annotations_path, "run config annotations");
    check_path(cfg.prompt_template_path, "run config prompt_template");
    check_path(cfg.backend.law_path, "run config backend.law");

    // self-contained default run directory: runs/<timestamp>-<config-hash>
    if (cfg.out.empty()) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char stamp[32];
        std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm);
        cfg.out = std::string("runs/") + stamp + "-" + config_hash(cfg);
    }
    return cfg;
}

json load_run_config_document(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("run config " + path + ": " + e.what());
    }

    // relative input paths resolve against the config file's directory first,
    // falling back to the working directory
    const auto config_dir = fs::path(path).parent_path();
    auto rebase = [&](json& field) {
        if (!field.is_string()) return;
        const auto value = field.get<std::string>();
        if (value.empty() || fs::path(value).is_absolute()) return;
        if (fs::exists(config_dir / value)) field = (config_dir / value).string();
    };
    for (const char* key : {"statistics", "actions", "annotations", "prompt_template"})
        if (doc.contains(key)) rebase(doc[key]);
    if (doc.contains("backend") && doc["backend"].contains("law"))
        rebase(doc["backend"]["law"]);
    return doc;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json(load_run_config_document(path));
}

std::string config_hash(const RunConfig& config) {
    json canon = config.raw;
    canon.erase("out");
    canon.erase("cache");
    return sha256_hex(canon.dump()).substr(0, 12);
}

std::shared_ptr<Backend> make_backend(const RunConfig& config) {
    const std::string cache_dir =
        config.cache.dir.empty() ? (fs::path(config.out) / "cache").string() : config.cache.dir;

    if (config.cache.mode == "replay")
        return std::make_shared<ReplayBackend>(std::make_shared<ReplayCache>(cache_dir));

    std::shared_ptr<Backend> inner;
    if (config.backend.type == "scripted") {
        if (config.backend.law_path.empty())
            throw ValidationError("scripted backend needs backend.law");
        inner = std::make_shared<ScriptedBackend>(load_scripted_law(config.backend.law_path));
    } else {
        inner = std::make_shared<HttpBackend>(config.backend.http);
    }

    if (config.cache.mode == "record")
        return std::make_shared<RecordingBackend>(inner,
                                                  std::make_shared<ReplayCache>(cache_dir));
    return inner;
}

namespace {

std::string csv_meta_line(const RunConfig& config, const std::string& backend_id,
                          const std::string& template_hash) {
    return "# config_hash=" + config_hash(config) + " seed=" + std::to_string(config.seed) +
           " template_hash=" + template_hash.substr(0, 12) + " backend_id=" + backend_id;
}

void write_run_meta(const RunConfig& config, const std::string& command,
                    const std::string& backend_id, const std::string& template_hash) {
    json meta;
    meta["schema_version"] = 1;
    meta["command"] = command;
    meta["config_hash"] = config_hash(config);
    meta["seed"] = config.seed;
    meta["template_hash"] = template_hash;
    meta["backend_id"] = backend_id;
    {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        meta["timestamp"] = buf;
    }
    json canon = config.raw;
    canon.erase("cache");
    meta["config"] = canon;
    write_file((fs::path(config.out) / ("run_meta." + command + ".json")).string(),
               meta.dump(2) + "\n");
}

PromptTemplate resolve_template(const RunConfig& config) {
    return config.prompt_template_path.empty() ? default_prompt_template()
                                               : load_prompt_template(config.prompt_template_path);
}

std::vector<std::string> default_compare_constructs(const PsychometricModel& model,
                                                    const RunConfig& config) {
    if (!config.constructs.empty()) return config.constructs;
    std::vector<std::string> out;
    for (const auto& c : model.constructs()) {
        out.push_back(c.id);
        if (out.size() == 5) break;
    }
    return out;
}

// annotation key for a characteristic: construct id, null catalog id, or text
std::string characteristic_key(const Characteristic& c) {
    if (c.construct_id) return *c.construct_id;
    for (const auto& entry : null_characteristic_catalog())
        if (entry.text == c.text) return entry.id;
    return c.text;
}

}  // namespace

bool cmd_generate(const RunConfig& config) {
    if (config.learners < 1) throw ValidationError("generate: learners must be >= 1");
    if (config.objective.empty()) throw ValidationError("generate: objective must be set");
    const auto model = load_model(config.statistics_path);

    std::unique_ptr<TextRenderer> llm_renderer;
    std::shared_ptr<Backend> backend;
    if (config.renderer == "llm") {
        backend = make_backend(config);
        llm_renderer = std::make_unique<LlmRenderer>(*backend,
                                                     LlmRenderer::default_prompt_template());
    } else if (config.renderer != "template") {
        throw ValidationError("generate: renderer must be template or llm");
    }

    const auto constructs = default_compare_constructs(model, config);

    std::vector<LearnerProfile> profiles;
    std::vector<LearningContext> contexts;
    for (int i = 0; i < config.learners; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        auto profile = sample_profile(model, "profile-" + padded(idx), config.seed, idx);

        AssembleOptions options;
        options.context_id = "context-" + padded(idx);
        options.constructs = constructs;
        options.seed = mix_seed({config.seed, kContextStream, idx});
        options.renderer = llm_renderer.get();
        contexts.push_back(assemble_context(profile, model, config.objective, options));
        profiles.push_back(std::move(profile));
    }

    const auto learners_dir = fs::path(config.out) / "learners";
    write_profile_archive((learners_dir / "profiles.jsonl").string(), profiles);
    write_context_archive((learners_dir / "contexts.jsonl").string(), contexts);
    write_run_meta(config, "generate", backend ? backend->id() : "none",
                   resolve_template(config).hash);
    log_info("generate: wrote " + std::to_string(contexts.size()) + " contexts to " +
             learners_dir.string());
    return true;
}

bool cmd_estimate(const RunConfig& config, const std::string& state_ref) {
    const auto actions =
        config.actions_path.empty() ? default_action_space()
                                    : load_action_catalog(config.actions_path);
    const auto prompt_template = resolve_template(config);
    auto backend = make_backend(config);

    DecisionState state;
    if (state_ref == "objective-only") {
        if (config.objective.empty())
            throw ValidationError("estimate: objective must be set for objective-only");
        state = objective_only_state(config.objective);
    } else {
        const auto archive = (fs::path(config.out) / "learners" / "contexts.jsonl").string();
        const auto contexts = read_context_archive(archive);
        const auto it = std::find_if(contexts.begin(), contexts.end(),
                                     [&](const auto& c) { return c.context_id == state_ref; });
        if (it == contexts.end())
            throw ValidationError("estimate: context '" + state_ref + "' not found in " +
                                  archive);
        state = to_decision_state(*it);
    }

    EstimateOptions options;
    options.trials = config.trials;
    options.k = config.k;
    options.seed = config.seed;
    options.retry_budget = config.retry_budget;
    options.parallelism = config.parallelism;
    options.persist_dir = (fs::path(config.out) / "estimates").string();
    options.prompt_template = &prompt_template;
    options.decoding_params = config.decoding_params;

    const auto estimate = estimate_policy(*backend, state, actions, options);
    write_run_meta(config, "estimate", backend->id(), prompt_template.hash);
    std::cout << "estimate " << estimate.estimate_id << ": " << estimate.valid_trials << "/"
              << estimate.trials << " valid trials" << (estimate.degraded ? " (degraded)" : "")
              << "\n";
    return !estimate.degraded;
}

bool cmd_compare(const RunConfig& config, CompareSummary* summary_out) {
    const auto model = load_model(config.statistics_path);
    const auto actions =
        config.actions_path.empty() ? default_action_space()
                                    : load_action_catalog(config.actions_path);
    if (config.annotations_path.empty())
        throw ValidationError("compare: annotations must be set");
    const auto annotations = load_annotations(config.annotations_path, actions);
    const auto reference = build_expert_reference(annotations, actions);
    const auto prompt_template = resolve_template(config);
    auto backend = make_backend(config);

    const auto archive = (fs::path(config.out) / "learners" / "contexts.jsonl").string();
    if (!fs::exists(archive))
        throw ValidationError("compare: context archive not found: " + archive +
                              " (run generate first)");
    const auto contexts = read_context_archive(archive);
    if (contexts.empty()) throw ValidationError("compare: context archive is empty");

    const auto estimates_dir = (fs::path(config.out) / "estimates").string();
    const std::string meta_line = csv_meta_line(config, backend->id(), prompt_template.hash);

    std::string fig_centeredness =
        meta_line + "\nlearner,f_control,f_intervention,f_expert\n";
    std::string fig_deviation =
        meta_line +
        "\nlearner,deviation_control,deviation_intervention,absolute_reduction,"
        "relative_reduction\n";

    CompareSummary summary;
    summary.learners = static_cast<int>(contexts.size());
    int reduced = 0, ge10 = 0, with_relative = 0;

    for (std::size_t i = 0; i < contexts.size(); ++i) {
        const auto& context = contexts[i];

        std::vector<std::string> keys;
        for (const auto& c : context.characteristics)
            if (!c.is_null()) keys.push_back(characteristic_key(c));
        const Policy expert = aggregate_expert_policy(annotations, keys);

        EstimateOptions options;
        options.trials = config.trials;
        options.k = config.k;
        options.retry_budget = config.retry_budget;
        options.parallelism = config.parallelism;
        options.persist_dir = estimates_dir;
        options.prompt_template = &prompt_template;
        options.decoding_params = config.decoding_params;

        options.seed = mix_seed({config.seed, kControlStream, i});
        const auto control = estimate_policy(
            *backend, objective_only_state(context.objective), actions, options);

        options.seed = mix_seed({config.seed, kInterventionStream, i});
        const auto intervention =
            estimate_policy(*backend, to_decision_state(context), actions, options);

        const auto report = deviation_report(control, intervention, expert);
        const double f_control =
            learner_centeredness(control.probabilities, reference.orientation_score);
        const double f_intervention =
            learner_centeredness(intervention.probabilities, reference.orientation_score);
        const double f_expert = learner_centeredness(expert, reference.orientation_score);

        fig_centeredness += context.context_id + "," + num(f_control) + "," +
                            num(f_intervention) + "," + num(f_expert) + "\n";
        fig_deviation += context.context_id + "," + num(report.control) + "," +
                         num(report.intervention) + "," + num(report.absolute_reduction) + "," +
                         (report.relative_reduction ? num(*report.relative_reduction)
                                                    : std::string("undefined")) +
                         "\n";

        if (report.intervention < report.control) ++reduced;
        if (report.relative_reduction) {
            ++with_relative;
            if (*report.relative_reduction >= 0.10) ++ge10;
        }
        summary.mean_reduction += report.absolute_reduction;
        summary.mean_f_control += f_control;
        summary.mean_f_intervention += f_intervention;
        summary.mean_f_expert += f_expert;
        summary.any_degraded = summary.any_degraded || control.degraded || intervention.degraded;
    }

    const double n = static_cast<double>(contexts.size());
    summary.fraction_reduced = reduced / n;
    summary.fraction_relative_reduction_ge_10pct =
        with_relative > 0 ? static_cast<double>(ge10) / with_relative : 0.0;
    summary.mean_reduction /= n;
    summary.mean_f_control /= n;
    summary.mean_f_intervention /= n;
    summary.mean_f_expert /= n;

    const auto reports_dir = fs::path(config.out) / "reports";
    write_file((reports_dir / "fig1_learner_centeredness.csv").string(), fig_centeredness);
    write_file((reports_dir / "fig3_deviation.csv").string(), fig_deviation);

    json jsummary;
    jsummary["schema_version"] = 1;
    jsummary["learners"] = summary.learners;
    jsummary["fraction_reduced"] = summary.fraction_reduced;
    jsummary["fraction_relative_reduction_ge_10pct"] =
        summary.fraction_relative_reduction_ge_10pct;
    jsummary["mean_reduction"] = summary.mean_reduction;
    jsummary["mean_f_control"] = summary.mean_f_control;
    jsummary["mean_f_intervention"] = summary.mean_f_intervention;
    jsummary["mean_f_expert"] = summary.mean_f_expert;
    jsummary["task1_alpha"] = reference.task1_alpha;
    jsummary["task2_mean_overlap"] = reference.task2_mean_overlap;
    jsummary["any_degraded"] = summary.any_degraded;
    jsummary["config_hash"] = config_hash(config);
    jsummary["backend_id"] = backend->id();
    jsummary["template_hash"] = prompt_template.hash;
    jsummary["seed"] = config.seed;
    write_file((reports_dir / "compare_summary.json").string(), jsummary.dump(2) + "\n");

    write_run_meta(config, "compare", backend->id(), prompt_template.hash);
    if (summary_out) *summary_out = summary;
    log_info("compare: " + std::to_string(reduced) + "/" + std::to_string(contexts.size()) +
             " learners with reduced deviation");
    return !summary.any_degraded;
}

bool cmd_ablate(const RunConfig& config, AblateSummary* summary_out) {
    const auto model = load_model(config.statistics_path);
    const auto actions =
        config.actions_path.empty() ? default_action_space()
                                    : load_action_catalog(config.actions_path);
    if (config.annotations_path.empty())
        throw ValidationError("ablate: annotations must be set");
    const auto annotations = load_annotations(config.annotations_path, actions);
    const auto relevance = relevance_scores(annotations);
    const auto prompt_template = resolve_template(config);
    auto backend = make_backend(config);
    if (config.objective.empty()) throw ValidationError("ablate: objective must be set");

    // fixed stress-test context: all configured constructs plus null distractors
    const auto profile = sample_profile(model, "profile-ablate", config.seed, 0);
    AssembleOptions assemble;
    assemble.context_id = "context-ablate";
    if (!config.constructs.empty()) assemble.constructs = config.constructs;
    assemble.seed = mix_seed({config.seed, kContextStream, uint64_t{0xAB}});
    if (config.null_count < 0 ||
        config.null_count > static_cast<int>(null_characteristic_catalog().size()))
        throw ValidationError("ablate: null_count outside [0, " +
                              std::to_string(null_characteristic_catalog().size()) + "]");
    for (int i = 0; i < config.null_count; ++i)
        assemble.nulls.push_back(null_characteristic_catalog()[static_cast<std::size_t>(i)].text);
    const auto s_star = assemble_context(profile, model, config.objective, assemble);

    const auto estimates_dir = (fs::path(config.out) / "estimates").string();

    std::optional<PolicyEstimate> baseline;
    if (config.shared_baseline) {
        EstimateOptions options;
        options.trials = config.trials;
        options.k = config.k;
        options.seed = mix_seed({config.seed, kAblationStream, uint64_t{0xBA5E}});
        options.retry_budget = config.retry_budget;
        options.parallelism = config.parallelism;
        options.persist_dir = estimates_dir;
        options.prompt_template = &prompt_template;
        options.decoding_params = config.decoding_params;
        baseline = estimate_policy(*backend, to_decision_state(s_star), actions, options);
    }

    AblateSummary summary;
    summary.relevance_threshold = config.relevance_threshold;

    std::vector<double> influences;
    for (std::size_t i = 0; i < s_star.characteristics.size(); ++i) {
        InfluenceOptions options;
        options.trials = config.trials;
        options.k = config.k;
        options.seed = mix_seed({config.seed, kAblationStream, i});
        options.retry_budget = config.retry_budget;
        options.parallelism = config.parallelism;
        options.persist_dir = estimates_dir;
        options.prompt_template = &prompt_template;
        options.shared_baseline = baseline ? &*baseline : nullptr;

        const auto result = influence(*backend, s_star, i, actions, options);
        const auto& characteristic = s_star.characteristics[i];
        const std::string key = characteristic_key(characteristic);
        const auto rel = relevance.find(key);
        if (rel == relevance.end())
            throw ValidationError("ablate: characteristic '" + key +
                                  "' has no task-3 relevance rating");

        InfluenceRecord record;
        record.characteristic_key = key;
        record.text = characteristic.text;
        record.influence = result.influence;
        record.relevance = rel->second;
        record.degraded = result.degraded;
        record.estimate_star_id = result.star.estimate_id;
        record.estimate_minus_id = result.minus.estimate_id;
        summary.records.push_back(std::move(record));
        influences.push_back(result.influence);
        summary.any_degraded = summary.any_degraded || result.degraded;
    }

    summary.influence_threshold =
        config.influence_threshold ? *config.influence_threshold : median(influences);
    for (auto& record : summary.records)
        record.quadrant = quadrant_classify(record.relevance, record.influence,
                                            summary.influence_threshold,
                                            summary.relevance_threshold);

    std::vector<double> xs, ys;
    for (const auto& record : summary.records) {
        xs.push_back(record.relevance);
        ys.push_back(record.influence);
    }
    const auto correlation = spearman(xs, ys, config.permutations, config.seed);
    summary.rho = correlation.rho;
    summary.p_value = correlation.p_value;

    const std::string meta_line = csv_meta_line(config, backend->id(), prompt_template.hash);
    std::string fig = meta_line + "\ncharacteristic,relevance,influence,quadrant\n";
    for (const auto& record : summary.records)
        fig += record.characteristic_key + "," + num(record.relevance) + "," +
               num(record.influence) + "," + to_string(record.quadrant) + "\n";

    const auto reports_dir = fs::path(config.out) / "reports";
    write_file((reports_dir / "fig4_relevance_influence.csv").string(), fig);

    json jreport;
    jreport["schema_version"] = 1;
    jreport["context_id"] = s_star.context_id;
    jreport["influence_threshold"] = summary.influence_threshold;
    jreport["relevance_threshold"] = summary.relevance_threshold;
    jreport["shared_baseline"] = config.shared_baseline;
    if (summary.rho) jreport["spearman_rho"] = *summary.rho;
    if (summary.p_value) jreport["spearman_p"] = *summary.p_value;
    jreport["any_degraded"] = summary.any_degraded;
    jreport["config_hash"] = config_hash(config);
    jreport["backend_id"] = backend->id();
    jreport["template_hash"] = prompt_template.hash;
    jreport["seed"] = config.seed;
    json jrecords = json::array();
    for (const auto& record : summary.records) {
        json jr;
        jr["characteristic"] = record.characteristic_key;
        jr["text"] = record.text;
        jr["influence"] = record.influence;
        jr["relevance"] = record.relevance;
        jr["quadrant"] = to_string(record.quadrant);
        jr["degraded"] = record.degraded;
        jr["estimate_star"] = record.estimate_star_id;
        jr["estimate_minus"] = record.estimate_minus_id;
        jrecords.push_back(std::move(jr));
    }
    jreport["records"] = std::move(jrecords);
    write_file((reports_dir / "ablation.json").string(), jreport.dump(2) + "\n");

    write_run_meta(config, "ablate", backend->id(), prompt_template.hash);
    if (summary_out) *summary_out = summary;
    log_info("ablate: " + std::to_string(summary.records.size()) + " characteristics, rho=" +
             (summary.rho ? num(*summary.rho) : std::string("undefined")));
    return !summary.any_degraded;
}

bool cmd_report(const std::string& run_dir) {
    const auto reports_dir = fs::path(run_dir) / "reports";
    bool found = false;
    bool ok = true;

    const auto compare_path = (reports_dir / "compare_summary.json").string();
    if (fs::exists(compare_path)) {
        found = true;
        const auto doc = json::parse(read_file(compare_path));
        std::cout << "compare: " << doc.value("learners", 0) << " learners\n"
                  << "  fraction with reduced deviation: "
                  << num(doc.value("fraction_reduced", 0.0)) << "\n"
                  << "  fraction with >=10% relative reduction: "
                  << num(doc.value("fraction_relative_reduction_ge_10pct", 0.0)) << "\n"
                  << "  mean learner-centeredness (control/intervention/expert): "
                  << num(doc.value("mean_f_control", 0.0)) << " / "
                  << num(doc.value("mean_f_intervention", 0.0)) << " / "
                  << num(doc.value("mean_f_expert", 0.0)) << "\n";
        ok = ok && !doc.value("any_degraded", false);
    }

    const auto ablation_path = (reports_dir / "ablation.json").string();
    if (fs::exists(ablation_path)) {
        found = true;
        const auto doc = json::parse(read_file(ablation_path));
        std::map<std::string, int> quadrant_counts;
        for (const auto& record : doc.value("records", json::array()))
            ++quadrant_counts[record.value("quadrant", std::string("?"))];
        std::cout << "ablate: " << doc.value("records", json::array()).size()
                  << " characteristics\n"
                  << "  influence threshold: " << num(doc.value("influence_threshold", 0.0))
                  << ", relevance threshold: " << num(doc.value("relevance_threshold", 0.0))
                  << "\n";
        for (const auto& [quadrant, count] : quadrant_counts)
            std::cout << "  " << quadrant << ": " << count << "\n";
        if (doc.contains("spearman_rho"))
            std::cout << "  spearman rho=" << num(doc["spearman_rho"].get<double>())
                      << " p=" << num(doc.value("spearman_p", 1.0)) << "\n";
        ok = ok && !doc.value("any_degraded", false);
    }

    if (!found) throw ValidationError("report: no reports found under " + run_dir);
    return ok;
}

}  // namespace lcprobe
