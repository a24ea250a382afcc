#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lcprobe/expert.hpp"
#include "lcprobe/gateway.hpp"
#include "lcprobe/metrics.hpp"
#include "lcprobe/policy.hpp"

namespace lcprobe {

struct BackendSpec {
    std::string type = "scripted";  // scripted | http
    std::string law_path;           // scripted
    HttpBackendConfig http;         // http
};

struct CacheSpec {
    std::string mode = "off";  // off | record | replay
    std::string dir;           // empty = <out>/cache
};

struct RunConfig {
    std::string statistics_path;
    std::string actions_path;          // empty = builtin catalog
    std::string annotations_path;
    std::string prompt_template_path;  // empty = builtin template
    std::string objective;
    int learners = 50;
    int trials = 100;  // N
    int k = 5;
    uint64_t seed = 0;
    std::vector<std::string> constructs;  // empty = command default
    int null_count = 8;                   // ablation distractors
    BackendSpec backend;
    CacheSpec cache;
    std::string out;  // empty = runs/<timestamp>-<config-hash>
    double relevance_threshold = 3.0;
    std::optional<double> influence_threshold;  // default: median of the run
    int retry_budget = 3;
    int parallelism = 1;
    std::size_t permutations = 100000;
    bool shared_baseline = false;
    std::string renderer = "template";  // template | llm
    std::map<std::string, std::string> decoding_params;

    nlohmann::json raw;  // effective config document, for hashing/provenance
};

RunConfig run_config_from_json(const nlohmann::json& doc);

// parse the file and resolve relative input paths against its directory;
// callers may apply overrides before run_config_from_json
nlohmann::json load_run_config_document(const std::string& path);
RunConfig load_run_config(const std::string& path);

// sha256 prefix over the config with location/cache-mode fields stripped, so
// a record run and its replay carry the same hash
std::string config_hash(const RunConfig& config);

std::shared_ptr<Backend> make_backend(const RunConfig& config);

// --- Commands; each returns true iff every produced estimate is non-degraded ---

// writes <out>/learners/{profiles,contexts}.jsonl
bool cmd_generate(const RunConfig& config);

// single estimate for "objective-only" or a context id from the archive
bool cmd_estimate(const RunConfig& config, const std::string& state_ref);

struct CompareSummary {
    int learners = 0;
    double fraction_reduced = 0.0;
    double fraction_relative_reduction_ge_10pct = 0.0;
    double mean_reduction = 0.0;
    double mean_f_control = 0.0;
    double mean_f_intervention = 0.0;
    double mean_f_expert = 0.0;
    bool any_degraded = false;
};

// control/intervention/expert comparison per learner; writes the
// learner-centeredness and deviation data tables plus a summary
bool cmd_compare(const RunConfig& config, CompareSummary* summary_out = nullptr);

struct AblateSummary {
    std::vector<InfluenceRecord> records;
    double influence_threshold = 0.0;
    double relevance_threshold = 0.0;
    std::optional<double> rho;
    std::optional<double> p_value;
    bool any_degraded = false;
};

// leave-one-out influence over the fixed stress-test context; writes the
// relevance/influence data table and diagnostics report
bool cmd_ablate(const RunConfig& config, AblateSummary* summary_out = nullptr);

// reload a run directory and print its summaries
bool cmd_report(const std::string& run_dir);

}  // namespace lcprobe
