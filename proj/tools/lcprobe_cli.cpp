// lcprobe — probe how learning context shifts a model's instructional policy.
//
// Verbs: generate, estimate, compare, ablate, report. Each experiment verb
// takes a JSON run config plus flag overrides (flags win).

#include <iostream>
#include <optional>
#include <string>

#include "lcprobe/common.hpp"
#include "lcprobe/runner.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

// exit codes per error class
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitIo = 4;
constexpr int kExitBackend = 5;
constexpr int kExitDegraded = 6;

struct Overrides {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> k;
    std::optional<int> learners;
    std::optional<std::string> backend;  // http | scripted | replay
    std::optional<std::string> cache_mode;
    std::optional<std::string> cache_dir;
    std::optional<std::string> out;
    std::optional<std::string> objective;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "run config JSON")->required();
    cmd->add_option("--seed", o.seed, "override config seed");
    cmd->add_option("--n,--trials", o.trials, "override trial count N");
    cmd->add_option("--k", o.k, "override selections per trial");
    cmd->add_option("--learners", o.learners, "override learner count");
    cmd->add_option("--backend", o.backend,
                    "override backend: http, scripted, or replay (replay switches the cache "
                    "mode, keeping the config hash stable)");
    cmd->add_option("--cache-mode", o.cache_mode, "off, record, or replay");
    cmd->add_option("--cache-dir", o.cache_dir, "replay cache directory");
    cmd->add_option("--out", o.out, "output/run directory");
    cmd->add_option("--objective", o.objective, "override learning objective");
}

lcprobe::RunConfig resolve_config(const Overrides& o) {
    auto doc = lcprobe::load_run_config_document(o.config_path);
    if (o.seed) doc["seed"] = *o.seed;
    if (o.trials) doc["trials"] = *o.trials;
    if (o.k) doc["k"] = *o.k;
    if (o.learners) doc["learners"] = *o.learners;
    if (o.backend) {
        if (*o.backend == "replay")
            doc["cache"]["mode"] = "replay";
        else
            doc["backend"]["type"] = *o.backend;
    }
    if (o.cache_mode) doc["cache"]["mode"] = *o.cache_mode;
    if (o.cache_dir) doc["cache"]["dir"] = *o.cache_dir;
    if (o.out) doc["out"] = *o.out;
    if (o.objective) doc["objective"] = *o.objective;
    return lcprobe::run_config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lcprobe: learning-context policy probe"};
    app.require_subcommand(1);

    Overrides generate_opts, estimate_opts, compare_opts, ablate_opts;
    std::string estimate_state = "objective-only";
    std::string report_dir;

    auto* generate = app.add_subcommand("generate", "sample learner profiles and contexts");
    add_common_flags(generate, generate_opts);

    auto* estimate = app.add_subcommand("estimate", "estimate one policy");
    add_common_flags(estimate, estimate_opts);
    estimate->add_option("--state", estimate_state,
                         "'objective-only' or a context id from the archive");

    auto* compare = app.add_subcommand("compare",
                                       "control vs intervention vs expert, per learner");
    add_common_flags(compare, compare_opts);

    auto* ablate = app.add_subcommand("ablate", "leave-one-out characteristic influence");
    add_common_flags(ablate, ablate_opts);

    auto* report = app.add_subcommand("report", "summarize a finished run directory");
    report->add_option("--run", report_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        bool ok = true;
        if (generate->parsed()) ok = lcprobe::cmd_generate(resolve_config(generate_opts));
        if (estimate->parsed())
            ok = lcprobe::cmd_estimate(resolve_config(estimate_opts), estimate_state);
        if (compare->parsed()) ok = lcprobe::cmd_compare(resolve_config(compare_opts));
        if (ablate->parsed()) ok = lcprobe::cmd_ablate(resolve_config(ablate_opts));
        if (report->parsed()) ok = lcprobe::cmd_report(report_dir);
        return ok ? kExitOk : kExitDegraded;
    } catch (const lcprobe::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const lcprobe::TransportError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const lcprobe::CacheMissError& e) {
        std::cerr << "replay error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const lcprobe::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
