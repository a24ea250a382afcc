#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcprobe/context.hpp"
#include "lcprobe/policy.hpp"

namespace lcprobe {

// Total variation distance: half the L1 distance over the union support.
// Both arguments must sum to 1 within 1e-6; missing strategies read as 0.
double tvd(const Policy& p, const Policy& q);

// Expected orientation score E_{a~policy}[f(a)], in [-1, 1].
// Every strategy in the policy support must appear in `orientation`.
double learner_centeredness(const Policy& policy,
                            const std::map<std::string, double>& orientation);

struct DeviationReport {
    double control = 0.0;       // TVD(control, expert)
    double intervention = 0.0;  // TVD(intervention, expert)
    double absolute_reduction = 0.0;
    std::optional<double> relative_reduction;  // nullopt when control deviation is 0
};

DeviationReport deviation_report(const PolicyEstimate& control,
                                 const PolicyEstimate& intervention, const Policy& expert);

enum class Quadrant { aligned, neglected, hallucinated, irrelevant };

std::string to_string(Quadrant quadrant);

// Boundary rule: relevance threshold inclusive, influence threshold exclusive,
// so a characteristic sitting exactly on the influence threshold counts as
// low influence.
Quadrant quadrant_classify(double relevance, double influence, double influence_threshold,
                           double relevance_threshold);

struct SpearmanResult {
    std::optional<double> rho;      // nullopt when xs or ys is constant
    std::optional<double> p_value;  // two-sided, Monte-Carlo permutation
};

SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys,
                        std::size_t permutations = 100000, uint64_t seed = 0);

// --- Leave-one-out influence ---

struct InfluenceOptions {
    int trials = 100;
    int k = 5;
    uint64_t seed = 0;
    int retry_budget = 3;
    int parallelism = 1;
    std::string persist_dir;
    const PromptTemplate* prompt_template = nullptr;
    // Reuse a precomputed full-context estimate instead of estimating it
    // fresh for the pair (the cheaper --shared-baseline mode).
    const PolicyEstimate* shared_baseline = nullptr;
};

struct InfluenceResult {
    double influence = 0.0;  // TVD between the pair of estimates
    bool degraded = false;   // either estimate degraded
    PolicyEstimate star;
    PolicyEstimate minus;
};

// TVD(pi(.|s_*), pi(.|s_-index)), both estimated with identical
// (N, k, backend, template); both estimates persisted when persist_dir is set.
InfluenceResult influence(Backend& backend, const LearningContext& s_star, std::size_t index,
                          const ActionSpace& actions, const InfluenceOptions& options);

struct InfluenceRecord {
    std::string characteristic_key;  // construct id, null catalog id, or raw text
    std::string text;
    double influence = 0.0;
    double relevance = 0.0;
    Quadrant quadrant = Quadrant::irrelevant;
    bool degraded = false;
    std::string estimate_star_id;
    std::string estimate_minus_id;
};

double median(std::vector<double> values);

}  // namespace lcprobe
