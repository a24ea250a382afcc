#include "lcprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lcprobe/common.hpp"

namespace lcprobe {

double tvd(const Policy& p, const Policy& q) {
    validate_policy(p);
    validate_policy(q);
    std::set<std::string> support;
    for (const auto& [name, v] : p) support.insert(name);
    for (const auto& [name, v] : q) support.insert(name);
    double sum = 0.0;
    for (const auto& name : support) {
        const auto pi = p.find(name);
        const auto qi = q.find(name);
        sum += std::abs((pi == p.end() ? 0.0 : pi->second) -
                        (qi == q.end() ? 0.0 : qi->second));
    }
    return sum / 2.0;
}

double learner_centeredness(const Policy& policy,
                            const std::map<std::string, double>& orientation) {
    validate_policy(policy);
    double expectation = 0.0;
    for (const auto& [name, mass] : policy) {
        if (mass == 0.0) continue;
        const auto it = orientation.find(name);
        if (it == orientation.end())
            throw ValidationError("learner_centeredness: strategy '" + name +
                                  "' has no orientation score");
        expectation += mass * it->second;
    }
    return expectation;
}

DeviationReport deviation_report(const PolicyEstimate& control,
                                 const PolicyEstimate& intervention, const Policy& expert) {
    DeviationReport report;
    report.control = tvd(control.probabilities, expert);
    report.intervention = tvd(intervention.probabilities, expert);
    report.absolute_reduction = report.control - report.intervention;
    if (report.control > 0.0)
        report.relative_reduction = report.absolute_reduction / report.control;
    return report;
}

std::string to_string(Quadrant quadrant) {
    switch (quadrant) {
        case Quadrant::aligned: return "aligned";
        case Quadrant::neglected: return "neglected";
        case Quadrant::hallucinated: return "hallucinated";
        case Quadrant::irrelevant: return "irrelevant";
    }
    return "irrelevant";
}

Quadrant quadrant_classify(double relevance, double influence, double influence_threshold,
                           double relevance_threshold) {
    if (!std::isfinite(influence_threshold) || !std::isfinite(relevance_threshold))
        throw ValidationError("quadrant_classify: thresholds must be finite");
    const bool relevant = relevance >= relevance_threshold;
    const bool influential = influence > influence_threshold;
    if (relevant) return influential ? Quadrant::aligned : Quadrant::neglected;
    return influential ? Quadrant::hallucinated : Quadrant::irrelevant;
}

// --- Spearman ---

namespace {

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
                        sorted.begin();
        const auto hi = std::upper_bound(sorted.begin(), sorted.end(), values[i]) -
                        sorted.begin();
        // ties share the average of their rank span
        ranks[i] = (static_cast<double>(lo) + 1.0 + static_cast<double>(hi)) / 2.0;
    }
    return ranks;
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return std::nullopt;
    return cov / std::sqrt(va * vb);
}

}  // namespace

SpearmanResult spearman(const std::vector<double>& xs, const std::vector<double>& ys,
                        std::size_t permutations, uint64_t seed) {
    if (xs.size() != ys.size())
        throw ValidationError("spearman: input lengths differ");
    if (xs.size() < 3) throw ValidationError("spearman: needs >= 3 observations");

    const auto rx = average_ranks(xs);
    auto ry = average_ranks(ys);
    const auto rho = pearson(rx, ry);
    if (!rho) return {std::nullopt, std::nullopt};

    const double observed = std::abs(*rho);
    Rng rng(mix_seed({seed, fnv1a64("spearman-permutation")}));
    std::size_t at_least_as_extreme = 0;
    for (std::size_t p = 0; p < permutations; ++p) {
        for (std::size_t i = ry.size(); i > 1; --i)
            std::swap(ry[i - 1], ry[rng.index(i)]);
        const auto perm_rho = pearson(rx, ry);
        if (perm_rho && std::abs(*perm_rho) >= observed - 1e-12) ++at_least_as_extreme;
    }
    const double p_value = (static_cast<double>(at_least_as_extreme) + 1.0) /
                           (static_cast<double>(permutations) + 1.0);
    return {rho, p_value};
}

// --- Influence ---

InfluenceResult influence(Backend& backend, const LearningContext& s_star, std::size_t index,
                          const ActionSpace& actions, const InfluenceOptions& options) {
    if (index >= s_star.characteristics.size())
        throw ValidationError("influence: characteristic index out of range");

    EstimateOptions estimate_options;
    estimate_options.trials = options.trials;
    estimate_options.k = options.k;
    estimate_options.seed = options.seed;
    estimate_options.retry_budget = options.retry_budget;
    estimate_options.parallelism = options.parallelism;
    estimate_options.persist_dir = options.persist_dir;
    estimate_options.prompt_template = options.prompt_template;

    InfluenceResult result;
    if (options.shared_baseline) {
        result.star = *options.shared_baseline;
    } else {
        result.star = estimate_policy(backend, to_decision_state(s_star), actions,
                                      estimate_options);
    }
    const auto s_minus = omit_characteristic(s_star, index);
    result.minus = estimate_policy(backend, to_decision_state(s_minus), actions,
                                   estimate_options);

    result.influence = tvd(result.star.probabilities, result.minus.probabilities);
    result.degraded = result.star.degraded || result.minus.degraded;
    if (result.degraded)
        log_warn("influence: estimate pair for index " + std::to_string(index) +
                 " includes a degraded estimate");
    return result;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ValidationError("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return (values[mid - 1] + values[mid]) / 2.0;
}

}  // namespace lcprobe
