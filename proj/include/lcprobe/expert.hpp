#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lcprobe/policy.hpp"

namespace lcprobe {

enum class Orientation { learner_centered, content_centered, balanced };

Orientation orientation_from_string(const std::string& label);
std::string to_string(Orientation orientation);
// +1 learner-centered, -1 content-centered, 0 balanced
double orientation_code(Orientation orientation);

struct Task1Entry {
    Orientation label = Orientation::balanced;
    std::string justification;
};

struct Task2Entry {
    std::vector<std::string> selections;  // exactly 5 distinct in-catalog names
    std::string justification;
};

struct Task3Entry {
    int rating = 0;  // 1..5
    std::string justification;
};

// Three structured annotation tasks, keyed rater -> unit.
// Task 2/3 units are characteristic keys: construct ids for MSLQ-derived
// characteristics, catalog ids (null-1..null-8) for null characteristics.
struct ExpertAnnotations {
    std::vector<std::string> raters;
    std::map<std::string, std::map<std::string, Task1Entry>> task1;  // rater -> strategy
    std::map<std::string, std::map<std::string, Task2Entry>> task2;  // rater -> characteristic
    std::map<std::string, std::map<std::string, Task3Entry>> task3;  // rater -> characteristic

    std::set<std::string> task2_characteristics() const;
    std::set<std::string> task3_characteristics() const;
};

ExpertAnnotations load_annotations(const std::string& path, const ActionSpace& actions);
ExpertAnnotations annotations_from_json(const nlohmann::json& doc, const ActionSpace& actions);

// --- Reliability ---

enum class AlphaMetric { nominal, ordinal };

// Krippendorff's alpha via the coincidence-matrix formulation.
// `units`: one vector of ratings per unit; NaN marks a missing rating.
// All values identical => no expected disagreement => alpha := 1.0 (logged).
double krippendorff_alpha(const std::vector<std::vector<double>>& units, AlphaMetric metric);

// --- Derived reference signals ---

struct OrientationScores {
    std::map<std::string, double> scores;  // strategy -> mean coded label, in [-1, 1]
    double alpha = 0.0;                    // nominal, over task 1 labels
};

OrientationScores orientation_scores(const ExpertAnnotations& annotations,
                                     const ActionSpace& actions);

// Per-characteristic expert policy: mean over raters of the 1/5-indicator
// policies from task 2.
std::map<std::string, Policy> per_characteristic_policies(const ExpertAnnotations& annotations);

// Uniform mixture of the per-characteristic policies for the given keys.
Policy aggregate_expert_policy(const ExpertAnnotations& annotations,
                               const std::vector<std::string>& characteristic_keys);

// Mean size of the pairwise intersection of raters' top-5 sets, averaged over
// characteristics; in [0, 5].
double mean_pairwise_overlap(const ExpertAnnotations& annotations);

// characteristic -> mean task-3 rating, in [1, 5]
std::map<std::string, double> relevance_scores(const ExpertAnnotations& annotations);

struct ExpertReference {
    std::map<std::string, double> orientation_score;
    double task1_alpha = 0.0;
    std::map<std::string, Policy> per_characteristic_policy;
    std::map<std::string, double> relevance;
    double task3_alpha = 0.0;  // ordinal
    double task2_mean_overlap = 0.0;
};

ExpertReference build_expert_reference(const ExpertAnnotations& annotations,
                                       const ActionSpace& actions);

}  // namespace lcprobe
