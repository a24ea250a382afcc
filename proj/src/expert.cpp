#include "lcprobe/expert.hpp"

#include <algorithm>
#include <cmath>

#include "lcprobe/common.hpp"

namespace lcprobe {

using nlohmann::json;

Orientation orientation_from_string(const std::string& label) {
    if (label == "learner-centered") return Orientation::learner_centered;
    if (label == "content-centered") return Orientation::content_centered;
    if (label == "balanced") return Orientation::balanced;
    throw ValidationError("orientation label must be learner-centered, content-centered or "
                          "balanced, got '" + label + "'");
}

std::string to_string(Orientation orientation) {
    switch (orientation) {
        case Orientation::learner_centered: return "learner-centered";
        case Orientation::content_centered: return "content-centered";
        case Orientation::balanced: return "balanced";
    }
    return "balanced";
}

double orientation_code(Orientation orientation) {
    switch (orientation) {
        case Orientation::learner_centered: return 1.0;
        case Orientation::content_centered: return -1.0;
        case Orientation::balanced: return 0.0;
    }
    return 0.0;
}

std::set<std::string> ExpertAnnotations::task2_characteristics() const {
    std::set<std::string> keys;
    for (const auto& [rater, units] : task2)
        for (const auto& [key, entry] : units) keys.insert(key);
    return keys;
}

std::set<std::string> ExpertAnnotations::task3_characteristics() const {
    std::set<std::string> keys;
    for (const auto& [rater, units] : task3)
        for (const auto& [key, entry] : units) keys.insert(key);
    return keys;
}

ExpertAnnotations annotations_from_json(const json& doc, const ActionSpace& actions) {
    if (!doc.is_object()) throw ValidationError("annotations: root must be an object");
    ExpertAnnotations ann;

    if (!doc.contains("raters") || !doc["raters"].is_array() || doc["raters"].size() < 1)
        throw ValidationError("annotations: 'raters' must be a non-empty array");
    for (const auto& r : doc["raters"]) ann.raters.push_back(r.get<std::string>());

    auto rater_known = [&](const std::string& rater) {
        return std::find(ann.raters.begin(), ann.raters.end(), rater) != ann.raters.end();
    };

    if (doc.contains("task1")) {
        for (auto rit = doc["task1"].begin(); rit != doc["task1"].end(); ++rit) {
            const std::string rater = rit.key();
            if (!rater_known(rater))
                throw ValidationError("task1." + rater + ": unknown rater id");
            for (auto uit = rit.value().begin(); uit != rit.value().end(); ++uit) {
                const std::string strategy = uit.key();
                if (!actions.contains(strategy))
                    throw ValidationError("task1." + rater + ".'" + strategy +
                                          "': unknown strategy name");
                Task1Entry entry;
                entry.label = orientation_from_string(
                    uit.value().at("label").get<std::string>());
                entry.justification = uit.value().value("justification", std::string());
                ann.task1[rater][strategy] = std::move(entry);
            }
            // every strategy in the action space must be covered
            for (const auto& s : actions.strategies())
                if (!ann.task1[rater].count(s.name))
                    throw ValidationError("task1." + rater + ": missing strategy '" + s.name +
                                          "'");
        }
    }

    if (doc.contains("task2")) {
        for (auto rit = doc["task2"].begin(); rit != doc["task2"].end(); ++rit) {
            const std::string rater = rit.key();
            if (!rater_known(rater))
                throw ValidationError("task2." + rater + ": unknown rater id");
            for (auto uit = rit.value().begin(); uit != rit.value().end(); ++uit) {
                const std::string key = uit.key();
                const std::string path = "task2." + rater + ".'" + key + "'";
                Task2Entry entry;
                for (const auto& js : uit.value().at("selections")) {
                    const std::string name = js.get<std::string>();
                    if (!actions.contains(name))
                        throw ValidationError(path + ": unknown strategy name '" + name + "'");
                    entry.selections.push_back(name);
                }
                if (entry.selections.size() != 5)
                    throw ValidationError(path + ": top-5 selection must have exactly 5 "
                                          "strategies, got " +
                                          std::to_string(entry.selections.size()));
                std::set<std::string> distinct(entry.selections.begin(),
                                               entry.selections.end());
                if (distinct.size() != 5)
                    throw ValidationError(path + ": selections must be distinct");
                entry.justification = uit.value().value("justification", std::string());
                ann.task2[rater][key] = std::move(entry);
            }
        }
    }

    if (doc.contains("task3")) {
        for (auto rit = doc["task3"].begin(); rit != doc["task3"].end(); ++rit) {
            const std::string rater = rit.key();
            if (!rater_known(rater))
                throw ValidationError("task3." + rater + ": unknown rater id");
            for (auto uit = rit.value().begin(); uit != rit.value().end(); ++uit) {
                const std::string key = uit.key();
                Task3Entry entry;
                entry.rating = uit.value().at("rating").get<int>();
                if (entry.rating < 1 || entry.rating > 5)
                    throw ValidationError("task3." + rater + ".'" + key + "'.rating: must be in "
                                          "{1..5}, got " + std::to_string(entry.rating));
                entry.justification = uit.value().value("justification", std::string());
                ann.task3[rater][key] = std::move(entry);
            }
        }
    }

    return ann;
}

ExpertAnnotations load_annotations(const std::string& path, const ActionSpace& actions) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("annotations " + path + ": " + e.what());
    }
    return annotations_from_json(doc, actions);
}

// --- Krippendorff's alpha ---

double krippendorff_alpha(const std::vector<std::vector<double>>& units, AlphaMetric metric) {
    // coincidence matrix over pairable values
    std::map<double, std::size_t> category_index;
    std::vector<std::vector<double>> pairable;
    for (const auto& unit : units) {
        std::vector<double> values;
        for (double v : unit)
            if (!std::isnan(v)) values.push_back(v);
        if (values.size() < 2) continue;
        for (double v : values) category_index.emplace(v, 0);
        pairable.push_back(std::move(values));
    }
    if (pairable.size() < 2)
        throw ValidationError("krippendorff_alpha: needs >= 2 units with >= 2 ratings");

    std::vector<double> categories;
    for (auto& [value, idx] : category_index) {
        idx = categories.size();
        categories.push_back(value);
    }
    const std::size_t c = categories.size();

    std::vector<std::vector<double>> o(c, std::vector<double>(c, 0.0));
    for (const auto& values : pairable) {
        const double weight = 1.0 / static_cast<double>(values.size() - 1);
        for (std::size_t i = 0; i < values.size(); ++i)
            for (std::size_t j = 0; j < values.size(); ++j)
                if (i != j) o[category_index[values[i]]][category_index[values[j]]] += weight;
    }

    std::vector<double> margin(c, 0.0);
    double n = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            margin[i] += o[i][j];
            n += o[i][j];
        }

    auto delta_sq = [&](std::size_t a, std::size_t b) -> double {
        if (a == b) return 0.0;
        if (metric == AlphaMetric::nominal) return 1.0;
        // ordinal: squared cumulative-margin difference
        const auto lo = std::min(a, b), hi = std::max(a, b);
        double s = 0.0;
        for (std::size_t g = lo; g <= hi; ++g) s += margin[g];
        s -= (margin[lo] + margin[hi]) / 2.0;
        return s * s;
    };

    double observed = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            observed += o[i][j] * delta_sq(i, j);
            expected += margin[i] * (i == j ? margin[j] - 1.0 : margin[j]) * delta_sq(i, j);
        }
    observed /= n;
    expected /= n * (n - 1.0);

    if (expected == 0.0) {
        log_info("krippendorff_alpha: zero expected disagreement (all values identical); "
                 "alpha defined as 1.0");
        return 1.0;
    }
    return 1.0 - observed / expected;
}

// --- Reference signals ---

OrientationScores orientation_scores(const ExpertAnnotations& annotations,
                                     const ActionSpace& actions) {
    if (annotations.task1.size() < 2)
        throw ValidationError("orientation_scores: needs task-1 data from >= 2 raters");

    OrientationScores out;
    std::vector<std::vector<double>> units;  // one unit per strategy
    for (const auto& s : actions.strategies()) {
        double sum = 0.0;
        std::vector<double> labels;
        for (const auto& [rater, entries] : annotations.task1) {
            const auto it = entries.find(s.name);
            if (it == entries.end())
                throw ValidationError("orientation_scores: rater '" + rater +
                                      "' missing strategy '" + s.name + "'");
            const double code = orientation_code(it->second.label);
            sum += code;
            labels.push_back(code);
        }
        out.scores[s.name] = sum / static_cast<double>(annotations.task1.size());
        units.push_back(std::move(labels));
    }
    out.alpha = krippendorff_alpha(units, AlphaMetric::nominal);
    return out;
}

std::map<std::string, Policy> per_characteristic_policies(const ExpertAnnotations& annotations) {
    std::map<std::string, Policy> out;
    std::map<std::string, int> rater_counts;
    for (const auto& [rater, units] : annotations.task2) {
        for (const auto& [key, entry] : units) {
            auto& policy = out[key];
            for (const auto& name : entry.selections) policy[name] += 1.0 / 5.0;
            ++rater_counts[key];
        }
    }
    for (auto& [key, policy] : out) {
        const double raters = rater_counts[key];
        for (auto& [name, mass] : policy) mass /= raters;
    }
    return out;
}

Policy aggregate_expert_policy(const ExpertAnnotations& annotations,
                               const std::vector<std::string>& characteristic_keys) {
    if (characteristic_keys.empty())
        throw ValidationError("aggregate_expert_policy: needs >= 1 characteristic");
    const auto per_char = per_characteristic_policies(annotations);

    Policy mixture;
    for (const auto& key : characteristic_keys) {
        const auto it = per_char.find(key);
        if (it == per_char.end())
            throw ValidationError("aggregate_expert_policy: characteristic '" + key +
                                  "' has no task-2 annotations");
        for (const auto& [name, mass] : it->second)
            mixture[name] += mass / static_cast<double>(characteristic_keys.size());
    }

    // renormalize against accumulated float drift
    double total = 0.0;
    for (const auto& [name, mass] : mixture) total += mass;
    for (auto& [name, mass] : mixture) mass /= total;
    validate_policy(mixture);
    return mixture;
}

double mean_pairwise_overlap(const ExpertAnnotations& annotations) {
    double total = 0.0;
    int pairs = 0;
    for (const auto& key : annotations.task2_characteristics()) {
        std::vector<const Task2Entry*> entries;
        for (const auto& [rater, units] : annotations.task2)
            if (auto it = units.find(key); it != units.end()) entries.push_back(&it->second);
        for (std::size_t i = 0; i < entries.size(); ++i)
            for (std::size_t j = i + 1; j < entries.size(); ++j) {
                const std::set<std::string> a(entries[i]->selections.begin(),
                                              entries[i]->selections.end());
                int overlap = 0;
                for (const auto& name : entries[j]->selections) overlap += a.count(name);
                total += overlap;
                ++pairs;
            }
    }
    if (pairs == 0) throw ValidationError("mean_pairwise_overlap: needs >= 2 raters per unit");
    return total / pairs;
}

std::map<std::string, double> relevance_scores(const ExpertAnnotations& annotations) {
    std::map<std::string, double> sums;
    std::map<std::string, int> counts;
    for (const auto& [rater, units] : annotations.task3)
        for (const auto& [key, entry] : units) {
            sums[key] += entry.rating;
            ++counts[key];
        }
    std::map<std::string, double> out;
    for (const auto& [key, sum] : sums) out[key] = sum / counts[key];
    return out;
}

ExpertReference build_expert_reference(const ExpertAnnotations& annotations,
                                       const ActionSpace& actions) {
    ExpertReference ref;
    const auto orientation = orientation_scores(annotations, actions);
    ref.orientation_score = orientation.scores;
    ref.task1_alpha = orientation.alpha;
    ref.per_characteristic_policy = per_characteristic_policies(annotations);
    ref.relevance = relevance_scores(annotations);
    ref.task2_mean_overlap = mean_pairwise_overlap(annotations);

    // task 3 alpha over characteristic units, ordinal (ratings are ordered)
    std::vector<std::vector<double>> units;
    for (const auto& key : annotations.task3_characteristics()) {
        std::vector<double> ratings;
        for (const auto& rater : annotations.raters) {
            const auto rit = annotations.task3.find(rater);
            if (rit == annotations.task3.end()) continue;
            const auto uit = rit->second.find(key);
            ratings.push_back(uit == rit->second.end() ? std::nan("")
                                                       : static_cast<double>(uit->second.rating));
        }
        units.push_back(std::move(ratings));
    }
    ref.task3_alpha = krippendorff_alpha(units, AlphaMetric::ordinal);
    return ref;
}

}  // namespace lcprobe
