#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lcprobe/linalg.hpp"

#include "json.hpp"

namespace lcprobe {

struct ConstructSpec {
    std::string id;
    std::string name;
    double mean = 0.0;  // Likert units
    double sd = 0.0;    // Likert units
};

struct ItemSpec {
    std::string id;
    std::string construct;  // owning construct id
    double loading = 0.0;   // lambda, in (0, 1]
    std::string statement;  // questionnaire prompt, first person
};

struct LikertBounds {
    double min = 1.0;
    double max = 7.0;
};

// Validated construct/item statistics. Construction runs the full invariant
// suite and prepares the covariance factor, so downstream sampling never
// revalidates.
class PsychometricModel {
public:
    static PsychometricModel create(std::vector<ConstructSpec> constructs, Matrix correlation,
                                    std::vector<ItemSpec> items, LikertBounds bounds = {});

    const std::vector<ConstructSpec>& constructs() const { return constructs_; }
    const Matrix& correlation() const { return correlation_; }
    const std::vector<ItemSpec>& items() const { return items_; }
    const LikertBounds& likert_bounds() const { return bounds_; }

    // lower-triangular factor of the (possibly repaired) covariance diag(sd)*R*diag(sd)
    const Matrix& covariance_factor() const { return factor_; }
    bool covariance_repaired() const { return repaired_; }

    std::size_t construct_index(const std::string& id) const;
    const ConstructSpec& construct(const std::string& id) const;
    const ItemSpec& item(const std::string& id) const;

private:
    PsychometricModel() = default;

    std::vector<ConstructSpec> constructs_;
    Matrix correlation_;
    std::vector<ItemSpec> items_;
    LikertBounds bounds_;
    Matrix factor_;
    bool repaired_ = false;
    std::map<std::string, std::size_t> construct_by_id_;
    std::map<std::string, std::size_t> item_by_id_;
};

struct ItemResponse {
    double raw = 0.0;      // unclamped model output
    double clamped = 0.0;  // raw clamped into likert bounds
};

struct LearnerProfile {
    std::string profile_id;
    std::map<std::string, double> construct_scores;     // construct id -> z
    std::map<std::string, ItemResponse> item_responses; // item id -> x
    uint64_t seed = 0;
};

// Statistics document (see docs/schemas.md for the schema) -> validated model.
PsychometricModel load_model(const std::string& path);
PsychometricModel load_model_from_json(const nlohmann::json& doc);

// n i.i.d. draws of z ~ N(mu, diag(sd) R diag(sd)). Row i depends only on
// (model, seed, i), so profiles are independent of batch size and evaluation
// order.
std::vector<std::vector<double>> sample_constructs(const PsychometricModel& model, uint64_t seed,
                                                   std::size_t n);

// x_j = loading_j * z_{c(j)} + eta_j,  eta_j ~ N(0, sd_{c(j)}^2 (1 - loading_j^2)),
// independent across items; clamped copy alongside the raw value.
std::map<std::string, ItemResponse> sample_items(const PsychometricModel& model,
                                                 const std::vector<double>& construct_scores,
                                                 uint64_t seed);

// Full profile for counter `index` under the run seed.
LearnerProfile sample_profile(const PsychometricModel& model, const std::string& profile_id,
                              uint64_t seed, std::size_t index);

}  // namespace lcprobe
