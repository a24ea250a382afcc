#include "lcprobe/psychometric.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lcprobe/common.hpp"

namespace lcprobe {

namespace {

// stream domains for seed derivation
constexpr uint64_t kConstructStream = 0xC0;
constexpr uint64_t kItemStream = 0x17E;

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

}  // namespace

PsychometricModel PsychometricModel::create(std::vector<ConstructSpec> constructs,
                                            Matrix correlation, std::vector<ItemSpec> items,
                                            LikertBounds bounds) {
    const std::size_t n = constructs.size();
    if (n == 0) throw ValidationError("constructs: must be non-empty");
    if (correlation.rows() != n || correlation.cols() != n)
        throw ValidationError("correlation: dimension " + std::to_string(correlation.rows()) +
                              "x" + std::to_string(correlation.cols()) +
                              " does not match construct count " + std::to_string(n));
    if (!(bounds.min < bounds.max))
        throw ValidationError("likert_bounds: min " + fmt(bounds.min) + " must be < max " +
                              fmt(bounds.max));

    PsychometricModel model;
    std::set<std::string> construct_ids;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = constructs[i];
        const std::string path = "constructs[" + std::to_string(i) + "]";
        if (c.id.empty()) throw ValidationError(path + ".id: must be non-empty");
        if (!construct_ids.insert(c.id).second)
            throw ValidationError(path + ".id: duplicate construct id '" + c.id + "'");
        if (!(c.sd > 0.0))
            throw ValidationError(path + ".sd: must be > 0, got " + fmt(c.sd));
        model.construct_by_id_[c.id] = i;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(correlation(i, i) - 1.0) > 1e-12)
            throw ValidationError("correlation[" + std::to_string(i) + "][" + std::to_string(i) +
                                  "]: diagonal must be 1, got " + fmt(correlation(i, i)));
        for (std::size_t j = 0; j < n; ++j) {
            const double v = correlation(i, j);
            if (v < -1.0 || v > 1.0)
                throw ValidationError("correlation[" + std::to_string(i) + "][" +
                                      std::to_string(j) + "]: entry " + fmt(v) +
                                      " outside [-1, 1]");
            if (j > i && std::abs(v - correlation(j, i)) > 1e-12)
                throw ValidationError("correlation: asymmetric at [" + std::to_string(i) + "][" +
                                      std::to_string(j) + "] vs [" + std::to_string(j) + "][" +
                                      std::to_string(i) + "] (" + fmt(v) + " != " +
                                      fmt(correlation(j, i)) + ")");
        }
    }

    if (items.empty()) throw ValidationError("items: must be non-empty");
    std::set<std::string> covered;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& it = items[i];
        const std::string path = "items[" + std::to_string(i) + "]";
        if (it.id.empty()) throw ValidationError(path + ".id: must be non-empty");
        if (model.item_by_id_.count(it.id))
            throw ValidationError(path + ".id: duplicate item id '" + it.id + "'");
        if (!model.construct_by_id_.count(it.construct))
            throw ValidationError(path + ".construct: unknown construct '" + it.construct + "'");
        if (!(it.loading > 0.0 && it.loading <= 1.0))
            throw ValidationError(path + ".loading: must be in (0, 1], got " + fmt(it.loading));
        if (it.statement.empty()) throw ValidationError(path + ".statement: must be non-empty");
        model.item_by_id_[it.id] = i;
        covered.insert(it.construct);
    }
    for (const auto& c : constructs) {
        if (!covered.count(c.id))
            throw ValidationError("constructs: construct '" + c.id + "' has no items");
    }

    // covariance = diag(sd) R diag(sd); repair near-PSD rounding damage
    Matrix cov(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            cov(i, j) = constructs[i].sd * constructs[j].sd * correlation(i, j);

    auto eig = sym_eigen(cov);
    const double min_eig = eig.eigenvalues.front();
    if (min_eig < -1e-8)
        throw ValidationError("correlation: covariance min eigenvalue " + fmt(min_eig) +
                              " below -1e-8; matrix is not repairably positive semi-definite");
    bool repaired = false;
    if (min_eig < 1e-10) {
        // shift eigenvalues up to >= 1e-10 and reconstruct
        repaired = true;
        log_warn("psychometric model: covariance min eigenvalue " + fmt(min_eig) +
                 "; applying eigenvalue jitter repair");
        Matrix fixed(n, n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double lambda = std::max(eig.eigenvalues[k], 1e-10);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    fixed(i, j) += lambda * eig.eigenvectors(i, k) * eig.eigenvectors(j, k);
        }
        cov = fixed;
    }

    Matrix factor;
    if (!cholesky_lower(cov, factor)) {
        // rounding in the reconstruction can still trip a zero pivot; one ridge retry
        double trace = 0.0;
        for (std::size_t i = 0; i < n; ++i) trace += cov(i, i);
        const double ridge = 1e-12 * trace / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) cov(i, i) += ridge;
        if (!cholesky_lower(cov, factor))
            throw ValidationError("correlation: covariance factorization failed after repair; "
                                  "model is unrecoverable");
        repaired = true;
    }

    model.constructs_ = std::move(constructs);
    model.correlation_ = std::move(correlation);
    model.items_ = std::move(items);
    model.bounds_ = bounds;
    model.factor_ = std::move(factor);
    model.repaired_ = repaired;
    return model;
}

std::size_t PsychometricModel::construct_index(const std::string& id) const {
    auto it = construct_by_id_.find(id);
    if (it == construct_by_id_.end()) throw Error("unknown construct id: " + id);
    return it->second;
}

const ConstructSpec& PsychometricModel::construct(const std::string& id) const {
    return constructs_[construct_index(id)];
}

const ItemSpec& PsychometricModel::item(const std::string& id) const {
    auto it = item_by_id_.find(id);
    if (it == item_by_id_.end()) throw Error("unknown item id: " + id);
    return items_[it->second];
}

PsychometricModel load_model_from_json(const nlohmann::json& doc) {
    auto require = [](const nlohmann::json& j, const char* key, const std::string& path) {
        if (!j.contains(key)) throw ValidationError(path + ": missing required key '" + key + "'");
        return j.at(key);
    };

    if (!doc.is_object()) throw ValidationError("statistics document: root must be an object");

    std::vector<ConstructSpec> constructs;
    const auto jc = require(doc, "constructs", "statistics document");
    if (!jc.is_array()) throw ValidationError("constructs: must be an array");
    for (std::size_t i = 0; i < jc.size(); ++i) {
        const std::string path = "constructs[" + std::to_string(i) + "]";
        const auto& e = jc[i];
        ConstructSpec c;
        c.id = require(e, "id", path).get<std::string>();
        c.name = e.value("name", c.id);
        c.mean = require(e, "mean", path).get<double>();
        c.sd = require(e, "sd", path).get<double>();
        constructs.push_back(std::move(c));
    }

    const auto jr = require(doc, "correlation", "statistics document");
    if (!jr.is_array() || jr.size() != constructs.size())
        throw ValidationError("correlation: must be a " + std::to_string(constructs.size()) + "x" +
                              std::to_string(constructs.size()) + " row-major matrix");
    Matrix correlation(constructs.size(), constructs.size());
    for (std::size_t i = 0; i < jr.size(); ++i) {
        if (!jr[i].is_array() || jr[i].size() != constructs.size())
            throw ValidationError("correlation[" + std::to_string(i) + "]: wrong row length");
        for (std::size_t j = 0; j < jr[i].size(); ++j)
            correlation(i, j) = jr[i][j].get<double>();
    }

    std::vector<ItemSpec> items;
    const auto ji = require(doc, "items", "statistics document");
    if (!ji.is_array()) throw ValidationError("items: must be an array");
    for (std::size_t i = 0; i < ji.size(); ++i) {
        const std::string path = "items[" + std::to_string(i) + "]";
        const auto& e = ji[i];
        ItemSpec it;
        it.id = require(e, "id", path).get<std::string>();
        it.construct = require(e, "construct", path).get<std::string>();
        it.loading = require(e, "loading", path).get<double>();
        it.statement = require(e, "statement", path).get<std::string>();
        items.push_back(std::move(it));
    }

    LikertBounds bounds;
    if (doc.contains("likert_bounds")) {
        bounds.min = require(doc["likert_bounds"], "min", "likert_bounds").get<double>();
        bounds.max = require(doc["likert_bounds"], "max", "likert_bounds").get<double>();
    }

    return PsychometricModel::create(std::move(constructs), std::move(correlation),
                                     std::move(items), bounds);
}

PsychometricModel load_model(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("statistics document " + path + ": " + e.what());
    }
    return load_model_from_json(doc);
}

std::vector<std::vector<double>> sample_constructs(const PsychometricModel& model, uint64_t seed,
                                                   std::size_t n) {
    if (n == 0) throw ValidationError("sample_constructs: n must be >= 1");
    const std::size_t dim = model.constructs().size();
    const Matrix& factor = model.covariance_factor();

    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    std::vector<double> u(dim);
    for (std::size_t p = 0; p < n; ++p) {
        Rng rng(mix_seed({seed, kConstructStream, p}));
        for (std::size_t i = 0; i < dim; ++i) u[i] = rng.normal();
        for (std::size_t i = 0; i < dim; ++i) {
            double z = model.constructs()[i].mean;
            for (std::size_t j = 0; j <= i; ++j) z += factor(i, j) * u[j];
            out[p][i] = z;
        }
    }
    return out;
}

std::map<std::string, ItemResponse> sample_items(const PsychometricModel& model,
                                                 const std::vector<double>& construct_scores,
                                                 uint64_t seed) {
    if (construct_scores.size() != model.constructs().size())
        throw ValidationError("sample_items: score vector length " +
                              std::to_string(construct_scores.size()) +
                              " does not match construct count " +
                              std::to_string(model.constructs().size()));

    const auto& bounds = model.likert_bounds();
    std::map<std::string, ItemResponse> out;
    for (std::size_t j = 0; j < model.items().size(); ++j) {
        const auto& item = model.items()[j];
        const std::size_t ci = model.construct_index(item.construct);
        const double sd = model.constructs()[ci].sd;
        const double noise_var = sd * sd * (1.0 - item.loading * item.loading);

        // per-item stream keyed by index, so responses do not depend on
        // evaluation order
        Rng rng(mix_seed({seed, kItemStream, j}));
        const double eta = rng.normal() * std::sqrt(noise_var);
        ItemResponse r;
        r.raw = item.loading * construct_scores[ci] + eta;
        r.clamped = std::clamp(r.raw, bounds.min, bounds.max);
        out[item.id] = r;
    }
    return out;
}

LearnerProfile sample_profile(const PsychometricModel& model, const std::string& profile_id,
                              uint64_t seed, std::size_t index) {
    LearnerProfile profile;
    profile.profile_id = profile_id;
    profile.seed = seed;

    Rng rng(mix_seed({seed, kConstructStream, index}));
    const std::size_t dim = model.constructs().size();
    const Matrix& factor = model.covariance_factor();
    std::vector<double> u(dim), z(dim);
    for (std::size_t i = 0; i < dim; ++i) u[i] = rng.normal();
    for (std::size_t i = 0; i < dim; ++i) {
        double v = model.constructs()[i].mean;
        for (std::size_t j = 0; j <= i; ++j) v += factor(i, j) * u[j];
        z[i] = v;
        profile.construct_scores[model.constructs()[i].id] = v;
    }

    profile.item_responses = sample_items(model, z, mix_seed({seed, kItemStream, index}));
    return profile;
}

}  // namespace lcprobe
