#include "lcprobe/gateway.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "lcprobe/common.hpp"

#include "httplib.h"
#include "json.hpp"

namespace lcprobe {

using nlohmann::json;

// --- ScriptedBackend ---

void validate_scripted_law(const ScriptedLaw& law) {
    if (law.k < 1) throw ValidationError("scripted law: k must be >= 1");
    if (law.entries.empty()) throw ValidationError("scripted law: entries must be non-empty");
    for (std::size_t i = 0; i < law.entries.size(); ++i) {
        const auto& e = law.entries[i];
        const std::string path = "entries[" + std::to_string(i) + "]";
        if (e.key.empty()) throw ValidationError(path + ".key: must be non-empty ('*' = wildcard)");
        int positive = 0;
        for (const auto& [name, w] : e.weights) {
            if (w < 0.0)
                throw ValidationError(path + ".weights['" + name + "']: negative weight");
            if (w > 0.0) ++positive;
        }
        if (positive < law.k)
            throw ValidationError(path + ".weights: needs >= k=" + std::to_string(law.k) +
                                  " strategies with positive weight, has " +
                                  std::to_string(positive));
    }
}

ScriptedLaw load_scripted_law(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError("scripted law " + path + ": " + e.what());
    }
    ScriptedLaw law;
    law.k = doc.value("k", 5);
    law.seed = doc.value("seed", uint64_t{0});
    law.stream_by_prompt = doc.value("stream_by_prompt", false);
    if (!doc.contains("entries") || !doc["entries"].is_array())
        throw ValidationError("scripted law: missing 'entries' array");
    for (const auto& je : doc["entries"]) {
        ScriptedLaw::Entry entry;
        entry.key = je.value("key", std::string("*"));
        if (!je.contains("weights") || !je["weights"].is_object())
            throw ValidationError("scripted law: entry missing 'weights' object");
        for (auto it = je["weights"].begin(); it != je["weights"].end(); ++it)
            entry.weights[it.key()] = it.value().get<double>();
        law.entries.push_back(std::move(entry));
    }
    validate_scripted_law(law);
    return law;
}

ScriptedBackend::ScriptedBackend(ScriptedLaw law) : law_(std::move(law)) {
    validate_scripted_law(law_);
}

const ScriptedLaw::Entry& ScriptedBackend::match_entry(const std::string& prompt) const {
    const ScriptedLaw::Entry* wildcard = nullptr;
    for (const auto& e : law_.entries) {
        if (e.key == "*") {
            if (!wildcard) wildcard = &e;
            continue;
        }
        if (prompt.find(e.key) != std::string::npos) return e;
    }
    if (wildcard) return *wildcard;
    throw Error("scripted backend: no law entry matches the prompt and no wildcard is defined");
}

std::vector<std::string> ScriptedBackend::sample_without_replacement(
    const std::map<std::string, double>& weights, int count, uint64_t seed) {
    std::vector<std::pair<std::string, double>> remaining;
    for (const auto& [name, w] : weights)
        if (w > 0.0) remaining.emplace_back(name, w);
    if (static_cast<int>(remaining.size()) < count)
        throw Error("sample_without_replacement: fewer positive weights than draws");

    Rng rng(seed);
    std::vector<std::string> selected;
    selected.reserve(static_cast<std::size_t>(count));
    for (int d = 0; d < count; ++d) {
        double total = 0.0;
        for (const auto& [name, w] : remaining) total += w;
        const double u = rng.uniform() * total;
        double acc = 0.0;
        std::size_t pick = remaining.size() - 1;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            acc += remaining[i].second;
            if (u < acc) {
                pick = i;
                break;
            }
        }
        selected.push_back(remaining[pick].first);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return selected;
}

namespace {

// tag format "<state_ref>#t<trial>#a<attempt>"; absent -> 0
uint64_t trial_index_from_tag(const std::string& tag) {
    const auto pos = tag.rfind("#t");
    if (pos == std::string::npos) return 0;
    uint64_t value = 0;
    bool any = false;
    for (std::size_t i = pos + 2; i < tag.size() && tag[i] >= '0' && tag[i] <= '9'; ++i) {
        value = value * 10 + static_cast<uint64_t>(tag[i] - '0');
        any = true;
    }
    return any ? value : 0;
}

}  // namespace

std::string ScriptedBackend::complete(const CompletionRequest& request) {
    const auto& entry = match_entry(request.prompt);
    const uint64_t trial = trial_index_from_tag(request.tag);
    const uint64_t stream_key =
        law_.stream_by_prompt ? fnv1a64(request.prompt) : fnv1a64(entry.key);
    const uint64_t seed = mix_seed({law_.seed, stream_key, trial});
    const auto names = sample_without_replacement(entry.weights, law_.k, seed);
    return json(names).dump();
}

// --- HttpBackend ---

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) throw ValidationError("http backend: endpoint must be set");
    if (config_.backoff.max_attempts < 1)
        throw ValidationError("http backend: max_attempts must be >= 1");
}

std::string HttpBackend::id() const { return "http:" + config_.model + "@" + config_.endpoint; }

namespace {

// split "scheme://host[:port]/path" into client base and request path
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("http backend: endpoint must include a scheme: " + endpoint);
    const auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, "/"};
    return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

json value_or_string(const std::string& raw) {
    // decoding params arrive as strings; pass numbers/bools/null through as JSON
    const auto parsed = json::parse(raw, nullptr, false);
    if (!parsed.is_discarded() && !parsed.is_object() && !parsed.is_array() &&
        !parsed.is_string())
        return parsed;
    return json(raw);
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

std::string HttpBackend::complete(const CompletionRequest& request) {
    const auto [base, path] = split_endpoint(config_.endpoint);

    json body;
    body["model"] = config_.model;
    body["messages"] = json::array({json{{"role", "user"}, {"content", request.prompt}}});
    for (const auto& [key, value] : request.params) {
        if (key == "model" || key == "messages") continue;
        body[key] = value_or_string(value);
    }
    const std::string payload = body.dump();

    httplib::Headers headers;
    for (const auto& [name, value] : config_.headers) headers.emplace(name, value);
    if (!config_.api_key_env.empty() && !config_.headers.count("Authorization")) {
        if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
            headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    std::string last_error;
    auto delay = config_.backoff.base;
    for (int attempt = 1; attempt <= config_.backoff.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(delay);
            delay = std::chrono::milliseconds(
                static_cast<long long>(static_cast<double>(delay.count()) *
                                       config_.backoff.factor));
        }

        httplib::Client client(base);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);

        auto res = client.Post(path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport failure: " + httplib::to_string(res.error());
            continue;
        }
        if (retryable_status(res->status)) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status < 200 || res->status >= 300)
            throw TransportError("http backend: non-retryable status " +
                                 std::to_string(res->status) + ": " + res->body);

        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message"))
            throw TransportError("http backend: malformed completion response");
        return reply["choices"][0]["message"].value("content", std::string());
    }
    throw TransportError("http backend: retries exhausted after " +
                         std::to_string(config_.backoff.max_attempts) +
                         " attempts; last error: " + last_error);
}

// --- Replay cache ---

ReplayCache::ReplayCache(std::string dir) : dir_(std::move(dir)) {
    if (dir_.empty()) throw ValidationError("replay cache: directory must be set");
}

std::string ReplayCache::record_path(const CompletionRequest& request) const {
    const std::string key =
        sha256_hex(request.prompt).substr(0, 24) + "-" + sha256_hex(request.tag).substr(0, 24);
    return (std::filesystem::path(dir_) / (key + ".json")).string();
}

std::optional<std::string> ReplayCache::lookup(const CompletionRequest& request) const {
    const auto path = record_path(request);
    if (!std::filesystem::exists(path)) return std::nullopt;
    json record = json::parse(read_file(path), nullptr, false);
    if (record.is_discarded()) throw IoError("replay cache: corrupt record " + path);
    if (record.value("prompt_hash", std::string()) != sha256_hex(request.prompt) ||
        record.value("tag", std::string()) != request.tag)
        throw CacheMissError("replay cache: key collision at " + path);
    return record.value("response", std::string());
}

void ReplayCache::store(const CompletionRequest& request, const std::string& response,
                        const std::string& backend_id) {
    json record;
    record["schema_version"] = 1;
    record["prompt_hash"] = sha256_hex(request.prompt);
    record["tag"] = request.tag;
    record["backend_id"] = backend_id;
    record["response"] = response;
    std::lock_guard<std::mutex> lock(write_mutex_);
    write_file(record_path(request), record.dump(2) + "\n");
}

std::optional<std::string> ReplayCache::recorded_backend_id() const {
    const auto meta = (std::filesystem::path(dir_) / "meta.json").string();
    if (!std::filesystem::exists(meta)) return std::nullopt;
    json doc = json::parse(read_file(meta), nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    return doc.value("backend_id", std::string());
}

void ReplayCache::write_meta(const std::string& backend_id) {
    json doc;
    doc["schema_version"] = 1;
    doc["backend_id"] = backend_id;
    std::lock_guard<std::mutex> lock(write_mutex_);
    write_file((std::filesystem::path(dir_) / "meta.json").string(), doc.dump(2) + "\n");
}

RecordingBackend::RecordingBackend(std::shared_ptr<Backend> inner,
                                   std::shared_ptr<ReplayCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {
    cache_->write_meta(inner_->id());
}

std::string RecordingBackend::complete(const CompletionRequest& request) {
    // an existing record wins, so re-runs against a warm cache stay stable
    if (auto hit = cache_->lookup(request)) return *hit;
    const auto response = inner_->complete(request);
    cache_->store(request, response, inner_->id());
    return response;
}

ReplayBackend::ReplayBackend(std::shared_ptr<ReplayCache> cache) : cache_(std::move(cache)) {
    id_ = cache_->recorded_backend_id().value_or("replay");
}

std::string ReplayBackend::id() const { return id_; }

std::string ReplayBackend::complete(const CompletionRequest& request) {
    if (auto hit = cache_->lookup(request)) return *hit;
    throw CacheMissError("replay cache miss for tag '" + request.tag + "' in " + cache_->dir());
}

}  // namespace lcprobe
