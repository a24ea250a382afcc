#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace lcprobe {

struct CompletionRequest {
    std::string prompt;
    std::map<std::string, std::string> params;  // decoding parameters, passed through opaquely
    std::string backend_id;
    // Replay/scripting key. The policy engine formats it as
    // "<state_ref>#s<seed>#t<trial>#a<attempt>"; the scripted backend reads
    // the trial index from the "#t" field (0 when absent).
    std::string tag;
};

// A model backend. Implementations must tolerate concurrent complete() calls.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    virtual std::string complete(const CompletionRequest& request) = 0;
};

// --- Scripted backend ---

// Test oracle backend: per matched context fingerprint, k strategies are drawn
// without replacement proportional to weights. Streams are keyed by
// (matched entry key, trial index), so a wildcard-only law answers identically
// across contexts for equal trial indices. With stream_by_prompt the key is
// the prompt hash instead, which models a stochastic state-independent model.
struct ScriptedLaw {
    struct Entry {
        std::string key;  // substring matched against the prompt; "*" = wildcard
        std::map<std::string, double> weights;
    };
    std::vector<Entry> entries;
    int k = 5;
    uint64_t seed = 0;
    bool stream_by_prompt = false;
};

ScriptedLaw load_scripted_law(const std::string& path);
void validate_scripted_law(const ScriptedLaw& law);

class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(ScriptedLaw law);

    std::string id() const override { return "scripted"; }
    std::string complete(const CompletionRequest& request) override;

    // Draws `count` keys without replacement, proportional to weights,
    // renormalizing after each draw.
    static std::vector<std::string> sample_without_replacement(
        const std::map<std::string, double>& weights, int count, uint64_t seed);

private:
    const ScriptedLaw::Entry& match_entry(const std::string& prompt) const;

    ScriptedLaw law_;
};

// --- HTTP backend ---

struct BackoffPolicy {
    std::chrono::milliseconds base{1000};
    double factor = 2.0;
    int max_attempts = 5;
};

struct HttpBackendConfig {
    std::string endpoint;  // e.g. https://host:port/v1/chat/completions
    std::string model;
    std::map<std::string, std::string> headers;
    std::string api_key_env = "LCPROBE_API_KEY";
    BackoffPolicy backoff;
    int timeout_seconds = 120;
};

// Chat-completion-style JSON POST with exponential backoff on transport
// errors, 429 and 5xx. Credentials come from the configured environment
// variable and never enter ids or persisted records.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string id() const override;
    std::string complete(const CompletionRequest& request) override;

private:
    HttpBackendConfig config_;
};

// --- Record/replay cache ---

// Directory of request-hash-named JSON records; single writer during
// recording, many readers during replay.
class ReplayCache {
public:
    explicit ReplayCache(std::string dir);

    std::optional<std::string> lookup(const CompletionRequest& request) const;
    void store(const CompletionRequest& request, const std::string& response,
               const std::string& backend_id);

    // backend id captured at record time (from meta.json)
    std::optional<std::string> recorded_backend_id() const;
    void write_meta(const std::string& backend_id);

    const std::string& dir() const { return dir_; }

private:
    std::string record_path(const CompletionRequest& request) const;

    std::string dir_;
    mutable std::mutex write_mutex_;
};

// Pass-through wrapper that records every response.
class RecordingBackend : public Backend {
public:
    RecordingBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ReplayCache> cache);

    std::string id() const override { return inner_->id(); }
    std::string complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<Backend> inner_;
    std::shared_ptr<ReplayCache> cache_;
};

// Strict replay: a miss is an error. Reports the backend id captured at
// record time so replayed artifacts match the original run.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::shared_ptr<ReplayCache> cache);

    std::string id() const override;
    std::string complete(const CompletionRequest& request) override;

private:
    std::shared_ptr<ReplayCache> cache_;
    std::string id_;
};

}  // namespace lcprobe
