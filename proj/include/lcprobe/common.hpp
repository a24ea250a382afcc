#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lcprobe {

// --- Errors ---

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Schema/invariant violations; messages carry the offending field path.
struct ValidationError : Error {
    using Error::Error;
};

// Model output that cannot be resolved into a valid selection.
struct ParseError : Error {
    using Error::Error;
};

// HTTP backend exhausted its retry budget.
struct TransportError : Error {
    using Error::Error;
};

// Strict replay requested a response that was never recorded.
struct CacheMissError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// --- Logging ---
// Minimal stderr logger; tests can silence it.

enum class LogLevel { info, warn };

void log(LogLevel level, const std::string& message);
void set_log_enabled(bool enabled);

inline void log_info(const std::string& m) { log(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log(LogLevel::warn, m); }

// --- Seed derivation and RNG ---
//
// Determinism contract: streams are mt19937_64 seeded through a splitmix64
// avalanche over (seed, counters...). Uniforms map the raw 64-bit output onto
// [0,1) explicitly and normals use Box-Muller, so results do not depend on
// unspecified std::*_distribution internals. Bit-identical per platform;
// across platforms identical up to libm log/cos accuracy.

uint64_t splitmix64(uint64_t x);

// Chains splitmix64 over the parts; order-sensitive.
uint64_t mix_seed(std::initializer_list<uint64_t> parts);

uint64_t fnv1a64(std::string_view s);

class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(splitmix64(seed)) {}

    uint64_t next_u64() { return engine_(); }

    // [0,1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // (0,1] — safe for log()
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    // standard normal, Box-Muller (cosine branch)
    double normal();

    // uniform integer in [0, n)
    std::size_t index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

// --- Hashing ---

std::string sha256_hex(std::string_view data);

// --- Small file helpers ---

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace lcprobe
