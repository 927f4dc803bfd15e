#pragma once
// Error types, seed derivation and the deterministic parallel-for used across
// the pipeline.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace modisco {

// Input data violates the dataset contract (missing file, bad one-hot row...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration value or unsupported parameter combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A pipeline stage failed; the message carries the stage name.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Seed for a named stage: FNV-1a hash of the stage name mixed with the
// master seed. Every random decision in the pipeline draws from one of these.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stage);

// Number of worker threads: explicit value if > 0, else MODISCO_WORKERS, else 1.
std::size_t resolve_workers(std::size_t requested);

// Calls fn(i) for i in [0, n) using up to `workers` threads. Each index is
// handled exactly once; callers write results into per-index slots so output
// never depends on scheduling.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace modisco
