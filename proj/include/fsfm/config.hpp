#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fsfm {

struct Weights {
    double alpha = 0.4;  // content quality
    double beta = 0.3;   // business value
    double gamma = 0.2;  // temporal relevance
    double delta = 0.1;  // security risk

    friend bool operator==(const Weights&, const Weights&) = default;
};

/// Every tunable of the scoring, decay, and pruning pipeline.
struct PolicyConfig {
    Weights weights;
    double lambda_longterm = 0.05;   // per day, Important/Medium
    double lambda_transient = 0.2;   // per day, General/Sensitive/Dangerous
    std::int64_t capacity = 1000;    // nominal record capacity
    double capacity_fraction = 0.70;
    std::int64_t batch_size = 100;
    double prune_fraction = 0.10;
    std::int64_t embedding_dim = 128;
    std::uint64_t rng_seed = 42;

    // Layer rules.
    std::int64_t sensory_ttl_seconds = 60;
    std::int64_t working_capacity = 9;
    double consolidation_threshold = 1.0;

    // Reinforcement coefficients for the extended retention function.
    double kappa_frequency = 0.5;
    double kappa_emotional = 0.5;
    double kappa_contextual = 0.5;
    double kappa_social = 0.5;

    // 0 disables the watermark.
    std::int64_t memory_watermark_bytes = 0;
    // 0 disables expiry of Sensitive records.
    double sensitive_retention_days = 0.0;

    /// Long-term record count the store may hold: floor(capacity_fraction * capacity).
    std::int64_t retain_limit() const;

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

enum class ConfigErrorKind {
    InvalidWeightSum,
    InvalidWeight,
    InvalidFraction,
    InvalidDecayRate,
    InvalidBatchSize,
    InvalidCapacity,
    InvalidDimension,
    InvalidLayerRule,
};

struct ConfigError {
    ConfigErrorKind kind;
    std::string field;
    std::string message;
};

std::string_view to_string(ConfigErrorKind kind);

/// Every violated invariant, in field order. Empty means valid.
std::vector<ConfigError> validate_config(const PolicyConfig& config);

/// Returns `config` unchanged or throws Error{InvalidConfig} listing every violation.
PolicyConfig validated(PolicyConfig config);

nlohmann::json to_json(const PolicyConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
PolicyConfig config_from_json(const nlohmann::json& j);
PolicyConfig load_config(const std::filesystem::path& path);

/// Stable hex digest of the canonical JSON form.
std::string config_digest(const PolicyConfig& config);

}  // namespace fsfm
