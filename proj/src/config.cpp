#include "fsfm/config.hpp"

#include <cmath>
#include <fstream>

#include "fsfm/digest.hpp"
#include "fsfm/error.hpp"

namespace fsfm {

using nlohmann::json;

std::int64_t PolicyConfig::retain_limit() const {
    return static_cast<std::int64_t>(
        std::floor(capacity_fraction * static_cast<double>(capacity) + 1e-9));
}

std::string_view to_string(ConfigErrorKind kind) {
    switch (kind) {
        case ConfigErrorKind::InvalidWeightSum: return "InvalidWeightSum";
        case ConfigErrorKind::InvalidWeight: return "InvalidWeight";
        case ConfigErrorKind::InvalidFraction: return "InvalidFraction";
        case ConfigErrorKind::InvalidDecayRate: return "InvalidDecayRate";
        case ConfigErrorKind::InvalidBatchSize: return "InvalidBatchSize";
        case ConfigErrorKind::InvalidCapacity: return "InvalidCapacity";
        case ConfigErrorKind::InvalidDimension: return "InvalidDimension";
        case ConfigErrorKind::InvalidLayerRule: return "InvalidLayerRule";
    }
    return "Unknown";
}

std::vector<ConfigError> validate_config(const PolicyConfig& c) {
    std::vector<ConfigError> errors;
    auto fail = [&](ConfigErrorKind kind, std::string field, std::string message) {
        errors.push_back({kind, std::move(field), std::move(message)});
    };

    const auto& w = c.weights;
    const std::pair<const char*, double> weights[] = {
        {"weights.alpha", w.alpha}, {"weights.beta", w.beta},
        {"weights.gamma", w.gamma}, {"weights.delta", w.delta}};
    for (const auto& [name, value] : weights) {
        if (!std::isfinite(value) || value < 0.0) {
            fail(ConfigErrorKind::InvalidWeight, name, "weight must be a non-negative real");
        }
    }
    const double sum = w.alpha + w.beta + w.gamma + w.delta;
    if (!(std::fabs(sum - 1.0) <= 1e-9)) {
        fail(ConfigErrorKind::InvalidWeightSum, "weights",
             "weights sum to " + std::to_string(sum) + ", expected 1");
    }

    if (!(c.lambda_longterm > 0.0) || !std::isfinite(c.lambda_longterm)) {
        fail(ConfigErrorKind::InvalidDecayRate, "lambda_longterm", "decay rate must be > 0");
    }
    if (!(c.lambda_transient > 0.0) || !std::isfinite(c.lambda_transient)) {
        fail(ConfigErrorKind::InvalidDecayRate, "lambda_transient", "decay rate must be > 0");
    }
    if (c.capacity < 1) {
        fail(ConfigErrorKind::InvalidCapacity, "capacity", "capacity must be >= 1");
    }
    if (!(c.capacity_fraction > 0.0 && c.capacity_fraction <= 1.0)) {
        fail(ConfigErrorKind::InvalidFraction, "capacity_fraction", "must lie in (0, 1]");
    }
    if (c.batch_size < 1) {
        fail(ConfigErrorKind::InvalidBatchSize, "batch_size", "batch size must be >= 1");
    }
    if (!(c.prune_fraction > 0.0 && c.prune_fraction < 1.0)) {
        fail(ConfigErrorKind::InvalidFraction, "prune_fraction", "must lie in (0, 1)");
    }
    if (c.embedding_dim < 2) {
        fail(ConfigErrorKind::InvalidDimension, "embedding_dim", "dimension must be >= 2");
    }
    if (c.sensory_ttl_seconds < 0) {
        fail(ConfigErrorKind::InvalidLayerRule, "sensory_ttl_seconds", "must be >= 0");
    }
    if (c.working_capacity < 1) {
        fail(ConfigErrorKind::InvalidLayerRule, "working_capacity", "must be >= 1");
    }
    if (!std::isfinite(c.consolidation_threshold)) {
        fail(ConfigErrorKind::InvalidLayerRule, "consolidation_threshold", "must be finite");
    }
    const std::pair<const char*, double> kappas[] = {
        {"kappa_frequency", c.kappa_frequency}, {"kappa_emotional", c.kappa_emotional},
        {"kappa_contextual", c.kappa_contextual}, {"kappa_social", c.kappa_social}};
    for (const auto& [name, value] : kappas) {
        if (!std::isfinite(value) || value < 0.0) {
            fail(ConfigErrorKind::InvalidWeight, name, "coefficient must be >= 0");
        }
    }
    if (c.memory_watermark_bytes < 0) {
        fail(ConfigErrorKind::InvalidCapacity, "memory_watermark_bytes", "must be >= 0");
    }
    if (!(c.sensitive_retention_days >= 0.0)) {
        fail(ConfigErrorKind::InvalidDecayRate, "sensitive_retention_days", "must be >= 0");
    }
    return errors;
}

PolicyConfig validated(PolicyConfig config) {
    auto errors = validate_config(config);
    if (!errors.empty()) {
        std::string msg;
        for (const auto& e : errors) {
            if (!msg.empty()) msg += "; ";
            msg += std::string(to_string(e.kind)) + "(" + e.field + "): " + e.message;
        }
        throw Error(ErrorCode::InvalidConfig, msg);
    }
    return config;
}

json to_json(const PolicyConfig& c) {
    return json{
        {"alpha", c.weights.alpha},
        {"beta", c.weights.beta},
        {"gamma", c.weights.gamma},
        {"delta", c.weights.delta},
        {"lambda_longterm", c.lambda_longterm},
        {"lambda_transient", c.lambda_transient},
        {"capacity", c.capacity},
        {"capacity_fraction", c.capacity_fraction},
        {"batch_size", c.batch_size},
        {"prune_fraction", c.prune_fraction},
        {"embedding_dim", c.embedding_dim},
        {"rng_seed", c.rng_seed},
        {"sensory_ttl_seconds", c.sensory_ttl_seconds},
        {"working_capacity", c.working_capacity},
        {"consolidation_threshold", c.consolidation_threshold},
        {"kappa_frequency", c.kappa_frequency},
        {"kappa_emotional", c.kappa_emotional},
        {"kappa_contextual", c.kappa_contextual},
        {"kappa_social", c.kappa_social},
        {"memory_watermark_bytes", c.memory_watermark_bytes},
        {"sensitive_retention_days", c.sensitive_retention_days},
    };
}

PolicyConfig config_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    PolicyConfig c;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "alpha") c.weights.alpha = value.get<double>();
            else if (key == "beta") c.weights.beta = value.get<double>();
            else if (key == "gamma") c.weights.gamma = value.get<double>();
            else if (key == "delta") c.weights.delta = value.get<double>();
            else if (key == "weights") {
                auto w = value.get<std::vector<double>>();
                if (w.size() != 4) throw Error(ErrorCode::InvalidConfig, "weights needs 4 entries");
                c.weights = {w[0], w[1], w[2], w[3]};
            }
            else if (key == "lambda_longterm") c.lambda_longterm = value.get<double>();
            else if (key == "lambda_transient") c.lambda_transient = value.get<double>();
            else if (key == "capacity") c.capacity = value.get<std::int64_t>();
            else if (key == "capacity_fraction") c.capacity_fraction = value.get<double>();
            else if (key == "batch_size") c.batch_size = value.get<std::int64_t>();
            else if (key == "prune_fraction") c.prune_fraction = value.get<double>();
            else if (key == "embedding_dim") c.embedding_dim = value.get<std::int64_t>();
            else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
            else if (key == "sensory_ttl_seconds") c.sensory_ttl_seconds = value.get<std::int64_t>();
            else if (key == "working_capacity") c.working_capacity = value.get<std::int64_t>();
            else if (key == "consolidation_threshold") c.consolidation_threshold = value.get<double>();
            else if (key == "kappa_frequency") c.kappa_frequency = value.get<double>();
            else if (key == "kappa_emotional") c.kappa_emotional = value.get<double>();
            else if (key == "kappa_contextual") c.kappa_contextual = value.get<double>();
            else if (key == "kappa_social") c.kappa_social = value.get<double>();
            else if (key == "memory_watermark_bytes") c.memory_watermark_bytes = value.get<std::int64_t>();
            else if (key == "sensitive_retention_days") c.sensitive_retention_days = value.get<double>();
            else throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
        } catch (const json::exception& e) {
            throw Error(ErrorCode::InvalidConfig, "bad value for '" + key + "': " + e.what());
        }
    }
    return c;
}

PolicyConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_digest(const PolicyConfig& config) {
    return sha256_hex(to_json(config).dump());
}

}  // namespace fsfm
