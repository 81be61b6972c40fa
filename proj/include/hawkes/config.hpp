#pragma once

#include "hawkes/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace hawkes {

/// Per-profile overrides read from the optional [fit] section.
struct FitProfile {
    std::optional<std::size_t> n_starts;
    std::optional<double> zero_threshold;
    std::optional<double> lrs_threshold;
};

/// A model configuration file: the model family plus, optionally, a parameter value
/// ([theta] section) and fit profile ([fit] section).
struct ModelConfig {
    ModelSpec spec;
    std::optional<ParamVector> theta;
    FitProfile fit;
};

ModelConfig parse_model_config(std::string_view text);
ModelConfig load_model_config(const std::filesystem::path& path);

/// TOML text for a spec (and theta). Parsing the output reproduces every
/// floating-point value bit for bit.
std::string serialize_model_config(const ModelSpec& spec, const std::optional<ParamVector>& theta = std::nullopt,
                                   const FitProfile& fit = {});

/// Parses "name=value,name=value" into theta for `spec`.
ParamVector parse_inline_theta(const ModelSpec& spec, std::string_view text);

/// Reads a whole file; throws InvalidInput when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

} // namespace hawkes
