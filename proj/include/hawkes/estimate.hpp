#pragma once

#include "hawkes/events.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/model.hpp"

#include <Eigen/Dense>
#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace hawkes {

enum class Strategy { aggregate, pooled, averaged };

std::string_view to_string(Strategy strategy) noexcept;
Strategy strategy_from_string(std::string_view name);

using Entry = std::pair<std::size_t, std::size_t>; ///< (k, l), 0-based

struct FitOptions {
    std::size_t n_starts{8};
    /// Adjacency values at or below this are reported as zeros and re-polished.
    double zero_threshold{1e-5};
    /// Mixed with the data hash to place the Latin-hypercube starts.
    std::uint64_t start_seed{0};
    std::size_t max_iterations{300};
    /// Converged when the projected-gradient sup-norm is below tol * (1 + |loglik|).
    double gradient_tolerance{1e-6};
    /// Used as the first start when present (clamped into the feasible set);
    /// non-finite entries take the count-based start value.
    std::optional<Eigen::VectorXd> warm_start;
    unsigned threads{1};
};

struct FitResult {
    ParamVector theta;
    double loglik{0.0};
    std::vector<Entry> zero_set; ///< adjacency entries with value <= zero_threshold
    Eigen::MatrixXd information; ///< empirical information at theta; frozen slots zeroed
    bool converged{false};
    double projected_gradient{0.0};
    std::size_t n_starts_used{0};
    std::size_t n_evaluations{0};
    std::size_t iterations{0};
    std::size_t best_start{0};
    std::vector<std::size_t> frozen; ///< decay slots held at their lower bound
    std::size_t skipped{0};          ///< averaged strategy: replicates whose fit failed
    Strategy strategy{Strategy::aggregate};
};

/// Decay slots that leave the likelihood when the given adjacency slots are zero.
std::vector<std::size_t> frozen_decay_slots(const ModelSpec& spec, const std::vector<std::size_t>& pinned);

/// Maximizes the log-likelihood over the box with the `pinned` adjacency slots at
/// exactly zero. Never throws NonConvergence: the best start is returned with
/// converged = false instead.
FitResult fit(const LikelihoodContext& ctx, const std::vector<std::size_t>& pinned, const FitOptions& options = {});

/// Same with the pattern given as 0-based (k, l) entries; throws InfeasiblePattern.
FitResult fit_pattern(const LikelihoodContext& ctx, const std::vector<Entry>& pattern, const FitOptions& options = {});

/// Maximizes the sum of per-replicate log-likelihoods (baseline mu, not n mu).
FitResult fit_strategy_pooled(const Dataset& data, const ModelSpec& spec, const std::vector<std::size_t>& pinned,
                              const FitOptions& options = {});

/// Fits every replicate alone and averages the estimates coordinatewise.
/// Replicates whose fit fails are skipped and counted.
FitResult fit_strategy_averaged(const Dataset& data, const ModelSpec& spec, const std::vector<std::size_t>& pinned,
                                const FitOptions& options = {});

FitResult fit_strategy(Strategy strategy, const Dataset& data, const ModelSpec& spec,
                       const std::vector<std::size_t>& pinned, const FitOptions& options = {});

nlohmann::json to_json(const FitResult& fit, const ModelSpec& spec);

} // namespace hawkes
