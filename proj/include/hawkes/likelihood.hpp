#pragma once

#include "hawkes/events.hpp"
#include "hawkes/model.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace hawkes {

/// Events prepared for repeated likelihood evaluation. A context holds one or
/// more blocks; each block is an independent sequence whose baseline is scaled
/// by the block multiplier.
///   aggregated: one merged block, multiplier n (baseline n mu)
///   pooled:     one block per replicate, multiplier 1
class LikelihoodContext {
public:
    struct Block {
        std::vector<double> t;
        std::vector<std::uint32_t> k;
        std::vector<double> weight; ///< g(x) per event
        double multiplier{1.0};
    };

    static LikelihoodContext aggregated(const ModelSpec& spec, const Dataset& data);
    static LikelihoodContext pooled(const ModelSpec& spec, const Dataset& data);
    /// A single sequence treated as the superposition of `multiplier` replicates.
    LikelihoodContext(const ModelSpec& spec, const EventSequence& events, double multiplier = 1.0);

    [[nodiscard]] const ModelSpec& spec() const noexcept { return spec_; }
    [[nodiscard]] const std::vector<Block>& blocks() const noexcept { return blocks_; }
    /// Sum of block multipliers: the replicate count n.
    [[nodiscard]] double n() const noexcept { return n_; }
    [[nodiscard]] std::size_t total_events() const noexcept { return total_events_; }
    /// Events per coordinate, summed over blocks.
    [[nodiscard]] const std::vector<std::size_t>& counts() const noexcept { return counts_; }

private:
    LikelihoodContext(const ModelSpec& spec, std::vector<Block> blocks);
    void add_block(const EventSequence& events, double multiplier);

    ModelSpec spec_;
    std::vector<Block> blocks_;
    double n_{0.0};
    std::size_t total_events_{0};
    std::vector<std::size_t> counts_;
};

/// Log-likelihood and derivatives at one theta. `gradient` is present for
/// order >= 1, `hessian` for order 2, `information` when requested.
struct LikelihoodValue {
    double value{0.0};
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
    Eigen::MatrixXd information;
};

/// One pass over the events computing the requested derivative order (0, 1, 2)
/// and optionally the empirical information. Throws NonFiniteIntensity when an
/// intensity at an event is not strictly positive and finite.
LikelihoodValue evaluate(const LikelihoodContext& ctx, const Eigen::VectorXd& theta, int order,
                         bool information = false);

/// sum_k [ sum_{events at k} ln lambda_k(t_i) - int_0^{T_k} lambda_k ]
double log_likelihood(const LikelihoodContext& ctx, const Eigen::VectorXd& theta);
Eigen::VectorXd score(const LikelihoodContext& ctx, const Eigen::VectorXd& theta);
/// Analytic Hessian of the log-likelihood.
Eigen::MatrixXd score_derivative(const LikelihoodContext& ctx, const Eigen::VectorXd& theta);
/// (1/n) sum over events of (grad lambda / lambda)(grad lambda / lambda)^T.
Eigen::MatrixXd empirical_information(const LikelihoodContext& ctx, const Eigen::VectorXd& theta);

} // namespace hawkes
