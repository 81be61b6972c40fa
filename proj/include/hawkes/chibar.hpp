#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hawkes {

enum class WeightSource { closed_form_p1, closed_form_p2, monte_carlo, supplied };

std::string_view to_string(WeightSource source) noexcept;

/// The mixture sum_j w_j chi2(j), j = 0..p, with chi2(0) the point mass at 0.
/// weights[j] is the probability that the orthant projection of the limiting
/// Gaussian leaves p - j tested coordinates at zero.
struct ChiBarMixture {
    std::vector<double> weights;
    WeightSource source{WeightSource::supplied};
    std::size_t draws{0};           ///< monte_carlo only
    std::uint64_t seed{0};          ///< monte_carlo only
    std::vector<double> std_errors; ///< monte_carlo only; binomial, per weight

    [[nodiscard]] std::size_t p() const noexcept { return weights.size() - 1; }

    /// Validates nonnegativity and sum 1 (to 1e-9), then renormalizes exactly.
    static ChiBarMixture from_weights(std::vector<double> weights, WeightSource source = WeightSource::supplied);
};

struct ProjectionResult {
    Eigen::VectorXd z;               ///< minimizer in {z : z_i >= 0, i < p}
    std::vector<std::size_t> active; ///< constrained coordinates at zero, ascending
    double objective{0.0};           ///< (x - z)^T A (x - z)
    Eigen::VectorXd multipliers;     ///< 2 (A (z - x))_i for i < p; zero off the active set
};

/// Exact projection of x onto the orthant {z_i >= 0 for i < p} in the metric A,
/// by enumerating the 2^p active sets. The stationarity solve for each active set
/// depends only on A, so it is factorized once and reused across projections.
class OrthantProjector {
public:
    /// Throws NotSPD unless A is symmetric positive definite, ExponentialBlowup for p > 20.
    OrthantProjector(const Eigen::MatrixXd& A, std::size_t p);

    [[nodiscard]] ProjectionResult project(const Eigen::VectorXd& x) const;
    /// Only the number of active coordinates; cheaper than project().
    [[nodiscard]] std::size_t active_count(const Eigen::VectorXd& x) const;

    [[nodiscard]] std::size_t p() const noexcept { return p_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(A_.rows()); }

private:
    struct Candidate {
        std::uint32_t mask;              // active constrained coordinates
        std::vector<Eigen::Index> fixed; // active indices
        std::vector<Eigen::Index> free;  // the rest
        Eigen::MatrixXd gain;            // z_free = x_free + gain * x_fixed
    };
    [[nodiscard]] std::ptrdiff_t select(const Eigen::VectorXd& x, Eigen::VectorXd& z) const;

    Eigen::MatrixXd A_;
    std::size_t p_;
    std::vector<Candidate> candidates_; // ordered by decreasing active-set size
};

inline constexpr std::size_t kMaxEnumeratedP = 20;

ProjectionResult project_onto_orthant(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, std::size_t p);

/// (1/2, 1/2).
ChiBarMixture weights_closed_form(std::size_t p);

/// For a 2x2 information matrix of the tested pair:
/// w2 = acos(A12 / sqrt(A11 A22)) / (2 pi), w1 = 1/2, w0 = 1/2 - w2.
ChiBarMixture weights_closed_form_p2(const Eigen::Matrix2d& A2);

/// Effective information of the first p coordinates after profiling out the
/// rest: A_pp - A_pq A_qq^-1 A_qp.
Eigen::MatrixXd tested_information(const Eigen::MatrixXd& A, std::size_t p);

/// Weights from `draws` samples X ~ N(0, A^-1) projected onto the orthant of the
/// first p coordinates. Chunks of draws use derived seeds so the tally does not
/// depend on `threads`.
ChiBarMixture mc_weights(const Eigen::MatrixXd& A, std::size_t p, std::size_t draws, std::uint64_t seed,
                         unsigned threads = 1);

/// P(chi2(dof) > x); dof = 0 is the point mass at zero.
double chi2_sf(double dof, double x);
/// x with P(chi2(dof) > x) = a, for dof >= 1 and a in (0, 1).
double chi2_upper_quantile(double dof, double a);

/// P(X > x) for X following the mixture; mixture_sf(m, 0) = 1 - w0.
double mixture_sf(const ChiBarMixture& m, double x);
double mixture_cdf(const ChiBarMixture& m, double x);
/// Smallest x with mixture_sf(m, x) <= a (bisection to 1e-10); 0 when a >= 1 - w0.
double mixture_quantile(const ChiBarMixture& m, double a);

} // namespace hawkes
