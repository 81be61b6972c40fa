#pragma once

#include <array>
#include <string_view>

namespace hawkes {

/// Time part f(s, beta) of the excitation kernel. Every family is a probability
/// density on [0, inf) for each beta > 0.
enum class KernelFamily {
    exponential, ///< beta * exp(-beta s)
    gamma,       ///< beta^2 s exp(-beta s)
    pareto,      ///< beta (1 + s)^-(1 + beta)
};

std::string_view to_string(KernelFamily family) noexcept;
KernelFamily kernel_family_from_string(std::string_view name);

/// A value together with its first and second derivative in beta.
struct BetaDerivatives {
    double value{0.0};
    double d_beta{0.0};
    double d2_beta{0.0};
};

/// f(s, beta) and its beta-derivatives. Throws DomainError for s < 0.
BetaDerivatives kernel_density(KernelFamily family, double s, double beta);

/// F(s, beta) = int_0^s f(u, beta) du in closed form, with beta-derivatives.
BetaDerivatives kernel_primitive(KernelFamily family, double s, double beta);

/// Upper bound of f(u, beta) over u in [a, b], 0 <= a <= b.
double kernel_sup(KernelFamily family, double a, double b, double beta);

/// Smallest lag L (up to bisection accuracy) with int_L^inf f < mass.
double kernel_truncation_lag(KernelFamily family, double beta, double mass);

// Exponential and gamma kernels have the form f(s) = exp(-beta s) * sum_m c_m s^m,
// which lets sums over event histories be carried by the moment recursion
//   S_m(t) = sum_j w_j (t - t_j)^m exp(-beta (t - t_j)).

inline constexpr int kMaxMoments = 4;

/// Whether the family admits the moment recursion above.
constexpr bool has_moment_recursion(KernelFamily family) noexcept {
    return family != KernelFamily::pareto;
}

/// Number of moments S_0..S_{M-1} needed for derivatives up to `order` (0, 1, 2).
constexpr int moments_needed(KernelFamily family, int order) noexcept {
    return (family == KernelFamily::exponential ? 1 : 2) + order;
}

/// Polynomial coefficients of f, d f/d beta and d^2 f/d beta^2 in the moment basis.
struct MomentCoefficients {
    std::array<double, kMaxMoments> f{};
    std::array<double, kMaxMoments> d_beta{};
    std::array<double, kMaxMoments> d2_beta{};
};

MomentCoefficients moment_coefficients(KernelFamily family, double beta);

} // namespace hawkes
