#include "hawkes/kernels.hpp"

#include "hawkes/error.hpp"

#include <cmath>
#include <string>

namespace hawkes {

namespace {

void check_lag(double s) {
    if (!(s >= 0.0)) throw DomainError("kernel evaluated at negative lag " + std::to_string(s));
}

// int_s^inf f(u, beta) du, computed without cancellation.
double kernel_tail(KernelFamily family, double s, double beta) {
    switch (family) {
    case KernelFamily::exponential: return std::exp(-beta * s);
    case KernelFamily::gamma: return (1.0 + beta * s) * std::exp(-beta * s);
    case KernelFamily::pareto: return std::pow(1.0 + s, -beta);
    }
    return 0.0;
}

} // namespace

std::string_view to_string(KernelFamily family) noexcept {
    switch (family) {
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::gamma: return "gamma";
    case KernelFamily::pareto: return "pareto";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "exponential") return KernelFamily::exponential;
    if (name == "gamma") return KernelFamily::gamma;
    if (name == "pareto") return KernelFamily::pareto;
    throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

BetaDerivatives kernel_density(KernelFamily family, double s, double beta) {
    check_lag(s);
    switch (family) {
    case KernelFamily::exponential: {
        const double e = std::exp(-beta * s);
        return {beta * e, e * (1.0 - beta * s), e * s * (beta * s - 2.0)};
    }
    case KernelFamily::gamma: {
        const double e = std::exp(-beta * s);
        return {beta * beta * s * e, e * s * beta * (2.0 - beta * s),
                e * s * (2.0 - 4.0 * beta * s + beta * beta * s * s)};
    }
    case KernelFamily::pareto: {
        const double log1ps = std::log1p(s);
        const double p = std::exp(-(1.0 + beta) * log1ps);
        return {beta * p, p * (1.0 - beta * log1ps), p * log1ps * (beta * log1ps - 2.0)};
    }
    }
    return {};
}

BetaDerivatives kernel_primitive(KernelFamily family, double s, double beta) {
    check_lag(s);
    switch (family) {
    case KernelFamily::exponential: {
        const double e = std::exp(-beta * s);
        return {-std::expm1(-beta * s), s * e, -s * s * e};
    }
    case KernelFamily::gamma: {
        const double x = beta * s;
        const double e = std::exp(-x);
        return {-std::expm1(-x) - x * e, beta * s * s * e, s * s * e * (1.0 - x)};
    }
    case KernelFamily::pareto: {
        const double log1ps = std::log1p(s);
        const double p = std::exp(-beta * log1ps);
        return {-std::expm1(-beta * log1ps), log1ps * p, -log1ps * log1ps * p};
    }
    }
    return {};
}

double kernel_sup(KernelFamily family, double a, double b, double beta) {
    check_lag(a);
    if (family == KernelFamily::gamma) {
        const double mode = 1.0 / beta;
        if (b <= mode) return kernel_density(family, b, beta).value;
        if (a >= mode) return kernel_density(family, a, beta).value;
        return kernel_density(family, mode, beta).value;
    }
    return kernel_density(family, a, beta).value;
}

double kernel_truncation_lag(KernelFamily family, double beta, double mass) {
    double hi = 1.0;
    while (kernel_tail(family, hi, beta) >= mass) {
        hi *= 2.0;
        if (!std::isfinite(hi)) return hi;
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kernel_tail(family, mid, beta) < mass ? hi : lo) = mid;
    }
    return hi;
}

MomentCoefficients moment_coefficients(KernelFamily family, double beta) {
    MomentCoefficients c;
    switch (family) {
    case KernelFamily::exponential:
        c.f = {beta, 0.0, 0.0, 0.0};
        c.d_beta = {1.0, -beta, 0.0, 0.0};
        c.d2_beta = {0.0, -2.0, beta, 0.0};
        break;
    case KernelFamily::gamma:
        c.f = {0.0, beta * beta, 0.0, 0.0};
        c.d_beta = {0.0, 2.0 * beta, -beta * beta, 0.0};
        c.d2_beta = {0.0, 2.0, -4.0 * beta, beta * beta};
        break;
    case KernelFamily::pareto:
        throw InvalidInput("pareto kernel has no moment recursion");
    }
    return c;
}

} // namespace hawkes
