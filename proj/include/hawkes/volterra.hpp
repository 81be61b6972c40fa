#pragma once

#include "hawkes/model.hpp"

#include <Eigen/Dense>

#include <cstddef>

namespace hawkes {

/// Values of a K-vector function on the uniform grid t_j = j * step, j = 0..N,
/// covering [0, max T_k]. Row j of `values` holds the value at t_j.
struct GridFunction {
    double step{0.0};
    Eigen::MatrixXd values;

    [[nodiscard]] std::size_t points() const noexcept { return static_cast<std::size_t>(values.rows()); }
    [[nodiscard]] double time(std::size_t j) const noexcept { return static_cast<double>(j) * step; }
};

/// Grid step used when the caller passes step <= 0: max T_k / 4096.
double default_volterra_step(const ModelSpec& spec);

/// Mean intensity per replicate, h = mu + (E[g] phi) * h, solved forward in
/// time by product integration: h is piecewise linear between grid points and
/// the kernel is integrated exactly enough on each cell by 8-point Gauss-Legendre. Coordinate k is set to zero past T_k.
/// Throws Unstable unless the branching spectral radius is below one.
GridFunction solve_h(const ModelSpec& spec, const Eigen::VectorXd& theta, double step = 0.0);

struct AsymptoticInformation {
    Eigen::MatrixXd information;
    double spectral_radius{0.0};
    /// Extreme eigenvalues over the slots that are not fixed.
    double min_eigenvalue{0.0};
    double max_eigenvalue{0.0};
    /// min eigenvalue below 1e-10 times the max eigenvalue
    bool degenerate{false};
};

/// I(theta) = sum_k int_0^{T_k} v_k v_k^T / h_k ds with
/// v_k = d mu_k + sum_l int_0^s d(E[g] phi_kl)(s - u) h_l(u) du,
/// with product integration of the inner convolutions and the trapezoidal rule
/// in s, on the solve_h grid.
AsymptoticInformation asymptotic_information(const ModelSpec& spec, const Eigen::VectorXd& theta, double step = 0.0);

/// Checks that for Z ~ N(0, I^-1) split into the first q = d - p and last p
/// coordinates, Var(Z_q + A^-1 B Z_p) equals A^-1, where A and B are the
/// (q, q) and (q, p) blocks of I. Returns whether the identity holds to `tol`.
bool schur_subvariance_check(const Eigen::MatrixXd& information, std::size_t p, double tol = 1e-10);

} // namespace hawkes
