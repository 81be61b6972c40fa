#include "hawkes/volterra.hpp"

#include "hawkes/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace hawkes {

namespace {

void require_stable(const ModelSpec& spec, const Eigen::VectorXd& theta, double& rho) {
    if (theta.size() != static_cast<Eigen::Index>(spec.num_params()))
        throw InvalidInput("theta has the wrong number of parameters");
    rho = spectral_radius(branching_matrix(spec, theta));
    if (!(rho < 1.0)) {
        std::ostringstream msg;
        msg << "branching spectral radius " << rho << " is not below 1";
        throw Unstable(msg.str());
    }
}

std::size_t grid_intervals(const ModelSpec& spec, double step) {
    if (step <= 0.0) step = default_volterra_step(spec);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(spec.max_horizon() / step - 1e-9)));
}

bool alive(const ModelSpec& spec, std::size_t k, double t, double step) {
    return t <= spec.horizon(k) + 1e-9 * step;
}

struct KernelEntry {
    std::size_t k, l;
    int alpha_slot, beta_slot;
};

std::vector<KernelEntry> kernel_entries(const ModelSpec& spec) {
    std::vector<KernelEntry> out;
    const std::size_t K = spec.dimension();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l)
            if (spec.adjacency_slot(k, l) >= 0)
                out.push_back({k, l, spec.adjacency_slot(k, l), spec.decay_slot(k, l)});
    return out;
}

// 8-point Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 8> kGaussNodes = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355,
                                               0.40828267875217505, 0.591717321247825,  0.7627662049581645,
                                               0.8983332387068134,  0.9801449282487681};
constexpr std::array<double, 8> kGaussWeights = {0.05061426814518813, 0.11119051722668724, 0.15685332293894363,
                                                 0.18134189168918100, 0.18134189168918100, 0.15685332293894363,
                                                 0.11119051722668724, 0.05061426814518813};

/// Product-integration weights of a lag function c(s) against the piecewise
/// linear interpolant of h: on lag cell [m dt, (m + 1) dt], lower[m] multiplies
/// the node at lag m and upper[m] the node at lag m + 1.
struct CellWeights {
    std::vector<double> lower, upper;

    /// sum over cells of int c(t_j - s) h(s) ds for the node values h(t_0..t_j).
    template <typename H>
    [[nodiscard]] double convolve(std::size_t j, H&& h) const {
        double acc = 0.0;
        for (std::size_t m = 0; m < j; ++m) acc += lower[m] * h(j - m) + upper[m] * h(j - m - 1);
        return acc;
    }
};

template <typename C>
CellWeights cell_weights(std::size_t N, double dt, C&& c) {
    CellWeights w{std::vector<double>(N, 0.0), std::vector<double>(N, 0.0)};
    for (std::size_t m = 0; m < N; ++m)
        for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
            const double u = kGaussNodes[q];
            const double v = kGaussWeights[q] * dt * c((static_cast<double>(m) + u) * dt);
            w.lower[m] += (1.0 - u) * v;
            w.upper[m] += u * v;
        }
    return w;
}

GridFunction solve_grid(const ModelSpec& spec, const Eigen::VectorXd& theta, std::size_t N) {
    const auto K = static_cast<Eigen::Index>(spec.dimension());
    const double dt = spec.max_horizon() / static_cast<double>(N);
    const KernelFamily family = spec.kernel_family();
    const Eigen::MatrixXd mass = branching_matrix(spec, theta);

    const auto entries = kernel_entries(spec);
    std::vector<CellWeights> weights;
    for (const auto& e : entries) {
        const double scale = mass(static_cast<Eigen::Index>(e.k), static_cast<Eigen::Index>(e.l));
        const double beta = theta[e.beta_slot];
        weights.push_back(cell_weights(N, dt, [&](double s) { return scale * kernel_density(family, s, beta).value; }));
    }

    GridFunction h;
    h.step = dt;
    h.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N + 1), K);
    h.values.row(0) = spec.baseline(theta, 0.0).transpose();

    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(K, K);
    Eigen::MatrixXd diagonal = Eigen::MatrixXd::Zero(K, K);
    for (std::size_t e = 0; e < entries.size(); ++e)
        diagonal(static_cast<Eigen::Index>(entries[e].k), static_cast<Eigen::Index>(entries[e].l)) = weights[e].lower[0];

    for (std::size_t j = 1; j <= N; ++j) {
        const double t = static_cast<double>(j) * dt;
        Eigen::VectorXd rhs = spec.baseline(theta, t);
        for (std::size_t e = 0; e < entries.size(); ++e) {
            const auto l = static_cast<Eigen::Index>(entries[e].l);
            const auto& w = weights[e];
            // Every node but the unknown h(t_j), which sits on the lower end of cell 0.
            double acc = w.upper[0] * h.values(static_cast<Eigen::Index>(j - 1), l);
            for (std::size_t m = 1; m < j; ++m)
                acc += w.lower[m] * h.values(static_cast<Eigen::Index>(j - m), l) +
                       w.upper[m] * h.values(static_cast<Eigen::Index>(j - m - 1), l);
            rhs[static_cast<Eigen::Index>(entries[e].k)] += acc;
        }
        Eigen::MatrixXd system = identity - diagonal;
        for (Eigen::Index k = 0; k < K; ++k)
            if (!alive(spec, static_cast<std::size_t>(k), t, dt)) {
                system.row(k) = identity.row(k);
                rhs[k] = 0.0;
            }
        h.values.row(static_cast<Eigen::Index>(j)) = system.partialPivLu().solve(rhs).transpose();
    }
    return h;
}

} // namespace

double default_volterra_step(const ModelSpec& spec) { return spec.max_horizon() / 4096.0; }

GridFunction solve_h(const ModelSpec& spec, const Eigen::VectorXd& theta, double step) {
    double rho = 0.0;
    require_stable(spec, theta, rho);
    return solve_grid(spec, theta, grid_intervals(spec, step));
}

AsymptoticInformation asymptotic_information(const ModelSpec& spec, const Eigen::VectorXd& theta, double step) {
    AsymptoticInformation out;
    require_stable(spec, theta, out.spectral_radius);
    const std::size_t N = grid_intervals(spec, step);
    const GridFunction h = solve_grid(spec, theta, N);
    const double dt = h.step;
    const auto d = static_cast<Eigen::Index>(spec.num_params());
    const double Eg = spec.mark_moments().mean;
    const KernelFamily family = spec.kernel_family();

    // Product-integration weights of d(E[g] phi_kl)/d alpha and d/d beta.
    const auto entries = kernel_entries(spec);
    std::vector<CellWeights> d_alpha;
    std::vector<CellWeights> d_beta;
    for (const auto& e : entries) {
        const double alpha = theta[e.alpha_slot];
        const double beta = theta[e.beta_slot];
        d_alpha.push_back(cell_weights(N, dt, [&](double s) { return Eg * kernel_density(family, s, beta).value; }));
        d_beta.push_back(
            cell_weights(N, dt, [&](double s) { return alpha * Eg * kernel_density(family, s, beta).d_beta; }));
    }

    out.information = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd v(d);
    for (std::size_t k = 0; k < spec.dimension(); ++k) {
        const double T = spec.horizon(k);
        const auto last = static_cast<std::size_t>(std::floor(T / dt + 1e-9));
        const double tail = T - static_cast<double>(last) * dt;
        const int m_slot = spec.level_slot(k);
        const int c_slot = spec.growth_slot(k);
        for (std::size_t j = 0; j <= last; ++j) {
            const double t = static_cast<double>(j) * dt;
            const double hk = h.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            v.setZero();
            if (c_slot < 0) {
                v[m_slot] += 1.0;
            } else {
                const double u = t / T;
                const double e = std::exp(theta[c_slot] * u);
                v[m_slot] += e;
                v[c_slot] += theta[m_slot] * u * e;
            }
            for (std::size_t e = 0; e < entries.size(); ++e) {
                if (entries[e].k != k || j == 0) continue;
                const auto l = static_cast<Eigen::Index>(entries[e].l);
                auto hl = [&](std::size_t i) { return h.values(static_cast<Eigen::Index>(i), l); };
                v[entries[e].alpha_slot] += d_alpha[e].convolve(j, hl);
                v[entries[e].beta_slot] += d_beta[e].convolve(j, hl);
            }
            double weight = (j == 0 || j == last) ? 0.5 * dt : dt;
            if (last == 0) weight = 0.0;
            if (j == last) weight += tail;
            out.information.noalias() += (weight / hk) * v * v.transpose();
        }
    }
    out.information = 0.5 * (out.information + out.information.transpose()).eval();

    // Fixed slots are not estimated, so they take no part in the degeneracy check.
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < d; ++i)
        if (!spec.slot(static_cast<std::size_t>(i)).fixed()) free.push_back(i);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(free.size()), static_cast<Eigen::Index>(free.size()));
    for (std::size_t r = 0; r < free.size(); ++r)
        for (std::size_t c = 0; c < free.size(); ++c)
            sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = out.information(free[r], free[c]);
    if (free.empty()) {
        out.min_eigenvalue = out.max_eigenvalue = 0.0;
        out.degenerate = false;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    out.max_eigenvalue = eig.eigenvalues().maxCoeff();
    out.degenerate = out.min_eigenvalue < 1e-10 * out.max_eigenvalue;
    return out;
}

bool schur_subvariance_check(const Eigen::MatrixXd& information, std::size_t p, double tol) {
    const Eigen::Index d = information.rows();
    if (information.cols() != d || static_cast<Eigen::Index>(p) > d)
        throw InvalidInput("schur_subvariance_check needs a square matrix and p <= d");
    const Eigen::Index q = d - static_cast<Eigen::Index>(p);
    if (q == 0) return true;
    const Eigen::MatrixXd A = information.topLeftCorner(q, q);
    const Eigen::MatrixXd B = information.topRightCorner(q, static_cast<Eigen::Index>(p));
    const Eigen::MatrixXd A_inv = A.ldlt().solve(Eigen::MatrixXd::Identity(q, q));
    const Eigen::MatrixXd sigma = information.ldlt().solve(Eigen::MatrixXd::Identity(d, d));

    // Var(C Z) = C Sigma C^T with C = [I_q, A^-1 B].
    Eigen::MatrixXd C(q, d);
    C << Eigen::MatrixXd::Identity(q, q), A_inv * B;
    const Eigen::MatrixXd var = C * sigma * C.transpose();
    const double scale = std::max(1.0, A_inv.cwiseAbs().maxCoeff());
    return (var - A_inv).cwiseAbs().maxCoeff() <= tol * scale;
}

} // namespace hawkes
