#include "hawkes/chibar.hpp"

#include "hawkes/error.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hawkes {

std::string_view to_string(WeightSource source) noexcept {
    switch (source) {
    case WeightSource::closed_form_p1: return "closed_form_p1";
    case WeightSource::closed_form_p2: return "closed_form_p2";
    case WeightSource::monte_carlo: return "monte_carlo";
    case WeightSource::supplied: return "supplied";
    }
    return "supplied";
}

ChiBarMixture ChiBarMixture::from_weights(std::vector<double> weights, WeightSource source) {
    if (weights.empty()) throw InvalidInput("a chi-bar mixture needs at least one weight");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("chi-bar weights must be finite and >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidInput("chi-bar weights must sum to 1");
    for (double& w : weights) w /= total;
    ChiBarMixture m;
    m.weights = std::move(weights);
    m.source = source;
    return m;
}

namespace {

void require_spd(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw NotSPD("matrix must be square and nonempty");
    if (!A.allFinite()) throw NotSPD("matrix has non-finite entries");
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw NotSPD("matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw NotSPD("matrix is not positive definite");
}

} // namespace

OrthantProjector::OrthantProjector(const Eigen::MatrixXd& A, std::size_t p) : A_(A), p_(p) {
    require_spd(A);
    if (p > static_cast<std::size_t>(A.rows())) throw InvalidInput("p exceeds the dimension");
    if (p > kMaxEnumeratedP) throw ExponentialBlowup("active-set enumeration is limited to p <= 20");
    A_ = 0.5 * (A + A.transpose());

    const auto d = A_.rows();
    const std::uint32_t count = 1U << p;
    std::vector<std::uint32_t> masks(count);
    std::iota(masks.begin(), masks.end(), 0U);
    std::stable_sort(masks.begin(), masks.end(),
                     [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });
    for (std::uint32_t mask : masks) {
        Candidate c;
        c.mask = mask;
        for (Eigen::Index i = 0; i < d; ++i) {
            const bool active = static_cast<std::size_t>(i) < p && (mask >> i & 1U);
            (active ? c.fixed : c.free).push_back(i);
        }
        const auto nf = static_cast<Eigen::Index>(c.free.size());
        const auto ns = static_cast<Eigen::Index>(c.fixed.size());
        if (nf > 0 && ns > 0) {
            Eigen::MatrixXd Aff(nf, nf), Afs(nf, ns);
            for (Eigen::Index r = 0; r < nf; ++r) {
                for (Eigen::Index s = 0; s < nf; ++s) Aff(r, s) = A_(c.free[r], c.free[s]);
                for (Eigen::Index s = 0; s < ns; ++s) Afs(r, s) = A_(c.free[r], c.fixed[s]);
            }
            c.gain = Aff.ldlt().solve(Afs);
        } else {
            c.gain = Eigen::MatrixXd::Zero(nf, ns);
        }
        candidates_.push_back(std::move(c));
    }
}

std::ptrdiff_t OrthantProjector::select(const Eigen::VectorXd& x, Eigen::VectorXd& z) const {
    if (x.size() != A_.rows()) throw InvalidInput("vector size does not match the metric");
    const double tol = 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff()) * std::max(1.0, A_.cwiseAbs().maxCoeff());
    Eigen::VectorXd xs, zf, diff(x.size());
    std::ptrdiff_t fallback = -1;
    double fallback_objective = INFINITY;
    Eigen::VectorXd fallback_z;

    for (std::size_t ci = 0; ci < candidates_.size(); ++ci) {
        const auto& c = candidates_[ci];
        const auto ns = static_cast<Eigen::Index>(c.fixed.size());
        const auto nf = static_cast<Eigen::Index>(c.free.size());
        xs.resize(ns);
        for (Eigen::Index s = 0; s < ns; ++s) xs[s] = x[c.fixed[s]];
        zf = c.gain * xs;
        z.setZero(x.size());
        bool feasible = true;
        for (Eigen::Index r = 0; r < nf; ++r) {
            const Eigen::Index i = c.free[r];
            z[i] = x[i] + zf[r];
            if (static_cast<std::size_t>(i) < p_ && z[i] < -tol) feasible = false;
        }
        if (!feasible) continue;
        diff = z - x;
        bool certified = true;
        for (Eigen::Index s = 0; s < ns; ++s)
            if (2.0 * A_.row(c.fixed[s]).dot(diff) < -tol) certified = false;
        if (certified) {
            for (Eigen::Index r = 0; r < nf; ++r)
                if (static_cast<std::size_t>(c.free[r]) < p_) z[c.free[r]] = std::max(z[c.free[r]], 0.0);
            return static_cast<std::ptrdiff_t>(ci);
        }
        const double objective = diff.dot(A_ * diff);
        if (objective < fallback_objective) {
            fallback_objective = objective;
            fallback = static_cast<std::ptrdiff_t>(ci);
            fallback_z = z;
        }
    }
    // Rounding can defeat every certificate; the optimum is still the best
    // feasible stationary point.
    z = fallback_z;
    return fallback;
}

ProjectionResult OrthantProjector::project(const Eigen::VectorXd& x) const {
    ProjectionResult out;
    const auto ci = select(x, out.z);
    const auto& c = candidates_[static_cast<std::size_t>(ci)];
    const Eigen::VectorXd diff = out.z - x;
    out.objective = diff.dot(A_ * diff);
    out.multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p_));
    for (Eigen::Index i : c.fixed) {
        out.active.push_back(static_cast<std::size_t>(i));
        out.multipliers[i] = 2.0 * A_.row(i).dot(diff);
    }
    return out;
}

std::size_t OrthantProjector::active_count(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z;
    return candidates_[static_cast<std::size_t>(select(x, z))].fixed.size();
}

ProjectionResult project_onto_orthant(const Eigen::MatrixXd& A, const Eigen::VectorXd& x, std::size_t p) {
    return OrthantProjector(A, p).project(x);
}

ChiBarMixture weights_closed_form(std::size_t p) {
    if (p != 1) throw InvalidInput("closed-form weights exist for p = 1 only; use the p = 2 form or Monte Carlo");
    return ChiBarMixture::from_weights({0.5, 0.5}, WeightSource::closed_form_p1);
}

ChiBarMixture weights_closed_form_p2(const Eigen::Matrix2d& A2) {
    require_spd(A2);
    const double r = std::clamp(A2(0, 1) / std::sqrt(A2(0, 0) * A2(1, 1)), -1.0, 1.0);
    const double w2 = std::acos(r) / (2.0 * std::numbers::pi);
    ChiBarMixture m;
    m.weights = {0.5 - w2, 0.5, w2};
    m.source = WeightSource::closed_form_p2;
    return m;
}

Eigen::MatrixXd tested_information(const Eigen::MatrixXd& A, std::size_t p) {
    const Eigen::Index d = A.rows();
    const auto pp = static_cast<Eigen::Index>(p);
    if (A.cols() != d || pp > d) throw InvalidInput("tested_information needs a square matrix and p <= d");
    if (pp == d) return A;
    const Eigen::Index q = d - pp;
    const Eigen::MatrixXd Aqq = A.bottomRightCorner(q, q);
    const Eigen::MatrixXd Aqp = A.bottomLeftCorner(q, pp);
    return A.topLeftCorner(pp, pp) - Aqp.transpose() * Aqq.ldlt().solve(Aqp);
}

ChiBarMixture mc_weights(const Eigen::MatrixXd& A, std::size_t p, std::size_t draws, std::uint64_t seed,
                         unsigned threads) {
    if (draws == 0) throw InvalidInput("mc_weights needs at least one draw");
    ChiBarMixture m;
    m.source = WeightSource::monte_carlo;
    m.draws = draws;
    m.seed = seed;
    if (p == 0) {
        m.weights = {1.0};
        m.std_errors = {0.0};
        return m;
    }
    const OrthantProjector projector(A, p);
    const Eigen::Index d = A.rows();
    const Eigen::MatrixXd cov = A.ldlt().solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(0.5 * (cov + cov.transpose())).matrixL();

    constexpr std::size_t chunk = 1 << 16;
    const std::size_t chunks = (draws + chunk - 1) / chunk;
    std::vector<std::vector<std::size_t>> tallies(chunks, std::vector<std::size_t>(p + 1, 0));
    parallel_for(chunks, threads, [&](std::size_t c) {
        Rng rng(stream_seed(seed, c));
        Eigen::VectorXd e(d), x(d);
        const std::size_t end = std::min(draws, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) e[j] = rng.normal();
            x.noalias() = L * e;
            ++tallies[c][p - projector.active_count(x)];
        }
    });
    std::vector<std::size_t> total(p + 1, 0);
    for (const auto& t : tallies)
        for (std::size_t j = 0; j <= p; ++j) total[j] += t[j];
    const auto n = static_cast<double>(draws);
    for (std::size_t j = 0; j <= p; ++j) {
        const double w = static_cast<double>(total[j]) / n;
        m.weights.push_back(w);
        m.std_errors.push_back(std::sqrt(w * (1.0 - w) / n));
    }
    return m;
}

double chi2_sf(double dof, double x) {
    if (dof < 0.0) throw InvalidInput("chi-square degrees of freedom must be >= 0");
    if (dof == 0.0) return x < 0.0 ? 1.0 : 0.0;
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

double chi2_upper_quantile(double dof, double a) {
    if (!(dof >= 1.0)) throw InvalidInput("chi2_upper_quantile needs dof >= 1");
    if (!(a > 0.0 && a < 1.0)) throw InvalidInput("tail probability must be in (0, 1)");
    return 2.0 * boost::math::gamma_q_inv(0.5 * dof, a);
}

double mixture_sf(const ChiBarMixture& m, double x) {
    double sf = 0.0;
    for (std::size_t j = 0; j < m.weights.size(); ++j)
        if (m.weights[j] > 0.0) sf += m.weights[j] * chi2_sf(static_cast<double>(j), x);
    return std::clamp(sf, 0.0, 1.0);
}

double mixture_cdf(const ChiBarMixture& m, double x) { return 1.0 - mixture_sf(m, x); }

double mixture_quantile(const ChiBarMixture& m, double a) {
    if (!(a > 0.0 && a < 1.0)) throw InvalidInput("tail probability must be in (0, 1)");
    if (mixture_sf(m, 0.0) <= a) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (mixture_sf(m, hi) > a) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw DomainError("mixture quantile search diverged");
    }
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (mixture_sf(m, mid) > a ? lo : hi) = mid;
    }
    return hi;
}

} // namespace hawkes
