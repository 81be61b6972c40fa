#include "hawkes/model.hpp"

#include "hawkes/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace hawkes {

namespace {

constexpr std::uint64_t kMarkMomentSeed = 0x6D61726B6D6F6DULL;

std::pair<double, double> default_bounds(SlotRole role) {
    switch (role) {
    case SlotRole::baseline_level: return {1e-8, 1e8};
    case SlotRole::baseline_growth: return {-20.0, 20.0};
    case SlotRole::adjacency: return {0.0, 10.0};
    case SlotRole::decay: return {1e-2, 1e4};
    }
    return {0.0, 0.0};
}

} // namespace

std::string_view to_string(BaselineFamily family) noexcept {
    return family == BaselineFamily::constant ? "constant" : "exponential_time";
}

std::string_view to_string(MarkWeight weight) noexcept {
    switch (weight) {
    case MarkWeight::unit: return "unit";
    case MarkWeight::identity: return "identity";
    case MarkWeight::truncated_identity: return "truncated_identity";
    }
    return "unknown";
}

std::string_view to_string(MarkDistribution distribution) noexcept {
    switch (distribution) {
    case MarkDistribution::none: return "none";
    case MarkDistribution::half_normal_offset: return "half_normal_offset";
    case MarkDistribution::custom_empirical: return "custom_empirical";
    }
    return "unknown";
}

std::string_view to_string(SlotRole role) noexcept {
    switch (role) {
    case SlotRole::baseline_level: return "baseline_level";
    case SlotRole::baseline_growth: return "baseline_growth";
    case SlotRole::adjacency: return "adjacency";
    case SlotRole::decay: return "decay";
    }
    return "unknown";
}

double MarkModel::sample(Rng& rng) const {
    switch (distribution) {
    case MarkDistribution::none: return 1.0;
    case MarkDistribution::half_normal_offset: return std::abs(rng.normal()) + offset;
    case MarkDistribution::custom_empirical: return values[rng.below(values.size())];
    }
    return 1.0;
}

MarkMoments compute_mark_moments(const MarkModel& marks) {
    if (marks.weight == MarkWeight::unit) return {1.0, 1.0, 0.0, true};

    switch (marks.distribution) {
    case MarkDistribution::none: {
        const double g = marks.g(1.0);
        return {g, g * g, 0.0, true};
    }
    case MarkDistribution::custom_empirical: {
        double sum = 0.0, sum2 = 0.0;
        for (double x : marks.values) {
            const double g = marks.g(x);
            sum += g;
            sum2 += g * g;
        }
        const auto n = static_cast<double>(marks.values.size());
        return {sum / n, sum2 / n, 0.0, true};
    }
    case MarkDistribution::half_normal_offset:
        if (marks.weight == MarkWeight::identity || !(marks.cap < std::numeric_limits<double>::infinity())) {
            const double m1 = std::sqrt(2.0 / std::numbers::pi);
            const double d = marks.offset;
            return {m1 + d, 1.0 + 2.0 * d * m1 + d * d, 0.0, true};
        }
        break;
    }

    // Truncated weight under the half-normal law: Monte Carlo, fixed seed.
    Rng rng(kMarkMomentSeed);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < kMarkMomentDraws; ++i) {
        const double g = marks.g(marks.sample(rng));
        sum += g;
        sum2 += g * g;
    }
    const auto n = static_cast<double>(kMarkMomentDraws);
    const double mean = sum / n;
    const double second = sum2 / n;
    const double var = std::max(0.0, second - mean * mean);
    return {mean, second, std::sqrt(var / n), false};
}

bool ParamVector::is_pinned(std::size_t slot) const noexcept {
    return std::binary_search(pinned.begin(), pinned.end(), slot);
}

ModelSpec::ModelSpec(ModelDescription description) : desc_(std::move(description)) {
    const std::size_t K = desc_.horizons.size();
    if (K == 0) throw InvalidInput("model dimension must be at least 1");
    for (double T : desc_.horizons) {
        if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("every horizon must be finite and > 0");
        max_horizon_ = std::max(max_horizon_, T);
    }
    if (desc_.level_slots.size() != K) throw InvalidInput("baseline needs one level slot per coordinate");
    if (desc_.baseline == BaselineFamily::exponential_time) {
        if (desc_.growth_slots.size() != K) throw InvalidInput("exponential_time baseline needs one growth slot per coordinate");
    } else if (!desc_.growth_slots.empty()) {
        throw InvalidInput("constant baseline takes no growth slots");
    }
    auto check_square = [K](const auto& m, const char* what) {
        if (m.size() != K) throw InvalidInput(std::string(what) + " must have K rows");
        for (const auto& row : m)
            if (row.size() != K) throw InvalidInput(std::string(what) + " must have K columns");
    };
    check_square(desc_.adjacency, "adjacency");
    check_square(desc_.decay, "decay");

    const auto& marks = desc_.marks;
    if (marks.weight == MarkWeight::truncated_identity && !(marks.cap > 0.0))
        throw InvalidInput("truncated_identity mark weight needs cap > 0");
    if (marks.distribution == MarkDistribution::custom_empirical) {
        if (marks.values.empty()) throw InvalidInput("custom_empirical marks need at least one value");
        for (double x : marks.values)
            if (!std::isfinite(x)) throw InvalidInput("custom_empirical marks must be finite");
    }
    if (marks.distribution == MarkDistribution::half_normal_offset && !std::isfinite(marks.offset))
        throw InvalidInput("half-normal offset must be finite");

    // Slot order: levels, growths, adjacencies, decays; first appearance within each.
    std::map<std::string, std::size_t> index;
    auto intern = [&](const std::string& name, SlotRole role) -> int {
        if (name.empty()) return -1;
        if (auto it = index.find(name); it != index.end()) {
            if (slots_[it->second].role != role)
                throw InvalidInput("slot '" + name + "' used as both " + std::string(to_string(slots_[it->second].role)) +
                                   " and " + std::string(to_string(role)));
            return static_cast<int>(it->second);
        }
        const auto [lo, hi] = [&] {
            auto b = desc_.bounds.find(name);
            return b != desc_.bounds.end() ? b->second : default_bounds(role);
        }();
        slots_.push_back({name, role, lo, hi});
        index.emplace(name, slots_.size() - 1);
        return static_cast<int>(slots_.size() - 1);
    };

    level_.resize(K);
    growth_.assign(K, -1);
    adjacency_.assign(K * K, -1);
    decay_.assign(K * K, -1);
    for (std::size_t k = 0; k < K; ++k) {
        level_[k] = intern(desc_.level_slots[k], SlotRole::baseline_level);
        if (level_[k] < 0) throw InvalidInput("every coordinate needs a baseline level slot");
    }
    if (desc_.baseline == BaselineFamily::exponential_time)
        for (std::size_t k = 0; k < K; ++k) {
            growth_[k] = intern(desc_.growth_slots[k], SlotRole::baseline_growth);
            if (growth_[k] < 0) throw InvalidInput("every coordinate needs a baseline growth slot");
        }
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) adjacency_[k * K + l] = intern(desc_.adjacency[k][l], SlotRole::adjacency);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) {
            decay_[k * K + l] = intern(desc_.decay[k][l], SlotRole::decay);
            if ((adjacency_[k * K + l] < 0) != (decay_[k * K + l] < 0))
                throw InvalidInput("decay must be named exactly where adjacency is");
        }

    for (const auto& [name, b] : desc_.bounds)
        if (!index.contains(name)) throw InvalidInput("bounds given for unknown slot '" + name + "'");

    for (const auto& s : slots_) {
        if (!(s.lower <= s.upper) || !std::isfinite(s.lower) || !std::isfinite(s.upper))
            throw InvalidInput("slot '" + s.name + "' has invalid bounds");
        if (s.role == SlotRole::baseline_level && !(s.lower > 0.0))
            throw InvalidInput("baseline level '" + s.name + "' needs a positive lower bound");
        if (s.role == SlotRole::adjacency && s.lower < 0.0)
            throw InvalidInput("adjacency '" + s.name + "' needs a nonnegative lower bound");
        if (s.role == SlotRole::decay && !(s.lower > 0.0))
            throw InvalidInput("decay '" + s.name + "' needs a positive lower bound");
    }

    moments_ = compute_mark_moments(desc_.marks);
    if (!std::isfinite(moments_.mean) || !std::isfinite(moments_.second))
        throw InvalidInput("mark weight moments are not finite");
}

std::optional<std::size_t> ModelSpec::find_slot(std::string_view name) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].name == name) return i;
    return std::nullopt;
}

std::size_t ModelSpec::slot_index(std::string_view name) const {
    if (auto i = find_slot(name)) return *i;
    throw InvalidInput("unknown parameter slot '" + std::string(name) + "'");
}

std::vector<std::size_t> ModelSpec::slots_with_role(SlotRole role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].role == role) out.push_back(i);
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> ModelSpec::entries_of(std::size_t slot) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t K = dimension();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l)
            if (adjacency_[k * K + l] == static_cast<int>(slot)) out.emplace_back(k, l);
    return out;
}

std::vector<std::size_t> ModelSpec::pattern_slots(const std::vector<std::pair<std::size_t, std::size_t>>& entries) const {
    std::set<std::size_t> out;
    const std::size_t K = dimension();
    for (const auto& [k, l] : entries) {
        if (k >= K || l >= K)
            throw InfeasiblePattern("pattern entry (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                                    ") lies outside the " + std::to_string(K) + "x" + std::to_string(K) + " adjacency");
        const int s = adjacency_[k * K + l];
        if (s < 0)
            throw InfeasiblePattern("pattern entry (" + std::to_string(k + 1) + "," + std::to_string(l + 1) +
                                    ") is a structural zero of the model");
        out.insert(static_cast<std::size_t>(s));
    }
    return {out.begin(), out.end()};
}

ParamVector ModelSpec::make_params(const std::map<std::string, double>& named) const {
    ParamVector p;
    p.values.resize(static_cast<Eigen::Index>(slots_.size()));
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        auto it = named.find(slots_[i].name);
        if (it == named.end()) throw InvalidInput("no value given for parameter '" + slots_[i].name + "'");
        p.values[static_cast<Eigen::Index>(i)] = it->second;
    }
    for (const auto& [name, v] : named)
        if (!find_slot(name)) throw InvalidInput("value given for unknown parameter '" + name + "'");
    return p;
}

std::map<std::string, double> ModelSpec::named_values(const Eigen::VectorXd& theta) const {
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < slots_.size(); ++i) out[slots_[i].name] = theta[static_cast<Eigen::Index>(i)];
    return out;
}

bool ModelSpec::within_bounds(const Eigen::VectorXd& theta) const {
    if (theta.size() != static_cast<Eigen::Index>(slots_.size())) return false;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        const double v = theta[static_cast<Eigen::Index>(i)];
        if (!(v >= slots_[i].lower && v <= slots_[i].upper)) return false;
    }
    return true;
}

Eigen::VectorXd ModelSpec::clamp(Eigen::VectorXd theta) const {
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        auto& v = theta[static_cast<Eigen::Index>(i)];
        v = std::clamp(v, slots_[i].lower, slots_[i].upper);
    }
    return theta;
}

Eigen::VectorXd ModelSpec::baseline(const Eigen::VectorXd& theta, double t) const {
    const std::size_t K = dimension();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const double T = desc_.horizons[k];
        if (t > T) continue;
        double v = theta[level_[k]];
        if (growth_[k] >= 0) v *= std::exp(theta[growth_[k]] * t / T);
        mu[static_cast<Eigen::Index>(k)] = v;
    }
    return mu;
}

Eigen::VectorXd ModelSpec::baseline_integral(const Eigen::VectorXd& theta) const {
    const std::size_t K = dimension();
    Eigen::VectorXd out(static_cast<Eigen::Index>(K));
    for (std::size_t k = 0; k < K; ++k) {
        const double T = desc_.horizons[k];
        double v = theta[level_[k]] * T;
        if (growth_[k] >= 0) v *= exp_moments(theta[growth_[k]])[0];
        out[static_cast<Eigen::Index>(k)] = v;
    }
    return out;
}

Eigen::MatrixXd ModelSpec::kernel_matrix(const Eigen::VectorXd& theta, double s) const {
    const auto K = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = 0; l < K; ++l) {
            const int b = decay_[static_cast<std::size_t>(k * K + l)];
            if (b >= 0) out(k, l) = kernel_density(desc_.kernel, s, theta[b]).value;
        }
    return out;
}

Eigen::MatrixXd ModelSpec::kernel_primitive_matrix(const Eigen::VectorXd& theta, double s) const {
    const auto K = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = 0; l < K; ++l) {
            const int b = decay_[static_cast<std::size_t>(k * K + l)];
            if (b >= 0) out(k, l) = kernel_primitive(desc_.kernel, s, theta[b]).value;
        }
    return out;
}

Eigen::MatrixXd ModelSpec::mark_weight_matrix(double x) const {
    const auto K = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    const double g = desc_.marks.g(x);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = 0; l < K; ++l)
            if (adjacency_[static_cast<std::size_t>(k * K + l)] >= 0) out(k, l) = g;
    return out;
}

Eigen::MatrixXd ModelSpec::adjacency_matrix(const Eigen::VectorXd& theta) const {
    const auto K = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(K, K);
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index l = 0; l < K; ++l) {
            const int a = adjacency_[static_cast<std::size_t>(k * K + l)];
            if (a >= 0) out(k, l) = theta[a];
        }
    return out;
}

Eigen::MatrixXd branching_matrix(const ModelSpec& spec, const Eigen::VectorXd& theta) {
    return spec.adjacency_matrix(theta) * spec.mark_moments().mean;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    const Eigen::Index n = m.rows();
    if (n == 0) return 0.0;
    if (m.cwiseAbs().maxCoeff() == 0.0) return 0.0;

    // Power iteration on M + I: for nonnegative M the Perron root r is real and
    // r + 1 strictly dominates |lambda + 1| for every other eigenvalue lambda.
    if ((m.array() >= 0.0).all()) {
        const Eigen::MatrixXd shifted = m + Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
        double estimate = 0.0;
        for (int it = 0; it < 5000; ++it) {
            Eigen::VectorXd w = shifted * v;
            const double norm = w.norm();
            w /= norm;
            if (it > 0 && std::abs(norm - estimate) <= 1e-13 * norm && (w - v).norm() <= 1e-10) {
                return norm - 1.0;
            }
            estimate = norm;
            v = w;
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

ValidationReport validate(const ModelSpec& spec, const ParamVector& theta) {
    ValidationReport report;
    if (theta.values.size() != static_cast<Eigen::Index>(spec.num_params())) {
        report.messages.push_back("parameter vector has " + std::to_string(theta.values.size()) + " entries, model expects " +
                                  std::to_string(spec.num_params()));
        return report;
    }
    for (std::size_t i = 0; i < spec.num_params(); ++i) {
        const auto& s = spec.slot(i);
        const double v = theta.values[static_cast<Eigen::Index>(i)];
        if (!(v >= s.lower && v <= s.upper)) {
            std::ostringstream msg;
            msg << "parameter '" << s.name << "' = " << v << " outside bounds [" << s.lower << ", " << s.upper << "]";
            report.messages.push_back(msg.str());
        }
    }
    for (std::size_t i : theta.pinned) {
        if (i >= spec.num_params() || spec.slot(i).role != SlotRole::adjacency)
            report.messages.push_back("pinned slot " + std::to_string(i) + " is not an adjacency slot");
        else if (theta.values[static_cast<Eigen::Index>(i)] != 0.0)
            report.messages.push_back("pinned adjacency '" + spec.slot(i).name + "' is not exactly zero");
    }
    report.branching = branching_matrix(spec, theta.values);
    report.spectral_radius = spectral_radius(report.branching);
    report.stable = report.spectral_radius < 1.0;
    if (!report.stable) {
        std::ostringstream msg;
        msg << "branching spectral radius " << report.spectral_radius
            << " >= 1: the process is not stable; finite-horizon simulation may still terminate "
               "but the asymptotic information is undefined";
        report.messages.push_back(msg.str());
    }
    return report;
}

std::array<double, 3> exp_moments(double kappa) noexcept {
    std::array<double, 3> m{};
    if (std::abs(kappa) < 1.0) {
        // Series sum_j kappa^j / (j! (m + j + 1)).
        double term = 1.0;
        for (int j = 0; j < 40; ++j) {
            for (int i = 0; i < 3; ++i) m[static_cast<std::size_t>(i)] += term / (i + j + 1);
            term *= kappa / (j + 1);
            if (std::abs(term) < 1e-18) break;
        }
        return m;
    }
    const double e = std::exp(kappa);
    m[0] = std::expm1(kappa) / kappa;
    m[1] = (e - m[0]) / kappa;
    m[2] = (e - 2.0 * m[1]) / kappa;
    return m;
}

} // namespace hawkes
