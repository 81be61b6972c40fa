#pragma once

#include "hawkes/kernels.hpp"
#include "hawkes/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hawkes {

enum class BaselineFamily {
    constant,         ///< mu_k(t) = m_k
    exponential_time, ///< mu_k(t) = m_k exp(kappa_k t / T_k)
};

/// Known weight g(x) applied to the mark of the exciting event. Never estimated.
enum class MarkWeight { unit, identity, truncated_identity };

enum class MarkDistribution {
    none,               ///< unmarked; every mark is 1
    half_normal_offset, ///< |N(0,1)| + offset
    custom_empirical,   ///< uniform draw from a list of observed marks
};

enum class SlotRole { baseline_level, baseline_growth, adjacency, decay };

std::string_view to_string(BaselineFamily family) noexcept;
std::string_view to_string(MarkWeight weight) noexcept;
std::string_view to_string(MarkDistribution distribution) noexcept;
std::string_view to_string(SlotRole role) noexcept;

/// One named coordinate of the parameter vector theta.
struct ParamSlot {
    std::string name;
    SlotRole role{SlotRole::adjacency};
    double lower{0.0};
    double upper{0.0};

    /// A slot with equal bounds is held at that value by every fit.
    [[nodiscard]] bool fixed() const noexcept { return lower == upper; }
};

/// E[g(X)] and E[g(X)^2] of the mark weight under the mark distribution.
struct MarkMoments {
    double mean{1.0};
    double second{1.0};
    double mean_std_error{0.0}; ///< zero when computed exactly
    bool exact{true};
};

struct MarkModel {
    MarkWeight weight{MarkWeight::unit};
    double cap{std::numeric_limits<double>::infinity()}; ///< truncated_identity only
    MarkDistribution distribution{MarkDistribution::none};
    double offset{0.0};         ///< half_normal_offset only
    std::vector<double> values; ///< custom_empirical only

    [[nodiscard]] double g(double x) const noexcept {
        switch (weight) {
        case MarkWeight::unit: return 1.0;
        case MarkWeight::identity: return x;
        case MarkWeight::truncated_identity: return x < cap ? x : cap;
        }
        return 1.0;
    }

    [[nodiscard]] double sample(Rng& rng) const;
    [[nodiscard]] bool marked() const noexcept { return distribution != MarkDistribution::none; }
};

/// Number of Monte Carlo draws used for E[g(X)] when no closed form is known.
inline constexpr std::size_t kMarkMomentDraws = 10'000'000;

MarkMoments compute_mark_moments(const MarkModel& marks);

/// Everything needed to build a ModelSpec. Parameter slots are referenced by name;
/// the same name used in several places shares one coordinate of theta.
struct ModelDescription {
    std::vector<double> horizons; ///< T_k per coordinate; K = horizons.size()
    BaselineFamily baseline{BaselineFamily::constant};
    std::vector<std::string> level_slots;  ///< size K
    std::vector<std::string> growth_slots; ///< size K for exponential_time, else empty
    KernelFamily kernel{KernelFamily::exponential};
    /// K x K, row = excited coordinate k, column = exciting coordinate l.
    /// An empty name marks a structural zero.
    std::vector<std::vector<std::string>> adjacency;
    std::vector<std::vector<std::string>> decay; ///< empty exactly where adjacency is
    MarkModel marks;
    std::map<std::string, std::pair<double, double>> bounds; ///< missing slots get role defaults
};

/// Concrete theta with the set of adjacency slots pinned to exactly zero.
struct ParamVector {
    Eigen::VectorXd values;
    std::vector<std::size_t> pinned; ///< sorted slot indices

    [[nodiscard]] bool is_pinned(std::size_t slot) const noexcept;
};

/// The parametric family: dimension, baseline, kernel, marks, parameter layout and
/// box bounds. Immutable after construction.
class ModelSpec {
public:
    explicit ModelSpec(ModelDescription description);

    [[nodiscard]] const ModelDescription& description() const noexcept { return desc_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return desc_.horizons.size(); }
    [[nodiscard]] const std::vector<double>& horizons() const noexcept { return desc_.horizons; }
    [[nodiscard]] double horizon(std::size_t k) const { return desc_.horizons.at(k); }
    [[nodiscard]] double max_horizon() const noexcept { return max_horizon_; }
    [[nodiscard]] BaselineFamily baseline_family() const noexcept { return desc_.baseline; }
    [[nodiscard]] KernelFamily kernel_family() const noexcept { return desc_.kernel; }
    [[nodiscard]] const MarkModel& marks() const noexcept { return desc_.marks; }
    [[nodiscard]] const MarkMoments& mark_moments() const noexcept { return moments_; }

    [[nodiscard]] std::size_t num_params() const noexcept { return slots_.size(); }
    [[nodiscard]] const std::vector<ParamSlot>& slots() const noexcept { return slots_; }
    [[nodiscard]] const ParamSlot& slot(std::size_t i) const { return slots_.at(i); }
    [[nodiscard]] std::optional<std::size_t> find_slot(std::string_view name) const;
    [[nodiscard]] std::size_t slot_index(std::string_view name) const;

    // Slot indices per coordinate / entry; -1 when absent.
    [[nodiscard]] int level_slot(std::size_t k) const { return level_.at(k); }
    [[nodiscard]] int growth_slot(std::size_t k) const { return growth_.at(k); }
    [[nodiscard]] int adjacency_slot(std::size_t k, std::size_t l) const { return adjacency_.at(k * dimension() + l); }
    [[nodiscard]] int decay_slot(std::size_t k, std::size_t l) const { return decay_.at(k * dimension() + l); }

    [[nodiscard]] std::vector<std::size_t> slots_with_role(SlotRole role) const;
    /// Entries (k, l), 0-based, whose adjacency is the given slot.
    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> entries_of(std::size_t adjacency_slot) const;
    /// Adjacency slots behind a set of 0-based entries. Throws InfeasiblePattern.
    [[nodiscard]] std::vector<std::size_t> pattern_slots(
        const std::vector<std::pair<std::size_t, std::size_t>>& entries) const;

    /// theta with named values; every slot must be given.
    [[nodiscard]] ParamVector make_params(const std::map<std::string, double>& named) const;
    [[nodiscard]] std::map<std::string, double> named_values(const Eigen::VectorXd& theta) const;
    [[nodiscard]] bool within_bounds(const Eigen::VectorXd& theta) const;
    /// Projects theta onto the box bounds.
    [[nodiscard]] Eigen::VectorXd clamp(Eigen::VectorXd theta) const;

    /// mu_k(t) per coordinate (events/second); zero past the coordinate's horizon.
    [[nodiscard]] Eigen::VectorXd baseline(const Eigen::VectorXd& theta, double t) const;
    /// int_0^{T_k} mu_k(t) dt per coordinate.
    [[nodiscard]] Eigen::VectorXd baseline_integral(const Eigen::VectorXd& theta) const;
    /// f(s, beta_kl); zero on structural zeros.
    [[nodiscard]] Eigen::MatrixXd kernel_matrix(const Eigen::VectorXd& theta, double s) const;
    /// int_0^s f(u, beta_kl) du.
    [[nodiscard]] Eigen::MatrixXd kernel_primitive_matrix(const Eigen::VectorXd& theta, double s) const;
    /// g(x) on every non-structural entry.
    [[nodiscard]] Eigen::MatrixXd mark_weight_matrix(double x) const;
    [[nodiscard]] Eigen::MatrixXd adjacency_matrix(const Eigen::VectorXd& theta) const;

private:
    ModelDescription desc_;
    MarkMoments moments_;
    std::vector<ParamSlot> slots_;
    std::vector<int> level_, growth_, adjacency_, decay_;
    double max_horizon_{0.0};
};

/// Stability diagnostics of a parameter value.
struct ValidationReport {
    bool stable{false};
    double spectral_radius{0.0};
    Eigen::MatrixXd branching;
    std::vector<std::string> messages;
};

/// Entry (k, l) is int int phi_kl(s, x) F(dx) ds = alpha_kl E[g(X)].
Eigen::MatrixXd branching_matrix(const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Spectral radius: power iteration on M + I to relative tolerance 1e-10, dense
/// eigensolve when that does not converge.
double spectral_radius(const Eigen::MatrixXd& m);

/// Stability and bound checks. Out-of-bounds values are reported, not thrown.
ValidationReport validate(const ModelSpec& spec, const ParamVector& theta);

/// M_m(kappa) = int_0^1 u^m exp(kappa u) du for m = 0, 1, 2.
std::array<double, 3> exp_moments(double kappa) noexcept;

} // namespace hawkes
