#pragma once

#include "hawkes/model.hpp"

#include <map>
#include <string>
#include <utility>

namespace fixtures {

using hawkes::BaselineFamily;
using hawkes::KernelFamily;
using hawkes::ModelDescription;
using hawkes::ModelSpec;

/// K = 1, constant baseline "mu", kernel alpha * f(s, beta).
inline ModelSpec univariate(KernelFamily family, double T = 10.0,
                            std::map<std::string, std::pair<double, double>> bounds = {}) {
    ModelDescription d;
    d.horizons = {T};
    d.level_slots = {"mu"};
    d.kernel = family;
    d.adjacency = {{"alpha"}};
    d.decay = {{"beta"}};
    d.bounds = std::move(bounds);
    return ModelSpec(d);
}

/// K = 1 Poisson model with constant baseline "mu" and no excitation.
inline ModelSpec poisson(double T = 10.0) {
    ModelDescription d;
    d.horizons = {T};
    d.level_slots = {"mu"};
    d.adjacency = {{""}};
    d.decay = {{""}};
    return ModelSpec(d);
}

/// K = 1, baseline mu0 exp(kappa t / T); exponential kernel with decay fixed
/// at `beta` when beta > 0.
inline ModelSpec growth_hawkes(double T = 10.0, double beta = 10.0) {
    ModelDescription d;
    d.horizons = {T};
    d.baseline = BaselineFamily::exponential_time;
    d.level_slots = {"mu0"};
    d.growth_slots = {"kappa"};
    d.adjacency = {{"alpha"}};
    d.decay = {{"beta"}};
    if (beta > 0) d.bounds["beta"] = {beta, beta};
    return ModelSpec(d);
}

/// Bivariate price model: common baseline m exp(kappa t / T), self excitation
/// gamma1, gamma2, shared cross excitation alpha, one decay, identity marks on
/// |N(0,1)| + 0.01.
inline ModelSpec bivariate_marked(double T = 1.0, double beta = 0.0) {
    ModelDescription d;
    d.horizons = {T, T};
    d.baseline = BaselineFamily::exponential_time;
    d.level_slots = {"m", "m"};
    d.growth_slots = {"kappa", "kappa"};
    d.adjacency = {{"gamma1", "alpha"}, {"alpha", "gamma2"}};
    d.decay = {{"beta", "beta"}, {"beta", "beta"}};
    d.marks.weight = hawkes::MarkWeight::identity;
    d.marks.distribution = hawkes::MarkDistribution::half_normal_offset;
    d.marks.offset = 0.01;
    if (beta > 0) d.bounds["beta"] = {beta, beta};
    return ModelSpec(d);
}

/// K = 2 with every entry and decay its own slot: a_kl, b_kl, levels mu1, mu2.
inline ModelSpec bivariate_full(KernelFamily family, double T = 5.0) {
    ModelDescription d;
    d.horizons = {T, T};
    d.level_slots = {"mu1", "mu2"};
    d.kernel = family;
    d.adjacency = {{"a11", "a12"}, {"a21", "a22"}};
    d.decay = {{"b11", "b12"}, {"b21", "b22"}};
    return ModelSpec(d);
}

} // namespace fixtures
