#include "hawkes/sparsity_test.hpp"

#include "hawkes/error.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hawkes {

std::string_view to_string(TestMethod method) noexcept {
    switch (method) {
    case TestMethod::known_weights: return "known";
    case TestMethod::conditional: return "conditional";
    case TestMethod::mc_weights: return "mc";
    }
    return "known";
}

TestMethod test_method_from_string(std::string_view name) {
    if (name == "known" || name == "known_weights") return TestMethod::known_weights;
    if (name == "conditional") return TestMethod::conditional;
    if (name == "mc" || name == "mc_weights") return TestMethod::mc_weights;
    throw InvalidInput("unknown test method '" + std::string(name) + "'");
}

double lrs(const FitResult& full, const FitResult& null) {
    const double value = 2.0 * (full.loglik - null.loglik);
    if (std::isnan(value)) throw NestingViolation("likelihood ratio statistic is not a number");
    if (value < -1e-7) {
        std::ostringstream msg;
        msg << "full-model log-likelihood is below the null by " << -0.5 * value << "; the full fit failed";
        throw NestingViolation(msg.str());
    }
    return std::max(value, 0.0);
}

TestResult test_known_weights(double lrs_value, const ChiBarMixture& mixture, double level) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must be in (0, 1)");
    TestResult r;
    r.method = TestMethod::known_weights;
    r.lrs = lrs_value;
    r.level = level;
    r.p = mixture.p();
    r.p_value = mixture_sf(mixture, lrs_value);
    r.reject = r.p_value <= level;
    r.mixture = mixture;
    r.critical_value = mixture_quantile(mixture, level);
    return r;
}

TestResult test_conditional_susko(double lrs_value, const FitResult& full, const std::vector<std::size_t>& tested,
                                  double level, double epsilon) {
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must be in (0, 1)");
    TestResult r;
    r.method = TestMethod::conditional;
    r.lrs = lrs_value;
    r.level = level;
    r.p = tested.size();
    for (std::size_t s : tested)
        if (full.theta.values[static_cast<Eigen::Index>(s)] <= epsilon) ++r.zeros_observed;
    if (lrs_value <= epsilon) {
        r.p_value = 1.0;
    } else if (r.zeros_observed == r.p) {
        r.p_value = 1.0;
        r.diagnostics.push_back("positive statistic while every tested coefficient is zero in the full fit");
    } else {
        const auto dof = static_cast<double>(r.p - r.zeros_observed);
        r.p_value = chi2_sf(dof, lrs_value);
        r.critical_value = chi2_upper_quantile(dof, level);
    }
    r.reject = r.p_value <= level && lrs_value > epsilon;
    return r;
}

TestResult bonferroni_combine(const std::vector<double>& lrs_values, const ChiBarMixture& mixture, double level) {
    if (lrs_values.empty()) throw InvalidInput("bonferroni_combine needs at least one statistic");
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must be in (0, 1)");
    const auto m = static_cast<double>(lrs_values.size());
    TestResult r;
    r.method = TestMethod::known_weights;
    r.level = level;
    r.p = mixture.p();
    r.mixture = mixture;
    r.lrs = *std::max_element(lrs_values.begin(), lrs_values.end());
    double min_p = 1.0;
    for (double v : lrs_values) min_p = std::min(min_p, mixture_sf(mixture, v));
    r.p_value = std::min(1.0, m * min_p);
    r.critical_value = mixture_quantile(mixture, level / m);
    r.reject = r.p_value <= level;
    return r;
}

std::pair<Eigen::MatrixXd, std::vector<std::size_t>> tested_first_information(
    const ModelSpec& spec, const Eigen::MatrixXd& information, const std::vector<std::size_t>& tested,
    const std::vector<std::size_t>& frozen) {
    std::vector<std::size_t> order = tested;
    for (std::size_t s = 0; s < spec.num_params(); ++s) {
        if (std::find(tested.begin(), tested.end(), s) != tested.end()) continue;
        if (spec.slot(s).fixed()) continue;
        if (std::find(frozen.begin(), frozen.end(), s) != frozen.end()) continue;
        order.push_back(s);
    }
    const auto d = static_cast<Eigen::Index>(order.size());
    Eigen::MatrixXd sub(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c)
            sub(r, c) = information(static_cast<Eigen::Index>(order[r]), static_cast<Eigen::Index>(order[c]));
    return {sub, order};
}

namespace {

ChiBarMixture mixture_from_information(const Eigen::MatrixXd& sub, std::size_t p, TestMethod method,
                                       std::size_t draws, std::uint64_t seed) {
    if (p == 0) return ChiBarMixture::from_weights({1.0});
    if (method == TestMethod::mc_weights) return mc_weights(sub, p, draws, seed);
    if (p == 1) return weights_closed_form(1);
    if (p == 2) return weights_closed_form_p2(tested_information(sub, 2));
    throw InvalidInput("known weights for p > 2 must be supplied; use the Monte Carlo method instead");
}

} // namespace

ChiBarMixture null_mixture(const ModelSpec& spec, const FitResult& null, const std::vector<std::size_t>& tested,
                           const TestOptions& options) {
    const std::size_t p = tested.size();
    if (options.weights && options.method != TestMethod::mc_weights) {
        if (options.weights->p() != p)
            throw InvalidInput("supplied weights must have p + 1 = " + std::to_string(p + 1) + " entries");
        return *options.weights;
    }
    if (p == 1 && options.method == TestMethod::known_weights) return weights_closed_form(1);
    const auto [sub, order] = tested_first_information(spec, null.information, tested, null.frozen);
    return mixture_from_information(sub, p, options.method, options.mc_draws, options.mc_seed);
}

TestResult run_test(const LikelihoodContext& ctx, const std::vector<std::size_t>& tested_in,
                    const TestOptions& options) {
    std::vector<std::size_t> tested = tested_in;
    std::sort(tested.begin(), tested.end());
    tested.erase(std::unique(tested.begin(), tested.end()), tested.end());
    if (tested.empty()) throw InfeasiblePattern("the tested pattern is empty");

    FitResult null = fit(ctx, tested, options.fit);
    FitOptions full_options = options.fit;
    Eigen::VectorXd warm = null.theta.values;
    for (std::size_t s : null.frozen) warm[static_cast<Eigen::Index>(s)] = std::numeric_limits<double>::quiet_NaN();
    full_options.warm_start = warm;
    FitResult full = fit(ctx, {}, full_options);
    const double statistic = lrs(full, null);

    TestResult r;
    if (options.method == TestMethod::conditional) {
        r = test_conditional_susko(statistic, full, tested, options.level, options.epsilon);
    } else {
        r = test_known_weights(statistic, null_mixture(ctx.spec(), null, tested, options), options.level);
        r.method = options.method;
        for (std::size_t s : tested)
            if (full.theta.values[static_cast<Eigen::Index>(s)] <= options.epsilon) ++r.zeros_observed;
    }
    if (!null.converged) r.diagnostics.push_back("null fit did not converge");
    if (!full.converged) r.diagnostics.push_back("full fit did not converge");
    r.full = std::move(full);
    r.null = std::move(null);
    return r;
}

nlohmann::json to_json(const TestResult& result, const ModelSpec& spec) {
    nlohmann::json j = {
        {"lrs", result.lrs},
        {"method", std::string(to_string(result.method))},
        {"p_value", result.p_value},
        {"reject", result.reject},
        {"level", result.level},
        {"p", result.p},
        {"zeros_observed", result.zeros_observed},
        {"diagnostics", result.diagnostics},
    };
    if (result.critical_value) j["critical_value"] = *result.critical_value;
    if (result.mixture) {
        nlohmann::json m = {{"weights", result.mixture->weights},
                            {"source", std::string(to_string(result.mixture->source))}};
        if (result.mixture->source == WeightSource::monte_carlo) {
            m["draws"] = result.mixture->draws;
            m["seed"] = result.mixture->seed;
            m["std_errors"] = result.mixture->std_errors;
        }
        j["mixture"] = std::move(m);
    }
    if (result.full) j["full"] = to_json(*result.full, spec);
    if (result.null) j["null"] = to_json(*result.null, spec);
    return j;
}

double conditional_quantile(const ChiBarMixture& mixture, double u) {
    if (!(u > 0.0 && u < 1.0)) throw InvalidInput("probability must be in (0, 1)");
    const double positive = 1.0 - mixture.weights.front();
    if (!(positive > 0.0)) throw DomainError("mixture has no positive part");
    // P(X > x | X > 0) = sf(x) / (1 - w0) = 1 - u
    return mixture_quantile(mixture, (1.0 - u) * positive);
}

double conditional_ks_distance(std::vector<double> sample, const ChiBarMixture& mixture) {
    if (sample.empty()) return 0.0;
    const double positive = 1.0 - mixture.weights.front();
    std::sort(sample.begin(), sample.end());
    const auto m = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = 1.0 - mixture_sf(mixture, sample[i]) / positive;
        d = std::max({d, (static_cast<double>(i) + 1.0) / m - F, F - static_cast<double>(i) / m});
    }
    return d;
}

namespace {

struct RepOutcome {
    bool ok{false};
    double lrs{0.0};
    double p_value{1.0};
    std::size_t zeros{0};
    std::optional<ChiBarMixture> mixture;
};

std::vector<RepOutcome> run_reps(const ModelSpec& sim_spec, const ParamVector& theta0, const ModelSpec& fit_spec,
                                 const std::vector<std::size_t>& tested, const CalibrationOptions& options,
                                 std::uint64_t master) {
    if (options.reps == 0 || options.n == 0) throw InvalidInput("calibration needs reps >= 1 and n >= 1");
    std::vector<RepOutcome> out(options.reps);
    parallel_for(options.reps, options.threads, [&](std::size_t rep) {
        SimulationOptions sim = options.simulation;
        sim.threads = 1;
        TestOptions test = options.test;
        test.fit.threads = 1;
        test.mc_seed = stream_seed(options.test.mc_seed, rep);
        try {
            const Dataset data = simulate_dataset(sim_spec, theta0, options.n, stream_seed(master, rep), sim);
            const auto ctx = LikelihoodContext::aggregated(fit_spec, data);
            const TestResult r = run_test(ctx, tested, test);
            if (!r.full->converged || !r.null->converged) return;
            out[rep] = {true, r.lrs, r.p_value, r.zeros_observed, r.mixture};
        } catch (const NestingViolation&) {
        } catch (const NonFiniteIntensity&) {
        } catch (const NotSPD&) {
        }
    });
    return out;
}

std::vector<std::size_t> map_slots(const ModelSpec& from, const std::vector<std::size_t>& slots, const ModelSpec& to) {
    std::vector<std::size_t> out;
    for (std::size_t s : slots) {
        const auto found = to.find_slot(from.slot(s).name);
        if (!found) throw InvalidInput("simulation model has no slot named '" + from.slot(s).name + "'");
        out.push_back(*found);
    }
    return out;
}

std::optional<ChiBarMixture> asymptotic_reference(const ModelSpec& sim_spec, const ParamVector& theta0,
                                                  const ModelSpec& fit_spec, const std::vector<std::size_t>& tested,
                                                  const CalibrationOptions& options) {
    try {
        Eigen::VectorXd theta(static_cast<Eigen::Index>(fit_spec.num_params()));
        for (std::size_t s = 0; s < fit_spec.num_params(); ++s) {
            const auto& slot = fit_spec.slot(s);
            const auto i = static_cast<Eigen::Index>(s);
            if (slot.fixed()) {
                theta[i] = slot.lower;
            } else if (const auto found = sim_spec.find_slot(slot.name)) {
                theta[i] = theta0.values[static_cast<Eigen::Index>(*found)];
            } else {
                return std::nullopt;
            }
        }
        const auto info = asymptotic_information(fit_spec, theta);
        const auto frozen = frozen_decay_slots(fit_spec, tested);
        const auto [sub, order] = tested_first_information(fit_spec, info.information, tested, frozen);
        const TestMethod method = tested.size() > 2 ? TestMethod::mc_weights : TestMethod::known_weights;
        return mixture_from_information(sub, tested.size(), method, 200'000, options.test.mc_seed);
    } catch (const Error&) {
        return std::nullopt;
    }
}

} // namespace

CalibrationReport calibrate_level(const ModelSpec& sim_spec, const ParamVector& theta0, const ModelSpec& fit_spec,
                                  const std::vector<std::size_t>& tested_in, const CalibrationOptions& options) {
    std::vector<std::size_t> tested = tested_in;
    std::sort(tested.begin(), tested.end());
    const std::size_t p = tested.size();
    map_slots(fit_spec, tested, sim_spec);
    const auto outcomes = run_reps(sim_spec, theta0, fit_spec, tested, options, options.seed);

    CalibrationReport rep;
    rep.reps = options.reps;
    std::vector<std::vector<std::size_t>> rejections_by_stratum(p + 1, std::vector<std::size_t>(options.levels.size()));
    std::vector<std::size_t> members(p + 1, 0);
    std::vector<std::size_t> rejections(options.levels.size(), 0);
    std::size_t zero_lrs = 0;
    std::vector<double> mean_weights(p + 1, 0.0);
    std::size_t mixtures = 0;
    for (const auto& o : outcomes) {
        if (!o.ok) {
            ++rep.excluded;
            continue;
        }
        ++rep.completed;
        rep.lrs.push_back(o.lrs);
        rep.zeros.push_back(o.zeros);
        rep.p_values.push_back(o.p_value);
        ++members[o.zeros];
        if (o.lrs <= options.test.epsilon) ++zero_lrs;
        for (std::size_t a = 0; a < options.levels.size(); ++a) {
            const bool reject = o.p_value <= options.levels[a] && o.lrs > options.test.epsilon;
            if (reject) {
                ++rejections[a];
                ++rejections_by_stratum[o.zeros][a];
            }
        }
        if (o.mixture && o.mixture->weights.size() == p + 1) {
            for (std::size_t j = 0; j <= p; ++j) mean_weights[j] += o.mixture->weights[j];
            ++mixtures;
        }
    }
    rep.failed = static_cast<double>(rep.excluded) >= 0.01 * static_cast<double>(rep.reps) && rep.excluded > 0;
    const auto completed = static_cast<double>(std::max<std::size_t>(rep.completed, 1));
    for (std::size_t a = 0; a < options.levels.size(); ++a) {
        const double rate = static_cast<double>(rejections[a]) / completed;
        rep.levels.push_back({options.levels[a], rate, std::sqrt(rate * (1.0 - rate) / completed)});
    }
    for (std::size_t k = 0; k <= p; ++k) {
        StratumRow row;
        row.zeros = k;
        row.members = members[k];
        for (std::size_t a = 0; a < options.levels.size(); ++a)
            row.rate.push_back(members[k] ? static_cast<double>(rejections_by_stratum[k][a]) / static_cast<double>(members[k])
                                          : 0.0);
        rep.strata.push_back(std::move(row));
        rep.zero_count_frequency.push_back(static_cast<double>(members[k]) / completed);
    }
    rep.zero_mass = static_cast<double>(zero_lrs) / completed;

    if (options.reference) {
        rep.reference = *options.reference;
    } else if (auto ref = asymptotic_reference(sim_spec, theta0, fit_spec, tested, options)) {
        rep.reference = *ref;
    } else if (mixtures > 0) {
        for (double& w : mean_weights) w /= static_cast<double>(mixtures);
        rep.reference = ChiBarMixture::from_weights(mean_weights);
    } else {
        rep.reference = p == 1 ? weights_closed_form(1)
                               : ChiBarMixture::from_weights(std::vector<double>(p + 1, 1.0 / static_cast<double>(p + 1)));
    }

    std::vector<double> positive;
    for (double v : rep.lrs)
        if (v > options.test.epsilon) positive.push_back(v);
    std::sort(positive.begin(), positive.end());
    if (rep.reference.weights.front() < 1.0) {
        const auto m = static_cast<double>(positive.size());
        for (std::size_t i = 0; i < positive.size(); ++i)
            rep.qq.emplace_back(positive[i], conditional_quantile(rep.reference, (static_cast<double>(i) + 0.5) / m));
        rep.ks_conditional = conditional_ks_distance(positive, rep.reference);
    }
    return rep;
}

std::vector<PowerRow> power_curve(const ModelSpec& sim_spec, const ParamVector& theta_base, const ModelSpec& fit_spec,
                                  const std::vector<std::size_t>& tested_in, const std::vector<double>& alpha_grid,
                                  const CalibrationOptions& options) {
    if (options.levels.empty()) throw InvalidInput("power_curve needs a level");
    std::vector<std::size_t> tested = tested_in;
    std::sort(tested.begin(), tested.end());
    const auto sim_slots = map_slots(fit_spec, tested, sim_spec);
    const double level = options.levels.front();
    std::vector<PowerRow> rows;
    for (std::size_t g = 0; g < alpha_grid.size(); ++g) {
        ParamVector theta = theta_base;
        theta.pinned.clear();
        for (std::size_t s : sim_slots) theta.values[static_cast<Eigen::Index>(s)] = alpha_grid[g];
        const auto outcomes = run_reps(sim_spec, theta, fit_spec, tested, options, stream_seed(options.seed, g));
        PowerRow row;
        row.alpha = alpha_grid[g];
        std::size_t rejections = 0;
        for (const auto& o : outcomes) {
            if (!o.ok) {
                ++row.excluded;
                continue;
            }
            ++row.completed;
            if (o.p_value <= level && o.lrs > options.test.epsilon) ++rejections;
        }
        const auto completed = static_cast<double>(std::max<std::size_t>(row.completed, 1));
        row.power = static_cast<double>(rejections) / completed;
        row.se = std::sqrt(row.power * (1.0 - row.power) / completed);
        rows.push_back(row);
    }
    return rows;
}

} // namespace hawkes
