#include "hawkes/estimate.hpp"

#include "hawkes/error.hpp"
#include "hawkes/parallel.hpp"
#include "hawkes/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace hawkes {

std::string_view to_string(Strategy strategy) noexcept {
    switch (strategy) {
    case Strategy::aggregate: return "aggregate";
    case Strategy::pooled: return "pooled";
    case Strategy::averaged: return "averaged";
    }
    return "aggregate";
}

Strategy strategy_from_string(std::string_view name) {
    if (name == "aggregate") return Strategy::aggregate;
    if (name == "pooled") return Strategy::pooled;
    if (name == "averaged") return Strategy::averaged;
    throw InvalidInput("unknown strategy '" + std::string(name) + "'");
}

std::vector<std::size_t> frozen_decay_slots(const ModelSpec& spec, const std::vector<std::size_t>& pinned) {
    auto zero = [&](int a) {
        const auto s = static_cast<std::size_t>(a);
        return std::binary_search(pinned.begin(), pinned.end(), s) || spec.slot(s).upper == 0.0;
    };
    std::vector<std::size_t> out;
    for (std::size_t b : spec.slots_with_role(SlotRole::decay)) {
        if (spec.slot(b).fixed()) continue;
        bool used = false;
        const std::size_t K = spec.dimension();
        for (std::size_t k = 0; k < K && !used; ++k)
            for (std::size_t l = 0; l < K && !used; ++l)
                if (spec.decay_slot(k, l) == static_cast<int>(b) && !zero(spec.adjacency_slot(k, l))) used = true;
        if (!used) out.push_back(b);
    }
    return out;
}

namespace {

constexpr double kArmijo = 1e-4;

std::uint64_t context_hash(const LikelihoodContext& ctx) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    auto feed = [&h](std::uint64_t w) {
        h ^= w;
        h = mix64(h);
    };
    for (const auto& b : ctx.blocks()) {
        feed(b.t.size());
        feed(std::bit_cast<std::uint64_t>(b.multiplier));
        for (std::size_t i = 0; i < b.t.size(); ++i) {
            feed(std::bit_cast<std::uint64_t>(b.t[i]));
            feed(b.k[i]);
            feed(std::bit_cast<std::uint64_t>(b.weight[i]));
        }
    }
    return h;
}

struct RunOutcome {
    Eigen::VectorXd x;
    double f{std::numeric_limits<double>::infinity()}; // negative log-likelihood
    double projected_gradient{std::numeric_limits<double>::infinity()};
    bool converged{false};
    std::size_t iterations{0};
    Eigen::VectorXd start;
    double start_f{std::numeric_limits<double>::infinity()};
    double start_pg{std::numeric_limits<double>::infinity()};
    std::size_t evaluations{0};
};

// Projected Newton (Bertsekas 1982) on f = -loglik over a box, with the
// analytic Hessian, Levenberg damping on the free block and an Armijo search
// along the projection arc.
class ProjectedNewton {
public:
    ProjectedNewton(const LikelihoodContext& ctx, std::vector<char> held, const FitOptions& options)
        : ctx_(ctx), held_(std::move(held)), options_(options) {
        const auto& spec = ctx.spec();
        const auto d = static_cast<Eigen::Index>(spec.num_params());
        lower_.resize(d);
        upper_.resize(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            lower_[i] = spec.slot(static_cast<std::size_t>(i)).lower;
            upper_[i] = spec.slot(static_cast<std::size_t>(i)).upper;
        }
    }

    RunOutcome run(Eigen::VectorXd x) {
        RunOutcome out;
        LikelihoodValue v;
        if (!evaluate(x, 2, v, out)) {
            out.x = x;
            return out;
        }
        double f = -v.value;
        out.start = x;
        out.start_f = f;
        out.start_pg = projected_gradient(x, -v.gradient);
        double floor = f; // lowest objective seen, bounds the drift of sub-resolution steps
        Eigen::VectorXd g = -v.gradient;
        Eigen::MatrixXd H = -v.hessian;
        const auto d = x.size();

        for (out.iterations = 0; out.iterations < options_.max_iterations; ++out.iterations) {
            const double pg = projected_gradient(x, g);
            const double tol = options_.gradient_tolerance * (1.0 + std::abs(f));

            // Coordinates held at a bound by the gradient.
            const double band = std::min(1e-8, pg);
            std::vector<Eigen::Index> active;
            Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                if (held_[static_cast<std::size_t>(i)]) continue;
                const bool at_lower = x[i] - lower_[i] <= band && g[i] > 0.0;
                const bool at_upper = upper_[i] - x[i] <= band && g[i] < 0.0;
                if (at_lower || at_upper) {
                    dir[i] = -g[i] / std::max(std::abs(H(i, i)), 1e-12);
                } else {
                    active.push_back(i);
                }
            }
            double decrement = 0.0;
            if (!active.empty()) {
                const auto m = static_cast<Eigen::Index>(active.size());
                Eigen::MatrixXd Hn(m, m);
                Eigen::VectorXd gn(m);
                for (Eigen::Index r = 0; r < m; ++r) {
                    gn[r] = g[active[r]];
                    for (Eigen::Index c = 0; c < m; ++c) Hn(r, c) = H(active[r], active[c]);
                }
                const Eigen::VectorXd step = damped_solve(Hn, gn);
                for (Eigen::Index r = 0; r < m; ++r) dir[active[r]] = step[r];
                decrement = -gn.dot(step);
            }
            const double step_size = dir.cwiseAbs().maxCoeff();
            if (pg <= tol && decrement <= 1e-18 * (1.0 + std::abs(f)) &&
                step_size <= 1e-10 * (1.0 + x.cwiseAbs().maxCoeff()))
                break;

            Eigen::VectorXd x_new;
            LikelihoodValue v_new;
            // Once converged, only a few trial steps are spent on further polishing.
            const int attempts = pg <= tol ? 4 : 60;
            bool accepted = search(x, f, floor, g, dir, x_new, v_new, out, attempts);
            if (!accepted && pg > tol) {
                // Fall back to a scaled projected-gradient step.
                for (Eigen::Index i = 0; i < d; ++i)
                    dir[i] = held_[static_cast<std::size_t>(i)] ? 0.0 : -g[i] / std::max(std::abs(H(i, i)), 1e-12);
                accepted = search(x, f, floor, g, dir, x_new, v_new, out, attempts);
            }
            if (!accepted) break;
            x = std::move(x_new);
            f = -v_new.value;
            floor = std::min(floor, f);
            g = -v_new.gradient;
            H = -v_new.hessian;
        }
        out.x = x;
        out.f = f;
        out.projected_gradient = projected_gradient(x, g);
        out.converged = out.projected_gradient <= options_.gradient_tolerance * (1.0 + std::abs(f));
        return out;
    }

    Eigen::VectorXd project(Eigen::VectorXd x) const {
        return x.cwiseMax(lower_).cwiseMin(upper_);
    }

private:
    bool evaluate(const Eigen::VectorXd& x, int order, LikelihoodValue& v, RunOutcome& out) const {
        ++out.evaluations;
        try {
            v = hawkes::evaluate(ctx_, x, order);
        } catch (const NonFiniteIntensity&) {
            return false;
        }
        return std::isfinite(v.value);
    }

    double projected_gradient(const Eigen::VectorXd& x, const Eigen::VectorXd& g) const {
        double norm = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (held_[static_cast<std::size_t>(i)]) continue;
            const double moved = std::clamp(x[i] - g[i], lower_[i], upper_[i]);
            norm = std::max(norm, std::abs(x[i] - moved));
        }
        return norm;
    }

    static Eigen::VectorXd damped_solve(const Eigen::MatrixXd& H, const Eigen::VectorXd& g) {
        const auto m = H.rows();
        const double scale = std::max(1e-300, H.diagonal().cwiseAbs().maxCoeff());
        double tau = 0.0;
        for (int attempt = 0; attempt < 80; ++attempt) {
            Eigen::LLT<Eigen::MatrixXd> llt(H + tau * Eigen::MatrixXd::Identity(m, m));
            if (llt.info() == Eigen::Success) {
                Eigen::VectorXd step = -llt.solve(g);
                if (step.allFinite()) return step;
            }
            tau = tau == 0.0 ? 1e-10 * scale : tau * 4.0;
        }
        return -g / scale;
    }

    bool search(const Eigen::VectorXd& x, double f, double floor, const Eigen::VectorXd& g, const Eigen::VectorXd& dir,
                Eigen::VectorXd& x_new, LikelihoodValue& v_new, RunOutcome& out, int attempts) const {
        double s = 1.0;
        for (int attempt = 0; attempt < attempts; ++attempt, s *= 0.5) {
            x_new = project(x + s * dir);
            for (Eigen::Index i = 0; i < x.size(); ++i)
                if (held_[static_cast<std::size_t>(i)]) x_new[i] = x[i];
            const double predicted = g.dot(x_new - x);
            if (predicted >= 0.0) {
                if ((x_new - x).cwiseAbs().maxCoeff() == 0.0) return false;
                continue;
            }
            if (!evaluate(x_new, 2, v_new, out)) continue;
            if (-v_new.value <= f + kArmijo * predicted) return true;
            // Below the resolution of f, accept a step that shrinks the projected gradient.
            const double resolution = 1e-12 * (1.0 + std::abs(f));
            if (-predicted < resolution && -v_new.value <= floor + resolution &&
                projected_gradient(x_new, -v_new.gradient) < 0.5 * projected_gradient(x, g))
                return true;
        }
        return false;
    }

    const LikelihoodContext& ctx_;
    std::vector<char> held_;
    const FitOptions& options_;
    Eigen::VectorXd lower_, upper_;
};

struct Problem {
    const LikelihoodContext& ctx;
    std::vector<std::size_t> pinned;
    std::vector<std::size_t> frozen;
    std::vector<char> held;
    Eigen::VectorXd held_values;
};

Problem make_problem(const LikelihoodContext& ctx, std::vector<std::size_t> pinned) {
    const auto& spec = ctx.spec();
    std::sort(pinned.begin(), pinned.end());
    pinned.erase(std::unique(pinned.begin(), pinned.end()), pinned.end());
    for (std::size_t s : pinned) {
        if (s >= spec.num_params() || spec.slot(s).role != SlotRole::adjacency)
            throw InfeasiblePattern("pinned slot is not an adjacency coefficient");
        if (spec.slot(s).lower > 0.0)
            throw InfeasiblePattern("adjacency '" + spec.slot(s).name + "' cannot be pinned: its lower bound is positive");
    }
    Problem p{ctx, pinned, frozen_decay_slots(spec, pinned), {}, {}};
    const std::size_t d = spec.num_params();
    p.held.assign(d, 0);
    p.held_values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        if (spec.slot(i).fixed()) {
            p.held[i] = 1;
            p.held_values[static_cast<Eigen::Index>(i)] = spec.slot(i).lower;
        }
    }
    for (std::size_t s : p.pinned) {
        p.held[s] = 1;
        p.held_values[static_cast<Eigen::Index>(s)] = 0.0;
    }
    for (std::size_t s : p.frozen) {
        p.held[s] = 1;
        p.held_values[static_cast<Eigen::Index>(s)] = spec.slot(s).lower;
    }
    return p;
}

Eigen::VectorXd impose(const Problem& p, Eigen::VectorXd x) {
    x = p.ctx.spec().clamp(std::move(x));
    for (std::size_t i = 0; i < p.held.size(); ++i)
        if (p.held[i]) x[static_cast<Eigen::Index>(i)] = p.held_values[static_cast<Eigen::Index>(i)];
    return x;
}

// Deterministic start from event counts: levels match the observed rates,
// excitation starts moderate, decays at the geometric centre of their range.
Eigen::VectorXd moment_start(const Problem& p) {
    const auto& spec = p.ctx.spec();
    const std::size_t K = spec.dimension();
    const double Eg = spec.mark_moments().mean;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.num_params()));

    std::vector<std::size_t> free_in_row(K, 0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) {
            const int a = spec.adjacency_slot(k, l);
            if (a >= 0 && !p.held[static_cast<std::size_t>(a)]) ++free_in_row[k];
        }

    for (std::size_t s = 0; s < spec.num_params(); ++s) {
        const auto& slot = spec.slot(s);
        const auto i = static_cast<Eigen::Index>(s);
        switch (slot.role) {
        case SlotRole::baseline_growth: x[i] = std::clamp(0.0, slot.lower, slot.upper); break;
        case SlotRole::adjacency: {
            std::size_t rows = 1;
            for (const auto& [k, l] : spec.entries_of(s)) rows = std::max(rows, free_in_row[k]);
            x[i] = 0.3 / (Eg * static_cast<double>(rows));
            break;
        }
        case SlotRole::decay: {
            const double lo = std::max(slot.lower, 1e-1), hi = std::min(slot.upper, 1e3);
            x[i] = lo < hi ? std::sqrt(lo * hi) : std::sqrt(slot.lower * slot.upper);
            break;
        }
        case SlotRole::baseline_level: break;
        }
    }
    x = impose(p, x);

    for (std::size_t s : spec.slots_with_role(SlotRole::baseline_level)) {
        double events = 0.0, exposure = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            if (spec.level_slot(k) != static_cast<int>(s)) continue;
            const int c = spec.growth_slot(k);
            const double M0 = c < 0 ? 1.0 : exp_moments(x[c])[0];
            events += static_cast<double>(p.ctx.counts()[k]) * (free_in_row[k] > 0 ? 0.7 : 1.0);
            exposure += p.ctx.n() * spec.horizon(k) * M0;
        }
        x[static_cast<Eigen::Index>(s)] = std::max(events, 0.5) / exposure;
    }
    return impose(p, x);
}

std::vector<Eigen::VectorXd> make_starts(const Problem& p, const FitOptions& options) {
    const auto& spec = p.ctx.spec();
    std::vector<Eigen::VectorXd> starts;
    const Eigen::VectorXd base = moment_start(p);
    if (options.warm_start) {
        if (options.warm_start->size() != static_cast<Eigen::Index>(spec.num_params()))
            throw InvalidInput("warm start has the wrong number of parameters");
        Eigen::VectorXd warm = *options.warm_start;
        for (Eigen::Index i = 0; i < warm.size(); ++i)
            if (!std::isfinite(warm[i])) warm[i] = base[i];
        starts.push_back(impose(p, warm));
    }
    if (starts.size() < options.n_starts) starts.push_back(base);
    if (starts.size() >= options.n_starts) {
        starts.resize(std::max<std::size_t>(1, std::min(starts.size(), options.n_starts)));
        return starts;
    }

    // Latin hypercube over the free coordinates.
    const std::size_t strata = options.n_starts - starts.size();
    Rng rng(mix64(context_hash(p.ctx) ^ mix64(options.start_seed)));
    const double Eg = spec.mark_moments().mean;
    std::vector<std::vector<std::size_t>> perms;
    for (std::size_t s = 0; s < spec.num_params(); ++s) {
        std::vector<std::size_t> perm(strata);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = strata; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        perms.push_back(std::move(perm));
    }
    for (std::size_t j = 0; j < strata; ++j) {
        Eigen::VectorXd x = base;
        for (std::size_t s = 0; s < spec.num_params(); ++s) {
            if (p.held[s]) continue;
            const auto& slot = spec.slot(s);
            const double u = (static_cast<double>(perms[s][j]) + rng.uniform()) / static_cast<double>(strata);
            const auto i = static_cast<Eigen::Index>(s);
            switch (slot.role) {
            case SlotRole::baseline_level: x[i] = base[i] * (0.25 + 1.5 * u); break;
            case SlotRole::baseline_growth: {
                const double lo = std::max(slot.lower, -5.0), hi = std::min(slot.upper, 5.0);
                x[i] = lo + (hi - lo) * u;
                break;
            }
            case SlotRole::adjacency: {
                const double hi = std::min(slot.upper, 0.95 / Eg);
                x[i] = slot.lower + (std::max(hi, slot.lower) - slot.lower) * u;
                break;
            }
            case SlotRole::decay: {
                double lo = std::max(slot.lower, 1e-1), hi = std::min(slot.upper, 1e3);
                if (!(lo < hi)) lo = slot.lower, hi = slot.upper;
                x[i] = lo * std::pow(hi / lo, u);
                break;
            }
            }
        }
        starts.push_back(impose(p, x));
    }
    return starts;
}

std::vector<Entry> zero_entries(const ModelSpec& spec, const Eigen::VectorXd& x, double threshold) {
    std::vector<Entry> out;
    const std::size_t K = spec.dimension();
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) {
            const int a = spec.adjacency_slot(k, l);
            if (a >= 0 && x[a] <= threshold) out.emplace_back(k, l);
        }
    return out;
}

FitResult finish(const Problem& p, const RunOutcome& best, const FitOptions& options, Strategy strategy) {
    const auto& spec = p.ctx.spec();
    FitResult r;
    r.theta.values = best.x;
    r.theta.pinned = p.pinned;
    r.loglik = -best.f;
    r.converged = best.converged;
    r.projected_gradient = best.projected_gradient;
    r.iterations = best.iterations;
    r.frozen = p.frozen;
    r.strategy = strategy;
    r.zero_set = zero_entries(spec, best.x, options.zero_threshold);
    if (std::isfinite(best.f)) {
        try {
            r.information = empirical_information(p.ctx, best.x);
            for (std::size_t s : p.frozen) {
                r.information.row(static_cast<Eigen::Index>(s)).setZero();
                r.information.col(static_cast<Eigen::Index>(s)).setZero();
            }
        } catch (const NonFiniteIntensity&) {
            r.converged = false;
        }
    }
    return r;
}

FitResult fit_problem(const Problem& p, const FitOptions& options, Strategy strategy) {
    const auto starts = make_starts(p, options);
    std::vector<RunOutcome> outcomes(starts.size());
    parallel_for(starts.size(), options.threads, [&](std::size_t i) {
        ProjectedNewton opt(p.ctx, p.held, options);
        outcomes[i] = opt.run(starts[i]);
    });

    std::size_t best = 0, evaluations = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        evaluations += outcomes[i].evaluations;
        const auto& a = outcomes[i];
        const auto& b = outcomes[best];
        if (a.f < b.f || (a.f == b.f && a.converged && !b.converged)) best = i;
    }
    RunOutcome incumbent = outcomes[best];
    // A nested fit never ends below its warm start, whatever rounding did on the way.
    if (options.warm_start && outcomes[0].start_f < incumbent.f) {
        incumbent.x = outcomes[0].start;
        incumbent.f = outcomes[0].start_f;
        incumbent.projected_gradient = outcomes[0].start_pg;
        incumbent.converged = incumbent.projected_gradient <= options.gradient_tolerance * (1.0 + std::abs(incumbent.f));
    }

    // Re-polish near-zero adjacency values on the boundary.
    const auto& spec = p.ctx.spec();
    if (std::isfinite(incumbent.f)) {
        std::vector<char> held = p.held;
        Eigen::VectorXd clamped = incumbent.x;
        bool any = false;
        for (std::size_t s : spec.slots_with_role(SlotRole::adjacency)) {
            const auto i = static_cast<Eigen::Index>(s);
            if (p.held[s] || !(clamped[i] > 0.0) || clamped[i] > options.zero_threshold) continue;
            if (spec.slot(s).lower > 0.0) continue;
            clamped[i] = 0.0;
            held[s] = 1;
            any = true;
        }
        if (any) {
            ProjectedNewton opt(p.ctx, held, options);
            RunOutcome polished = opt.run(clamped);
            evaluations += polished.evaluations;
            if (std::isfinite(polished.f) && polished.f <= incumbent.f + 1e-9) {
                polished.converged = polished.converged || incumbent.converged;
                incumbent = polished;
            }
        }
    }

    FitResult r = finish(p, incumbent, options, strategy);
    r.n_starts_used = starts.size();
    r.n_evaluations = evaluations;
    r.best_start = best;
    return r;
}

} // namespace

FitResult fit(const LikelihoodContext& ctx, const std::vector<std::size_t>& pinned, const FitOptions& options) {
    if (options.n_starts == 0) throw InvalidInput("n_starts must be >= 1");
    return fit_problem(make_problem(ctx, pinned), options, Strategy::aggregate);
}

FitResult fit_pattern(const LikelihoodContext& ctx, const std::vector<Entry>& pattern, const FitOptions& options) {
    return fit(ctx, ctx.spec().pattern_slots(pattern), options);
}

FitResult fit_strategy_pooled(const Dataset& data, const ModelSpec& spec, const std::vector<std::size_t>& pinned,
                              const FitOptions& options) {
    const auto ctx = LikelihoodContext::pooled(spec, data);
    if (options.n_starts == 0) throw InvalidInput("n_starts must be >= 1");
    return fit_problem(make_problem(ctx, pinned), options, Strategy::pooled);
}

FitResult fit_strategy_averaged(const Dataset& data, const ModelSpec& spec, const std::vector<std::size_t>& pinned,
                                const FitOptions& options) {
    if (options.n_starts == 0) throw InvalidInput("n_starts must be >= 1");
    const auto d = static_cast<Eigen::Index>(spec.num_params());
    std::vector<std::optional<FitResult>> fits(data.n());
    FitOptions single = options;
    single.threads = 1;
    parallel_for(data.n(), options.threads, [&](std::size_t i) {
        const LikelihoodContext ctx(spec, data.replicates()[i], 1.0);
        try {
            FitResult f = fit_problem(make_problem(ctx, pinned), single, Strategy::averaged);
            if (f.converged) fits[i] = std::move(f);
        } catch (const NonFiniteIntensity&) {
        }
    });

    FitResult r;
    r.strategy = Strategy::averaged;
    r.theta.values = Eigen::VectorXd::Zero(d);
    std::size_t used = 0;
    for (const auto& f : fits) {
        if (!f) {
            ++r.skipped;
            continue;
        }
        r.theta.values += f->theta.values;
        r.n_evaluations += f->n_evaluations;
        r.iterations += f->iterations;
        ++used;
    }
    if (used == 0) {
        r.converged = false;
        r.loglik = -std::numeric_limits<double>::infinity();
        r.theta.values = moment_start(make_problem(LikelihoodContext::pooled(spec, data), pinned));
        return r;
    }
    r.theta.values /= static_cast<double>(used);
    auto pinned_sorted = pinned;
    std::sort(pinned_sorted.begin(), pinned_sorted.end());
    r.theta.pinned = pinned_sorted;
    for (std::size_t s : pinned_sorted) r.theta.values[static_cast<Eigen::Index>(s)] = 0.0;
    r.frozen = frozen_decay_slots(spec, pinned_sorted);
    r.n_starts_used = options.n_starts;
    r.converged = true;
    r.zero_set = zero_entries(spec, r.theta.values, options.zero_threshold);
    const auto pooled = LikelihoodContext::pooled(spec, data);
    try {
        r.loglik = log_likelihood(pooled, r.theta.values);
    } catch (const NonFiniteIntensity&) {
        r.loglik = -std::numeric_limits<double>::infinity();
    }
    return r;
}

FitResult fit_strategy(Strategy strategy, const Dataset& data, const ModelSpec& spec,
                       const std::vector<std::size_t>& pinned, const FitOptions& options) {
    switch (strategy) {
    case Strategy::aggregate: return fit(LikelihoodContext::aggregated(spec, data), pinned, options);
    case Strategy::pooled: return fit_strategy_pooled(data, spec, pinned, options);
    case Strategy::averaged: return fit_strategy_averaged(data, spec, pinned, options);
    }
    throw InvalidInput("unknown strategy");
}

nlohmann::json to_json(const FitResult& fit, const ModelSpec& spec) {
    nlohmann::json theta = nlohmann::json::object();
    for (std::size_t i = 0; i < spec.num_params(); ++i)
        theta[spec.slot(i).name] = fit.theta.values[static_cast<Eigen::Index>(i)];
    nlohmann::json zeros = nlohmann::json::array();
    for (const auto& [k, l] : fit.zero_set) zeros.push_back({k + 1, l + 1});
    nlohmann::json pinned = nlohmann::json::array();
    for (std::size_t s : fit.theta.pinned) pinned.push_back(spec.slot(s).name);
    nlohmann::json frozen = nlohmann::json::array();
    for (std::size_t s : fit.frozen) frozen.push_back(spec.slot(s).name);
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& s : spec.slots()) slots.push_back(s.name);
    nlohmann::json info = nlohmann::json::array();
    for (Eigen::Index r = 0; r < fit.information.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < fit.information.cols(); ++c) row.push_back(fit.information(r, c));
        info.push_back(std::move(row));
    }
    nlohmann::json j = {
        {"theta", std::move(theta)},
        {"loglik", fit.loglik},
        {"zero_set", std::move(zeros)},
        {"converged", fit.converged},
        {"strategy", std::string(to_string(fit.strategy))},
        {"pinned", std::move(pinned)},
        {"frozen", std::move(frozen)},
        {"projected_gradient", fit.projected_gradient},
        {"n_starts_used", fit.n_starts_used},
        {"n_evaluations", fit.n_evaluations},
        {"iterations", fit.iterations},
        {"slots", std::move(slots)},
        {"information", std::move(info)},
    };
    if (fit.strategy == Strategy::averaged) j["skipped"] = fit.skipped;
    return j;
}

} // namespace hawkes
