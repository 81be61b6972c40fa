#include "hawkes/simulate.hpp"

#include "hawkes/error.hpp"
#include "hawkes/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace hawkes {

namespace {

struct Entry {
    std::size_t k, l;
    double alpha, beta;
};

class Thinning {
public:
    Thinning(const ModelSpec& spec, const ParamVector& theta, const SimulationOptions& options)
        : spec_(spec), theta_(theta.values), options_(options), K_(spec.dimension()),
          exponential_(spec.kernel_family() == KernelFamily::exponential) {
        for (std::size_t k = 0; k < K_; ++k)
            for (std::size_t l = 0; l < K_; ++l) {
                const int a = spec.adjacency_slot(k, l);
                if (a < 0) continue;
                const auto slot = static_cast<std::size_t>(a);
                const double alpha = theta.is_pinned(slot) ? 0.0 : theta_[a];
                if (alpha == 0.0) continue;
                entries_.push_back({k, l, alpha, theta_[spec.decay_slot(k, l)]});
            }
        state_.assign(entries_.size(), 0.0);
        if (!exponential_ && options.truncate_history) {
            for (const auto& e : entries_)
                lag_ = std::max(lag_, kernel_truncation_lag(spec.kernel_family(), e.beta, options.truncation_mass));
        }
    }

    EventSequence run(std::uint64_t seed) {
        Rng rng(seed);
        std::vector<Event> events;
        const double t_end = spec_.max_horizon();
        double t = 0.0;
        Eigen::VectorXd lambda(K_);

        while (t < t_end) {
            intensity(t, lambda);
            const double now = lambda.sum();
            const double window = std::min(t_end - t, now > 0.0 ? 10.0 / now : t_end);
            const double bound = upper_bound(t, t + window);
            if (!(bound > 0.0)) {
                advance(t, t + window);
                t += window;
                continue;
            }
            const double candidate = t + rng.exponential(bound);
            if (candidate >= t + window) {
                advance(t, t + window);
                t += window;
                continue;
            }
            advance(t, candidate);
            t = candidate;
            intensity(t, lambda);
            const double total = lambda.sum();
            if (rng.uniform() * bound > total) continue;
            if (!events.empty() && t <= events.back().t) continue;

            const double pick = rng.uniform() * total;
            std::size_t k = 0;
            double cumulative = lambda[0];
            while (k + 1 < K_ && (pick >= cumulative || lambda[static_cast<Eigen::Index>(k)] == 0.0))
                cumulative += lambda[static_cast<Eigen::Index>(++k)];
            const double x = spec_.marks().marked() ? spec_.marks().sample(rng) : 1.0;
            events.push_back({t, static_cast<std::uint32_t>(k), x});
            record(t, k, spec_.marks().g(x));

            if (events.size() > options_.max_events) {
                const double rho = spectral_radius(branching_matrix(spec_, theta_));
                std::ostringstream msg;
                msg << "replicate exceeded " << options_.max_events
                    << " events; branching spectral radius is " << rho;
                throw Runaway(msg.str());
            }
        }
        return EventSequence(std::move(events), spec_.horizons());
    }

private:
    void intensity(double t, Eigen::VectorXd& lambda) const {
        lambda = spec_.baseline(theta_, t);
        if (exponential_) {
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                const auto& e = entries_[i];
                lambda[static_cast<Eigen::Index>(e.k)] += e.alpha * e.beta * state_[i];
            }
        } else {
            for (std::size_t j = first_live_; j < history_.size(); ++j) {
                const auto& h = history_[j];
                for (const auto& e : entries_)
                    if (e.l == h.k)
                        lambda[static_cast<Eigen::Index>(e.k)] +=
                            e.alpha * h.x * kernel_density(spec_.kernel_family(), t - h.t, e.beta).value;
            }
        }
        for (std::size_t k = 0; k < K_; ++k)
            if (t > spec_.horizon(k)) lambda[static_cast<Eigen::Index>(k)] = 0.0;
    }

    double upper_bound(double a, double b) const {
        double bound = 0.0;
        const Eigen::VectorXd mu_a = spec_.baseline(theta_, a);
        for (std::size_t k = 0; k < K_; ++k) {
            const double T = spec_.horizon(k);
            if (a > T) continue;
            const Eigen::VectorXd mu_b = spec_.baseline(theta_, std::min(b, T));
            bound += std::max(mu_a[static_cast<Eigen::Index>(k)], mu_b[static_cast<Eigen::Index>(k)]);
        }
        if (exponential_) {
            for (std::size_t i = 0; i < entries_.size(); ++i)
                if (a <= spec_.horizon(entries_[i].k)) bound += entries_[i].alpha * entries_[i].beta * state_[i];
        } else {
            for (std::size_t j = first_live_; j < history_.size(); ++j) {
                const auto& h = history_[j];
                for (const auto& e : entries_)
                    if (e.l == h.k && a <= spec_.horizon(e.k))
                        bound += e.alpha * h.x * kernel_sup(spec_.kernel_family(), a - h.t, b - h.t, e.beta);
            }
        }
        return bound;
    }

    void advance(double from, double to) {
        if (exponential_) {
            for (std::size_t i = 0; i < entries_.size(); ++i) state_[i] *= std::exp(-entries_[i].beta * (to - from));
        } else if (lag_ > 0.0) {
            while (first_live_ < history_.size() && to - history_[first_live_].t > lag_) ++first_live_;
        }
    }

    void record(double t, std::size_t k, double weight) {
        if (exponential_) {
            for (std::size_t i = 0; i < entries_.size(); ++i)
                if (entries_[i].l == k) state_[i] += weight;
        } else {
            history_.push_back({t, static_cast<std::uint32_t>(k), weight});
        }
    }

    const ModelSpec& spec_;
    Eigen::VectorXd theta_;
    SimulationOptions options_;
    std::size_t K_;
    bool exponential_;
    std::vector<Entry> entries_;
    std::vector<double> state_;   // exponential: decayed weighted sums per entry
    std::vector<Event> history_;  // other kernels: (t, l, g(x))
    std::size_t first_live_{0};
    double lag_{0.0};
};

} // namespace

EventSequence simulate_replicate(const ModelSpec& spec, const ParamVector& theta, std::uint64_t seed,
                                 const SimulationOptions& options) {
    if (theta.values.size() != static_cast<Eigen::Index>(spec.num_params()))
        throw InvalidInput("theta has the wrong number of parameters");
    const Eigen::VectorXd mu0 = spec.baseline(theta.values, 0.0);
    if (!(mu0.minCoeff() > 0.0)) throw InvalidInput("simulation needs a strictly positive baseline");
    return Thinning(spec, theta, options).run(seed);
}

Dataset simulate_dataset(const ModelSpec& spec, const ParamVector& theta, std::size_t n, std::uint64_t master_seed,
                         const SimulationOptions& options) {
    if (n == 0) throw InvalidInput("simulate_dataset needs n >= 1");
    std::vector<EventSequence> replicates(n);
    parallel_for(n, options.threads, [&](std::size_t i) {
        replicates[i] = simulate_replicate(spec, theta, stream_seed(master_seed, i), options);
    });
    return Dataset(std::move(replicates));
}

} // namespace hawkes
