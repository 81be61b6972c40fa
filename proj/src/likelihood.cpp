#include "hawkes/likelihood.hpp"

#include "hawkes/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace hawkes {

LikelihoodContext::LikelihoodContext(const ModelSpec& spec, std::vector<Block> blocks)
    : spec_(spec), blocks_(std::move(blocks)), counts_(spec.dimension(), 0) {}

LikelihoodContext::LikelihoodContext(const ModelSpec& spec, const EventSequence& events, double multiplier)
    : LikelihoodContext(spec, std::vector<Block>{}) {
    add_block(events, multiplier);
}

LikelihoodContext LikelihoodContext::aggregated(const ModelSpec& spec, const Dataset& data) {
    return LikelihoodContext(spec, aggregate(data).events, static_cast<double>(data.n()));
}

LikelihoodContext LikelihoodContext::pooled(const ModelSpec& spec, const Dataset& data) {
    LikelihoodContext ctx(spec, std::vector<Block>{});
    for (const auto& r : data.replicates()) ctx.add_block(r, 1.0);
    return ctx;
}

void LikelihoodContext::add_block(const EventSequence& events, double multiplier) {
    if (events.horizons() != spec_.horizons())
        throw HorizonMismatch("event horizons do not match the model horizons");
    if (!(multiplier > 0.0)) throw InvalidInput("block multiplier must be > 0");
    Block b;
    b.multiplier = multiplier;
    b.t.reserve(events.size());
    b.k.reserve(events.size());
    b.weight.reserve(events.size());
    for (const auto& e : events.events()) {
        b.t.push_back(e.t);
        b.k.push_back(e.k);
        b.weight.push_back(spec_.marks().g(e.x));
        ++counts_[e.k];
    }
    total_events_ += events.size();
    n_ += multiplier;
    blocks_.push_back(std::move(b));
}

namespace {

// An excitation entry (k, l) as seen from the excited coordinate k.
struct RowEntry {
    std::size_t l;
    int alpha_slot;
    int beta_slot;
    std::size_t group; // index of the (l, beta slot) history state
};

struct Group {
    std::size_t source;
    int beta_slot;
};

struct Layout {
    std::vector<std::vector<RowEntry>> rows;        // per excited coordinate
    std::vector<Group> groups;
    std::vector<std::vector<std::size_t>> by_source; // groups fed by each coordinate
};

Layout build_layout(const ModelSpec& spec) {
    const std::size_t K = spec.dimension();
    Layout lay;
    lay.rows.resize(K);
    lay.by_source.resize(K);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < K; ++l) {
            const int a = spec.adjacency_slot(k, l);
            if (a < 0) continue;
            const int b = spec.decay_slot(k, l);
            std::size_t g = 0;
            while (g < lay.groups.size() && !(lay.groups[g].source == l && lay.groups[g].beta_slot == b)) ++g;
            if (g == lay.groups.size()) {
                lay.groups.push_back({l, b});
                lay.by_source[l].push_back(g);
            }
            lay.rows[k].push_back({l, a, b, g});
        }
    return lay;
}

// Sparse accumulator for the gradient and Hessian of one intensity value.
class LocalDerivatives {
public:
    explicit LocalDerivatives(std::size_t d) : grad_(Eigen::VectorXd::Zero(d)), seen_(d, 0) {}

    void add_grad(int i, double v) {
        if (!seen_[i]) {
            seen_[i] = 1;
            touched_.push_back(i);
        }
        grad_[i] += v;
    }
    void add_hess(int i, int j, double v) { hess_.push_back({i, j, v}); }

    template <typename Fn>
    void for_each_grad(Fn&& fn) const {
        for (int i : touched_) fn(i, grad_[i]);
    }
    [[nodiscard]] const std::vector<int>& touched() const noexcept { return touched_; }
    [[nodiscard]] double grad(int i) const noexcept { return grad_[i]; }

    struct HessTerm {
        int i, j;
        double v;
    };
    [[nodiscard]] const std::vector<HessTerm>& hess() const noexcept { return hess_; }

    void clear() {
        for (int i : touched_) {
            grad_[i] = 0.0;
            seen_[i] = 0;
        }
        touched_.clear();
        hess_.clear();
    }

private:
    Eigen::VectorXd grad_;
    std::vector<char> seen_;
    std::vector<int> touched_;
    std::vector<HessTerm> hess_;
};

class Evaluator {
public:
    Evaluator(const LikelihoodContext& ctx, const Eigen::VectorXd& theta, int order, bool information)
        : ctx_(ctx), spec_(ctx.spec()), theta_(theta), order_(order), information_(information),
          d_(spec_.num_params()), K_(spec_.dimension()), family_(spec_.kernel_family()),
          recursion_(has_moment_recursion(family_)),
          moments_(moments_needed(family_, std::max(order, information ? 1 : 0))), layout_(build_layout(spec_)),
          local_(d_) {
        if (theta.size() != static_cast<Eigen::Index>(d_)) throw InvalidInput("theta has the wrong number of parameters");
        coefficients_.resize(d_);
        for (std::size_t s = 0; s < d_; ++s)
            if (recursion_ && spec_.slot(s).role == SlotRole::decay) coefficients_[s] = moment_coefficients(family_, theta[s]);
        out_.gradient = Eigen::VectorXd::Zero(order_ >= 1 ? d_ : 0);
        out_.hessian = Eigen::MatrixXd::Zero(order_ >= 2 ? d_ : 0, order_ >= 2 ? d_ : 0);
        if (information_) out_.information = Eigen::MatrixXd::Zero(d_, d_);
    }

    LikelihoodValue run() {
        for (const auto& block : ctx_.blocks()) {
            events(block);
            compensator(block);
        }
        if (order_ >= 2) out_.hessian = out_.hessian.selfadjointView<Eigen::Lower>();
        if (information_) {
            out_.information = out_.information.selfadjointView<Eigen::Lower>();
            out_.information /= ctx_.n();
        }
        return std::move(out_);
    }

private:
    bool need_derivatives() const noexcept { return order_ >= 1 || information_; }

    void events(const LikelihoodContext::Block& block) {
        const std::size_t G = layout_.groups.size();
        state_.assign(G, {});
        last_.assign(G, 0.0);
        if (!recursion_) {
            history_t_.assign(K_, {});
            history_w_.assign(K_, {});
        }

        for (std::size_t i = 0; i < block.t.size(); ++i) {
            const double t = block.t[i];
            const std::size_t k = block.k[i];
            double lambda = baseline_at(block.multiplier, k, t);

            for (const auto& e : layout_.rows[k]) {
                const double alpha = theta_[e.alpha_slot];
                std::array<double, 3> h{}; // sum g f, sum g df/dbeta, sum g d2f/dbeta2
                if (recursion_) {
                    decay(e.group, t);
                    const auto& S = state_[e.group];
                    const auto& c = coefficients_[e.beta_slot];
                    for (int m = 0; m < moments_; ++m) {
                        h[0] += c.f[m] * S[m];
                        if (order_ >= 1 || information_) h[1] += c.d_beta[m] * S[m];
                        if (order_ >= 2) h[2] += c.d2_beta[m] * S[m];
                    }
                } else {
                    const double beta = theta_[e.beta_slot];
                    const auto& ts = history_t_[e.l];
                    const auto& ws = history_w_[e.l];
                    for (std::size_t j = 0; j < ts.size(); ++j) {
                        const auto f = kernel_density(family_, t - ts[j], beta);
                        h[0] += ws[j] * f.value;
                        h[1] += ws[j] * f.d_beta;
                        h[2] += ws[j] * f.d2_beta;
                    }
                }
                lambda += alpha * h[0];
                if (need_derivatives()) {
                    local_.add_grad(e.alpha_slot, h[0]);
                    local_.add_grad(e.beta_slot, alpha * h[1]);
                }
                if (order_ >= 2) {
                    local_.add_hess(e.alpha_slot, e.beta_slot, h[1]);
                    local_.add_hess(e.beta_slot, e.beta_slot, alpha * h[2]);
                }
            }

            if (!(lambda > 0.0) || !std::isfinite(lambda)) {
                std::ostringstream msg;
                msg << "intensity of coordinate " << k + 1 << " at t=" << t << " is " << lambda;
                throw NonFiniteIntensity(msg.str());
            }
            out_.value += std::log(lambda);
            if (need_derivatives()) accumulate_event(lambda);

            const double w = block.weight[i];
            if (recursion_) {
                for (std::size_t g : layout_.by_source[k]) {
                    decay(g, t);
                    state_[g][0] += w;
                }
            } else {
                history_t_[k].push_back(t);
                history_w_[k].push_back(w);
            }
        }
    }

    double baseline_at(double n, std::size_t k, double t) {
        const int m_slot = spec_.level_slot(k);
        const double m = theta_[m_slot];
        if (spec_.baseline_family() == BaselineFamily::constant) {
            if (need_derivatives()) local_.add_grad(m_slot, n);
            return n * m;
        }
        const int c_slot = spec_.growth_slot(k);
        const double u = t / spec_.horizon(k);
        const double e = n * std::exp(theta_[c_slot] * u);
        if (need_derivatives()) {
            local_.add_grad(m_slot, e);
            local_.add_grad(c_slot, m * u * e);
        }
        if (order_ >= 2) {
            local_.add_hess(c_slot, m_slot, u * e);
            local_.add_hess(c_slot, c_slot, m * u * u * e);
        }
        return m * e;
    }

    void accumulate_event(double lambda) {
        const auto& touched = local_.touched();
        const double inv = 1.0 / lambda;
        const double inv2 = inv * inv;
        if (order_ >= 1)
            for (int i : touched) out_.gradient[i] += local_.grad(i) * inv;
        if (order_ >= 2) {
            for (const auto& h : local_.hess()) {
                out_.hessian(std::max(h.i, h.j), std::min(h.i, h.j)) += h.v * inv;
            }
            for (int i : touched)
                for (int j : touched)
                    if (j <= i) out_.hessian(i, j) -= local_.grad(i) * local_.grad(j) * inv2;
        }
        if (information_)
            for (int i : touched)
                for (int j : touched)
                    if (j <= i) out_.information(i, j) += local_.grad(i) * local_.grad(j) * inv2;
        local_.clear();
    }

    void decay(std::size_t g, double t) {
        const double dt = t - last_[g];
        if (dt == 0.0) return;
        auto& S = state_[g];
        const double factor = std::exp(-theta_[layout_.groups[g].beta_slot] * dt);
        // S_m <- e^{-beta dt} sum_{j<=m} C(m,j) dt^{m-j} S_j, updated from the top down.
        for (int m = moments_ - 1; m >= 0; --m) {
            double acc = S[m];
            double binom = 1.0, power = 1.0;
            for (int j = m - 1; j >= 0; --j) {
                binom = binom * (j + 1) / (m - j);
                power *= dt;
                acc += binom * power * S[j];
            }
            S[m] = factor * acc;
        }
        last_[g] = t;
    }

    void compensator(const LikelihoodContext::Block& block) {
        const double n = block.multiplier;
        for (std::size_t k = 0; k < K_; ++k) {
            const double T = spec_.horizon(k);
            const int m_slot = spec_.level_slot(k);
            const double m = theta_[m_slot];
            if (spec_.baseline_family() == BaselineFamily::constant) {
                out_.value -= n * m * T;
                if (order_ >= 1) out_.gradient[m_slot] -= n * T;
            } else {
                const int c_slot = spec_.growth_slot(k);
                const auto M = exp_moments(theta_[c_slot]);
                out_.value -= n * m * T * M[0];
                if (order_ >= 1) {
                    out_.gradient[m_slot] -= n * T * M[0];
                    out_.gradient[c_slot] -= n * m * T * M[1];
                }
                if (order_ >= 2) {
                    add_lower(c_slot, m_slot, -n * T * M[1]);
                    add_lower(c_slot, c_slot, -n * m * T * M[2]);
                }
            }
        }

        // int_0^{T_k} sum_j g_j f(s - t_j) ds = sum_{t_j <= T_k} g_j F(T_k - t_j).
        for (std::size_t k = 0; k < K_; ++k) {
            const double T = spec_.horizon(k);
            for (const auto& e : layout_.rows[k]) {
                const double alpha = theta_[e.alpha_slot];
                const double beta = theta_[e.beta_slot];
                std::array<double, 3> F{};
                for (std::size_t i = 0; i < block.t.size() && block.t[i] <= T; ++i) {
                    if (block.k[i] != e.l) continue;
                    const auto p = kernel_primitive(family_, T - block.t[i], beta);
                    F[0] += block.weight[i] * p.value;
                    F[1] += block.weight[i] * p.d_beta;
                    F[2] += block.weight[i] * p.d2_beta;
                }
                out_.value -= alpha * F[0];
                if (order_ >= 1) {
                    out_.gradient[e.alpha_slot] -= F[0];
                    out_.gradient[e.beta_slot] -= alpha * F[1];
                }
                if (order_ >= 2) {
                    add_lower(e.alpha_slot, e.beta_slot, -F[1]);
                    add_lower(e.beta_slot, e.beta_slot, -alpha * F[2]);
                }
            }
        }
    }

    void add_lower(int i, int j, double v) {
        if (i == j) {
            out_.hessian(i, i) += v;
        } else {
            out_.hessian(std::max(i, j), std::min(i, j)) += v;
        }
    }

    const LikelihoodContext& ctx_;
    const ModelSpec& spec_;
    const Eigen::VectorXd& theta_;
    int order_;
    bool information_;
    std::size_t d_, K_;
    KernelFamily family_;
    bool recursion_;
    int moments_;
    Layout layout_;
    LocalDerivatives local_;
    std::vector<MomentCoefficients> coefficients_;
    std::vector<std::array<double, kMaxMoments>> state_;
    std::vector<double> last_;
    std::vector<std::vector<double>> history_t_, history_w_;
    LikelihoodValue out_;
};

} // namespace

LikelihoodValue evaluate(const LikelihoodContext& ctx, const Eigen::VectorXd& theta, int order, bool information) {
    if (order < 0 || order > 2) throw InvalidInput("derivative order must be 0, 1 or 2");
    return Evaluator(ctx, theta, order, information).run();
}

double log_likelihood(const LikelihoodContext& ctx, const Eigen::VectorXd& theta) {
    return evaluate(ctx, theta, 0).value;
}

Eigen::VectorXd score(const LikelihoodContext& ctx, const Eigen::VectorXd& theta) {
    return evaluate(ctx, theta, 1).gradient;
}

Eigen::MatrixXd score_derivative(const LikelihoodContext& ctx, const Eigen::VectorXd& theta) {
    return evaluate(ctx, theta, 2).hessian;
}

Eigen::MatrixXd empirical_information(const LikelihoodContext& ctx, const Eigen::VectorXd& theta) {
    return evaluate(ctx, theta, 0, true).information;
}

} // namespace hawkes
