#include "biqm/reconstruct.hpp"

#include "biqm/datagen.hpp"
#include "biqm/errors.hpp"
#include "biqm/optimizer.hpp"
#include "biqm/presets.hpp"
#include "biqm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace biqm {

std::vector<bool> free_mask(BoundaryKind boundary, int n) {
    std::vector<bool> free(n, true);
    switch (boundary) {
    case BoundaryKind::wrap:
        free[n - 1] = false;
        break;
    case BoundaryKind::ends:
        free[0] = false;
        free[n - 1] = false;
        break;
    case BoundaryKind::none:
        break;
    }
    return free;
}

double kl_divergence(const GridFunction& p, const GridFunction& q) {
    double s = 0.0;
    for (Eigen::Index x = 0; x < p.size(); ++x) {
        if (p(x) > 0.0) {
            s += p(x) * std::log(p(x) / q(x));
        }
    }
    return s;
}

namespace {

OperatorMatrix gaussian_inv_cov(const ReconstructionConfig& c) {
    const int n = c.lattice_size;
    OperatorMatrix k;
    switch (c.covariance) {
    case CovarianceKind::laplacian:
        k = build_laplacian(n, true);
        break;
    case CovarianceKind::periodic:
        return build_periodic_invcov(n, round_period(c.period).shift, c.lambda, c.gamma, c.periodic_shift);
    case CovarianceKind::multiperiod: {
        std::vector<double> w;
        for (int kk = 1; kk <= c.multiperiod_kmax; ++kk) {
            w.push_back(1.0 / kk);
        }
        k = build_laplacian(n, true);
        k.entries += c.gamma * build_multiperiod_energy_matrix(n, round_period(c.period).shift, w).entries;
        break;
    }
    case CovarianceKind::rbf:
        k = build_rbf_invcov(n, c.rbf_sigma);
        break;
    case CovarianceKind::identity:
        k = OperatorMatrix{Eigen::MatrixXd::Identity(n, n), true};
        break;
    }
    k.entries *= c.lambda;
    return k;
}

}  // namespace

PriorModel build_prior(const ReconstructionConfig& c, double nu, const std::optional<GridFunction>& frozen) {
    const int n = c.lattice_size;
    const GridFunction v1 = make_template(c.first_template, n);
    const GridFunction v2 = make_template(c.second_template, n);
    const GridFunction zero = GridFunction::Zero(n);
    const OperatorMatrix lap = build_laplacian(n, true);
    const OperatorMatrix eye{Eigen::MatrixXd::Identity(n, n), true};
    const OperatorMatrix grad = build_shift_difference(n, 1);
    switch (c.prior_kind) {
    case PriorKind::gaussian:
        return GaussianPrior{v1, gaussian_inv_cov(c)};
    case PriorKind::switch_fixed: {
        SwitchingPrior s;
        s.first = {eye, v1};
        s.second = {OperatorMatrix{Eigen::MatrixXd::Zero(n, n), true}, zero};
        s.lambda1 = c.lambda1;
        s.lambda2 = c.lambda2;
        s.steepness = nu;
        s.threshold = c.threshold;
        s.combination = c.combination;
        if (c.tau > 0.0) {
            s.penalty = AuxPenalty{AuxMode::count, c.tau, {}, {}, 0.0, 1.0};
        }
        s.frozen = frozen;
        CompositePrior comp;
        comp.parts.emplace_back(std::move(s));
        comp.parts.emplace_back(GaussianPrior{zero, OperatorMatrix{c.lambda2 * lap.entries, true}});
        return comp;
    }
    case PriorKind::switch_two: {
        SwitchingPrior s;
        s.first = {grad, v1};
        s.second = {grad, v2};
        s.lambda1 = c.lambda1;
        s.lambda2 = c.lambda2;
        s.steepness = nu;
        s.threshold = c.threshold;
        s.combination = c.combination;
        if (c.tau > 0.0) {
            s.penalty = AuxPenalty{AuxMode::count, c.tau, {}, {}, 0.0, 1.0};
        }
        s.frozen = frozen;
        return s;
    }
    case PriorKind::hyperfield: {
        HyperfieldPrior h;
        const OperatorMatrix w{std::sqrt(c.lambda1) * eye.entries, true};
        h.first = {w, v1};
        h.second = {w, v2};
        h.theta = FieldState{FieldKind::binary_hyperfield, frozen ? *frozen : zero, kStepMode};
        h.include_normalization = c.normalization;
        if (c.tau > 0.0) {
            h.hyperprior = AuxPenalty{AuxMode::count, c.tau, {}, {}, 0.0, 1.0};
        }
        CompositePrior comp;
        comp.parts.emplace_back(std::move(h));
        comp.parts.emplace_back(GaussianPrior{zero, OperatorMatrix{c.lambda2 * lap.entries, true}});
        return comp;
    }
    case PriorKind::cup: {
        CompositePrior comp;
        comp.parts.emplace_back(CupPrior{{grad, v1}, c.cup_a, c.cup_b, c.cup_gamma, c.cup_x0});
        if (c.lambda > 0.0) {
            comp.parts.emplace_back(GaussianPrior{zero, gaussian_inv_cov(c)});
        }
        return comp;
    }
    }
    throw Error(Errc::invalid_parameter, "unhandled prior kind");
}

SampleSet make_data(const ReconstructionConfig& c) {
    if (c.data_source == DataSource::file) {
        SampleSet s = load_sample_set(c.data_file);
        if (s.lattice_size != c.lattice_size) {
            throw ConfigError("data.file lattice size " + std::to_string(s.lattice_size) +
                                  " differs from lattice.size",
                              0, "data.file");
        }
        return s;
    }
    const GridFunction v_true = true_potential(c.lattice_size);
    const Ensemble e = diagonalize(build_hamiltonian(v_true, c.mass), c.beta);
    return sample_positions(likelihood_density(e), c.sample_count, c.seed);
}

namespace {

bool is_switching(const ReconstructionConfig& c) {
    return c.prior_kind == PriorKind::switch_fixed || c.prior_kind == PriorKind::switch_two;
}

struct Setup {
    int n = 0;
    double mass = 0.0;
    double beta = 0.0;
    double kappa = 0.0;
    Eigen::VectorXd counts;
    std::vector<bool> free;
    DegeneracyPolicy policy = DegeneracyPolicy::confluent_limit;
};

class Posterior {
public:
    Posterior(const Setup& setup, const PriorModel& prior, double mu) : s_(setup), prior_(prior), mu_(mu) {}

    Evaluation operator()(const GridFunction& v) const {
        const Ensemble e = diagonalize(build_hamiltonian(v, s_.mass), s_.beta);
        const GridFunction p = likelihood_density(e);
        const LogLikelihood ll = log_likelihood(s_.counts, p);
        Evaluation out;
        if (ll.zero_probability) {
            out.value = std::numeric_limits<double>::infinity();
            out.gradient = GridFunction::Zero(s_.n);
            return out;
        }
        out.value = prior_.energy(v) - ll.value + energy_penalty(e, mu_, s_.kappa);
        out.gradient = grad_prior(prior_, v).gradient - grad_log_likelihood(e, s_.counts, s_.policy).gradient;
        if (mu_ > 0.0) {
            out.gradient += grad_energy_penalty(e, mu_, s_.kappa);
        }
        for (int i = 0; i < s_.n; ++i) {
            if (!s_.free[i]) {
                out.gradient(i) = 0.0;
            }
        }
        return out;
    }

private:
    const Setup& s_;
    const PriorModel& prior_;
    double mu_;
};

struct Stage {
    double mu;
    double nu;
    double tolerance;
};

std::vector<Stage> build_stages(const ReconstructionConfig& c) {
    std::vector<double> mus;
    if (c.mu > 0.0 && c.mu_stages > 1) {
        for (int k = 0; k < c.mu_stages; ++k) {
            const double expo = static_cast<double>(c.mu_stages - 1 - k) / (c.mu_stages - 1);
            mus.push_back(c.mu * std::pow(c.mu_start_ratio, expo));
        }
        mus.back() = c.mu;
    } else {
        mus.push_back(c.mu);
    }
    std::vector<double> nus;
    bool append_step = false;
    if (!is_switching(c)) {
        nus.push_back(0.0);
    } else if (c.nu_stages == 0) {
        nus.push_back(kStepMode);
    } else {
        for (int k = 0; k < c.nu_stages; ++k) {
            const double frac = c.nu_stages > 1 ? static_cast<double>(k) / (c.nu_stages - 1) : 1.0;
            nus.push_back(c.nu_start * std::pow(c.nu_final / c.nu_start, frac));
        }
        append_step = c.nu_final != kStepMode;
    }
    const std::size_t count = std::max(mus.size(), nus.size());
    std::vector<Stage> stages;
    for (std::size_t k = 0; k < count; ++k) {
        stages.push_back({mus[std::min(k, mus.size() - 1)], nus[std::min(k, nus.size() - 1)], c.stage_tolerance});
    }
    if (append_step) {
        stages.push_back({c.mu, kStepMode, c.stage_tolerance});
    }
    stages.back().tolerance = c.tolerance;
    return stages;
}

enum class Outcome { converged, interval, exhausted, stalled };

class Runner {
public:
    Runner(const ReconstructionConfig& c, const Setup& setup, std::vector<TraceEntry>& trace)
        : c_(c), s_(setup), trace_(trace), jitter_rng_(CounterRng::mix(c.seed ^ 0x6a09e667f3bcc909ULL)) {}

    Outcome optimize(GridFunction& v, const PriorModel& prior, double mu, double nu, double tol,
                     int max_steps) {
        const Posterior f(s_, prior, mu);
        Preconditioner metric(prior.metric(s_.n), s_.free, c_.preconditioner);
        ++segment_;
        IterationState st;
        st.v = v;
        st.eval = evaluate(f, st.v);
        st.grad_norm = metric.norm(st.eval.gradient);
        st.iteration = iterations_;
        st.phase.mu = mu;
        st.phase.nu = nu;
        record(st);
        Outcome out = Outcome::converged;
        int steps = 0;
        while (true) {
            if (st.grad_norm <= tol) {
                out = Outcome::converged;
                break;
            }
            if (iterations_ >= c_.max_iterations) {
                out = Outcome::exhausted;
                break;
            }
            if (steps >= max_steps) {
                out = Outcome::interval;
                break;
            }
            try {
                st = map_step(st, f, metric, tol);
            } catch (const Error& e) {
                if (e.code() != Errc::stalled_step) {
                    throw;
                }
                out = Outcome::stalled;
                break;
            }
            ++iterations_;
            ++steps;
            record(st);
        }
        v = st.v;
        last_objective_ = st.eval.value;
        last_grad_norm_ = st.grad_norm;
        return out;
    }

    int iterations() const { return iterations_; }
    int segments() const { return segment_ + 1; }
    int jitter_retries() const { return jitter_retries_; }
    double last_objective() const { return last_objective_; }
    double last_grad_norm() const { return last_grad_norm_; }
    bool budget_left() const { return iterations_ < c_.max_iterations; }

private:
    Evaluation evaluate(const Posterior& f, GridFunction& v) {
        for (int attempt = 0;; ++attempt) {
            try {
                return f(v);
            } catch (const DegenerateSpectrumError&) {
                if (c_.degeneracy != DegeneracyMode::jitter || attempt >= 3) {
                    throw;
                }
                ++jitter_retries_;
                for (int i = 0; i < s_.n; ++i) {
                    if (s_.free[i]) {
                        v(i) += 1e-8 * (2.0 * jitter_rng_.uniform() - 1.0);
                    }
                }
            }
        }
    }

    void record(const IterationState& st) {
        trace_.push_back({iterations_, st.eval.value, st.grad_norm, st.phase.mu, st.phase.nu, segment_});
    }

    const ReconstructionConfig& c_;
    const Setup& s_;
    std::vector<TraceEntry>& trace_;
    CounterRng jitter_rng_;
    int iterations_ = 0;
    int segment_ = -1;
    int jitter_retries_ = 0;
    double last_objective_ = 0.0;
    double last_grad_norm_ = 0.0;
};

GridFunction project(GridFunction v, const std::vector<bool>& free) {
    for (std::size_t i = 0; i < free.size(); ++i) {
        if (!free[i]) {
            v(static_cast<Eigen::Index>(i)) = 0.0;
        }
    }
    return v;
}

struct AnnealedStart {
    GridFunction v;
    GridFunction field;
};

// c(x) mixes the two templates; the annealing energy is the negative log-likelihood of
// v(c) = (1 - c) v1 + c v2 plus the discontinuity penalty of the switching field.
AnnealedStart annealed_start(const ReconstructionConfig& c, const Setup& s, CounterRng& rng) {
    const int n = s.n;
    const GridFunction v1 = make_template(c.first_template, n);
    const GridFunction v2 = make_template(c.second_template, n);
    const PriorModel prior = build_prior(c, kStepMode);
    auto mix = [&](const GridFunction& cx) {
        return project((1.0 - cx.array()).matrix().cwiseProduct(v1) + cx.cwiseProduct(v2), s.free);
    };
    const FieldEnergy energy = [&](const GridFunction& cx) {
        const GridFunction v = mix(cx);
        const Ensemble e = diagonalize(build_hamiltonian(v, s.mass), s.beta);
        const LogLikelihood ll = log_likelihood(s.counts, likelihood_density(e));
        if (ll.zero_probability) {
            return std::numeric_limits<double>::infinity();
        }
        const GridFunction field = c.prior_kind == PriorKind::switch_two ? prior.field(v)->values : cx;
        return -ll.value + 0.5 * c.tau * count_discontinuities(field);
    };
    const FieldState start{FieldKind::binary_hyperfield, GridFunction::Zero(n), kStepMode};
    const AnnealResult best = anneal_binary_field(start, energy, c.anneal, rng);
    return {mix(best.field.values), best.field.values};
}

GridFunction reanneal_hyperfield(const ReconstructionConfig& c, const GridFunction& v, const GridFunction& theta,
                                 CounterRng& rng) {
    const FieldEnergy energy = [&](const GridFunction& t) { return build_prior(c, kStepMode, t).energy(v); };
    const FieldState start{FieldKind::binary_hyperfield, theta, kStepMode};
    const AnnealResult best = anneal_binary_field(start, energy, c.anneal, rng);
    return best.energy < energy(theta) ? best.field.values : theta;
}

const char* outcome_name(Outcome o) {
    switch (o) {
    case Outcome::converged: return "converged";
    case Outcome::interval:
    case Outcome::exhausted: return "max-iterations";
    case Outcome::stalled: return "stalled";
    }
    return "?";
}

double rms(const GridFunction& d) {
    return std::sqrt(d.squaredNorm() / static_cast<double>(d.size()));
}

}  // namespace

ReconstructionResult reconstruct(const ReconstructionConfig& config) {
    validate_config(config);
    return reconstruct(config, make_data(config));
}

ReconstructionResult reconstruct(const ReconstructionConfig& config, const SampleSet& data) {
    validate_config(config);
    const ReconstructionConfig& c = config;
    const int n = c.lattice_size;
    if (data.lattice_size != 0 && data.lattice_size != n) {
        throw ConfigError("sample set lattice size differs from lattice.size", 0, "lattice.size");
    }

    ReconstructionResult r;
    r.config = c;
    r.data = data;
    r.v_true = true_potential(n);
    const Ensemble true_ensemble = diagonalize(build_hamiltonian(r.v_true, c.mass), c.beta);
    r.p_true = likelihood_density(true_ensemble);
    r.v_template = make_template(c.first_template, n);

    Setup s;
    s.n = n;
    s.mass = c.mass;
    s.beta = c.beta;
    s.kappa = c.kappa_auto ? average_energy(true_ensemble) : c.kappa;
    s.counts = sample_counts(data, n);
    s.free = free_mask(c.boundary, n);
    s.policy = c.degeneracy == DegeneracyMode::confluent ? DegeneracyPolicy::confluent_limit
                                                         : DegeneracyPolicy::raise;
    if (data.n() > 0) {
        r.p_emp = empirical_density(data, n);
    } else {
        r.p_emp = GridFunction::Zero(n);
    }

    CounterRng anneal_rng(CounterRng::mix(c.seed ^ 0xbb67ae8584caa73bULL));

    // Initial guess.
    GridFunction v = GridFunction::Zero(n);
    GridFunction theta = GridFunction::Zero(n);
    const Band band{c.impurity_first - 1, c.impurity_last - 1};
    switch (c.initial) {
    case InitialGuess::zero:
        break;
    case InitialGuess::template_mean:
        v = r.v_template;
        break;
    case InitialGuess::piecewise:
        v = r.v_template;
        v.segment(band.first, band.last - band.first + 1).setZero();
        break;
    case InitialGuess::annealed: {
        const AnnealedStart a = annealed_start(c, s, anneal_rng);
        v = a.v;
        theta = a.field;
        break;
    }
    case InitialGuess::chain: {
        ReconstructionConfig prev = preset_config(c.chain_preset);
        prev.seed = c.seed;
        prev.lattice_size = c.lattice_size;
        prev.mass = c.mass;
        prev.beta = c.beta;
        prev.boundary = c.boundary;
        v = reconstruct(prev, data).v_star;
        break;
    }
    }
    v = project(v, s.free);

    Runner runner(c, s, r.trace);
    const std::vector<Stage> stages = build_stages(c);
    Outcome outcome = Outcome::converged;
    int field_updates = 0;
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const Stage& st = stages[k];
        if (is_switching(c) && st.nu == kStepMode) {
            // Fixed point: optimize with B frozen, recompute B(v), repeat until B is stable.
            for (int round = 0; round < c.field_rounds; ++round) {
                const GridFunction b = build_prior(c, kStepMode).field(v)->values;
                const PriorModel frozen = build_prior(c, kStepMode, b);
                outcome = runner.optimize(v, frozen, st.mu, st.nu, st.tolerance, c.max_iterations);
                const GridFunction b_next = build_prior(c, kStepMode).field(v)->values;
                if (b_next == b || outcome == Outcome::exhausted) {
                    break;
                }
                ++field_updates;
                if (round + 1 == c.field_rounds) {
                    outcome = Outcome::stalled;
                }
            }
        } else if (c.prior_kind == PriorKind::hyperfield) {
            while (true) {
                const PriorModel prior = build_prior(c, st.nu, theta);
                outcome = runner.optimize(v, prior, st.mu, st.nu, st.tolerance, c.field_update_interval);
                const GridFunction next = reanneal_hyperfield(c, v, theta, anneal_rng);
                const bool changed = next != theta;
                if (changed) {
                    theta = next;
                    ++field_updates;
                }
                if (outcome == Outcome::exhausted || outcome == Outcome::stalled) {
                    break;
                }
                if (!changed && outcome == Outcome::converged) {
                    break;
                }
            }
        } else {
            const PriorModel prior = build_prior(c, st.nu);
            outcome = runner.optimize(v, prior, st.mu, st.nu, st.tolerance, c.max_iterations);
        }
        if (!runner.budget_left() && outcome != Outcome::converged) {
            break;
        }
    }

    r.v_star = v;
    const Ensemble e = diagonalize(build_hamiltonian(v, c.mass), c.beta);
    r.p_rec = likelihood_density(e);
    if (c.prior_kind == PriorKind::hyperfield) {
        r.field = FieldState{FieldKind::binary_hyperfield, theta, kStepMode};
    } else if (is_switching(c)) {
        r.field = build_prior(c, kStepMode).field(v);
    }

    Diagnostics& d = r.diagnostics;
    d.rmse = rms(v - r.v_true);
    {
        const Band tb = impurity_band(n);
        std::vector<double> diffs;
        for (int j = 0; j < n; ++j) {
            if (j < tb.first || j > tb.last) {
                diffs.push_back(v(j) - r.v_true(j));
            }
        }
        d.rmse_bands = rms(Eigen::Map<const Eigen::VectorXd>(diffs.data(), static_cast<Eigen::Index>(diffs.size())));
    }
    if (data.n() > 0) {
        d.kl_rec = kl_divergence(r.p_emp, r.p_rec);
        d.kl_true = kl_divergence(r.p_emp, r.p_true);
    }
    d.average_energy = average_energy(e);
    d.true_average_energy = average_energy(true_ensemble);
    d.kappa = s.kappa;
    d.energy_gap = std::abs(d.average_energy - d.kappa);
    d.final_objective = runner.last_objective();
    d.final_grad_norm = runner.last_grad_norm();
    d.iterations = runner.iterations();
    d.converged = outcome == Outcome::converged;
    d.termination = outcome_name(outcome);
    d.stages = static_cast<int>(stages.size());
    d.segments = runner.segments();
    d.field_updates = field_updates;
    d.jitter_retries = runner.jitter_retries();
    if (c.prior_kind == PriorKind::gaussian &&
        (c.covariance == CovarianceKind::periodic || c.covariance == CovarianceKind::multiperiod)) {
        const RoundedPeriod rp = round_period(c.period);
        d.period_shift = rp.shift;
        d.period_rounded = rp.rounded;
    }
    if (r.field) {
        const Band tb = impurity_band(n);
        for (int j = 0; j < n; ++j) {
            if (r.field->values(j) == 1.0) {
                (j >= tb.first && j <= tb.last ? d.field_ones_impurity : d.field_ones_outside) += 1;
            }
        }
        d.field_discontinuities = count_discontinuities(r.field->values);
    }
    return r;
}

ReconstructionResult run_preset(const std::string& name, std::uint64_t seed,
                                const std::vector<std::pair<std::string, std::string>>& overrides) {
    ReconstructionConfig c = preset_config(name);
    c.seed = seed;
    for (const auto& [key, value] : overrides) {
        apply_setting(c, key, value);
    }
    validate_config(c);
    return reconstruct(c);
}

}  // namespace biqm
