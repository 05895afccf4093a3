#include "perseg/parabolic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/SparseLU>

#include "perseg/error.hpp"
#include "perseg/linalg.hpp"
#include "perseg/reaction.hpp"

namespace perseg {

namespace {

constexpr double kClip = 1e-12;

std::vector<double> require_finite(std::vector<double> v, double t) {
    for (double x : v)
        if (!std::isfinite(x)) throw BlowUp("nonfinite value", t);
    return v;
}

// One step of sigma_j z_j^{new} - theta dt D^2 z^{new} = m + (1 - theta) dt D^2 z + dt f(z) for the
// scalar problems; sigma is 1 for the semilinear flow.
class ScalarStepper {
public:
    ScalarStepper(const Coefficients& c, double alpha, double d, const EvolutionConfig& cfg)
        : c_(c), alpha_(alpha), d_(d), dt_(cfg.dt), theta_(cfg.scheme == Scheme::imex_be ? 1.0 : 0.5),
          n_(c.mu1.size()), h_(c.mu1.grid().spacing()), lap_(n_), rhs_(n_) {}

    // Explicit part with m = sigma z.
    const std::vector<double>& rhs(const std::vector<double>& z, const std::vector<double>& sigma) {
        apply_laplacian(z, h_, lap_);
        for (std::size_t j = 0; j < n_; ++j)
            rhs_[j] = sigma[j] * z[j] + (1.0 - theta_) * dt_ * lap_[j] +
                      dt_ * bistable_reaction(z[j], c_.mu1[j], c_.mu2[j], alpha_, d_);
        return rhs_;
    }

    CyclicTridiagonal matrix(const std::vector<double>& sigma) const {
        const double cc = theta_ * dt_ / (h_ * h_);
        std::vector<double> diag(n_);
        for (std::size_t j = 0; j < n_; ++j) diag[j] = sigma[j] + 2.0 * cc;
        return CyclicTridiagonal(std::vector<double>(n_, -cc), std::move(diag), std::vector<double>(n_, -cc));
    }

private:
    const Coefficients& c_;
    double alpha_, d_, dt_, theta_;
    std::size_t n_;
    double h_;
    std::vector<double> lap_, rhs_;
};

void check_scalar_inputs(const Field& z0, const Coefficients& c, double alpha, double d, const EvolutionConfig& cfg) {
    cfg.validate();
    require_same_grid(z0, c.mu1);
    require_same_grid(z0, c.mu2);
    const double cap = reaction_dt_cap(c, alpha, d);
    if (cfg.dt > cap) throw ValidationError("dt", "exceeds the explicit reaction cap " + std::to_string(cap));
}

// Shared driver: `advance` maps the state at step i to step i + 1.
template <class Advance>
Trajectory drive(std::vector<std::vector<double>> state, const PeriodicGrid& grid, const EvolutionConfig& cfg,
                 const Observer& observe, Advance advance) {
    Trajectory tr;
    auto snapshot = [&]() {
        std::vector<Field> f;
        for (const auto& s : state) f.emplace_back(grid, s);
        return f;
    };
    tr.times.push_back(0.0);
    tr.snapshots.push_back(snapshot());
    const int steps = cfg.steps();
    for (int i = 1; i <= steps; ++i) {
        const double t = i * cfg.dt;
        advance(state, t);
        for (auto& s : state) s = require_finite(std::move(s), t);
        const bool record = i % cfg.record_every == 0 || i == steps;
        std::optional<std::vector<Field>> snap;
        bool keep_going = true;
        if (observe) {
            snap = snapshot();
            keep_going = observe(t, *snap);
        }
        if (record || !keep_going) {
            tr.times.push_back(t);
            tr.snapshots.push_back(snap ? std::move(*snap) : snapshot());
        }
        if (!keep_going) break;
    }
    return tr;
}

std::vector<double> sigma_of(const std::vector<double>& z, double d) {
    std::vector<double> s(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) s[j] = z[j] < 0.0 ? 1.0 / d : 1.0;
    return s;
}

}  // namespace

const char* to_string(Scheme s) { return s == Scheme::imex_be ? "imex_be" : "imex_cn"; }

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt", "must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("t_end", "must be positive");
    if (record_every < 1) throw ValidationError("record_every", "must be at least 1");
}

int EvolutionConfig::steps() const { return static_cast<int>(std::ceil(t_end / dt - 1e-9)); }

double reaction_dt_cap(const Coefficients& c, double alpha, double d) {
    const double sup_f1 = std::max(c.mu1.max() * alpha, c.mu2.max() * d);
    return sup_f1 > 0.0 ? 1.0 / (2.0 * sup_f1) : std::numeric_limits<double>::infinity();
}

double system_dt_cap(const SystemCoefficients& sys) {
    const double m = std::max(sys.mu1.max(), sys.mu2.max());
    return m > 0.0 ? 1.0 / (2.0 * m) : std::numeric_limits<double>::infinity();
}

Trajectory evolve_semilinear(const Field& z0, const Coefficients& c, double alpha, double d,
                             const EvolutionConfig& cfg, const Observer& observe) {
    check_scalar_inputs(z0, c, alpha, d, cfg);
    ScalarStepper stepper(c, alpha, d, cfg);
    const std::vector<double> ones(z0.size(), 1.0);
    const CyclicTridiagonal M = stepper.matrix(ones);
    return drive({z0.vector()}, z0.grid(), cfg, observe, [&](std::vector<std::vector<double>>& s, double) {
        s[0] = M.solve(stepper.rhs(s[0], ones));
    });
}

Trajectory evolve_semilinear(const Field& z0, const CoefficientProfile& profile, const EvolutionConfig& cfg,
                             const Observer& observe) {
    profile.validate();
    return evolve_semilinear(z0, sample_coefficients(profile, z0.grid()), profile.alpha, profile.d, cfg, observe);
}

Trajectory evolve_quasilinear(const Field& z0, const Coefficients& c, double alpha, double d,
                              const EvolutionConfig& cfg, const Observer& observe) {
    check_scalar_inputs(z0, c, alpha, d, cfg);
    ScalarStepper stepper(c, alpha, d, cfg);
    return drive({z0.vector()}, z0.grid(), cfg, observe, [&](std::vector<std::vector<double>>& s, double) {
        const std::vector<double> sigma = sigma_of(s[0], d);
        const std::vector<double> rhs = stepper.rhs(s[0], sigma);
        std::vector<double> z = stepper.matrix(sigma).solve(rhs);
        const std::vector<double> sigma_new = sigma_of(z, d);
        if (sigma_new != sigma) z = stepper.matrix(sigma_new).solve(rhs);
        s[0] = std::move(z);
    });
}

Trajectory evolve_quasilinear(const Field& z0, const CoefficientProfile& profile, const EvolutionConfig& cfg,
                              const Observer& observe) {
    profile.validate();
    return evolve_quasilinear(z0, sample_coefficients(profile, z0.grid()), profile.alpha, profile.d, cfg, observe);
}

Trajectory evolve_system(const Field& u10, const Field& u20, double k, const SystemCoefficients& sys,
                         const EvolutionConfig& cfg, const Observer& observe) {
    cfg.validate();
    require_same_grid(u10, u20);
    require_same_grid(u10, sys.mu1);
    if (!(k >= 0.0) || !std::isfinite(k)) throw InvalidArgument("evolve_system: k must be nonnegative");
    for (std::size_t j = 0; j < u10.size(); ++j)
        if (u10[j] < 0.0 || u20[j] < 0.0) throw InvalidArgument("evolve_system: initial data must be nonnegative");
    const double cap = system_dt_cap(sys);
    if (cfg.dt > cap) throw ValidationError("dt", "exceeds the explicit growth cap " + std::to_string(cap));

    const std::size_t n = u10.size();
    const double h = u10.grid().spacing();
    const double theta = cfg.scheme == Scheme::imex_be ? 1.0 : 0.5;
    const double a = sys.alpha;
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    std::vector<double> lap1(n), lap2(n);
    Eigen::VectorXd rhs(static_cast<int>(2 * n));

    return drive({u10.vector(), u20.vector()}, u10.grid(), cfg, observe,
                 [&](std::vector<std::vector<double>>& s, double t) {
                     std::vector<double>& u1 = s[0];
                     std::vector<double>& u2 = s[1];
                     // I + theta dt A, A the raw linearization (minus the Jacobian).
                     SparseMatrix M = system_operator(u1, u2, k, sys, false) * (theta * cfg.dt);
                     for (int i = 0; i < static_cast<int>(2 * n); ++i) M.coeffRef(i, i) += 1.0;
                     if (!analyzed) {
                         lu.analyzePattern(M);
                         analyzed = true;
                     }
                     lu.factorize(M);
                     if (lu.info() != Eigen::Success) throw BlowUp("singular step matrix", t);
                     apply_laplacian(u1, h, lap1);
                     apply_laplacian(u2, h, lap2);
                     for (std::size_t j = 0; j < n; ++j) {
                         const double loss = k * sys.omega[j] * u1[j] * u2[j];
                         rhs[static_cast<int>(j)] =
                             cfg.dt * (lap1[j] + sys.mu1[j] * (1.0 - u1[j]) * u1[j] - loss);
                         rhs[static_cast<int>(n + j)] =
                             cfg.dt * (sys.d * lap2[j] + sys.mu2[j] * (1.0 - u2[j]) * u2[j] - a * loss);
                     }
                     const Eigen::VectorXd delta = lu.solve(rhs);
                     for (std::size_t j = 0; j < n; ++j) {
                         for (int c = 0; c < 2; ++c) {
                             double& u = c == 0 ? u1[j] : u2[j];
                             u += delta[static_cast<int>(c * n + j)];
                             if (u < 0.0) {
                                 if (u < -kClip) throw SchemeViolation("negative density", t);
                                 u = 0.0;
                             }
                         }
                     }
                 });
}

Field multimode_bump(const PeriodicGrid& grid, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.5, 1.0), phase(0.0, 2.0 * std::numbers::pi);
    std::array<double, 4> a{}, p{};
    for (int m = 0; m < 4; ++m) {
        a[m] = amp(rng);
        p[m] = phase(rng);
    }
    const double L = grid.period();
    Field b = Field::from_function(grid, [&](double x) {
        double s = 0.0;
        for (int m = 0; m < 4; ++m) s += a[m] * std::cos(2.0 * std::numbers::pi * (m + 1) * x / L + p[m]);
        return s;
    });
    return (1.0 / b.sup_abs()) * b;
}

double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norms) {
    if (times.size() != norms.size() || times.size() < 3) throw InvalidArgument("fit_decay_rate: need 3 samples");
    const double t0 = times.front() + 2.0 * (times.back() - times.front()) / 3.0;
    double st = 0, sy = 0, stt = 0, sty = 0;
    int m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t0 || !(norms[i] > 0.0)) continue;
        const double y = std::log(norms[i]);
        st += times[i];
        sy += y;
        stt += times[i] * times[i];
        sty += times[i] * y;
        ++m;
    }
    if (m < 2) throw InvalidArgument("fit_decay_rate: fewer than two positive samples in the final third");
    const double slope = (m * sty - st * sy) / (m * stt - st * st);
    return -slope;
}

namespace {

DecayReport finish(DecayReport rep, double lambda) {
    rep.fitted_rate = fit_decay_rate(rep.times, rep.perturbation_norms);
    const auto& nrm = rep.perturbation_norms;
    bool monotone = true;
    const double t0 = rep.times.front() + 2.0 * (rep.times.back() - rep.times.front()) / 3.0;
    for (std::size_t i = 1; i < nrm.size(); ++i)
        if (rep.times[i - 1] >= t0 && nrm[i] > nrm[i - 1]) monotone = false;
    rep.returned = monotone && nrm.back() <= 1e-3 * nrm.front();
    rep.relative_error = std::abs(rep.fitted_rate - lambda) / std::max(std::abs(lambda), 1e-300);
    return rep;
}

double sup_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace

ProbeReport stability_probe(const Field& z, const Coefficients& c, double alpha, double d, Sense sense,
                            double amplitude, const EvolutionConfig& cfg, std::uint64_t seed) {
    if (sense != Sense::semilinear && sense != Sense::quasilinear)
        throw InvalidArgument("stability_probe: scalar states take the semilinear or quasilinear sense");
    if (!(amplitude > 0.0) || amplitude > 0.05 * z.sup_abs())
        throw InvalidArgument("stability_probe: amplitude must lie in (0, 0.05 sup|z|]");
    const Field q = f1_of(z, c, alpha, d);
    const EigenResult eig =
        sense == Sense::semilinear ? principal_scalar(q) : principal_weighted(q, sigma_fields(z, d).first);
    ProbeReport rep;
    rep.sense = sense;
    rep.lambda = eig.lambda;

    auto run = [&](const Field& shape, const char* name) {
        DecayReport dr;
        dr.perturbation = name;
        const Field z0 = z + (amplitude / shape.sup_abs()) * shape;
        dr.times.push_back(0.0);
        dr.perturbation_norms.push_back(sup_diff(z0, z));
        const Observer obs = [&](double t, const std::vector<Field>& f) {
            dr.times.push_back(t);
            dr.perturbation_norms.push_back(sup_diff(f[0], z));
            return true;
        };
        EvolutionConfig quiet = cfg;
        quiet.record_every = std::max(cfg.steps(), 1);
        if (sense == Sense::semilinear) evolve_semilinear(z0, c, alpha, d, quiet, obs);
        else evolve_quasilinear(z0, c, alpha, d, quiet, obs);
        return finish(std::move(dr), eig.lambda);
    };
    rep.eigenfunction = run(eig.eigenfunctions[0], "eigenfunction");
    rep.multimode = run(multimode_bump(z.grid(), seed), "multimode");
    return rep;
}

ProbeReport stability_probe(const CoexistenceState& state, const SystemCoefficients& sys, double amplitude,
                            const EvolutionConfig& cfg, std::uint64_t seed) {
    const double top = std::max(state.u1.sup_abs(), state.u2.sup_abs());
    if (!(amplitude > 0.0) || amplitude > 0.05 * top)
        throw InvalidArgument("stability_probe: amplitude must lie in (0, 0.05 sup|state|]");
    const EigenResult eig = principal_system(state.u1, state.u2, state.k, sys);
    ProbeReport rep;
    rep.sense = Sense::system;
    rep.lambda = eig.lambda;

    auto run = [&](const Field& d1, const Field& d2, const char* name) {
        DecayReport dr;
        dr.perturbation = name;
        const Field u10 = state.u1 + d1;
        const Field u20 = state.u2 + d2;
        auto dist = [&](const Field& a, const Field& b) {
            return std::max(sup_diff(a, state.u1), sup_diff(b, state.u2));
        };
        dr.times.push_back(0.0);
        dr.perturbation_norms.push_back(dist(u10, u20));
        const Observer obs = [&](double t, const std::vector<Field>& f) {
            dr.times.push_back(t);
            dr.perturbation_norms.push_back(dist(f[0], f[1]));
            return true;
        };
        EvolutionConfig quiet = cfg;
        quiet.record_every = std::max(cfg.steps(), 1);
        evolve_system(u10, u20, state.k, sys, quiet, obs);
        return finish(std::move(dr), eig.lambda);
    };

    const Field& phi = eig.eigenfunctions[0];
    const Field& psi = eig.eigenfunctions[1];
    const double scale = amplitude / std::max(phi.sup_abs(), psi.sup_abs());
    std::vector<double> d2(psi.size());
    for (std::size_t j = 0; j < d2.size(); ++j) d2[j] = -std::min(scale * psi[j], 0.5 * state.u2[j]);
    rep.eigenfunction = run(scale * phi, Field(psi.grid(), std::move(d2)), "eigenfunction");
    const Field b = multimode_bump(state.u1.grid(), seed).map([&](double x) { return 0.5 * amplitude * (x + 1.0); });
    rep.multimode = run(b, b, "multimode");
    return rep;
}

double small_period_threshold(const SystemCoefficients& sys) {
    const double m1 = sys.mu1.max();
    const double m2 = sys.mu2.max();
    if (!(m1 > 0.0) || !(m2 > 0.0)) throw InvalidArgument("small_period_threshold: coefficients vanish");
    return std::numbers::pi * (1.0 / std::sqrt(m1) + std::sqrt(sys.d) / std::sqrt(m2));
}

ExclusionReport small_period_exclusion(const SegregatedState& large, double L_small, double k,
                                       const EvolutionConfig& cfg, const ExclusionOptions& opts) {
    const CoefficientProfile& profile = large.profile;
    const std::size_t n = large.grid.size();
    const PeriodicGrid small_grid = build_grid(L_small, n, profile);
    const SystemCoefficients small_sys =
        system_coefficients(sample_coefficients(profile, small_grid), profile.alpha, profile.d);
    const SystemCoefficients large_sys = system_coefficients(large.coefficients, profile.alpha, profile.d);

    ExclusionReport rep;
    rep.threshold = small_period_threshold(small_sys);
    rep.L_small = L_small;
    rep.k = k;
    if (!(L_small > 0.0) || !(L_small < rep.threshold))
        throw InvalidArgument("small_period_exclusion: L_small must lie below the threshold");

    // Node values of the segregated pair, reused on both cells, with a seeded asymmetric perturbation.
    const auto [vp, vm] = pos_neg_parts(large.v);
    const Field b1 = multimode_bump(large.grid, opts.seed);
    const Field b2 = multimode_bump(large.grid, opts.seed + 1);
    std::vector<double> u1(n), u2(n);
    for (std::size_t j = 0; j < n; ++j) {
        u1[j] = vp[j] / profile.alpha + 0.5 * opts.perturbation * (b1[j] + 1.0);
        u2[j] = vm[j] / profile.d + 0.5 * opts.perturbation * (b2[j] + 1.0);
    }

    EvolutionConfig quiet = cfg;
    quiet.record_every = std::max(cfg.steps(), 1);
    const Observer stop_when_semitrivial = [&](double, const std::vector<Field>& f) {
        return std::min(f[0].max(), f[1].max()) > opts.tolerance;
    };
    const Trajectory small = evolve_system(Field(small_grid, u1), Field(small_grid, u2), k, small_sys, quiet,
                                           stop_when_semitrivial);
    rep.final_time = small.times.back();
    rep.sup_u1 = small.snapshots.back()[0].max();
    rep.sup_u2 = small.snapshots.back()[1].max();
    rep.semitrivial = std::min(rep.sup_u1, rep.sup_u2) <= opts.tolerance;

    std::vector<double> g1(n), g2(n);
    for (std::size_t j = 0; j < n; ++j) {
        g1[j] = vp[j] / profile.alpha + opts.newton.eps0;
        g2[j] = vm[j] / profile.d + opts.newton.eps0;
    }
    try {
        const CoexistenceState st = solve_system(k, Field(small_grid, g1), Field(small_grid, g2), small_sys,
                                                 opts.newton);
        rep.newton_converged = true;
        rep.newton_lambda = principal_system(st.u1, st.u2, k, small_sys).lambda;
    } catch (const SolverFailure&) {
        rep.newton_converged = false;
    }
    rep.coexistence_excluded = !rep.newton_converged || rep.newton_lambda <= 0.0;

    const Trajectory control = evolve_system(Field(large.grid, u1), Field(large.grid, u2), k, large_sys, quiet);
    rep.control_min_sup = std::min(control.snapshots.back()[0].max(), control.snapshots.back()[1].max());
    rep.control_coexists = rep.control_min_sup > opts.tolerance;
    return rep;
}

}  // namespace perseg
