#include "perseg/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/SparseLU>

#include "perseg/error.hpp"
#include "perseg/reaction.hpp"

namespace perseg {

namespace {

using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;

constexpr double kEps = std::numeric_limits<double>::epsilon();

double clamped_exp(double a) { return std::exp(std::clamp(a, -700.0, 700.0)); }

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ---------------------------------------------------------------------------------------------
// Scalar semismooth Newton.

void scalar_residual(const Field& z, const Coefficients& c, double alpha, double d, std::vector<double>& r) {
    const std::size_t n = z.size();
    r.resize(n);
    apply_laplacian(z.values(), z.grid().spacing(), r);
    for (std::size_t j = 0; j < n; ++j) r[j] = -r[j] - bistable_reaction(z[j], c.mu1[j], c.mu2[j], alpha, d);
}

double l2sq(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

// ---------------------------------------------------------------------------------------------
// Newton on logarithms of positive unknowns. Each residual row is an equation divided by its
// unknown, so rows stay O(1) where the unknown is exponentially small.

struct LogEval {
    std::vector<double> g;
    std::vector<double> scale; // sum of magnitudes of the terms of each row
};

using LogEvaluator = std::function<void(const std::vector<double>&, LogEval&, std::vector<Triplet>*)>;
using Admissible = std::function<bool(const std::vector<double>&)>;

struct LogNewtonOutcome {
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
};

double relative_residual(const LogEval& e) {
    double r = 0.0;
    for (std::size_t i = 0; i < e.g.size(); ++i) r = std::max(r, std::abs(e.g[i]) / (1.0 + e.scale[i]));
    return r;
}

double weighted_merit(const std::vector<double>& g, const std::vector<double>& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g[i] * w[i];
        m += x * x;
    }
    return m;
}

LogNewtonOutcome log_newton(const LogEvaluator& eval, const Admissible& admissible, std::vector<double>& s,
                            const HomotopyOptions& opts) {
    const std::size_t N = s.size();
    LogEval cur, trial;
    std::vector<Triplet> jac;
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    LogNewtonOutcome out;
    double max_step = opts.max_log_step;

    eval(s, cur, nullptr);
    out.residual = relative_residual(cur);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (out.residual <= opts.tolerance) {
            out.converged = true;
            return out;
        }
        jac.clear();
        eval(s, cur, &jac);
        SparseMatrix J(static_cast<int>(N), static_cast<int>(N));
        J.setFromTriplets(jac.begin(), jac.end());
        J.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) break;
        Vector rhs(static_cast<int>(N));
        for (std::size_t i = 0; i < N; ++i) rhs[static_cast<int>(i)] = -cur.g[i];
        Vector step = lu.solve(rhs);
        if (!step.allFinite()) break;
        const double biggest = step.cwiseAbs().maxCoeff();
        if (biggest > max_step) step *= max_step / biggest;

        std::vector<double> w(N);
        for (std::size_t i = 0; i < N; ++i) w[i] = 1.0 / (1.0 + cur.scale[i]);
        const double m0 = weighted_merit(cur.g, w);
        std::vector<double> s_trial(N);
        double lam = 1.0;
        bool accepted = false;
        for (int half = 0; half < 40; ++half) {
            for (std::size_t i = 0; i < N; ++i) s_trial[i] = s[i] + lam * step[static_cast<int>(i)];
            if (admissible(s_trial)) {
                eval(s_trial, trial, nullptr);
                if (weighted_merit(trial.g, w) < (1.0 - 1e-4 * lam) * m0) {
                    accepted = true;
                    break;
                }
            } else {
                // Degenerate iterate: shrink the trust region for the rest of the solve.
                max_step *= 0.5;
            }
            lam *= 0.5;
        }
        ++out.iterations;
        if (!accepted) break;
        s.swap(s_trial);
        std::swap(cur, trial);
        out.residual = relative_residual(cur);
    }
    out.converged = out.residual <= opts.tolerance;
    return out;
}

// Periodic second difference of log values divided by the value: (2 - e^{a} - e^{b}) / h^2 and derivatives.
struct LogLaplacianRow {
    double value;
    double scale;
    double left;  // derivative with respect to s_{j-1}
    double right; // derivative with respect to s_{j+1}
    double self;
};

LogLaplacianRow log_laplacian(const std::vector<double>& s, std::size_t offset, std::size_t n, std::size_t j,
                              double inv_h2) {
    const double sj = s[offset + j];
    const double ea = clamped_exp(s[offset + (j + n - 1) % n] - sj);
    const double eb = clamped_exp(s[offset + (j + 1) % n] - sj);
    return {(2.0 - ea - eb) * inv_h2, (2.0 + ea + eb) * inv_h2, -ea * inv_h2, -eb * inv_h2, (ea + eb) * inv_h2};
}

void push_laplacian(std::vector<Triplet>& t, std::size_t offset, std::size_t n, std::size_t j,
                    const LogLaplacianRow& row, double coef, double diag_extra) {
    const auto r = static_cast<int>(offset + j);
    t.emplace_back(r, static_cast<int>(offset + (j + n - 1) % n), coef * row.left);
    t.emplace_back(r, static_cast<int>(offset + (j + 1) % n), coef * row.right);
    t.emplace_back(r, r, coef * row.self + diag_extra);
}

// Everything the homotopy residual needs, in system form. `v` may be null for plain system solves.
struct Problem {
    SystemCoefficients sys;
    const Field* v;
    PeriodicGrid grid;
    std::size_t n;
    double inv_h2;

    Problem(SystemCoefficients coeffs, const Field* seg)
        : sys(std::move(coeffs)),
          v(seg),
          grid(sys.mu1.grid()),
          n(sys.mu1.size()),
          inv_h2(1.0 / (grid.spacing() * grid.spacing())) {}

    explicit Problem(const SegregatedState& st)
        : Problem(system_coefficients(st.coefficients, st.profile.alpha, st.profile.d), &st.v) {}

    double alpha() const { return sys.alpha; }
    double d() const { return sys.d; }

    // Rows 0..n-1 divide the u1 equation by u1, rows n..2n-1 the u2 equation by u2.
    void homotopy(double t, double k, const std::vector<double>& s, LogEval& e, std::vector<Triplet>* jac) const {
        const double a = alpha();
        const double dd = d();
        e.g.assign(2 * n, 0.0);
        e.scale.assign(2 * n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double s1 = s[j];
            const double s2 = s[n + j];
            const double u1 = clamped_exp(s1);
            const double u2 = clamped_exp(s2);
            const double kw = k * sys.omega[j];
            const double m1 = sys.mu1[j];
            const double m2 = sys.mu2[j];
            const double c1 = (1.0 - t) * m1 / (a * a);
            const double c2 = (1.0 - t) * m2 / (dd * dd);

            // (alpha u1 - d u2)^+ / u1 = P and (alpha u1 - d u2)^- / u2 = Q.
            const double r21 = clamped_exp(s2 - s1);
            const double r12 = clamped_exp(s1 - s2);
            const double P = std::max(a - dd * r21, 0.0);
            const double Q = std::max(dd - a * r12, 0.0);
            const double T1 = c1 * (a - u1 * P) * P;
            const double T2 = c2 * (dd - u2 * Q) * Q;

            const LogLaplacianRow l1 = log_laplacian(s, 0, n, j, inv_h2);
            const LogLaplacianRow l2 = log_laplacian(s, n, n, j, inv_h2);
            e.g[j] = l1.value - t * m1 * (1.0 - u1) - T1 + kw * u2;
            e.scale[j] = l1.scale + t * m1 * (1.0 + u1) + c1 * (a + u1 * P) * P + kw * u2;
            e.g[n + j] = dd * l2.value - t * m2 * (1.0 - u2) - T2 + a * kw * u1;
            e.scale[n + j] = dd * l2.scale + t * m2 * (1.0 + u2) + c2 * (dd + u2 * Q) * Q + a * kw * u1;

            if (!jac) continue;
            const double P1 = P > 0.0 ? dd * r21 : 0.0; // dP/ds1; dP/ds2 = -P1
            const double Q2 = Q > 0.0 ? a * r12 : 0.0;  // dQ/ds2; dQ/ds1 = -Q2
            const double dT1_ds1 = c1 * (-u1 * P * P + P1 * (a - 2.0 * u1 * P));
            const double dT1_ds2 = -c1 * P1 * (a - 2.0 * u1 * P);
            const double dT2_ds2 = c2 * (-u2 * Q * Q + Q2 * (dd - 2.0 * u2 * Q));
            const double dT2_ds1 = -c2 * Q2 * (dd - 2.0 * u2 * Q);
            push_laplacian(*jac, 0, n, j, l1, 1.0, t * m1 * u1 - dT1_ds1);
            jac->emplace_back(static_cast<int>(j), static_cast<int>(n + j), -dT1_ds2 + kw * u2);
            push_laplacian(*jac, n, n, j, l2, dd, t * m2 * u2 - dT2_ds2);
            jac->emplace_back(static_cast<int>(n + j), static_cast<int>(j), -dT2_ds1 + a * kw * u1);
        }
    }

    // Decoupled t = 0 equation of one component; `second` selects the u2 twin.
    void decoupled(bool second, double k, const std::vector<double>& s, LogEval& e, std::vector<Triplet>* jac) const {
        const double a = alpha();
        const double dd = d();
        e.g.assign(n, 0.0);
        e.scale.assign(n, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = (*this->v)[j];
            const double kw = k * sys.omega[j];
            const double u = clamped_exp(s[j]);
            const double inv_u = clamped_exp(-s[j]);
            const LogLaplacianRow l = log_laplacian(s, 0, n, j, inv_h2);
            double forcing, coupling, coupling_scale, coupling_ds, coef;
            if (!second) {
                const double vp = std::max(v, 0.0);
                forcing = sys.mu1[j] / (a * a) * (a - vp) * vp;
                coupling = -kw / dd * (v - a * u);
                coupling_scale = kw / dd * (std::abs(v) + a * u);
                coupling_ds = kw / dd * a * u;
                coef = 1.0;
            } else {
                const double vm = std::max(-v, 0.0);
                forcing = sys.mu2[j] / (dd * dd) * (dd - vm) * vm;
                coupling = kw * (v + dd * u);
                coupling_scale = kw * (std::abs(v) + dd * u);
                coupling_ds = kw * dd * u;
                coef = dd;
            }
            e.g[j] = coef * l.value - forcing * inv_u + coupling;
            e.scale[j] = coef * l.scale + std::abs(forcing) * inv_u + coupling_scale;
            if (jac) push_laplacian(*jac, 0, n, j, l, coef, forcing * inv_u + coupling_ds);
        }
    }

    // alpha u1 - d u2 must keep both signs.
    bool sign_changing(const std::vector<double>& s) const {
        bool pos = false, neg = false;
        for (std::size_t j = 0; j < n; ++j) {
            const double w = alpha() * clamped_exp(s[j]) - d() * clamped_exp(s[n + j]);
            pos = pos || w > 0.0;
            neg = neg || w < 0.0;
        }
        return pos && neg;
    }

    // seg_distance is measured against `reference` (v by default).
    CoexistenceState make_state(const std::vector<double>& s, double t, double k, double residual, int iterations,
                                const Field* reference = nullptr) const {
        const Field* ref = reference ? reference : v;
        std::vector<double> l1(s.begin(), s.begin() + static_cast<long>(n));
        std::vector<double> l2(s.begin() + static_cast<long>(n), s.end());
        std::vector<double> u1(n), u2(n);
        double seg = 0.0, mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            u1[j] = std::exp(l1[j]);
            u2[j] = std::exp(l2[j]);
            if (ref) seg = std::max(seg, std::abs(alpha() * u1[j] - d() * u2[j] - (*ref)[j]));
            mass += u1[j] * u2[j];
        }
        CoexistenceState out{Field(grid, std::move(u1)), Field(grid, std::move(u2)), std::move(l1),
                             std::move(l2), k, t, residual, iterations, seg, mass * grid.spacing()};
        return out;
    }

    std::vector<double> segregated_guess(double eps0) const {
        std::vector<double> s(2 * n);
        for (std::size_t j = 0; j < n; ++j) {
            const double vj = (*v)[j];
            s[j] = std::log(std::max(vj, 0.0) / alpha() + eps0);
            s[n + j] = std::log(std::max(-vj, 0.0) / d() + eps0);
        }
        return s;
    }
};

void require_k(double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("k must be positive and finite");
}

}  // namespace

ScalarSolution newton_scalar(const Coefficients& c, double alpha, double d, const Field& z0,
                             const NewtonOptions& opts) {
    require_same_grid(z0, c.mu1);
    require_same_grid(z0, c.mu2);
    const std::size_t n = z0.size();
    const double h = z0.grid().spacing();
    const double inv_h2 = 1.0 / (h * h);

    ScalarSolution out{z0, 0.0, 0, {}};
    std::vector<double> r, r_trial;
    scalar_residual(out.z, c, alpha, d, r);
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    for (int it = 0;; ++it) {
        out.residual = sup_abs(r);
        out.history.push_back(out.residual);
        const double tol = std::max(opts.tolerance, 64.0 * kEps * out.z.sup_abs() * inv_h2);
        if (out.residual <= tol) return out;
        if (it >= opts.max_iterations)
            throw SolverFailure("newton_scalar: no convergence, history length " + std::to_string(out.history.size()),
                                out.residual, it);

        const SparseMatrix J = scalar_operator(f1_of(out.z, c, alpha, d));
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success)
            throw SolverFailure("newton_scalar: singular Jacobian, history length " +
                                    std::to_string(out.history.size()),
                                out.residual, it);
        Vector rhs(static_cast<int>(n));
        for (std::size_t j = 0; j < n; ++j) rhs[static_cast<int>(j)] = -r[j];
        const Vector step = lu.solve(rhs);

        const double m0 = l2sq(r);
        double lam = 1.0;
        bool accepted = false;
        std::vector<double> trial(n);
        for (int half = 0; half < 30; ++half) {
            for (std::size_t j = 0; j < n; ++j) trial[j] = out.z[j] + lam * step[static_cast<int>(j)];
            if (std::all_of(trial.begin(), trial.end(), [](double x) { return std::isfinite(x); })) {
                scalar_residual(Field(z0.grid(), trial), c, alpha, d, r_trial);
                if (l2sq(r_trial) < (1.0 - 1e-4 * lam) * m0) {
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        out.iterations = it + 1;
        if (!accepted)
            throw SolverFailure("newton_scalar: line search failed, history length " +
                                    std::to_string(out.history.size()),
                                out.residual, out.iterations);
        out.z = Field(z0.grid(), trial);
        r.swap(r_trial);
    }
}

ScalarSolution newton_scalar(const CoefficientProfile& profile, const Field& z0, const NewtonOptions& opts) {
    profile.validate();
    return newton_scalar(sample_coefficients(profile, z0.grid()), profile.alpha, profile.d, z0, opts);
}

SegregatedState polish(const SegregatedState& state, const NewtonOptions& opts) {
    SegregatedState out = state;
    out.v = newton_scalar(state.coefficients, state.profile.alpha, state.profile.d, state.v, opts).z;
    out.residual_l2 = residual_weak_form(out).strong_l2;
    return out;
}

TrackReport perturb_and_track(const Coefficients& perturbed, const SegregatedState& state,
                              const NewtonOptions& opts) {
    const double alpha = state.profile.alpha;
    const double d = state.profile.d;
    TrackReport rep;
    try {
        const ScalarSolution sol = newton_scalar(perturbed, alpha, d, state.v, opts);
        rep.z = sol.z;
        rep.residual = sol.residual;
        rep.iterations = sol.iterations;
    } catch (const SolverFailure& e) {
        rep.reason = e.what();
        rep.residual = e.last_residual();
        rep.iterations = e.iterations();
        return rep;
    }
    const Field& z = *rep.z;
    rep.distance = (z - state.v).sup_abs();
    if (!(z.max() > 0.0 && z.min() < 0.0)) {
        rep.reason = "tracked state is not sign-changing";
        return rep;
    }
    const Field q = f1_of(z, perturbed, alpha, d);
    rep.lambda_semilinear = principal_scalar(q).lambda;
    rep.lambda_quasilinear = principal_weighted(q, sigma_fields(z, d).first).lambda;
    if (!(rep.lambda_semilinear > 0.0) || !(rep.lambda_quasilinear > 0.0)) {
        rep.reason = "tracked state lost linear stability";
        return rep;
    }
    rep.inside = true;
    return rep;
}

TrackReport perturb_and_track(const CoefficientProfile& perturbed, const SegregatedState& state,
                              const NewtonOptions& opts) {
    perturbed.validate();
    return perturb_and_track(sample_coefficients(perturbed, state.grid), state, opts);
}

DecoupledReport solve_decoupled_t0(double k, const SegregatedState& v, const HomotopyOptions& opts) {
    require_k(k);
    const Problem pb(v);
    const std::size_t n = pb.n;
    const std::vector<double> guess = pb.segregated_guess(opts.eps0);
    std::vector<double> s1(guess.begin(), guess.begin() + static_cast<long>(n));
    std::vector<double> s2(guess.begin() + static_cast<long>(n), guess.end());
    const auto any = [](const std::vector<double>&) { return true; };
    int iterations = 0;
    double residual = 0.0;
    for (int c = 0; c < 2; ++c) {
        const bool second = c == 1;
        std::vector<double>& s = second ? s2 : s1;
        const LogNewtonOutcome o = log_newton(
            [&](const std::vector<double>& x, LogEval& e, std::vector<Triplet>* j) { pb.decoupled(second, k, x, e, j); },
            any, s, opts);
        if (!o.converged)
            throw SolverFailure(second ? "decoupled problem (u2)" : "decoupled problem (u1)", o.residual,
                                o.iterations);
        iterations += o.iterations;
        residual = std::max(residual, o.residual);
    }

    std::vector<double> s(s1);
    s.insert(s.end(), s2.begin(), s2.end());
    DecoupledReport rep{pb.make_state(s, 0.0, k, residual, iterations), 0.0, 0.0, 0.0, 0.0};
    const CoexistenceState& st = rep.state;
    rep.identity_error = st.seg_distance;
    rep.min_excess = std::numeric_limits<double>::infinity();
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) {
        rep.min_excess = std::min(rep.min_excess, pb.alpha() * st.u1[j] - std::max(v.v[j], 0.0));
        q[j] = k * pb.sys.omega[j] / pb.d() * (v.v[j] - 2.0 * pb.alpha() * st.u1[j]);
    }
    rep.lambda_scalar = principal_scalar(Field(v.grid, std::move(q))).lambda;
    LogEval e;
    pb.homotopy(0.0, k, s, e, nullptr);
    rep.coupled_residual = relative_residual(e);
    return rep;
}

CoexistenceState solve_homotopy(double t, double k, const CoexistenceState& guess, const SegregatedState& v,
                                const HomotopyOptions& opts) {
    require_k(k);
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("solve_homotopy: t must lie in [0, 1]");
    const Problem pb(v);
    if (guess.log_u1.size() != pb.n || guess.log_u2.size() != pb.n)
        throw InvalidArgument("solve_homotopy: guess lives on another grid");
    std::vector<double> s(guess.log_u1);
    s.insert(s.end(), guess.log_u2.begin(), guess.log_u2.end());
    const LogNewtonOutcome o = log_newton(
        [&](const std::vector<double>& x, LogEval& e, std::vector<Triplet>* j) { pb.homotopy(t, k, x, e, j); },
        [&](const std::vector<double>& x) { return pb.sign_changing(x); }, s, opts);
    if (!o.converged) throw SolverFailure("homotopy system", o.residual, o.iterations);
    return pb.make_state(s, t, k, o.residual, o.iterations);
}

CoexistenceState solve_system(double k, const Field& u1, const Field& u2, const SystemCoefficients& sys,
                              const HomotopyOptions& opts) {
    require_k(k);
    require_same_grid(u1, sys.mu1);
    require_same_grid(u2, sys.mu1);
    std::vector<double> s(2 * u1.size());
    for (std::size_t j = 0; j < u1.size(); ++j) {
        if (!(u1[j] > 0.0) || !(u2[j] > 0.0)) throw InvalidArgument("solve_system: guess must be positive");
        s[j] = std::log(u1[j]);
        s[u1.size() + j] = std::log(u2[j]);
    }
    const Field reference = sys.alpha * u1 - sys.d * u2;
    const Problem pb(sys, &reference);
    const LogNewtonOutcome o = log_newton(
        [&](const std::vector<double>& x, LogEval& e, std::vector<Triplet>* j) { pb.homotopy(1.0, k, x, e, j); },
        [&](const std::vector<double>& x) { return pb.sign_changing(x); }, s, opts);
    if (!o.converged) throw SolverFailure("competition system", o.residual, o.iterations);
    return pb.make_state(s, 1.0, k, o.residual, o.iterations);
}

std::vector<CoexistenceState> homotopy_path(double k, const SegregatedState& v, const HomotopyOptions& opts) {
    std::vector<CoexistenceState> path;
    path.push_back(solve_homotopy(0.0, k, solve_decoupled_t0(k, v, opts).state, v, opts));
    const double dt = 1.0 / std::max(opts.homotopy_steps, 1);
    for (int i = 1; i <= std::max(opts.homotopy_steps, 1); ++i) {
        const double target = i == opts.homotopy_steps ? 1.0 : i * dt;
        // Bisect the step toward `target` until it converges.
        double step = target - path.back().t;
        int refinements = 0;
        while (path.back().t < target) {
            const double next = std::min(path.back().t + step, target);
            try {
                path.push_back(solve_homotopy(next, k, path.back(), v, opts));
            } catch (const SolverFailure&) {
                if (++refinements > opts.max_refinements) throw;
                step *= 0.5;
            }
        }
    }
    return path;
}

std::pair<double, double> sup_bounds(const SegregatedState& v, double k, double eta) {
    const SystemCoefficients sys = system_coefficients(v.coefficients, v.profile.alpha, v.profile.d);
    const double a = sys.alpha;
    const double d = sys.d;
    // Both reaction terms of the homotopy family are bounded by mu_i / 4.
    const double c1 = sys.mu1.max() / 4.0;
    const double c2 = sys.mu2.max() / 4.0;
    const double kw = k * sys.omega.min();
    const double b1 = v.v.max() + eta;
    const double b2 = -v.v.min() + eta;
    return {(b1 + std::sqrt(b1 * b1 + 4.0 * a * d * c1 / kw)) / (2.0 * a),
            (b2 + std::sqrt(b2 * b2 + 4.0 * d * c2 / kw)) / (2.0 * d)};
}

ContinuationStep measure(const CoexistenceState& st, const SegregatedState& v, const EigenResult& weighted,
                         double eps_frac) {
    const SystemCoefficients sys = system_coefficients(v.coefficients, v.profile.alpha, v.profile.d);
    const double a = sys.alpha;
    const double d = sys.d;
    const std::size_t n = v.v.size();
    ContinuationStep out{st, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, true};

    const auto [vp, vm] = pos_neg_parts(v.v);
    const Field e1 = st.u1 - (1.0 / a) * vp;
    const Field e2 = st.u2 - (1.0 / d) * vm;
    const Norms n1 = norms(e1, 0.5);
    const Norms n2 = norms(e2, 0.5);
    out.h1_dist = std::hypot(n1.h1, n2.h1);
    out.holder_dist = std::max(n1.sup + n1.holder, n2.sup + n2.holder);
    out.lipschitz = std::max(norms(st.u1, 1.0).lipschitz, norms(st.u2, 1.0).lipschitz);
    const auto [b1, b2] = sup_bounds(v, st.k, st.seg_distance);
    out.sup_bound = std::max(b1, b2);

    double c = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        c = std::max(c, std::abs(sys.mu1[j] * (1.0 - 2.0 * st.u1[j])) + std::abs(sys.mu2[j] * (1.0 - 2.0 * st.u2[j])));
    out.lambda_lower = -c;

    const EigenResult eig = principal_system(st.u1, st.u2, st.k, sys);
    out.lambda_1k = eig.lambda;
    out.eigen_residual = eig.residual;
    const Field& phi = eig.eigenfunctions[0];
    const Field& psi = eig.eigenfunctions[1];
    const double eps_p = eps_frac * vp.max();
    const double eps_m = eps_frac * vm.max();
    const Field& Z = weighted.eigenfunctions[0];
    const double zmax = Z.max();
    for (std::size_t j = 0; j < n; ++j) {
        if (vm[j] > eps_m) out.decay_sup_phi = std::max(out.decay_sup_phi, phi[j]);
        if (vp[j] > eps_p) out.decay_sup_psi = std::max(out.decay_sup_psi, psi[j]);
        out.z_distance = std::max(out.z_distance, std::abs(a * phi[j] + d * psi[j] - Z[j] / zmax));
    }
    return out;
}

ContinuationResult continue_in_k(const std::vector<double>& k_schedule, const SegregatedState& v,
                                 const ContinuationOptions& opts) {
    if (k_schedule.empty()) throw InvalidArgument("continue_in_k: empty schedule");
    for (std::size_t i = 0; i < k_schedule.size(); ++i) {
        require_k(k_schedule[i]);
        if (i > 0 && !(k_schedule[i] > k_schedule[i - 1]))
            throw InvalidArgument("continue_in_k: schedule must be increasing");
    }
    const Problem pb(v);
    const Field q = f1_of(v.v, v.coefficients, v.profile.alpha, v.profile.d);
    const EigenResult weighted = principal_weighted(q, sigma_fields(v.v, v.profile.d).first);

    ContinuationResult res;
    res.lambda_weighted = weighted.lambda;
    std::optional<CoexistenceState> prev;
    for (double k : k_schedule) {
        std::optional<CoexistenceState> cur;
        bool direct = true;
        try {
            if (prev) {
                cur = solve_homotopy(1.0, k, *prev, v, opts.newton);
            } else {
                const std::vector<double> g = pb.segregated_guess(opts.newton.eps0);
                cur = solve_homotopy(1.0, k, pb.make_state(g, 1.0, k, 0.0, 0), v, opts.newton);
            }
        } catch (const SolverFailure&) {
            direct = false;
        }
        if (!cur) {
            try {
                if (prev) {
                    // Geometric refinement in log k between the last accepted state and k.
                    CoexistenceState last = *prev;
                    double ratio = k / last.k;
                    int refinements = 0;
                    while (last.k < k) {
                        const double next = std::min(last.k * ratio, k);
                        try {
                            last = solve_homotopy(1.0, next, last, v, opts.newton);
                        } catch (const SolverFailure&) {
                            if (++refinements > opts.newton.max_refinements) throw;
                            ratio = std::sqrt(ratio);
                        }
                    }
                    cur = last;
                } else {
                    cur = homotopy_path(k, v, opts.newton).back();
                }
            } catch (const SolverFailure& e) {
                res.failure = "k = " + std::to_string(k) + ": " + e.what();
                return res;
            }
        }
        ContinuationStep step = measure(*cur, v, weighted, opts.eps_frac);
        step.direct = direct;
        res.steps.push_back(std::move(step));
        prev = cur;
    }
    res.complete = true;
    return res;
}

double default_k0(const CoefficientProfile& p) {
    return 50.0 * std::max(p.M1, p.M2) * std::max(p.alpha, p.d);
}

}  // namespace perseg
