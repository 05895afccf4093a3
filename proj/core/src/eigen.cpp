#include "perseg/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "perseg/error.hpp"
#include "perseg/reaction.hpp"

namespace perseg {

namespace {

using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;

constexpr double kExpClamp = 700.0;
constexpr double kTiny = 1e-280;

double clamped_exp(double a) { return std::exp(std::clamp(a, -kExpClamp, kExpClamp)); }

void add_periodic_laplacian(std::vector<Triplet>& t, std::size_t offset, std::size_t n, double coef, double h) {
    const double c = coef / (h * h);
    for (std::size_t j = 0; j < n; ++j) {
        const auto row = static_cast<int>(offset + j);
        t.emplace_back(row, row, 2.0 * c);
        t.emplace_back(row, static_cast<int>(offset + (j + n - 1) % n), -c);
        t.emplace_back(row, static_cast<int>(offset + (j + 1) % n), -c);
    }
}

// Off-diagonal entries of the Jacobian of the log-eigenvector residual
//   G_i(s, lambda) = sum_{j != i} A_ij e^{s_j - s_i} + A_ii - lambda w_i.
struct LogResidual {
    const SparseMatrix& A; // column-major
    std::span<const double> w;

    // Row-wise view for residual evaluation.
    SparseMatrix rows;

    LogResidual(const SparseMatrix& a, std::span<const double> weight) : A(a), w(weight), rows(a.transpose()) {}

    void eval(const std::vector<double>& s, double lambda, std::vector<double>& g, std::vector<double>& scale) const {
        const auto N = static_cast<std::size_t>(A.rows());
        g.assign(N, 0.0);
        scale.assign(N, 0.0);
        for (int col = 0; col < rows.outerSize(); ++col) {
            const auto i = static_cast<std::size_t>(col);
            double acc = -lambda * w[i];
            double mag = std::abs(lambda * w[i]);
            for (SparseMatrix::InnerIterator it(rows, col); it; ++it) {
                const auto j = static_cast<std::size_t>(it.index());
                const double term = j == i ? it.value() : it.value() * clamped_exp(s[j] - s[i]);
                acc += term;
                mag += std::abs(term);
            }
            g[i] = acc;
            scale[i] = mag;
        }
    }
};

double sup_residual(const std::vector<double>& g, const std::vector<double>& s, double lambda) {
    const double smax = *std::max_element(s.begin(), s.end());
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r = std::max(r, std::abs(g[i]) * clamped_exp(s[i] - smax));
    return r / (std::abs(lambda) + 1.0);
}

// Newton polish of (s, lambda) with s_{anchor} fixed.
void polish_log(const SparseMatrix& A, std::span<const double> w, std::vector<double>& s, double& lambda,
                int& iterations, double& residual) {
    const auto N = static_cast<std::size_t>(A.rows());
    const LogResidual res(A, w);
    const auto anchor = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
    const double s_anchor = s[anchor];
    std::vector<double> g, scale, g_trial, scale_trial;
    res.eval(s, lambda, g, scale);
    auto merit = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x * x;
        return m;
    };
    double m0 = merit(g);
    Eigen::SparseLU<SparseMatrix> lu;
    bool analyzed = false;
    for (int it = 0; it < 60; ++it) {
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i) worst = std::max(worst, std::abs(g[i]) / std::max(scale[i], 1e-300));
        if (worst <= 1e-14) break;

        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(A.nonZeros()) + 2 * N + 1);
        for (int col = 0; col < res.rows.outerSize(); ++col) {
            const auto i = static_cast<std::size_t>(col);
            double diag = 0.0;
            for (SparseMatrix::InnerIterator e(res.rows, col); e; ++e) {
                const auto j = static_cast<std::size_t>(e.index());
                if (j == i) continue;
                const double term = e.value() * clamped_exp(s[j] - s[i]);
                t.emplace_back(col, static_cast<int>(j), term);
                diag -= term;
            }
            t.emplace_back(col, col, diag);
            t.emplace_back(col, static_cast<int>(N), -w[i]);
        }
        t.emplace_back(static_cast<int>(N), static_cast<int>(anchor), 1.0);
        SparseMatrix J(static_cast<int>(N + 1), static_cast<int>(N + 1));
        J.setFromTriplets(t.begin(), t.end());
        J.makeCompressed();
        if (!analyzed) {
            lu.analyzePattern(J);
            analyzed = true;
        }
        lu.factorize(J);
        if (lu.info() != Eigen::Success) break;
        Vector rhs(static_cast<int>(N + 1));
        for (std::size_t i = 0; i < N; ++i) rhs[static_cast<int>(i)] = -g[i];
        rhs[static_cast<int>(N)] = s_anchor - s[anchor];
        const Vector step = lu.solve(rhs);

        double alpha = 1.0;
        bool accepted = false;
        std::vector<double> s_trial(N);
        double lambda_trial = lambda;
        for (int half = 0; half < 30; ++half) {
            for (std::size_t i = 0; i < N; ++i) s_trial[i] = s[i] + alpha * step[static_cast<int>(i)];
            lambda_trial = lambda + alpha * step[static_cast<int>(N)];
            res.eval(s_trial, lambda_trial, g_trial, scale_trial);
            if (merit(g_trial) < m0) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        ++iterations;
        if (!accepted) break;
        s.swap(s_trial);
        lambda = lambda_trial;
        g.swap(g_trial);
        scale.swap(scale_trial);
        m0 = merit(g);
    }
    residual = sup_residual(g, s, lambda);
}

std::vector<double> normalized_log(std::vector<double> s) {
    const double m = *std::max_element(s.begin(), s.end());
    for (double& x : s) x -= m;
    return s;
}

}  // namespace

const char* to_string(Sense s) {
    switch (s) {
        case Sense::semilinear: return "semilinear";
        case Sense::quasilinear: return "quasilinear";
        case Sense::system: return "system";
        case Sense::dirichlet: return "dirichlet";
    }
    return "unknown";
}

Field f1_of(const Field& v, const Coefficients& c, double alpha, double d) {
    require_same_grid(v, c.mu1);
    require_same_grid(v, c.mu2);
    std::vector<double> q(v.size());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = bistable_derivative(v[j], c.mu1[j], c.mu2[j], alpha, d);
    return Field(v.grid(), std::move(q));
}

SparseMatrix scalar_operator(const Field& q) {
    const std::size_t n = q.size();
    std::vector<Triplet> t;
    t.reserve(3 * n + n);
    add_periodic_laplacian(t, 0, n, 1.0, q.grid().spacing());
    for (std::size_t j = 0; j < n; ++j) t.emplace_back(static_cast<int>(j), static_cast<int>(j), -q[j]);
    SparseMatrix A(static_cast<int>(n), static_cast<int>(n));
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

SparseMatrix system_operator(std::span<const double> u1, std::span<const double> u2, double k,
                             const SystemCoefficients& sys, bool cooperative) {
    const std::size_t n = sys.mu1.size();
    if (u1.size() != n || u2.size() != n) throw InvalidArgument("system_operator: size mismatch");
    const double h = sys.mu1.grid().spacing();
    std::vector<Triplet> t;
    t.reserve(10 * n);
    add_periodic_laplacian(t, 0, n, 1.0, h);
    add_periodic_laplacian(t, n, n, sys.d, h);
    const double sign = cooperative ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const auto a = static_cast<int>(j);
        const auto b = static_cast<int>(n + j);
        const double kw = k * sys.omega[j];
        t.emplace_back(a, a, -sys.mu1[j] * (1.0 - 2.0 * u1[j]) + kw * u2[j]);
        t.emplace_back(b, b, -sys.mu2[j] * (1.0 - 2.0 * u2[j]) + sys.alpha * kw * u1[j]);
        t.emplace_back(a, b, sign * kw * u1[j]);
        t.emplace_back(b, a, sign * sys.alpha * kw * u2[j]);
    }
    SparseMatrix A(static_cast<int>(2 * n), static_cast<int>(2 * n));
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

SparseMatrix dirichlet_operator(const Field& q, std::size_t start, std::size_t cells) {
    const std::size_t n = q.size();
    if (cells == 0) throw InvalidArgument("dirichlet_operator: cells must be positive");
    const std::size_t m = cells * n - 1;
    const double c = 1.0 / (q.grid().spacing() * q.grid().spacing());
    std::vector<Triplet> t;
    t.reserve(3 * m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto r = static_cast<int>(i);
        t.emplace_back(r, r, 2.0 * c - q[(start + 1 + i) % n]);
        if (i > 0) t.emplace_back(r, r - 1, -c);
        if (i + 1 < m) t.emplace_back(r, r + 1, -c);
    }
    SparseMatrix A(static_cast<int>(m), static_cast<int>(m));
    A.setFromTriplets(t.begin(), t.end());
    A.makeCompressed();
    return A;
}

ZMatrixEigen principal_zmatrix(const SparseMatrix& A, std::span<const double> w, const EigenOptions& opts,
                               std::optional<std::vector<double>> log_guess) {
    const auto N = static_cast<std::size_t>(A.rows());
    if (A.cols() != A.rows() || w.size() != N) throw InvalidArgument("principal_zmatrix: shape mismatch");
    for (double wi : w)
        if (!(wi > 0.0)) throw InvalidArgument("principal_zmatrix: weights must be positive");

    // Gershgorin lower bound of diag(w)^{-1} A, widened by 10 percent.
    const SparseMatrix rows = A.transpose();
    double gersh = std::numeric_limits<double>::infinity();
    for (int col = 0; col < rows.outerSize(); ++col) {
        double diag = 0.0, off = 0.0;
        for (SparseMatrix::InnerIterator it(rows, col); it; ++it) {
            if (it.index() == col) diag += it.value();
            else off += std::abs(it.value());
        }
        gersh = std::min(gersh, (diag - off) / w[static_cast<std::size_t>(col)]);
    }
    double sigma = gersh - 0.1 * std::max(std::abs(gersh), 1.0);

    Vector x = Vector::Ones(static_cast<int>(N));
    if (log_guess && log_guess->size() == N) {
        const auto lg = normalized_log(*log_guess);
        for (std::size_t i = 0; i < N; ++i) x[static_cast<int>(i)] = std::exp(lg[i]);
    }
    Vector W(static_cast<int>(N));
    for (std::size_t i = 0; i < N; ++i) W[static_cast<int>(i)] = w[i];

    Eigen::SparseLU<SparseMatrix> lu;
    SparseMatrix shifted = A;
    for (int i = 0; i < static_cast<int>(N); ++i) shifted.coeffRef(i, i) += 0.0;  // pattern includes the diagonal
    lu.analyzePattern(shifted);

    ZMatrixEigen out;
    double lo = sigma;
    double last_spread = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Vector y = A * x;
        lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < N; ++i) {
            const double xi = x[static_cast<int>(i)];
            if (xi < kTiny) continue;
            const double r = y[static_cast<int>(i)] / (w[i] * xi);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        const double spread = hi - lo;
        if (spread <= 1e-12 * (1.0 + std::abs(lo))) break;
        // Ratios carry rounding of order eps / h^2; once that floor is reached the Newton polish takes over.
        if (spread <= 1e-8 * (1.0 + std::abs(lo)) && spread >= 0.25 * last_spread) break;
        last_spread = spread;
        const double candidate = lo - 0.01 * (hi - lo);
        if (candidate > sigma) sigma = candidate;
        SparseMatrix M = A;
        for (int i = 0; i < static_cast<int>(N); ++i) M.coeffRef(i, i) -= sigma * W[i];
        lu.factorize(M);
        if (lu.info() != Eigen::Success) {
            sigma -= 1e-8 * (1.0 + std::abs(sigma));
            continue;
        }
        Vector z = lu.solve(W.cwiseProduct(x));
        Eigen::Index imax = 0;
        z.cwiseAbs().maxCoeff(&imax);
        z /= z[imax];
        for (int i = 0; i < z.size(); ++i) z[i] = std::max(z[i], 0.0);
        if (!z.allFinite()) throw SolverFailure("principal eigenpair: nonfinite iterate", hi - lo, it);
        x = z;
        // Noda shifts converge superlinearly; stagnation means a defective bracket.
        if (it > 500 && hi - lo > 1e-6 * (1.0 + std::abs(lo)))
            throw SolverFailure("principal eigenpair: shift-invert stagnation", hi - lo, it);
    }
    if (it >= opts.max_iterations) throw SolverFailure("principal eigenpair: iteration limit", 0.0, it);

    std::vector<double> s(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double xi = x[static_cast<int>(i)];
        s[i] = std::log(std::max(xi, kTiny));
    }
    double lambda = lo;
    int polish_its = 0;
    double residual = 0.0;
    polish_log(A, w, s, lambda, polish_its, residual);
    out.lambda = lambda;
    out.log_x = normalized_log(std::move(s));
    out.residual = residual;
    out.iterations = it + polish_its;
    if (!(residual <= opts.tolerance))
        throw SolverFailure("principal eigenpair: residual above tolerance", residual, out.iterations);
    return out;
}

namespace {

EigenResult scalar_result(const ZMatrixEigen& z, const PeriodicGrid& grid, Sense sense) {
    EigenResult r;
    r.lambda = z.lambda;
    r.residual = z.residual;
    r.iterations = z.iterations;
    r.sense = sense;
    std::vector<double> vals(z.log_x.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::exp(z.log_x[i]);
    r.eigenfunctions.emplace_back(grid, std::move(vals));
    r.log_eigenfunctions.push_back(z.log_x);
    return r;
}

}  // namespace

EigenResult principal_scalar(const Field& q, const EigenOptions& opts) {
    const std::vector<double> w(q.size(), 1.0);
    return scalar_result(principal_zmatrix(scalar_operator(q), w, opts), q.grid(), Sense::semilinear);
}

EigenResult principal_weighted(const Field& q, const Field& weight, const EigenOptions& opts) {
    require_same_grid(q, weight);
    for (double x : weight.values())
        if (!(x > 0.0)) throw InvalidArgument("principal_weighted: weight must be positive");
    return scalar_result(principal_zmatrix(scalar_operator(q), weight.values(), opts), q.grid(), Sense::quasilinear);
}

EigenResult principal_system(const Field& u1, const Field& u2, double k, const SystemCoefficients& sys,
                             const EigenOptions& opts) {
    require_same_grid(u1, u2);
    require_same_grid(u1, sys.mu1);
    if (!(k > 0.0)) throw InvalidArgument("principal_system: k must be positive");
    for (std::size_t j = 0; j < u1.size(); ++j)
        if (u1[j] < 0.0 || u2[j] < 0.0) throw InvalidArgument("principal_system: components must be nonnegative");
    const std::size_t n = u1.size();
    const std::vector<double> w(2 * n, 1.0);
    const ZMatrixEigen z = principal_zmatrix(system_operator(u1.values(), u2.values(), k, sys, true), w, opts);

    // Normalize max(alpha phi + d psi) = 1 in log form.
    std::vector<double> lp(z.log_x.begin(), z.log_x.begin() + static_cast<long>(n));
    std::vector<double> lq(z.log_x.begin() + static_cast<long>(n), z.log_x.end());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::log(sys.alpha) + lp[j];
        const double b = std::log(sys.d) + lq[j];
        const double m = std::max(a, b);
        top = std::max(top, m + std::log1p(std::exp(std::min(a, b) - m)));
    }
    for (auto* v : {&lp, &lq})
        for (double& x : *v) x -= top;

    EigenResult r;
    r.lambda = z.lambda;
    r.residual = z.residual;
    r.iterations = z.iterations;
    r.sense = Sense::system;
    for (const auto* v : {&lp, &lq}) {
        std::vector<double> vals(n);
        for (std::size_t j = 0; j < n; ++j) vals[j] = std::exp((*v)[j]);
        r.eigenfunctions.emplace_back(u1.grid(), std::move(vals));
        r.log_eigenfunctions.push_back(*v);
    }
    return r;
}

EigenResult principal_dirichlet(const Field& q, double y, std::size_t cells, const EigenOptions& opts) {
    const std::size_t n = q.size();
    const double h = q.grid().spacing();
    const double L = q.grid().period();
    double frac = std::fmod(y, L);
    if (frac < 0.0) frac += L;
    const auto start = static_cast<std::size_t>(std::llround(frac / h)) % n;
    const SparseMatrix A = dirichlet_operator(q, start, cells);
    const std::vector<double> w(static_cast<std::size_t>(A.rows()), 1.0);
    const ZMatrixEigen z = principal_zmatrix(A, w, opts);

    EigenResult r;
    r.lambda = z.lambda;
    r.residual = z.residual;
    r.iterations = z.iterations;
    r.sense = Sense::dirichlet;
    std::vector<double> vals(cells * n, 0.0);
    std::vector<double> logs(cells * n, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < z.log_x.size(); ++i) {
        vals[i + 1] = std::exp(z.log_x[i]);
        logs[i + 1] = z.log_x[i];
    }
    r.eigenfunctions.emplace_back(PeriodicGrid(static_cast<double>(cells) * L, cells * n), std::move(vals));
    r.log_eigenfunctions.push_back(std::move(logs));
    return r;
}

double gradient_energy(const Field& phi, const Field& weight) {
    require_same_grid(phi, weight);
    const std::size_t n = phi.size();
    double grad = 0.0, mass = 0.0;
    const double h = phi.grid().spacing();
    for (std::size_t j = 0; j < n; ++j) {
        const double d = (phi[(j + 1) % n] - phi[j]) / h;
        grad += d * d;
        mass += weight[j] * phi[j] * phi[j];
    }
    return grad / mass;
}

}  // namespace perseg
