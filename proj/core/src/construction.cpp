#include "perseg/construction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <sstream>

#include "perseg/error.hpp"
#include "perseg/logistic.hpp"
#include "perseg/reaction.hpp"

namespace perseg {

namespace {

// Image values this close to 1 have a vanishing slope; phi itself requires nu < 1.
constexpr double kNuCeiling = 1.0 - 1e-12;

// Bisection for a sign change, f(lo) and f(hi) of opposite signs; absolute bracket width tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double f_lo, double tol, int max_iter) {
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double natural_length(const CoefficientProfile& p) {
    return 1.0 / (p.r1 * std::sqrt(p.alpha * p.M1));
}

// Root of a monotone map of L; the bracket grows geometrically from `start` within [1e-6, 1e6] * scale.
double find_length_root(const std::function<double(double)>& f, bool increasing, double start, double scale,
                        const ConstructionOptions& opts, const char* what) {
    double a = start;
    double fa = f(a);
    if (fa == 0.0) return a;
    // Root lies above `start` when f is still on its small-L side there.
    const double factor = ((fa < 0.0) == increasing) ? 2.0 : 0.5;
    double b = a;
    double fb = fa;
    while (true) {
        b = a * factor;
        if (b < 1e-6 * scale || b > 1e6 * scale) throw NoRoot(std::string(what) + ": no sign change in search window");
        fb = f(b);
        if ((fb > 0.0) != (fa > 0.0) || fb == 0.0) break;
        a = b;
        fa = fb;
    }
    if (a < b) return bisect(f, a, b, fa, opts.root_rtol * b, opts.max_bisect);
    return bisect(f, b, a, fb, opts.root_rtol * a, opts.max_bisect);
}

}  // namespace

double phi1(double nu, double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    return phi(p.alpha, p.M1, nu, p.r1 * L, opts.logistic_n);
}

double phi2(double nu, double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    if (nu >= kNuCeiling) return 0.0;
    return phi(p.d, p.M2, std::max(nu, 0.5), p.r2 * L, opts.logistic_n);
}

double delta(double nu, double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    if (!(L > 0.0)) throw InvalidArgument("delta: L must be positive");
    if (nu >= 1.0) return p.alpha;  // limit of the homeomorphism at nu -> 1
    return -phi1(nu, L, p, opts) * p.r0 * L + p.alpha * nu;
}

double find_L0(const CoefficientProfile& p, const ConstructionOptions& opts) {
    p.validate();
    const double scale = natural_length(p);
    return find_length_root([&](double L) { return delta(0.5, L, p, opts) + p.d; }, false, scale, scale, opts,
                            "find_L0");
}

NuBounds nu_bounds(double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    const double f_half = delta(0.5, L, p, opts) + p.d;
    if (!(f_half < 0.0)) throw DomainError("nu_bounds: L must exceed L0");
    NuBounds b;
    b.lower = bisect([&](double nu) { return delta(nu, L, p, opts) + p.d; }, 0.5, 1.0, f_half, opts.root_rtol,
                     opts.max_bisect);
    b.upper = bisect([&](double nu) { return delta(nu, L, p, opts) + 0.5 * p.d; }, 0.5, 1.0, f_half - 0.5 * p.d,
                     opts.root_rtol, opts.max_bisect);
    return b;
}

double psi(double nu, double L, const NuBounds& b, const CoefficientProfile& p, const ConstructionOptions& opts) {
    if (!(nu > b.lower) || !(nu <= b.upper)) throw DomainError("psi: nu outside (nu_lower, nu_upper]");
    if (nu == b.upper) return psi_at_upper(L, b, p, opts);
    const double image = -delta(nu, L, p, opts) / p.d;
    return phi1(nu, L, p, opts) - phi2(image, L, p, opts);
}

double psi(double nu, double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    return psi(nu, L, nu_bounds(L, p, opts), p, opts);
}

double psi_at_upper(double L, const NuBounds& b, const CoefficientProfile& p, const ConstructionOptions& opts) {
    return (p.alpha * b.upper + 0.5 * p.d) / (p.r0 * L) - phi2(0.5, L, p, opts);
}

double find_L_star(const CoefficientProfile& p, const ConstructionOptions& opts) {
    const double target = std::max(p.alpha + 0.5 * p.d, 0.5 * p.alpha + p.d) / p.r0;
    const double scale = 1.0 / (p.r2 * std::sqrt(p.d * p.M2));
    return find_length_root([&](double L) { return phi2(0.5, L, p, opts) * L - target; }, true, scale, scale, opts,
                            "find_L_star");
}

ThresholdReport find_L_threshold(const CoefficientProfile& p, const ConstructionOptions& opts) {
    ThresholdReport r;
    r.L0 = find_L0(p, opts);
    r.L_star = find_L_star(p, opts);
    auto g = [&](double L) { return psi_at_upper(L, nu_bounds(L, p, opts), p, opts); };

    double lo = r.L0 * (1.0 + 1e-7);
    double g_lo = g(lo);
    if (g_lo < 0.0) {
        r.L_bar = r.L0;
    } else {
        double hi = lo;
        double g_hi = g_lo;
        for (int i = 0; i < 60 && !(g_hi < 0.0); ++i) {
            lo = hi;
            g_lo = g_hi;
            hi *= 1.5;
            g_hi = g(hi);
        }
        if (!(g_hi < 0.0)) throw NoRoot("find_L_threshold: psi(nu_upper, L) never becomes negative");
        r.L_bar = bisect(g, lo, hi, g_lo, opts.root_rtol * hi, opts.max_bisect);
    }
    r.ordered = r.L0 <= r.L_bar && r.L_bar < r.L_star;
    return r;
}

MatchingData find_nu(double L, const CoefficientProfile& p, const ConstructionOptions& opts) {
    const NuBounds b = nu_bounds(L, p, opts);
    const double at_upper = psi_at_upper(L, b, p, opts);
    if (!(at_upper < 0.0)) throw DomainError("find_nu: L does not exceed the threshold L_bar");
    auto f = [&](double nu) {
        if (nu <= b.lower) return (p.alpha * b.lower + p.d) / (p.r0 * L);
        if (nu >= b.upper) return at_upper;
        return psi(nu, L, b, p, opts);
    };
    const double f_lo = (p.alpha * b.lower + p.d) / (p.r0 * L);
    MatchingData m;
    m.L = L;
    m.nu_lower = b.lower;
    m.nu_upper = b.upper;
    m.nu_star = bisect(f, b.lower, b.upper, f_lo, opts.root_rtol * 1e-2, opts.max_bisect);
    m.delta_at_nu = delta(m.nu_star, L, p, opts);
    m.nu_image = -m.delta_at_nu / p.d;
    m.phi1_at_nu = phi1(m.nu_star, L, p, opts);
    m.phi2_at_image = phi2(m.nu_image, L, p, opts);
    m.matching_residual = std::abs(m.phi1_at_nu - m.phi2_at_image);
    return m;
}

std::vector<std::size_t> SegregatedState::glue_nodes() const {
    std::vector<std::size_t> out;
    for (const auto& g : glue) out.push_back(g.node);
    return out;
}

SegregatedState assemble_v(double L, const CoefficientProfile& profile, std::size_t n,
                           const ConstructionOptions& opts) {
    return assemble_v(find_nu(L, profile, opts), profile, n, opts);
}

SegregatedState assemble_v(const MatchingData& m, const CoefficientProfile& profile, std::size_t n,
                           const ConstructionOptions& opts) {
    const double L = m.L;
    PeriodicGrid grid = build_grid(L, n, profile);
    if (!grid.aligned()) throw AssemblyError("assemble_v: breakpoints do not fall on grid nodes");
    const auto& bp = grid.breakpoint_nodes();
    const auto N = static_cast<long>(n);
    const long pa = static_cast<long>(bp[1]), pb = static_cast<long>(bp[2]), pc = static_cast<long>(bp[3]);
    const long pd = static_cast<long>(bp[4]), pe = static_cast<long>(bp[5]);
    const long p1 = pa, p2 = pc - pb;
    if (p1 < 2 || p2 < 2 || pb - pa < 2 || pe - pd < 2)
        throw AssemblyError("assemble_v: every piece needs at least two grid intervals");
    const double h = grid.spacing();

    // Logistic profiles on grids whose nodes include the periodic nodes.
    const auto refine = [&](long half) {
        return std::max<long>(1, static_cast<long>(std::ceil(static_cast<double>(opts.logistic_n) / (2.0 * half))));
    };
    const long m1 = refine(p1), m2 = refine(p2);
    const LogisticProfile w1 =
        solve_profile(profile.alpha, profile.M1, m.nu_star, profile.r1 * L, static_cast<std::size_t>(2 * p1 * m1));
    const LogisticProfile w2 =
        solve_profile(profile.d, profile.M2, m.nu_image, profile.r2 * L, static_cast<std::size_t>(2 * p2 * m2));
    const double top = m.nu_star * profile.alpha;
    const double slope = m.phi1_at_nu;

    // Piece k evaluated at the unwrapped node index J.
    const auto piece = [&](int k, long J) -> double {
        switch (k) {
            case 1: return w1.values.at(static_cast<std::size_t>((J + p1) * m1));
            case 2: return -slope * static_cast<double>(J - pa) * h + top;
            case 3: return -w2.values.at(static_cast<std::size_t>((J - pc + p2) * m2));
            case 4: return slope * static_cast<double>(J - pe) * h + top;
            default: return w1.values.at(static_cast<std::size_t>((J - N + p1) * m1));
        }
    };

    std::vector<double> v(n);
    for (long j = 0; j < N; ++j) {
        int k = 5;
        if (j < pa) k = 1;
        else if (j < pb) k = 2;
        else if (j < pd) k = 3;
        else if (j < pe) k = 4;
        v[static_cast<std::size_t>(j)] = piece(k, j);
    }

    CoefficientProfile sharp = profile;
    sharp.mollify_width = 0.0;
    SegregatedState s{grid, Field(grid, std::move(v)), m, profile, sample_coefficients(sharp, grid), {}, 0.0};

    const std::array<std::array<long, 3>, 5> glue{{{pa, 1, 2}, {pb, 2, 3}, {pd, 3, 4}, {pe, 4, 5}, {N, 5, 1}}};
    for (const auto& [J, left, right] : glue) {
        const long Jr = right == 1 ? 0 : J;
        const double vl = piece(static_cast<int>(left), J);
        const double vr = piece(static_cast<int>(right), Jr);
        const double sl = (3.0 * vl - 4.0 * piece(static_cast<int>(left), J - 1) + piece(static_cast<int>(left), J - 2)) / (2.0 * h);
        const double sr = (-3.0 * vr + 4.0 * piece(static_cast<int>(right), Jr + 1) - piece(static_cast<int>(right), Jr + 2)) / (2.0 * h);
        GluePoint gp{static_cast<std::size_t>(J % N), std::abs(vl - vr), std::abs(sl - sr)};
        if (gp.value_jump > 10.0 * h || gp.slope_jump > 10.0 * h) {
            std::ostringstream msg;
            msg << "assemble_v: glue point at node " << gp.node << " jumps by " << gp.value_jump << " (value), "
                << gp.slope_jump << " (slope)";
            throw AssemblyError(msg.str());
        }
        s.glue.push_back(gp);
    }
    s.residual_l2 = residual_weak_form(s).strong_l2;
    return s;
}

Field strong_residual(const Field& v, const Coefficients& c, double alpha, double d) {
    const Field lap = laplacian(v);
    std::vector<double> r(v.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        r[j] = -lap[j] - bistable_reaction(v[j], c.mu1[j], c.mu2[j], alpha, d);
    return Field(v.grid(), std::move(r));
}

WeakResidual residual_weak_form(const Field& v, const Coefficients& c, double alpha, double d,
                                const std::vector<std::size_t>& excluded) {
    require_same_grid(v, c.mu1);
    require_same_grid(v, c.mu2);
    const std::size_t n = v.size();
    const double h = v.grid().spacing();
    const Field r = strong_residual(v, c, alpha, d);

    std::vector<bool> skip(n, false);
    for (std::size_t g : excluded) {
        skip[g % n] = true;
        skip[(g + 1) % n] = true;
        skip[(g + n - 1) % n] = true;
    }
    WeakResidual out;
    double sq = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (skip[j]) continue;
        sq += r[j] * r[j];
        out.strong_sup = std::max(out.strong_sup, std::abs(r[j]));
    }
    out.strong_l2 = std::sqrt(h * sq);

    // Three-point Gauss rule per cell; cell [x_j, x_{j+1}) carries the coefficients of node j.
    const std::array<double, 3> gx{0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
    const std::array<double, 3> gw{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    std::vector<double> load(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = (j + 1) % n;
        for (std::size_t q = 0; q < 3; ++q) {
            const double z = (1.0 - gx[q]) * v[j] + gx[q] * v[k];
            const double g = bistable_reaction(z, c.mu1[j], c.mu2[j], alpha, d) * gw[q] * h;
            load[j] += g * (1.0 - gx[q]);
            load[k] += g * gx[q];
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double stiff = (2.0 * v[j] - v[(j + n - 1) % n] - v[(j + 1) % n]) / h;
        out.weak_max = std::max(out.weak_max, std::abs(stiff - load[j]));
    }
    return out;
}

WeakResidual residual_weak_form(const SegregatedState& s) {
    return residual_weak_form(s.v, s.coefficients, s.profile.alpha, s.profile.d, s.glue_nodes());
}

}  // namespace perseg
