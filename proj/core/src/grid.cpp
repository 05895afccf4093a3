#include "perseg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "perseg/error.hpp"

namespace perseg {

namespace {

constexpr double kAlignTol = 1e-9;

void require_positive(const char* key, double value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ValidationError(key, "must be positive and finite");
}

}  // namespace

void CoefficientProfile::validate() const {
    require_positive("r0", r0);
    require_positive("r1", r1);
    require_positive("r2", r2);
    if (std::abs(2.0 * (r0 + r1 + r2) - 1.0) > 1e-12)
        throw ValidationError("r2", "2 r0 + 2 r1 + 2 r2 must equal 1");
    require_positive("M1", M1);
    require_positive("M2", M2);
    require_positive("alpha", alpha);
    require_positive("d", d);
    require_positive("omega_mean", omega_mean);
    if (!(mollify_width >= 0.0) || !(mollify_width < 0.25))
        throw ValidationError("mollify_width", "must lie in [0, 0.25)");
    if (!(mollify_floor >= 0.0) || !std::isfinite(mollify_floor))
        throw ValidationError("mollify_floor", "must be nonnegative");
}

std::array<double, 6> CoefficientProfile::breakpoints() const {
    return {0.0, r1, r1 + r0, r1 + r0 + r2, r1 + r0 + 2.0 * r2, 1.0 - r1};
}

bool CoefficientProfile::symmetric(double tol) const {
    return std::abs(alpha - d) <= tol && std::abs(M1 - M2) <= tol && std::abs(r1 - r2) <= tol;
}

std::pair<double, double> normalize_rates(double m1, double m2, double alpha, double d) {
    if (!(alpha > 0.0) || !(d > 0.0)) throw InvalidArgument("normalize_rates: alpha and d must be positive");
    return {m1 / alpha, m2 / (d * d)};
}

PeriodicGrid::PeriodicGrid(double period, std::size_t n_nodes) : period_(period), n_(n_nodes) {
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidArgument("PeriodicGrid: period must be positive");
    if (n_nodes < 16) throw InvalidArgument("PeriodicGrid: at least 16 nodes required");
}

PeriodicGrid build_grid(double L, std::size_t n, const CoefficientProfile& profile) {
    PeriodicGrid grid(L, n);
    const double h = grid.spacing();
    grid.aligned_ = true;
    for (double b : profile.breakpoints()) {
        const double pos = b * static_cast<double>(n);
        const double nearest = std::round(pos);
        const double snap = std::abs(pos - nearest) * h;
        grid.max_snap_error_ = std::max(grid.max_snap_error_, snap);
        if (std::abs(pos - nearest) > kAlignTol * static_cast<double>(n)) grid.aligned_ = false;
        grid.breakpoint_nodes_.push_back(static_cast<std::size_t>(nearest) % n);
    }
    if (grid.aligned_) grid.max_snap_error_ = 0.0;
    return grid;
}

std::size_t aligned_node_count(std::size_t n, const CoefficientProfile& profile) {
    for (std::size_t m = std::max<std::size_t>(n, 16); m < n + 100000; ++m) {
        bool ok = true;
        for (double b : profile.breakpoints()) {
            const double pos = b * static_cast<double>(m);
            if (std::abs(pos - std::round(pos)) > kAlignTol * static_cast<double>(m)) {
                ok = false;
                break;
            }
        }
        if (ok) return m;
    }
    return n;
}

Field::Field(PeriodicGrid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InvalidArgument("Field: value count does not match grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidArgument("Field: nonfinite value");
}

Field Field::constant(const PeriodicGrid& grid, double c) {
    return Field(grid, std::vector<double>(grid.size(), c));
}

double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Field::sup_abs() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

double Field::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s * grid_.spacing();
}

void require_same_grid(const Field& a, const Field& b) {
    if (!a.grid().same_cell(b.grid())) throw InvalidArgument("fields live on different grids");
}

namespace {

template <class Op>
Field zip(const Field& a, const Field& b, Op op) {
    require_same_grid(a, b);
    std::vector<double> v(a.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = op(a[j], b[j]);
    return Field(a.grid(), std::move(v));
}

}  // namespace

Field operator+(const Field& a, const Field& b) { return zip(a, b, [](double x, double y) { return x + y; }); }
Field operator-(const Field& a, const Field& b) { return zip(a, b, [](double x, double y) { return x - y; }); }
Field operator*(const Field& a, const Field& b) { return zip(a, b, [](double x, double y) { return x * y; }); }
Field operator-(const Field& a) { return a.map([](double x) { return -x; }); }
Field operator*(double c, const Field& a) { return a.map([c](double x) { return c * x; }); }
Field operator*(const Field& a, double c) { return c * a; }

void apply_laplacian(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv_h2 = 1.0 / (h * h);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = f[j == 0 ? n - 1 : j - 1];
        const double right = f[j + 1 == n ? 0 : j + 1];
        out[j] = (left - 2.0 * f[j] + right) * inv_h2;
    }
}

Field laplacian(const Field& f) {
    std::vector<double> out(f.size());
    apply_laplacian(f.values(), f.grid().spacing(), out);
    return Field(f.grid(), std::move(out));
}

double holder_seminorm(const Field& f, double gamma) {
    if (!(gamma > 0.0) || !(gamma <= 1.0)) throw InvalidArgument("holder_seminorm: gamma must lie in (0,1]");
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    // Denominator depends only on the periodic index distance.
    std::vector<double> inv_dist(n / 2 + 1, 0.0);
    for (std::size_t m = 1; m <= n / 2; ++m) inv_dist[m] = 1.0 / std::pow(static_cast<double>(m) * h, gamma);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const std::size_t m = std::min(j - i, n - (j - i));
            best = std::max(best, std::abs(f[i] - f[j]) * inv_dist[m]);
        }
    }
    return best;
}

Norms norms(const Field& f, double gamma) {
    Norms out;
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    double sq = 0.0;
    double grad = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        out.sup = std::max(out.sup, std::abs(f[j]));
        sq += f[j] * f[j];
        const double df = (f[j + 1 == n ? 0 : j + 1] - f[j]) / h;
        grad += df * df;
    }
    out.l2 = std::sqrt(h * sq);
    out.h1 = std::sqrt(h * (sq + grad));
    out.holder = holder_seminorm(f, gamma);
    out.lipschitz = out.sup + (gamma == 1.0 ? out.holder : holder_seminorm(f, 1.0));
    return out;
}

std::pair<Field, Field> pos_neg_parts(const Field& f) {
    return {f.map([](double x) { return x > 0.0 ? x : 0.0; }), f.map([](double x) { return x < 0.0 ? -x : 0.0; })};
}

std::pair<Field, Field> sigma_fields(const Field& z, double d) {
    if (!(d > 0.0)) throw InvalidArgument("sigma_fields: d must be positive");
    return {z.map([d](double x) { return x < 0.0 ? 1.0 / d : 1.0; }), z.map([d](double x) { return x < 0.0 ? d : 1.0; })};
}

Coefficients sample_coefficients(const CoefficientProfile& profile, const PeriodicGrid& grid) {
    const std::size_t n = grid.size();
    const double nn = static_cast<double>(n);
    // Half-open patch membership [a, b) in node units; the tolerance makes aligned jump nodes exact.
    auto inside = [&](std::size_t j, double a, double b) {
        const double pos = static_cast<double>(j);
        return pos >= a * nn - kAlignTol * nn && pos < b * nn - kAlignTol * nn;
    };
    std::vector<double> m1(n, 0.0), m2(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double star1 = (inside(j, 0.0, profile.r1) || inside(j, 1.0 - profile.r1, 2.0)) ? profile.M1 : 0.0;
        const double lo2 = profile.r1 + profile.r0;
        const double star2 = inside(j, lo2, lo2 + 2.0 * profile.r2) ? profile.M2 : 0.0;
        if (profile.mode == CoefficientMode::two_patch) {
            m1[j] = star1;
            m2[j] = star2;
        } else {
            m1[j] = m2[j] = star1 + star2;
        }
    }
    Field mu1(grid, std::move(m1));
    Field mu2(grid, std::move(m2));
    Field omega = Field::constant(grid, profile.omega_mean);
    if (profile.mollify_width > 0.0) {
        mu1 = mollify(mu1, profile.mollify_width, profile.mollify_floor);
        mu2 = mollify(mu2, profile.mollify_width, profile.mollify_floor);
    }
    return {std::move(mu1), std::move(mu2), std::move(omega)};
}

Field mollify(const Field& f, double width, double floor) {
    if (!(width > 0.0) || !(width < 0.25)) throw InvalidArgument("mollify: width must lie in (0, 1/4)");
    if (!(floor >= 0.0)) throw InvalidArgument("mollify: floor must be nonnegative");
    const std::size_t n = f.size();
    const double h = f.grid().spacing();
    const double half = 0.5 * width * f.grid().period();
    const auto reach = static_cast<std::size_t>(std::ceil(half / h));
    std::vector<double> kernel;
    for (std::size_t m = 0; m <= reach; ++m) {
        const double s = static_cast<double>(m) * h / half;
        kernel.push_back(s < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0);
    }
    double mass = kernel[0];
    for (std::size_t m = 1; m < kernel.size(); ++m) mass += 2.0 * kernel[m];
    for (double& k : kernel) k /= mass;

    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = kernel[0] * f[j];
        for (std::size_t m = 1; m < kernel.size(); ++m) {
            if (kernel[m] == 0.0) continue;
            acc += kernel[m] * (f[(j + m) % n] + f[(j + n - m % n) % n]);
        }
        out[j] = std::max(acc, floor);
    }
    return Field(f.grid(), std::move(out));
}

}  // namespace perseg
