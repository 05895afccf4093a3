#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace perseg {

enum class CoefficientMode { two_patch, combined };

/// Piecewise-constant coefficient geometry on the unit cell.
///
/// On [0,1): mu1* = M1 on [0,r1) and [1-r1,1), mu2* = M2 on [r1+r0, r1+r0+2 r2),
/// zero elsewhere. Coefficients are stated for the normalized scalar equation
///   -z'' = mu1 (alpha - z) z^+ - mu2 (d + z) z^-.
struct CoefficientProfile {
    double r0 = 1.0 / 6.0;
    double r1 = 1.0 / 6.0;
    double r2 = 1.0 / 6.0;
    double M1 = 10.0;
    double M2 = 10.0;
    double alpha = 1.0;
    double d = 1.0;
    CoefficientMode mode = CoefficientMode::two_patch;
    double mollify_width = 0.0;  // fraction of L
    double mollify_floor = 1e-3; // only used when mollify_width > 0
    double omega_mean = 1.0;

    /// Throws ValidationError naming the offending key.
    void validate() const;

    /// The six breakpoints as fractions of the period, ascending, starting at 0.
    std::array<double, 6> breakpoints() const;

    bool symmetric(double tol = 1e-12) const;
};

/// Converts rates of the unnormalized scalar equation
///   -z'' = m1 (1 - z/alpha) z^+ - m2 (1 + z/d) z^-
/// to the normalized (M1, M2) = (m1/alpha, m2/d^2).
std::pair<double, double> normalize_rates(double m1, double m2, double alpha, double d);

/// Uniform node-centered grid x_j = j h, j = 0..n-1, on one periodicity cell.
class PeriodicGrid {
public:
    PeriodicGrid(double period, std::size_t n_nodes);

    double period() const noexcept { return period_; }
    std::size_t size() const noexcept { return n_; }
    double spacing() const noexcept { return period_ / static_cast<double>(n_); }
    double x(std::size_t j) const noexcept { return period_ * static_cast<double>(j) / static_cast<double>(n_); }

    /// True when every profile breakpoint coincides with a node (set by build_grid).
    bool aligned() const noexcept { return aligned_; }
    double max_snap_error() const noexcept { return max_snap_error_; }
    /// Nearest node of each breakpoint, same order as CoefficientProfile::breakpoints().
    const std::vector<std::size_t>& breakpoint_nodes() const noexcept { return breakpoint_nodes_; }

    bool same_cell(const PeriodicGrid& other) const noexcept {
        return n_ == other.n_ && period_ == other.period_;
    }

private:
    friend PeriodicGrid build_grid(double, std::size_t, const CoefficientProfile&);

    double period_;
    std::size_t n_;
    bool aligned_ = false;
    double max_snap_error_ = 0.0;
    std::vector<std::size_t> breakpoint_nodes_;
};

PeriodicGrid build_grid(double L, std::size_t n, const CoefficientProfile& profile);

/// Smallest m >= n for which all breakpoints of the profile fall on nodes.
/// Returns n itself when no such m exists within a bounded search.
std::size_t aligned_node_count(std::size_t n, const CoefficientProfile& profile);

/// Grid samples. Every value is finite; binary operations require the same cell.
class Field {
public:
    Field(PeriodicGrid grid, std::vector<double> values);

    static Field constant(const PeriodicGrid& grid, double c);
    template <class F>
    static Field from_function(const PeriodicGrid& grid, F&& f) {
        std::vector<double> v(grid.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(grid.x(j));
        return Field(grid, std::move(v));
    }

    const PeriodicGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t j) const noexcept { return values_[j]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::vector<double>& vector() const noexcept { return values_; }

    double max() const;
    double min() const;
    double sup_abs() const;
    /// h * sum of values.
    double integral() const;

    template <class F>
    Field map(F&& f) const {
        std::vector<double> v(values_.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(values_[j]);
        return Field(grid_, std::move(v));
    }

private:
    PeriodicGrid grid_;
    std::vector<double> values_;
};

void require_same_grid(const Field& a, const Field& b);

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator-(const Field& a);
Field operator*(double c, const Field& a);
Field operator*(const Field& a, double c);
/// Pointwise product.
Field operator*(const Field& a, const Field& b);

/// (f_{j-1} - 2 f_j + f_{j+1}) / h^2 with wrap-around.
Field laplacian(const Field& f);
void apply_laplacian(std::span<const double> f, double h, std::span<double> out);

struct Norms {
    double sup = 0.0;
    double l2 = 0.0;
    double h1 = 0.0;
    double holder = 0.0;
    double lipschitz = 0.0;
};

/// Hölder seminorm uses the periodic distance and scans all node pairs.
Norms norms(const Field& f, double gamma);
double holder_seminorm(const Field& f, double gamma);

std::pair<Field, Field> pos_neg_parts(const Field& f);

/// (sigma, sigma_hat) with sigma = 1 on z >= 0, 1/d on z < 0 and sigma_hat = 1 on z >= 0, d on z < 0.
std::pair<Field, Field> sigma_fields(const Field& z, double d);

struct Coefficients {
    Field mu1;
    Field mu2;
    Field omega;
};

/// Right-limit sampling of the scaled profile; mollified afterwards when mollify_width > 0.
Coefficients sample_coefficients(const CoefficientProfile& profile, const PeriodicGrid& grid);

/// Periodic convolution with a smooth bump of total support width*L, normalized to unit
/// discrete mass, followed by max(., floor).
Field mollify(const Field& f, double width, double floor = 0.0);

}  // namespace perseg
