#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace perseg {

/// Periodic tridiagonal matrix: row i reads lower[i] x_{i-1} + diag[i] x_i + upper[i] x_{i+1},
/// indices modulo n. Factorized by pivot-free elimination with the last unknown as border.
/// For M-matrices every intermediate keeps its sign, so nonnegative data give nonnegative solutions.
class CyclicTridiagonal {
public:
    CyclicTridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper);

    std::size_t size() const noexcept { return n_; }
    void solve(std::span<const double> rhs, std::span<double> x) const;
    std::vector<double> solve(std::span<const double> rhs) const;

private:
    std::size_t n_;
    std::vector<double> upper_;
    std::vector<double> pivot_;     // eliminated diagonal of rows 0..n-2
    std::vector<double> border_;    // coefficient of x_{n-1} in rows 0..n-2
    std::vector<double> mult_;      // row multipliers
    std::vector<double> last_mult_; // multipliers applied to the last row
    double last_pivot_ = 0.0;
};

/// Thomas algorithm for a non-periodic tridiagonal system; lower[0] and upper[n-1] are ignored.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag, std::span<const double> upper,
                       std::span<const double> rhs, std::span<double> x);

}  // namespace perseg
