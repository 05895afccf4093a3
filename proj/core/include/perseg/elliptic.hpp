#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "perseg/construction.hpp"
#include "perseg/eigen.hpp"
#include "perseg/grid.hpp"
#include "perseg/system.hpp"

namespace perseg {

struct NewtonOptions {
    int max_iterations = 100;
    /// Residual target; raised to the rounding floor of the discrete Laplacian when that is larger.
    double tolerance = 1e-10;
};

struct ScalarSolution {
    Field z;
    double residual = 0.0; // sup of -z'' - f(z, x)
    int iterations = 0;
    std::vector<double> history; // sup residual before each step
};

/// Semismooth Newton for -z'' = mu1 (alpha - z) z^+ - mu2 (d + z) z^-, with the almost-everywhere
/// derivative (zero at exact zeros) as Jacobian diagonal. Throws SolverFailure on divergence.
ScalarSolution newton_scalar(const Coefficients& coeffs, double alpha, double d, const Field& z0,
                             const NewtonOptions& opts = {});
ScalarSolution newton_scalar(const CoefficientProfile& profile, const Field& z0, const NewtonOptions& opts = {});

/// Copy of the state whose v is replaced by the discrete steady state nearest to it.
SegregatedState polish(const SegregatedState& state, const NewtonOptions& opts = {});

struct TrackReport {
    std::optional<Field> z; // empty when Newton fails
    bool inside = false;    // converged, sign-changing, both senses stable
    double lambda_semilinear = 0.0;
    double lambda_quasilinear = 0.0;
    double distance = 0.0; // sup |z - v|
    double residual = 0.0;
    int iterations = 0;
    std::string reason; // why the perturbation left the neighborhood; empty when inside
};

/// Newton from v under new coefficients, followed by the stability checks in both senses.
TrackReport perturb_and_track(const Coefficients& perturbed, const SegregatedState& state,
                              const NewtonOptions& opts = {});
/// Samples the profile (mollified when its width is positive) on the state's grid.
TrackReport perturb_and_track(const CoefficientProfile& perturbed, const SegregatedState& state,
                              const NewtonOptions& opts = {});

/// Positive solution pair of the homotopy family at (t, k). Logarithms are kept because the
/// component living in the other's territory decays like exp(-sqrt(k) x).
struct CoexistenceState {
    Field u1;
    Field u2;
    std::vector<double> log_u1;
    std::vector<double> log_u2;
    double k = 0.0;
    double t = 1.0;
    double newton_residual = 0.0; // sup of the equations divided by the component
    int iterations = 0;
    double seg_distance = 0.0;    // sup |alpha u1 - d u2 - v|
    double product_mass = 0.0;    // h sum u1 u2
};

struct HomotopyOptions {
    int max_iterations = 200;
    /// Relative residual target: sup_j |G_j| / (1 + magnitude of the terms of G_j).
    double tolerance = 1e-11;
    /// Largest change of a logarithm per Newton step.
    double max_log_step = 30.0;
    /// Offset of the initial guess (v^+/alpha + eps0, v^-/d + eps0).
    double eps0 = 1e-4;
    int homotopy_steps = 10;
    /// Maximal number of bisections of a failing k or t step.
    int max_refinements = 8;
};

/// The u1 equation of the decoupled problem, -u'' = mu1/alpha^2 (alpha - v^+) v^+ + k omega/d u (v - alpha u),
/// and its u2 twin, each solved for a positive solution.
struct DecoupledReport {
    CoexistenceState state;
    double identity_error = 0.0;   // sup |alpha u1 - d u2 - v|
    double min_excess = 0.0;       // min (alpha u1 - v^+)
    double lambda_scalar = 0.0;    // principal eigenvalue of -D^2 - k omega/d (v - 2 alpha u1)
    double coupled_residual = 0.0; // residual of the t = 0 system at the pair
};

DecoupledReport solve_decoupled_t0(double k, const SegregatedState& v, const HomotopyOptions& opts = {});

/// Newton on both components of the homotopy system at parameter t.
CoexistenceState solve_homotopy(double t, double k, const CoexistenceState& guess, const SegregatedState& v,
                                const HomotopyOptions& opts = {});

/// Newton on the competition system (t = 1) from a positive guess, without a segregated reference;
/// seg_distance is then measured against alpha u1 - d u2 of the guess.
CoexistenceState solve_system(double k, const Field& u1, const Field& u2, const SystemCoefficients& sys,
                              const HomotopyOptions& opts = {});

/// Path from the decoupled solution at t = 0 to t = 1 in `opts.homotopy_steps` equal steps, each
/// bisected on failure. Returns every accepted point.
std::vector<CoexistenceState> homotopy_path(double k, const SegregatedState& v, const HomotopyOptions& opts = {});

struct ContinuationStep {
    CoexistenceState state;
    double h1_dist = 0.0;      // H1 distance of the pair to (v^+/alpha, v^-/d)
    double holder_dist = 0.0;  // sup + 1/2-Hölder seminorm of the same difference, max over components
    double lipschitz = 0.0;    // max over components of sup + Lipschitz seminorm
    double sup_bound = 0.0;    // maximum-principle bound on max(u1, u2)
    double lambda_1k = 0.0;
    double lambda_lower = 0.0; // -sup(|mu1 (1 - 2 u1)| + |mu2 (1 - 2 u2)|)
    double eigen_residual = 0.0;
    double decay_sup_phi = 0.0; // sup of phi_k on {v^- > eps}
    double decay_sup_psi = 0.0; // sup of psi_k on {v^+ > eps}
    double z_distance = 0.0;    // sup |alpha phi_k + d psi_k - Z| with max Z = 1
    bool direct = true;         // false when reached through the homotopy or intermediate k values
};

struct ContinuationOptions {
    HomotopyOptions newton;
    /// The decay sets are {v^+ > eps_frac sup v} and {v^- > eps_frac sup v^-}.
    double eps_frac = 0.1;
};

struct ContinuationResult {
    std::vector<ContinuationStep> steps;
    bool complete = false;
    std::string failure; // set when the chain stopped early
    double lambda_weighted = 0.0; // principal eigenvalue of the sigma(v)-weighted problem
};

/// Warm-started Newton chain at t = 1 along an increasing schedule. The first value is tried directly
/// from the offset segregated guess, then through the homotopy; later values bisect log k on failure.
ContinuationResult continue_in_k(const std::vector<double>& k_schedule, const SegregatedState& v,
                                 const ContinuationOptions& opts = {});

/// Metrics of one converged state against the segregated pair.
ContinuationStep measure(const CoexistenceState& state, const SegregatedState& v, const EigenResult& weighted,
                         double eps_frac = 0.1);

/// Upper bound on u1 and u2 from the maximum principle, for states within eta of v.
std::pair<double, double> sup_bounds(const SegregatedState& v, double k, double eta);

/// Default first strong-competition rate 50 max(M1, M2) max(alpha, d).
double default_k0(const CoefficientProfile& profile);

}  // namespace perseg
