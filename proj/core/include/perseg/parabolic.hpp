#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "perseg/eigen.hpp"
#include "perseg/elliptic.hpp"
#include "perseg/grid.hpp"
#include "perseg/system.hpp"

namespace perseg {

enum class Scheme { imex_be, imex_cn };

const char* to_string(Scheme s);

struct EvolutionConfig {
    double dt = 1e-2;
    double t_end = 10.0;
    Scheme scheme = Scheme::imex_be;
    int record_every = 10; // steps between recorded snapshots; t = 0 and the final time are always kept

    void validate() const;
    int steps() const;
};

/// Largest dt for the explicit reaction of the scalar problems, 1 / (2 sup |f1|) over z in [-d, alpha].
double reaction_dt_cap(const Coefficients& c, double alpha, double d);
/// Same bound for the competition system, whose growth terms are explicit: 1 / (2 max mu_i).
double system_dt_cap(const SystemCoefficients& sys);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Field>> snapshots; // one Field for the scalar problems, two for the system
};

/// Called after every step with the current time and state; returning false stops the run.
using Observer = std::function<bool(double, const std::vector<Field>&)>;

/// z_t = z'' + f(z, x): diffusion implicit (theta = 1 or 1/2), reaction explicit.
Trajectory evolve_semilinear(const Field& z0, const Coefficients& c, double alpha, double d,
                             const EvolutionConfig& cfg, const Observer& observe = {});
Trajectory evolve_semilinear(const Field& z0, const CoefficientProfile& profile, const EvolutionConfig& cfg,
                             const Observer& observe = {});

/// (sigma(z) z)_t = z'' + f(z, x). The implicit system is solved in z with sigma lagged, followed by
/// one fixed-point sweep with sigma taken from the predicted z. On positive data every operation
/// coincides with evolve_semilinear.
Trajectory evolve_quasilinear(const Field& z0, const Coefficients& c, double alpha, double d,
                              const EvolutionConfig& cfg, const Observer& observe = {});
Trajectory evolve_quasilinear(const Field& z0, const CoefficientProfile& profile, const EvolutionConfig& cfg,
                              const Observer& observe = {});

/// Competition system, linearly implicit: (I - theta dt J) delta = dt F(u) with J the full Jacobian,
/// diffusion included. Values in [-1e-12, 0) are clipped to 0; anything lower raises SchemeViolation.
Trajectory evolve_system(const Field& u10, const Field& u20, double k, const SystemCoefficients& sys,
                         const EvolutionConfig& cfg, const Observer& observe = {});

struct DecayReport {
    std::string perturbation; // "eigenfunction" or "multimode"
    double fitted_rate = 0.0;
    std::vector<double> times;
    std::vector<double> perturbation_norms; // sup norm of the deviation from the steady state
    bool returned = false;
    double relative_error = 0.0; // |fitted_rate - lambda| / |lambda|
};

struct ProbeReport {
    Sense sense = Sense::semilinear;
    double lambda = 0.0; // principal eigenvalue of the matching sense
    DecayReport eigenfunction;
    DecayReport multimode;
};

/// Deterministic multi-mode bump: four cosine modes with seeded amplitudes and phases, sup 1.
Field multimode_bump(const PeriodicGrid& grid, std::uint64_t seed);

/// Least-squares slope of log(norm) against time over the final third; returns minus the slope.
double fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norms);

/// Perturbs a steady state of the scalar equation (semilinear or quasilinear sense) and fits the decay.
ProbeReport stability_probe(const Field& z, const Coefficients& c, double alpha, double d, Sense sense,
                            double amplitude, const EvolutionConfig& cfg, std::uint64_t seed = 1);

/// Same for a coexistence state of the system. The eigenfunction perturbation is (phi, -psi), with the
/// second component limited so that u2 stays above u2 / 2; the multimode perturbation is nonnegative.
ProbeReport stability_probe(const CoexistenceState& state, const SystemCoefficients& sys, double amplitude,
                            const EvolutionConfig& cfg, std::uint64_t seed = 1);

/// pi ((max mu1)^{-1/2} + sqrt(d) (max mu2)^{-1/2}) with the system coefficients.
double small_period_threshold(const SystemCoefficients& sys);

struct ExclusionReport {
    double threshold = 0.0;
    double L_small = 0.0;
    double k = 0.0;
    double final_time = 0.0;
    double sup_u1 = 0.0;
    double sup_u2 = 0.0;
    bool semitrivial = false;        // one component below the tolerance at the end
    bool newton_converged = false;   // Newton from the segregated guess on the small cell
    double newton_lambda = 0.0;      // principal eigenvalue there, when converged
    bool coexistence_excluded = false; // no converged state, or it is unstable
    double control_min_sup = 0.0;    // min over components of the sup at the end of the control run
    bool control_coexists = false;
};

struct ExclusionOptions {
    double tolerance = 1e-4;   // semitrivial classification in sup norm
    double perturbation = 1e-2; // amplitude of the seeded asymmetric perturbation
    std::uint64_t seed = 7;
    HomotopyOptions newton;
};

/// Evolves the segregated pair of `large` squeezed onto a cell of length L_small (below the threshold),
/// and the unsqueezed pair as control. Requires the grid of `large` and the same k for both runs.
ExclusionReport small_period_exclusion(const SegregatedState& large, double L_small, double k,
                                       const EvolutionConfig& cfg, const ExclusionOptions& opts = {});

}  // namespace perseg
