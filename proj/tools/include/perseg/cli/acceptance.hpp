#pragma once

#include <functional>
#include <string>
#include <vector>

#include "perseg/cli/config.hpp"

namespace perseg::cli {

/// Pinned tolerances of the acceptance suite.
struct AcceptanceTolerances {
    double gamma_anchor = 1e-3;       // |phi(1, 1, 1/2, 40) - sqrt(1/6)|
    double glue_jump = 10.0;          // value and slope jumps, in units of h
    double residual_constant = 1.0;   // interior L2 residual <= C h^2
    double constant_drift = 0.25;     // |C_2n / C_n - 1|
    double dense_match = 1e-8;
    double symmetry = 1e-6;
    double seg_fraction = 0.05;       // final seg_distance <= 0.05 sup |v|
    double mass_slope = 0.2;          // |slope + 1|
    double lambda_limit = 0.1;        // relative gap of lambda_{1,k_max} to the weighted lambda
    double identity = 1e-10;
    double excess_ulps = 8.0;         // rounding allowance of alpha u1 - v^+, in eps sup |v|
    double decay_rate = 0.2;          // relative error of fitted decay rates
    double semitrivial = 1e-4;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail; // measured values
    double seconds = 0.0;
    double limit = 0.0; // runtime budget in seconds
};

struct Criterion {
    int id;
    std::string name;
    double limit;
};

const std::vector<Criterion>& criteria();

/// Runs the selected criteria (all when `only` is empty) in order; `report` sees each result
/// as soon as it is available. A criterion that exceeds its runtime budget fails.
std::vector<CriterionResult> run_acceptance(const RunConfig& cfg, const std::vector<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& report = {},
                                            const AcceptanceTolerances& tol = {});

/// One line: "[ 9] PASS  name  (1.23 s)  detail".
std::string format_result(const CriterionResult& r, bool expected_failure = false);

}  // namespace perseg::cli
