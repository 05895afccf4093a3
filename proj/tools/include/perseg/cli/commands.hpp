#pragma once

#include <cstddef>
#include <exception>
#include <ostream>
#include <vector>

#include "perseg/cli/config.hpp"
#include "perseg/construction.hpp"
#include "perseg/error.hpp"

namespace perseg::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 2, exit_solver = 3, exit_acceptance = 4 };

/// Cell length of a configuration: L, or L_factor times the threshold when L is 0.
double resolve_L(const RunConfig& cfg);

/// Segregated state on the aligned grid, Newton-polished under the sampled (possibly mollified)
/// coefficients so that it is a discrete steady state of what the evolution commands integrate.
SegregatedState reference_state(const RunConfig& cfg);

/// Worker count from TOOL_THREADS, defaulting to the hardware concurrency; ValidationError if malformed.
std::size_t tool_threads();

/// Tolerance of the construction residual: h^2 max(M1 alpha, M2 d).
double construction_residual_tolerance(const CoefficientProfile& profile, double h);

// Each command writes its files into cfg.out and returns an ExitCode. Validation and solver
// errors propagate as exceptions; run_command maps them to exit codes.
int cmd_construct(const RunConfig& cfg, std::ostream& log);
int cmd_sweep_L(const RunConfig& cfg, std::ostream& log);
int cmd_continue_k(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log, const std::vector<int>& only = {});

/// Calls `command`, printing any error to `err` and translating it to an exit code.
template <class F>
int run_command(F&& command, std::ostream& err) {
    try {
        return command();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_validation;
    } catch (const InvalidArgument& e) {
        err << "validation error: " << e.what() << '\n';
        return exit_validation;
    } catch (const Error& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_solver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_solver;
    }
}

}  // namespace perseg::cli
