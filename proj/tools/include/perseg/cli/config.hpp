#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "perseg/error.hpp"
#include "perseg/grid.hpp"
#include "perseg/parabolic.hpp"

namespace perseg::cli {

/// Malformed configuration line or unknown key; `line` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

enum class Simulation { semilinear, quasilinear, system };

/// Everything a command needs. Defaults reproduce the reference configuration.
struct RunConfig {
    CoefficientProfile profile;
    double L = 0.0;          // 0 selects L_factor times the threshold L_bar
    double L_factor = 2.0;
    std::size_t n = 1024;    // raised to the next node count that resolves every breakpoint
    std::vector<double> k_schedule{1e2, 1e3, 1e4};
    double k_unit = 1.0;
    double k = 1e3;          // competition rate of `simulate` with the system
    EvolutionConfig evolution;
    Simulation simulate = Simulation::semilinear;
    std::string init = "v+bump"; // v, v+bump or constant:<value>
    double probe_amplitude = 0.04;
    double sweep_from = 1.0; // sweep-L range in units of L_bar
    double sweep_to = 4.0;
    std::size_t sweep_points = 16;
    std::filesystem::path out = "out";
    std::uint64_t seed = 1;

    /// Throws ValidationError naming the first offending key.
    void validate() const;
};

/// Reads `key = value` lines; `#` starts a comment; fractions such as 1/6 are accepted for numbers.
RunConfig parse_config(std::istream& in);
RunConfig parse_config(const std::filesystem::path& path);

/// Number in decimal or p/q form; throws InvalidArgument.
double parse_number(const std::string& text);

/// Documented keys with their defaults, one `key = value  # meaning` line each.
std::string default_config_text();

}  // namespace perseg::cli
