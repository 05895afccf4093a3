#include "perseg/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

#include "perseg/cli/acceptance.hpp"
#include "perseg/cli/csv.hpp"
#include "perseg/eigen.hpp"
#include "perseg/elliptic.hpp"
#include "perseg/parabolic.hpp"

namespace perseg::cli {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::filesystem::path prepare_out(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
    return cfg.out;
}

std::vector<double> scheduled_k(const RunConfig& cfg) {
    std::vector<double> ks;
    for (double k : cfg.k_schedule) ks.push_back(k * cfg.k_unit);
    return ks;
}

struct Spectra {
    EigenResult semilinear;
    EigenResult weighted;
};

Spectra spectra(const Field& v, const Coefficients& c, double alpha, double d) {
    const auto q = f1_of(v, c, alpha, d);
    return {principal_scalar(q), principal_weighted(q, sigma_fields(v, d).first)};
}

/// Header "t,<prefix>0,...,<prefix>{n-1}" for each prefix.
std::vector<std::string> wide_header(std::size_t n, std::initializer_list<const char*> prefixes) {
    std::vector<std::string> h{"t"};
    for (const char* p : prefixes)
        for (std::size_t j = 0; j < n; ++j) h.push_back(p + std::to_string(j));
    return h;
}

void write_trajectory(const Trajectory& tr, const std::vector<Field>& steady, const std::filesystem::path& dir) {
    const std::size_t n = steady.front().size();
    CsvTable traj(steady.size() == 1 ? wide_header(n, {"z"}) : wide_header(n, {"u1_", "u2_"}));
    CsvTable probe({"t", "perturbation_norm"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        std::vector<double> row{tr.times[i]};
        double dev = 0.0;
        for (std::size_t c = 0; c < steady.size(); ++c) {
            const auto& f = tr.snapshots[i][c];
            row.insert(row.end(), f.vector().begin(), f.vector().end());
            dev = std::max(dev, (f - steady[c]).sup_abs());
        }
        traj.add_row(row);
        probe.add_row(std::vector<double>{tr.times[i], dev});
    }
    traj.write(dir / "trajectory.csv");
    probe.write(dir / "probe.csv");
}

double init_constant(const std::string& init) { return parse_number(init.substr(9)); }

}  // namespace

double resolve_L(const RunConfig& cfg) {
    return cfg.L > 0.0 ? cfg.L : cfg.L_factor * find_L_threshold(cfg.profile).L_bar;
}

SegregatedState reference_state(const RunConfig& cfg) {
    auto state = assemble_v(resolve_L(cfg), cfg.profile, aligned_node_count(cfg.n, cfg.profile));
    if (cfg.profile.mollify_width > 0.0) state.coefficients = sample_coefficients(cfg.profile, state.grid);
    return polish(state);
}

std::size_t tool_threads() {
    const char* env = std::getenv("TOOL_THREADS");
    if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
    double x = 0.0;
    try {
        x = parse_number(env);
    } catch (const InvalidArgument&) {
        throw ValidationError("TOOL_THREADS", "must be an integer >= 1");
    }
    if (!(x >= 1.0) || x != std::floor(x) || x > 4096) throw ValidationError("TOOL_THREADS", "must be an integer >= 1");
    return static_cast<std::size_t>(x);
}

double construction_residual_tolerance(const CoefficientProfile& profile, double h) {
    return h * h * std::max(profile.M1 * profile.alpha, profile.M2 * profile.d);
}

int cmd_construct(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const auto th = find_L_threshold(cfg.profile);
    const double L = cfg.L > 0.0 ? cfg.L : cfg.L_factor * th.L_bar;
    const auto m = find_nu(L, cfg.profile);
    const auto s = assemble_v(m, cfg.profile, aligned_node_count(cfg.n, cfg.profile));
    const double alpha = s.profile.alpha, d = s.profile.d;

    CsvTable v({"x", "v", "mu1", "mu2"});
    for (std::size_t j = 0; j < s.grid.size(); ++j)
        v.add_row(std::vector<double>{s.grid.x(j), s.v[j], s.coefficients.mu1[j], s.coefficients.mu2[j]});
    v.write(dir / "v.csv");

    CsvTable matching({"L0", "L_bar", "L_star", "nu_lower", "nu_star", "nu_upper", "residual"});
    matching.add_row(std::vector<double>{th.L0, th.L_bar, th.L_star, m.nu_lower, m.nu_star, m.nu_upper,
                                         m.matching_residual});
    matching.write(dir / "matching.csv");

    const auto sp = spectra(s.v, s.coefficients, alpha, d);
    CsvTable eigen({"sense", "lambda", "residual"});
    eigen.add_row(std::vector<std::string>{"semilinear", format_double(sp.semilinear.lambda),
                                           format_double(sp.semilinear.residual)});
    eigen.add_row(std::vector<std::string>{"quasilinear", format_double(sp.weighted.lambda),
                                           format_double(sp.weighted.residual)});
    eigen.write(dir / "eigen.csv");

    const double h = s.grid.spacing();
    const double residual = residual_weak_form(s).strong_l2;
    const double tolerance = construction_residual_tolerance(s.profile, h);
    const bool stable = sp.semilinear.lambda > 0.0 && sp.weighted.lambda > 0.0;
    log << "L = " << format_double(L) << ", n = " << s.grid.size() << ", nu = " << format_double(m.nu_star)
        << "\nresidual " << format_double(residual) << " (tolerance " << format_double(tolerance) << ")"
        << "\nlambda semilinear " << format_double(sp.semilinear.lambda) << ", quasilinear "
        << format_double(sp.weighted.lambda) << '\n';
    if (!stable || !(residual <= tolerance)) {
        log << "construction rejected: " << (stable ? "residual above tolerance" : "not linearly stable") << '\n';
        return exit_solver;
    }
    return exit_ok;
}

int cmd_sweep_L(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const auto th = find_L_threshold(cfg.profile);
    const std::size_t points = cfg.sweep_points;
    const std::size_t n = aligned_node_count(cfg.n, cfg.profile);

    struct Row {
        double L, psi_upper, nu_star, lambda_semi, lambda_quasi;
    };
    std::vector<Row> rows(points);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points; i = next++) {
            const double f = static_cast<double>(i) / static_cast<double>(points - 1);
            Row r{th.L_bar * (cfg.sweep_from + (cfg.sweep_to - cfg.sweep_from) * f), nan, nan, nan, nan};
            try {
                const auto b = nu_bounds(r.L, cfg.profile);
                r.psi_upper = psi_at_upper(r.L, b, cfg.profile);
                if (r.psi_upper < 0.0) {
                    const auto m = find_nu(r.L, cfg.profile);
                    const auto s = assemble_v(m, cfg.profile, n);
                    const auto sp = spectra(s.v, s.coefficients, s.profile.alpha, s.profile.d);
                    r.nu_star = m.nu_star;
                    r.lambda_semi = sp.semilinear.lambda;
                    r.lambda_quasi = sp.weighted.lambda;
                }
            } catch (const DomainError&) {
                // Below L0 the matching window is empty: the row keeps NaN.
            }
            rows[i] = r;
        }
    };
    const std::size_t workers = std::min(tool_threads(), points);
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    CsvTable sweep({"L", "psi_upper", "nu_star", "lambda_semilinear", "lambda_quasilinear"});
    double below = nan, above = nan; // last L without a solution, first L with one
    for (const auto& r : rows) {
        sweep.add_row(std::vector<double>{r.L, r.psi_upper, r.nu_star, r.lambda_semi, r.lambda_quasi});
        if (r.psi_upper < 0.0) {
            if (std::isnan(above)) above = r.L;
        } else if (std::isnan(above)) {
            below = r.L;
        }
    }
    sweep.write(dir / "sweep_L.csv");
    CsvTable bracket({"L0", "L_bar", "L_star", "sweep_below", "sweep_above"});
    bracket.add_row(std::vector<double>{th.L0, th.L_bar, th.L_star, below, above});
    bracket.write(dir / "threshold.csv");
    log << points << " points on " << workers << " threads; L_bar = " << format_double(th.L_bar) << '\n';
    return exit_ok;
}

int cmd_continue_k(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const auto state = reference_state(cfg);
    const auto res = continue_in_k(scheduled_k(cfg), state);

    CsvTable table({"k", "seg_distance", "product_mass", "h1_dist", "holder_dist", "lambda_1k", "decay_sup_phi",
                    "decay_sup_psi"});
    for (const auto& s : res.steps)
        table.add_row(std::vector<double>{s.state.k, s.state.seg_distance, s.state.product_mass, s.h1_dist,
                                          s.holder_dist, s.lambda_1k, s.decay_sup_phi, s.decay_sup_psi});
    table.write(dir / "continuation.csv");

    if (!res.steps.empty()) {
        const auto& last = res.steps.back().state;
        CsvTable pair({"x", "u1", "u2", "v"});
        for (std::size_t j = 0; j < state.grid.size(); ++j)
            pair.add_row(std::vector<double>{state.grid.x(j), last.u1[j], last.u2[j], state.v[j]});
        pair.write(dir / "u1u2.csv");
    }
    log << res.steps.size() << " of " << cfg.k_schedule.size() << " k values converged; weighted lambda "
        << format_double(res.lambda_weighted) << '\n';
    if (!res.complete) {
        log << "continuation stopped: " << res.failure << '\n';
        return exit_solver;
    }
    return exit_ok;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out(cfg);
    const auto state = reference_state(cfg);
    const double alpha = state.profile.alpha, d = state.profile.d;
    const double amp = cfg.probe_amplitude;
    const auto bump = multimode_bump(state.grid, cfg.seed);
    const bool constant = cfg.init.rfind("constant:", 0) == 0;

    if (cfg.simulate == Simulation::system) {
        const double k = cfg.k * cfg.k_unit;
        const auto res = continue_in_k({k}, state);
        if (!res.complete) throw SolverFailure("no coexistence state at k: " + res.failure, 0.0, 0);
        const auto& cs = res.steps.front().state;
        Field u1 = cs.u1, u2 = cs.u2;
        if (constant) {
            u1 = Field::constant(state.grid, init_constant(cfg.init));
            u2 = u1;
        } else if (cfg.init == "v+bump") {
            // Nonnegative bump, so that the data stay in the positive cone.
            const Field lift = bump.map([&](double b) { return 0.5 * amp * (b + 1.0); });
            u1 = u1 + lift;
            u2 = u2 + lift;
        }
        const auto sys = system_coefficients(state.coefficients, alpha, d);
        const auto tr = evolve_system(u1, u2, k, sys, cfg.evolution);
        write_trajectory(tr, {cs.u1, cs.u2}, dir);
        log << "system at k = " << format_double(k) << ": " << tr.times.size() << " snapshots to t = "
            << format_double(tr.times.back()) << '\n';
        return exit_ok;
    }

    Field z0 = state.v;
    if (constant) z0 = Field::constant(state.grid, init_constant(cfg.init));
    else if (cfg.init == "v+bump") z0 = state.v + (amp * state.v.sup_abs()) * bump;
    const auto tr = cfg.simulate == Simulation::semilinear
                        ? evolve_semilinear(z0, state.coefficients, alpha, d, cfg.evolution)
                        : evolve_quasilinear(z0, state.coefficients, alpha, d, cfg.evolution);
    write_trajectory(tr, {state.v}, dir);
    log << (cfg.simulate == Simulation::semilinear ? "semilinear" : "quasilinear") << ": " << tr.times.size()
        << " snapshots to t = " << format_double(tr.times.back()) << '\n';
    return exit_ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log, const std::vector<int>& only) {
    const auto results = run_acceptance(cfg, only, [&](const CriterionResult& r) {
        log << format_result(r) << std::endl;
    });
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    log << results.size() - failed << " of " << results.size() << " criteria passed\n";
    return failed == 0 ? exit_ok : exit_acceptance;
}

}  // namespace perseg::cli
