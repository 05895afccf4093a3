#include "perseg/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace perseg::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_decimal(const std::string& s) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw InvalidArgument("not a number: '" + s + "'");
    return x;
}

std::size_t parse_count(const std::string& s) {
    const double x = parse_number(s);
    if (!(x >= 0.0) || x != std::floor(x) || x > 1e12) throw InvalidArgument("not a nonnegative integer: '" + s + "'");
    return static_cast<std::size_t>(x);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item)));
    if (out.empty()) throw InvalidArgument("empty list");
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"r0", [](RunConfig& c, const std::string& v) { c.profile.r0 = parse_number(v); }},
        {"r1", [](RunConfig& c, const std::string& v) { c.profile.r1 = parse_number(v); }},
        {"r2", [](RunConfig& c, const std::string& v) { c.profile.r2 = parse_number(v); }},
        {"M1", [](RunConfig& c, const std::string& v) { c.profile.M1 = parse_number(v); }},
        {"M2", [](RunConfig& c, const std::string& v) { c.profile.M2 = parse_number(v); }},
        {"alpha", [](RunConfig& c, const std::string& v) { c.profile.alpha = parse_number(v); }},
        {"d", [](RunConfig& c, const std::string& v) { c.profile.d = parse_number(v); }},
        {"mode",
         [](RunConfig& c, const std::string& v) {
             if (v == "two_patch") c.profile.mode = CoefficientMode::two_patch;
             else if (v == "combined") c.profile.mode = CoefficientMode::combined;
             else throw InvalidArgument("expected two_patch or combined");
         }},
        {"mollify_width", [](RunConfig& c, const std::string& v) { c.profile.mollify_width = parse_number(v); }},
        {"mollify_floor", [](RunConfig& c, const std::string& v) { c.profile.mollify_floor = parse_number(v); }},
        {"omega_mean", [](RunConfig& c, const std::string& v) { c.profile.omega_mean = parse_number(v); }},
        {"L", [](RunConfig& c, const std::string& v) { c.L = v == "auto" ? 0.0 : parse_number(v); }},
        {"L_factor", [](RunConfig& c, const std::string& v) { c.L_factor = parse_number(v); }},
        {"n", [](RunConfig& c, const std::string& v) { c.n = parse_count(v); }},
        {"k_schedule", [](RunConfig& c, const std::string& v) { c.k_schedule = parse_list(v); }},
        {"k_unit", [](RunConfig& c, const std::string& v) { c.k_unit = parse_number(v); }},
        {"k", [](RunConfig& c, const std::string& v) { c.k = parse_number(v); }},
        {"dt", [](RunConfig& c, const std::string& v) { c.evolution.dt = parse_number(v); }},
        {"t_end", [](RunConfig& c, const std::string& v) { c.evolution.t_end = parse_number(v); }},
        {"scheme",
         [](RunConfig& c, const std::string& v) {
             if (v == "imex_be") c.evolution.scheme = Scheme::imex_be;
             else if (v == "imex_cn") c.evolution.scheme = Scheme::imex_cn;
             else throw InvalidArgument("expected imex_be or imex_cn");
         }},
        {"record_every",
         [](RunConfig& c, const std::string& v) { c.evolution.record_every = static_cast<int>(parse_count(v)); }},
        {"simulate",
         [](RunConfig& c, const std::string& v) {
             if (v == "semilinear") c.simulate = Simulation::semilinear;
             else if (v == "quasilinear") c.simulate = Simulation::quasilinear;
             else if (v == "system") c.simulate = Simulation::system;
             else throw InvalidArgument("expected semilinear, quasilinear or system");
         }},
        {"init",
         [](RunConfig& c, const std::string& v) {
             if (v != "v" && v != "v+bump" && v.rfind("constant:", 0) != 0)
                 throw InvalidArgument("expected v, v+bump or constant:<value>");
             if (v.rfind("constant:", 0) == 0) parse_number(v.substr(9));
             c.init = v;
         }},
        {"probe_amplitude", [](RunConfig& c, const std::string& v) { c.probe_amplitude = parse_number(v); }},
        {"sweep_from", [](RunConfig& c, const std::string& v) { c.sweep_from = parse_number(v); }},
        {"sweep_to", [](RunConfig& c, const std::string& v) { c.sweep_to = parse_number(v); }},
        {"sweep_points", [](RunConfig& c, const std::string& v) { c.sweep_points = parse_count(v); }},
        {"out", [](RunConfig& c, const std::string& v) { c.out = v; }},
        {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_count(v); }},
    };
    return table;
}

void require_positive(const char* key, double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(key, "must be positive and finite");
}

}  // namespace

double parse_number(const std::string& text) {
    const std::string s = trim(text);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s);
    const double num = parse_decimal(trim(s.substr(0, slash)));
    const double den = parse_decimal(trim(s.substr(slash + 1)));
    if (den == 0.0) throw InvalidArgument("zero denominator in '" + s + "'");
    return num / den;
}

void RunConfig::validate() const {
    profile.validate();
    if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("L", "must be positive, or auto");
    require_positive("L_factor", L_factor);
    if (L == 0.0 && !(L_factor > 1.0)) throw ValidationError("L_factor", "must exceed 1");
    if (n < 16) throw ValidationError("n", "must be at least 16");
    for (std::size_t i = 0; i < k_schedule.size(); ++i) {
        require_positive("k_schedule", k_schedule[i]);
        if (i > 0 && !(k_schedule[i] > k_schedule[i - 1])) throw ValidationError("k_schedule", "must increase");
    }
    require_positive("k_unit", k_unit);
    require_positive("k", k);
    try {
        evolution.validate();
    } catch (const ValidationError&) {
        throw;
    }
    require_positive("probe_amplitude", probe_amplitude);
    require_positive("sweep_from", sweep_from);
    if (!(sweep_to > sweep_from)) throw ValidationError("sweep_to", "must exceed sweep_from");
    if (sweep_points < 2) throw ValidationError("sweep_points", "must be at least 2");
    if (out.empty()) throw ValidationError("out", "must not be empty");
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
        const std::string key = trim(content.substr(0, eq));
        const std::string value = trim(content.substr(eq + 1));
        if (key.empty()) throw ParseError(line, "missing key");
        const auto it = setters().find(key);
        if (it == setters().end()) throw ParseError(line, "unknown key '" + key + "'");
        if (value.empty()) throw ParseError(line, "missing value for '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const InvalidArgument& e) {
            throw ParseError(line, key + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open configuration file " + path.string());
    return parse_config(in);
}

std::string default_config_text() {
    return "# Unit-cell geometry: 2 r0 + 2 r1 + 2 r2 = 1\n"
           "r0 = 1/6\n"
           "r1 = 1/6\n"
           "r2 = 1/6\n"
           "M1 = 10            # height of the first patch\n"
           "M2 = 10            # height of the second patch\n"
           "alpha = 1\n"
           "d = 1\n"
           "mode = two_patch   # or combined\n"
           "mollify_width = 0  # fraction of L; 0 keeps sharp coefficients\n"
           "mollify_floor = 0.001\n"
           "omega_mean = 1\n"
           "L = auto           # auto means L_factor times the threshold\n"
           "L_factor = 2\n"
           "n = 1024           # raised until every breakpoint is a node\n"
           "k_schedule = 100, 1000, 10000\n"
           "k_unit = 1\n"
           "k = 1000           # simulate with the system\n"
           "dt = 0.01\n"
           "t_end = 10\n"
           "scheme = imex_be   # or imex_cn\n"
           "record_every = 10\n"
           "simulate = semilinear  # quasilinear or system\n"
           "init = v+bump      # v, v+bump or constant:<value>\n"
           "probe_amplitude = 0.04\n"
           "sweep_from = 1     # sweep-L range, units of the threshold\n"
           "sweep_to = 4\n"
           "sweep_points = 16\n"
           "out = out\n"
           "seed = 1\n";
}

}  // namespace perseg::cli
