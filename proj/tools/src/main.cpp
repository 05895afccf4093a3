#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perseg/cli/commands.hpp"
#include "perseg/cli/config.hpp"

using namespace perseg::cli;

int main(int argc, char** argv) {
    CLI::App app{"Periodic segregated steady states: construction, stability and strong competition"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::vector<int> only;

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&, std::ostream&);
    };
    const Command commands[] = {
        {"construct", "Assemble the segregated state and its principal eigenvalues", cmd_construct},
        {"sweep-L", "Tabulate the matching function and eigenvalues against L", cmd_sweep_L},
        {"continue-k", "Continue coexistence states of the competition system in k", cmd_continue_k},
        {"simulate", "Evolve one of the three parabolic problems", cmd_simulate},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", config_path, "Configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory, overriding the configuration");
    }
    auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
    verify->add_option("--config", config_path, "Configuration file")->required();
    verify->add_option("--out", out_dir, "Output directory, overriding the configuration");
    verify->add_option("--only", only, "Criterion numbers to run");
    auto* print = app.add_subcommand("print-config", "Print the documented default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_validation;
    }

    if (print->parsed()) {
        std::cout << default_config_text();
        return exit_ok;
    }
    return run_command(
        [&] {
            RunConfig cfg = parse_config(std::filesystem::path(config_path));
            if (!out_dir.empty()) cfg.out = out_dir;
            if (verify->parsed()) return cmd_verify(cfg, std::cout, only);
            for (const auto& c : commands)
                if (app.got_subcommand(c.name)) return c.run(cfg, std::cout);
            return static_cast<int>(exit_validation);
        },
        std::cerr);
}
