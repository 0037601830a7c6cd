// twkb: solve, wavefunction, scaling and validate commands.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "twkb/commands.hpp"
#include "twkb/parallel.hpp"
#include "twkb/validate.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Hybrid Taylor-WKB zeroth-order solver"};
    app.require_subcommand(1);

    std::string config;
    twkb::CommandOptions opt;
    std::string out;
    std::size_t grid = 0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* c = sub->add_option("--config", config, "JSON run configuration");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output_dir)");
        sub->add_option("--grid", grid, "grid points (odd, >= 9)");
        sub->add_flag("--quiet", opt.quiet, "suppress progress output");
        sub->add_option("--inject-fault", opt.fault)->group("");
    };
    auto* solve = app.add_subcommand("solve", "roots, branches and kappa1 per order");
    auto* wave = app.add_subcommand("wavefunction", "reconstructed wavefunctions per order");
    auto* scaling = app.add_subcommand("scaling", "hbar scaling exponent and root multiplicity");
    auto* validate = app.add_subcommand("validate", "oracle self-tests");
    add_common(solve, true);
    add_common(wave, true);
    add_common(scaling, true);
    add_common(validate, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : twkb::exit_config;
    }

    if (!out.empty()) opt.out_dir = out;
    if (grid != 0) opt.grid = grid;
    opt.threads = twkb::thread_count_from_env();

    if (validate->parsed()) return twkb::cmd_validate(opt.fault, opt.quiet);

    return twkb::run_guarded([&] {
        const auto rc = twkb::load_run_config(config);
        if (solve->parsed()) return twkb::cmd_solve(rc, opt);
        if (wave->parsed()) return twkb::cmd_wavefunction(rc, opt);
        return twkb::cmd_scaling(rc, opt);
    });
}
