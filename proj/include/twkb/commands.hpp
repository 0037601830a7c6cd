#pragma once

// The solve / wavefunction / scaling commands. Each writes its CSV files into
// the output directory and throws on failure; run_guarded maps exceptions to
// exit codes.

#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "twkb/airy.hpp"
#include "twkb/analysis.hpp"
#include "twkb/branches.hpp"
#include "twkb/csv.hpp"
#include "twkb/errors.hpp"
#include "twkb/run_config.hpp"

namespace twkb {

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_no_convergence = 2,
    exit_no_regular_branch = 3,
    exit_failure = 4,
};

struct CommandOptions {
    std::optional<std::string> out_dir;    // overrides the config's output_dir
    std::optional<std::size_t> grid;       // overrides grid_points
    bool quiet = false;
    unsigned threads = 1;
    std::string fault;                     // test hook, see cmd_validate
};

inline RunConfig apply_overrides(RunConfig rc, const CommandOptions& o) {
    if (o.out_dir) rc.output_dir = *o.out_dir;
    if (o.grid) rc.grid_points = *o.grid;
    rc.validate();
    return rc;
}

inline SolveOptions solve_options(const RunConfig& rc, const CommandOptions& o) {
    SolveOptions s;
    s.grid_points = rc.grid_points;
    s.threads = o.threads;
    s.convention = rc.sign_convention;
    return s;
}

inline std::filesystem::path order_file(const RunConfig& rc, const std::string& stem, int n) {
    return std::filesystem::path(rc.output_dir) / (stem + "_N" + std::to_string(n) + ".csv");
}

inline CsvTable complex_table(const std::vector<double>& x, const std::vector<cplx>& v, bool with_abs) {
    CsvTable t(with_abs ? std::vector<std::string>{"x", "re", "im", "abs"}
                        : std::vector<std::string>{"x", "re", "im"});
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (with_abs)
            t.add_row({x[i], v[i].real(), v[i].imag(), std::abs(v[i])});
        else
            t.add_row({x[i], v[i].real(), v[i].imag()});
    }
    return t;
}

/// Points where |Q'/Q| is not small against |kappa1|, the regime of the expansion.
inline std::size_t regime_violations(const Kappa1Branch& br, const PhysicalConfig& cfg,
                                     const PotentialModel& model) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < br.grid.size(); ++i) {
        const double q0 = eval_Q(cfg, model, br.grid[i], 0);
        const double q1 = eval_Q(cfg, model, br.grid[i], 1);
        if (std::abs(q1) >= std::abs(q0) * std::abs(br.values[i])) ++n;
    }
    return n;
}

inline int cmd_solve(const RunConfig& rc0, const CommandOptions& o, std::ostream& log = std::cerr) {
    const RunConfig rc = apply_overrides(rc0, o);
    const PhysicalConfig cfg = rc.physical();
    for (int n : rc.orders) {
        const auto sol = solve_kappa1(cfg, rc.potential, n, solve_options(rc, o));
        const auto& f = sol.field;

        std::vector<std::string> header{"x"};
        for (std::size_t j = 0; j < f.branch_count(); ++j)
            for (const char* c : {"re_", "im_", "abs_"}) header.push_back(c + std::to_string(j));
        CsvTable t(header);
        std::vector<double> row;
        for (std::size_t i = 0; i < f.size(); ++i) {
            row.assign(1, f.grid[i]);
            for (std::size_t j = 0; j < f.branch_count(); ++j) {
                const cplx z = f.branches[j][i];
                row.insert(row.end(), {z.real(), z.imag(), std::abs(z)});
            }
            t.add_row(row);
        }
        write_csv(order_file(rc, "branches", n), t);
        write_csv(order_file(rc, "kappa1", n), complex_table(sol.kappa1.grid, sol.kappa1.values, true));

        if (!o.quiet) {
            log << "N=" << n << ": " << f.branch_count() << " branches, " << f.ambiguities.size()
                << " ambiguous columns, x_b=" << (sol.kappa1.x_b ? format_double(*sol.kappa1.x_b) : "none")
                << '\n';
            if (const auto v = regime_violations(sol.kappa1, cfg, rc.potential))
                log << "warning: N=" << n << ": |Q'/Q| >= |kappa| at " << v << " grid points\n";
        }
    }
    if (rc.potential.is_linear()) {
        const auto o_ = make_oracle(cfg, rc.potential, rc.rho_override);
        const auto grid = uniform_grid(cfg.a, cfg.b, rc.grid_points);
        std::vector<cplx> y(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) y[i] = exact_riccati_y(o_, grid[i]);
        write_csv(std::filesystem::path(rc.output_dir) / "exact_y.csv", complex_table(grid, y, true));
    }
    return exit_ok;
}

inline int cmd_wavefunction(const RunConfig& rc0, const CommandOptions& o, std::ostream& log = std::cerr) {
    const RunConfig rc = apply_overrides(rc0, o);
    const PhysicalConfig cfg = rc.physical();
    std::optional<LinearBarrierOracle> oracle;
    if (rc.potential.is_linear()) oracle = make_oracle(cfg, rc.potential, rc.rho_override);
    const cplx anchor = oracle ? exact_psi(*oracle, cfg.a) : cplx(1.0, 0.0);

    for (int n : rc.orders) {
        const auto sol = solve_kappa1(cfg, rc.potential, n, solve_options(rc, o));
        const auto w = reconstruct_wavefunction(sol.kappa1, cfg.a, anchor);
        write_csv(order_file(rc, "psi", n), complex_table(w.grid, w.psi, false));
        if (!o.quiet && oracle) {
            const auto e = error_metrics(w, *oracle, rc.guard_band);
            log << "N=" << n << ": Re Psi rel Linf=" << format_double(e.re_rel_linf)
                << " Im Psi rel Linf=" << format_double(e.im_rel_linf) << '\n';
        }
    }
    if (oracle) {
        const auto grid = uniform_grid(cfg.a, cfg.b, rc.grid_points);
        std::vector<cplx> psi(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = exact_psi(*oracle, grid[i]);
        write_csv(std::filesystem::path(rc.output_dir) / "psi_exact.csv", complex_table(grid, psi, false));
    }
    return exit_ok;
}

/// Uses the highest requested order.
inline int cmd_scaling(const RunConfig& rc0, const CommandOptions& o, std::ostream& out = std::cout,
                       std::ostream& log = std::cerr) {
    const RunConfig rc = apply_overrides(rc0, o);
    const PhysicalConfig cfg = rc.physical();
    const int n = *std::max_element(rc.orders.begin(), rc.orders.end());
    const auto fit = hbar_scaling_fit(cfg, rc.potential, n, rc.probe_x, rc.lambda_samples, solve_options(rc, o));

    CsvTable t({"lambda", "abs_kappa1", "running_slope"});
    std::vector<double> lx, ly;
    for (std::size_t s = 0; s < fit.lambdas.size(); ++s) {
        lx.push_back(std::log(fit.lambdas[s]));
        ly.push_back(std::log(fit.abs_kappa[s]));
        const double slope = s == 0 ? std::numeric_limits<double>::quiet_NaN() : least_squares_line(lx, ly).slope;
        t.add_row({fit.lambdas[s], fit.abs_kappa[s], slope});
    }
    write_csv(std::filesystem::path(rc.output_dir) / "scaling.csv", t);

    out << "exponent=" << format_double(fit.slope) << " expected=" << format_double(fit.expected) << '\n';
    if (fit.turning_order <= n)
        out << "multiplicity="
            << leading_root_multiplicity(cfg, rc.potential, n, rc.probe_x, fit.turning_order, rc.hbar_multiplier)
            << '\n';
    else
        out << "multiplicity=n/a\n";
    if (!o.quiet)
        log << "x*=" << format_double(fit.x_star) << " n=" << fit.turning_order << " N=" << n << " ci95=["
            << format_double(fit.ci_low) << ", " << format_double(fit.ci_high) << "]\n";
    return exit_ok;
}

/// Runs `fn`, reporting failures on `err` and returning the matching exit code.
inline int run_guarded(const std::function<int()>& fn, std::ostream& err = std::cerr) {
    try {
        return fn();
    } catch (const config_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const no_convergence& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_convergence;
    } catch (const no_regular_branch& e) {
        err << "error: " << e.what() << '\n';
        return exit_no_regular_branch;
    } catch (const invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace twkb
