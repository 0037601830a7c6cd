// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>

#include "linear_barrier.hpp"
#include "twkb/commands.hpp"
#include "twkb/validate.hpp"

using namespace twkb;
using twkb::testing::barrier_cfg;
using twkb::testing::barrier_model;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
        r = fn();
    } catch (const std::exception& e) {
        r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!r.ok) ++failures;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", r.ok ? "PASS" : "FAIL", id, title, r.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string g(double v) { return format_double_short(v); }

Solution barrier_solution(int n) { return solve_kappa1(barrier_cfg(), barrier_model(), n); }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

int main() {
    report(1, "assembler equivalence", [] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto st = equivalence_stats(1000);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return Outcome{st.coeff < 1e-12 && secs < 1.0, "max coeff mismatch " + g(st.coeff)};
    });

    report(2, "closed form vs tracking", [] {
        bool ok = true;
        std::string d;
        for (int n : {0, 1, 2}) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto k1 = barrier_solution(n).kappa1;
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const auto keep = guard_mask(k1.grid, k1.ambiguous_x, 0.5);
            double worst = 0.0;
            for (std::size_t i = 0; i < k1.grid.size(); ++i)
                if (keep[i])
                    worst = std::max(worst, std::abs(k1.values[i] - closed_form_kappa1(QVector{
                                                 eval_Q_vector(barrier_cfg(), barrier_model(), k1.grid[i], n)})));
            const double rel = worst / k1.max_abs();
            ok = ok && rel < 1e-8 && secs < 5.0;
            d += "N" + std::to_string(n) + " " + g(rel) + " ";
        }
        return Outcome{ok, d};
    });

    report(3, "scaling exponents", [] {
        const std::vector<double> lam{1.0, 0.5, 0.25, 0.125, 0.0625};
        const auto a = hbar_scaling_fit(barrier_cfg(), barrier_model(), 2, 0.0, lam);
        const auto b = hbar_scaling_fit(barrier_cfg(), barrier_model(), 2, -25.0, lam);
        const bool ok = std::abs(a.slope + 2.0 / 3.0) <= 0.02 && std::abs(b.slope + 1.0) <= 0.02;
        return Outcome{ok, "x=0 " + format_double(a.slope) + ", x=-25 " + format_double(b.slope)};
    });

    report(4, "leading-root multiplicity", [] {
        const int m1 = leading_root_multiplicity(barrier_cfg(), barrier_model(), 1, 0.0, 1, 1.0);
        const int m2 = leading_root_multiplicity(barrier_cfg(), barrier_model(), 2, 0.0, 1, 1.0);
        const int m0 = leading_root_multiplicity(barrier_cfg(), barrier_model(), 0, -25.0, 0, 1.0);
        return Outcome{m1 == 3 && m2 == 3 && m0 == 2, "N1 " + std::to_string(m1) + ", N2 " + std::to_string(m2) +
                                                             ", N0 off turning point " + std::to_string(m0)};
    });

    report(5, "accuracy ordering", [] {
        const auto o = make_oracle(barrier_cfg(), barrier_model());
        const cplx anchor = exact_psi(o, -50.0);
        ErrorMetrics k[3], p[3];
        for (int n : {0, 1, 2}) {
            const auto k1 = barrier_solution(n).kappa1;
            k[n] = error_metrics(k1, o, 0.0);
            p[n] = error_metrics(reconstruct_wavefunction(k1, -50.0, anchor), o, 0.0);
        }
        auto dec = [](double a, double b, double c) { return a > b && b > c; };
        const bool ok = dec(k[0].linf, k[1].linf, k[2].linf) && dec(k[0].im_linf, k[1].im_linf, k[2].im_linf) &&
                        dec(p[0].re_rel_linf, p[1].re_rel_linf, p[2].re_rel_linf) &&
                        dec(p[0].im_rel_linf, p[1].im_rel_linf, p[2].im_rel_linf);
        return Outcome{ok, "kappa Linf " + g(k[0].linf) + " > " + g(k[1].linf) + " > " + g(k[2].linf) + "; Im " +
                               g(k[0].im_linf) + " > " + g(k[1].im_linf) + " > " + g(k[2].im_linf) +
                               "; Re Psi " + g(p[0].re_rel_linf) + " > " + g(p[1].re_rel_linf) + " > " +
                               g(p[2].re_rel_linf) + "; Im Psi " + g(p[0].im_rel_linf) + " > " +
                               g(p[1].im_rel_linf) + " > " + g(p[2].im_rel_linf)};
    });

    report(6, "x_b moves right with order", [] {
        const auto x0 = barrier_solution(0).kappa1.x_b, x1 = barrier_solution(1).kappa1.x_b,
                   x2 = barrier_solution(2).kappa1.x_b;
        const auto o = make_oracle(barrier_cfg(), barrier_model());
        const auto ex = oracle_branch(o, barrier_cfg(), barrier_model(), uniform_grid(-50.0, 50.0, 2001)).x_b;
        const bool ok = x0 && x1 && x2 && *x0 < *x1 && *x1 < *x2 && !ex;
        auto s = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };
        return Outcome{ok, s(x0) + " < " + s(x1) + " < " + s(x2) + ", exact " + s(ex)};
    });

    report(7, "oracle integrity", [] {
        const double w = max_wronskian_error();
        const auto o = make_oracle(barrier_cfg(), barrier_model());
        const double h = 1e-3;
        double ric = 0.0;
        for (double x = -50.0 + h; x <= 50.0 - h; x += 0.1) {
            const cplx yp = (exact_riccati_y(o, x + h) - exact_riccati_y(o, x - h)) / (2.0 * h);
            const cplx y = exact_riccati_y(o, x);
            const double q = eval_Q(barrier_cfg(), barrier_model(), x, 0);
            ric = std::max(ric, std::abs(yp + y * y - q) / (std::abs(yp) + std::norm(y) + std::abs(q)));
        }
        const double c = max_companion_mismatch(1000);
        return Outcome{w < 1e-10 && ric < 1e-6 && c < 1e-9,
                       "wronskian " + g(w) + ", riccati " + g(ric) + ", companion " + g(c)};
    });

    report(8, "final residual decreases with order", [] {
        double r[3], a[3];
        for (int n : {0, 1, 2}) {
            const auto rep = riccati_residual(barrier_solution(n).kappa1, barrier_cfg(), barrier_model(), n, 0.5);
            r[n] = rep.max_final_rel;
            a[n] = rep.max_final_abs;
        }
        const bool ok = r[0] > r[1] && r[1] > r[2] && a[0] > a[1] && a[1] > a[2];
        return Outcome{ok, "relative " + g(r[0]) + " > " + g(r[1]) + " > " + g(r[2]) + "; absolute " + g(a[0]) +
                               " > " + g(a[1]) + " > " + g(a[2])};
    });

    report(9, "thread-count reproducibility", [] {
        namespace fs = std::filesystem;
        const fs::path base = fs::temp_directory_path() / "twkb_acceptance_repro";
        fs::remove_all(base);
        RunConfig rc;
        rc.a = -50.0;
        rc.b = 50.0;
        std::ostringstream sink;
        for (unsigned t : {1u, 8u}) {
            CommandOptions o;
            o.threads = t;
            o.quiet = true;
            o.out_dir = (base / std::to_string(t)).string();
            if (cmd_solve(rc, o, sink) != 0) return Outcome{false, "solve failed"};
        }
        std::size_t files = 0;
        for (const auto& e : fs::directory_iterator(base / "1")) {
            ++files;
            if (slurp(e.path()) != slurp(base / "8" / e.path().filename()))
                return Outcome{false, e.path().filename().string() + " differs"};
        }
        fs::remove_all(base);
        return Outcome{files > 0, std::to_string(files) + " CSV files identical"};
    });

    return failures == 0 ? 0 : 1;
}
