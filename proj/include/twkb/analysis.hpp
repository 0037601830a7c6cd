#pragma once

// Diagnostics: residuals of the derivative system, wavefunction reconstruction,
// hbar scaling, leading-root counts, x_b and error metrics against the oracle.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "twkb/airy.hpp"
#include "twkb/branches.hpp"
#include "twkb/errors.hpp"
#include "twkb/kappa_system.hpp"
#include "twkb/physics.hpp"

namespace twkb {

/// Points within `guard` of any listed x are excluded; guard <= 0 keeps everything.
inline std::vector<bool> guard_mask(const std::vector<double>& grid, const std::vector<double>& centers,
                                    double guard) {
    std::vector<bool> keep(grid.size(), true);
    if (guard <= 0.0) return keep;
    for (std::size_t i = 0; i < grid.size(); ++i)
        for (double c : centers)
            if (std::abs(grid[i] - c) <= guard) keep[i] = false;
    return keep;
}

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

/// d/dx on a uniform grid: 4th-order central inside, 2nd order next to and at the ends.
inline std::vector<cplx> derivative(const std::vector<cplx>& f, double h) {
    const std::size_t m = f.size();
    std::vector<cplx> d(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (i >= 2 && i + 2 < m)
            d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
        else if (i >= 1 && i + 1 < m)
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        else if (i == 0)
            d[i] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        else
            d[i] = (3.0 * f[m - 1] - 4.0 * f[m - 2] + f[m - 3]) / (2.0 * h);
    }
    return d;
}

}  // namespace detail

/// y^(0)..y^(order) = m! a_m(kappa) kappa^(m+1) at one point.
inline std::vector<cplx> zeroth_order_derivatives(const QVector& q, cplx kappa, int order) {
    QVector qq = q;
    qq.values.resize(static_cast<std::size_t>(order) + 1, 0.0);
    const auto a = laurent_recurrence(qq);
    std::vector<cplx> y(static_cast<std::size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) {
        // sum_j c_{m,j} kappa^(m+1-j), a polynomial in kappa
        const auto& c = a[static_cast<std::size_t>(m)].coeffs;
        cplx acc = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) acc = acc * kappa + c[j];
        for (std::size_t j = c.size(); j < static_cast<std::size_t>(m) + 2; ++j) acc *= kappa;
        y[static_cast<std::size_t>(m)] = detail::factorial(m) * acc;
    }
    return y;
}

struct ResidualReport {
    std::vector<double> grid;
    int order = 0;
    std::vector<std::vector<double>> algebraic;  // [m][i], m < N, relative to the sum of term magnitudes
    std::vector<double> final_abs;               // |dy^(N)/dx + sum C y y - Q^(N)|
    std::vector<double> final_rel;               // final_abs / (N! |kappa|^(N+2))
    std::vector<double> final_terms;             // final_abs / sum of term magnitudes
    std::vector<bool> included;                  // outside the guard band
    double max_algebraic = 0.0;
    double max_final_abs = 0.0;
    double max_final_rel = 0.0;
    double mean_final_rel = 0.0;
};

/// Residuals of the N+1 relations y^(m+1) + sum_k C(m,k) y^(m-k) y^(k) = Q^(m).
/// The guard band excludes points within `guard` of x_b and of ambiguous columns.
inline ResidualReport riccati_residual(const Kappa1Branch& br, const PhysicalConfig& cfg,
                                       const PotentialModel& model, int order, double guard = 0.5) {
    const std::size_t m = br.grid.size();
    if (m < 9) throw grid_too_coarse("riccati_residual needs at least 9 grid points");
    if (order < 0) throw invalid_argument("order must be non-negative");
    const double h = grid_spacing(br.grid);
    const auto n = static_cast<std::size_t>(order);

    ResidualReport r;
    r.grid = br.grid;
    r.order = order;
    r.algebraic.assign(n, std::vector<double>(m, 0.0));

    std::vector<std::vector<cplx>> y(m);
    std::vector<QVector> qs(m);
    for (std::size_t i = 0; i < m; ++i) {
        qs[i] = QVector{eval_Q_vector(cfg, model, br.grid[i], order)};
        y[i] = zeroth_order_derivatives(qs[i], br.values[i], order);
    }

    auto quadratic = [&](std::size_t i, int mm, double& mag) {
        cplx s = 0.0;
        for (int k = 0; k <= mm; ++k) {
            const cplx t = detail::binomial(mm, k) * y[i][static_cast<std::size_t>(mm - k)] *
                           y[i][static_cast<std::size_t>(k)];
            s += t;
            mag += std::abs(t);
        }
        return s;
    };

    for (std::size_t i = 0; i < m; ++i)
        for (int mm = 0; mm < order; ++mm) {
            double mag = 0.0;
            const cplx lead = y[i][static_cast<std::size_t>(mm) + 1];
            const cplx s = quadratic(i, mm, mag);
            const double q = qs[i][static_cast<std::size_t>(mm)];
            mag += std::abs(lead) + std::abs(q);
            const double res = std::abs(lead + s - q);
            r.algebraic[static_cast<std::size_t>(mm)][i] = mag > 0.0 ? res / mag : res;
        }

    std::vector<cplx> yn(m);
    for (std::size_t i = 0; i < m; ++i) yn[i] = y[i][n];
    const auto dyn = detail::derivative(yn, h);

    std::vector<double> centers = br.ambiguous_x;
    if (br.x_b) centers.push_back(*br.x_b);
    r.included = guard_mask(br.grid, centers, guard);

    r.final_abs.resize(m);
    r.final_rel.resize(m);
    r.final_terms.resize(m);
    const double nf = detail::factorial(order);
    std::size_t count = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double mag = 0.0;
        const cplx s = quadratic(i, order, mag);
        const double q = qs[i][n];
        mag += std::abs(dyn[i]) + std::abs(q);
        const double res = std::abs(dyn[i] + s - q);
        const double scale = std::max(nf * std::pow(std::abs(br.values[i]), order + 2), 1e-300);
        r.final_abs[i] = res;
        r.final_rel[i] = res / scale;
        r.final_terms[i] = mag > 0.0 ? res / mag : res;
        if (!r.included[i]) continue;
        for (std::size_t mm = 0; mm < n; ++mm) r.max_algebraic = std::max(r.max_algebraic, r.algebraic[mm][i]);
        r.max_final_abs = std::max(r.max_final_abs, res);
        r.max_final_rel = std::max(r.max_final_rel, r.final_rel[i]);
        sum += r.final_rel[i];
        ++count;
    }
    r.mean_final_rel = count ? sum / static_cast<double>(count) : 0.0;
    return r;
}

struct WaveProfile {
    std::vector<double> grid;
    std::vector<cplx> psi;
    double anchor_x = 0.0;
    std::size_t anchor_index = 0;
    cplx anchor_value;
    std::vector<double> ambiguous_x;
};

namespace detail {

/// Running integral of f from f[0] with step h: composite Simpson on even
/// offsets, a three-point rule for the odd ones.
inline std::vector<cplx> cumulative_simpson(const std::vector<cplx>& f, double h) {
    const std::size_t m = f.size();
    std::vector<cplx> out(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        if (i % 2 == 0) {
            out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
        } else if (i + 1 < m) {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
        } else if (i >= 2) {
            out[i] = out[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
        } else {
            out[i] = out[i - 1] + h / 2.0 * (f[i - 1] + f[i]);
        }
    }
    return out;
}

inline std::size_t grid_index_of(const std::vector<double>& grid, double x) {
    const double h = grid_spacing(grid);
    const auto it = std::lower_bound(grid.begin(), grid.end(), x - 1e-9 * h);
    if (it == grid.end() || std::abs(*it - x) > 1e-9 * h)
        throw anchor_off_grid("anchor x = " + std::to_string(x) + " is not a grid point");
    return static_cast<std::size_t>(it - grid.begin());
}

}  // namespace detail

/// Psi(x_i) = anchor_value * exp(integral of kappa from the anchor).
inline WaveProfile reconstruct_wavefunction(const std::vector<double>& grid, const std::vector<cplx>& kappa,
                                            double anchor_x, cplx anchor_value) {
    if (grid.size() != kappa.size()) throw grid_mismatch("grid and kappa sizes differ");
    if (grid.size() < 3) throw grid_too_coarse("reconstruction needs at least 3 grid points");
    const std::size_t k = detail::grid_index_of(grid, anchor_x);
    const double h = grid_spacing(grid);

    std::vector<cplx> right(kappa.begin() + static_cast<std::ptrdiff_t>(k), kappa.end());
    std::vector<cplx> left(kappa.rend() - static_cast<std::ptrdiff_t>(k) - 1, kappa.rend());
    const auto ir = detail::cumulative_simpson(right, h);
    const auto il = detail::cumulative_simpson(left, h);

    WaveProfile w;
    w.grid = grid;
    w.anchor_x = grid[k];
    w.anchor_index = k;
    w.anchor_value = anchor_value;
    w.psi.resize(grid.size());
    for (std::size_t i = k; i < grid.size(); ++i) w.psi[i] = anchor_value * std::exp(ir[i - k]);
    for (std::size_t i = 0; i < k; ++i) w.psi[i] = anchor_value * std::exp(-il[k - i]);
    w.psi[k] = anchor_value;
    return w;
}

inline WaveProfile reconstruct_wavefunction(const Kappa1Branch& br, double anchor_x, cplx anchor_value) {
    auto w = reconstruct_wavefunction(br.grid, br.values, anchor_x, anchor_value);
    w.ambiguous_x = br.ambiguous_x;
    return w;
}

struct ScalingFit {
    double x_star = 0.0;
    int turning_order = 0;
    std::vector<double> lambdas;
    std::vector<double> abs_kappa;
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  // 95%
    double expected = 0.0;               // -2/(n+2)
    double max_fit_residual = 0.0;       // in log|kappa|
};

struct LineFit {
    double slope = 0.0, intercept = 0.0, slope_stderr = 0.0, max_residual = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    LineFit f;
    if (n < 2) return f;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
        f.max_residual = std::max(f.max_residual, std::abs(e));
    }
    if (n > 2) f.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    return f;
}

/// Least-squares slope of log|kappa1(x*)| against log lambda.
inline ScalingFit hbar_scaling_fit(const PhysicalConfig& cfg, const PotentialModel& model, int order,
                                   double x_star, const std::vector<double>& lambdas,
                                   const SolveOptions& opt = {}) {
    if (lambdas.size() < 5) throw invalid_argument("scaling fit needs at least 5 lambda samples");
    const auto [lo, hi] = std::minmax_element(lambdas.begin(), lambdas.end());
    if (!(*lo > 0.0)) throw invalid_argument("lambda samples must be positive");
    if (*hi / *lo < 10.0 * (1.0 - 1e-12)) throw invalid_argument("lambda samples must span a decade");

    ScalingFit fit;
    fit.x_star = x_star;
    fit.turning_order = turning_point_order_at(cfg, model, x_star, opt.grid_points);
    fit.expected = -2.0 / (fit.turning_order + 2.0);
    fit.lambdas = lambdas;
    fit.abs_kappa.resize(lambdas.size());

    std::vector<double> lx, ly;
    for (std::size_t s = 0; s < lambdas.size(); ++s) {
        PhysicalConfig c = cfg;
        c.hbar_multiplier = lambdas[s];
        const auto sol = solve_kappa1(c, model, order, opt);
        fit.abs_kappa[s] = std::abs(kappa1_at(sol.kappa1, c, model, x_star));
        lx.push_back(std::log(lambdas[s]));
        ly.push_back(std::log(fit.abs_kappa[s]));
    }
    const auto lf = least_squares_line(lx, ly);
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.max_fit_residual = lf.max_residual;
    const boost::math::students_t dist(static_cast<double>(lambdas.size() - 2));
    const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
    fit.ci_low = lf.slope - tq * lf.slope_stderr;
    fit.ci_high = lf.slope + tq * lf.slope_stderr;
    return fit;
}

/// Number of roots at x0 whose modulus is within 20% of the largest root
/// that scales as lambda^(-2/(n+2)). Scaling is checked between lambda and lambda/4.
inline int leading_root_multiplicity(const PhysicalConfig& cfg, const PotentialModel& model, int order,
                                     double x0, int n, double lambda) {
    if (n < 0 || n > order) throw invalid_argument("turning-point order must satisfy 0 <= n <= N");
    auto roots_at = [&](double lam) {
        PhysicalConfig c = cfg;
        c.hbar_multiplier = lam;
        return solve_roots(assemble_polynomial(QVector{eval_Q_vector(c, model, x0, order)}, x0)).roots;
    };
    const auto r1 = roots_at(lambda);
    const auto r2 = roots_at(lambda / 4.0);
    const double factor = std::pow(4.0, 2.0 / (n + 2.0));

    double largest = 0.0;
    for (const auto& r : r1) {
        const cplx target = r * factor;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& s : r2) best = std::min(best, std::abs(s - target));
        if (std::abs(r) > 0.0 && best <= 0.1 * std::abs(target)) largest = std::max(largest, std::abs(r));
    }
    if (largest == 0.0) return 0;
    int count = 0;
    for (const auto& r : r1)
        if (std::abs(std::abs(r) - largest) <= 0.2 * largest) ++count;
    return count;
}

/// x_b refined between grid points; `resolve(x, hint)` evaluates kappa1 off grid.
inline std::optional<double> find_xb(const Kappa1Branch& br,
                                     const std::function<cplx(double, cplx)>& resolve = {}) {
    const auto xb = grid_xb(br.grid, br.values, br.q0);
    if (!xb || !resolve) return xb;
    const double thr = xb_threshold * br.max_abs();
    const std::size_t i = detail::grid_index_of(br.grid, *xb);
    if (i == 0 || !(br.q0[i - 1] > 0.0)) return xb;
    double lo = br.grid[i - 1], hi = br.grid[i];
    cplx klo = br.values[i - 1], khi = br.values[i];
    const double tol = 1e-12 * (br.grid.back() - br.grid.front());
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const cplx k = resolve(mid, 0.5 * (klo + khi));
        if (std::abs(k.imag()) < thr) {
            hi = mid;
            khi = k;
        } else {
            lo = mid;
            klo = k;
        }
    }
    return hi;
}

/// The exact Riccati solution sampled as a branch.
inline Kappa1Branch oracle_branch(const LinearBarrierOracle& o, const PhysicalConfig& cfg,
                                  const PotentialModel& model, const std::vector<double>& grid) {
    Kappa1Branch br;
    br.grid = grid;
    br.values.resize(grid.size());
    br.q0.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        br.values[i] = exact_riccati_y(o, grid[i]);
        br.q0[i] = eval_Q(cfg, model, grid[i], 0);
    }
    // Im y = rho / (pi |Psi|^2) is positive but falls far below the relative
    // threshold used for approximate branches, so only exact vanishing counts
    br.x_b = grid_xb(br.grid, br.values, br.q0, 0.0);
    br.order = -1;
    return br;
}

struct ErrorRow {
    double x;
    cplx approx, exact;
    double abs_error;
    bool included;
};

struct ErrorMetrics {
    double linf = 0.0, rms = 0.0;
    double rel_linf = 0.0, rel_rms = 0.0;  // divided by max |exact| and rms |exact|
    double re_linf = 0.0, im_linf = 0.0;
    double re_rms = 0.0, im_rms = 0.0;
    double re_rel_linf = 0.0, im_rel_linf = 0.0;
    std::size_t included = 0;
    std::vector<ErrorRow> rows;
};

inline ErrorMetrics error_metrics(const std::vector<double>& grid, const std::vector<cplx>& approx,
                                  const std::vector<double>& exact_grid, const std::vector<cplx>& exact,
                                  const std::vector<double>& guard_centers = {}, double guard = 0.5) {
    if (grid.size() != exact_grid.size() || approx.size() != grid.size() || exact.size() != grid.size())
        throw grid_mismatch("error_metrics: grids differ in size");
    const double span = grid.empty() ? 0.0 : std::abs(grid.back() - grid.front());
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - exact_grid[i]) > 1e-12 * std::max(span, 1.0))
            throw grid_mismatch("error_metrics: grids differ at index " + std::to_string(i));

    const auto keep = guard_mask(grid, guard_centers, guard);
    ErrorMetrics e;
    double s2 = 0.0, sr2 = 0.0, si2 = 0.0, ex2 = 0.0, exmax = 0.0, remax = 0.0, immax = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx d = approx[i] - exact[i];
        const double err = std::abs(d);
        e.rows.push_back({grid[i], approx[i], exact[i], err, static_cast<bool>(keep[i])});
        if (!keep[i]) continue;
        ++e.included;
        e.linf = std::max(e.linf, err);
        e.re_linf = std::max(e.re_linf, std::abs(d.real()));
        e.im_linf = std::max(e.im_linf, std::abs(d.imag()));
        s2 += err * err;
        sr2 += d.real() * d.real();
        si2 += d.imag() * d.imag();
        ex2 += std::norm(exact[i]);
        exmax = std::max(exmax, std::abs(exact[i]));
        remax = std::max(remax, std::abs(exact[i].real()));
        immax = std::max(immax, std::abs(exact[i].imag()));
    }
    if (e.included == 0) return e;
    const double n = static_cast<double>(e.included);
    e.rms = std::sqrt(s2 / n);
    e.re_rms = std::sqrt(sr2 / n);
    e.im_rms = std::sqrt(si2 / n);
    e.rel_linf = exmax > 0.0 ? e.linf / exmax : e.linf;
    e.rel_rms = ex2 > 0.0 ? std::sqrt(s2 / ex2) : e.rms;
    e.re_rel_linf = remax > 0.0 ? e.re_linf / remax : e.re_linf;
    e.im_rel_linf = immax > 0.0 ? e.im_linf / immax : e.im_linf;
    return e;
}

/// kappa1 against y = Psi'/Psi of the oracle.
inline ErrorMetrics error_metrics(const Kappa1Branch& br, const LinearBarrierOracle& o, double guard = 0.5) {
    std::vector<cplx> exact(br.grid.size());
    for (std::size_t i = 0; i < br.grid.size(); ++i) exact[i] = exact_riccati_y(o, br.grid[i]);
    return error_metrics(br.grid, br.values, br.grid, exact, br.ambiguous_x, guard);
}

/// Reconstructed Psi against Bi + i Ai.
inline ErrorMetrics error_metrics(const WaveProfile& w, const LinearBarrierOracle& o, double guard = 0.5) {
    std::vector<cplx> exact(w.grid.size());
    for (std::size_t i = 0; i < w.grid.size(); ++i) exact[i] = exact_psi(o, w.grid[i]);
    return error_metrics(w.grid, w.psi, w.grid, exact, w.ambiguous_x, guard);
}

inline ErrorMetrics error_metrics(const Kappa1Branch& a, const Kappa1Branch& b, double guard = 0.5) {
    return error_metrics(a.grid, a.values, b.grid, b.values, a.ambiguous_x, guard);
}

}  // namespace twkb
