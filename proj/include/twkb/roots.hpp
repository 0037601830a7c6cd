#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "twkb/errors.hpp"
#include "twkb/kappa_system.hpp"

namespace twkb {

/// All roots of one kappa polynomial.
struct RootSet {
    double x = 0.0;
    std::vector<cplx> roots;
    int iterations = 0;
    double max_residual = 0.0;  // max relative residual |p(r)| / sum |p_j||r|^j
};

struct RootOptions {
    int max_iterations = 200;
    double residual_bound = 1e-10;
};

namespace detail {

struct eval_result {
    cplx p;
    cplx dp;
};

inline eval_result horner_with_derivative(const std::vector<double>& c, cplx z) {
    cplx p = 0.0, dp = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[j];
    }
    return {p, dp};
}

/// Refine the real quadratic factor x^2 - r x - s of p by Bairstow's method.
/// Returns (u, v) of the equivalent form x^2 + u x + v.
inline std::optional<std::pair<double, double>> bairstow(const std::vector<double>& a, double u,
                                                         double v, int max_iter = 60) {
    const std::size_t n = a.size() - 1;
    if (n < 2) return std::nullopt;
    if (n == 2) return std::make_pair(a[1] / a[2], a[0] / a[2]);
    double r = -u, s = -v;
    std::vector<double> b(n + 3, 0.0), c(n + 3, 0.0);
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = n + 1; i-- > 0;) b[i] = a[i] + r * b[i + 1] + s * b[i + 2];
        for (std::size_t i = n + 1; i-- > 1;) c[i] = b[i] + r * c[i + 1] + s * c[i + 2];
        const double det = c[2] * c[2] - c[3] * c[1];
        if (det == 0.0 || !std::isfinite(det)) return std::nullopt;
        const double dr = (-b[1] * c[2] + b[0] * c[3]) / det;
        const double ds = (-b[0] * c[2] + b[1] * c[1]) / det;
        r += dr;
        s += ds;
        if (!std::isfinite(r) || !std::isfinite(s)) return std::nullopt;
        if (std::abs(dr) <= 1e-16 * (1.0 + std::abs(r)) && std::abs(ds) <= 1e-16 * (1.0 + std::abs(s)))
            break;
    }
    return std::make_pair(-r, -s);
}

inline std::pair<cplx, cplx> quadratic_roots(double u, double v) {
    // x^2 + u x + v
    const double disc = u * u - 4.0 * v;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double q = -0.5 * (u + std::copysign(s, u));
        if (q == 0.0) return {0.0, 0.0};
        return {q, v / q};
    }
    const double re = -0.5 * u;
    const double im = 0.5 * std::sqrt(-disc);
    return {cplx(re, im), cplx(re, -im)};
}


/// Replace raw iterates by exact conjugate pairs and exact reals.
inline std::vector<cplx> enforce_conjugate_symmetry(const std::vector<cplx>& z,
                                                    const KappaPolynomial& p) {
    constexpr double near_real = 1e-6;
    const double eps = std::numeric_limits<double>::epsilon();
    const std::size_t m = z.size();
    double scale = 0.0;
    for (const cplx& r : z) scale = std::max(scale, std::abs(r));

    std::vector<cplx> out;
    out.reserve(m);
    std::vector<bool> used(m, false);

    // genuinely complex roots: pair each upper root with the nearest lower conjugate
    for (std::size_t k = 0; k < m; ++k) {
        if (used[k] || z[k].imag() <= near_real * std::abs(z[k])) continue;
        std::size_t best = m;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m; ++j) {
            if (used[j] || j == k || z[j].imag() >= -near_real * std::abs(z[j])) continue;
            const double dist = std::abs(std::conj(z[k]) - z[j]);
            if (dist < best_d) {
                best_d = dist;
                best = j;
            }
        }
        if (best == m) continue;
        used[k] = used[best] = true;
        const cplx mean = 0.5 * (z[k] + std::conj(z[best]));
        out.push_back(mean);
        out.push_back(std::conj(mean));
    }

    // near-real roots; close couples may be a double root or a narrow pair
    std::vector<std::size_t> real_idx;
    for (std::size_t k = 0; k < m; ++k)
        if (!used[k] && std::abs(z[k].imag()) <= near_real * std::abs(z[k])) real_idx.push_back(k);
    std::sort(real_idx.begin(), real_idx.end(),
              [&](std::size_t a, std::size_t b) { return z[a].real() < z[b].real(); });
    for (std::size_t t = 0; t < real_idx.size(); ++t) {
        const std::size_t k = real_idx[t];
        used[k] = true;
        const cplx rk(z[k].real(), 0.0);
        if (t + 1 < real_idx.size()) {
            const std::size_t j = real_idx[t + 1];
            const cplx rj(z[j].real(), 0.0);
            if (std::abs(rk - rj) <= 1e-3 * scale) {
                const double u = -(rk.real() + rj.real());
                const double v = rk.real() * rj.real();
                if (auto f = bairstow(p.coeffs, u, v)) {
                    auto [q1, q2] = quadratic_roots(f->first, f->second);
                    const double before = std::max(p.relative_residual(rk), p.relative_residual(rj));
                    const double after = std::max(p.relative_residual(q1), p.relative_residual(q2));
                    if (after <= std::max(before, 4.0 * eps)) {
                        used[j] = true;
                        out.push_back(q1);
                        out.push_back(q2);
                        ++t;
                        continue;
                    }
                }
            }
        }
        out.push_back(rk);
    }

    // leftovers (unmatched complex roots) are kept as computed
    for (std::size_t k = 0; k < m; ++k)
        if (!used[k]) out.push_back(z[k]);
    return out;
}

}  // namespace detail

/// Roots of p by Aberth-Ehrlich simultaneous iteration.
///
/// Non-real roots are paired with their conjugates and symmetrized. Pairs
/// that are almost real are re-derived from a Bairstow-refined quadratic
/// factor, so a double real root is never reported with spurious +-i noise.
inline RootSet solve_roots(const KappaPolynomial& p, const RootOptions& opt = {}) {
    const std::size_t n = p.degree();
    if (n < 1) throw invalid_argument("solve_roots: degree must be at least 1");
    if (p.leading() == 0.0) throw invalid_argument("solve_roots: zero leading coefficient");

    RootSet out;
    out.x = p.x;

    // Zero roots factor out exactly.
    std::size_t zeros = 0;
    while (zeros < n && p.coeffs[zeros] == 0.0) ++zeros;
    std::vector<double> c(p.coeffs.begin() + static_cast<std::ptrdiff_t>(zeros), p.coeffs.end());
    const std::size_t m = c.size() - 1;

    std::vector<cplx> z(m);
    if (m > 0) {
        double radius = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            radius = std::max(radius, std::pow(std::abs(c[j] / c[m]), 1.0 / static_cast<double>(m - j)));
        // perturbed circle, offset so no guess sits on the real axis
        for (std::size_t k = 0; k < m; ++k) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m) + 0.4;
            z[k] = radius * cplx(std::cos(th), std::sin(th));
        }

        const KappaPolynomial reduced{c, p.x, p.order};
        const double eps = std::numeric_limits<double>::epsilon();
        std::vector<bool> done(m, false);
        int it = 0;
        for (; it < opt.max_iterations; ++it) {
            bool all_done = true;
            for (std::size_t k = 0; k < m; ++k) {
                if (done[k]) continue;
                const auto [pv, dpv] = detail::horner_with_derivative(c, z[k]);
                if (std::abs(pv) <= 4.0 * eps * static_cast<double>(m) * reduced.magnitude(z[k])) {
                    done[k] = true;
                    continue;
                }
                all_done = false;
                const cplx ratio = pv / dpv;
                cplx sum = 0.0;
                for (std::size_t j = 0; j < m; ++j)
                    if (j != k) sum += 1.0 / (z[k] - z[j]);
                const cplx w = ratio / (1.0 - ratio * sum);
                if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
                    // stationary point of p: nudge off it
                    z[k] = z[k] * cplx(1.0 + 1e-3, 1e-3) + cplx(1e-3 * (radius + 1.0), 0.0);
                    continue;
                }
                z[k] -= w;
                if (std::abs(w) <= eps * std::abs(z[k])) done[k] = true;
            }
            if (all_done) break;
        }
        out.iterations = it;

        z = detail::enforce_conjugate_symmetry(z, reduced);
    }

    out.roots.assign(zeros, cplx(0.0, 0.0));
    out.roots.insert(out.roots.end(), z.begin(), z.end());

    for (const cplx& r : out.roots) out.max_residual = std::max(out.max_residual, p.relative_residual(r));
    if (!(out.max_residual <= opt.residual_bound))
        throw no_convergence("Aberth iteration did not converge at x = " + std::to_string(p.x) +
                             " (residual " + std::to_string(out.max_residual) + ")");
    return out;
}

}  // namespace twkb
