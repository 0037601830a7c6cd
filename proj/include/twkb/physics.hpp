#pragma once

// Physical configuration, polynomial potentials and Q^(m)(x) = d^m/dx^m [(V - E) / (lambda^2 hbar^2/2m)].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "twkb/errors.hpp"
#include "twkb/grid.hpp"

namespace twkb {

/// hbar^2 / (2 m_e) in eV nm^2.
inline constexpr double default_inv_mass_scale = 0.0380998;

struct PhysicalConfig {
    double energy = 0.0;                            // eV
    double inv_mass_scale = default_inv_mass_scale; // eV nm^2
    double hbar_multiplier = 1.0;                   // lambda, hbar -> lambda * hbar
    double a = 0.0;                                 // nm
    double b = 1.0;                                 // nm

    void validate() const {
        if (!(inv_mass_scale > 0.0)) throw invalid_argument("inv_mass_scale must be positive");
        if (!(hbar_multiplier > 0.0)) throw invalid_argument("hbar multiplier must be positive");
        if (!(a < b)) throw invalid_argument("interval requires a < b");
    }
};

/// Smooth potential on [a, b]. Both variants are stored as polynomial
/// coefficients c_k (eV nm^-k) so derivatives of any order are exact.
class PotentialModel {
public:
    enum class Kind { linear, polynomial };

    /// V(x) = (1 + x/d) V0.
    static PotentialModel linear(double v0, double d) {
        if (d == 0.0) throw invalid_argument("linear potential: d must be nonzero");
        PotentialModel m;
        m.kind_ = Kind::linear;
        m.v0_ = v0;
        m.d_ = d;
        m.coeffs_ = {v0, v0 / d};
        return m;
    }

    /// V(x) = sum_k c_k x^k.
    static PotentialModel polynomial(std::vector<double> coeffs) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        PotentialModel m;
        m.kind_ = Kind::polynomial;
        m.coeffs_ = std::move(coeffs);
        return m;
    }

    Kind kind() const noexcept { return kind_; }
    bool is_linear() const noexcept { return kind_ == Kind::linear; }
    double v0() const noexcept { return v0_; }
    double d() const noexcept { return d_; }
    const std::vector<double>& coefficients() const noexcept { return coeffs_; }
    std::size_t degree() const noexcept { return coeffs_.size() - 1; }

    /// Re-encode as a plain polynomial with identical coefficients.
    PotentialModel as_polynomial() const { return polynomial(coeffs_); }

private:
    PotentialModel() = default;

    Kind kind_ = Kind::polynomial;
    double v0_ = 0.0;
    double d_ = 0.0;
    std::vector<double> coeffs_{0.0};
};

/// d^k V / dx^k at x; zero for k above the polynomial degree.
inline double eval_potential_derivative(const PotentialModel& model, double x, int k) {
    if (k < 0) throw invalid_argument("derivative order must be non-negative");
    const auto& c = model.coefficients();
    const auto order = static_cast<std::size_t>(k);
    if (order >= c.size()) return 0.0;
    // Horner over j = deg..k of c_j * j!/(j-k)! * x^(j-k)
    double acc = 0.0;
    for (std::size_t j = c.size(); j-- > order;) {
        double falling = 1.0;
        for (std::size_t t = 0; t < order; ++t) falling *= static_cast<double>(j - t);
        acc = acc * x + c[j] * falling;
    }
    return acc;
}

/// Q^(m)(x) in nm^-(m+2).
inline double eval_Q(const PhysicalConfig& cfg, const PotentialModel& model, double x, int m) {
    double num = eval_potential_derivative(model, x, m);
    if (m == 0) num -= cfg.energy;
    const double lam = cfg.hbar_multiplier;
    return (num / cfg.inv_mass_scale) / (lam * lam);
}

/// Q^(0)..Q^(N) at x.
inline std::vector<double> eval_Q_vector(const PhysicalConfig& cfg, const PotentialModel& model,
                                         double x, int order) {
    std::vector<double> q(static_cast<std::size_t>(order) + 1);
    for (int m = 0; m <= order; ++m) q[static_cast<std::size_t>(m)] = eval_Q(cfg, model, x, m);
    return q;
}

struct TurningPoint {
    double x0 = 0.0;
    int order = 0;
};

namespace detail {

inline double bisect_root(const PhysicalConfig& cfg, const PotentialModel& model, int k,
                          double lo, double hi, double tol) {
    double flo = eval_Q(cfg, model, lo, k);
    for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_Q(cfg, model, mid, k);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

/// All zeros of Q^(0) in [a, b] with their turning-point order.
///
/// Odd-order zeros are bracketed by sign changes of Q^(0). Even-order zeros
/// do not change sign, so candidates are also drawn from the zeros of
/// Q^(k), k >= 1, and kept when every lower derivative vanishes. A derivative
/// counts as zero when |Q^(k)(x0)| <= tol * max_grid |Q^(k)|.
inline std::vector<TurningPoint> classify_turning_points(const PhysicalConfig& cfg,
                                                         const PotentialModel& model,
                                                         std::size_t grid_resolution,
                                                         double tol = 1e-8) {
    cfg.validate();
    if (grid_resolution < 3) throw invalid_argument("grid_resolution must be at least 3");

    const auto grid = uniform_grid(cfg.a, cfg.b, grid_resolution);
    const int max_order = static_cast<int>(model.degree()) + 1;
    const double xtol = (cfg.b - cfg.a) * 1e-12;

    std::vector<double> scale(static_cast<std::size_t>(max_order) + 1, 0.0);
    for (int k = 0; k <= max_order; ++k)
        for (double x : grid)
            scale[static_cast<std::size_t>(k)] =
                std::max(scale[static_cast<std::size_t>(k)], std::abs(eval_Q(cfg, model, x, k)));

    auto vanishes = [&](double x, int k) {
        return std::abs(eval_Q(cfg, model, x, k)) <= tol * scale[static_cast<std::size_t>(k)];
    };

    // Q^(0) within tolerance of zero over the whole grid: no isolated turning points.
    if (std::all_of(grid.begin(), grid.end(), [&](double x) { return vanishes(x, 0); }))
        throw degenerate_interval("Q^(0) vanishes identically on the interval");

    std::vector<double> candidates;
    for (int k = 0; k < max_order; ++k) {
        if (scale[static_cast<std::size_t>(k)] == 0.0) continue;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double fi = eval_Q(cfg, model, grid[i], k);
            if (fi == 0.0) {
                candidates.push_back(grid[i]);
                continue;
            }
            if (i + 1 < grid.size()) {
                const double fj = eval_Q(cfg, model, grid[i + 1], k);
                if (fj != 0.0 && ((fi < 0.0) != (fj < 0.0)))
                    candidates.push_back(detail::bisect_root(cfg, model, k, grid[i], grid[i + 1], xtol));
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());

    std::vector<TurningPoint> out;
    const double dedupe = (cfg.b - cfg.a) * 1e-9;
    for (double x : candidates) {
        if (!out.empty() && std::abs(x - out.back().x0) <= dedupe) continue;
        if (!vanishes(x, 0)) continue;
        int n = 1;
        while (n <= max_order && vanishes(x, n)) ++n;
        if (n > max_order)
            throw degenerate_interval("all derivatives of Q vanish at x = " + std::to_string(x));
        out.push_back({x, n});
    }
    return out;
}

/// Turning-point order at a given point (0 when Q^(0)(x) does not vanish).
inline int turning_point_order_at(const PhysicalConfig& cfg, const PotentialModel& model, double x,
                                  std::size_t grid_resolution = 2001, double tol = 1e-8) {
    const auto grid = uniform_grid(cfg.a, cfg.b, grid_resolution);
    const int max_order = static_cast<int>(model.degree()) + 1;
    int n = 0;
    while (n <= max_order) {
        double scale = 0.0;
        for (double g : grid) scale = std::max(scale, std::abs(eval_Q(cfg, model, g, n)));
        if (std::abs(eval_Q(cfg, model, x, n)) > tol * scale) break;
        ++n;
    }
    return n;
}

}  // namespace twkb
