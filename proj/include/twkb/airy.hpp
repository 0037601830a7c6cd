#pragma once

// Real-argument Airy functions and the exact solution for a linear barrier.
//
// Regimes (|t| <= 30):
//   t < -8          oscillatory asymptotic expansion, optimally truncated
//   -8 <= t <= 2.2  Maclaurin series  Ai = c1 f - c2 g,  Bi = sqrt(3) (c1 f + c2 g)
//   t > 2.2         Ai, Ai' from K_{1/3}, K_{2/3} (Steed continued fraction);
//                   Bi, Bi' from the Maclaurin series, whose terms are all positive.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "twkb/errors.hpp"
#include "twkb/physics.hpp"

namespace twkb {

struct AiryValue {
    double t = 0.0;
    double ai = 0.0, aip = 0.0, bi = 0.0, bip = 0.0;

    double wronskian() const { return ai * bip - aip * bi; }
};

/// Ai(0) and -Ai'(0). Long double so the series cancellation near t = -8
/// does not expose the rounding of the constants.
struct AiryConstants {
    long double c1 = 0.355028053887817239260063186004183176L;
    long double c2 = 0.258819403792806798405183560189203963L;
};

inline constexpr double airy_envelope = 30.0;

namespace detail {

inline AiryValue airy_series(double t, const AiryConstants& k = {}) {
    // f = sum fk, g = sum gk with fk = a_k t^{3k}, gk = b_k t^{3k+1}; extended precision
    using ld = long double;
    const ld x = t;
    const ld x3 = x * x * x;
    ld fk = 1.0L, gk = x;
    ld f = fk, g = gk, fp = 0.0L, gp = 1.0L;
    for (int n = 0; n < 800; ++n) {
        const ld kk = n;
        // derivative terms: d/dt (a_{n+1} t^{3n+3}) = (3n+3) a_{n+1} t^{3n+2}
        const ld fpk = fk * x * x / (3.0L * kk + 2.0L);
        const ld gpk = gk * x * x / (3.0L * kk + 3.0L);
        fk *= x3 / ((3.0L * kk + 2.0L) * (3.0L * kk + 3.0L));
        gk *= x3 / ((3.0L * kk + 3.0L) * (3.0L * kk + 4.0L));
        f += fk;
        g += gk;
        fp += fpk;
        gp += gpk;
        const ld tol = 1e-21L;
        if (n > 2 && std::abs(fk) <= tol * std::abs(f) && std::abs(gk) <= tol * std::abs(g) &&
            std::abs(fpk) <= tol * std::abs(fp) && std::abs(gpk) <= tol * std::abs(gp))
            break;
    }
    const ld sqrt3 = 1.732050807568877293527446341505872367L;
    return {t, static_cast<double>(k.c1 * f - k.c2 * g), static_cast<double>(k.c1 * fp - k.c2 * gp),
            static_cast<double>(sqrt3 * (k.c1 * f + k.c2 * g)),
            static_cast<double>(sqrt3 * (k.c1 * fp + k.c2 * gp))};
}

/// K_nu(x) and K_{nu+1}(x) for |nu| <= 1/2 by Steed's continued fraction; converges for x >~ 1 only.
inline std::pair<double, double> bessel_k_cf2(double nu, double x) {
    constexpr double eps = std::numeric_limits<double>::epsilon() / 2.0;
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - nu * nu;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 2; i <= 100000; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / i;
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < eps) break;
    }
    h = a1 * h;
    const double k_nu = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) / s;
    const double k_nu1 = k_nu * (nu + x + 0.5 - h) / x;
    return {k_nu, k_nu1};
}

/// Ai, Ai' for t > 0 through the modified Bessel function K.
inline std::pair<double, double> airy_ai_bessel(double t) {
    const double zeta = 2.0 / 3.0 * t * std::sqrt(t);
    const auto [k13, k43] = bessel_k_cf2(1.0 / 3.0, zeta);
    const double k23 = k43 - (2.0 / (3.0 * zeta)) * k13;
    const double ai = std::sqrt(t / 3.0) * k13 / std::numbers::pi;
    const double aip = -t / (std::numbers::pi * std::numbers::sqrt3) * k23;
    return {ai, aip};
}

struct asymptotic_sums {
    double c_even, c_odd, d_even, d_odd;  // alternating sums in 1/zeta^2
    double c_all, c_alt, d_all, d_alt;     // plain and alternating sums in 1/zeta
};

/// Optimally truncated sums of c_k zeta^-k and d_k zeta^-k.
inline asymptotic_sums airy_asymptotic_sums(double zeta) {
    asymptotic_sums s{1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0};
    double ck = 1.0;
    double zk = 1.0;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        const double kk = static_cast<double>(k);
        ck *= (6.0 * kk - 5.0) * (6.0 * kk - 3.0) * (6.0 * kk - 1.0) / (216.0 * kk * (2.0 * kk - 1.0));
        const double dk = -(6.0 * kk + 1.0) / (6.0 * kk - 1.0) * ck;
        zk /= zeta;
        const double tc = ck * zk, td = dk * zk;
        const double mag = std::max(std::abs(tc), std::abs(td));
        if (mag >= last) break;  // smallest term passed
        last = mag;
        const double sign_alt = (k % 2 == 0) ? 1.0 : -1.0;
        s.c_all += tc;
        s.d_all += td;
        s.c_alt += sign_alt * tc;
        s.d_alt += sign_alt * td;
        // (-1)^j c_{2j} / zeta^{2j} and (-1)^j c_{2j+1} / zeta^{2j+1}
        const int j = k / 2;
        const double sj = (j % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            s.c_even += sj * tc;
            s.d_even += sj * td;
        } else {
            s.c_odd += sj * tc;
            s.d_odd += sj * td;
        }
        if (mag < 1e-18) break;
    }
    return s;
}

/// Oscillatory expansion, valid for t << 0.
inline AiryValue airy_asymptotic_negative(double t) {
    const double z = -t;
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    const auto s = airy_asymptotic_sums(zeta);
    const double th = zeta + std::numbers::pi / 4.0;
    const double sn = std::sin(th), cs = std::cos(th);
    const double pre = 1.0 / (std::sqrt(std::numbers::pi) * std::pow(z, 0.25));
    const double pred = std::pow(z, 0.25) / std::sqrt(std::numbers::pi);
    AiryValue v;
    v.t = t;
    v.ai = pre * (sn * s.c_even - cs * s.c_odd);
    v.bi = pre * (cs * s.c_even + sn * s.c_odd);
    v.aip = -pred * (cs * s.d_even + sn * s.d_odd);
    v.bip = pred * (sn * s.d_even - cs * s.d_odd);
    return v;
}

/// Exponential-regime expansion, valid for t >> 0.
inline AiryValue airy_asymptotic_positive(double t) {
    const double zeta = 2.0 / 3.0 * t * std::sqrt(t);
    const auto s = airy_asymptotic_sums(zeta);
    const double sp = std::sqrt(std::numbers::pi);
    const double q = std::pow(t, 0.25);
    AiryValue v;
    v.t = t;
    v.ai = std::exp(-zeta) / (2.0 * sp * q) * s.c_alt;
    v.aip = -q * std::exp(-zeta) / (2.0 * sp) * s.d_alt;
    v.bi = std::exp(zeta) / (sp * q) * s.c_all;
    v.bip = q * std::exp(zeta) / sp * s.d_all;
    return v;
}

inline constexpr double oscillatory_crossover = -8.0;
inline constexpr double bessel_crossover = 2.2;

}  // namespace detail

/// Ai, Ai', Bi, Bi' at real t, |t| <= 30.
inline AiryValue airy_eval(double t, const AiryConstants& k = {}) {
    if (!(std::abs(t) <= airy_envelope))
        throw out_of_envelope("Airy argument " + std::to_string(t) + " outside |t| <= 30");
    if (t < detail::oscillatory_crossover) return detail::airy_asymptotic_negative(t);
    AiryValue v = detail::airy_series(t, k);
    if (t > detail::bessel_crossover) {
        const auto [ai, aip] = detail::airy_ai_bessel(t);
        v.ai = ai;
        v.aip = aip;
    }
    return v;
}

/// Exact solution data for V(x) = (1 + x/d) V0.
struct LinearBarrierOracle {
    double rho = 0.0;      // nm^-1
    double x_turn = 0.0;   // V(x_turn) = E
    double a = 0.0, b = 0.0;
};

/// rho = [(V0/d) / (lambda^2 hbar^2/2m)]^(1/3); an override replaces the value.
inline LinearBarrierOracle make_oracle(const PhysicalConfig& cfg, const PotentialModel& model,
                                       std::optional<double> rho_override = std::nullopt) {
    cfg.validate();
    if (!model.is_linear()) throw not_linear("exact oracle needs the linear potential");
    const double slope = model.v0() / model.d();
    const double lam = cfg.hbar_multiplier;
    const double rho3 = (slope / cfg.inv_mass_scale) / (lam * lam);
    if (!(rho3 > 0.0)) throw invalid_argument("oracle requires rho > 0 (positive potential slope)");
    LinearBarrierOracle o;
    o.rho = rho_override ? *rho_override : std::cbrt(rho3);
    if (!(o.rho > 0.0)) throw invalid_argument("rho must be positive");
    o.x_turn = model.d() * (cfg.energy / model.v0() - 1.0);
    o.a = cfg.a;
    o.b = cfg.b;
    return o;
}

inline AiryValue oracle_airy(const LinearBarrierOracle& o, double x) {
    return airy_eval(o.rho * (x - o.x_turn));
}

/// y = rho (Bi' + i Ai') / (Bi + i Ai) at rho (x - x_turn).
inline std::complex<double> exact_riccati_y(const LinearBarrierOracle& o, double x) {
    const auto v = oracle_airy(o, x);
    return o.rho * std::complex<double>(v.bip, v.aip) / std::complex<double>(v.bi, v.ai);
}

/// Psi = Bi + i Ai.
inline std::complex<double> exact_psi(const LinearBarrierOracle& o, double x) {
    const auto v = oracle_airy(o, x);
    return {v.bi, v.ai};
}

}  // namespace twkb
