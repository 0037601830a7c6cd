#pragma once

// The zeroth-order RED system and its elimination to one polynomial in kappa.
//
// With y^(m) = m! a_m kappa^(m+1) the system reads
//   (m+1) a_{m+1} + sum_{k=0}^{m} a_{m-k} a_k = Q^(m) / (m! kappa^(m+2)),  m < N
//   sum_{k=0}^{N} a_{N-k} a_k                = Q^(N) / (N! kappa^(N+2))
// Every a_m is a polynomial in w = 1/kappa of degree m+1, so the last line
// becomes a polynomial of degree N+2 in kappa after multiplying by kappa^(N+2).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "twkb/errors.hpp"

namespace twkb {

using cplx = std::complex<double>;

/// Q^(0)..Q^(N) at one point.
struct QVector {
    std::vector<double> values;

    int order() const noexcept { return static_cast<int>(values.size()) - 1; }
    double operator[](std::size_t m) const { return values[m]; }
};

/// a_m(kappa) = sum_j coeffs[j] * kappa^(-j).
struct LaurentCoefficient {
    int index = 0;
    std::vector<double> coeffs;

    cplx eval(cplx kappa) const {
        const cplx w = 1.0 / kappa;
        cplx acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * w + coeffs[j];
        return acc;
    }
};

/// sum_j coeffs[j] kappa^j = 0, degree N+2.
struct KappaPolynomial {
    std::vector<double> coeffs;
    double x = 0.0;
    int order = 0;

    std::size_t degree() const noexcept { return coeffs.empty() ? 0 : coeffs.size() - 1; }
    double leading() const { return coeffs.back(); }

    cplx eval(cplx z) const {
        cplx acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * z + coeffs[j];
        return acc;
    }

    /// sum_j |p_j| |z|^j, the scale of the backward-error bound.
    double magnitude(cplx z) const {
        const double r = std::abs(z);
        double acc = 0.0;
        for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * r + std::abs(coeffs[j]);
        return acc;
    }

    double relative_residual(cplx z) const {
        const double m = magnitude(z);
        const double r = std::abs(eval(z));
        return m > 0.0 ? r / m : r;
    }
};

namespace detail {

using poly = std::vector<double>;

inline poly poly_mul(const poly& a, const poly& b) {
    poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline void poly_add_to(poly& acc, const poly& p, double scale = 1.0) {
    if (acc.size() < p.size()) acc.resize(p.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) acc[i] += scale * p[i];
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

/// sum_{k=0}^{m} a_{m-k} a_k as a polynomial in w.
inline poly convolution_sum(const std::vector<LaurentCoefficient>& a, int m) {
    poly acc{0.0};
    for (int k = 0; k <= m; ++k)
        poly_add_to(acc, poly_mul(a[static_cast<std::size_t>(m - k)].coeffs,
                                  a[static_cast<std::size_t>(k)].coeffs));
    return acc;
}

}  // namespace detail

/// a_0..a_N from the recurrence, exact polynomial arithmetic in 1/kappa.
inline std::vector<LaurentCoefficient> laurent_recurrence(const QVector& q) {
    if (q.values.empty()) throw invalid_argument("QVector must hold at least Q^(0)");
    const int n = q.order();
    std::vector<LaurentCoefficient> a;
    a.reserve(static_cast<std::size_t>(n) + 1);
    a.push_back({0, {1.0}});
    for (int m = 0; m < n; ++m) {
        detail::poly next(static_cast<std::size_t>(m) + 3, 0.0);
        next[static_cast<std::size_t>(m) + 2] = q[static_cast<std::size_t>(m)] / detail::factorial(m);
        detail::poly_add_to(next, detail::convolution_sum(a, m), -1.0);
        for (double& c : next) c /= static_cast<double>(m + 1);
        a.push_back({m + 1, std::move(next)});
    }
    return a;
}

/// Degree-(N+2) polynomial in kappa; overall sign chosen so the leading
/// coefficient is positive (its magnitude is N+1).
inline KappaPolynomial assemble_polynomial(const QVector& q, double x = 0.0) {
    const int n = q.order();
    const auto a = laurent_recurrence(q);
    detail::poly w_poly = detail::convolution_sum(a, n);
    w_poly.resize(static_cast<std::size_t>(n) + 3, 0.0);
    w_poly[static_cast<std::size_t>(n) + 2] -= q[static_cast<std::size_t>(n)] / detail::factorial(n);

    KappaPolynomial p;
    p.x = x;
    p.order = n;
    p.coeffs.assign(w_poly.rbegin(), w_poly.rend());
    if (p.leading() == 0.0)
        throw degenerate_leading_coefficient("assembled kappa polynomial lost its leading term");
    if (p.leading() < 0.0)
        for (double& c : p.coeffs) c = -c;
    return p;
}

/// surd(z, k): principal k-th root for Re z >= 0, otherwise -(-z)^(1/k).
inline cplx surd(cplx z, int k) {
    if (k < 1 || k % 2 == 0) throw invalid_argument("surd requires an odd root index");
    const double e = 1.0 / static_cast<double>(k);
    if (z == cplx(0.0, 0.0)) return 0.0;
    if (z.real() >= 0.0) return std::pow(z, e);
    return -std::pow(-z, e);
}

/// Which construction produced a closed-form root.
enum class ClosedFormBranch { principal, fallback };

struct ClosedFormResult {
    cplx kappa;
    ClosedFormBranch branch = ClosedFormBranch::principal;
    int fallback_index = -1;  // position in the fixed enumeration when branch == fallback
};

namespace detail {

inline cplx principal_sqrt(double v) { return std::sqrt(cplx(v, 0.0)); }

inline cplx cbrt_principal(cplx z) {
    if (z == cplx(0.0, 0.0)) return 0.0;
    return std::pow(z, 1.0 / 3.0);
}

// lower convention ordering: larger modulus, then Im <= 0, then Re >= 0.
inline bool prefer_candidate(cplx a, cplx b) {
    const double ma = std::abs(a), mb = std::abs(b);
    const double tol = 1e-12 * std::max(ma, mb);
    if (std::abs(ma - mb) > tol) return ma > mb;
    const double ia = a.imag(), ib = b.imag();
    if (std::abs(ia - ib) > tol) return ia < ib;
    return a.real() > b.real();
}

inline ClosedFormResult quartic_closed_form(double q0, double q1, double q2) {
    const double a2 = -4.0 * q0 / 3.0;
    const double a1 = q1 / 3.0;
    const double a0 = (q0 * q0 - 0.5 * q2) / 3.0;
    const double b2 = -a2;
    const double b1 = -4.0 * a0;
    const double b0 = 4.0 * a0 * a2 - a1 * a1;
    const double mu = b1 / 3.0 - b2 * b2 / 9.0;
    const double nu = (b1 * b2 - 3.0 * b0) / 6.0 - b2 * b2 * b2 / 27.0;

    // monic quartic kappa^4 + a2 kappa^2 + a1 kappa + a0
    auto residual = [&](cplx k) {
        const cplx k2 = k * k;
        const cplx v = (k2 + a2) * k2 + a1 * k + a0;
        const double r = std::abs(k);
        const double m = r * r * r * r + std::abs(a2) * r * r + std::abs(a1) * r + std::abs(a0);
        return m > 0.0 ? std::abs(v) / m : std::abs(v);
    };
    auto from_z = [&](cplx z, double su, double sv, double sk) {
        const cplx u = -0.5 * su * std::sqrt(z - a2);
        const cplx v = 0.5 * z + sv * std::sqrt(0.25 * z * z - a0);
        return -u + sk * std::sqrt(u * u - v);
    };

    const cplx disc = principal_sqrt(mu * mu * mu + nu * nu);
    const cplx s1 = cbrt_principal(nu + disc);
    const cplx s2 = cbrt_principal(nu - disc);
    const cplx z_principal = s1 + s2 - b2 / 3.0;
    const cplx k_principal = from_z(z_principal, 1.0, 1.0, 1.0);
    constexpr double accept = 1e-10;
    if (residual(k_principal) <= accept) return {k_principal, ClosedFormBranch::principal, -1};

    // Enumerate resolvent roots z_j = w^j t1 + w^-j t2 - b2/3 and the three sqrt signs.
    // Cardano needs t1 t2 = -mu; take the larger cube root and derive the other.
    const cplx t1 = std::abs(s1) >= std::abs(s2) ? s1 : s2;
    const cplx t2 = t1 == cplx(0.0, 0.0) ? cplx(0.0, 0.0) : -mu / t1;
    const cplx omega(-0.5, std::sqrt(3.0) / 2.0);
    ClosedFormResult best{k_principal, ClosedFormBranch::fallback, -1};
    double best_res = residual(k_principal);
    bool have_root = false;
    int idx = 0;
    for (int j = 0; j < 3; ++j) {
        const cplx wj = std::pow(omega, j);
        const cplx z = wj * t1 + std::conj(wj) * t2 - b2 / 3.0;
        for (double su : {1.0, -1.0})
            for (double sv : {1.0, -1.0})
                for (double sk : {1.0, -1.0}) {
                    const cplx k = from_z(z, su, sv, sk);
                    const double r = residual(k);
                    if (r <= accept) {
                        if (!have_root || prefer_candidate(k, best.kappa)) {
                            best = {k, ClosedFormBranch::fallback, idx};
                            best_res = r;
                        }
                        have_root = true;
                    } else if (!have_root && r < best_res) {
                        best = {k, ClosedFormBranch::fallback, idx};
                        best_res = r;
                    }
                    ++idx;
                }
    }
    return best;
}

}  // namespace detail

/// Analytic regular root kappa^(1) for N = 0, 1, 2.
///
/// N = 0: conj(sqrt(Q0)). N = 1: Cardano with q = -Q0/3, r = -Q1/4 and
/// A_{1,2} = surd(r +- sqrt(q^3 + r^2), 3); the regular root is
/// -(A1 + A2)/2 - i sqrt(3)/2 (A1 - A2). N = 2: Ferrari with the resolvent
/// cubic solved by principal cube roots, conjugated like the N = 0 rule so
/// that Im kappa <= 0 in the allowed region.
inline ClosedFormResult closed_form_kappa1_detailed(const QVector& q) {
    const int n = q.order();
    if (n < 0) throw invalid_argument("empty QVector");
    if (n > 2) throw unsupported_order("closed form available only for N <= 2");
    if (n == 0) return {std::conj(detail::principal_sqrt(q[0]))};
    if (n == 1) {
        const double qq = -q[0] / 3.0;
        const double r = -q[1] / 4.0;
        const cplx s = detail::principal_sqrt(qq * qq * qq + r * r);
        cplx a1 = surd(r + s, 3);
        cplx a2 = surd(r - s, 3);
        // a1 a2 = -q; recover the smaller one from the product to avoid cancellation
        if (std::abs(a1) >= std::abs(a2)) {
            if (a1 != cplx(0.0, 0.0)) a2 = -qq / a1;
        } else {
            a1 = -qq / a2;
        }
        const cplx i(0.0, 1.0);
        return {-0.5 * (a1 + a2) - i * (std::sqrt(3.0) / 2.0) * (a1 - a2)};
    }
    auto r = detail::quartic_closed_form(q[0], q[1], q[2]);
    r.kappa = std::conj(r.kappa);
    return r;
}

inline cplx closed_form_kappa1(const QVector& q) { return closed_form_kappa1_detailed(q).kappa; }

}  // namespace twkb
