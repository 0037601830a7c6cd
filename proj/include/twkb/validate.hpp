#pragma once

// Self-test suite behind `validate`: polynomial equivalence with the printed
// low-order forms, the Airy Wronskian, and Aberth roots against companion
// matrix eigenvalues (Eigen).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "twkb/airy.hpp"
#include "twkb/kappa_system.hpp"
#include "twkb/roots.hpp"

namespace twkb {

inline std::string format_double_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct CheckResult {
    std::string name;
    bool ok = true;
    std::string detail;
};

/// Monic coefficients of the printed forms
///   kappa^2 = Q0,  kappa^3 - kappa Q0 + Q1/2 = 0,
///   3 kappa^4 - 4 kappa^2 Q0 + kappa Q1 + Q0^2 - Q2/2 = 0.
inline std::vector<double> reference_monic(const QVector& q) {
    switch (q.order()) {
        case 0: return {-q[0], 0.0, 1.0};
        case 1: return {q[1] / 2.0, -q[0], 0.0, 1.0};
        case 2: return {(q[0] * q[0] - q[2] / 2.0) / 3.0, q[1] / 3.0, -4.0 * q[0] / 3.0, 0.0, 1.0};
        default: throw unsupported_order("reference forms exist for N <= 2");
    }
}

inline QVector random_qvector(std::mt19937_64& rng, int order) {
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    QVector q;
    for (int m = 0; m <= order; ++m) q.values.push_back(u(rng));
    return q;
}

/// Largest coefficient mismatch (relative to the largest reference coefficient),
/// residual of assembled roots in the reference form and of the closed form in
/// the assembled polynomial.
struct EquivalenceStats {
    double coeff = 0.0, roots_in_reference = 0.0, closed_form = 0.0;
};

inline EquivalenceStats equivalence_stats(int samples = 1000, std::uint64_t seed = 2019) {
    std::mt19937_64 rng(seed);
    EquivalenceStats st;
    for (int order = 0; order <= 2; ++order)
        for (int s = 0; s < samples; ++s) {
            const QVector q = random_qvector(rng, order);
            const KappaPolynomial p = assemble_polynomial(q);
            const auto ref = reference_monic(q);
            double scale = 0.0;
            for (double c : ref) scale = std::max(scale, std::abs(c));
            for (std::size_t j = 0; j < ref.size(); ++j)
                st.coeff = std::max(st.coeff, std::abs(p.coeffs[j] / p.leading() - ref[j]) / scale);

            const KappaPolynomial rp{ref, 0.0, order};
            for (const cplx& r : solve_roots(p).roots)
                st.roots_in_reference = std::max(st.roots_in_reference, rp.relative_residual(r));
            st.closed_form = std::max(st.closed_form, p.relative_residual(closed_form_kappa1(q)));
        }
    return st;
}

inline double max_wronskian_error(const AiryConstants& k = {}, int points = 100, std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < points; ++i)
        worst = std::max(worst, std::abs(airy_eval(u(rng), k).wronskian() - 1.0 / std::numbers::pi));
    return worst;
}

/// Eigenvalues of the companion matrix of sum_j c_j z^j.
inline std::vector<cplx> companion_roots(const std::vector<double>& c) {
    const int n = static_cast<int>(c.size()) - 1;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) m(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) m(i, n - 1) = -c[static_cast<std::size_t>(i)] / c.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()[i]);
    return out;
}

/// Greedy multiset distance, each pair scaled by max(1, |z|).
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const cplx& z : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](const cplx& u, const cplx& v) { return std::abs(u - z) < std::abs(v - z); });
        worst = std::max(worst, std::abs(*it - z) / std::max(1.0, std::abs(z)));
        b.erase(it);
    }
    return worst;
}

inline double max_companion_mismatch(int samples = 1000, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const std::size_t deg = (s % 2 == 0) ? 3 : 4;
        KappaPolynomial p;
        for (std::size_t j = 0; j <= deg; ++j) p.coeffs.push_back(u(rng));
        if (std::abs(p.coeffs.back()) < 0.5) p.coeffs.back() = std::copysign(0.5, p.coeffs.back());
        worst = std::max(worst, multiset_distance(solve_roots(p).roots, companion_roots(p.coeffs)));
    }
    return worst;
}

/// Runs every check; `fault` = "airy-constant" perturbs Ai(0) to exercise the failure path.
inline std::vector<CheckResult> run_validation(const std::string& fault = {}) {
    std::vector<CheckResult> out;
    const auto eq = equivalence_stats();
    out.push_back({"equivalence", eq.coeff < 1e-12 && eq.roots_in_reference < 1e-12,
                   "coeff " + format_double_short(eq.coeff) + ", roots " + format_double_short(eq.roots_in_reference)});
    out.push_back({"closed-form", eq.closed_form < 1e-12, "residual " + format_double_short(eq.closed_form)});

    AiryConstants k;
    if (fault == "airy-constant") k.c1 *= 1.0 + 1e-6L;
    const double w = max_wronskian_error(k);
    out.push_back({"wronskian", w < 1e-10, "max |W - 1/pi| " + format_double_short(w)});

    const double c = max_companion_mismatch();
    out.push_back({"companion", c < 1e-9, "max root distance " + format_double_short(c)});
    return out;
}

/// 0 when every check passes, otherwise 4 with the first failing check named.
inline int cmd_validate(const std::string& fault, bool quiet, std::ostream& out = std::cout,
                        std::ostream& err = std::cerr) {
    const auto results = run_validation(fault);
    for (const auto& r : results)
        if (!quiet) out << (r.ok ? "ok    " : "FAIL  ") << r.name << ": " << r.detail << '\n';
    for (const auto& r : results)
        if (!r.ok) {
            err << "validate: check '" << r.name << "' failed (" << r.detail << ")\n";
            return 4;
        }
    return 0;
}

}  // namespace twkb
