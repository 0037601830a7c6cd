#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "twkb/kappa_system.hpp"
#include "twkb/roots.hpp"
#include "twkb/validate.hpp"

using namespace twkb;

namespace {

std::vector<cplx> sorted(std::vector<cplx> v) {
    std::sort(v.begin(), v.end(), [](const cplx& a, const cplx& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return v;
}

}  // namespace

TEST(Aberth, CubicWithZeroRoot) {
    // Q0 = 1, Q1 = 0, N = 1: 2k^3 - 2k
    const auto rs = solve_roots(assemble_polynomial(QVector{{1.0, 0.0}}));
    const auto r = sorted(rs.roots);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_NEAR(std::abs(r[0] - cplx(-1.0, 0.0)), 0.0, 1e-14);
    EXPECT_EQ(r[1], cplx(0.0, 0.0));
    EXPECT_NEAR(std::abs(r[2] - cplx(1.0, 0.0)), 0.0, 1e-14);
}

TEST(Aberth, ConjugatePairForNegativeQ0) {
    const auto r = sorted(solve_roots(assemble_polynomial(QVector{{-1.0}})).roots);
    EXPECT_EQ(r[0], std::conj(r[1]));
    EXPECT_NEAR(std::abs(r[1] - cplx(0.0, 1.0)), 0.0, 1e-15);
}

TEST(Aberth, ResidualBoundHolds) {
    std::mt19937_64 rng(41);
    for (int n = 0; n <= 4; ++n)
        for (int s = 0; s < 200; ++s) {
            const auto p = assemble_polynomial(random_qvector(rng, n));
            const auto rs = solve_roots(p);
            EXPECT_EQ(rs.roots.size(), p.degree());
            for (const cplx& r : rs.roots) EXPECT_LE(p.relative_residual(r), 1e-10);
            EXPECT_LE(rs.max_residual, 1e-10);
        }
}

TEST(Aberth, MatchesCompanionEigenvalues) {
    EXPECT_LT(max_companion_mismatch(1000), 1e-9);
}

TEST(Aberth, DoubleRealRootHasNoSpuriousImaginaryPart) {
    // (k - 1)^2 (k + 2)
    KappaPolynomial p{{2.0, -3.0, 0.0, 1.0}};
    const auto r = sorted(solve_roots(p).roots);
    for (const cplx& z : r) EXPECT_EQ(z.imag(), 0.0);
    EXPECT_NEAR(r[1].real(), 1.0, 1e-7);
    EXPECT_NEAR(r[2].real(), 1.0, 1e-7);
}

TEST(Aberth, PreconditionsChecked) {
    EXPECT_THROW(solve_roots(KappaPolynomial{{1.0}}), invalid_argument);
    EXPECT_THROW(solve_roots(KappaPolynomial{{1.0, 0.0}}), invalid_argument);
}

TEST(Aberth, NonConvergenceReported) {
    RootOptions opt;
    opt.max_iterations = 0;
    opt.residual_bound = 1e-10;
    EXPECT_THROW(solve_roots(KappaPolynomial{{-1.0, 0.3, 0.7, -0.2, 1.0}}, opt), no_convergence);
}
