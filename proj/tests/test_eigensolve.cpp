#include "confspec/eigensolve.hpp"

#include "random_pencil.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace confspec {
namespace {

// Independent oracle: plain Sturm-sequence bisection for the k-th eigenvalue
// of a symmetric tridiagonal matrix (no shared code with the library).
double oracle_tridiagonal_eigenvalue(const std::vector<double>& d, const std::vector<double>& e, int k) {
    auto below = [&](double x) {
        int c = 0;
        double q = 1.0;
        for (std::size_t i = 0; i < d.size(); ++i) {
            q = d[i] - x - (i ? e[i - 1] * e[i - 1] / q : 0.0);
            if (q == 0.0) q = -1e-300;
            c += q < 0.0;
        }
        return c;
    };
    double lo = -100.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (below(mid) > k ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

BandedSymmetric<double> second_difference(Eigen::Index m, double h, bool mass) {
    BandedSymmetric<double> a(m, 1);
    for (Eigen::Index i = 0; i < m; ++i) {
        a.coeffRef(i, i) = mass ? 4.0 * h / 6.0 : 2.0 / h;
        if (i + 1 < m) a.coeffRef(i + 1, i) = mass ? h / 6.0 : -1.0 / h;
    }
    return a;
}

using confspec::fixtures::random_pencil;

TEST(SolveGeneralized, DiagonalCase) {
    const auto a = BandedSymmetric<double>::diagonal(Eigen::Vector3d(1.0, 2.0, 3.0));
    const auto b = BandedSymmetric<double>::diagonal(Eigen::Vector3d::Ones());
    for (SolverPath path : {SolverPath::Dense, SolverPath::Iterative}) {
        SolveOptions opt;
        opt.path = path;
        const auto ev = solve_generalized(a, b, 3, opt);
        ASSERT_EQ(ev.size(), 3u);
        EXPECT_NEAR(ev[0].value, 1.0, 1e-14);
        EXPECT_NEAR(ev[1].value, 2.0, 1e-14);
        EXPECT_NEAR(ev[2].value, 3.0, 1e-14);
    }
}

TEST(SolveGeneralized, DirichletSecondDifference) {
    const Eigen::Index m = 2000;
    const double h = std::numbers::pi / static_cast<double>(m + 1);
    const auto ev = solve_generalized(second_difference(m, h, false), second_difference(m, h, true), 3);
    EXPECT_NEAR(ev[0].value, 1.0, 1e-4);
    EXPECT_NEAR(ev[1].value, 4.0, 1e-4 * 4);
    EXPECT_NEAR(ev[2].value, 9.0, 1e-4 * 9);
    for (const auto& p : ev) EXPECT_LE(p.residual, 1e-9);
}

TEST(SolveGeneralized, RandomTridiagonalMatchesBisectionOracle) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int m = 200;
    std::vector<double> d(m), e(m - 1);
    for (auto& x : d) x = 3.0 * u(rng);
    for (auto& x : e) x = u(rng);
    BandedSymmetric<double> a(m, 1);
    for (int i = 0; i < m; ++i) a.coeffRef(i, i) = d[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) a.coeffRef(i + 1, i) = e[static_cast<std::size_t>(i)];
    const auto b = BandedSymmetric<double>::diagonal(Eigen::VectorXd::Ones(m));

    for (SolverPath path : {SolverPath::Dense, SolverPath::Iterative}) {
        SolveOptions opt;
        opt.path = path;
        opt.window = std::pair{-10.0, -10.0};  // bottom of the spectrum
        const auto ev = solve_generalized(a, b, 12, opt);
        for (int k = 0; k < 12; ++k) {
            EXPECT_NEAR(ev[static_cast<std::size_t>(k)].value, oracle_tridiagonal_eigenvalue(d, e, k), 1e-10) << k;
        }
    }
    SolveOptions full;
    full.path = SolverPath::Dense;
    const auto all = solve_generalized(a, b, m, full);
    for (int k = 0; k < m; ++k) EXPECT_NEAR(all[static_cast<std::size_t>(k)].value, oracle_tridiagonal_eigenvalue(d, e, k), 1e-10);
}

TEST(SolveGeneralized, ResidualAndOrthogonality) {
    const auto p = random_pencil(300, 2, 9);
    for (SolverPath path : {SolverPath::Dense, SolverPath::Iterative}) {
        SolveOptions opt;
        opt.path = path;
        const auto ev = solve_generalized(p.a, p.b, 10, opt);
        for (std::size_t i = 0; i < ev.size(); ++i) {
            EXPECT_LE(ev[i].residual, 1e-9);
            EXPECT_NEAR(relative_residual(p.a, p.b, ev[i].vector, ev[i].value), ev[i].residual, 1e-15);
            for (std::size_t j = 0; j < i; ++j) EXPECT_LE(std::abs(ev[i].vector.dot(p.b * ev[j].vector)), 1e-8);
            EXPECT_NEAR(ev[i].vector.dot(p.b * ev[i].vector), 1.0, 1e-10);
        }
    }
}

TEST(SolveGeneralized, ShiftExactness) {
    const auto p = random_pencil(250, 1, 11);
    const double c = 0.75;
    SolveOptions opt;
    opt.path = SolverPath::Iterative;
    const auto e0 = solve_generalized(p.a, p.b, 6, opt);
    opt.window = std::pair{c, c};
    const auto e1 = solve_generalized(p.a + c * p.b, p.b, 6, opt);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(e1[i].value - c, e0[i].value, 1e-9);
}

TEST(SolveGeneralized, DenseAndIterativeAgree) {
    for (std::uint64_t seed = 100; seed < 110; ++seed) {
        const auto p = random_pencil(150 + static_cast<Eigen::Index>(seed), 1 + static_cast<Eigen::Index>(seed % 3), seed);
        SolveOptions d, it;
        d.path = SolverPath::Dense;
        it.path = SolverPath::Iterative;
        const auto e0 = solve_generalized(p.a, p.b, 8, d);
        const auto e1 = solve_generalized(p.a, p.b, 8, it);
        for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(e0[i].value, e1[i].value, 1e-8 * std::max(1.0, std::abs(e0[i].value)));
    }
}

TEST(SolveGeneralized, SingularShiftIsPerturbed) {
    // Neumann Laplacian: exact zero eigenvalue at the default shift
    const Eigen::Index m = 800;
    const double h = 1.0 / static_cast<double>(m - 1);
    BandedSymmetric<double> a(m, 1), b(m, 1);
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        a.coeffRef(i, i) += 1.0 / h;
        a.coeffRef(i + 1, i + 1) += 1.0 / h;
        a.coeffRef(i + 1, i) -= 1.0 / h;
        b.coeffRef(i, i) += h / 3.0;
        b.coeffRef(i + 1, i + 1) += h / 3.0;
        b.coeffRef(i + 1, i) += h / 6.0;
    }
    SolveOptions opt;
    opt.path = SolverPath::Iterative;
    const auto ev = solve_generalized(a, b, 3, opt);
    EXPECT_NEAR(ev[0].value, 0.0, 1e-9);
    EXPECT_NEAR(ev[1].value, std::numbers::pi * std::numbers::pi, 1e-3 * 10);
}

TEST(SolveGeneralized, RejectsIndefiniteMass) {
    const auto a = BandedSymmetric<double>::diagonal(Eigen::VectorXd::Ones(5));
    Eigen::VectorXd d = Eigen::VectorXd::Ones(5);
    d(3) = -1.0;
    const auto b = BandedSymmetric<double>::diagonal(d);
    for (SolverPath path : {SolverPath::Dense, SolverPath::Iterative}) {
        SolveOptions opt;
        opt.path = path;
        try {
            solve_generalized(a, b, 2, opt);
            FAIL();
        } catch (const FactorizationError& e) {
            EXPECT_EQ(e.pivot(), 3u);
        }
    }
}

TEST(SolveGeneralized, IterationCapReportsResidual) {
    const auto p = random_pencil(400, 2, 5);
    SolveOptions opt;
    opt.path = SolverPath::Iterative;
    opt.max_krylov = 12;
    opt.tolerance = 1e-15;
    EXPECT_THROW(solve_generalized(p.a, p.b, 10, opt), ConvergenceError);
}

TEST(Aggregate, MultiplicityWeightedUnion) {
    const ModeSpec l0{0.0, 0.0, 1}, l1{1.0, 3.0, 3};
    const auto r = aggregate({{l0, {0.75}, {}}, {l1, {3.75}, {}}});
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_EQ(r.entries[0].multiplicity, 1);
    EXPECT_EQ(r.entries[1].multiplicity, 3);
    EXPECT_EQ(r.lambda_1_plus, 0.75);
    EXPECT_FALSE(r.lambda_1_minus.has_value());
    EXPECT_EQ(r.lambda_plus(2), 3.75);
    EXPECT_EQ(r.lambda_plus(4), 3.75);
    EXPECT_FALSE(r.lambda_plus(5).has_value());
}

TEST(Aggregate, DiracPairsMerge) {
    const ModeSpec up{0.5, 0.5, 1}, down{-0.5, -0.5, 1};
    const auto r = aggregate({{up, {-1.0, 1.0}, {}}, {down, {-1.0, 1.0}, {}}});
    ASSERT_EQ(r.entries.size(), 2u);
    EXPECT_EQ(r.entries[0].value, -1.0);
    EXPECT_EQ(r.entries[0].multiplicity, 2);
    EXPECT_EQ(r.entries[1].multiplicity, 2);
    EXPECT_EQ(r.lambda_1_plus, 1.0);
    EXPECT_EQ(r.lambda_1_minus, -1.0);
}

TEST(Aggregate, EmptyPositivePart) {
    const auto r = aggregate({{ModeSpec{}, {-3.0, -2.0}, {}}});
    EXPECT_FALSE(r.lambda_1_plus.has_value());
    EXPECT_EQ(r.lambda_1_minus, -2.0);
}

TEST(Aggregate, KernelToleranceExcludesNearZero) {
    const auto r = aggregate({{ModeSpec{}, {-1e-12, 2.0}, {}}});
    EXPECT_EQ(r.lambda_1_plus, 2.0);
    EXPECT_FALSE(r.lambda_1_minus.has_value());
}

}  // namespace
}  // namespace confspec
