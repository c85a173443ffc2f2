#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "confspec/eigensolve.hpp"
#include "confspec/operators.hpp"

using namespace confspec;

namespace {

const OperatorKind kLap3(OperatorFamily::ConformalLaplacian, 3);
const OperatorKind kPaneitz5(OperatorFamily::Paneitz, 5);
const OperatorKind kDirac2(OperatorFamily::Dirac, 2);

RadialGrid polar(std::size_t n) { return make_grid(CoordinateKind::Polar, n, Grading::uniform()); }

std::vector<double> values(const AssembledOperator& op, int count) {
    std::vector<double> out;
    for (const EigenPair& p : solve_generalized(op.a, op.b, count)) out.push_back(p.value);
    return out;
}

double smallest_abs(const AssembledOperator& op) {
    double best = INFINITY;
    for (double v : values(op, 2)) best = std::min(best, std::abs(v));
    return best;
}

double smallest_positive(const AssembledOperator& op) {
    for (double v : values(op, 4)) {
        if (v > 1e-8) return v;
    }
    return NAN;
}

// Closed-form spherical harmonic count on S^{n-1}: (2l+n-2)/(n-2) C(l+n-3, l).
long long harmonic_count(int n, int l) {
    double c = 1.0;
    for (int i = 1; i <= l; ++i) c = c * (l + n - 3 - l + i) / i;
    return std::llround((2.0 * l + n - 2.0) / (n - 2.0) * c);
}

}  // namespace

TEST(OperatorKind, DimensionConstraints) {
    EXPECT_THROW(OperatorKind(OperatorFamily::ConformalLaplacian, 2), std::invalid_argument);
    EXPECT_THROW(OperatorKind(OperatorFamily::Dirac, 3), std::invalid_argument);
    try {
        OperatorKind(OperatorFamily::Paneitz, 4);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("n >= 5"), std::string::npos);
    }
    EXPECT_EQ(kLap3.order(), 2);
    EXPECT_EQ(kPaneitz5.order(), 4);
    EXPECT_EQ(kDirac2.order(), 1);
    for (const OperatorKind& k : {kLap3, kPaneitz5, kDirac2}) EXPECT_GT(k.dimension(), k.order());
}

TEST(OperatorKind, ParsesNames) {
    EXPECT_EQ(parse_operator_family("L"), OperatorFamily::ConformalLaplacian);
    EXPECT_EQ(parse_operator_family("Paneitz"), OperatorFamily::Paneitz);
    EXPECT_EQ(parse_operator_family("dirac"), OperatorFamily::Dirac);
    EXPECT_THROW(parse_operator_family("laplace"), std::invalid_argument);
}

TEST(PaneitzConstants, RoundSphereValues) {
    const PaneitzConstants c5 = paneitz_constants(5);
    EXPECT_NEAR(c5.a, 5.5, 1e-13);
    EXPECT_NEAR(c5.q_const, 13.125, 1e-13);
    EXPECT_NEAR(paneitz_constants(6).q_const, 24.0, 1e-13);
    EXPECT_NEAR(0.5 * c5.q_const, 6.5625, 1e-13);
    EXPECT_THROW(paneitz_constants(4), std::invalid_argument);
}

TEST(PaneitzConstants, ReproduceFactorizedLadder) {
    // On S^n, P acts on degree-j harmonics by (j+n/2)(j+n/2-1)(j+n/2+1)(j+n/2-2).
    for (int n = 5; n <= 10; ++n) {
        const PaneitzConstants c = paneitz_constants(n);
        EXPECT_NEAR(c.q_const, n * (n * n - 4.0) / 8.0, 1e-11);
        for (int j = 0; j <= 6; ++j) {
            const double mu = j * (j + n - 1.0), m = j + n / 2.0;
            const double ladder = m * (m - 1.0) * (m + 1.0) * (m - 2.0);
            EXPECT_NEAR(mu * mu + c.a * mu + (n - 4.0) / 2.0 * c.q_const, ladder, 1e-9 * ladder);
        }
    }
}

TEST(CylinderThreshold, ClosedForms) {
    EXPECT_EQ(cylinder_threshold(kLap3), 0.25);
    EXPECT_EQ(cylinder_threshold(OperatorKind(OperatorFamily::ConformalLaplacian, 4)), 1.0);
    EXPECT_EQ(cylinder_threshold(kPaneitz5), 3.125);
    EXPECT_EQ(cylinder_threshold(kDirac2), 0.5);
}

TEST(Modes, Multiplicities) {
    EXPECT_EQ(mode_multiplicity(kLap3, 0), 1);
    EXPECT_EQ(mode_multiplicity(kLap3, 2), 5);
    EXPECT_EQ(mode_multiplicity(kDirac2, 0.5), 1);
    EXPECT_EQ(mode_multiplicity(kDirac2, -3.5), 1);
    EXPECT_THROW(mode_multiplicity(kDirac2, 1.0), std::invalid_argument);
    EXPECT_THROW(mode_multiplicity(kLap3, -1.0), std::invalid_argument);
    EXPECT_THROW(mode_multiplicity(kLap3, 0.5), std::invalid_argument);
    for (int n = 3; n <= 8; ++n) {
        const OperatorKind k(OperatorFamily::ConformalLaplacian, n);
        for (int l = 0; l <= 8; ++l) EXPECT_EQ(mode_multiplicity(k, l), harmonic_count(n, l)) << n << " " << l;
    }
    EXPECT_EQ(make_mode(kLap3, 2).angular_eigenvalue, 6.0);
    EXPECT_EQ(make_mode(kDirac2, -1.5).angular_eigenvalue, -1.5);
}

TEST(Covariance, RoundThreeSphereRadialModes) {
    const std::vector<double> v = values(covariance_reduce(kLap3, profile_constant(3, 1.0), make_mode(kLap3, 0), polar(2000)), 3);
    const double expect[] = {0.75, 3.75, 8.75};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(v[i], expect[i], 1e-3 * expect[i]);
}

TEST(Covariance, PaneitzLadderOnFiveSphere) {
    for (int l = 0; l <= 2; ++l) {
        const std::vector<double> v =
            values(covariance_reduce(kPaneitz5, profile_constant(5, 1.0), make_mode(kPaneitz5, l), polar(1000)), 3);
        for (int i = 0; i < 3; ++i) {
            const double m = l + i + 2.5;
            const double ladder = m * (m - 1.0) * (m + 1.0) * (m - 2.0);
            EXPECT_NEAR(v[i], ladder, 1e-3 * ladder) << l << " " << i;
        }
    }
    const double bottom = values(covariance_reduce(kPaneitz5, profile_constant(5, 1.0), make_mode(kPaneitz5, 0), polar(2000)), 1)[0];
    EXPECT_NEAR(bottom, 6.5625, 1e-2);
}

TEST(Covariance, PaneitzIsPentadiagonal) {
    const AssembledOperator op = covariance_reduce(kPaneitz5, profile_L(5, 2.0), make_mode(kPaneitz5, 1), polar(64));
    EXPECT_EQ(op.a.bandwidth(), 2);
    EXPECT_EQ(op.b.bandwidth(), 0);
    EXPECT_EQ(op.a.toDense(), op.a.toDense().transpose());
}

TEST(Covariance, ExactScalingByConstantFactor) {
    for (const OperatorKind& k : {kLap3, kPaneitz5, kDirac2}) {
        const double mode = k.family() == OperatorFamily::Dirac ? 0.5 : 0.0;
        const int n = k.dimension();
        const AssembledOperator base = covariance_reduce(k, profile_constant(n, 1.0), make_mode(k, mode), polar(2000));
        const std::vector<double> v1 = values(base, 4);
        for (double c : {0.5, 2.0, 3.0}) {
            const AssembledOperator scaled = covariance_reduce(k, profile_constant(n, c), make_mode(k, mode), polar(2000));
            EXPECT_TRUE(scaled.a == base.a);
            const std::vector<double> vc = values(scaled, 4);
            for (std::size_t i = 0; i < v1.size(); ++i) {
                const double expect = v1[i] * std::pow(c, -k.order());
                EXPECT_NEAR(vc[i], expect, 1e-12 * std::abs(expect)) << k.name() << " c=" << c;
            }
        }
    }
}

TEST(Covariance, RejectsInfiniteProfileAndWrongGrid) {
    EXPECT_THROW(covariance_reduce(kLap3, profile_infinity(3), make_mode(kLap3, 0), polar(64)), std::invalid_argument);
    EXPECT_THROW(covariance_reduce(kLap3, profile_L(4, 2.0), make_mode(kLap3, 0), polar(64)), std::invalid_argument);
    const RadialGrid arc = make_grid(CoordinateKind::Arclength, 64, Grading::uniform(), 3.0);
    EXPECT_THROW(covariance_reduce(kLap3, profile_L(3, 2.0), make_mode(kLap3, 0), arc), std::invalid_argument);
}

TEST(Intrinsic, RoundThreeSphere) {
    const WarpedData w = warped_round_sphere(8192);
    const RadialGrid g = make_grid(CoordinateKind::Arclength, 2000, Grading::uniform(), w.length());
    const std::vector<double> v = values(intrinsic_assemble(kLap3, w, make_mode(kLap3, 0), g), 3);
    const double expect[] = {0.75, 3.75, 8.75};
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(v[i], expect[i], 1e-3 * expect[i]);
}

TEST(Intrinsic, CylinderSegmentBottom) {
    for (double len : {5.0, 10.0, 40.0}) {
        const WarpedData w = warped_cylinder(len);
        const RadialGrid g = make_grid(CoordinateKind::Arclength, 2000, Grading::uniform(), len);
        const double v = values(intrinsic_assemble(kLap3, w, make_mode(kLap3, 0), g), 1)[0];
        const double expect = 0.25 + std::pow(std::numbers::pi / len, 2);
        EXPECT_NEAR(v, expect, 1e-5);
    }
}

TEST(Intrinsic, RejectsPaneitz) {
    const WarpedData w = warped_round_sphere(256);
    const RadialGrid g = make_grid(CoordinateKind::Arclength, 64, Grading::uniform(), w.length());
    EXPECT_THROW(intrinsic_assemble(kPaneitz5, w, make_mode(kPaneitz5, 0), g), std::invalid_argument);
    EXPECT_THROW(intrinsic_assemble(kLap3, w, make_mode(kLap3, 0), polar(64)), std::invalid_argument);
}

TEST(Dirac, RoundTwoSphereMultiplicities) {
    const WarpedData w = warped_round_sphere(8192);
    const RadialGrid g = make_grid(CoordinateKind::Arclength, 2000, Grading::uniform(), w.length());
    std::vector<ModeSpectrum> modes;
    for (double k = -3.5; k <= 3.5; k += 1.0) {
        const AssembledOperator op = intrinsic_assemble(kDirac2, w, make_mode(kDirac2, k), g);
        std::vector<double> v = values(op, 8);
        std::erase_if(v, [](double x) { return std::abs(x) > 3.5; });
        modes.push_back({make_mode(kDirac2, k), v, {}});
    }
    const SpectrumReport rep = aggregate(modes, -1.0, 1e-3);
    const std::vector<std::pair<double, int>> d = rep.distinct(1e-3);
    ASSERT_EQ(d.size(), 6u);
    const double expect[] = {-3, -2, -1, 1, 2, 3};
    const int mult[] = {6, 4, 2, 2, 4, 6};
    for (int i = 0; i < 6; ++i) {
        EXPECT_NEAR(d[static_cast<std::size_t>(i)].first, expect[i], 1e-3 * std::abs(expect[i]));
        EXPECT_EQ(d[static_cast<std::size_t>(i)].second, mult[i]);
    }
    EXPECT_NEAR(*rep.lambda_1_plus, 1.0, 1e-3);
    EXPECT_NEAR(*rep.lambda_1_minus, -1.0, 1e-3);
}

TEST(Dirac, NoDoublersInFullDenseSpectrum) {
    // Every discrete eigenvalue below 4 in modulus must be one of +-(|k| + 1/2 + j).
    for (double k : {0.5, -0.5, 1.5, -2.5}) {
        const AssembledOperator op = covariance_reduce(kDirac2, profile_constant(2, 1.0), make_mode(kDirac2, k), polar(300));
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(op.a.toDense(), op.b.toDense(), Eigen::EigenvaluesOnly);
        std::vector<double> low;
        for (double v : es.eigenvalues()) {
            if (std::abs(v) < 4.0) low.push_back(v);
        }
        std::vector<double> exact;
        for (double m = std::abs(k) + 0.5; m < 4.0; m += 1.0) {
            exact.push_back(m);
            exact.push_back(-m);
        }
        std::sort(exact.begin(), exact.end());
        ASSERT_EQ(low.size(), exact.size()) << k;
        for (std::size_t i = 0; i < low.size(); ++i) EXPECT_NEAR(low[i], exact[i], 1e-3 * std::abs(exact[i]));
    }
}

TEST(Dirac, ConventionFreeze) {
    // k > 0: upper component pinned at the right pole, unknowns ordered u0 v0 u1 v1 ...
    const RadialGrid g = polar(16);
    const AssembledOperator plus = covariance_reduce(kDirac2, profile_constant(2, 1.0), make_mode(kDirac2, 0.5), g);
    const AssembledOperator minus = covariance_reduce(kDirac2, profile_constant(2, 1.0), make_mode(kDirac2, -0.5), g);
    EXPECT_EQ(plus.a.size(), 34);
    EXPECT_EQ(plus.a.bandwidth(), 1);
    EXPECT_EQ(plus.b.bandwidth(), 2);
    // C(cell 0, node 0) = int_0^h [sin r / h + (k - cos r / 2)(1 - r/h)] dr, positive for k = 1/2
    EXPECT_GT(plus.a(1, 0), 0.0);
    EXPECT_EQ(plus.a(0, 0), 0.0);
    const std::vector<double> vp = values(plus, 2), vm = values(minus, 2);
    EXPECT_NEAR(vp[0], -1.0, 1e-2);
    EXPECT_NEAR(vp[1], 1.0, 1e-2);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(vp[static_cast<std::size_t>(i)], vm[static_cast<std::size_t>(i)], 1e-9);
}

TEST(Dirac, SpectralSymmetryOnWarpedSurface) {
    const ConformalProfile f = profile_L(2, 2.0);
    const WarpedData w = warped_reparametrize(f, nose_resolving_grid(2.0, 8192));
    const RadialGrid g = make_grid(CoordinateKind::Arclength, 800, Grading::uniform(), w.length());
    for (double k : {0.5, -1.5}) {
        std::vector<double> v = values(intrinsic_assemble(kDirac2, w, make_mode(kDirac2, k), g), 6);
        for (std::size_t i = 0; i < v.size() / 2; ++i) {
            EXPECT_NEAR(v[i], -v[v.size() - 1 - i], 1e-9 * std::abs(v[i]));
        }
    }
}

TEST(Properties, ModeMonotonicity) {
    const RadialGrid g = nose_resolving_grid(2.0, 600);
    double prev = -INFINITY;
    for (int l = 0; l <= 5; ++l) {
        const double v = values(covariance_reduce(kLap3, profile_L(3, 2.0), make_mode(kLap3, l), g), 1)[0];
        EXPECT_GE(v, prev);
        prev = v;
    }
    prev = -INFINITY;
    for (int l = 0; l <= 4; ++l) {
        const double v = values(covariance_reduce(kPaneitz5, profile_L(5, 1.0), make_mode(kPaneitz5, l), g), 1)[0];
        EXPECT_GE(v, prev);
        prev = v;
    }
    // +k and -k pin the boundary at opposite poles, so they agree only to O(h^2); order by |k|.
    prev = -INFINITY;
    for (double k = 0.5; k <= 4.5; k += 1.0) {
        const double plus = smallest_abs(covariance_reduce(kDirac2, profile_L(2, 2.0), make_mode(kDirac2, k), g));
        const double minus = smallest_abs(covariance_reduce(kDirac2, profile_L(2, 2.0), make_mode(kDirac2, -k), g));
        EXPECT_NEAR(plus, minus, 1e-3 * plus);
        EXPECT_GE(std::min(plus, minus), prev);
        prev = std::max(plus, minus);
    }
}

TEST(Properties, DualPathAgreementConvergesAtSecondOrder) {
    struct Case {
        OperatorKind kind;
        double mode;
    };
    for (const Case& c : {Case{kLap3, 0.0}, Case{kDirac2, 0.5}}) {
        const ConformalProfile f = profile_L(c.kind.dimension(), 2.0);
        const WarpedData w = warped_reparametrize(f, nose_resolving_grid(2.0, 8192));
        double cov[3], intr[3];
        const std::size_t ns[] = {250, 500, 1000};
        for (int i = 0; i < 3; ++i) {
            cov[i] = smallest_positive(covariance_reduce(c.kind, f, make_mode(c.kind, c.mode), nose_resolving_grid(2.0, ns[i])));
            const RadialGrid g = make_grid(CoordinateKind::Arclength, ns[i], Grading::uniform(), w.length());
            intr[i] = smallest_positive(intrinsic_assemble(c.kind, w, make_mode(c.kind, c.mode), g));
        }
        EXPECT_NEAR(cov[2], intr[2], 1e-3 * intr[2]) << c.kind.name();
        EXPECT_GE(std::abs(cov[0] - cov[1]) / std::abs(cov[1] - cov[2]), 3.0) << c.kind.name();
        EXPECT_GE(std::abs(intr[0] - intr[1]) / std::abs(intr[1] - intr[2]), 3.0) << c.kind.name();
        EXPECT_GT(std::abs(cov[2] - intr[2]), 0.0);
        EXPECT_LT(std::abs(cov[2] - intr[2]), std::abs(cov[0] - intr[0]));
    }
}

TEST(RoundSphereOracle, ModeEigenvalues) {
    EXPECT_EQ(round_sphere_mode_eigenvalues(kLap3, 1, 2), (std::vector<double>{3.75, 8.75}));
    EXPECT_EQ(round_sphere_mode_eigenvalues(kDirac2, -1.5, 4), (std::vector<double>{-3, -2, 2, 3}));
    EXPECT_EQ(round_sphere_mode_eigenvalues(kPaneitz5, 0, 1)[0], 6.5625);
}
