#pragma once

#include <string>
#include <utility>
#include <vector>

#include "confspec/banded.hpp"
#include "confspec/geometry.hpp"
#include "confspec/grid.hpp"
#include "confspec/mode.hpp"

namespace confspec {

enum class OperatorFamily { ConformalLaplacian, Paneitz, Dirac };

/// Family plus dimension; construction validates the dimension range.
class OperatorKind {
public:
    /// Conformal Laplacian needs n >= 3, Paneitz n >= 5, Dirac n = 2.
    OperatorKind(OperatorFamily family, int n);

    OperatorFamily family() const { return family_; }
    int dimension() const { return n_; }
    /// Differential order k: 2, 4 or 1.
    int order() const;
    std::string name() const;

    bool operator==(const OperatorKind&) const = default;

private:
    OperatorFamily family_;
    int n_;
};

/// Parses "L", "paneitz" or "dirac" (case-insensitive; "conformal-laplacian" also accepted).
OperatorFamily parse_operator_family(const std::string& name);

enum class AssemblyPath { Covariance, Intrinsic };

/**
 * Generalized pencil (A, B) for one angular mode.
 *
 * For the Dirac operator the unknowns interleave the node values of the
 * upper spinor component with the cell values of the lower one, so A has
 * bandwidth 1 and B bandwidth 2. Scalar operators carry one unknown per
 * free mesh vertex; Paneitz has bandwidth 2.
 */
struct AssembledOperator {
    BandedSymmetric<double> a;
    BandedSymmetric<double> b;
    ModeSpec mode;
    AssemblyPath path = AssemblyPath::Covariance;
    RadialGrid grid;
};

/// Mode descriptor with angular eigenvalue and multiplicity filled in.
ModeSpec make_mode(const OperatorKind& kind, double index);

/// Dimension of degree-l harmonics on S^{n-1} for scalar operators; 1 for Dirac.
int mode_multiplicity(const OperatorKind& kind, double index);

/// Dimension of degree-j spherical harmonics on S^d.
long long harmonic_dimension(int d, int j);

struct PaneitzConstants {
    double a = 0.0;        // first-order coefficient: P = Delta^2 + a Delta + (n-4)/2 q on the round sphere
    double q_const = 0.0;  // Q curvature of the round sphere
};

PaneitzConstants paneitz_constants(int n);

/// Bottom of the spectrum of the operator on the cylinder S^{n-1} x R.
double cylinder_threshold(const OperatorKind& kind);

/**
 * Pencil for the operator of f^2 g_round through the conformal covariance
 * law: A is the round-sphere operator in mode `mode`, B the mass with weight
 * f^k sin^{n-1} r. Rejects the infinite profile and non-polar grids.
 */
AssembledOperator covariance_reduce(const OperatorKind& kind, const ConformalProfile& profile,
                                    const ModeSpec& mode, const RadialGrid& grid);

/**
 * Pencil for the operator assembled directly in dt^2 + h(t)^2 g_{S^{n-1}} on
 * an arclength grid. Paneitz is not supported on this path.
 */
AssembledOperator intrinsic_assemble(const OperatorKind& kind, const WarpedData& warped, const ModeSpec& mode,
                                     const RadialGrid& grid);

/// Round S^n eigenvalues of the operator in mode `index`, smallest `count` by |lambda|.
std::vector<double> round_sphere_mode_eigenvalues(const OperatorKind& kind, double index, int count);

}  // namespace confspec
