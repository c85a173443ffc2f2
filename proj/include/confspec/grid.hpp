#pragma once

#include <functional>
#include <numbers>
#include <vector>

#include "confspec/banded.hpp"

namespace confspec {

enum class CoordinateKind { Polar, Arclength };

/// Node distribution of a radial grid.
struct Grading {
    enum class Kind { Uniform, GeometricNearLeft };
    Kind kind = Kind::Uniform;
    double ratio = 1.0;   // maximal ratio of successive spacings
    double r_min = 0.0;   // first node

    static Grading uniform() { return {}; }
    static Grading geometric_near_left(double ratio, double r_min) {
        return {Kind::GeometricNearLeft, ratio, r_min};
    }
};

/**
 * One-dimensional grid over [left, right].
 *
 * `nodes` are the interior nodes. The finite element mesh is
 * left, nodes..., right; the end vertices carry either an essential
 * (eliminated) or a natural condition depending on the weak form.
 * Polar grids span (0, pi), arclength grids span [0, T].
 */
struct RadialGrid {
    CoordinateKind kind = CoordinateKind::Polar;
    Grading grading;
    double left = 0.0;
    double right = std::numbers::pi;
    std::vector<double> nodes;

    /// Mesh vertices including both end points.
    std::vector<double> mesh() const;
    std::size_t interior_count() const { return nodes.size(); }
};

inline constexpr std::size_t kMinGridNodes = 16;

/// Polar grids span (0, pi); arclength grids span [0, extent].
RadialGrid make_grid(CoordinateKind kind, std::size_t count, Grading grading,
                     double extent = std::numbers::pi);

/// Self-adjoint weak form  int p u'v' + q u v  against mass  int w u v.
struct WeakForm1D {
    std::function<double(double)> p;
    std::function<double(double)> q;
    std::function<double(double)> w;
    bool essential_left = false;
    bool essential_right = false;
    /// Points where a coefficient loses smoothness; cells are integrated piecewise across them.
    std::vector<double> kinks;
};

/// Assembled tridiagonal pair restricted to the free degrees of freedom.
struct AssembledForm {
    BandedSymmetric<double> stiffness;
    BandedSymmetric<double> mass;
    std::vector<double> dof_coordinates;
};

/// Piecewise-linear elements, two-point Gauss quadrature per cell.
/// Throws NonFiniteCoefficient naming the left vertex of the offending cell.
AssembledForm assemble_weak_form(const WeakForm1D& form, const RadialGrid& grid);

/// Lumped (row-sum) mass  int w phi_i  over the free degrees of freedom.
Eigen::VectorXd lumped_mass(const std::function<double(double)>& w, const RadialGrid& grid,
                            bool essential_left, bool essential_right);

}  // namespace confspec
