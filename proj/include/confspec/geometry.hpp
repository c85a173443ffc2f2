#pragma once

#include <vector>

#include "confspec/grid.hpp"

namespace confspec {

/// Value and first two radial derivatives of a function of r.
struct Jet {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Quintic smoothstep 6x^5 - 15x^4 + 10x^3 clamped to [0, 1], with derivatives in x.
Jet smoothstep(double x);

/**
 * Radial conformal factor F on the round sphere S^n, r = distance to the
 * blowup point.
 *
 * The infinite profile is 1/r on (0, 1/2], 1 on [1, pi] and
 * exp(s(2(1 - r)) log(1/r)) in between. The finite profile with nose length
 * L agrees with it on [e^-L, pi] and equals 1/q(r) below, where
 * q(r) = e^-L + s(.)(r - e^-L) levels off to the constant e^-L over
 * [e^-L/2, e^-L]. Both are C^2 with analytic derivatives.
 */
class ConformalProfile {
public:
    enum class Kind { Constant, Nose, Infinite };

    static ConformalProfile infinite(int n);
    static ConformalProfile nose(int n, double length);
    static ConformalProfile constant(int n, double c);

    Kind kind() const { return kind_; }
    int dimension() const { return n_; }
    /// Nose length L; +inf for the infinite profile, 0 for constant profiles.
    double nose_length() const { return length_; }
    double scale() const { return c_; }
    bool has_finite_volume() const { return kind_ != Kind::Infinite; }

    double operator()(double r) const { return jet(r).value; }
    Jet jet(double r) const;

    /// Radii where the piecewise definition switches (inside (0, pi)).
    std::vector<double> breakpoints() const;

private:
    ConformalProfile(Kind kind, int n, double length, double c) : kind_(kind), n_(n), length_(length), c_(c) {}
    Kind kind_;
    int n_;
    double length_;
    double c_;
};

ConformalProfile profile_infinity(int n);
ConformalProfile profile_L(int n, double length);
ConformalProfile profile_constant(int n, double c);

/// omega_{d}: volume of the unit round sphere S^d.
double sphere_volume(int d);

/// Volume  omega_{n-1} int_0^pi F^n sin^{n-1} r dr  by two-point Gauss on the grid mesh.
double volume(const ConformalProfile& profile, const RadialGrid& grid);

/// Polar grid with geometric grading toward the blowup point, suited to nose length L.
RadialGrid nose_resolving_grid(double length, std::size_t count);

/// h, h', h'' in the arclength coordinate t.
struct WarpedSample {
    double h = 0.0;
    double dh = 0.0;
    double d2h = 0.0;
};

/**
 * Rotationally symmetric metric dt^2 + h(t)^2 g_{S^{n-1}} tabulated on
 * increasing t nodes. A closed end has h = 0 there (a pole); an open end is
 * a truncation. `sample` interpolates with quintic Hermite splines.
 */
struct WarpedData {
    std::vector<double> t;
    std::vector<double> r;   // polar coordinate of each node (empty for synthetic data)
    std::vector<double> h;
    std::vector<double> dh;
    std::vector<double> d2h;
    bool closed_left = false;
    bool closed_right = false;
    /// t values of the profile breakpoints, where h''' jumps.
    std::vector<double> kinks;

    double length() const { return t.back() - t.front(); }
    WarpedSample sample(double t_value) const;
};

/// Tabulates t(r) = int F dr and h = F sin r with analytic t-derivatives on the grid mesh.
/// The infinite profile starts at the first interior node (open left end).
WarpedData warped_reparametrize(const ConformalProfile& profile, const RadialGrid& grid);

/// Tabulates a closed-form warping function on t nodes (test fixtures and surrogates).
WarpedData warped_from_function(const std::vector<double>& t_nodes,
                                const std::function<WarpedSample(double)>& h,
                                bool closed_left, bool closed_right);

/// Round sphere (h = sin t on [0, pi]) and exact cylinder segment (h = 1 on [0, T]).
WarpedData warped_round_sphere(std::size_t table_size = 4096);
WarpedData warped_cylinder(double length, std::size_t table_size = 256);

/// Scal = (n-1)[(n-2)(1 - h'^2)/h^2 - 2h''/h] at each table node; poles are extrapolated.
std::vector<double> scalar_curvature_warped(const WarpedData& warped, int n);

/// h^{n-1} Scal, regular at poles (no division by h for n >= 3).
double scalar_curvature_density(const WarpedSample& s, int n);

}  // namespace confspec
