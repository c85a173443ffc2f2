#include "confspec/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace confspec {

OperatorKind::OperatorKind(OperatorFamily family, int n) : family_(family), n_(n) {
    switch (family) {
        case OperatorFamily::ConformalLaplacian:
            if (n < 3) throw std::invalid_argument("conformal Laplacian requires n >= 3");
            break;
        case OperatorFamily::Paneitz:
            if (n < 5) throw std::invalid_argument("Paneitz operator requires n >= 5");
            break;
        case OperatorFamily::Dirac:
            if (n != 2) throw std::invalid_argument("Dirac operator is implemented for n = 2 only");
            break;
    }
}

int OperatorKind::order() const {
    switch (family_) {
        case OperatorFamily::ConformalLaplacian: return 2;
        case OperatorFamily::Paneitz: return 4;
        case OperatorFamily::Dirac: break;
    }
    return 1;
}

std::string OperatorKind::name() const {
    switch (family_) {
        case OperatorFamily::ConformalLaplacian: return "L";
        case OperatorFamily::Paneitz: return "paneitz";
        case OperatorFamily::Dirac: break;
    }
    return "dirac";
}

OperatorFamily parse_operator_family(const std::string& name) {
    std::string s = name;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "l" || s == "conformal-laplacian") return OperatorFamily::ConformalLaplacian;
    if (s == "paneitz" || s == "p") return OperatorFamily::Paneitz;
    if (s == "dirac" || s == "d") return OperatorFamily::Dirac;
    throw std::invalid_argument("unknown operator '" + name + "' (expected L, paneitz or dirac)");
}

namespace {

bool is_half_odd(double k) {
    const double twice = 2.0 * k;
    return std::isfinite(k) && twice == std::round(twice) && std::fmod(std::abs(twice), 2.0) == 1.0;
}

long long binomial(long long n, long long k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long r = 1;
    for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

int scalar_index(double index) {
    if (!(index >= 0.0) || index != std::round(index)) {
        throw std::invalid_argument("scalar operator modes need a nonnegative integer index");
    }
    return static_cast<int>(index);
}

}  // namespace

long long harmonic_dimension(int d, int j) {
    if (d < 1 || j < 0) throw std::invalid_argument("harmonic dimension needs d >= 1 and j >= 0");
    return binomial(j + d, d) - binomial(j + d - 2, d);
}

int mode_multiplicity(const OperatorKind& kind, double index) {
    if (kind.family() == OperatorFamily::Dirac) {
        if (!is_half_odd(index)) throw std::invalid_argument("Dirac modes on S^1 are half-integers");
        return 1;
    }
    return static_cast<int>(harmonic_dimension(kind.dimension() - 1, scalar_index(index)));
}

ModeSpec make_mode(const OperatorKind& kind, double index) {
    const int mult = mode_multiplicity(kind, index);
    if (kind.family() == OperatorFamily::Dirac) return {index, index, mult};
    const double l = index;
    return {index, l * (l + kind.dimension() - 2.0), mult};
}

PaneitzConstants paneitz_constants(int n) {
    if (n < 5) throw std::invalid_argument("Paneitz operator requires n >= 5");
    const double nn = n;
    const double scal = nn * (nn - 1.0);
    const double ric = nn - 1.0;               // Ric = (n-1) g
    const double ric_sq = nn * ric * ric;      // |Ric|^2
    PaneitzConstants c;
    c.a = ((nn - 2.0) * (nn - 2.0) + 4.0) / (2.0 * (nn - 1.0) * (nn - 2.0)) * scal - 4.0 / (nn - 2.0) * ric;
    c.q_const = (nn * nn * nn - 4.0 * nn * nn + 16.0 * nn - 16.0) / (8.0 * (nn - 1.0) * (nn - 1.0) * (nn - 2.0) * (nn - 2.0)) *
                    scal * scal -
                2.0 / ((nn - 2.0) * (nn - 2.0)) * ric_sq;
    return c;
}

double cylinder_threshold(const OperatorKind& kind) {
    const double n = kind.dimension();
    switch (kind.family()) {
        case OperatorFamily::ConformalLaplacian: return (n - 2.0) * (n - 2.0) / 4.0;
        case OperatorFamily::Paneitz: return (n - 4.0) * n * n / 8.0;
        case OperatorFamily::Dirac: break;
    }
    return (n - 1.0) / 2.0;
}

std::vector<double> round_sphere_mode_eigenvalues(const OperatorKind& kind, double index, int count) {
    const double n = kind.dimension();
    std::vector<double> out;
    if (kind.family() == OperatorFamily::Dirac) {
        if (!is_half_odd(index)) throw std::invalid_argument("Dirac modes on S^1 are half-integers");
        for (int j = 0; static_cast<int>(out.size()) < count; ++j) {
            const double v = std::abs(index) + 0.5 + j;
            out.push_back(-v);
            if (static_cast<int>(out.size()) < count) out.push_back(v);
        }
    } else {
        const int l = scalar_index(index);
        for (int j = l; static_cast<int>(out.size()) < count; ++j) {
            const double mu = j * (j + n - 1.0);
            if (kind.family() == OperatorFamily::ConformalLaplacian) {
                out.push_back(mu + n * (n - 2.0) / 4.0);
            } else {
                const PaneitzConstants c = paneitz_constants(kind.dimension());
                out.push_back(mu * mu + c.a * mu + (n - 4.0) / 2.0 * c.q_const);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

constexpr double kGauss = 0.57735026918962576451;

struct WarpingValue {
    double h;
    double dh;
};

/**
 * Staggered P1/P0 pencil for the surface Dirac operator in angular mode k
 * with respect to the measure h dt:
 *   (Cu)_c = int_c [ -h u' + (k - h'/2) u ],   A = [[0, C^T], [C, 0]],
 * u on mesh vertices, v constant per cell. u vanishes at the right end for
 * k > 0 and at the left end for k < 0, which keeps the system square.
 */
AssembledOperator dirac_pencil(double k, const std::vector<double>& x,
                               const std::function<WarpingValue(double)>& warp,
                               const std::function<double(double)>& weight, std::vector<double> kinks = {}) {
    const long cells = static_cast<long>(x.size()) - 1;
    const long shift = k < 0 ? 1 : 0;
    const long dropped_node = k < 0 ? 0 : cells;
    const long size = 2 * cells;
    const auto node_dof = [&](long j) { return j == dropped_node ? -1L : 2 * j - shift; };
    const auto cell_dof = [&](long c) { return 2 * c + 1 - shift; };
    std::sort(kinks.begin(), kinks.end());

    AssembledOperator op{BandedSymmetric<double>(size, 1), BandedSymmetric<double>(size, 2), {}, {}, {}};
    std::vector<double> pieces;
    for (long c = 0; c < cells; ++c) {
        const double a = x[static_cast<std::size_t>(c)], b = x[static_cast<std::size_t>(c) + 1], len = b - a;
        pieces.assign({a});
        for (auto it = std::upper_bound(kinks.begin(), kinks.end(), a); it != kinks.end() && *it < b; ++it) {
            pieces.push_back(*it);
        }
        pieces.push_back(b);
        double ce[2] = {0.0, 0.0}, mu[2][2] = {{0, 0}, {0, 0}}, mv = 0.0;
        for (std::size_t piece = 0; piece + 1 < pieces.size(); ++piece) {
            const double lo = pieces[piece], hi = pieces[piece + 1];
            for (double s : {-kGauss, kGauss}) {
                const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s;
                const double xi = (t - a) / len;
                const WarpingValue w = warp(t);
                const double rho = weight(t);
                if (!std::isfinite(w.h) || !std::isfinite(w.dh) || !std::isfinite(rho)) {
                    throw NonFiniteCoefficient("non-finite Dirac coefficient", static_cast<std::size_t>(c));
                }
                const double phi[2] = {1.0 - xi, xi};
                const double dphi[2] = {-1.0 / len, 1.0 / len};
                const double wq = 0.5 * (hi - lo);
                for (int i = 0; i < 2; ++i) {
                    ce[i] += wq * (-w.h * dphi[i] + (k - 0.5 * w.dh) * phi[i]);
                    for (int j = 0; j < 2; ++j) mu[i][j] += wq * rho * phi[i] * phi[j];
                }
                mv += wq * rho;
            }
        }
        const long vc = cell_dof(c);
        op.b.coeffRef(vc, vc) += mv;
        for (int i = 0; i < 2; ++i) {
            const long ui = node_dof(c + i);
            if (ui < 0) continue;
            op.a.coeffRef(vc, ui) += ce[i];
            for (int j = 0; j <= i; ++j) {
                const long uj = node_dof(c + j);
                if (uj >= 0) op.b.coeffRef(ui, uj) += mu[i][j];
            }
        }
    }
    return op;
}

void require_polar(const RadialGrid& grid) {
    if (grid.kind != CoordinateKind::Polar) throw std::invalid_argument("covariance path needs a polar grid");
}

}  // namespace

AssembledOperator covariance_reduce(const OperatorKind& kind, const ConformalProfile& profile, const ModeSpec& mode,
                                    const RadialGrid& grid) {
    if (profile.kind() == ConformalProfile::Kind::Infinite) {
        throw std::invalid_argument("covariance path needs a finite nose length");
    }
    if (profile.dimension() != kind.dimension()) throw std::invalid_argument("profile and operator dimensions differ");
    require_polar(grid);
    const ModeSpec m = make_mode(kind, mode.index);
    const int n = kind.dimension();
    const int order = kind.order();
    const auto fk = [&](double r) { return std::pow(profile(r), order); };

    if (kind.family() == OperatorFamily::Dirac) {
        AssembledOperator op = dirac_pencil(
            m.index, grid.mesh(), [](double r) { return WarpingValue{std::sin(r), std::cos(r)}; },
            [&](double r) { return fk(r) * std::sin(r); });
        op.mode = m;
        op.path = AssemblyPath::Covariance;
        op.grid = grid;
        return op;
    }

    const double mu = m.angular_eigenvalue;
    const bool essential = m.index > 0.0;
    WeakForm1D form;
    form.p = [n](double r) { return std::pow(std::sin(r), n - 1); };
    form.essential_left = form.essential_right = essential;

    if (kind.family() == OperatorFamily::ConformalLaplacian) {
        const double shift = n * (n - 2.0) / 4.0;
        form.q = [n, mu, shift](double r) {
            const double s = std::sin(r);
            return mu * std::pow(s, n - 3) + shift * std::pow(s, n - 1);
        };
        form.w = [&, n](double r) { return fk(r) * std::pow(std::sin(r), n - 1); };
        AssembledForm f = assemble_weak_form(form, grid);
        return {std::move(f.stiffness), std::move(f.mass), m, AssemblyPath::Covariance, grid};
    }

    // Paneitz: with D the lumped round mass and K the stiffness of the round
    // Laplacian in this mode, A = K D^-1 K + a K + (n-4)/2 q D.
    form.q = [n, mu](double r) { return mu * std::pow(std::sin(r), n - 3); };
    form.w = form.p;
    const AssembledForm f = assemble_weak_form(form, grid);
    const Eigen::VectorXd d = lumped_mass(form.p, grid, essential, essential);
    const PaneitzConstants c = paneitz_constants(n);
    const double c0 = (n - 4.0) / 2.0 * c.q_const;
    const Eigen::Index size = d.size();
    BandedSymmetric<double> a(size, 2);
    const auto& k = f.stiffness;
    for (Eigen::Index j = 0; j < size; ++j) {
        for (Eigen::Index i = j; i <= std::min(size - 1, j + 2); ++i) {
            double s = 0.0;
            for (Eigen::Index l = std::max<Eigen::Index>(0, i - 1); l <= std::min(j + 1, size - 1); ++l) {
                s += k(i, l) * k(l, j) / d(l);
            }
            if (i - j <= 1) s += c.a * k(i, j);
            if (i == j) s += c0 * d(j);
            a.coeffRef(i, j) = s;
        }
    }
    const Eigen::VectorXd bw = lumped_mass([&](double r) { return fk(r) * std::pow(std::sin(r), n - 1); }, grid,
                                           essential, essential);
    return {std::move(a), BandedSymmetric<double>::diagonal(bw), m, AssemblyPath::Covariance, grid};
}

AssembledOperator intrinsic_assemble(const OperatorKind& kind, const WarpedData& warped, const ModeSpec& mode,
                                     const RadialGrid& grid) {
    if (kind.family() == OperatorFamily::Paneitz) {
        throw std::invalid_argument("Paneitz operator is assembled on the covariance path only");
    }
    if (grid.kind != CoordinateKind::Arclength) throw std::invalid_argument("intrinsic path needs an arclength grid");
    if (grid.left < warped.t.front() - 1e-12 || grid.right > warped.t.back() + 1e-9 * (1.0 + warped.t.back())) {
        throw std::invalid_argument("arclength grid extends beyond the warped table");
    }
    const ModeSpec m = make_mode(kind, mode.index);
    const int n = kind.dimension();
    const auto sample = [&warped](double t) { return warped.sample(t); };

    if (kind.family() == OperatorFamily::Dirac) {
        AssembledOperator op = dirac_pencil(
            m.index, grid.mesh(),
            [&](double t) {
                const WarpedSample s = sample(t);
                return WarpingValue{s.h, s.dh};
            },
            [&](double t) { return sample(t).h; }, warped.kinks);
        op.mode = m;
        op.path = AssemblyPath::Intrinsic;
        op.grid = grid;
        return op;
    }

    const double mu = m.angular_eigenvalue;
    const double cn = (n - 2.0) / (4.0 * (n - 1.0));
    WeakForm1D form;
    form.p = [&, n](double t) { return std::pow(sample(t).h, n - 1); };
    form.q = [&, n, mu, cn](double t) {
        const WarpedSample s = sample(t);
        return mu * std::pow(s.h, n - 3) + cn * scalar_curvature_density(s, n);
    };
    form.w = form.p;
    form.kinks = warped.kinks;
    const bool essential_mode = m.index > 0.0;
    const bool at_left_end = grid.left <= warped.t.front();
    const bool at_right_end = grid.right >= warped.t.back() - 1e-9 * (1.0 + warped.t.back());
    form.essential_left = essential_mode || !(warped.closed_left && at_left_end);
    form.essential_right = essential_mode || !(warped.closed_right && at_right_end);
    AssembledForm f = assemble_weak_form(form, grid);
    return {std::move(f.stiffness), std::move(f.mass), m, AssemblyPath::Intrinsic, grid};
}

}  // namespace confspec
