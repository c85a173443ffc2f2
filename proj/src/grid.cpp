#include "confspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "confspec/errors.hpp"

namespace confspec {

namespace {

// Spacings d_i = min(d0 ratio^i, cap) for the N-1 gaps between nodes, plus a
// final gap `cap` to the right end. Returns the right end reached.
double geometric_span(double r_min, double d0, double ratio, double cap, std::size_t count) {
    double x = r_min;
    double d = d0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
        x += std::min(d, cap);
        if (d < cap) d *= ratio;
    }
    return x + cap;
}

std::vector<double> geometric_nodes(double left, double right, std::size_t count, double ratio,
                                    double r_min) {
    const double d0 = (r_min - left) * (ratio - 1.0);
    double lo = 0.0, hi = right - left;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (geometric_span(r_min, d0, ratio, mid, count) < right ? lo : hi) = mid;
    }
    const double cap = 0.5 * (lo + hi);
    std::vector<double> nodes(count);
    double x = r_min;
    double d = d0;
    for (std::size_t i = 0; i < count; ++i) {
        nodes[i] = x;
        x += std::min(d, cap);
        if (d < cap) d *= ratio;
    }
    return nodes;
}

}  // namespace

std::vector<double> RadialGrid::mesh() const {
    std::vector<double> m;
    m.reserve(nodes.size() + 2);
    m.push_back(left);
    m.insert(m.end(), nodes.begin(), nodes.end());
    m.push_back(right);
    return m;
}

RadialGrid make_grid(CoordinateKind kind, std::size_t count, Grading grading, double extent) {
    if (count < kMinGridNodes) throw std::invalid_argument("node count too small (need at least 16)");
    RadialGrid g;
    g.kind = kind;
    g.grading = grading;
    g.left = 0.0;
    g.right = kind == CoordinateKind::Polar ? std::numbers::pi : extent;
    if (!(g.right > 0.0) || !std::isfinite(g.right)) throw std::invalid_argument("grid extent must be positive");

    if (grading.kind == Grading::Kind::Uniform) {
        g.nodes.resize(count);
        const double h = (g.right - g.left) / static_cast<double>(count + 1);
        for (std::size_t i = 0; i < count; ++i) g.nodes[i] = g.left + h * static_cast<double>(i + 1);
        return g;
    }

    if (!(grading.r_min > 0.0)) throw std::invalid_argument("geometric grading requires r_min > 0");
    if (!(grading.ratio > 1.0)) throw std::invalid_argument("geometric grading requires ratio > 1");
    if (kind == CoordinateKind::Polar && grading.r_min >= std::numbers::pi / 2) {
        throw std::invalid_argument("r_min must be below pi/2 for polar grids");
    }
    if (grading.r_min >= g.right) throw std::invalid_argument("r_min outside the grid extent");
    g.nodes = geometric_nodes(g.left, g.right, count, grading.ratio, grading.r_min);
    return g;
}

namespace {

struct DofMap {
    std::vector<long> index;  // mesh vertex -> dof or -1
    long count = 0;
};

DofMap make_dofs(std::size_t vertices, bool essential_left, bool essential_right) {
    DofMap d;
    d.index.assign(vertices, -1);
    for (std::size_t v = 0; v < vertices; ++v) {
        if ((v == 0 && essential_left) || (v + 1 == vertices && essential_right)) continue;
        d.index[v] = d.count++;
    }
    return d;
}

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

}  // namespace

AssembledForm assemble_weak_form(const WeakForm1D& form, const RadialGrid& grid) {
    const std::vector<double> x = grid.mesh();
    const DofMap dofs = make_dofs(x.size(), form.essential_left, form.essential_right);
    AssembledForm out{BandedSymmetric<double>(dofs.count, 1), BandedSymmetric<double>(dofs.count, 1), {}};
    for (std::size_t v = 0; v < x.size(); ++v) {
        if (dofs.index[v] >= 0) out.dof_coordinates.push_back(x[v]);
    }

    std::vector<double> kinks = form.kinks;
    std::sort(kinks.begin(), kinks.end());
    std::vector<double> pieces;
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
        const double a = x[c], b = x[c + 1];
        const double h = b - a;
        pieces.assign({a});
        for (auto it = std::upper_bound(kinks.begin(), kinks.end(), a); it != kinks.end() && *it < b; ++it) {
            pieces.push_back(*it);
        }
        pieces.push_back(b);
        double ke[2][2] = {{0, 0}, {0, 0}};
        double me[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t piece = 0; piece + 1 < pieces.size(); ++piece) {
            const double lo = pieces[piece], hi = pieces[piece + 1];
            for (double s : {-kGauss, kGauss}) {
                const double xq = 0.5 * (lo + hi) + 0.5 * (hi - lo) * s;
                const double xi = (xq - a) / h;
                const double p = form.p(xq), q = form.q(xq), w = form.w(xq);
                if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(w)) {
                    throw NonFiniteCoefficient("non-finite weak-form coefficient", c);
                }
                const double phi[2] = {1.0 - xi, xi};
                const double dphi[2] = {-1.0 / h, 1.0 / h};
                const double wq = 0.5 * (hi - lo);
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        ke[i][j] += wq * (p * dphi[i] * dphi[j] + q * phi[i] * phi[j]);
                        me[i][j] += wq * w * phi[i] * phi[j];
                    }
                }
            }
        }
        for (int i = 0; i < 2; ++i) {
            const long di = dofs.index[c + static_cast<std::size_t>(i)];
            if (di < 0) continue;
            for (int j = 0; j <= i; ++j) {
                const long dj = dofs.index[c + static_cast<std::size_t>(j)];
                if (dj < 0) continue;
                out.stiffness.coeffRef(di, dj) += ke[i][j];
                out.mass.coeffRef(di, dj) += me[i][j];
            }
        }
    }
    return out;
}

Eigen::VectorXd lumped_mass(const std::function<double(double)>& w, const RadialGrid& grid,
                            bool essential_left, bool essential_right) {
    const std::vector<double> x = grid.mesh();
    const DofMap dofs = make_dofs(x.size(), essential_left, essential_right);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dofs.count);
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
        const double a = x[c], h = x[c + 1] - x[c];
        for (double s : {-kGauss, kGauss}) {
            const double xi = 0.5 * (1.0 + s);
            const double wv = w(a + h * xi);
            if (!std::isfinite(wv)) throw NonFiniteCoefficient("non-finite mass weight", c);
            const double phi[2] = {1.0 - xi, xi};
            for (int i = 0; i < 2; ++i) {
                const long di = dofs.index[c + static_cast<std::size_t>(i)];
                if (di >= 0) d(di) += 0.5 * h * wv * phi[i];
            }
        }
    }
    return d;
}

}  // namespace confspec
