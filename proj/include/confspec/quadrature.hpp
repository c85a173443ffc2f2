#pragma once

#include <vector>

namespace confspec {

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule with `points` nodes, computed by Newton iteration on P_n.
QuadratureRule gauss_legendre(int points);

/// Integrates `f` over [a, b] with a precomputed rule.
template <typename F>
double integrate(const QuadratureRule& rule, double a, double b, F&& f) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * s;
}

}  // namespace confspec
