#include "confspec/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "confspec/quadrature.hpp"

namespace confspec {

Jet smoothstep(double x) {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    const double x2 = x * x, x3 = x2 * x;
    return {x3 * (10.0 + x * (-15.0 + 6.0 * x)), 30.0 * x2 * (1.0 - x) * (1.0 - x),
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)};
}

namespace {

Jet infinite_jet(double r) {
    if (r <= 0.0) {
        constexpr double inf = std::numeric_limits<double>::infinity();
        return {inf, -inf, inf};
    }
    if (r >= 1.0) return {1.0, 0.0, 0.0};
    if (r <= 0.5) return {1.0 / r, -1.0 / (r * r), 2.0 / (r * r * r)};
    // log F = s(rho) log(1/r), rho = 2(1 - r)
    const Jet s = smoothstep(2.0 * (1.0 - r));
    const double lg = -std::log(r), dlg = -1.0 / r, d2lg = 1.0 / (r * r);
    const double phi = s.value * lg;
    const double dphi = -2.0 * s.d1 * lg + s.value * dlg;
    const double d2phi = 4.0 * s.d2 * lg - 4.0 * s.d1 * dlg + s.value * d2lg;
    const double f = std::exp(phi);
    return {f, dphi * f, (d2phi + dphi * dphi) * f};
}

Jet nose_jet(double r, double length) {
    const double b = std::exp(-length);
    if (r >= b) return infinite_jet(r);
    const double a = 0.5 * b;
    const double w = 1.0 / (b - a);
    const Jet s = smoothstep((r - a) * w);
    const double q = b + s.value * (r - b);
    const double dq = s.d1 * w * (r - b) + s.value;
    const double d2q = s.d2 * w * w * (r - b) + 2.0 * s.d1 * w;
    return {1.0 / q, -dq / (q * q), -d2q / (q * q) + 2.0 * dq * dq / (q * q * q)};
}

}  // namespace

ConformalProfile ConformalProfile::infinite(int n) {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    return {Kind::Infinite, n, std::numeric_limits<double>::infinity(), 1.0};
}

ConformalProfile ConformalProfile::nose(int n, double length) {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    if (!(length >= 1.0)) throw std::invalid_argument("nose length L must be at least 1");
    if (std::isinf(length)) return infinite(n);
    return {Kind::Nose, n, length, 1.0};
}

ConformalProfile ConformalProfile::constant(int n, double c) {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("constant conformal factor must be positive");
    return {Kind::Constant, n, 0.0, c};
}

Jet ConformalProfile::jet(double r) const {
    switch (kind_) {
        case Kind::Constant: return {c_, 0.0, 0.0};
        case Kind::Nose: return nose_jet(r, length_);
        case Kind::Infinite: break;
    }
    return infinite_jet(r);
}

std::vector<double> ConformalProfile::breakpoints() const {
    switch (kind_) {
        case Kind::Constant: return {};
        case Kind::Nose: {
            const double b = std::exp(-length_);
            return {0.5 * b, b, 0.5, 1.0};
        }
        case Kind::Infinite: break;
    }
    return {0.5, 1.0};
}

ConformalProfile profile_infinity(int n) { return ConformalProfile::infinite(n); }
ConformalProfile profile_L(int n, double length) { return ConformalProfile::nose(n, length); }
ConformalProfile profile_constant(int n, double c) { return ConformalProfile::constant(n, c); }

double sphere_volume(int d) {
    const double half = 0.5 * (d + 1);
    return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

double volume(const ConformalProfile& profile, const RadialGrid& grid) {
    if (!profile.has_finite_volume()) throw std::invalid_argument("infinite volume");
    if (grid.kind != CoordinateKind::Polar) throw std::invalid_argument("volume needs a polar grid");
    const int n = profile.dimension();
    const std::vector<double> x = grid.mesh();
    constexpr double g = 0.57735026918962576451;
    double sum = 0.0;
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
        const double mid = 0.5 * (x[c] + x[c + 1]), half = 0.5 * (x[c + 1] - x[c]);
        for (double s : {-g, g}) {
            const double r = mid + half * s;
            sum += half * std::pow(profile(r), n) * std::pow(std::sin(r), n - 1);
        }
    }
    return sphere_volume(n - 1) * sum;
}

RadialGrid nose_resolving_grid(double length, std::size_t count) {
    if (!(length > 0.0) || std::isinf(length)) return make_grid(CoordinateKind::Polar, count, Grading::uniform());
    // First cell matches the spacing b (ratio - 1) at the nose radius b, and
    // about half of the nodes grade geometrically from r_min up to r = 1.
    const double b = std::exp(-length);
    double r_min = b / 16.0, ratio = 2.0;
    for (int it = 0; it < 100; ++it) {
        ratio = std::exp(2.0 * std::log(1.0 / r_min) / static_cast<double>(count));
        r_min = b * (ratio - 1.0);
    }
    return make_grid(CoordinateKind::Polar, count, Grading::geometric_near_left(ratio, r_min));
}

namespace {

WarpedSample sample_from_profile(const Jet& f, double r) {
    const double s = std::sin(r), c = std::cos(r);
    const double u = f.d1 / f.value;
    const double dh = u * s + c;
    const double d2h = ((f.d2 / f.value - u * u) * s + u * c - s) / f.value;
    return {f.value * s, dh, d2h};
}

}  // namespace

WarpedData warped_reparametrize(const ConformalProfile& profile, const RadialGrid& grid) {
    if (grid.kind != CoordinateKind::Polar) throw std::invalid_argument("warped reparametrization needs a polar grid");
    std::vector<double> r = grid.mesh();
    const bool open_left = profile.kind() == ConformalProfile::Kind::Infinite;
    if (open_left) r.erase(r.begin());
    const double lo = r.front(), hi = r.back();
    for (double b : profile.breakpoints()) {
        if (b > lo && b < hi) r.push_back(b);
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    const std::vector<double> breaks = profile.breakpoints();

    static const QuadratureRule rule = gauss_legendre(10);
    WarpedData w;
    w.closed_left = !open_left;
    w.closed_right = true;
    w.r = r;
    w.t.resize(r.size());
    w.h.resize(r.size());
    w.dh.resize(r.size());
    w.d2h.resize(r.size());
    // Accumulated in long double: the quintic Hermite h'' amplifies node jitter in t by 1/dt^2.
    long double acc = 0.0L;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (i > 0) acc += integrate(rule, r[i - 1], r[i], [&](double x) { return profile(x); });
        const double t = static_cast<double>(acc);
        const WarpedSample s = sample_from_profile(profile.jet(r[i]), r[i]);
        w.t[i] = t;
        w.h[i] = s.h;
        w.dh[i] = s.dh;
        w.d2h[i] = s.d2h;
        if (std::find(breaks.begin(), breaks.end(), r[i]) != breaks.end()) w.kinks.push_back(t);
    }
    // sin(pi) is not exactly zero in floating point
    if (w.closed_left) w.h.front() = 0.0;
    w.h.back() = 0.0;
    return w;
}

WarpedData warped_from_function(const std::vector<double>& t_nodes,
                                const std::function<WarpedSample(double)>& h, bool closed_left,
                                bool closed_right) {
    if (t_nodes.size() < 2) throw std::invalid_argument("warped table needs at least two nodes");
    WarpedData w;
    w.closed_left = closed_left;
    w.closed_right = closed_right;
    w.t = t_nodes;
    for (double t : t_nodes) {
        const WarpedSample s = h(t);
        w.h.push_back(s.h);
        w.dh.push_back(s.dh);
        w.d2h.push_back(s.d2h);
    }
    if (closed_left) w.h.front() = 0.0;
    if (closed_right) w.h.back() = 0.0;
    return w;
}

WarpedData warped_round_sphere(std::size_t table_size) {
    std::vector<double> t(table_size);
    for (std::size_t i = 0; i < table_size; ++i) t[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(table_size - 1);
    return warped_from_function(
        t, [](double x) { return WarpedSample{std::sin(x), std::cos(x), -std::sin(x)}; }, true, true);
}

WarpedData warped_cylinder(double length, std::size_t table_size) {
    if (!(length > 0.0)) throw std::invalid_argument("cylinder length must be positive");
    std::vector<double> t(table_size);
    for (std::size_t i = 0; i < table_size; ++i) t[i] = length * static_cast<double>(i) / static_cast<double>(table_size - 1);
    return warped_from_function(t, [](double) { return WarpedSample{1.0, 0.0, 0.0}; }, false, false);
}

WarpedSample WarpedData::sample(double x) const {
    const std::size_t m = t.size();
    x = std::clamp(x, t.front(), t.back());
    std::size_t i = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x) - t.begin());
    i = std::clamp<std::size_t>(i, 1, m - 1) - 1;
    const double d = t[i + 1] - t[i];
    const double s = (x - t[i]) / d;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    // quintic Hermite basis and its first two derivatives in s
    const double b[6] = {1 - 10 * s3 + 15 * s4 - 6 * s5, s - 6 * s3 + 8 * s4 - 3 * s5,
                         0.5 * (s2 - 3 * s3 + 3 * s4 - s5), 10 * s3 - 15 * s4 + 6 * s5,
                         -4 * s3 + 7 * s4 - 3 * s5, 0.5 * (s3 - 2 * s4 + s5)};
    const double db[6] = {-30 * s2 + 60 * s3 - 30 * s4, 1 - 18 * s2 + 32 * s3 - 15 * s4,
                          0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4), 30 * s2 - 60 * s3 + 30 * s4,
                          -12 * s2 + 28 * s3 - 15 * s4, 0.5 * (3 * s2 - 8 * s3 + 5 * s4)};
    const double ddb[6] = {-60 * s + 180 * s2 - 120 * s3, -36 * s + 96 * s2 - 60 * s3,
                           0.5 * (2 - 18 * s + 36 * s2 - 20 * s3), 60 * s - 180 * s2 + 120 * s3,
                           -24 * s + 84 * s2 - 60 * s3, 0.5 * (6 * s - 24 * s2 + 20 * s3)};
    const double c[6] = {h[i], d * dh[i], d * d * d2h[i], h[i + 1], d * dh[i + 1], d * d * d2h[i + 1]};
    WarpedSample out;
    for (int k = 0; k < 6; ++k) {
        out.h += c[k] * b[k];
        out.dh += c[k] * db[k];
        out.d2h += c[k] * ddb[k];
    }
    out.dh /= d;
    out.d2h /= d * d;
    return out;
}

std::vector<double> scalar_curvature_warped(const WarpedData& warped, int n) {
    const std::size_t m = warped.t.size();
    std::vector<double> scal(m, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < m; ++i) {
        const double h = warped.h[i];
        if (!(h > 0.0)) continue;
        scal[i] = (n - 1.0) * ((n - 2.0) * (1.0 - warped.dh[i] * warped.dh[i]) / (h * h) - 2.0 * warped.d2h[i] / h);
    }
    if (m >= 3) {
        if (std::isnan(scal[0])) scal[0] = 2.0 * scal[1] - scal[2];
        if (std::isnan(scal[m - 1])) scal[m - 1] = 2.0 * scal[m - 2] - scal[m - 3];
    }
    return scal;
}

double scalar_curvature_density(const WarpedSample& s, int n) {
    return (n - 1.0) * ((n - 2.0) * (1.0 - s.dh * s.dh) * std::pow(s.h, n - 3) - 2.0 * s.d2h * std::pow(s.h, n - 2));
}

}  // namespace confspec
