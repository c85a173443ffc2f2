#include "confspec/eigensolve.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace confspec {

double relative_residual(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b,
                         const Eigen::VectorXd& x, double lambda) {
    const Eigen::VectorXd ax = a * x;
    const Eigen::VectorXd bx = b * x;
    // For (near-)kernel vectors ||Ax|| is pure roundoff; floor the denominator
    // at 1e-6 of the normwise backward-error scale (||A|| + |lambda| ||B||) ||x||.
    auto row_sum_norm = [](const BandedSymmetric<double>& m) {
        return m.band().cwiseAbs().maxCoeff() * static_cast<double>(2 * m.bandwidth() + 1);
    };
    const double floor = 1e-6 * (row_sum_norm(a) + std::abs(lambda) * row_sum_norm(b)) * x.norm();
    const double denom = std::max(ax.norm() + std::abs(lambda) * bx.norm(), floor);
    return denom > 0.0 ? (ax - lambda * bx).norm() / denom : 0.0;
}

Eigen::Index sturm_count(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double x) {
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    Eigen::Index count = 0;
    double q = 1.0;
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        const double off = i > 0 ? sub(i - 1) * sub(i - 1) / q : 0.0;
        q = diag(i) - x - off;
        if (std::abs(q) < tiny) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

std::vector<double> tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                            Eigen::Index first, Eigen::Index last) {
    const Eigen::Index m = diag.size();
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (Eigen::Index i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::abs(sub(i - 1)) : 0.0) + (i + 1 < m ? std::abs(sub(i)) : 0.0);
        lo = std::min(lo, diag(i) - r);
        hi = std::max(hi, diag(i) + r);
    }
    const double pad = 1e-14 * std::max(std::abs(lo), std::abs(hi)) + 1e-300;
    lo -= pad;
    hi += pad;
    std::vector<double> out;
    for (Eigen::Index k = std::max<Eigen::Index>(0, first); k < std::min(last, m); ++k) {
        double a = lo, b = hi;
        for (int it = 0; it < 400; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            (sturm_count(diag, sub, mid) > k ? b : a) = mid;
        }
        out.push_back(0.5 * (a + b));
    }
    return out;
}

namespace {

double window_distance(double v, const std::pair<double, double>& w) {
    if (v < w.first) return w.first - v;
    if (v > w.second) return v - w.second;
    return 0.0;
}

std::vector<std::size_t> nearest(const std::vector<double>& values, const std::pair<double, double>& w,
                                 std::size_t count) {
    std::vector<std::size_t> idx(values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const double di = window_distance(values[i], w), dj = window_distance(values[j], w);
        return di != dj ? di < dj : values[i] < values[j];
    });
    idx.resize(std::min(count, idx.size()));
    return idx;
}

Eigen::VectorXd random_vector(Eigen::Index m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = u(rng);
    return v;
}

void finish(std::vector<EigenPair>& pairs, const BandedSymmetric<double>& a, const BandedSymmetric<double>& b) {
    for (EigenPair& p : pairs) {
        p.vector /= std::sqrt(p.vector.dot(b * p.vector));
        p.residual = relative_residual(a, b, p.vector, p.value);
    }
    std::sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
}

Eigen::VectorXd tridiagonal_vector(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double lambda,
                                   const std::vector<Eigen::VectorXd>& cluster, std::mt19937_64& rng) {
    const Eigen::Index m = diag.size();
    const double scale = std::max({1.0, diag.cwiseAbs().maxCoeff(), sub.size() ? sub.cwiseAbs().maxCoeff() : 0.0});
    double delta = 1e-14 * scale;
    for (int attempt = 0; attempt < 8; ++attempt, delta *= 10.0) {
        BandedSymmetric<double> t(m, 1);
        for (Eigen::Index i = 0; i < m; ++i) t.coeffRef(i, i) = diag(i) - lambda - delta;
        for (Eigen::Index i = 0; i + 1 < m; ++i) t.coeffRef(i + 1, i) = sub(i);
        try {
            const BandedLU<double> lu(t);
            Eigen::VectorXd y = random_vector(m, rng).normalized();
            for (int it = 0; it < 3; ++it) {
                y = lu.solve(y);
                for (int pass = 0; pass < 2; ++pass) {
                    for (const Eigen::VectorXd& c : cluster) y -= c.dot(y) * c;
                }
                y.normalize();
            }
            return y;
        } catch (const FactorizationError&) {
        }
    }
    throw ConvergenceError("inverse iteration failed on the tridiagonal reduction", 1.0);
}

std::vector<EigenPair> solve_dense(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b, int count,
                                   const std::pair<double, double>& window, std::uint64_t seed) {
    const Eigen::Index m = a.size();
    const BandedCholesky<double> chol(b);
    const Eigen::MatrixXd ad = a.toDense();
    Eigen::MatrixXd x(m, m), c(m, m);
    for (Eigen::Index j = 0; j < m; ++j) x.col(j) = chol.solveLower(ad.col(j));
    const Eigen::MatrixXd xt = x.transpose();
    for (Eigen::Index j = 0; j < m; ++j) c.col(j) = chol.solveLower(xt.col(j));
    c = 0.5 * (c + c.transpose()).eval();

    Eigen::Tridiagonalization<Eigen::MatrixXd> tri(c);
    const Eigen::VectorXd diag = tri.diagonal();
    const Eigen::VectorXd sub = tri.subDiagonal();
    const Eigen::MatrixXd q = tri.matrixQ();

    const double center = 0.5 * (window.first + window.second);
    const Eigen::Index below = sturm_count(diag, sub, center);
    const Eigen::Index first = std::max<Eigen::Index>(0, below - count);
    const std::vector<double> candidates = tridiagonal_eigenvalues(diag, sub, first, below + count);
    const std::vector<std::size_t> pick = nearest(candidates, window, static_cast<std::size_t>(count));

    std::vector<double> chosen;
    for (std::size_t i : pick) chosen.push_back(candidates[i]);
    std::sort(chosen.begin(), chosen.end());

    std::mt19937_64 rng(seed);
    const double scale = std::max(1.0, diag.cwiseAbs().maxCoeff());
    std::vector<EigenPair> pairs;
    std::vector<Eigen::VectorXd> cluster;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (i == 0 || chosen[i] - chosen[i - 1] > 1e-7 * scale) cluster.clear();
        const Eigen::VectorXd y = tridiagonal_vector(diag, sub, chosen[i], cluster, rng);
        cluster.push_back(y);
        pairs.push_back({chosen[i], chol.solveUpper(q * y), 0.0});
    }
    finish(pairs, a, b);
    return pairs;
}

// (A - sigma B)^-1 applied in long double. The stiff fourth-order pencils have
// condition numbers near 1/eps; the wider mantissa keeps the Krylov operator
// accurate to double precision.
class ShiftInvert {
public:
    ShiftInvert(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b, double shift)
        : lu_(shifted(a, b, shift), 1e-13L) {}

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
        return lu_.solve(rhs.cast<long double>()).cast<double>();
    }

private:
    static BandedSymmetric<long double> shifted(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b,
                                                double shift) {
        BandedSymmetric<long double> al(a.size(), a.bandwidth()), bl(b.size(), b.bandwidth());
        al.band() = a.band().cast<long double>();
        bl.band() = b.band().cast<long double>();
        return al - static_cast<long double>(shift) * bl;
    }

    BandedLU<long double> lu_;
};

// One shift-invert step damps the high-frequency roundoff left by
// reorthogonalization; vectors are then B-orthonormalized in value order.
void refine(std::vector<EigenPair>& pairs, const ShiftInvert& op, const BandedSymmetric<double>& b) {
    std::sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) { return x.value < y.value; });
    std::vector<Eigen::VectorXd> bx;
    for (EigenPair& p : pairs) {
        Eigen::VectorXd v = op.solve(b * p.vector);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < bx.size(); ++j) v -= pairs[j].vector * bx[j].dot(v);
        }
        p.vector = v / std::sqrt(v.dot(b * v));
        bx.push_back(b * p.vector);
    }
}

// Shift lies on an eigenvalue to working precision; Ritz values of the
// other wanted eigenvalues would lose accuracy.
struct ShiftTooClose {};

std::vector<EigenPair> lanczos(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b, int count,
                               const std::pair<double, double>& window, double shift, const SolveOptions& opt) {
    const Eigen::Index m = a.size();
    const ShiftInvert op(a, b, shift);
    const Eigen::Index cap = std::min(m, std::max<Eigen::Index>(opt.max_krylov, count));

    std::mt19937_64 rng(opt.seed);
    Eigen::MatrixXd q(m, cap), z(m, cap);
    std::vector<double> alpha, beta;

    auto b_normalize = [&](Eigen::VectorXd v, Eigen::Index cols) -> std::pair<Eigen::VectorXd, double> {
        for (int pass = 0; pass < 2; ++pass) {
            if (cols > 0) v -= q.leftCols(cols) * (z.leftCols(cols).transpose() * v);
        }
        const double norm = std::sqrt(std::max(0.0, v.dot(b * v)));
        return {v, norm};
    };

    {
        auto [v, norm] = b_normalize(random_vector(m, rng), 0);
        q.col(0) = v / norm;
        z.col(0) = b * q.col(0);
    }

    double worst = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < cap; ++j) {
        Eigen::VectorXd w = op.solve(z.col(j));
        const double aj = z.col(j).dot(w);
        alpha.push_back(aj);
        auto [v, norm] = b_normalize(w, j + 1);
        const double scale = std::abs(aj) + (j > 0 ? beta.back() : 0.0);
        const bool exhausted = j + 1 == cap;
        bool restart_vector = false;
        if (!exhausted && !(norm > 1e-13 * scale)) {
            // invariant subspace: continue with a fresh direction, decoupled in T
            auto fresh = b_normalize(random_vector(m, rng), j + 1);
            v = fresh.first;
            norm = fresh.second;
            restart_vector = true;
        }

        const Eigen::Index k = j + 1;
        const bool check = exhausted || restart_vector || (k >= count + 2 && k % 5 == 0);
        if (!check) {
            beta.push_back(norm);
            q.col(k) = v / norm;
            z.col(k) = b * q.col(k);
            continue;
        }

        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(alpha.data(), k);
        Eigen::VectorXd e = k > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), k - 1))
                                  : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tsolve;
        tsolve.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
        const Eigen::VectorXd theta = tsolve.eigenvalues();
        const Eigen::MatrixXd y = tsolve.eigenvectors();

        std::vector<double> lambdas;
        std::vector<Eigen::Index> usable;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (std::abs(theta(i)) > 0.0) {
                lambdas.push_back(shift + 1.0 / theta(i));
                usable.push_back(i);
            }
        }
        const std::vector<std::size_t> pick = nearest(lambdas, window, static_cast<std::size_t>(count));
        if (pick.size() >= 2) {
            double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
            for (std::size_t p : pick) {
                lo = std::min(lo, std::abs(theta(usable[p])));
                hi = std::max(hi, std::abs(theta(usable[p])));
            }
            if (hi > 1e9 * lo) throw ShiftTooClose{};
        }
        const double coupling = restart_vector ? 0.0 : norm;
        bool estimate_ok = pick.size() == static_cast<std::size_t>(std::min<Eigen::Index>(count, m));
        for (std::size_t p : pick) {
            const Eigen::Index i = usable[p];
            if (std::abs(coupling * y(k - 1, i)) > 1e-11 * std::abs(theta(i))) estimate_ok = false;
        }
        if (estimate_ok || exhausted) {
            std::vector<EigenPair> pairs;
            for (std::size_t p : pick) {
                const Eigen::Index i = usable[p];
                pairs.push_back({lambdas[p], q.leftCols(k) * y.col(i), 0.0});
            }
            refine(pairs, op, b);
            finish(pairs, a, b);
            worst = 0.0;
            for (const EigenPair& pr : pairs) worst = std::max(worst, pr.residual);
            if (worst <= opt.tolerance) return pairs;
        }
        if (exhausted || k == m) break;
        beta.push_back(restart_vector ? 0.0 : norm);
        q.col(k) = v / norm;
        z.col(k) = b * q.col(k);
    }
    throw ConvergenceError("shift-invert Lanczos did not converge", worst);
}

std::vector<EigenPair> solve_iterative(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b, int count,
                                       const std::pair<double, double>& window, const SolveOptions& opt) {
    const BandedCholesky<double> chol(b);  // positive definiteness check with pivot index
    (void)chol;
    const double center = 0.5 * (window.first + window.second);
    const double unit = std::max(1.0, std::abs(center));
    constexpr double offsets[] = {0.0, -1e-3, 1e-2, -1e-1};
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            return lanczos(a, b, count, window, center + offsets[attempt] * unit, opt);
        } catch (const FactorizationError&) {
            if (attempt == 3) throw;
        } catch (const ShiftTooClose&) {
            if (attempt == 3) throw ConvergenceError("shift collides with an eigenvalue after restarts", 1.0);
        }
    }
    throw ConvergenceError("shift-invert restarts exhausted", std::numeric_limits<double>::infinity());
}

}  // namespace

std::vector<EigenPair> solve_generalized(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b,
                                         int count, const SolveOptions& options) {
    if (count < 1) throw std::invalid_argument("eigenpair count must be at least 1");
    if (a.size() != b.size()) throw std::invalid_argument("A and B differ in size");
    const int wanted = static_cast<int>(std::min<Eigen::Index>(count, a.size()));
    const std::pair<double, double> window = options.window.value_or(std::pair{0.0, 0.0});
    if (window.first > window.second) throw std::invalid_argument("empty eigenvalue window");
    const bool dense = options.path == SolverPath::Dense ||
                       (options.path == SolverPath::Auto && a.size() <= options.dense_limit);
    return dense ? solve_dense(a, b, wanted, window, options.seed)
                 : solve_iterative(a, b, wanted, window, options);
}

std::optional<double> SpectrumReport::lambda_plus(int j) const {
    int seen = 0;
    for (const SpectrumEntry& e : entries) {
        if (e.value <= kernel_tolerance) continue;
        seen += e.multiplicity;
        if (seen >= j) return e.value;
    }
    return std::nullopt;
}

std::optional<double> SpectrumReport::lambda_minus(int j) const {
    int seen = 0;
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) {
        if (it->value >= -kernel_tolerance) continue;
        seen += it->multiplicity;
        if (seen >= j) return it->value;
    }
    return std::nullopt;
}

double SpectrumReport::max_residual() const {
    double r = 0.0;
    for (const SpectrumEntry& e : entries) r = std::max(r, e.residual);
    return r;
}

std::vector<std::pair<double, int>> SpectrumReport::distinct(double relative_tolerance) const {
    std::vector<std::pair<double, int>> groups;
    for (const SpectrumEntry& e : entries) {
        if (!groups.empty() &&
            std::abs(e.value - groups.back().first) <= relative_tolerance * std::max(1.0, std::abs(e.value))) {
            groups.back().second += e.multiplicity;
        } else {
            groups.emplace_back(e.value, e.multiplicity);
        }
    }
    return groups;
}

SpectrumReport aggregate(const std::vector<ModeSpectrum>& per_mode, double kernel_tolerance, double merge_tolerance) {
    SpectrumReport report;
    std::vector<SpectrumEntry> all;
    double scale = 0.0;
    for (const ModeSpectrum& ms : per_mode) {
        for (std::size_t i = 0; i < ms.values.size(); ++i) {
            const double res = i < ms.residuals.size() ? ms.residuals[i] : 0.0;
            all.push_back({ms.values[i], ms.mode, ms.mode.multiplicity, res});
            scale = std::max(scale, std::abs(ms.values[i]));
        }
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const SpectrumEntry& x, const SpectrumEntry& y) { return x.value < y.value; });
    for (const SpectrumEntry& e : all) {
        if (!report.entries.empty() &&
            std::abs(e.value - report.entries.back().value) <= merge_tolerance * std::max(1.0, std::abs(e.value))) {
            report.entries.back().multiplicity += e.multiplicity;
            report.entries.back().residual = std::max(report.entries.back().residual, e.residual);
        } else {
            report.entries.push_back(e);
        }
    }
    report.kernel_tolerance = kernel_tolerance >= 0.0 ? kernel_tolerance : 1e-8 * scale;
    report.lambda_1_plus = report.lambda_plus(1);
    report.lambda_1_minus = report.lambda_minus(1);
    return report;
}

}  // namespace confspec
