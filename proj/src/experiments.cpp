#include "confspec/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace confspec {

namespace {

bool is_dirac(const OperatorKind& kind) { return kind.family() == OperatorFamily::Dirac; }

// Signed mode indices sharing the angular level `level`: l for scalars, +-(level + 1/2) for Dirac.
std::vector<double> level_modes(const OperatorKind& kind, int level) {
    if (!is_dirac(kind)) return {static_cast<double>(level)};
    const double k = level + 0.5;
    return {k, -k};
}

double smallest_abs(const std::vector<double>& values) {
    double best = INFINITY;
    for (double v : values) best = std::min(best, std::abs(v));
    return best;
}

double relative_difference(double x, double reference) { return std::abs(x - reference) / std::abs(reference); }

}  // namespace

PathChoice parse_path_choice(const std::string& name) {
    std::string s;
    for (char ch : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (s == "auto") return PathChoice::Auto;
    if (s == "covariance") return PathChoice::Covariance;
    if (s == "intrinsic") return PathChoice::Intrinsic;
    throw std::invalid_argument("unknown assembly path '" + name + "' (expected auto, covariance or intrinsic)");
}

std::string path_name(AssemblyPath path) { return path == AssemblyPath::Covariance ? "covariance" : "intrinsic"; }

AssemblyPath resolve_path(PathChoice choice, const OperatorKind& kind, double length) {
    if (kind.family() == OperatorFamily::Paneitz) {
        if (choice == PathChoice::Intrinsic) {
            throw std::invalid_argument("the Paneitz operator is assembled on the covariance path only");
        }
        return AssemblyPath::Covariance;
    }
    switch (choice) {
        case PathChoice::Covariance: return AssemblyPath::Covariance;
        case PathChoice::Intrinsic: return AssemblyPath::Intrinsic;
        case PathChoice::Auto: break;
    }
    return length > 4.0 ? AssemblyPath::Intrinsic : AssemblyPath::Covariance;
}

RadialGrid polar_grid_for(const ConformalProfile& profile, std::size_t count) {
    if (profile.kind() == ConformalProfile::Kind::Nose) return nose_resolving_grid(profile.nose_length(), count);
    return make_grid(CoordinateKind::Polar, count, Grading::uniform());
}

WarpedData warped_table_for(const ConformalProfile& profile, std::size_t table_size) {
    return warped_reparametrize(profile, polar_grid_for(profile, table_size));
}

AssembledOperator assemble_mode(const OperatorKind& kind, const ConformalProfile& profile, const WarpedData* warped,
                                double mode_index, std::size_t count, AssemblyPath path) {
    const ModeSpec mode = make_mode(kind, mode_index);
    if (path == AssemblyPath::Covariance) return covariance_reduce(kind, profile, mode, polar_grid_for(profile, count));
    if (warped == nullptr) throw std::invalid_argument("intrinsic assembly needs a warped table");
    const RadialGrid grid = make_grid(CoordinateKind::Arclength, count, Grading::uniform(), warped->length());
    return intrinsic_assemble(kind, *warped, mode, grid);
}

ProfileSpectrum profile_spectrum(const OperatorKind& kind, const ConformalProfile& profile, std::size_t count,
                                 AssemblyPath path, double ceiling, int per_mode, const ExperimentOptions& options) {
    std::optional<WarpedData> warped;
    if (path == AssemblyPath::Intrinsic) warped = warped_table_for(profile, options.table_size);

    std::vector<ModeSpectrum> spectra;
    double lambda_plus = INFINITY;
    for (int level = 0; level <= options.max_mode; ++level) {
        double level_min = INFINITY;
        for (double index : level_modes(kind, level)) {
            const AssembledOperator op =
                assemble_mode(kind, profile, warped ? &*warped : nullptr, index, count, path);
            ModeSpectrum ms{op.mode, {}, {}};
            for (const EigenPair& p : solve_generalized(op.a, op.b, per_mode, options.solver)) {
                ms.values.push_back(p.value);
                ms.residuals.push_back(p.residual);
                if (p.value > 0.0) lambda_plus = std::min(lambda_plus, p.value);
            }
            level_min = std::min(level_min, smallest_abs(ms.values));
            spectra.push_back(std::move(ms));
        }
        const double requested = std::isfinite(lambda_plus) ? std::max(ceiling, lambda_plus) : INFINITY;
        if (level_min > 1.5 * requested) break;
    }
    return {aggregate(spectra), static_cast<int>(spectra.size())};
}

// ---------------------------------------------------------------- sphere

namespace {

struct AnalyticLevel {
    double value;
    long long multiplicity;
};

std::vector<AnalyticLevel> round_sphere_levels(const OperatorKind& kind, int max_level) {
    const int n = kind.dimension();
    std::vector<AnalyticLevel> out;
    for (int j = 0; j <= max_level; ++j) {
        const double mu = j * (j + n - 1.0);
        switch (kind.family()) {
            case OperatorFamily::ConformalLaplacian:
                out.push_back({mu + n * (n - 2.0) / 4.0, harmonic_dimension(n, j)});
                break;
            case OperatorFamily::Paneitz: {
                const PaneitzConstants pc = paneitz_constants(n);
                out.push_back({mu * mu + pc.a * mu + (n - 4.0) / 2.0 * pc.q_const, harmonic_dimension(n, j)});
                break;
            }
            case OperatorFamily::Dirac:
                out.push_back({-(j + 1.0), 2LL * (j + 1)});
                out.push_back({j + 1.0, 2LL * (j + 1)});
                break;
        }
    }
    std::sort(out.begin(), out.end(), [](const AnalyticLevel& a, const AnalyticLevel& b) { return a.value < b.value; });
    return out;
}

}  // namespace

SphereValidation validate_sphere(const OperatorKind& kind, std::size_t count, int max_level,
                                 const ExperimentOptions& options) {
    if (max_level < 0) throw std::invalid_argument("max_level must be non-negative");
    const ConformalProfile round = profile_constant(kind.dimension(), 1.0);

    std::vector<double> indices;
    for (int level = 0; level <= max_level; ++level) {
        for (double index : level_modes(kind, level)) indices.push_back(index);
    }
    // Mode at level l carries the degrees l..max_level; Dirac has both signs of each.
    std::vector<std::vector<double>> values(indices.size());
    std::vector<int> multiplicity(indices.size());
    parallel_for(indices.size(), options.jobs, [&](std::size_t i) {
        const int level = is_dirac(kind) ? static_cast<int>(std::abs(indices[i]) - 0.5) : static_cast<int>(indices[i]);
        const int wanted = (max_level - level + 1) * (is_dirac(kind) ? 2 : 1);
        const AssembledOperator op = assemble_mode(kind, round, nullptr, indices[i], count, AssemblyPath::Covariance);
        for (const EigenPair& p : solve_generalized(op.a, op.b, wanted, options.solver)) values[i].push_back(p.value);
        multiplicity[i] = op.mode.multiplicity;
    });

    SphereValidation out;
    for (const AnalyticLevel& a : round_sphere_levels(kind, max_level)) out.levels.push_back({a.value, NAN, NAN, a.multiplicity, 0});
    for (std::size_t i = 0; i < indices.size(); ++i) {
        for (double v : values[i]) {
            SphereLevel* best = nullptr;
            for (SphereLevel& level : out.levels) {
                if (!best || std::abs(v - level.analytic) < std::abs(v - best->analytic)) best = &level;
            }
            const double err = relative_difference(v, best->analytic);
            if (err > 1e-2) {
                out.unmatched.push_back(v);
                continue;
            }
            best->found += multiplicity[i];
            if (!(err <= best->relative_error)) {
                best->relative_error = err;
                best->computed = v;
            }
        }
    }
    std::sort(out.unmatched.begin(), out.unmatched.end());
    out.passed = out.unmatched.empty();
    for (const SphereLevel& level : out.levels) {
        if (level.found != level.multiplicity || !(level.relative_error <= out.tolerance)) out.passed = false;
    }
    return out;
}

// ---------------------------------------------------------------- sweeps

void check_length_grid(const OperatorKind& kind, const std::vector<double>& lengths, PathChoice path) {
    if (lengths.empty()) throw std::invalid_argument("the L grid is empty");
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const double length = lengths[i];
        if (!std::isfinite(length) || length <= 0.0) throw std::invalid_argument("nose lengths must be finite and positive");
        if (i > 0 && length < lengths[i - 1]) throw std::invalid_argument("the L grid must be non-decreasing");
        if (resolve_path(path, kind, length) == AssemblyPath::Covariance) {
            if (kind.order() * length > 16.0) {
                throw std::invalid_argument("covariance path needs k*L <= 16 (mass weight spans e^{kL}); use --path intrinsic");
            }
        } else if (length > 30.0) {
            throw std::invalid_argument("intrinsic path supports L <= 30");
        }
    }
}

std::vector<SweepRow> pinocchio_sweep(const OperatorKind& kind, const std::vector<double>& lengths,
                                      std::size_t count, PathChoice path, const ExperimentOptions& options) {
    check_length_grid(kind, lengths, path);
    const double sigma = cylinder_threshold(kind);
    const int n = kind.dimension(), k = kind.order();
    ExperimentOptions inner = options;
    inner.jobs = 1;

    std::vector<SweepRow> rows(lengths.size());
    parallel_for(lengths.size(), options.jobs, [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.length = lengths[i];
        row.sigma = sigma;
        try {
            row.path = resolve_path(path, kind, lengths[i]);
            const ConformalProfile profile = profile_L(n, lengths[i]);
            const ProfileSpectrum s =
                profile_spectrum(kind, profile, count, row.path, 2.0 * sigma, is_dirac(kind) ? 4 : 2, inner);
            if (!s.report.lambda_1_plus) throw ConvergenceError("no positive eigenvalue found", 0.0);
            const double vol = volume(profile, polar_grid_for(profile, options.table_size));
            row.lambda_1_plus = *s.report.lambda_1_plus;
            row.volume = vol;
            row.invariant = row.lambda_1_plus * std::pow(vol, static_cast<double>(k) / n);
            row.modes_used = s.modes_used;
            row.max_residual = s.report.max_residual();
        } catch (const std::exception& e) {
            row.error = e.what();
            row.lambda_1_plus = row.volume = row.invariant = row.max_residual = NAN;
            row.modes_used = 0;
        }
    });
    return rows;
}

// ---------------------------------------------------------------- convergence

std::string flag_name(ConvergenceFlag flag) { return flag == ConvergenceFlag::Cauchy ? "cauchy" : "escape"; }

ConvergenceFlag classify_trajectory(const std::vector<TrajectoryPoint>& points, double sigma) {
    if (points.empty()) throw std::invalid_argument("empty trajectory");
    return std::abs(points.back().value) >= 0.95 * sigma ? ConvergenceFlag::Escape : ConvergenceFlag::Cauchy;
}

bool dichotomy_consistent(const ConvergenceReport& report, double tolerance) {
    const std::vector<TrajectoryPoint>& p = report.points;
    if (p.empty()) return false;
    if (report.flag == ConvergenceFlag::Escape) return std::abs(p.back().value) >= 0.95 * report.sigma;
    if (p.size() < 2 || !(p.back().difference <= tolerance)) return false;
    for (std::size_t i = 2; i < p.size(); ++i) {
        if (!(p[i].difference < p[i - 1].difference)) return false;
    }
    return std::abs(p.back().value) < report.sigma;
}

namespace {

// Limit of a + b x through the last two points (x_i, y_i) at x = 0.
double linear_limit(double x1, double y1, double x2, double y2) {
    if (x1 == x2) return y2;
    return (y2 * x1 - y1 * x2) / (x1 - x2);
}

void fill_differences(std::vector<TrajectoryPoint>& points) {
    for (std::size_t i = 1; i < points.size(); ++i) points[i].difference = std::abs(points[i].value - points[i - 1].value);
}

}  // namespace

ConvergenceReport convergence_study(const OperatorKind& kind, int j, bool positive, const std::vector<double>& lengths,
                                    std::size_t count, PathChoice path, const ExperimentOptions& options) {
    if (j < 1) throw std::invalid_argument("eigenvalue index j must be at least 1");
    check_length_grid(kind, lengths, path);
    ConvergenceReport out;
    out.j = j;
    out.positive = positive;
    out.sigma = cylinder_threshold(kind);
    out.points.resize(lengths.size());
    ExperimentOptions inner = options;
    inner.jobs = 1;

    parallel_for(lengths.size(), options.jobs, [&](std::size_t i) {
        const ConformalProfile profile = profile_L(kind.dimension(), lengths[i]);
        const ProfileSpectrum s = profile_spectrum(kind, profile, count, resolve_path(path, kind, lengths[i]),
                                                   2.0 * out.sigma, is_dirac(kind) ? 2 * j : j, inner);
        const std::optional<double> v = positive ? s.report.lambda_plus(j) : s.report.lambda_minus(j);
        if (!v) throw ConvergenceError("eigenvalue index beyond the computed spectrum", 0.0);
        out.points[i] = {lengths[i], *v, NAN, NAN};
    });
    fill_differences(out.points);
    out.flag = classify_trajectory(out.points, out.sigma);
    const std::size_t m = out.points.size();
    out.extrapolated = m < 2 ? out.points.back().value
                             : linear_limit(std::exp(-out.points[m - 2].length), out.points[m - 2].value,
                                            std::exp(-out.points[m - 1].length), out.points[m - 1].value);
    return out;
}

ConvergenceReport cylinder_surrogate(const OperatorKind& kind, const std::vector<double>& lengths, std::size_t count,
                                     const ExperimentOptions& options) {
    if (kind.family() != OperatorFamily::ConformalLaplacian) {
        throw std::invalid_argument("the cylinder surrogate is defined for the conformal Laplacian");
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (!(lengths[i] > 0.0) || (i > 0 && lengths[i] < lengths[i - 1])) {
            throw std::invalid_argument("cylinder lengths must be positive and non-decreasing");
        }
    }
    ConvergenceReport out;
    out.sigma = cylinder_threshold(kind);
    out.points.resize(lengths.size());
    parallel_for(lengths.size(), options.jobs, [&](std::size_t i) {
        const double t = lengths[i];
        const WarpedData w = warped_cylinder(t);
        const RadialGrid grid = make_grid(CoordinateKind::Arclength, count, Grading::uniform(), t);
        const AssembledOperator op = intrinsic_assemble(kind, w, make_mode(kind, 0.0), grid);
        const double v = solve_generalized(op.a, op.b, 1, options.solver).front().value;
        out.points[i] = {t, v, NAN, out.sigma + std::pow(std::numbers::pi / t, 2)};
    });
    fill_differences(out.points);
    out.flag = classify_trajectory(out.points, out.sigma);
    const std::size_t m = out.points.size();
    out.extrapolated = m < 2 ? out.points.back().value
                             : linear_limit(std::pow(out.points[m - 2].length, -2.0), out.points[m - 2].value,
                                            std::pow(out.points[m - 1].length, -2.0), out.points[m - 1].value);
    return out;
}

// ---------------------------------------------------------------- cross-checks

CrosscheckReport covariance_crosscheck(const OperatorKind& kind, const ConformalProfile& profile,
                                       const std::vector<std::size_t>& counts, const ExperimentOptions& options) {
    if (kind.family() == OperatorFamily::Paneitz) {
        throw std::invalid_argument("the cross-check needs both paths; Paneitz has the covariance path only");
    }
    if (profile.kind() == ConformalProfile::Kind::Infinite) throw std::invalid_argument("the covariance path needs finite L");
    if (profile.nose_length() > 4.0) throw std::invalid_argument("the cross-check is limited to L <= 4");
    if (counts.empty()) throw std::invalid_argument("empty grid-size list");
    for (std::size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] <= counts[i - 1]) throw std::invalid_argument("grid sizes must increase");
    }

    const WarpedData warped = warped_table_for(profile, options.table_size);
    const double index = is_dirac(kind) ? 0.5 : 0.0;
    const int wanted = is_dirac(kind) ? 4 : 3;
    CrosscheckReport out;
    out.rows.resize(counts.size());
    parallel_for(2 * counts.size(), options.jobs, [&](std::size_t task) {
        const std::size_t i = task / 2;
        const AssemblyPath path = task % 2 == 0 ? AssemblyPath::Covariance : AssemblyPath::Intrinsic;
        const AssembledOperator op = assemble_mode(kind, profile, &warped, index, counts[i], path);
        std::vector<double> v;
        for (const EigenPair& p : solve_generalized(op.a, op.b, wanted, options.solver)) v.push_back(p.value);
        out.rows[i].count = counts[i];
        (path == AssemblyPath::Covariance ? out.rows[i].covariance : out.rows[i].intrinsic) = std::move(v);
    });

    auto max_change = [](const std::vector<double>& x, const std::vector<double>& ref) {
        double worst = 0.0;
        for (std::size_t i = 0; i < std::min(x.size(), ref.size()); ++i) worst = std::max(worst, relative_difference(x[i], ref[i]));
        return worst;
    };
    auto ratio = [](double prev, double cur) { return cur > 0.0 ? prev / cur : NAN; };
    for (std::size_t i = 0; i < out.rows.size(); ++i) {
        CrosscheckRow& row = out.rows[i];
        row.discrepancy = max_change(row.covariance, row.intrinsic);
        if (i == 0) continue;
        row.covariance_change = max_change(row.covariance, out.rows[i - 1].covariance);
        row.intrinsic_change = max_change(row.intrinsic, out.rows[i - 1].intrinsic);
        out.discrepancy_ratios.push_back(ratio(out.rows[i - 1].discrepancy, row.discrepancy));
        if (i >= 2) {
            out.covariance_ratios.push_back(ratio(out.rows[i - 1].covariance_change, row.covariance_change));
            out.intrinsic_ratios.push_back(ratio(out.rows[i - 1].intrinsic_change, row.intrinsic_change));
        }
    }
    out.passed = out.rows.back().discrepancy <= out.tolerance;
    for (const std::vector<double>* ratios : {&out.covariance_ratios, &out.intrinsic_ratios}) {
        for (double r : *ratios) {
            if (!(r >= 3.0)) out.passed = false;
        }
    }
    return out;
}

ScalingReport scaling_check(const OperatorKind& kind, double c, std::size_t count, const ExperimentOptions& options) {
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scale factor must be positive");
    const int n = kind.dimension(), k = kind.order();
    const double index = is_dirac(kind) ? 0.5 : 0.0;
    // Shift-invert keeps relative accuracy on the bottom of stiff pencils; the dense
    // reduction is only accurate to eps * lambda_max.
    SolveOptions solver = options.solver;
    solver.path = SolverPath::Iterative;

    ScalingReport out;
    out.c = c;
    auto run = [&](double scale, std::vector<double>& values, double& invariant, double& vol) {
        const ConformalProfile profile = profile_constant(n, scale);
        const AssembledOperator op = assemble_mode(kind, profile, nullptr, index, count, AssemblyPath::Covariance);
        double plus = INFINITY;
        for (const EigenPair& p : solve_generalized(op.a, op.b, 4, solver)) {
            values.push_back(p.value);
            if (p.value > 0.0) plus = std::min(plus, p.value);
        }
        vol = volume(profile, op.grid);
        invariant = plus * std::pow(vol, static_cast<double>(k) / n);
    };
    double vol_base = 0.0, vol_scaled = 0.0;
    run(1.0, out.base, out.invariant_base, vol_base);
    run(c, out.scaled, out.invariant_scaled, vol_scaled);

    const double factor = std::pow(c, -k);
    out.eigenvalue_error = 0.0;
    for (std::size_t i = 0; i < out.base.size(); ++i) {
        out.eigenvalue_error = std::max(out.eigenvalue_error, relative_difference(out.scaled[i], factor * out.base[i]));
    }
    out.volume_ratio = vol_scaled / vol_base;
    out.invariant_error = relative_difference(out.invariant_scaled, out.invariant_base);
    out.passed = out.eigenvalue_error <= out.tolerance && out.invariant_error <= out.tolerance;
    return out;
}

// ---------------------------------------------------------------- workers

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(jobs, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first;
    std::mutex guard;
    auto work = [&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(guard);
                if (!first) first = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

}  // namespace confspec
