#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "confspec/eigensolve.hpp"
#include "confspec/geometry.hpp"
#include "confspec/operators.hpp"

namespace confspec {

enum class PathChoice { Auto, Covariance, Intrinsic };

PathChoice parse_path_choice(const std::string& name);
std::string path_name(AssemblyPath path);

/// Auto picks the intrinsic path for L > 4; Paneitz always resolves to covariance.
AssemblyPath resolve_path(PathChoice choice, const OperatorKind& kind, double length);

/// Shared knobs of every experiment.
struct ExperimentOptions {
    SolveOptions solver;
    /// Worker threads for independent rows and modes; 0 means one per hardware thread.
    unsigned jobs = 1;
    /// Node count of the fine polar grid behind the warped tables of the intrinsic path.
    std::size_t table_size = 16384;
    /// Hard cap on the angular mode index explored by the truncation rule.
    int max_mode = 64;
};

/// Polar grid suited to the profile: geometric toward the nose, uniform otherwise.
RadialGrid polar_grid_for(const ConformalProfile& profile, std::size_t count);

/// Warped table of the profile sampled on a polar grid of `table_size` nodes.
WarpedData warped_table_for(const ConformalProfile& profile, std::size_t table_size);

/// Pencil for one mode of the metric F^2 g_round on the requested path.
AssembledOperator assemble_mode(const OperatorKind& kind, const ConformalProfile& profile, const WarpedData* warped,
                                double mode_index, std::size_t count, AssemblyPath path);

/**
 * Multiplicity-weighted spectrum of F^2 g_round near zero.
 *
 * Modes are visited in order of |index| (both signs for Dirac) and each
 * contributes `per_mode` eigenvalues nearest 0. Exploration stops once a
 * mode's smallest |lambda| exceeds 1.5 max(ceiling, lambda_1^+ so far); by mode
 * monotonicity no eigenvalue below that level is missed.
 */
struct ProfileSpectrum {
    SpectrumReport report;
    int modes_used = 0;
};

ProfileSpectrum profile_spectrum(const OperatorKind& kind, const ConformalProfile& profile, std::size_t count,
                                 AssemblyPath path, double ceiling, int per_mode,
                                 const ExperimentOptions& options = {});

struct SphereLevel {
    double analytic = 0.0;
    double computed = NAN;      // member of the level farthest from `analytic`
    double relative_error = NAN;
    long long multiplicity = 0;  // analytic
    long long found = 0;         // computed entries matched to the level
};

struct SphereValidation {
    std::vector<SphereLevel> levels;
    /// Computed eigenvalues not within 1% of any analytic level (spurious modes).
    std::vector<double> unmatched;
    double tolerance = 1e-3;
    bool passed = false;
};

/**
 * Round-sphere spectrum against the closed-form ladder for all levels of
 * degree <= max_level (|lambda| <= max_level + 1 for Dirac), using modes up to
 * max_level on the covariance path with F == 1.
 */
SphereValidation validate_sphere(const OperatorKind& kind, std::size_t count, int max_level,
                                 const ExperimentOptions& options = {});

struct SweepRow {
    double length = 0.0;
    double lambda_1_plus = NAN;
    double volume = NAN;
    double invariant = NAN;  // lambda_1_plus * volume^{k/n}
    double sigma = 0.0;
    int modes_used = 0;
    double max_residual = NAN;
    AssemblyPath path = AssemblyPath::Intrinsic;
    std::string error;  // non-empty when the row failed; numeric fields are NaN
};

/// Throws std::invalid_argument for an empty or decreasing grid or lengths beyond the path limits.
void check_length_grid(const OperatorKind& kind, const std::vector<double>& lengths, PathChoice path);

/// One row per nose length; per-row failures are recorded in the row.
std::vector<SweepRow> pinocchio_sweep(const OperatorKind& kind, const std::vector<double>& lengths,
                                      std::size_t count, PathChoice path, const ExperimentOptions& options = {});

enum class ConvergenceFlag { Cauchy, Escape };

std::string flag_name(ConvergenceFlag flag);

struct TrajectoryPoint {
    double length = 0.0;
    double value = NAN;
    double difference = NAN;  // |value - previous value|; NaN on the first point
    double analytic = NAN;    // closed form where one exists (cylinder surrogate)
};

struct ConvergenceReport {
    int j = 1;
    bool positive = true;
    double sigma = 0.0;
    std::vector<TrajectoryPoint> points;
    ConvergenceFlag flag = ConvergenceFlag::Cauchy;
    /// Limit of the last two points, linear in e^{-L} (noses) or T^{-2} (cylinders).
    double extrapolated = NAN;
};

/// Escape when the final |value| is at least 0.95 sigma, Cauchy otherwise.
ConvergenceFlag classify_trajectory(const std::vector<TrajectoryPoint>& points, double sigma);

/**
 * Cauchy trajectories need strictly decreasing successive differences with
 * the last at most `tolerance`; escape trajectories need a final |value| of at
 * least 0.95 sigma.
 */
bool dichotomy_consistent(const ConvergenceReport& report, double tolerance = 1e-3);

/// Trajectory of lambda_j^+ (or lambda_j^- when `positive` is false) over the nose lengths.
ConvergenceReport convergence_study(const OperatorKind& kind, int j, bool positive, const std::vector<double>& lengths,
                                    std::size_t count, PathChoice path, const ExperimentOptions& options = {});

/// Bottom eigenvalue of the conformal Laplacian on cylinder segments of the given lengths, against sigma + (pi/T)^2.
ConvergenceReport cylinder_surrogate(const OperatorKind& kind, const std::vector<double>& lengths, std::size_t count,
                                     const ExperimentOptions& options = {});

struct CrosscheckRow {
    std::size_t count = 0;
    std::vector<double> covariance;
    std::vector<double> intrinsic;
    double discrepancy = NAN;         // max relative difference between the paths
    double covariance_change = NAN;   // max relative change from the previous row
    double intrinsic_change = NAN;
};

struct CrosscheckReport {
    std::vector<CrosscheckRow> rows;
    /// Successive ratios of the per-path refinement changes (NaN when undefined).
    std::vector<double> covariance_ratios, intrinsic_ratios, discrepancy_ratios;
    double tolerance = 1e-3;
    bool passed = false;
};

/**
 * Lowest eigenvalues of the first angular mode on both paths for each grid
 * size. Passes when the final discrepancy is within tolerance and every
 * per-path refinement ratio is at least 3.
 */
CrosscheckReport covariance_crosscheck(const OperatorKind& kind, const ConformalProfile& profile,
                                       const std::vector<std::size_t>& counts, const ExperimentOptions& options = {});

struct ScalingReport {
    double c = 1.0;
    std::vector<double> base, scaled;  // lowest eigenvalues of the first mode for F == 1 and F == c
    double eigenvalue_error = NAN;     // max relative deviation from c^{-k}
    double volume_ratio = NAN;         // vol(c) / vol(1), expected c^n
    double invariant_base = NAN, invariant_scaled = NAN;
    double invariant_error = NAN;
    double tolerance = 1e-12;
    bool passed = false;
};

ScalingReport scaling_check(const OperatorKind& kind, double c, std::size_t count = 2000,
                            const ExperimentOptions& options = {});

/// Runs task(i) for i in [0, n) on at most `jobs` threads; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& task);

}  // namespace confspec
