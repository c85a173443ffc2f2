#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "confspec/banded.hpp"
#include "confspec/mode.hpp"

namespace confspec {

enum class SolverPath { Auto, Dense, Iterative };

struct SolveOptions {
    /// Eigenvalues nearest this interval are returned; default is {0, 0}, i.e. smallest |lambda|.
    std::optional<std::pair<double, double>> window;
    SolverPath path = SolverPath::Auto;
    double tolerance = 1e-9;
    std::uint64_t seed = 0x5eed'c0de'2024ULL;
    /// Auto uses the dense reduction up to this size, shift-invert Lanczos above it.
    Eigen::Index dense_limit = 600;
    /// Largest Krylov dimension before the iterative path gives up.
    Eigen::Index max_krylov = 600;
};

struct EigenPair {
    double value = 0.0;
    Eigen::VectorXd vector;   // B-normalized
    double residual = 0.0;    // ||Ax - lambda Bx|| / (||Ax|| + |lambda| ||Bx||)
};

double relative_residual(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b,
                         const Eigen::VectorXd& x, double lambda);

/**
 * `count` eigenpairs of A x = lambda B x nearest the window, sorted ascending.
 *
 * B must be positive definite (FactorizationError otherwise, with the pivot).
 * The dense path factors B, reduces L^-1 A L^-T to tridiagonal form and
 * bisects; the iterative path runs shift-invert Lanczos with full
 * B-reorthogonalization and restarts with a perturbed shift (at most three
 * times) when A - sigma B is singular. Results are deterministic for a seed.
 */
std::vector<EigenPair> solve_generalized(const BandedSymmetric<double>& a, const BandedSymmetric<double>& b,
                                         int count, const SolveOptions& options = {});

/// Eigenvalues of a symmetric tridiagonal matrix with index in [first, last), by Sturm bisection.
std::vector<double> tridiagonal_eigenvalues(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub,
                                            Eigen::Index first, Eigen::Index last);

/// Number of eigenvalues of the tridiagonal matrix strictly below x.
Eigen::Index sturm_count(const Eigen::VectorXd& diag, const Eigen::VectorXd& sub, double x);

struct SpectrumEntry {
    double value = 0.0;
    ModeSpec mode;           // first contributing mode
    int multiplicity = 1;
    double residual = 0.0;
};

/// Per-mode solver output handed to `aggregate`.
struct ModeSpectrum {
    ModeSpec mode;
    std::vector<double> values;      // ascending
    std::vector<double> residuals;   // same length as values, or empty
};

/**
 * Multiplicity-weighted union of mode spectra.
 *
 * lambda_1_plus is the smallest entry above kernel_tolerance and
 * lambda_1_minus the largest below -kernel_tolerance; either is absent when
 * no such entry exists.
 */
struct SpectrumReport {
    std::vector<SpectrumEntry> entries;
    std::optional<double> lambda_1_plus;
    std::optional<double> lambda_1_minus;
    double kernel_tolerance = 0.0;

    /// j-th positive (j >= 1) eigenvalue counting multiplicity.
    std::optional<double> lambda_plus(int j) const;
    std::optional<double> lambda_minus(int j) const;
    double max_residual() const;
    /// Groups entries whose values agree within `relative_tolerance`; multiplicities add.
    std::vector<std::pair<double, int>> distinct(double relative_tolerance) const;
};

/// Entries closer than merge_tolerance (relative) are merged. A negative kernel
/// tolerance selects the default 1e-8 times the largest |eigenvalue|.
SpectrumReport aggregate(const std::vector<ModeSpectrum>& per_mode, double kernel_tolerance = -1.0,
                         double merge_tolerance = 1e-9);

}  // namespace confspec
