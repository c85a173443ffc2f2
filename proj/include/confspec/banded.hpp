#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "confspec/errors.hpp"

namespace confspec {

/**
 * Symmetric banded matrix in lower-band storage.
 *
 * Entry (i, j) with i >= j and i - j <= bandwidth lives at band(i - j, j).
 * Entries outside the band are exactly zero. Writing through coeffRef keeps
 * the matrix symmetric by construction.
 */
template <typename Scalar>
class BandedSymmetric {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    BandedSymmetric() = default;
    BandedSymmetric(Eigen::Index size, Eigen::Index bandwidth)
        : band_(Dense::Zero(bandwidth + 1, size)) {
        if (size < 1 || bandwidth < 0) throw std::invalid_argument("invalid banded matrix shape");
    }

    static BandedSymmetric diagonal(const Vector& d) {
        BandedSymmetric m(d.size(), 0);
        m.band_.row(0) = d.transpose();
        return m;
    }

    Eigen::Index size() const { return band_.cols(); }
    Eigen::Index bandwidth() const { return band_.rows() - 1; }

    Scalar operator()(Eigen::Index i, Eigen::Index j) const {
        if (i < j) std::swap(i, j);
        return (i - j > bandwidth()) ? Scalar(0) : band_(i - j, j);
    }

    Scalar& coeffRef(Eigen::Index i, Eigen::Index j) {
        if (i < j) std::swap(i, j);
        if (i - j > bandwidth()) throw std::out_of_range("entry outside band");
        return band_(i - j, j);
    }

    const Dense& band() const { return band_; }
    Dense& band() { return band_; }

    Dense toDense() const {
        const Eigen::Index m = size();
        Dense d = Dense::Zero(m, m);
        for (Eigen::Index j = 0; j < m; ++j) {
            for (Eigen::Index k = 0; k <= bandwidth() && j + k < m; ++k) {
                d(j + k, j) = band_(k, j);
                d(j, j + k) = band_(k, j);
            }
        }
        return d;
    }

    /// Copy with a larger bandwidth (zero padded).
    BandedSymmetric widened(Eigen::Index bandwidth) const {
        BandedSymmetric out(size(), std::max(bandwidth, this->bandwidth()));
        out.band_.topRows(band_.rows()) = band_;
        return out;
    }

    Scalar maxAbs() const { return band_.cwiseAbs().maxCoeff(); }

    template <typename Derived>
    Vector operator*(const Eigen::MatrixBase<Derived>& x) const {
        const Eigen::Index m = size();
        if (x.size() != m) throw std::invalid_argument("dimension mismatch in banded product");
        Vector y = band_.row(0).transpose().cwiseProduct(x);
        for (Eigen::Index k = 1; k <= bandwidth(); ++k) {
            for (Eigen::Index j = 0; j + k < m; ++j) {
                const Scalar a = band_(k, j);
                y(j + k) += a * x(j);
                y(j) += a * x(j + k);
            }
        }
        return y;
    }

    BandedSymmetric& operator*=(Scalar s) {
        band_ *= s;
        return *this;
    }

    friend BandedSymmetric operator*(Scalar s, BandedSymmetric a) { return a *= s; }

    friend BandedSymmetric operator+(const BandedSymmetric& a, const BandedSymmetric& b) {
        if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch in banded sum");
        BandedSymmetric out = a.widened(b.bandwidth());
        out.band_.topRows(b.band_.rows()) += b.band_;
        return out;
    }

    friend BandedSymmetric operator-(const BandedSymmetric& a, const BandedSymmetric& b) {
        return a + Scalar(-1) * b;
    }

    bool operator==(const BandedSymmetric& o) const { return band_ == o.band_; }

private:
    Dense band_;
};

/**
 * LU factorization with partial pivoting of a symmetric banded matrix
 * treated as a general band matrix (upper bandwidth grows to 2b).
 *
 * Multipliers are stored per elimination step and replayed in the same
 * order during the solve.
 */
template <typename Scalar>
class BandedLU {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    /// Throws FactorizationError when a pivot is below `pivot_tolerance * max|A|`.
    explicit BandedLU(const BandedSymmetric<Scalar>& a, Scalar pivot_tolerance = Scalar(0))
        : m_(a.size()), b_(a.bandwidth()), width_(3 * b_ + 1),
          rows_(static_cast<std::size_t>(m_ * width_), Scalar(0)),
          lower_(static_cast<std::size_t>(m_ * std::max<Eigen::Index>(b_, 1)), Scalar(0)),
          pivots_(static_cast<std::size_t>(m_)) {
        for (Eigen::Index i = 0; i < m_; ++i) {
            for (Eigen::Index j = std::max<Eigen::Index>(0, i - b_); j <= std::min(m_ - 1, i + b_); ++j) {
                at(i, j) = a(i, j);
            }
        }
        const Scalar threshold = pivot_tolerance * a.maxAbs();
        for (Eigen::Index k = 0; k < m_; ++k) {
            const Eigen::Index last = std::min(m_ - 1, k + b_);
            Eigen::Index p = k;
            for (Eigen::Index i = k + 1; i <= last; ++i) {
                if (std::abs(at(i, k)) > std::abs(at(p, k))) p = i;
            }
            pivots_[static_cast<std::size_t>(k)] = p;
            const Eigen::Index col_end = std::min(m_ - 1, k + 2 * b_);
            if (p != k) {
                for (Eigen::Index j = k; j <= col_end; ++j) std::swap(at(k, j), at(p, j));
            }
            const Scalar pivot = at(k, k);
            if (!(std::abs(pivot) > threshold) || !std::isfinite(pivot)) {
                throw FactorizationError("singular banded matrix", static_cast<std::size_t>(k));
            }
            for (Eigen::Index i = k + 1; i <= last; ++i) {
                const Scalar l = at(i, k) / pivot;
                lower_[static_cast<std::size_t>(k * b_ + (i - k - 1))] = l;
                at(i, k) = Scalar(0);
                if (l == Scalar(0)) continue;
                for (Eigen::Index j = k + 1; j <= col_end; ++j) at(i, j) -= l * at(k, j);
            }
        }
    }

    template <typename Derived>
    Vector solve(const Eigen::MatrixBase<Derived>& rhs) const {
        Vector y = rhs;
        for (Eigen::Index k = 0; k < m_; ++k) {
            const Eigen::Index p = pivots_[static_cast<std::size_t>(k)];
            if (p != k) std::swap(y(k), y(p));
            const Eigen::Index last = std::min(m_ - 1, k + b_);
            for (Eigen::Index i = k + 1; i <= last; ++i) {
                y(i) -= lower_[static_cast<std::size_t>(k * b_ + (i - k - 1))] * y(k);
            }
        }
        for (Eigen::Index k = m_ - 1; k >= 0; --k) {
            const Eigen::Index col_end = std::min(m_ - 1, k + 2 * b_);
            Scalar s = y(k);
            for (Eigen::Index j = k + 1; j <= col_end; ++j) s -= at(k, j) * y(j);
            y(k) = s / at(k, k);
        }
        return y;
    }

private:
    Scalar& at(Eigen::Index i, Eigen::Index j) {
        return rows_[static_cast<std::size_t>(i * width_ + (j - i + b_))];
    }
    const Scalar& at(Eigen::Index i, Eigen::Index j) const {
        return rows_[static_cast<std::size_t>(i * width_ + (j - i + b_))];
    }

    Eigen::Index m_, b_, width_;
    std::vector<Scalar> rows_;    // row i holds columns [i - b, i + 2b]
    std::vector<Scalar> lower_;   // multipliers of step k for rows k+1..k+b
    std::vector<Eigen::Index> pivots_;
};

/// Banded Cholesky factor B = L L^T; L shares the bandwidth of B.
template <typename Scalar>
class BandedCholesky {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    explicit BandedCholesky(const BandedSymmetric<Scalar>& a) : l_(a.size(), a.bandwidth()) {
        const Eigen::Index m = a.size();
        const Eigen::Index b = a.bandwidth();
        for (Eigen::Index j = 0; j < m; ++j) {
            Scalar d = a(j, j);
            for (Eigen::Index k = std::max<Eigen::Index>(0, j - b); k < j; ++k) d -= l(j, k) * l(j, k);
            if (!(d > Scalar(0)) || !std::isfinite(d)) {
                throw FactorizationError("matrix not positive definite", static_cast<std::size_t>(j));
            }
            const Scalar djj = std::sqrt(d);
            l_.coeffRef(j, j) = djj;
            for (Eigen::Index i = j + 1; i <= std::min(m - 1, j + b); ++i) {
                Scalar s = a(i, j);
                for (Eigen::Index k = std::max<Eigen::Index>(0, i - b); k < j; ++k) s -= l(i, k) * l(j, k);
                l_.coeffRef(i, j) = s / djj;
            }
        }
    }

    /// Lower-triangular factor; only entries with i >= j are meaningful.
    Scalar l(Eigen::Index i, Eigen::Index j) const { return l_.band()(i - j, j); }

    /// Solves L y = rhs.
    template <typename Derived>
    Vector solveLower(const Eigen::MatrixBase<Derived>& rhs) const {
        const Eigen::Index m = l_.size();
        const Eigen::Index b = l_.bandwidth();
        Vector y = rhs;
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index k = std::max<Eigen::Index>(0, i - b); k < i; ++k) y(i) -= l(i, k) * y(k);
            y(i) /= l(i, i);
        }
        return y;
    }

    /// Solves L^T y = rhs.
    template <typename Derived>
    Vector solveUpper(const Eigen::MatrixBase<Derived>& rhs) const {
        const Eigen::Index m = l_.size();
        const Eigen::Index b = l_.bandwidth();
        Vector y = rhs;
        for (Eigen::Index i = m - 1; i >= 0; --i) {
            for (Eigen::Index k = i + 1; k <= std::min(m - 1, i + b); ++k) y(i) -= l(k, i) * y(k);
            y(i) /= l(i, i);
        }
        return y;
    }

private:
    BandedSymmetric<Scalar> l_;
};

}  // namespace confspec
