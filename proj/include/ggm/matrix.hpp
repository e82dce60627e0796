#pragma once

// Dense symmetric matrices and the determinant/cofactor algebra used by the
// conditional-independence tests. Everything here is O(N^3) elimination;
// matrices are small (tens of variables), so no blocking or BLAS.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ggm/errors.hpp"

namespace ggm {

/// Square matrix whose symmetry and finiteness are checked once at
/// construction. Stored row-major, immutable afterwards.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    explicit SymmetricMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

    SymmetricMatrix(std::size_t dim, std::vector<double> entries)
        : dim_(dim), data_(std::move(entries)) {
        if (data_.size() != dim_ * dim_) {
            throw DomainError("SymmetricMatrix: expected " + std::to_string(dim_ * dim_) +
                              " entries, got " + std::to_string(data_.size()));
        }
        validate();
    }

    SymmetricMatrix(std::initializer_list<std::initializer_list<double>> rows)
        : dim_(rows.size()) {
        data_.reserve(dim_ * dim_);
        for (const auto& row : rows) {
            if (row.size() != dim_) {
                throw DomainError("SymmetricMatrix: rows must all have length " +
                                  std::to_string(dim_));
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
        validate();
    }

    static SymmetricMatrix identity(std::size_t dim) {
        SymmetricMatrix m(dim);
        for (std::size_t k = 0; k < dim; ++k) m.data_[k * dim + k] = 1.0;
        return m;
    }

    static SymmetricMatrix diagonal(std::span<const double> diag) {
        SymmetricMatrix m(diag.size());
        for (std::size_t k = 0; k < diag.size(); ++k) {
            m.data_[k * diag.size() + k] = diag[k];
        }
        m.validate();
        return m;
    }

    std::size_t dim() const noexcept { return dim_; }

    double operator()(std::size_t k, std::size_t l) const noexcept {
        return data_[k * dim_ + l];
    }

    double at(std::size_t k, std::size_t l) const {
        if (k >= dim_ || l >= dim_) {
            throw std::out_of_range("SymmetricMatrix::at: index out of range");
        }
        return (*this)(k, l);
    }

    std::span<const double> entries() const noexcept { return data_; }

    /// Copy with the symmetric pair (i, j), (j, i) replaced by `x`.
    SymmetricMatrix with_pair(std::size_t i, std::size_t j, double x) const {
        check_index(i);
        check_index(j);
        if (!std::isfinite(x)) throw DomainError("SymmetricMatrix::with_pair: non-finite value");
        SymmetricMatrix m = *this;
        m.data_[i * dim_ + j] = x;
        m.data_[j * dim_ + i] = x;
        return m;
    }

    /// Copy with rows and columns reordered: result(k, l) = this(perm[k], perm[l]).
    SymmetricMatrix permuted(std::span<const std::size_t> perm) const {
        if (perm.size() != dim_) throw DomainError("SymmetricMatrix::permuted: size mismatch");
        SymmetricMatrix m(dim_);
        for (std::size_t k = 0; k < dim_; ++k) {
            for (std::size_t l = 0; l < dim_; ++l) {
                m.data_[k * dim_ + l] = (*this)(perm[k], perm[l]);
            }
        }
        return m;
    }

    /// D * M * D for a diagonal D given by `scale`.
    SymmetricMatrix congruence_scaled(std::span<const double> scale) const {
        if (scale.size() != dim_) throw DomainError("SymmetricMatrix::congruence_scaled: size mismatch");
        SymmetricMatrix m = *this;
        for (std::size_t k = 0; k < dim_; ++k) {
            for (std::size_t l = 0; l < dim_; ++l) m.data_[k * dim_ + l] *= scale[k] * scale[l];
        }
        return m;
    }

    SymmetricMatrix scaled(double factor) const {
        SymmetricMatrix m = *this;
        for (double& v : m.data_) v *= factor;
        m.validate();
        return m;
    }

    double max_abs() const noexcept {
        double best = 0.0;
        for (double v : data_) best = std::max(best, std::abs(v));
        return best;
    }

    double trace() const noexcept {
        double t = 0.0;
        for (std::size_t k = 0; k < dim_; ++k) t += (*this)(k, k);
        return t;
    }

    void check_index(std::size_t k) const {
        if (k >= dim_) {
            throw std::out_of_range("index " + std::to_string(k) + " out of range for dimension " +
                                    std::to_string(dim_));
        }
    }

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    void validate() const {
        for (std::size_t k = 0; k < dim_; ++k) {
            for (std::size_t l = 0; l < dim_; ++l) {
                const double v = data_[k * dim_ + l];
                if (!std::isfinite(v)) {
                    throw DomainError("SymmetricMatrix: non-finite entry at (" + std::to_string(k) +
                                      ", " + std::to_string(l) + ")");
                }
                if (l > k && v != data_[l * dim_ + k]) {
                    throw DomainError("SymmetricMatrix: entries (" + std::to_string(k) + ", " +
                                      std::to_string(l) + ") and (" + std::to_string(l) + ", " +
                                      std::to_string(k) + ") differ");
                }
            }
        }
    }

    std::size_t dim_ = 0;
    std::vector<double> data_;
};

/// det M(x) = -a x^2 + b x + c, where M(x) has the (i, j) pair set to x.
struct QuadCoeffs {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;

    double operator()(double x) const noexcept { return (-a * x + b) * x + c; }
    double discriminant() const noexcept { return b * b + 4.0 * a * c; }
};

/// Open interval of edge values for which M(x) stays positive definite.
struct PdInterval {
    double x1 = 0.0;
    double x2 = 0.0;

    double width() const noexcept { return x2 - x1; }
};

namespace detail {

/// Determinant of a general row-major n x n matrix by Gaussian elimination
/// with partial pivoting. Consumes its argument as scratch.
inline double det_dense(std::vector<double> a, std::size_t n) {
    double det = 1.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col * n + col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double v = std::abs(a[r * n + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best == 0.0) return 0.0;
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            det = -det;
        }
        const double p = a[col * n + col];
        det *= p;
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / p;
            if (f == 0.0) continue;
            for (std::size_t k = col + 1; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
        }
    }
    return det;
}

/// Entries of M with the listed rows and columns removed (row-major).
inline std::vector<double> reduced(const SymmetricMatrix& m, std::initializer_list<std::size_t> rows,
                                   std::initializer_list<std::size_t> cols) {
    const auto skip = [](std::initializer_list<std::size_t> set, std::size_t k) {
        return std::find(set.begin(), set.end(), k) != set.end();
    };
    std::vector<double> out;
    const std::size_t n = m.dim();
    out.reserve(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        if (skip(rows, r)) continue;
        for (std::size_t c = 0; c < n; ++c) {
            if (!skip(cols, c)) out.push_back(m(r, c));
        }
    }
    return out;
}

/// Lower Cholesky factor, or the index of the first pivot that is not
/// strictly above `1e-12 * trace`.
struct CholeskyResult {
    std::vector<double> lower;
    std::optional<std::size_t> failed_pivot;
    double failed_value = 0.0;
};

inline CholeskyResult cholesky(const SymmetricMatrix& m) {
    const std::size_t n = m.dim();
    CholeskyResult out;
    out.lower.assign(n * n, 0.0);
    const double threshold = 1e-12 * std::max(m.trace(), 0.0);
    auto& l = out.lower;
    for (std::size_t k = 0; k < n; ++k) {
        double d = m(k, k);
        for (std::size_t p = 0; p < k; ++p) d -= l[k * n + p] * l[k * n + p];
        if (!(d > threshold) || !(d > 0.0)) {
            out.failed_pivot = k;
            out.failed_value = d;
            return out;
        }
        const double root = std::sqrt(d);
        l[k * n + k] = root;
        for (std::size_t r = k + 1; r < n; ++r) {
            double s = m(r, k);
            for (std::size_t p = 0; p < k; ++p) s -= l[r * n + p] * l[k * n + p];
            l[r * n + k] = s / root;
        }
    }
    return out;
}

/// Inverse of a positive-definite matrix through Cholesky solves against the
/// identity columns.
inline SymmetricMatrix spd_inverse(const SymmetricMatrix& m) {
    const std::size_t n = m.dim();
    const CholeskyResult chol = cholesky(m);
    if (chol.failed_pivot) {
        throw NotPositiveDefinite("pivot " + std::to_string(*chol.failed_pivot) + " is " +
                                  std::to_string(chol.failed_value));
    }
    const auto& l = chol.lower;
    std::vector<double> inv(n * n, 0.0);
    std::vector<double> y(n);
    for (std::size_t col = 0; col < n; ++col) {
        for (std::size_t r = 0; r < n; ++r) {
            double s = (r == col) ? 1.0 : 0.0;
            for (std::size_t p = 0; p < r; ++p) s -= l[r * n + p] * y[p];
            y[r] = s / l[r * n + r];
        }
        for (std::size_t r = n; r-- > 0;) {
            double s = y[r];
            for (std::size_t p = r + 1; p < n; ++p) s -= l[p * n + r] * inv[p * n + col];
            inv[r * n + col] = s / l[r * n + r];
        }
    }
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r + 1; c < n; ++c) {
            const double avg = 0.5 * (inv[r * n + c] + inv[c * n + r]);
            inv[r * n + c] = avg;
            inv[c * n + r] = avg;
        }
    }
    return SymmetricMatrix(n, std::move(inv));
}

inline void check_edge(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    m.check_index(i);
    m.check_index(j);
    if (i == j) throw DomainError("edge endpoints must differ, got (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
}

}  // namespace detail

/// True iff every Cholesky pivot is strictly above 1e-12 * trace(M).
inline bool is_positive_definite(const SymmetricMatrix& m) {
    if (m.dim() == 0) return false;
    return !detail::cholesky(m).failed_pivot.has_value();
}

/// Throws NotPositiveDefinite naming the first failing pivot.
inline void require_positive_definite(const SymmetricMatrix& m, const std::string& what = "matrix") {
    if (m.dim() == 0) throw NotPositiveDefinite(what + " is empty");
    const auto chol = detail::cholesky(m);
    if (chol.failed_pivot) {
        throw NotPositiveDefinite(what + ": Cholesky pivot " + std::to_string(*chol.failed_pivot) +
                                  " is " + std::to_string(chol.failed_value));
    }
}

inline double determinant(const SymmetricMatrix& m) {
    return detail::det_dense({m.entries().begin(), m.entries().end()}, m.dim());
}

/// (-1)^(k+l) times the minor obtained by deleting row k and column l.
inline double cofactor(const SymmetricMatrix& m, std::size_t k, std::size_t l) {
    m.check_index(k);
    m.check_index(l);
    const double minor = detail::det_dense(detail::reduced(m, {k}, {l}), m.dim() - 1);
    return ((k + l) % 2 == 0) ? minor : -minor;
}

/// Cofactor of the 2x2 block on rows and columns {i, j}: the determinant of M
/// with both rows and both columns removed.
inline double pair_cofactor(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    detail::check_edge(m, i, j);
    return detail::det_dense(detail::reduced(m, {i, j}, {i, j}), m.dim() - 2);
}

/// Coefficients of det M(x) as a quadratic in the (i, j) entry, recovered by
/// interpolating the determinant at x = 0 and x = +-(1 + max|m_kl|).
inline QuadCoeffs quadratic_decomposition(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    detail::check_edge(m, i, j);
    if (i > j) std::swap(i, j);
    const double h = 1.0 + m.max_abs();
    const double d0 = determinant(m.with_pair(i, j, 0.0));
    const double dp = determinant(m.with_pair(i, j, h));
    const double dm = determinant(m.with_pair(i, j, -h));
    QuadCoeffs q;
    q.i = i;
    q.j = j;
    q.c = d0;
    q.b = (dp - dm) / (2.0 * h);
    q.a = (2.0 * d0 - dp - dm) / (2.0 * h * h);
    return q;
}

/// Roots x1 < x2 of -a x^2 + b x + c = 0; det M(x) > 0 strictly between them.
inline PdInterval pd_interval(const QuadCoeffs& q) {
    const double disc = q.discriminant();
    if (!(q.a > 0.0) || !(disc > 0.0)) {
        throw DegenerateEdge("edge (" + std::to_string(q.i) + ", " + std::to_string(q.j) +
                             ") has a = " + std::to_string(q.a) + ", b^2 + 4ac = " +
                             std::to_string(disc));
    }
    const double root = std::sqrt(disc);
    // Vieta's product x1 * x2 = -c / a avoids cancellation in the smaller root.
    PdInterval out;
    if (q.b >= 0.0) {
        out.x2 = (q.b + root) / (2.0 * q.a);
        out.x1 = -2.0 * q.c / (q.b + root);
    } else {
        out.x1 = (q.b - root) / (2.0 * q.a);
        out.x2 = -2.0 * q.c / (q.b - root);
    }
    return out;
}

/// Standardized edge value (a x - b/2) / sqrt(b^2/4 + a c): -1 at x1, +1 at x2.
inline double standardized_edge_value(const QuadCoeffs& q, double x) {
    const double norm2 = 0.25 * q.b * q.b + q.a * q.c;
    if (!(q.a > 0.0) || !(norm2 > 0.0)) {
        throw DegenerateEdge("edge (" + std::to_string(q.i) + ", " + std::to_string(q.j) +
                             ") has no positive-definite completion");
    }
    return (q.a * x - 0.5 * q.b) / std::sqrt(norm2);
}

/// Cofactor ratio -M^{ij} / sqrt(M^{ii} M^{jj}). No definiteness check, so it
/// can be evaluated on the boundary of the positive-definite cone.
inline double partial_correlation(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    detail::check_edge(m, i, j);
    const double denom = cofactor(m, i, i) * cofactor(m, j, j);
    if (!(denom > 0.0)) {
        throw DegenerateEdge("cofactor product for (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") is " + std::to_string(denom));
    }
    return -cofactor(m, i, j) / std::sqrt(denom);
}

/// max over five probe values x of |cofactor(M(x), i, j) - (-a x + b/2)|.
inline double lemma_residual(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    const QuadCoeffs q = quadratic_decomposition(m, i, j);
    const double h = 1.0 + m.max_abs();
    const double probes[] = {-h, -0.5 * h, 0.0, m(i, j), 0.75 * h};
    double worst = 0.0;
    for (double x : probes) {
        const double lhs = cofactor(m.with_pair(i, j, x), i, j);
        const double rhs = -q.a * x + 0.5 * q.b;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

/// |C_pair det M - (M^{ii} M^{jj} - (M^{ij})^2)|.
inline double sylvester_residual(const SymmetricMatrix& m, std::size_t i, std::size_t j) {
    const double lhs = pair_cofactor(m, i, j) * determinant(m);
    const double cij = cofactor(m, i, j);
    const double rhs = cofactor(m, i, i) * cofactor(m, j, j) - cij * cij;
    return std::abs(lhs - rhs);
}

}  // namespace ggm
