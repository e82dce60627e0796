#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ggm/errors.hpp"
#include "ggm/matrix.hpp"

namespace ggm {

/// n observations of N variables, row-major, with unique variable names.
class Dataset {
public:
    Dataset(std::size_t n, std::size_t dim, std::vector<double> values,
            std::vector<std::string> names = {})
        : n_(n), dim_(dim), values_(std::move(values)), names_(std::move(names)) {
        if (n_ < 2) throw DomainError("Dataset: need at least 2 observations, got " + std::to_string(n_));
        if (dim_ < 1) throw DomainError("Dataset: need at least one variable");
        if (values_.size() != n_ * dim_) {
            throw DomainError("Dataset: expected " + std::to_string(n_ * dim_) + " values, got " +
                              std::to_string(values_.size()));
        }
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!std::isfinite(values_[k])) {
                throw DomainError("Dataset: non-finite value at row " + std::to_string(k / dim_) +
                                  ", column " + std::to_string(k % dim_));
            }
        }
        if (names_.empty()) {
            for (std::size_t k = 0; k < dim_; ++k) names_.push_back("X" + std::to_string(k + 1));
        }
        if (names_.size() != dim_) throw DomainError("Dataset: name count does not match column count");
        std::set<std::string> seen;
        for (const auto& name : names_) {
            if (!seen.insert(name).second) throw DomainError("Dataset: duplicate variable name '" + name + "'");
        }
    }

    std::size_t n() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t t, std::size_t k) const noexcept { return values_[t * dim_ + k]; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Columns reordered so that new column k is old column perm[k].
    Dataset permuted(const std::vector<std::size_t>& perm) const {
        std::vector<double> v(values_.size());
        std::vector<std::string> names(dim_);
        for (std::size_t k = 0; k < dim_; ++k) {
            names[k] = names_.at(perm.at(k));
            for (std::size_t t = 0; t < n_; ++t) v[t * dim_ + k] = values_[t * dim_ + perm[k]];
        }
        return Dataset(n_, dim_, std::move(v), std::move(names));
    }

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

/// Sample covariance with the 1/n normalization.
inline SymmetricMatrix sample_covariance(const Dataset& d) {
    const std::size_t n = d.n();
    const std::size_t dim = d.dim();
    std::vector<double> mean(dim, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < dim; ++k) mean[k] += d(t, k);
    }
    for (double& m : mean) m /= static_cast<double>(n);

    std::vector<double> s(dim * dim, 0.0);
    std::vector<double> dev(dim);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t k = 0; k < dim; ++k) dev[k] = d(t, k) - mean[k];
        for (std::size_t k = 0; k < dim; ++k) {
            for (std::size_t l = k; l < dim; ++l) s[k * dim + l] += dev[k] * dev[l];
        }
    }
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t l = k; l < dim; ++l) {
            s[k * dim + l] /= static_cast<double>(n);
            s[l * dim + k] = s[k * dim + l];
        }
    }
    return SymmetricMatrix(dim, std::move(s));
}

/// Sample partial correlation of variables i and j given all others,
/// -S^{ij} / sqrt(S^{ii} S^{jj}) in cofactors of S.
inline double sample_partial_correlation(const SymmetricMatrix& s, std::size_t i, std::size_t j) {
    detail::check_edge(s, i, j);
    require_positive_definite(s, "sample covariance");
    const double r = partial_correlation(s, i, j);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace ggm
