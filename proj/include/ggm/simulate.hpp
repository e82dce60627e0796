#pragma once

// Synthetic Gaussian data from a precision matrix and Monte Carlo estimates
// of size, power, and the null law of the partial correlation.
//
// Replication k draws from a generator seeded only by (seed, k), and results
// are reduced by integer counts in index order, so any thread count yields
// the same report.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "ggm/ci_tests.hpp"
#include "ggm/distributions.hpp"
#include "ggm/estimators.hpp"
#include "ggm/graph.hpp"
#include "ggm/matrix.hpp"

namespace ggm {

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of substream `index` under master `seed`.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// A positive-definite precision matrix sigma^{kl}.
class PrecisionSpec {
public:
    explicit PrecisionSpec(SymmetricMatrix precision) : precision_(std::move(precision)) {
        require_positive_definite(precision_, "precision matrix");
    }

    static PrecisionSpec identity(std::size_t dim) { return PrecisionSpec(SymmetricMatrix::identity(dim)); }

    /// Unit diagonal with a single nonzero pair set so that rho^{ij} = rho.
    static PrecisionSpec single_edge(std::size_t dim, std::size_t i, std::size_t j, double rho) {
        if (!(std::abs(rho) < 1.0)) throw DomainError("single_edge: |rho| must be < 1");
        return PrecisionSpec(SymmetricMatrix::identity(dim).with_pair(i, j, -rho));
    }

    const SymmetricMatrix& precision() const noexcept { return precision_; }
    std::size_t dim() const noexcept { return precision_.dim(); }

    /// rho^{ij} = -sigma^{ij} / sqrt(sigma^{ii} sigma^{jj}).
    double partial_correlation(std::size_t i, std::size_t j) const {
        detail::check_edge(precision_, i, j);
        return -precision_(i, j) / std::sqrt(precision_(i, i) * precision_(j, j));
    }

    SymmetricMatrix covariance() const { return detail::spd_inverse(precision_); }

private:
    SymmetricMatrix precision_;
};

/// Unit-diagonal, strictly diagonally dominant precision matrix. A random
/// matching of the variables carries off-diagonal entries of magnitude
/// `level`; every other pair gets a smaller random entry, so the largest
/// |rho^{ij}| equals `level` (for N >= 2 and level > 0).
inline PrecisionSpec random_precision_matrix(std::size_t dim, double level, std::uint64_t seed) {
    if (dim < 2) throw DomainError("random_precision_matrix: need N >= 2");
    if (!(level >= 0.0 && level < 1.0)) throw DomainError("random_precision_matrix: level must lie in [0, 1)");
    std::mt19937_64 rng(stream_seed(seed, 0));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<std::size_t> perm(dim);
    for (std::size_t k = 0; k < dim; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::size_t> partner(dim, dim);
    for (std::size_t k = 0; k + 1 < dim; k += 2) {
        partner[perm[k]] = perm[k + 1];
        partner[perm[k + 1]] = perm[k];
    }

    const double extra = dim > 2 ? 0.9 * level * (1.0 - level) / static_cast<double>(dim - 2) : 0.0;
    std::vector<double> p(dim * dim, 0.0);
    for (std::size_t k = 0; k < dim; ++k) {
        p[k * dim + k] = 1.0;
        for (std::size_t l = k + 1; l < dim; ++l) {
            const double u = unit(rng);
            const double v = partner[k] == l ? (u < 0.0 ? -level : level) : extra * u;
            p[k * dim + l] = v;
            p[l * dim + k] = v;
        }
    }
    return PrecisionSpec(SymmetricMatrix(dim, std::move(p)));
}

/// Draws zero-mean Gaussian vectors with covariance inverse(precision),
/// x = L z with L the lower Cholesky factor of the covariance.
class GaussianSampler {
public:
    explicit GaussianSampler(const PrecisionSpec& spec) : dim_(spec.dim()) {
        const auto chol = detail::cholesky(spec.covariance());
        if (chol.failed_pivot) throw NotPositiveDefinite("covariance factorization failed");
        factor_ = chol.lower;
    }

    Dataset sample(std::size_t n, std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> values(n * dim_);
        std::vector<double> z(dim_);
        for (std::size_t t = 0; t < n; ++t) {
            for (double& v : z) v = normal(rng);
            for (std::size_t r = 0; r < dim_; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c <= r; ++c) s += factor_[r * dim_ + c] * z[c];
                values[t * dim_ + r] = s;
            }
        }
        return Dataset(n, dim_, std::move(values));
    }

private:
    std::size_t dim_;
    std::vector<double> factor_;
};

inline Dataset sample_gaussian(const PrecisionSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw DomainError("sample_gaussian: need n >= 2");
    return GaussianSampler(spec).sample(n, seed);
}

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t k = 0; k < sample.size(); ++k) {
        const double f = cdf(sample[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
    }
    return d;
}

/// Runs body(k) for k in [0, count) on up to `threads` workers. The first
/// exception (by replication index) is rethrown.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    if (threads <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::size_t> error_index(threads, count);
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < count; k += threads) {
                    try {
                        body(k);
                    } catch (...) {
                        errors[w] = std::current_exception();
                        error_index[w] = k;
                        return;
                    }
                }
            });
        }
    }
    std::size_t first = count;
    std::exception_ptr err;
    for (unsigned w = 0; w < threads; ++w) {
        if (errors[w] && error_index[w] < first) {
            first = error_index[w];
            err = errors[w];
        }
    }
    if (err) std::rethrow_exception(err);
}

struct MonteCarloConfig {
    std::size_t n = 25;
    std::size_t i = 0;
    std::size_t j = 1;
    double alpha = 0.05;
    std::vector<Method> methods{Method::umpu, Method::partial_corr, Method::fisher};
    std::size_t replications = 20000;
    std::uint64_t seed = 1;
    /// 0 picks the hardware concurrency.
    unsigned threads = 0;
};

struct MethodRate {
    Method method = Method::umpu;
    std::size_t rejections = 0;
    double rejection_rate = 0.0;
    double std_error = 0.0;
};

inline MethodRate make_rate(Method method, std::size_t rejections, std::size_t reps) {
    MethodRate out;
    out.method = method;
    out.rejections = rejections;
    out.rejection_rate = static_cast<double>(rejections) / static_cast<double>(reps);
    out.std_error = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / static_cast<double>(reps));
    return out;
}

struct MonteCarloReport {
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t i = 0;
    std::size_t j = 0;
    double alpha = 0.0;
    /// rho^{ij} of the generating precision matrix.
    double true_partial_correlation = 0.0;
    /// Rate of the first configured method.
    double rejection_rate = 0.0;
    double std_error = 0.0;
    std::vector<MethodRate> methods;
    /// KS distance of (1 + r) / 2 from Be((n-N)/2, (n-N)/2); null runs only.
    std::optional<double> ks_statistic;
    /// Fraction of replications where Fisher and the exact test agree.
    std::optional<double> fisher_exact_agreement;
    /// Rates at the precision matrix with the probed pair zeroed (power runs).
    std::optional<std::vector<MethodRate>> matched_null;

    const MethodRate& rate(Method m) const {
        for (const auto& r : methods) {
            if (r.method == m) return r;
        }
        throw DomainError("method not present in report");
    }
};

namespace detail {

inline MonteCarloReport run_monte_carlo(const PrecisionSpec& spec, const MonteCarloConfig& cfg) {
    require_alpha(cfg.alpha);
    if (cfg.methods.empty()) throw DomainError("Monte Carlo run needs at least one method");
    if (cfg.replications < 1000) throw DomainError("Monte Carlo run needs at least 1000 replications");
    check_edge(spec.precision(), cfg.i, cfg.j);
    ggm::require_sample(static_cast<std::int64_t>(cfg.n), static_cast<std::int64_t>(spec.dim()));

    const GaussianSampler sampler(spec);
    const std::size_t reps = cfg.replications;
    const std::size_t nm = cfg.methods.size();
    const auto n = static_cast<std::int64_t>(cfg.n);
    std::vector<unsigned char> rejected(reps * nm, 0);
    std::vector<double> r_values(reps, 0.0);

    parallel_for(reps, cfg.threads, [&](std::size_t k) {
        const Dataset d = sampler.sample(cfg.n, stream_seed(cfg.seed, k));
        const SymmetricMatrix s = sample_covariance(d);
        r_values[k] = sample_partial_correlation(s, cfg.i, cfg.j);
        for (std::size_t m = 0; m < nm; ++m) {
            rejected[k * nm + m] = run_test(cfg.methods[m], s, cfg.i, cfg.j, n, cfg.alpha).reject ? 1 : 0;
        }
    });

    MonteCarloReport rep;
    rep.replications = reps;
    rep.seed = cfg.seed;
    rep.n = cfg.n;
    rep.dim = spec.dim();
    rep.i = cfg.i;
    rep.j = cfg.j;
    rep.alpha = cfg.alpha;
    rep.true_partial_correlation = spec.partial_correlation(cfg.i, cfg.j);
    for (std::size_t m = 0; m < nm; ++m) {
        std::size_t count = 0;
        for (std::size_t k = 0; k < reps; ++k) count += rejected[k * nm + m];
        rep.methods.push_back(make_rate(cfg.methods[m], count, reps));
    }
    rep.rejection_rate = rep.methods.front().rejection_rate;
    rep.std_error = rep.methods.front().std_error;

    const auto fisher = std::find(cfg.methods.begin(), cfg.methods.end(), Method::fisher);
    auto exact = std::find(cfg.methods.begin(), cfg.methods.end(), Method::partial_corr);
    if (exact == cfg.methods.end()) exact = std::find(cfg.methods.begin(), cfg.methods.end(), Method::umpu);
    if (fisher != cfg.methods.end() && exact != cfg.methods.end()) {
        const auto f = static_cast<std::size_t>(fisher - cfg.methods.begin());
        const auto e = static_cast<std::size_t>(exact - cfg.methods.begin());
        std::size_t agree = 0;
        for (std::size_t k = 0; k < reps; ++k) agree += rejected[k * nm + f] == rejected[k * nm + e];
        rep.fisher_exact_agreement = static_cast<double>(agree) / static_cast<double>(reps);
    }

    if (rep.true_partial_correlation == 0.0) {
        const double m = null_shape(n, static_cast<std::int64_t>(spec.dim()));
        std::vector<double> u(reps);
        for (std::size_t k = 0; k < reps; ++k) u[k] = 0.5 * (1.0 + r_values[k]);
        rep.ks_statistic = ggm::ks_statistic(std::move(u), [m](double x) { return reg_inc_beta(x, m, m); });
    }
    return rep;
}

}  // namespace detail

/// Empirical size at a pair with rho^{ij} = 0, plus the KS distance of the
/// transformed partial correlations from their exact beta law.
inline MonteCarloReport estimate_size(const PrecisionSpec& spec, const MonteCarloConfig& cfg) {
    if (spec.precision().at(cfg.i, cfg.j) != 0.0) {
        throw DomainError("estimate_size: the probed pair must have sigma^{ij} = 0");
    }
    return detail::run_monte_carlo(spec, cfg);
}

/// Empirical power at the probed pair. When zeroing sigma^{ij} keeps the
/// precision matrix positive definite, the size at that matched null is
/// reported alongside, using the same seed.
inline MonteCarloReport estimate_power(const PrecisionSpec& spec, const MonteCarloConfig& cfg) {
    MonteCarloReport rep = detail::run_monte_carlo(spec, cfg);
    if (spec.precision()(cfg.i, cfg.j) != 0.0) {
        const SymmetricMatrix null_precision = spec.precision().with_pair(cfg.i, cfg.j, 0.0);
        if (is_positive_definite(null_precision)) {
            rep.matched_null = detail::run_monte_carlo(PrecisionSpec(null_precision), cfg).methods;
        }
    } else {
        rep.matched_null = rep.methods;
    }
    return rep;
}

/// One random problem for the equivalence check.
struct EquivalenceInstance {
    SymmetricMatrix covariance;
    std::int64_t n = 0;
    double alpha = 0.05;
};

/// N in {3..6}, n in {N+2..50}, alpha in {0.1, 0.05, 0.01}; the covariance
/// is the sample covariance of Gaussian data from a random precision matrix.
inline EquivalenceInstance random_equivalence_instance(std::uint64_t seed, std::uint64_t index) {
    std::mt19937_64 rng(stream_seed(seed, index));
    const auto dim = std::uniform_int_distribution<std::size_t>(3, 6)(rng);
    const auto n = std::uniform_int_distribution<std::size_t>(dim + 2, 50)(rng);
    static constexpr double alphas[] = {0.1, 0.05, 0.01};
    const double alpha = alphas[std::uniform_int_distribution<int>(0, 2)(rng)];
    const double level = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    const PrecisionSpec spec = random_precision_matrix(dim, level, rng());
    const Dataset d = sample_gaussian(spec, n, rng());
    return {sample_covariance(d), static_cast<std::int64_t>(n), alpha};
}

struct EquivalenceSummary {
    std::size_t instances = 0;
    std::size_t edges_checked = 0;
    std::size_t disagreements = 0;
    std::size_t rejections = 0;
    double max_statistic_gap = 0.0;
    double max_magnitude_gap = 0.0;
    double max_threshold_gap = 0.0;

    bool passed(double tolerance = 1e-9) const noexcept {
        return disagreements == 0 && max_statistic_gap <= tolerance && max_threshold_gap <= 1e-10;
    }
};

inline void accumulate(EquivalenceSummary& sum, const EquivalenceReport& rep) {
    ++sum.edges_checked;
    if (!rep.same_decision) ++sum.disagreements;
    if (rep.partial_corr.reject) ++sum.rejections;
    sum.max_statistic_gap = std::max(sum.max_statistic_gap, rep.statistic_gap);
    sum.max_magnitude_gap = std::max(sum.max_magnitude_gap, rep.magnitude_gap);
    sum.max_threshold_gap = std::max(sum.max_threshold_gap, rep.threshold_gap);
}

/// Checks every edge of `count` random instances.
inline EquivalenceSummary run_equivalence_suite(std::size_t count, std::uint64_t seed,
                                                bool negate_umpu_statistic = false, unsigned threads = 0) {
    std::vector<EquivalenceSummary> per(count);
    parallel_for(count, threads, [&](std::size_t k) {
        const EquivalenceInstance inst = random_equivalence_instance(seed, k);
        for (const auto& [i, j] : all_edges(inst.covariance.dim())) {
            accumulate(per[k], verify_equivalence(inst.covariance, i, j, inst.n, inst.alpha,
                                                  negate_umpu_statistic));
        }
    });
    EquivalenceSummary total;
    total.instances = count;
    for (const auto& p : per) {
        total.edges_checked += p.edges_checked;
        total.disagreements += p.disagreements;
        total.rejections += p.rejections;
        total.max_statistic_gap = std::max(total.max_statistic_gap, p.max_statistic_gap);
        total.max_magnitude_gap = std::max(total.max_magnitude_gap, p.max_magnitude_gap);
        total.max_threshold_gap = std::max(total.max_threshold_gap, p.max_threshold_gap);
    }
    return total;
}

}  // namespace ggm
