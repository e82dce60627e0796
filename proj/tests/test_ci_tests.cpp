#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ggm/ci_tests.hpp"
#include "ggm/simulate.hpp"
#include "oracles.hpp"

using ggm::Method;
using ggm::SymmetricMatrix;

namespace {

constexpr Method kAll[] = {Method::umpu, Method::partial_corr, Method::fisher};

}  // namespace

TEST(TestConfig, AlphaMustBeInsideUnitInterval) {
    EXPECT_THROW(ggm::TestConfig::make(0.0, Method::umpu), ggm::DomainError);
    EXPECT_THROW(ggm::TestConfig::make(1.0, Method::umpu), ggm::DomainError);
    EXPECT_NO_THROW(ggm::TestConfig::make(0.5, Method::fisher));
    EXPECT_EQ(ggm::parse_method("partial-corr"), Method::partial_corr);
    EXPECT_EQ(ggm::parse_method("partial_corr"), Method::partial_corr);
    EXPECT_THROW(ggm::parse_method("pearson"), ggm::DomainError);
}

TEST(UmpuTest, IdentityCovarianceAccepts) {
    const auto s = SymmetricMatrix::identity(4);
    for (double alpha : {0.01, 0.05, 0.3}) {
        const auto d = ggm::umpu_test(s, 1, 3, 10, alpha);
        EXPECT_NEAR(d.statistic, 0.0, 1e-15);
        EXPECT_FALSE(d.reject);
        EXPECT_NEAR(d.p_value, 1.0, 1e-12);
    }
}

TEST(UmpuTest, UniformNullLawThreshold) {
    // n - N = 2: q = 0.025, acceptance region (-0.95, 0.95).
    const SymmetricMatrix s{{1, 0.94, 0}, {0.94, 1, 0}, {0, 0, 1}};
    const auto d = ggm::umpu_test(s, 0, 1, 5, 0.05);
    EXPECT_NEAR(d.upper, 0.95, 1e-12);
    EXPECT_NEAR(d.lower, -0.95, 1e-12);
    EXPECT_FALSE(d.reject);
    const auto d2 = ggm::umpu_test(s.with_pair(0, 1, 0.96), 0, 1, 5, 0.05);
    EXPECT_TRUE(d2.reject);
}

TEST(UmpuTest, WorkedExample) {
    const SymmetricMatrix s{{2, 1.9, 1}, {1.9, 2, 1}, {1, 1, 2}};
    const auto detail = ggm::umpu_detail(s, 0, 1, 10, 0.05);
    EXPECT_NEAR(detail.coeffs.a, 2.0, 1e-12);
    EXPECT_NEAR(detail.coeffs.b, 2.0, 1e-12);
    EXPECT_NEAR(detail.coeffs.c, 4.0, 1e-12);
    EXPECT_NEAR(detail.statistic, 2.8 / 3.0, 1e-12);
    // 1 - 2q at m = 3.5 from quadrature inversion of Be(3.5, 3.5).
    const double upper = 1.0 - 2.0 * ggm::oracle::beta_sym_quantile(0.025, 3.5);
    EXPECT_NEAR(upper, 0.66638360533630927, 1e-9);
    const auto d = ggm::umpu_test(s, 0, 1, 10, 0.05);
    EXPECT_NEAR(d.upper, upper, 1e-10);
    EXPECT_TRUE(d.reject);
    EXPECT_TRUE(detail.raw_reject);
}

TEST(UmpuTest, RawAndStandardizedFormsAgree) {
    int rejects = 0;
    for (int k = 0; k < 2000; ++k) {
        const auto inst = ggm::random_equivalence_instance(31, static_cast<std::uint64_t>(k));
        const std::size_t dim = inst.covariance.dim();
        for (std::size_t j = 1; j < dim; ++j) {
            const auto d = ggm::umpu_detail(inst.covariance, 0, j, inst.n, inst.alpha);
            EXPECT_EQ(d.reject, d.raw_reject);
            EXPECT_LT(d.raw_lower, d.raw_upper);
            EXPECT_GT(d.raw_lower, d.interval.x1);
            EXPECT_LT(d.raw_upper, d.interval.x2);
            rejects += d.reject;
        }
    }
    EXPECT_GT(rejects, 100);
}

TEST(UmpuTest, Errors) {
    const auto s = SymmetricMatrix::identity(3);
    EXPECT_THROW(ggm::umpu_test(s, 0, 1, 3, 0.05), ggm::InsufficientSample);
    EXPECT_THROW(ggm::umpu_test(s, 0, 1, 2, 0.05), ggm::InsufficientSample);
    EXPECT_THROW(ggm::umpu_test(SymmetricMatrix{{1, 2}, {2, 1}}, 0, 1, 10, 0.05), ggm::NotPositiveDefinite);
    EXPECT_THROW(ggm::umpu_test(s, 0, 0, 10, 0.05), ggm::DomainError);
    EXPECT_THROW(ggm::umpu_test(s, 0, 1, 10, 1.5), ggm::DomainError);
    EXPECT_NO_THROW(ggm::umpu_test(s, 0, 1, 4, 0.05));
}

TEST(PartialCorrelationTest, Examples) {
    const auto d0 = ggm::partial_correlation_test(SymmetricMatrix::identity(3), 0, 2, 20, 0.05);
    EXPECT_EQ(d0.statistic, 0.0);
    EXPECT_NEAR(d0.p_value, 1.0, 1e-15);
    EXPECT_FALSE(d0.reject);

    const auto d1 = ggm::partial_correlation_test(SymmetricMatrix::identity(3), 0, 2, 5, 0.05);
    EXPECT_NEAR(d1.upper, 0.95, 1e-12);
    EXPECT_EQ(d1.lower, -d1.upper);
}

TEST(PartialCorrelationTest, BoundaryStatisticHasZeroPValue) {
    EXPECT_EQ(ggm::detail::exact_two_sided_p(1.0, 10, 3), 0.0);
    EXPECT_EQ(ggm::detail::exact_two_sided_p(-1.0, 10, 3), 0.0);
    EXPECT_TRUE(ggm::outside_acceptance(1.0, -0.8, 0.8));
}

TEST(FisherTest, Examples) {
    const auto d0 = ggm::fisher_test(SymmetricMatrix::identity(3), 0, 1, 30, 0.05);
    EXPECT_EQ(d0.statistic, 0.0);
    EXPECT_FALSE(d0.reject);
    EXPECT_TRUE(d0.asymptotic);
    EXPECT_NEAR(d0.upper, ggm::oracle::normal_quantile(0.975), 1e-10);

    // r = 0.5 given an independent third variable; n = 100.
    const SymmetricMatrix s{{1, 0.5, 0}, {0.5, 1, 0}, {0, 0, 1}};
    const auto d = ggm::fisher_test(s, 0, 1, 100, 0.05);
    EXPECT_NEAR(d.statistic, 5.0 * std::log(3.0), 1e-12);
    EXPECT_TRUE(d.reject);
    EXPECT_NEAR(d.p_value, std::erfc(5.0 * std::log(3.0) / std::sqrt(2.0)), 1e-15);
}

TEST(Equivalence, IdentityHasZeroGap) {
    const auto rep = ggm::verify_equivalence(SymmetricMatrix::identity(4), 0, 3, 9, 0.05);
    EXPECT_EQ(rep.statistic_gap, 0.0);
    EXPECT_TRUE(rep.same_decision);
    EXPECT_TRUE(rep.passed());
}

TEST(Equivalence, RandomFourByFourWithTwelveObservations) {
    std::mt19937_64 rng(5150);
    int rejects = 0;
    for (int k = 0; k < 10000; ++k) {
        const auto spec = ggm::random_precision_matrix(4, 0.6, rng());
        const auto s = ggm::sample_covariance(ggm::sample_gaussian(spec, 12, rng()));
        const auto rep = ggm::verify_equivalence(s, k % 3, 3, 12, 0.05);
        ASSERT_LE(rep.statistic_gap, 1e-9);
        ASSERT_TRUE(rep.same_decision);
        ASSERT_LE(rep.threshold_gap, 1e-10);
        rejects += rep.umpu.reject;
    }
    EXPECT_GT(rejects, 500);
}

TEST(Equivalence, SignFlipIsDetected) {
    const SymmetricMatrix s{{2, 1.9, 1}, {1.9, 2, 1}, {1, 1, 2}};
    const auto rep = ggm::verify_equivalence(s, 0, 1, 10, 0.05, true);
    EXPECT_GT(rep.statistic_gap, 1.0);
    EXPECT_NEAR(rep.magnitude_gap, 0.0, 1e-12);
    EXPECT_FALSE(rep.passed());
}

TEST(Equivalence, TieAtUpperRawThresholdRejects) {
    const SymmetricMatrix s{{2, 0.3, 1}, {0.3, 2, 1}, {1, 1, 2}};
    const auto d = ggm::umpu_detail(s, 0, 1, 10, 0.05);
    const auto at_threshold = ggm::umpu_detail(s.with_pair(0, 1, d.raw_upper), 0, 1, 10, 0.05);
    EXPECT_EQ(at_threshold.raw_value, d.raw_upper);
    EXPECT_TRUE(at_threshold.raw_reject);
    EXPECT_NEAR(at_threshold.statistic, 1.0 - 2.0 * d.q, 1e-12);
}

TEST(Equivalence, ClosedRejectionRegion) {
    EXPECT_TRUE(ggm::outside_acceptance(0.9, -0.9, 0.9));
    EXPECT_TRUE(ggm::outside_acceptance(-0.9, -0.9, 0.9));
    EXPECT_FALSE(ggm::outside_acceptance(0.8999999, -0.9, 0.9));
}

TEST(TestProperties, SymmetricThresholdsAndConsistentPValues) {
    for (int k = 0; k < 500; ++k) {
        const auto inst = ggm::random_equivalence_instance(77, static_cast<std::uint64_t>(k));
        for (Method m : kAll) {
            const auto d = ggm::run_test(m, inst.covariance, 0, 1, inst.n, inst.alpha);
            EXPECT_EQ(d.lower, -d.upper);
            EXPECT_EQ(d.reject, ggm::outside_acceptance(d.statistic, d.lower, d.upper));
            if (m != Method::fisher && std::abs(d.p_value - inst.alpha) > 1e-9) {
                EXPECT_EQ(d.p_value <= inst.alpha, d.reject);
            }
            if (m == Method::fisher) {
                EXPECT_EQ(d.p_value <= inst.alpha, d.reject);
            }
        }
    }
}

TEST(TestProperties, MonotoneInAlpha) {
    const double alphas[] = {0.001, 0.01, 0.05, 0.1, 0.2, 0.5};
    for (int k = 0; k < 300; ++k) {
        const auto inst = ggm::random_equivalence_instance(78, static_cast<std::uint64_t>(k));
        for (Method m : kAll) {
            bool rejected = false;
            for (double a : alphas) {
                const bool r = ggm::run_test(m, inst.covariance, 0, 2, inst.n, a).reject;
                if (rejected) {
                    EXPECT_TRUE(r);
                }
                rejected = rejected || r;
            }
        }
    }
}

TEST(TestProperties, InvariantUnderEdgeOrientationAndPermutation) {
    std::mt19937_64 rng(79);
    for (int k = 0; k < 200; ++k) {
        const auto inst = ggm::random_equivalence_instance(79, static_cast<std::uint64_t>(k));
        const std::size_t dim = inst.covariance.dim();
        std::vector<std::size_t> perm(dim);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        // perm[new] = old, so old index o sits at position inv[o].
        std::vector<std::size_t> inv(dim);
        for (std::size_t p = 0; p < dim; ++p) inv[perm[p]] = p;
        const auto permuted = inst.covariance.permuted(perm);
        for (Method m : kAll) {
            const auto a = ggm::run_test(m, inst.covariance, 0, 1, inst.n, inst.alpha);
            const auto b = ggm::run_test(m, inst.covariance, 1, 0, inst.n, inst.alpha);
            const auto c = ggm::run_test(m, permuted, inv[0], inv[1], inst.n, inst.alpha);
            EXPECT_EQ(a.reject, b.reject);
            EXPECT_EQ(a.reject, c.reject);
            EXPECT_NEAR(a.statistic, c.statistic, 1e-9 * std::max(1.0, std::abs(a.statistic)));
        }
    }
}
