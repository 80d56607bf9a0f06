#include <catch_amalgamated.hpp>

#include <cmath>

#include "sbe/censoring.hpp"
#include "sbe/random.hpp"
#include "sbe/stein_expectation.hpp"

using namespace sbe;

namespace {
DiscreteDistribution skewed() {
    return DiscreteDistribution({{ExactReal(3), Rational(1, 10)}, {ExactReal(Rational(-1, 3)), Rational(9, 10)}});
}
}  // namespace

TEST_CASE("censor examples") {
    CHECK(censor(1.5, CensorInterval(-1, 1)) == 1);
    CHECK(censor(0.3, CensorInterval(-1, 1)) == 0.3);
    CHECK(censor(-0.7, CensorInterval(-0.5, 0.5)) == -0.5);
    CHECK(censor_remainder(0.9) == 0.5);
    CHECK(censor_remainder(-0.2) == -0.2);
    for (double d : {0.1, -0.1, 2.0, -2.0}) CHECK(std::abs(censor_remainder(d)) <= std::abs(d));
    CHECK_THROWS_AS(CensorInterval(1, -1), DomainError);
    CHECK(censor(-1e300, CensorInterval(-INFINITY, 0)) == -1e300);
}

TEST_CASE("censoring is a contraction, dominated and idempotent") {
    Xoshiro256 rng(7);
    for (int k = 0; k < 100000; ++k) {
        double a = (rng.uniform() - 0.5) * 8, b = (rng.uniform() - 0.5) * 8;
        if (a > b) std::swap(a, b);
        if (k % 10 == 0) a = -INFINITY;
        if (k % 15 == 0) b = INFINITY;
        const CensorInterval iv(a, b);
        const double y = (rng.uniform() - 0.5) * 20, z = (rng.uniform() - 0.5) * 20;
        CHECK(std::abs(censor(y, iv) - censor(z, iv)) <= std::abs(y - z));
        CHECK(censor(censor(y, iv), iv) == censor(y, iv));
        const double yp = std::abs(y), bp = rng.uniform() * 5 + 1e-3;
        CHECK(censor(yp, CensorInterval(0, bp)) <= yp);
    }
}

TEST_CASE("truncation is not a contraction") {
    // |trunc(0.49) - trunc(0.51)| = 0.49 > 0.02
    CHECK(std::abs(truncate_remainder(0.49) - truncate_remainder(0.51)) > std::abs(0.49 - 0.51));
}

TEST_CASE("censored mean bound examples") {
    const auto r = censored_mean_bound_check(skewed());
    CHECK(r.lhs == ExactReal(Rational(1, 5)));
    CHECK(r.rhs == ExactReal(Rational(9, 10)));
    CHECK(r.ok);

    const DiscreteDistribution sym({{ExactReal(-2), Rational(1, 8)}, {ExactReal(0), Rational(3, 4)}, {ExactReal(2), Rational(1, 8)}});
    const auto s = censored_mean_bound_check(sym);
    CHECK(s.lhs.is_zero());
    CHECK(s.ok);

    const auto inside = censored_mean_bound_check(laws::uniform3());
    CHECK(inside.lhs.is_zero());
    CHECK(inside.rhs.is_zero());

    CHECK_THROWS_AS(censored_mean_bound_check(DiscreteDistribution::uniform({ExactReal(0), ExactReal(1)})), ContractViolation);
}

TEST_CASE("Bennett bound examples") {
    const std::vector<DiscreteDistribution> three(3, laws::symmetric_sign(3));
    const auto t0 = bennett_mgf_check(three, 0);
    CHECK(t0.lhs == Catch::Approx(1).epsilon(1e-15));
    CHECK(t0.rhs == Catch::Approx(1).epsilon(1e-15));
    CHECK(t0.ok);
    const auto t1 = bennett_mgf_check(three, 1);
    CHECK(t1.ok);
    CHECK(t1.lhs == Catch::Approx(std::pow(std::cosh(1 / std::sqrt(3.0)), 3)).epsilon(1e-14));
    CHECK(bennett_mgf_check({skewed()}, 2).ok);
    CHECK_THROWS_AS(bennett_mgf_check({laws::uniform3(), laws::uniform3()}, 1), ContractViolation);
    CHECK_THROWS_AS(bennett_mgf_check(three, -1), DomainError);
}

TEST_CASE("factorized and brute-force censored MGF agree") {
    Xoshiro256 rng(11);
    for (int k = 0; k < 10; ++k) {
        std::vector<DiscreteDistribution> d;
        for (int j = 0; j < 4; ++j) d.push_back(random_mean_zero_law(rng, 3, Rational(1, 4)));
        for (double t : {0.3, 1.7}) {
            const double a = censored_mgf(d, t).convert_to<double>();
            const double b = censored_mgf_bruteforce(d, t).convert_to<double>();
            CHECK(std::abs(a - b) <= 1e-14 * a);
        }
    }
}

TEST_CASE("beta split on random laws") {
    Xoshiro256 rng(5);
    for (int k = 0; k < 30; ++k) {
        std::vector<DiscreteDistribution> d;
        for (int j = 0; j < 3; ++j) d.push_back(random_mean_zero_law(rng, 2 + k % 3, Rational(1, 3)));
        CHECK(beta_split_check(d));
        const auto b = beta_terms(d);
        CHECK(b.beta2.sign() >= 0);
        CHECK(b.sum_second <= ExactReal(1));
    }
}

TEST_CASE("random mean-zero laws honour their constraints") {
    Xoshiro256 rng(99);
    for (int k = 0; k < 50; ++k) {
        const auto d = random_mean_zero_law(rng, 2 + k % 4, Rational(1, 2));
        CHECK(d.mean().is_zero());
        CHECK(d.second_moment() <= ExactReal(Rational(1, 2)));
        CHECK(censored_mean_bound_check(d).ok);
    }
}

TEST_CASE("expected f' bound with the proof constant") {
    const std::vector<DiscreteDistribution> xi(4, laws::symmetric_sign(4));
    const double C = expected_fprime_proof_constant();
    for (double x : {1.0, 2.0, 4.0})
        for (double t : {-1.0, 0.0, 0.5, 1.0}) CHECK(expected_fprime_bound_check(x, t, xi, 0, C).ok);
    CHECK_THROWS_AS(expected_fprime_bound_check(0.5, 0, xi, 0, C), DomainError);
}
