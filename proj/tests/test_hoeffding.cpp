#include <catch_amalgamated.hpp>

#include <cmath>

#include "sbe/hoeffding.hpp"
#include "sbe/random.hpp"

using namespace sbe;

namespace {

// second enumerator: plain nested loops over the three atoms of uniform{-1,0,1}
struct VarianceOracle {
    Rational sigma_g2 = 0;
    Rational Eh2 = 0;
    Rational Eh = 0;
};

VarianceOracle variance_oracle() {
    const int vals[3] = {-1, 0, 1};
    const Rational third(1, 3);
    VarianceOracle o;
    for (int a : vals)
        for (int b : vals) o.Eh += third * third * Rational((a - b) * (a - b), 2);
    for (int a : vals) {
        Rational g = 0;
        for (int b : vals) g += third * (Rational((a - b) * (a - b), 2) - o.Eh);
        o.sigma_g2 += third * g * g;
        for (int b : vals) {
            const Rational h = Rational((a - b) * (a - b), 2) - o.Eh;
            o.Eh2 += third * third * h * h;
        }
    }
    return o;
}

}  // namespace

TEST_CASE("variance kernel on uniform{-1,0,1}: oracle values") {
    const auto o = variance_oracle();
    REQUIRE(o.Eh == Rational(2, 3));
    REQUIRE(o.sigma_g2 == Rational(1, 18));
    REQUIRE(o.Eh2 == Rational(5, 9));

    const auto c = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    CHECK(c.raw_sigma_g2 == o.sigma_g2);
    CHECK(c.raw_Eh2 == o.Eh2);
    // g(x) = x^2/2 - 1/3
    for (std::size_t a = 0; a < 3; ++a) {
        const Rational x = c.values[a];
        CHECK(c.h_raw[1][a] == x * x / 2 - Rational(1, 3));
    }
    const auto mom = moment_report(c);
    CHECK(mom.normalized_Eh2 == Rational(10));
    CHECK(mom.jensen_ok);
    CHECK(mom.extract_extra_m_ok);
}

TEST_CASE("uncentered kernel is rejected") {
    CHECK_THROWS_AS(hoeffding(VarianceKernel{}, laws::uniform3()), ContractViolation);
    CHECK(kernel_mean(VarianceKernel{}, laws::uniform3()) == Rational(2, 3));
}

TEST_CASE("degree one: g = h and hbar_1 = 0") {
    const auto c = hoeffding(MeanKernel{1}, laws::uniform3());
    for (std::size_t a = 0; a < 3; ++a) CHECK(c.h_raw[1][a] == c.values[a]);
    CHECK(c.raw_hbar_second(1) == 0);
    const auto mom = moment_report(c);
    CHECK(mom.normalized_Eh2 == Rational(1));
}

TEST_CASE("product kernel under a mean-zero law is degenerate") {
    CHECK_THROWS_AS(hoeffding(ProductKernel{2}, laws::uniform3()), DegenerateKernel);
}

TEST_CASE("h_k against direct conditional expectations, degree 3") {
    const DiscreteDistribution law({{ExactReal(-1), Rational(1, 4)}, {ExactReal(1), Rational(1, 2)}, {ExactReal(3), Rational(1, 4)}});
    const auto c = centered_hoeffding(ProductKernel{3}, law);
    const Rational mu = 1;  // E X = -1/4 + 1/2 + 3/4
    const Rational e2 = Rational(1, 4) + Rational(1, 2) + Rational(9, 4);
    for (std::size_t a = 0; a < 3; ++a) {
        // h_1(x) = x mu^2 - mu^3, h_2(x, y) = x y mu - mu^3
        CHECK(c.h_raw[1][a] == c.values[a] * mu * mu - mu * mu * mu);
        for (std::size_t b = 0; b < 3; ++b) {
            const std::size_t ab[2] = {a, b};
            CHECK(c.h_raw[2][c.table_index(ab)] == c.values[a] * c.values[b] * mu - mu * mu * mu);
        }
    }
    CHECK(c.raw_sigma_g2 == (e2 - mu * mu) * mu * mu * mu * mu);
    CHECK(moment_report(c).jensen_ok);
}

TEST_CASE("Jensen chain and m E g^2 <= E h^2 on random laws") {
    Xoshiro256 rng(3);
    for (int k = 0; k < 20; ++k) {
        const auto law = random_mean_zero_law(rng, 3 + k % 2, Rational(1));
        for (const auto& kern : {make_kernel("variance", 2), make_kernel("kendall-sign", 2), make_kernel("product", 3)}) {
            if (kern.name() == "product") {
                // shift the law so the product kernel is not degenerate
                std::vector<Atom> shifted;
                for (const auto& a : law.atoms()) shifted.push_back({a.value + ExactReal(1), a.p});
                const auto c = centered_hoeffding(kern, DiscreteDistribution(shifted));
                const auto mom = moment_report(c);
                CHECK(mom.jensen_ok);
                CHECK(mom.extract_extra_m_ok);
                continue;
            }
            try {
                const auto c = centered_hoeffding(kern, law);
                const auto mom = moment_report(c);
                CHECK(mom.jensen_ok);
                CHECK(mom.extract_extra_m_ok);
            } catch (const DegenerateKernel&) {
                SUCCEED("degenerate under this law");
            }
        }
    }
}

TEST_CASE("constant-free U-statistic bound") {
    MomentReport mom;
    mom.E_abs_g3 = 1.5;
    mom.E_h2 = 2.0;
    mom.g3_norm = std::cbrt(1.5);
    mom.h3_norm = 1.7;
    // m = 1: (mu3 + E h^2 + ||g||_3 ||h||_3) / sqrt(n)
    CHECK(be_bound_ustat(mom, 9, 1) == Catch::Approx((1.5 + 2.0 + std::cbrt(1.5) * 1.7) / 3));
    CHECK(be_bound_ustat(mom, 400, 2) == Catch::Approx(be_bound_ustat(mom, 100, 2) / 2));
    CHECK_THROWS_AS(be_bound_ustat(mom, 4, 2), DomainError);

    const auto c = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    const auto r = moment_report(c);
    // normalized g = (x^2/2 - 1/3) sqrt(18): values -sqrt(2) (p 1/3), sqrt(2)/2 (p 2/3)
    const double Eg3 = (1.0 / 3) * std::pow(std::sqrt(2.0), 3) + (2.0 / 3) * std::pow(std::sqrt(2.0) / 2, 3);
    CHECK(r.E_abs_g3 == Catch::Approx(Eg3).epsilon(1e-14));
    // |h| normalized: 2/3, 1/6, 4/3 times sqrt(18) with probabilities 1/3, 4/9, 2/9
    const double s = std::sqrt(18.0);
    const double Eh3 = (1.0 / 3) * std::pow(2.0 / 3 * s, 3) + (4.0 / 9) * std::pow(s / 6, 3) + (2.0 / 9) * std::pow(4.0 / 3 * s, 3);
    const double bracket = Eg3 + 2 * (10 + std::cbrt(Eg3) * std::cbrt(Eh3));
    CHECK(be_bound_ustat(r, 100, 2) == Catch::Approx(bracket / 10).epsilon(1e-13));
}
