#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sbe/enumeration.hpp"
#include "sbe/hoeffding.hpp"
#include "sbe/ustat_lemmas.hpp"

using namespace sbe;
using Catch::Approx;

namespace {

HoeffdingComponents variance_u3() { return centered_hoeffding(VarianceKernel{}, laws::uniform3()); }

HoeffdingComponents kendall_skew() {
    const DiscreteDistribution law({{ExactReal(-2), Rational(1, 5)}, {ExactReal(0), Rational(2, 5)}, {ExactReal(1), Rational(2, 5)}});
    return centered_hoeffding(KendallSignKernel{}, law);
}

HoeffdingComponents product3() {
    const DiscreteDistribution law({{ExactReal(-1), Rational(1, 4)}, {ExactReal(1), Rational(1, 2)}, {ExactReal(3), Rational(1, 4)}});
    return centered_hoeffding(ProductKernel{3}, law);
}

// all n-tuples of atom indices with exact probabilities
template <class Fn>
void for_each_tuple(const HoeffdingComponents& c, std::size_t n, Fn&& fn) {
    std::vector<std::size_t> idx(n, 0);
    while (true) {
        Rational w = 1;
        for (auto a : idx) w *= c.probs[a];
        fn(static_cast<const std::vector<std::size_t>&>(idx), w);
        std::size_t t = n;
        while (t > 0 && idx[t - 1] + 1 == c.atoms) idx[--t] = 0;
        if (t == 0) return;
        ++idx[t - 1];
    }
}

}  // namespace

TEST_CASE("kernel bound (i)") {
    for (const auto& c : {variance_u3(), kendall_skew(), product3()}) {
        const auto checks = kernel_bound_case_i(c);
        CHECK(checks.front().lhs == 0);  // E hbar_1^2 = 0
        for (const auto& k : checks) {
            INFO(k.detail);
            CHECK(k.ok);
        }
    }
}

TEST_CASE("kernel bound (ii) against brute-force enumeration, m=2, n=6") {
    const auto c = variance_u3();
    const auto chk = kernel_bound_case_ii(c, 6);
    CHECK(chk.ok);
    Rational brute = 0;
    for_each_tuple(c, 6, [&](const std::vector<std::size_t>& idx, const Rational& w) {
        Rational s = 0;
        for (std::size_t j = 1; j < 6; ++j) {
            const std::size_t pair[2] = {idx[0], idx[j]};
            s += c.hbar_raw(pair);
        }
        brute += w * s * s;
    });
    CHECK(chk.lhs == Approx(static_cast<double>(brute / c.raw_sigma_g2)).epsilon(1e-14));
    CHECK(kernel_bound_case_ii(product3(), 8).ok);
}

TEST_CASE("kernel bounds (iii) and (iv)") {
    for (const auto& c : {variance_u3(), kendall_skew()}) {
        for (bool iv : {false, true}) {
            const auto checks = kernel_bound_case_iii_iv(c, 6, iv);
            CHECK(!checks.empty());
            for (const auto& k : checks) {
                INFO(k.name << " " << k.detail << " lhs=" << k.lhs << " rhs=" << k.rhs);
                CHECK(k.ok);
            }
        }
    }
    const auto p = kernel_bound_case_iii_iv(product3(), 9, true);
    for (const auto& k : p) CHECK(k.ok);
}

TEST_CASE("cross moment: disjoint pattern vanishes, overlapping pattern matches brute force") {
    const auto c = kendall_skew();
    IndexPattern disjoint{{2, 3}, {4, 5}, 0};
    CHECK(cross_moment_exact(c, 6, disjoint).is_zero());

    IndexPattern shared{{0, 2}, {1, 2}, 1};
    const double fast = cross_moment_exact(c, 6, shared).to_double();
    double brute = 0;
    const double rn = std::sqrt(6.0);
    for_each_tuple(c, 3, [&](const std::vector<std::size_t>& idx, const Rational& w) {
        const std::size_t I[2] = {idx[0], idx[2]}, J[2] = {idx[1], idx[2]};
        brute += static_cast<double>(w) * censor_xi(c.g(idx[0]) / rn) * censor_xi(c.g(idx[1]) / rn) *
                 c.hbar_norm(I) * c.hbar_norm(J);
    });
    CHECK(fast == Approx(brute).epsilon(1e-12));
}

TEST_CASE("index patterns cover the overlap structure") {
    const auto pats = index_patterns(2, 2, 10, false);
    const auto pats_iv = index_patterns(2, 2, 10, true);
    CHECK(pats.size() > pats_iv.size());
    for (const auto& p : pats_iv) {
        CHECK(std::find(p.J.begin(), p.J.end(), 0) == p.J.end());
        CHECK(std::find(p.I.begin(), p.I.end(), 1) == p.I.end());
    }
}

TEST_CASE("D_1n bounds") {
    const auto m1 = d1_bound_check(hoeffding(MeanKernel{1}, laws::uniform3()), 5);
    CHECK(m1[0].lhs == 0);
    CHECK(m1[0].rhs == 0);
    CHECK(m1[1].lhs == 0);

    const auto c = variance_u3();
    const auto r = d1_bound_check(c, 6);
    CHECK(r[0].ok);
    CHECK(r[1].ok);
    CHECK(r[0].ratio() < 1);
    CHECK(r[1].ratio() < 1);

    // brute force over all 729 samples
    double d1 = 0, d1d = 0;
    for_each_tuple(c, 6, [&](const std::vector<std::size_t>& idx, const Rational& w) {
        const auto dec = decompose_sample(c, idx, true);
        const auto t = pi2_terms(dec, Pi2Variant::without, kappa_summand(c, 6));
        d1 += static_cast<double>(w) * dec.D1 * dec.D1;
        d1d += static_cast<double>(w) * (dec.D1 - t.d1_loo[0]) * (dec.D1 - t.d1_loo[0]);
    });
    CHECK(r[0].lhs == Approx(std::sqrt(d1)).epsilon(1e-12));
    CHECK(r[1].lhs == Approx(std::sqrt(d1d)).epsilon(1e-12));

    for (const auto& k : d1_bound_check(product3(), 9)) CHECK(k.ok);
    CHECK_THROWS_AS(d1_bound_check(c, 4), ContractViolation);
}

TEST_CASE("Pi_2 norms: exchangeable enumeration equals the full product enumeration") {
    const auto c = variance_u3();
    const std::size_t n = 6;
    for (auto variant : {Pi2Variant::with_rootn, Pi2Variant::without}) {
        const auto fast = pi2_norms_exact(c, n, variant);
        double p2 = 0, pd = 0;
        const double kappa = kappa_summand(c, n);
        for_each_tuple(c, n, [&](const std::vector<std::size_t>& idx, const Rational& w) {
            const auto dec = decompose_sample(c, idx, true);
            const auto t = pi2_terms(dec, variant, kappa);
            const double ww = static_cast<double>(w);
            p2 += ww * t.pi2 * t.pi2;
            // average over i: each index plays the role of the distinguished one
            for (std::size_t i = 0; i < n; ++i) pd += ww * (t.pi2 - t.pi2_loo[i]) * (t.pi2 - t.pi2_loo[i]) / n;
        });
        CHECK(fast.pi2_l2 == Approx(std::sqrt(p2)).epsilon(1e-12));
        CHECK(fast.pi2_diff_l2 == Approx(std::sqrt(pd)).epsilon(1e-12));
        const auto exact = d1_bound_check(c, n);
        CHECK(fast.d1_l2 == Approx(exact[0].lhs).epsilon(1e-12));
        CHECK(fast.d1_diff_l2 == Approx(exact[1].lhs).epsilon(1e-12));
    }
    const auto checks = pi2_bound_check(c, n, Pi2Variant::with_rootn);
    for (const auto& k : checks) {
        CHECK(std::isfinite(k.ratio()));
        CHECK(k.rhs > 0);
    }
}

TEST_CASE("calibration") {
    const std::vector<double> a = {0.1, 0.4, 0.3}, b = {0.2, 0.5};
    const auto cal = calibrate("demo", a, b, 1.1);
    CHECK(cal.c_hat == Approx(0.55));
    CHECK(cal.drift == Approx(1.25));
    CHECK(cal.failures == 0);
    CHECK(cal.ok(2.0));
    const std::vector<double> zeros = {0, 0};
    CHECK(calibrate("zero", zeros, zeros, 1.1).drift == 1);
    CHECK(!calibrate("lopsided", zeros, b, 1.1).ok(2.0));
}
