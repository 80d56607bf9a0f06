#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sbe/hoeffding.hpp"
#include "sbe/random.hpp"
#include "sbe/u_stat.hpp"
#include "sbe/ustat_lemmas.hpp"

using namespace sbe;
using Catch::Approx;

namespace {

double sample_variance(const std::vector<double>& x) {
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double ss = 0;
    for (double v : x) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(x.size() - 1);
}

std::vector<double> uniform_data(Xoshiro256& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform() * 4 - 1.5;
    return x;
}

HoeffdingComponents product3_components() {
    const DiscreteDistribution law({{ExactReal(-1), Rational(1, 4)}, {ExactReal(1), Rational(1, 2)}, {ExactReal(3), Rational(1, 4)}});
    return centered_hoeffding(ProductKernel{3}, law);
}

std::vector<std::size_t> random_atoms(Xoshiro256& rng, const HoeffdingComponents& c, std::size_t n) {
    std::vector<double> probs = c.probs_d;
    std::vector<std::size_t> idx(n);
    for (auto& a : idx) {
        double u = rng.uniform(), acc = 0;
        a = c.atoms - 1;
        for (std::size_t k = 0; k < c.atoms; ++k) {
            acc += probs[k];
            if (u < acc) {
                a = k;
                break;
            }
        }
    }
    return idx;
}

}  // namespace

TEST_CASE("u_statistic examples") {
    const std::vector<double> x = {-1, 0, 1, 2};
    CHECK(u_statistic(MeanKernel{1}, x) == Approx(0.5));
    CHECK(u_statistic(VarianceKernel{}, x) == Approx(sample_variance(x)));
    CHECK(u_statistic(VarianceKernel{}, x) == Approx(5.0 / 3));
    std::vector<double> y = {2, -1, 1, 0};
    CHECK(u_statistic(VarianceKernel{}, y) == Approx(u_statistic(VarianceKernel{}, x)));
    CHECK_THROWS_AS(u_statistic(VarianceKernel{}, std::vector<double>{1, 2}), ContractViolation);
    CHECK_THROWS_AS(u_statistic(MeanKernel{3}, std::vector<double>(40, 1.0), 1000), CapExceeded);
}

TEST_CASE("jackknife examples") {
    const std::vector<double> x = {0.3, -1.2, 2.5, 0.7, -0.4};
    const auto j1 = jackknife(MeanKernel{1}, x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(j1.q[i] == Approx(x[i]));
    CHECK(j1.s2 == Approx(sample_variance(x)));

    const std::vector<double> six = {0.1, -0.8, 1.3, 2.2, -1.5, 0.6};
    const auto j2 = jackknife(VarianceKernel{}, six);
    const std::size_t n = six.size();
    double U = 0, ss = 0;
    std::vector<double> q(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) q[i] += (six[i] - six[j]) * (six[i] - six[j]) / 2 / static_cast<double>(n - 1);
    for (double v : q) U += v / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(j2.q[i] == Approx(q[i]).epsilon(1e-13));
        ss += (q[i] - U) * (q[i] - U);
    }
    CHECK(j2.U == Approx(U));
    CHECK(j2.s2 == Approx(5.0 / 16 * ss).epsilon(1e-13));

    const auto flat = jackknife(VarianceKernel{}, std::vector<double>(7, 1.25));
    CHECK(flat.s2 == 0);
}

TEST_CASE("studentized examples") {
    const std::vector<double> x = {0.3, -1.2, 2.5, 0.7, -0.4, 1.1};
    const auto t = studentized(MeanKernel{1}, x);
    double mean = 0;
    for (double v : x) mean += v / 6;
    CHECK(t.T == Approx(std::sqrt(6.0) * mean / std::sqrt(sample_variance(x))).epsilon(1e-13));

    const auto zero = studentized(MeanKernel{1}, std::vector<double>{-1, 1, -2, 2});
    CHECK(zero.T == 0);
    CHECK(zero.T_star == 0);

    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= 3.7;
    CHECK(studentized(MeanKernel{1}, scaled).T == Approx(t.T).epsilon(1e-13));

    const auto inf = studentized(MeanKernel{1}, std::vector<double>(5, 2.0));
    CHECK(inf.T == INFINITY);
    CHECK(std::isfinite(inf.T_star));
}

TEST_CASE("event equivalence threshold arithmetic") {
    CHECK(b_n(10, 2) == 9.0 / 16);
    CHECK(b_n_exact(10, 2) == Rational(9, 16));
    CHECK(1 / std::sqrt(1 + b_n(10, 2)) == Approx(0.8).epsilon(1e-15));
    CHECK(event_equivalence_check(0.0, 10, 2, 0.5, 0.3));
    CHECK(event_equivalence_check(0.0, 10, 2, -0.5, -0.3));
}

TEST_CASE("event equivalence on every atom of an enumerated n=6, m=2 model") {
    const auto kern = Centered<VarianceKernel>(VarianceKernel{}, Rational(2, 3));
    std::vector<Rational> xs;
    std::vector<double> xd;
    for (int k = -20; k <= 20; ++k) {
        xs.emplace_back(k, 5);
        xd.push_back(k / 5.0);
    }
    const std::vector<DiscreteDistribution> d(6, laws::uniform3());
    std::size_t outcomes = 0;
    for_each_outcome(d, 1000, [&](const std::vector<std::size_t>& idx, const Rational&) {
        std::vector<Rational> data(6);
        std::vector<double> dd(6);
        for (std::size_t i = 0; i < 6; ++i) {
            data[i] = Rational(static_cast<long long>(idx[i]) - 1);
            dd[i] = static_cast<double>(idx[i]) - 1;
        }
        const auto ex = exact_studentized(kern, data);
        for (const auto& x : xs) CHECK(event_equivalence_exact(ex, 6, 2, x));
        const auto t = studentized(kern, dd);
        CHECK(event_equivalence_check(xd, 6, 2, t.T, t.T_star));
        ++outcomes;
    });
    CHECK(outcomes == 729);
}

TEST_CASE("decomposition collapses for m = 1") {
    Xoshiro256 rng(1);
    const auto data = uniform_data(rng, 9);
    const auto r = decomposition_terms(MeanKernel{1}, [](double v) { return v; }, data);
    CHECK(r.D1 == 0);
    for (double p : r.psi) CHECK(p == 0);
    CHECK(r.delta1 == 0);
    CHECK(r.delta2 == 0);
    CHECK(r.s_star_residual <= 1e-12);
}

TEST_CASE("decomposition identities on random samples") {
    Xoshiro256 rng(2024);
    const auto var = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    const auto ken = centered_hoeffding(KendallSignKernel{}, laws::uniform3());
    const auto p3 = product3_components();
    const HoeffdingComponents* comps[] = {&var, &ken, &p3};
    std::size_t checked = 0;
    for (int rep = 0; rep < 3000; ++rep) {
        const auto& c = *comps[rep % 3];
        const std::size_t n = 2 * c.m + 1 + rng.below(6);
        const auto idx = random_atoms(rng, c, n);
        const auto r = decompose_sample(c, idx, false);
        CHECK(r.w_plus_d1_residual <= 1e-10);
        CHECK(r.s_star_residual <= 1e-10);
        CHECK(r.delta1 >= -1e-12 * (1 + r.V2));
        CHECK(wpsi_cauchy_check(r));
        ++checked;
    }
    // continuous data with an arbitrary canonical function: the algebra does not care
    for (int rep = 0; rep < 500; ++rep) {
        const auto data = uniform_data(rng, 8);
        const auto r = decomposition_terms(VarianceKernel{}, [](double v) { return v * v / 2 - 0.3; }, data);
        CHECK(r.w_plus_d1_residual <= 1e-10);
        CHECK(r.s_star_residual <= 1e-10);
        CHECK(r.delta1 >= -1e-12 * (1 + r.V2));
    }
    CHECK(checked == 3000);
}

TEST_CASE("pi2 terms: m = 1 and the two placeholder variants") {
    const auto c1 = hoeffding(MeanKernel{1}, laws::uniform3());
    Xoshiro256 rng(8);
    const auto r1 = decompose_sample(c1, random_atoms(rng, c1, 7), false);
    const auto t1 = pi2_terms(r1, Pi2Variant::with_rootn, kappa_summand(c1, 7));
    CHECK(t1.delta2b == 0);

    const auto c = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    const auto r = decompose_sample(c, random_atoms(rng, c, 8), true);
    const double k = kappa_summand(c, 8);
    const auto a = pi2_terms(r, Pi2Variant::with_rootn, k);
    const auto b = pi2_terms(r, Pi2Variant::without, k);
    CHECK(a.pi2 - b.pi2 == Approx(1 / std::sqrt(8.0)).epsilon(1e-14));
    for (std::size_t i = 0; i < 8; ++i) CHECK(a.pi2_loo[i] - b.pi2_loo[i] == Approx(1 / std::sqrt(8.0)).epsilon(1e-14));
}

TEST_CASE("leave-one-out terms match brute force and ignore X_i") {
    Xoshiro256 rng(77);
    const auto c = product3_components();
    const std::size_t n = 9, m = 3;
    auto idx = random_atoms(rng, c, n);
    const auto r = decompose_sample(c, idx, true);
    const double kappa = kappa_summand(c, n);
    const auto t = pi2_terms(r, Pi2Variant::without, kappa);
    const double rn = std::sqrt(static_cast<double>(n));
    auto hbar = [&](std::span<const std::size_t> pos) {
        std::vector<std::size_t> a;
        for (auto p : pos) a.push_back(idx[p]);
        return c.hbar_norm(a);
    };
    for (std::size_t i = 0; i < n; ++i) {
        double d1 = 0;
        for_each_combination(n, m, 1'000'000, [&](std::span<const std::size_t> s) {
            if (std::find(s.begin(), s.end(), i) == s.end()) d1 += hbar(s);
        });
        CHECK(t.d1_loo[i] == Approx(d1 / r.C1 / rn).margin(1e-12));
        double delta = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double inner = 0;
            for_each_combination(n, m, 1'000'000, [&](std::span<const std::size_t> s) {
                if (std::find(s.begin(), s.end(), j) != s.end() && std::find(s.begin(), s.end(), i) == s.end())
                    inner += hbar(s);
            });
            delta += censor_xi(c.g(idx[j]) / rn) * inner;
        }
        delta *= 2.0 * (n - 1) / (rn * (n - m) * r.C1);
        CHECK(t.delta2b_loo[i] == Approx(delta).margin(1e-12));
    }
    // changing X_i leaves every i-th leave-one-out quantity unchanged
    const auto s_loo = studentizer_loo(r, false);
    const auto s_loo_plain = studentizer_loo(r, true);
    for (std::size_t i = 0; i < n; ++i) {
        auto other = idx;
        other[i] = (idx[i] + 1) % c.atoms;
        const auto r2 = decompose_sample(c, other, true);
        const auto t2 = pi2_terms(r2, Pi2Variant::without, kappa);
        CHECK(t2.d1_loo[i] == Approx(t.d1_loo[i]).margin(1e-12));
        CHECK(t2.pi2_loo[i] == Approx(t.pi2_loo[i]).margin(1e-12));
        CHECK(studentizer_loo(r2, false)[i] == Approx(s_loo[i]).margin(1e-12));
        CHECK(studentizer_loo(r2, true)[i] == Approx(s_loo_plain[i]).margin(1e-12));
    }
}

TEST_CASE("plain Studentizer from the starred one") {
    Xoshiro256 rng(5);
    const auto c = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    for (int rep = 0; rep < 200; ++rep) {
        const auto r = decompose_sample(c, random_atoms(rng, c, 10), false);
        const double s2 = r.s2_star - b_n(10, 2) * (r.W + r.D1) * (r.W + r.D1);
        CHECK(s2 == Approx(r.s2).margin(1e-12));
    }
}

TEST_CASE("multiset evaluator matches direct evaluation") {
    Xoshiro256 rng(13);
    const std::vector<double> atoms = {-1, 0, 1};
    const MultisetEvaluator ev2(VarianceKernel{}, atoms);
    const MultisetEvaluator ev3(ProductKernel{3}, atoms);
    const MultisetEvaluator ev1(MeanKernel{1}, atoms);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 7 + rng.below(6);
        std::vector<double> data(n);
        std::vector<std::size_t> counts(3, 0);
        for (auto& v : data) {
            const auto a = rng.below(3);
            v = atoms[a];
            ++counts[a];
        }
        auto compare = [&](const MultisetEvaluator& ev, const auto& kern) {
            const auto fast = ev.evaluate(counts);
            const auto jk = jackknife(kern, data);
            CHECK(fast.U == Approx(jk.U).margin(1e-12));
            CHECK(fast.s2 == Approx(jk.s2).margin(1e-12));
            CHECK(fast.s2_star == Approx(jk.s2_star).margin(1e-12));
        };
        compare(ev1, MeanKernel{1});
        compare(ev2, VarianceKernel{});
        compare(ev3, ProductKernel{3});
    }
}

TEST_CASE("bridging inequality") {
    const auto z = bridging_check(0, 10, 2);
    CHECK(z.lhs == 0);
    CHECK(z.ok);
    const auto one = bridging_check(1, 10, 2);
    CHECK(one.lhs == Approx(normal_cdf(1) - normal_cdf(0.8)).epsilon(1e-14));
    CHECK(one.ok);
    for (std::size_t n : {10, 50, 200})
        for (std::size_t m : {1, 2, 3})
            for (double x = 0; x <= 20.0 + 1e-9; x += 0.01) CHECK(bridging_check(x, n, m).ok);
}
