#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "sbe/checks.hpp"

using namespace sbe;
using Catch::Approx;

namespace {

MonteCarloConfig mc(std::size_t reps, std::uint64_t seed = 11, std::size_t workers = 1) {
    MonteCarloConfig c;
    c.reps = reps;
    c.seed = seed;
    c.workers = workers;
    return c;
}

// T_n for the variance kernel (a - b)^2 / 2 - 2/3 with n = 4, written out by hand
double t_variance_n4(const double x[4]) {
    double h[4][4] = {};
    double sum = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            h[i][j] = h[j][i] = (x[i] - x[j]) * (x[i] - x[j]) / 2 - 2.0 / 3.0;
            sum += h[i][j];
        }
    const double U = sum / 6;
    double ss = 0;
    for (int i = 0; i < 4; ++i) {
        double q = 0;
        for (int j = 0; j < 4; ++j)
            if (j != i) q += h[i][j];
        q /= 3;
        ss += (q - U) * (q - U);
    }
    const double s = std::sqrt(0.75 * ss);  // (n - 1) / (n - m)^2 = 3/4
    if (s == 0) return U == 0 ? 0.0 : (U > 0 ? INFINITY : -INFINITY);
    return 2 * U / (2 * s);  // sqrt(n) U / (m s)
}

}  // namespace

TEST_CASE("enumerate_expectation: trivial functionals") {
    const std::vector<DiscreteDistribution> d{laws::uniform3(), laws::symmetric_sign(3), laws::two_point(Rational(2), Rational(1, 5))};
    const Rational one = enumerate_expectation(d, [](const std::vector<ExactReal>&) { return Rational(1); });
    CHECK(one == 1);
    for (std::size_t k = 0; k < d.size(); ++k) {
        const ExactReal m = enumerate_expectation(d, [k](const std::vector<ExactReal>& x) { return x[k]; });
        CHECK(m.is_zero());
    }
    CHECK_THROWS_AS(enumerate_expectation(std::vector<DiscreteDistribution>(20, laws::uniform3()),
                                          [](const std::vector<ExactReal>&) { return Rational(1); }),
                    CapExceeded);
}

TEST_CASE("enumerate_expectation: P(T_n <= 0.5), n = 4, m = 2 variance kernel, against nested loops") {
    const auto kern = Centered<VarianceKernel>(VarianceKernel{}, Rational(2, 3));
    const std::vector<DiscreteDistribution> d(4, laws::uniform3());
    const Rational p = enumerate_expectation(d, [&](const std::vector<ExactReal>& x) {
        std::vector<double> v;
        for (const auto& e : x) v.push_back(e.to_high_prec().convert_to<double>());
        return studentized(kern, v).T <= 0.5 ? Rational(1) : Rational(0);
    });
    long hits = 0;
    const double vals[3] = {-1, 0, 1};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                for (int e = 0; e < 3; ++e) {
                    const double x[4] = {vals[a], vals[b], vals[c], vals[e]};
                    if (t_variance_n4(x) <= 0.5) ++hits;
                }
    CHECK(p == Rational(hits, 81));
    CHECK(hits > 0);
    CHECK(hits < 81);
}

TEST_CASE("oracle consistency: Monte Carlo agrees with enumeration within 4 SE") {
    const auto skew = DiscreteDistribution({{ExactReal(-2), Rational(1, 5)}, {ExactReal(0), Rational(2, 5)}, {ExactReal(1), Rational(2, 5)}});
    const auto var = centered_hoeffding(VarianceKernel{}, laws::uniform3());
    const auto ken = centered_hoeffding(KendallSignKernel{}, laws::uniform3());
    std::vector<NonlinearStatisticModel> corpus{
        models::self_normalized_sum(laws::uniform3(), 4),
        models::self_normalized_sum(skew, 5),
        models::ustat(var, 5, models::UStatForm::tn_star),
        models::ustat(ken, 5, models::UStatForm::placeholder_rootn),
    };
    BoundOptions ex, mcm;
    ex.mode = EstimatorMode::exact;
    mcm.mode = EstimatorMode::monte_carlo;
    std::size_t pairs = 0;
    for (const auto& model : corpus) {
        const auto a = bound_theorem_main(model, mc(40000), ex);
        const auto b = bound_theorem_main(model, mc(40000), mcm);
        REQUIRE(a.exact);
        REQUIRE(!b.exact);
        const std::vector<std::tuple<const char*, double, double, double>> terms{
            {"beta2", a.beta2, b.beta2, b.beta2_se},
            {"beta3", a.beta3, b.beta3, b.beta3_se},
            {"tail_d2", a.tail_d2, b.tail_d2, b.tail_d2_se},
            {"d1bar_norm", a.d1_norm, b.d1_norm, b.d1_norm_se},
            {"exp_weighted_d2bar_sq", a.exp_weighted_d2_sq, b.exp_weighted_d2_sq, b.exp_weighted_d2_sq_se},
            {"loo_sum", a.loo_sum, b.loo_sum, b.loo_sum_se},
        };
        for (const auto& [name, exact, est, se] : terms) {
            INFO(model.name << " " << name << " exact=" << exact << " mc=" << est << " se=" << se);
            CHECK(std::abs(exact - est) <= 4 * se + 1e-12);
            ++pairs;
        }
    }
    CHECK(pairs >= 20);
}

TEST_CASE("DKW envelope: Monte Carlo KS around the exact value across seeds") {
    const auto model = models::self_normalized_sum(laws::uniform3(), 4);
    const auto exact = ks_distance(model, mc(1000), EstimatorMode::exact);
    const std::size_t reps = 2000;
    const double eps = dkw_epsilon(reps, 0.001);
    CHECK(eps == Approx(std::sqrt(std::log(2000.0) / 4000.0)));
    int inside = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        if (std::abs(ks_distance(model, mc(reps, seed), EstimatorMode::monte_carlo).distance - exact.distance) <= eps) ++inside;
    CHECK(inside == 50);
}

TEST_CASE("RCI: empty event gives lhs = 0") {
    const std::vector<DiscreteDistribution> xi(3, laws::symmetric_sign(3));
    for (const auto& lam : {Rational(0), Rational(1, 2), Rational(1)}) {
        const auto r = rci_check(rci_with_defaults("empty", xi, DeltaSpec::constant(10), DeltaSpec::constant(20), lam));
        CHECK(r.lhs == 0);
        CHECK(r.ok);
    }
}

TEST_CASE("RCI: defaults on three +-1/sqrt(3) summands, lambda = 1/2") {
    const std::vector<DiscreteDistribution> xi(3, laws::symmetric_sign(3));
    const auto inst = rci_with_defaults("sign3", xi, DeltaSpec::constant(Rational(-1, 2)), DeltaSpec::constant(Rational(1, 2)),
                                        Rational(1, 2));
    // beta_2 = 0, beta_3 = 1/sqrt(3), so delta = 1/(4 sqrt 3) and c_2 = 1/4 is attained exactly
    CHECK(inst.delta.to_high_prec().convert_to<double>() == Approx(1 / (4 * std::sqrt(3.0))).epsilon(1e-15));
    CHECK(rci_c2_functional(xi, inst.delta) == ExactReal(Rational(1, 4)));
    const auto r = rci_check(inst);
    CHECK(r.ok);
    CHECK(r.lhs == 0);  // W_b takes the values +-1/sqrt(3), +-sqrt(3)
    // sqrt(E e^{W_b}) exp(-c2^2 / (16 c1 delta^2)) = cosh(1/sqrt 3)^{3/2} e^{-3/16}
    const double g = std::pow(std::cosh(1 / std::sqrt(3.0)), 1.5) * std::exp(-3.0 / 16.0);
    CHECK(r.gaussian_term.convert_to<double>() == Approx(g).epsilon(1e-14));

    auto wide = inst;
    wide.delta1 = DeltaSpec::constant(Rational(-3, 5));
    wide.delta2 = DeltaSpec::constant(Rational(3, 5));
    const auto w = rci_check(wide);
    const double lhs = 0.375 * (std::exp(0.5 / std::sqrt(3.0)) + std::exp(-0.5 / std::sqrt(3.0)));
    CHECK(w.lhs.convert_to<double>() == Approx(lhs).epsilon(1e-14));
    CHECK(w.ok);
    CHECK(w.loo_term == 0);  // constant endpoints have no leave-one-out change
}

TEST_CASE("RCI: Delta_2 = Delta_1 + |xi_1| with leave-one-out endpoints") {
    const std::vector<DiscreteDistribution> xi(3, laws::symmetric_sign(3));
    const auto inst = rci_with_defaults("abs", xi, DeltaSpec::constant(Rational(-3, 4)),
                                        DeltaSpec::abs_xi(Rational(-3, 4), 1, 0), Rational(1, 2));
    const auto r = rci_check(inst);
    CHECK(r.ok);
    CHECK(r.lhs > 0);
    // only i = 1 changes Delta_2: E[|xi_b,1| e^{W_b^(1)/2} |xi_1|] = (1/3) cosh(1/(2 sqrt 3))^2
    const double loo = std::pow(std::cosh(0.5 / std::sqrt(3.0)), 2) / 3;
    CHECK(r.loo_term.convert_to<double>() == Approx(loo).epsilon(1e-14));
}

TEST_CASE("RCI: instance validation") {
    const std::vector<DiscreteDistribution> xi(3, laws::symmetric_sign(3));
    auto base = rci_with_defaults("v", xi, DeltaSpec::constant(0), DeltaSpec::constant(1), Rational(1));
    auto bad = base;
    bad.delta = ExactReal(Rational(1, 2));
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    bad = base;
    bad.c1 = ExactReal(Rational(9, 10));
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    bad = base;
    bad.c2 = ExactReal(Rational(3, 10));
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    bad = base;
    bad.lambda = Rational(-1);
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    bad = base;
    bad.delta1 = DeltaSpec::abs_xi(0, 1, 5);
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    const std::vector<DiscreteDistribution> biased{DiscreteDistribution({{ExactReal(1), Rational(1, 2)}, {ExactReal(0), Rational(1, 2)}})};
    bad = base;
    bad.xi = biased;
    CHECK_THROWS_AS(validate_rci(bad), ContractViolation);
    CHECK_THROWS_AS(rci_with_defaults("half", std::vector<DiscreteDistribution>(2, laws::symmetric_sign(4)),
                                      DeltaSpec::constant(0), DeltaSpec::constant(1), Rational(0)),
                    ContractViolation);
}

TEST_CASE("RCI corpus spans the endpoint registry and the lambdas") {
    const auto corpus = rci_corpus(42);
    CHECK(corpus.size() >= 30);
    std::set<std::string> kinds;
    std::set<std::string> lambdas;
    for (const auto& r : corpus) {
        kinds.insert(r.delta1.kind_name());
        kinds.insert(r.delta2.kind_name());
        lambdas.insert(r.lambda.str());
        CHECK_NOTHROW(validate_rci(r));
        const auto j = r.to_json();
        CHECK(j["xi"].size() == r.xi.size());
    }
    CHECK(kinds.size() == 4);
    CHECK(lambdas.size() == 3);
}

TEST_CASE("Monte Carlo driver: identical output for any worker count and chunk layout") {
    auto fn = [](std::size_t rep, Xoshiro256& rng, std::span<double> row) {
        row[0] = rng.uniform();
        row[1] = standard_normal(rng) + static_cast<double>(rep % 3);
    };
    std::vector<double> k1, k4;
    auto c1 = mc(5000, 3, 1), c4 = mc(5000, 3, 4);
    const auto a = run_monte_carlo(c1, 2, fn, &k1, {0, 1});
    const auto b = run_monte_carlo(c4, 2, fn, &k4, {0, 1});
    CHECK(k1 == k4);
    for (std::size_t c = 0; c < 2; ++c) {
        CHECK(a.mean(c) == b.mean(c));
        CHECK(a.se(c) == b.se(c));
    }
    CHECK(a.mean(0) == Approx(0.5).margin(4 * a.se(0)));
    auto c5 = mc(5000, 4, 1);
    CHECK(run_monte_carlo(c5, 2, fn).mean(0) != a.mean(0));
    CHECK_THROWS_AS(run_monte_carlo(mc(999), 2, fn), ContractViolation);
}

TEST_CASE("report formats") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-INFINITY) == "-inf");
    CHECK(format_double(NAN) == "nan");
    CsvTable t({"name", "value", "count"});
    t.add({std::string("a,b"), 1.5, 3LL});
    t.add({std::string("say \"hi\""), 0.25, -1LL});
    std::ostringstream os;
    t.write(os);
    CHECK(os.str() == "name,value,count\n\"a,b\",1.5,3\n\"say \"\"hi\"\"\",0.25,-1\n");
    std::ostringstream log;
    write_jsonl(log, {{"x", 1, INFINITY, true, 0}, {"y", 0.5, 0.25, false, 0.01}});
    CHECK(log.str() == "{\"lhs\":1.0,\"name\":\"x\",\"ok\":true,\"rhs\":\"inf\",\"se\":0.0}\n"
                       "{\"lhs\":0.5,\"name\":\"y\",\"ok\":false,\"rhs\":0.25,\"se\":0.01}\n");
    const auto rt = records_table({{"s/c", 1, 2, true, 0}});
    std::ostringstream rs;
    rt.write(rs);
    CHECK(rs.str() == "name,lhs,rhs,ok,se\ns/c,1,2,1,0\n");
}

TEST_CASE("small scaling run") {
    const auto kern = make_kernel("mean", 1);
    const auto st = scaling_study(kern, laws::uniform3(), {25, 50}, 4000, 9, 1);
    REQUIRE(st.rows.size() == 2);
    const auto mom = moment_report(hoeffding(kern.centered(Rational(0)), laws::uniform3()));
    for (const auto& r : st.rows) {
        CHECK(r.bound == Approx(be_bound_ustat(mom, r.n, 1)));
        CHECK(r.ratio == Approx(r.ks_tn / r.bound));
        CHECK(r.sqrt_n_ks == Approx(std::sqrt(static_cast<double>(r.n)) * r.ks_tn));
        CHECK(r.dkw == Approx(std::sqrt(std::log(2000.0) / 8000.0)));
        CHECK(r.ks_tn > 0);
        CHECK(r.ks_tn < 0.2);
        // m = 1: b_n = 1 / (n - 1) and the bridging right side is tiny
        CHECK(r.bridging < 0.1);
    }
    const auto par = scaling_study(kern, laws::uniform3(), {25, 50}, 4000, 9, 3);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(par.rows[k].ks_tn == st.rows[k].ks_tn);
        CHECK(par.rows[k].ks_tn_star == st.rows[k].ks_tn_star);
    }
    const auto v = judge_scaling(st, 3.0, 2.0);
    CHECK(v.spread >= 1.0);
}

TEST_CASE("suites: records are named by suite and run_all is seed-deterministic") {
    SuiteOptions o;
    o.action = "statistic";
    o.n = 12;
    const auto a = ustat_suite(o);
    const auto b = ustat_suite(o);
    REQUIRE(a.table);
    std::ostringstream sa, sb;
    a.table->write(sa);
    b.table->write(sb);
    CHECK(sa.str() == sb.str());
    CHECK(a.ok());
    CHECK(a.records.front().name.rfind("ustat-statistic/", 0) == 0);
    o.action = "nonsense";
    CHECK_THROWS_AS(ustat_suite(o), ContractViolation);
    SuiteOptions bm;
    bm.model = "nope";
    CHECK_THROWS_AS(bound_suite(bm), ContractViolation);
}

TEST_CASE("bound suite: one row per term with value and SE") {
    SuiteOptions o;
    o.model = "placeholder_zero";
    o.n = 8;
    o.estimator = "exact";
    const auto s = bound_suite(o);
    REQUIRE(s.table);
    CHECK(s.table->header() == std::vector<std::string>{"model", "n", "term", "value", "se", "exact"});
    CHECK(s.table->size() >= 18);
    CHECK(s.ok());
}
