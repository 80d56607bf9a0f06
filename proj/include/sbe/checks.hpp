#pragma once

// Verification suites shared by the command line tool and the acceptance
// program. Each suite returns its check records and, where a suite produces a
// table of estimates (bound, scaling-study, ustat statistic/bound), that table.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sbe/censoring.hpp"
#include "sbe/combinatorics.hpp"
#include "sbe/config.hpp"
#include "sbe/distribution.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/errors.hpp"
#include "sbe/hoeffding.hpp"
#include "sbe/kernels.hpp"
#include "sbe/nonlinear_stat.hpp"
#include "sbe/random.hpp"
#include "sbe/rci.hpp"
#include "sbe/report.hpp"
#include "sbe/scaling.hpp"
#include "sbe/stein_kernel.hpp"
#include "sbe/u_stat.hpp"
#include "sbe/ustat_lemmas.hpp"

namespace sbe {

struct SuiteOptions {
    std::uint64_t seed = 42;
    std::size_t reps = 0;            // 0: the suite's default
    std::size_t n = 0;               // 0: the suite's default
    std::size_t m = 0;               // 0: the kernel's default degree
    std::string kernel;              // empty: the suite's default
    std::vector<DiscreteDistribution> dists;  // empty: built-in corpus
    double grid_max = 0;
    std::uint64_t cap = 2'000'000;
    std::size_t workers = 1;
    std::string model = "tn_star";
    std::string action = "decomposition";
    std::string estimator = "auto";  // auto, exact, mc
    std::vector<std::size_t> n_grid; // empty: configured scaling grid
    VerificationConfig cfg = default_config();
};

struct SuiteResult {
    std::string name;
    std::vector<CheckRecord> records;
    std::optional<CsvTable> table;

    bool ok() const {
        return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.ok; });
    }
    void add(std::string check, double lhs, double rhs, bool pass, double se = 0) {
        records.push_back({name + "/" + std::move(check), lhs, rhs, pass, se});
    }
};

inline CsvTable records_table(const std::vector<CheckRecord>& records) {
    CsvTable t({"name", "lhs", "rhs", "ok", "se"});
    for (const auto& r : records) t.add({r.name, r.lhs, r.rhs, static_cast<long long>(r.ok), r.se});
    return t;
}

namespace detail {

inline double to_d(const ExactReal& v) { return v.to_high_prec().convert_to<double>(); }

inline std::size_t pick(std::size_t v, std::size_t fallback) { return v == 0 ? fallback : v; }

inline DiscreteDistribution skewed_law() {
    return DiscreteDistribution({{ExactReal(-1), Rational(1, 4)}, {ExactReal(1), Rational(1, 2)}, {ExactReal(3), Rational(1, 4)}},
                                "{-1:1/4,1:1/2,3:1/4}");
}

inline DiscreteDistribution first_law(const SuiteOptions& o) { return o.dists.empty() ? laws::uniform3() : o.dists.front(); }

inline std::vector<std::size_t> draw_atoms(Xoshiro256& rng, const DiscreteDistribution& law, std::size_t n) {
    std::vector<std::size_t> idx(n);
    for (auto& a : idx) a = law.draw_index(rng.uniform());
    return idx;
}

inline DiscreteDistribution components_law(const HoeffdingComponents& c) {
    std::vector<Atom> atoms;
    for (std::size_t a = 0; a < c.atoms; ++a) atoms.push_back({ExactReal(c.values[a]), c.probs[a]});
    return DiscreteDistribution(atoms, "components");
}

struct NamedComponents {
    std::string label;
    HoeffdingComponents comps;
};

}  // namespace detail

// ---------------------------------------------------------------------------

inline SuiteResult verify_stein(const SuiteOptions& o) {
    SuiteResult s{"verify-stein", {}, {}};
    const auto res = scan_stein_residual(o.cfg);
    s.add("stein_residual", res.max_abs, o.cfg.stein_residual_tol, res.max_abs <= o.cfg.stein_residual_tol);
    const auto uni = check_uniform_bounds(o.cfg);
    s.add("helping_unif", uni.max_excess, o.cfg.stein_bound_slack, uni.ok());
    const auto non = check_nonuniform_bounds(o.cfg);
    s.add("helping_nonuniform", non.max_excess, o.cfg.stein_bound_slack, non.ok());
    const auto der = check_derivative_consistency(o.cfg);
    s.add("derivative_consistency", der.max_excess, o.cfg.fd_tol, der.ok());
    return s;
}

inline SuiteResult verify_censoring(const SuiteOptions& o) {
    SuiteResult s{"verify-censoring", {}, {}};
    Xoshiro256 rng(o.seed);

    std::size_t bad = 0;
    for (int k = 0; k < 100000; ++k) {
        double a = (rng.uniform() - 0.5) * 8, b = (rng.uniform() - 0.5) * 8;
        if (a > b) std::swap(a, b);
        if (k % 10 == 0) a = -INFINITY;
        if (k % 15 == 0) b = INFINITY;
        const CensorInterval iv(a, b);
        const double y = (rng.uniform() - 0.5) * 20, z = (rng.uniform() - 0.5) * 20;
        if (!(std::abs(censor(y, iv) - censor(z, iv)) <= std::abs(y - z))) ++bad;
        if (censor(censor(y, iv), iv) != censor(y, iv)) ++bad;
    }
    s.add("contraction_failures", static_cast<double>(bad), 0, bad == 0);
    // truncation at 1/2 moves 0.49 and 0.51 apart
    const double gap = std::abs(truncate_remainder(0.49) - truncate_remainder(0.51));
    s.add("truncation_not_contraction", gap, 0.02, gap > 0.02);

    std::vector<DiscreteDistribution> single = o.dists;
    if (single.empty())
        for (int k = 0; k < 60; ++k) single.push_back(random_mean_zero_law(rng, 2 + k % 4, Rational(2)));
    for (std::size_t k = 0; k < single.size(); ++k) {
        const auto c = censored_mean_bound_check(single[k]);
        s.add("exp_xi_bi_bdd[" + std::to_string(k) + "]", detail::to_d(c.lhs), detail::to_d(c.rhs), c.ok);
    }

    std::vector<std::vector<DiscreteDistribution>> configs;
    if (!o.dists.empty()) {
        // rescaled to sum E xi^2 = 1 when the file's laws exceed it
        ExactReal second;
        for (const auto& d : o.dists) second += d.second_moment();
        auto cfg = o.dists;
        if (second > ExactReal(1)) {
            const ExactReal c = ExactReal::surd(1, Rational(1) / second.to_rational());
            for (auto& d : cfg) d = d.scaled(c);
        }
        configs.push_back(std::move(cfg));
    } else {
        for (int k = 0; k < 60; ++k) {
            const int laws = 1 + k % 4;
            std::vector<DiscreteDistribution> cfg;
            for (int j = 0; j < laws; ++j) cfg.push_back(random_mean_zero_law(rng, 2 + (k + j) % 3, Rational(1, laws)));
            configs.push_back(std::move(cfg));
        }
    }
    for (std::size_t k = 0; k < configs.size(); ++k) {
        for (int t10 = 1; t10 <= 20; ++t10) {
            const auto b = bennett_mgf_check(configs[k], t10 / 10.0, o.cap);
            s.add("bennett[" + std::to_string(k) + "] t=" + format_double(t10 / 10.0), b.lhs, b.rhs, b.ok);
        }
        s.add("beta_split[" + std::to_string(k) + "]", 0, 0, beta_split_check(configs[k]));
    }
    return s;
}

inline SuiteResult verify_combinatorics(const SuiteOptions&) {
    SuiteResult s{"verify-combinatorics", {}, CsvTable({"sweep", "cases", "failures"})};
    for (const auto& r : combinatorics_sweeps()) {
        s.add(r.name, static_cast<double>(r.failures), 0, r.ok());
        s.table->add({r.name, static_cast<long long>(r.cases), static_cast<long long>(r.failures)});
    }
    return s;
}

// ---------------------------------------------------------------------------
// ustat

namespace detail {

inline std::vector<NamedComponents> decomposition_corpus(const SuiteOptions& o) {
    std::vector<NamedComponents> out;
    if (!o.kernel.empty()) {
        const auto law = first_law(o);
        const auto k = make_kernel(o.kernel, o.m);
        out.push_back({k.name() + " on " + law.name(), hoeffding(k.centered(kernel_mean(k, law)), law)});
        return out;
    }
    const auto skew = skewed_law();
    out.push_back({"mean on " + skew.name(), centered_hoeffding(MeanKernel{1}, skew)});
    out.push_back({"variance on uniform{-1,0,1}", centered_hoeffding(VarianceKernel{}, laws::uniform3())});
    out.push_back({"kendall-sign on uniform{-1,0,1}", centered_hoeffding(KendallSignKernel{}, laws::uniform3())});
    out.push_back({"product3 on " + skew.name(), centered_hoeffding(ProductKernel{3}, skew)});
    return out;
}

inline std::vector<NamedComponents> lemma_corpus() {
    const auto skew = skewed_law();
    std::vector<NamedComponents> out;
    out.push_back({"variance on uniform{-1,0,1}", centered_hoeffding(VarianceKernel{}, laws::uniform3())});
    out.push_back({"kendall-sign on uniform{-1,0,1}", centered_hoeffding(KendallSignKernel{}, laws::uniform3())});
    out.push_back({"variance on " + skew.name(), centered_hoeffding(VarianceKernel{}, skew)});
    out.push_back({"product3 on " + skew.name(), centered_hoeffding(ProductKernel{3}, skew)});
    return out;
}

}  // namespace detail

inline void ustat_decomposition(const SuiteOptions& o, SuiteResult& s) {
    Xoshiro256 rng(o.seed);
    const auto corpus = detail::decomposition_corpus(o);
    double max_w = 0, max_s = 0;
    std::size_t cauchy_bad = 0;
    const std::size_t samples = detail::pick(o.reps, 10000);
    for (std::size_t rep = 0; rep < samples; ++rep) {
        const auto& c = corpus[rep % corpus.size()].comps;
        const std::size_t n = o.n ? o.n : 2 * c.m + 1 + rng.below(6);
        const auto law = detail::components_law(c);
        const auto r = decompose_sample(c, detail::draw_atoms(rng, law, n), false);
        max_w = std::max(max_w, r.w_plus_d1_residual);
        max_s = std::max(max_s, r.s_star_residual);
        if (!wpsi_cauchy_check(r)) ++cauchy_bad;
    }
    const double tol = o.cfg.identity_rel_tol;
    s.add("s_star_re_expr_max_rel_residual", max_s, tol, max_s <= tol);
    s.add("W_plus_D1_max_rel_residual", max_w, tol, max_w <= tol);
    s.add("wpsi_cauchy_failures", static_cast<double>(cauchy_bad), 0, cauchy_bad == 0);

    // exact event equivalence on every atom of n = 6, m = 2, variance kernel on uniform{-1,0,1}
    const auto kern = Centered<VarianceKernel>(VarianceKernel{}, Rational(2, 3));
    std::vector<Rational> xs;
    for (int k = -20; k <= 20; ++k) xs.emplace_back(k, 5);
    const std::vector<DiscreteDistribution> d(6, laws::uniform3());
    std::size_t cases = 0, mismatches = 0;
    for_each_outcome(d, o.cap, [&](const std::vector<std::size_t>& idx, const Rational&) {
        std::vector<Rational> data(6);
        for (std::size_t i = 0; i < 6; ++i) data[i] = Rational(static_cast<long long>(idx[i]) - 1);
        const auto ex = exact_studentized(kern, data);
        for (const auto& x : xs) {
            ++cases;
            if (!event_equivalence_exact(ex, 6, 2, x)) ++mismatches;
        }
    });
    s.add("relationship_exact_n6_m2_mismatches", static_cast<double>(mismatches), 0, mismatches == 0 && cases == 729 * 41);
}

inline void ustat_statistic(const SuiteOptions& o, SuiteResult& s) {
    const auto law = detail::first_law(o);
    const auto k = make_kernel(o.kernel.empty() ? "variance" : o.kernel, o.m);
    const auto centered = k.centered(kernel_mean(k, law));
    const std::size_t n = detail::pick(o.n, 10);
    detail::require_n_gt_m(n, k.degree());
    auto rng = Xoshiro256::substream(o.seed, 0);
    std::vector<double> data(n);
    for (auto& x : data) x = draw(law, rng);
    const auto jk = jackknife(centered, data, o.cfg.kernel_call_cap);
    const auto t = studentized(centered, data, o.cfg.kernel_call_cap);
    s.table = CsvTable({"kernel", "law", "n", "m", "U", "s2", "s2_star", "T", "T_star"});
    s.table->add({k.name(), law.name(), static_cast<long long>(n), static_cast<long long>(k.degree()), jk.U, jk.s2,
                  jk.s2_star, t.T, t.T_star});
    std::vector<double> xs;
    for (int j = -20; j <= 20; ++j) xs.push_back(j / 5.0);
    s.add("relationship_on_sample", 0, 0, event_equivalence_check(xs, n, k.degree(), t.T, t.T_star));
}

inline void ustat_bound(const SuiteOptions& o, SuiteResult& s) {
    const auto law = detail::first_law(o);
    const auto k = make_kernel(o.kernel.empty() ? "variance" : o.kernel, o.m);
    const auto comps = hoeffding(k.centered(kernel_mean(k, law)), law);
    const auto mom = moment_report(comps);
    const std::size_t n = detail::pick(o.n, 10), m = k.degree();
    const double bound = be_bound_ustat(mom, n, m);
    s.table = CsvTable({"kernel", "law", "n", "m", "raw_sigma_g2", "raw_Eh2", "E_abs_g3", "E_h2", "g3_norm", "h3_norm",
                        "bound", "bridging_sup"});
    s.table->add({k.name(), law.name(), static_cast<long long>(n), static_cast<long long>(m), mom.raw_sigma_g2.str(),
                  mom.raw_Eh2.str(), mom.E_abs_g3, mom.E_h2, mom.g3_norm, mom.h3_norm, bound, bridging_sup(n, m)});
    s.add("jensen_monotone", 0, 0, mom.jensen_ok);
    s.add("extract_extra_m", static_cast<double>(m) * static_cast<double>(mom.raw_sigma_g2), static_cast<double>(mom.raw_Eh2),
          mom.extract_extra_m_ok);
}

/// Every lemma is calibrated on two corpora that differ in n (7, 9 against
/// 8, 10); case (i) does not depend on n, so its corpora split the kernels.
inline void ustat_lemma_check(const SuiteOptions& o, SuiteResult& s) {
    const auto corpus = detail::lemma_corpus();
    const std::vector<std::size_t> na{7, 9}, nb{8, 10};
    struct Entry {
        LemmaCheck check;
        char corpus;
        std::string label;
    };
    std::vector<Entry> entries;
    auto push = [&](const std::vector<LemmaCheck>& v, char which, const std::string& label) {
        for (const auto& c : v) entries.push_back({c, which, label});
    };
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        const auto& c = corpus[k].comps;
        push(kernel_bound_case_i(c), k % 2 == 0 ? 'A' : 'B', corpus[k].label);
        for (char which : {'A', 'B'})
            for (std::size_t n : which == 'A' ? na : nb) {
                push({kernel_bound_case_ii(c, n)}, which, corpus[k].label);
                push(kernel_bound_case_iii_iv(c, n, false), which, corpus[k].label);
                push(kernel_bound_case_iii_iv(c, n, true), which, corpus[k].label);
                push(d1_bound_check(c, n), which, corpus[k].label);
                push(pi2_bound_check(c, n, Pi2Variant::with_rootn, o.cap), which, corpus[k].label);
                push(pi2_bound_check(c, n, Pi2Variant::without, o.cap), which, corpus[k].label);
            }
    }
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> ratios;
    std::map<std::string, std::size_t> explicit_bad;
    for (const auto& e : entries) {
        auto& r = ratios[e.check.name];
        (e.corpus == 'A' ? r.first : r.second).push_back(e.check.ratio());
        explicit_bad[e.check.name] += e.check.ok ? 0 : 1;
    }
    s.table = CsvTable({"lemma", "kernel", "detail", "corpus", "lhs", "rhs", "ratio", "c_hat", "within"});
    std::map<std::string, Calibration> cals;
    for (const auto& [name, r] : ratios) {
        const auto cal = calibrate(name, r.first, r.second, o.cfg.calibration_headroom);
        cals[name] = cal;
        double top = 0;
        for (double v : r.first) top = std::max(top, v);
        for (double v : r.second) top = std::max(top, v);
        s.add(name + "/c_hat", top, cal.c_hat, cal.failures == 0 && cal.cases > 0);
        s.add(name + "/drift", cal.drift, o.cfg.max_calibration_drift, cal.drift < o.cfg.max_calibration_drift);
        s.add(name + "/explicit_constant_failures", static_cast<double>(explicit_bad[name]), 0, explicit_bad[name] == 0);
    }
    for (const auto& e : entries) {
        const double ch = cals[e.check.name].c_hat;
        s.table->add({e.check.name, e.label, e.check.detail, std::string(1, e.corpus), e.check.lhs, e.check.rhs,
                      e.check.ratio(), ch, static_cast<long long>(e.check.lhs <= e.check.rhs * ch)});
    }
}

inline SuiteResult ustat_suite(const SuiteOptions& o) {
    SuiteResult s{"ustat-" + o.action, {}, {}};
    if (o.action == "statistic") ustat_statistic(o, s);
    else if (o.action == "bound") ustat_bound(o, s);
    else if (o.action == "decomposition") ustat_decomposition(o, s);
    else if (o.action == "lemma-check") ustat_lemma_check(o, s);
    else throw ContractViolation("unknown ustat action '" + o.action + "'");
    return s;
}

// ---------------------------------------------------------------------------
// rci

/// Instances with the default parameters on symmetric sign laws, the
/// registry's sample-dependent endpoints, and random laws with explicit
/// delta, c1 = sum E xi^2 and c2 = sum E|xi| min(delta, |xi|/2).
inline std::vector<RciInstance> rci_corpus(std::uint64_t seed) {
    std::vector<RciInstance> out;
    const std::vector<Rational> lambdas{Rational(0), Rational(1, 2), Rational(1)};
    const auto half = Rational(1, 2), quarter = Rational(1, 4);
    for (const auto& lam : lambdas) {
        const std::string tag = " lambda=" + lam.str();
        const std::vector<DiscreteDistribution> s3(3, laws::symmetric_sign(3));
        out.push_back(rci_with_defaults("sign3 const" + tag, s3, DeltaSpec::constant(-half), DeltaSpec::constant(half), lam));
        out.push_back(rci_with_defaults("sign3 empty" + tag, s3, DeltaSpec::constant(10), DeltaSpec::constant(20), lam));
        out.push_back(rci_with_defaults("sign3 abs_xi" + tag, s3, DeltaSpec::constant(Rational(-3, 4)),
                                        DeltaSpec::abs_xi(Rational(-3, 4), 1, 0), lam));
        const std::vector<DiscreteDistribution> s4(4, laws::symmetric_sign(4));
        out.push_back(rci_with_defaults("sign4 w_b" + tag, s4, DeltaSpec::w_b(-quarter, half), DeltaSpec::w_b(quarter, half), lam));
        const std::vector<DiscreteDistribution> s2(2, laws::symmetric_sign(2));
        out.push_back(rci_with_defaults("sign2 sum_abs" + tag, s2, DeltaSpec::constant(0), DeltaSpec::sum_abs_xi(0, half), lam));
    }
    Xoshiro256 rng(seed);
    const std::vector<Rational> deltas{Rational(1, 8), Rational(1, 5), Rational(3, 10)};
    for (int k = 0; k < 6; ++k) {
        const std::size_t n = 2 + k % 3;
        std::vector<DiscreteDistribution> xi;
        for (std::size_t i = 0; i < n; ++i)
            xi.push_back(random_mean_zero_law(rng, 2 + (k + i) % 3, Rational(1, static_cast<long long>(n))));
        ExactReal second;
        for (const auto& d : xi) second += d.second_moment();
        const Rational a(static_cast<long long>(rng.below(9)) - 4, 8);
        for (const auto& lam : lambdas) {
            RciInstance r;
            r.name = "random" + std::to_string(k) + " lambda=" + lam.str();
            r.xi = xi;
            r.lambda = lam;
            r.delta = ExactReal(deltas[k % 3]);
            r.c1 = second;
            r.c2 = rci_c2_functional(xi, r.delta);
            switch (k % 4) {
                case 0: r.delta1 = DeltaSpec::constant(a); r.delta2 = DeltaSpec::constant(a + 1); break;
                case 1: r.delta1 = DeltaSpec::constant(a); r.delta2 = DeltaSpec::abs_xi(a, 2, n - 1); break;
                case 2: r.delta1 = DeltaSpec::w_b(a, half); r.delta2 = DeltaSpec::w_b(a + half, half); break;
                default: r.delta1 = DeltaSpec::sum_abs_xi(a, -quarter); r.delta2 = DeltaSpec::sum_abs_xi(a, quarter); break;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

/// Instances built from user laws: constant window [-1/2, 1/2] and the three
/// lambdas, with the defaults when they are admissible and delta = 1/8,
/// c1 = sum E xi^2, c2 = sum E|xi| min(delta, |xi|/2) otherwise.
inline std::vector<RciInstance> rci_from_laws(const std::vector<DiscreteDistribution>& xi) {
    std::vector<RciInstance> out;
    ExactReal second;
    for (const auto& d : xi) second += d.second_moment();
    for (const auto& lam : {Rational(0), Rational(1, 2), Rational(1)}) {
        const auto d1 = DeltaSpec::constant(Rational(-1, 2)), d2 = DeltaSpec::constant(Rational(1, 2));
        if (second == ExactReal(1)) {
            auto r = rci_with_defaults("user lambda=" + lam.str(), xi, d1, d2, lam);
            try {
                validate_rci(r);
                out.push_back(std::move(r));
                continue;
            } catch (const ContractViolation&) {
            }
        }
        RciInstance r;
        r.name = "user lambda=" + lam.str();
        r.xi = xi;
        r.delta1 = d1;
        r.delta2 = d2;
        r.lambda = lam;
        r.delta = ExactReal(Rational(1, 8));
        r.c1 = second;
        r.c2 = rci_c2_functional(xi, r.delta);
        out.push_back(std::move(r));
    }
    return out;
}

inline SuiteResult rci_suite(const SuiteOptions& o) {
    SuiteResult s{"rci", {}, {}};
    const auto corpus = o.dists.empty() ? rci_corpus(o.seed) : rci_from_laws(o.dists);
    for (const auto& inst : corpus) {
        const auto r = rci_check(inst, o.cap);
        s.add(inst.name, r.lhs.convert_to<double>(), r.rhs.convert_to<double>(), r.ok);
    }
    return s;
}

// ---------------------------------------------------------------------------
// bound

inline NonlinearStatisticModel model_by_name(const SuiteOptions& o) {
    const std::size_t n = detail::pick(o.n, 10);
    const auto law = detail::first_law(o);
    if (o.model == "zero_remainder") return models::zero_remainder(law, n);
    if (o.model == "self_normalized_sum") return models::self_normalized_sum(law, n);
    for (auto f : {models::UStatForm::tn, models::UStatForm::tn_star, models::UStatForm::placeholder_rootn,
                   models::UStatForm::placeholder_zero}) {
        if (o.model != models::to_string(f)) continue;
        const auto k = make_kernel(o.kernel.empty() ? "variance" : o.kernel, o.m);
        const auto comps = hoeffding(k.centered(kernel_mean(k, law)), law);
        return models::ustat(comps, n, f, o.cfg.kernel_call_cap);
    }
    throw ContractViolation("unknown model '" + o.model + "'");
}

inline EstimatorMode estimator_mode(const std::string& s) {
    if (s == "auto") return EstimatorMode::automatic;
    if (s == "exact") return EstimatorMode::exact;
    if (s == "mc") return EstimatorMode::monte_carlo;
    throw ContractViolation("unknown estimator '" + s + "'");
}

inline SuiteResult bound_suite(const SuiteOptions& o) {
    const auto model = model_by_name(o);
    SuiteResult s{"bound-" + model.name, {}, CsvTable({"model", "n", "term", "value", "se", "exact"})};
    MonteCarloConfig mc;
    mc.reps = detail::pick(o.reps, 20000);
    mc.seed = o.seed;
    mc.workers = o.workers;
    mc.min_reps = o.cfg.min_reps;
    mc.chunk_size = o.cfg.chunk_size;
    BoundOptions opt;
    opt.mode = estimator_mode(o.estimator);
    opt.grid_max = o.grid_max;
    opt.cap = o.cap;
    const auto r = bound_theorem_main(model, mc, opt, o.cfg);
    const auto ks = ks_distance(model, mc, opt.mode, o.cap);
    const long long ex = r.exact;
    auto row = [&](const std::string& term, double v, double se) {
        s.table->add({model.name, static_cast<long long>(model.n), term, v, se, ex});
    };
    row("beta2", r.beta2, r.beta2_se);
    row("beta3", r.beta3, r.beta3_se);
    row("tail_d1", r.tail_d1, r.tail_d1_se);
    row("tail_d2", r.tail_d2, r.tail_d2_se);
    row("d1bar_norm", r.d1_norm, r.d1_norm_se);
    row("exp_weighted_d2bar_sq", r.exp_weighted_d2_sq, r.exp_weighted_d2_sq_se);
    row("sup_x_term", r.sup_x_term, r.sup_x_term_se);
    row("sup_x_at", r.sup_x_at, 0);
    row("loo_sum", r.loo_sum, r.loo_sum_se);
    row("total_main", r.total_theorem1, r.total_theorem1_se);
    if (r.total_theorem2_brace) {
        row("sum_abs_xi3", r.sum_abs_xi3, r.sum_abs_xi3_se);
        row("d1_norm", r.d1_raw_norm, r.d1_raw_norm_se);
        row("pi2_norm", r.pi2_norm, r.pi2_norm_se);
        row("d1_loo", r.main2_d1_loo, r.main2_d1_loo_se);
        row("pi2_loo", r.main2_pi2_loo, r.main2_pi2_loo_se);
        row("total_main2", *r.total_theorem2_brace, 0);
    }
    row("ks_distance", ks.distance, ks.se);
    row("ks_at", ks.at, 0);
    s.add("total_main_finite", r.total_theorem1, 0, std::isfinite(r.total_theorem1), r.total_theorem1_se);
    s.add("ks_in_unit_interval", ks.distance, 1, ks.distance >= 0 && ks.distance <= 1, ks.se);
    return s;
}

// ---------------------------------------------------------------------------
// scaling study

inline CsvTable scaling_table(const ScalingStudy& st) {
    CsvTable t({"kernel", "law", "m", "n", "reps", "ks_tn", "ks_tn_se", "ks_tn_star", "ks_tn_star_se", "bound", "ratio",
                "sqrt_n_ks", "bridging", "dkw"});
    for (const auto& r : st.rows)
        t.add({st.kernel, st.law, static_cast<long long>(st.m), static_cast<long long>(r.n),
               static_cast<long long>(st.reps), r.ks_tn, r.ks_tn_se, r.ks_tn_star, r.ks_tn_star_se, r.bound, r.ratio,
               r.sqrt_n_ks, r.bridging, r.dkw});
    return t;
}

inline void add_scaling_records(SuiteResult& s, const ScalingStudy& st, const VerificationConfig& cfg) {
    const auto v = judge_scaling(st, cfg.scaling_max_spread, cfg.scaling_se_slack);
    const std::string tag = st.kernel + " m=" + std::to_string(st.m) + "/";
    s.add(tag + "sqrt_n_ks_spread", v.spread, cfg.scaling_max_spread, v.spread_ok);
    s.add(tag + "ks_monotone_violations", static_cast<double>(v.monotone_violations), 0, v.monotone_violations == 0);
    s.add(tag + "bridging", 0, 0, v.bridging_ok);
}

inline SuiteResult scaling_suite(const SuiteOptions& o) {
    SuiteResult s{"scaling-study", {}, {}};
    const auto law = detail::first_law(o);
    const auto k = make_kernel(o.kernel.empty() ? "mean" : o.kernel, o.m);
    const auto grid = o.n_grid.empty() ? o.cfg.scaling_n_grid : o.n_grid;
    const auto st = scaling_study(k, law, grid, detail::pick(o.reps, o.cfg.scaling_reps), o.seed, o.workers);
    s.table = scaling_table(st);
    add_scaling_records(s, st, o.cfg);
    return s;
}

// ---------------------------------------------------------------------------

/// Every suite at desk-scale sizes. Monte Carlo parts use `reps` (default
/// 20000) and the smaller grid {25, 50, 100}.
inline std::vector<SuiteResult> run_all(const SuiteOptions& o) {
    std::vector<SuiteResult> out;
    SuiteOptions base = o;
    base.dists.clear();
    base.kernel.clear();
    base.n = base.m = 0;
    out.push_back(verify_stein(base));
    out.push_back(verify_censoring(base));
    out.push_back(verify_combinatorics(base));
    SuiteOptions u = base;
    u.action = "decomposition";
    out.push_back(ustat_suite(u));
    u.action = "lemma-check";
    out.push_back(ustat_suite(u));
    out.push_back(rci_suite(base));
    SuiteOptions b = base;
    b.reps = detail::pick(o.reps, 20000);
    b.model = "tn_star";
    b.n = 10;
    b.estimator = "exact";
    out.push_back(bound_suite(b));
    b.model = "self_normalized_sum";
    b.n = 30;
    b.estimator = "mc";
    out.push_back(bound_suite(b));
    SuiteOptions sc = base;
    sc.reps = detail::pick(o.reps, 20000);
    sc.n_grid = {25, 50, 100};
    for (const char* kern : {"mean", "variance"}) {
        sc.kernel = kern;
        auto r = scaling_suite(sc);
        r.name += std::string("-") + kern;
        for (auto& rec : r.records) rec.name = r.name + rec.name.substr(rec.name.find('/'));
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace sbe
