#pragma once

// Studentized nonlinear statistics T_SN = (W_n + D_1n) / (1 + D_2n)^{1/2}
// with W_n = sum xi_i, the C-free right sides of the two general bounds, and
// the Kolmogorov distance of T_SN to the normal law.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sbe/censoring.hpp"
#include "sbe/config.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/errors.hpp"
#include "sbe/hoeffding.hpp"
#include "sbe/ks.hpp"
#include "sbe/monte_carlo.hpp"
#include "sbe/random.hpp"
#include "sbe/stein_kernel.hpp"
#include "sbe/u_stat.hpp"
#include "sbe/ustat_lemmas.hpp"

namespace sbe {

/// Remainders of one sample. The leave-one-out vectors have one entry per
/// index; entry i must not depend on X_i.
struct ModelEvaluation {
    double d1 = 0;
    double d2 = 0;
    std::vector<double> d1_loo;
    std::vector<double> d2_loo;
    double pi2 = 0;
    std::vector<double> pi2_loo;
};

struct NonlinearStatisticModel {
    std::string name;
    std::size_t n = 0;
    // one law per index, or a single law shared by all indices; empty when
    // only a sampler is available
    std::vector<DiscreteDistribution> laws;
    std::function<double(std::size_t, double)> xi;
    std::function<ModelEvaluation(std::span<const double>)> evaluate;
    // optional; defaults to independent draws from `laws`
    std::function<void(Xoshiro256&, std::span<double>)> sampler;
    // i.i.d. and evaluate() symmetric in its arguments
    bool symmetric = false;
    bool has_pi2 = false;

    const DiscreteDistribution& law(std::size_t i) const { return laws.size() == 1 ? laws[0] : laws.at(i); }
    bool discrete() const { return !laws.empty(); }

    std::vector<DiscreteDistribution> product_laws() const {
        if (!discrete()) throw ContractViolation("model " + name + " has no discrete law");
        std::vector<DiscreteDistribution> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(law(i));
        return out;
    }

    void draw_sample(Xoshiro256& rng, std::span<double> out) const {
        if (sampler) {
            sampler(rng, out);
            return;
        }
        if (!discrete()) throw ContractViolation("model " + name + " has neither a sampler nor a law");
        for (std::size_t i = 0; i < n; ++i) out[i] = draw(law(i), rng);
    }
};

/// Checks the summand assumptions on discrete laws: E xi_i = 0 and
/// sum E xi_i^2 = 1, both within `tol`. Sampler-only models are skipped.
inline void validate_model(const NonlinearStatisticModel& model, double tol = 1e-9) {
    if (model.n == 0) throw ContractViolation("model " + model.name + " has n = 0");
    if (!model.xi || !model.evaluate) throw ContractViolation("model " + model.name + " is missing xi or evaluate");
    if (!model.discrete()) return;
    if (model.laws.size() != 1 && model.laws.size() != model.n)
        throw ContractViolation("model " + model.name + " needs one law or one law per index");
    double second = 0;
    for (std::size_t i = 0; i < model.n; ++i) {
        const auto& d = model.law(i);
        KahanSum mean, sq;
        for (std::size_t a = 0; a < d.size(); ++a) {
            const double v = model.xi(i, d.values()[a]);
            mean.add(d.probs()[a] * v);
            sq.add(d.probs()[a] * v * v);
        }
        if (std::abs(mean.value()) > tol)
            throw ContractViolation("model " + model.name + ": E xi_" + std::to_string(i) + " = " +
                                    std::to_string(mean.value()));
        second += sq.value();
    }
    if (std::abs(second - 1) > tol)
        throw ContractViolation("model " + model.name + ": sum E xi^2 = " + std::to_string(second));
}

namespace detail {

inline double model_w(const NonlinearStatisticModel& model, std::span<const double> x) {
    double w = 0;
    for (std::size_t i = 0; i < model.n; ++i) w += model.xi(i, x[i]);
    return w;
}

inline void require_d2(const NonlinearStatisticModel& model, double d2) {
    if (d2 < -1 || std::isnan(d2))
        throw ContractViolation("model " + model.name + " returned D_2n = " + std::to_string(d2) + " < -1");
}

}  // namespace detail

/// T_SN for one sample; 0 / +inf / -inf when 1 + D_2n = 0.
inline double evaluate_tsn(const NonlinearStatisticModel& model, std::span<const double> sample) {
    if (sample.size() != model.n) throw ContractViolation("sample size differs from model n");
    const auto ev = model.evaluate(sample);
    detail::require_d2(model, ev.d2);
    return self_normalized_ratio(detail::model_w(model, sample) + ev.d1, 1.0 + ev.d2);
}

enum class EstimatorMode { automatic, monte_carlo, exact };

struct BoundOptions {
    EstimatorMode mode = EstimatorMode::automatic;
    std::size_t grid_density = 1;
    double grid_max = 0;                 // 0 keeps the configured log_max
    std::uint64_t cap = 2'000'000;       // enumeration cap for exact mode
    std::size_t loo_subsample = 0;       // 0: every index; otherwise evenly spaced indices
    bool use_exchangeable = true;        // exact mode on symmetric i.i.d. models
    bool skip_sup_x = false;
};

struct LooTerm {
    std::size_t i = 0;
    int j = 1;            // 1: numerator remainder, 2: denominator remainder
    double first = 0;     // E[xi_b,i^2] ||(1 + e^{W_b^(i)})(Dbar_j - Dbar_j^(i))||_1
    double second = 0;    // ||xi_b,i (1 + e^{W_b^(i)/2})(Dbar_j - Dbar_j^(i))||_1
    double first_se = 0;
    double second_se = 0;
};

/// Norms feeding the chains ||(1+e^{W_b^(i)})(Dbar_1 - Dbar_1^(i))||_1 <= C ||D_1 - D_1^(i)||_2 etc.
struct D1ChainTerm {
    std::size_t i = 0;
    double lhs_first = 0;   // ||(1+e^{W_b^(i)})(Dbar_1 - Dbar_1^(i))||_1
    double lhs_second = 0;  // ||xi_b,i (1+e^{W_b^(i)/2})(Dbar_1 - Dbar_1^(i))||_1
    double d1_diff_l2 = 0;  // ||D_1 - D_1^(i)||_2
    double xi_l2 = 0;       // ||xi_i||_2
};

struct BoundReport {
    std::string model;
    std::size_t n = 0;
    bool exact = false;
    std::size_t reps = 0;
    double beta2 = 0, beta3 = 0;
    double beta2_se = 0, beta3_se = 0;
    double d1_norm = 0, d1_norm_se = 0;                   // ||Dbar_1||_2
    double d1_raw_norm = 0;                               // ||D_1||_2
    double exp_weighted_d2_sq = 0, exp_weighted_d2_sq_se = 0;
    double sup_x_term = 0, sup_x_term_se = 0, sup_x_at = 0;
    std::vector<LooTerm> loo_terms;                       // evaluated indices only
    double loo_multiplier = 1;                            // n / (number of evaluated indices)
    double loo_sum = 0, loo_sum_se = 0;
    double tail_d1 = 0, tail_d2 = 0;                      // P(|D_jn| > 1/2)
    double tail_d1_se = 0, tail_d2_se = 0;
    double total_theorem1 = 0, total_theorem1_se = 0;     // multiplier 1 on the unknown constant
    std::optional<double> total_theorem2_brace;
    double sum_abs_xi3 = 0, sum_abs_xi3_se = 0;
    double d1_raw_norm_se = 0;
    double pi2_norm = 0, pi2_norm_se = 0;
    double main2_d1_loo = 0, main2_pi2_loo = 0;           // sum ||xi_i||_2 ||. - .^(i)||_2
    double main2_d1_loo_se = 0, main2_pi2_loo_se = 0;
    std::vector<D1ChainTerm> d1_chain;
};

namespace detail {

// column layout of one replicate row; W_b and Dbar_2 are also kept per
// replicate so the sup over x can be taken after the run
struct BoundLayout {
    static constexpr std::size_t tail1 = 0, tail2 = 1, beta2 = 2, beta3 = 3, d1bar_sq = 4, exp_d2 = 5, d1_sq = 6,
                                 abs_xi3 = 7, pi2_sq = 8, wb = 9, d2bar = 10, loo_lin = 11, fixed = 12;
    static constexpr std::size_t per_i = 8;  // xib2, xi2, a1, b1, a2, b2, d1diff2, pi2diff2
    std::size_t loo_count = 0;
    std::size_t width() const { return fixed + per_i * loo_count; }
    std::size_t loo_col(std::size_t k, std::size_t slot) const { return fixed + per_i * k + slot; }
};

inline std::vector<std::size_t> loo_indices(std::size_t n, std::size_t subsample) {
    std::vector<std::size_t> out;
    if (subsample == 0 || subsample >= n) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(i);
        return out;
    }
    for (std::size_t k = 0; k < subsample; ++k) out.push_back(k * n / subsample);
    return out;
}

// loo_lin holds sum_k sum_j (c_k a_kj + b_kj) with c_k = E[xi_b,i^2] known in
// advance, so its standard error carries the covariance across indices.
inline void fill_bound_row(const NonlinearStatisticModel& model, std::span<const double> x,
                           const std::vector<std::size_t>& idx, const std::vector<double>& c,
                           const BoundLayout& L, std::span<double> row, std::vector<double>& xi,
                           std::vector<double>& xib) {
    const std::size_t n = model.n;
    const auto ev = model.evaluate(x);
    require_d2(model, ev.d2);
    if (ev.d1_loo.size() != n || ev.d2_loo.size() != n)
        throw ContractViolation("model " + model.name + " did not supply leave-one-out remainders");
    if (model.has_pi2 && ev.pi2_loo.size() != n)
        throw ContractViolation("model " + model.name + " did not supply leave-one-out Pi_2");
    double wb = 0, b2 = 0, b3 = 0, a3 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xi[i] = model.xi(i, x[i]);
        xib[i] = censor_xi(xi[i]);
        wb += xib[i];
        const double a = std::abs(xi[i]);
        if (a > 1) b2 += xi[i] * xi[i];
        else b3 += a * a * a;
        a3 += a * a * a;
    }
    const double d1b = censor_remainder(ev.d1), d2b = censor_remainder(ev.d2);
    row[L.tail1] = std::abs(ev.d1) > 0.5 ? 1.0 : 0.0;
    row[L.tail2] = std::abs(ev.d2) > 0.5 ? 1.0 : 0.0;
    row[L.beta2] = b2;
    row[L.beta3] = b3;
    row[L.d1bar_sq] = d1b * d1b;
    row[L.exp_d2] = (1 + std::exp(wb)) * d2b * d2b;
    row[L.d1_sq] = ev.d1 * ev.d1;
    row[L.abs_xi3] = a3;
    row[L.pi2_sq] = model.has_pi2 ? ev.pi2 * ev.pi2 : 0.0;
    row[L.wb] = wb;
    row[L.d2bar] = d2b;
    row[L.loo_lin] = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const std::size_t i = idx[k];
        const double wi = wb - xib[i];
        const double e1 = 1 + std::exp(wi), e2 = 1 + std::exp(wi / 2);
        const double dd1 = d1b - censor_remainder(ev.d1_loo[i]);
        const double dd2 = d2b - censor_remainder(ev.d2_loo[i]);
        row[L.loo_col(k, 0)] = xib[i] * xib[i];
        row[L.loo_col(k, 1)] = xi[i] * xi[i];
        row[L.loo_col(k, 2)] = std::abs(e1 * dd1);
        row[L.loo_col(k, 3)] = std::abs(xib[i] * e2 * dd1);
        row[L.loo_col(k, 4)] = std::abs(e1 * dd2);
        row[L.loo_col(k, 5)] = std::abs(xib[i] * e2 * dd2);
        if (!c.empty())
            row[L.loo_lin] += c[k] * (row[L.loo_col(k, 2)] + row[L.loo_col(k, 4)]) + row[L.loo_col(k, 3)] +
                              row[L.loo_col(k, 5)];
        const double raw = ev.d1 - ev.d1_loo[i];
        row[L.loo_col(k, 6)] = raw * raw;
        const double p = model.has_pi2 ? ev.pi2 - ev.pi2_loo[i] : 0.0;
        row[L.loo_col(k, 7)] = p * p;
    }
}

inline std::uint64_t exchangeable_points(std::size_t atoms, std::size_t n) {
    long double count = 1;
    for (std::size_t j = 1; j < atoms; ++j) count = count * static_cast<long double>(n - 1 + j) / static_cast<long double>(j);
    return static_cast<std::uint64_t>(std::min<long double>(count * atoms, 1e19L));
}

inline std::uint64_t product_points(const NonlinearStatisticModel& model) {
    long double count = 1;
    for (std::size_t i = 0; i < model.n; ++i) count *= static_cast<long double>(model.law(i).size());
    return static_cast<std::uint64_t>(std::min<long double>(count, 1e19L));
}

inline bool use_exact(const NonlinearStatisticModel& model, const BoundOptions& opt, bool exchangeable) {
    if (opt.mode == EstimatorMode::monte_carlo) return false;
    if (!model.discrete()) {
        if (opt.mode == EstimatorMode::exact)
            throw ContractViolation("exact mode needs a discrete model, " + model.name + " has none");
        return false;
    }
    const std::uint64_t size = exchangeable ? exchangeable_points(model.law(0).size(), model.n) : product_points(model);
    if (opt.mode == EstimatorMode::exact) {
        if (size > opt.cap)
            throw CapExceeded("exact evaluation of " + model.name + " needs " + std::to_string(size) + " points");
        return true;
    }
    return size <= opt.cap;
}

// Runs row(sample, out) over the model's law, exactly or by Monte Carlo.
// Columns `keep_cols` of every visited point are appended row-major to
// `keep`, and in exact mode the point weights to `weights`.
template <class Row>
MomentAccumulator expectation_rows(const NonlinearStatisticModel& model, const MonteCarloConfig& mc, bool exact,
                                   bool exchangeable, std::uint64_t cap, std::size_t width, Row&& row,
                                   std::vector<double>* keep = nullptr, std::vector<double>* weights = nullptr,
                                   std::vector<std::size_t> keep_cols = {0}) {
    if (!exact) {
        return run_monte_carlo(
            mc, width,
            [&](std::size_t, Xoshiro256& rng, std::span<double> out) {
                thread_local std::vector<double> sample;
                sample.resize(model.n);
                model.draw_sample(rng, sample);
                row(std::span<const double>(sample), out);
            },
            keep, keep_cols);
    }
    MomentAccumulator acc(width);
    std::vector<double> out(width);
    auto visit = [&](std::span<const double> sample, double w) {
        std::fill(out.begin(), out.end(), 0.0);
        row(sample, std::span<double>(out));
        acc.add_weighted(out, w);
        if (keep)
            for (auto c : keep_cols) keep->push_back(out[c]);
        if (weights) weights->push_back(w);
    };
    if (exchangeable) {
        for_each_exchangeable(model.law(0), model.n, cap,
                              [&](const std::vector<double>& s, double w) { visit(s, w); });
    } else {
        const auto laws = model.product_laws();
        std::vector<double> s(model.n);
        for_each_outcome_fast(laws, cap, [&](const std::vector<std::size_t>& idx, double w) {
            for (std::size_t i = 0; i < model.n; ++i) s[i] = laws[i].values()[idx[i]];
            visit(s, w);
        });
    }
    return acc;
}

inline double checked(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string("non-finite estimate for ") + what);
    return v;
}

inline double sqrt_se(double mean, double se) { return mean > 0 ? se / (2 * std::sqrt(mean)) : 0.0; }

struct SupX {
    double value = 0;
    double at = 0;
    double se = 0;
};

// |x E[Dbar_2 f_x(W_b)]| at one x from kept (W_b, Dbar_2) pairs; weights
// empty means equally weighted Monte Carlo replicates
inline SupX x_term(double x, const std::vector<double>& kept, const std::vector<double>& weights) {
    const std::size_t count = kept.size() / 2;
    const SteinThreshold th(x);
    KahanSum sum, sumsq;
    for (std::size_t k = 0; k < count; ++k) {
        const double d2b = kept[2 * k + 1];
        if (d2b == 0) continue;
        const double v = d2b * stein_f(th, kept[2 * k]);
        const double w = weights.empty() ? 1.0 : weights[k];
        sum.add(w * v);
        sumsq.add(w * v * v);
    }
    SupX out;
    out.at = x;
    if (weights.empty()) {
        const double N = static_cast<double>(count);
        const double mean = sum.value() / N;
        const double var = std::max(0.0, (sumsq.value() / N - mean * mean) * N / std::max(1.0, N - 1));
        out.value = std::abs(x * mean);
        out.se = x * std::sqrt(var / N);
    } else {
        out.value = std::abs(x * sum.value());
    }
    return out;
}

// grid maximum followed by a local refinement between the neighbours of the
// best grid point
inline SupX sup_x_term(const std::vector<double>& grid, const std::vector<double>& kept,
                       const std::vector<double>& weights, std::size_t refine_points = 40) {
    SupX best;
    std::size_t arg = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto t = x_term(grid[g], kept, weights);
        if (t.value > best.value) {
            best = t;
            arg = g;
        }
    }
    if (best.value == 0 || grid.size() < 2) return best;
    const double lo = arg == 0 ? grid[0] : grid[arg - 1];
    const double hi = arg + 1 == grid.size() ? grid[arg] : grid[arg + 1];
    for (std::size_t k = 1; k < refine_points; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(refine_points);
        const auto t = x_term(x, kept, weights);
        if (t.value > best.value) best = t;
    }
    return best;
}

}  // namespace detail

/// Every term on the right of the general bound, with the unknown absolute
/// constant set to 1. Expectations share one set of replicates (or one exact
/// enumeration), and the sup over x >= 0 runs over sup_x_grid with a local
/// refinement around the grid maximum.
inline BoundReport bound_theorem_main(const NonlinearStatisticModel& model, const MonteCarloConfig& mc,
                                      const BoundOptions& opt = {}, const VerificationConfig& cfg = default_config()) {
    validate_model(model);
    const std::size_t n = model.n;
    const bool exchangeable = opt.use_exchangeable && model.symmetric && model.discrete() && model.laws.size() == 1;
    const bool exact = detail::use_exact(model, opt, exchangeable);
    // with exchangeable enumeration only index 0 is distinguished; the other
    // indices contribute the same amount
    const auto idx = exact && exchangeable ? std::vector<std::size_t>{0} : detail::loo_indices(n, opt.loo_subsample);
    const auto grid = sup_x_grid(cfg, opt.grid_density, opt.grid_max);
    detail::BoundLayout L;
    L.loo_count = idx.size();
    std::vector<double> c_known;
    if (model.discrete())
        for (auto i : idx) {
            double c = 0;
            const auto& law = model.law(i);
            for (std::size_t a = 0; a < law.size(); ++a) {
                const double b = censor_xi(model.xi(i, law.values()[a]));
                c += law.probs()[a] * b * b;
            }
            c_known.push_back(c);
        }
    auto row = [&](std::span<const double> x, std::span<double> out) {
        thread_local std::vector<double> xi, xib;
        xi.resize(n);
        xib.resize(n);
        detail::fill_bound_row(model, x, idx, c_known, L, out, xi, xib);
    };
    std::vector<double> kept, weights;
    const auto acc = detail::expectation_rows(model, mc, exact, exchangeable, opt.cap, L.width(), row, &kept,
                                              exact ? &weights : nullptr, {L.wb, L.d2bar});

    BoundReport r;
    r.model = model.name;
    r.n = n;
    r.exact = exact;
    r.reps = exact ? 0 : mc.reps;
    auto mean = [&](std::size_t c) { return acc.mean(c); };
    auto se = [&](std::size_t c) { return acc.se(c); };
    r.tail_d1 = mean(L.tail1);
    r.tail_d2 = mean(L.tail2);
    r.tail_d1_se = se(L.tail1);
    r.tail_d2_se = se(L.tail2);
    r.beta2 = mean(L.beta2);
    r.beta3 = mean(L.beta3);
    r.beta2_se = se(L.beta2);
    r.beta3_se = se(L.beta3);
    r.d1_norm = std::sqrt(std::max(0.0, mean(L.d1bar_sq)));
    r.d1_norm_se = detail::sqrt_se(mean(L.d1bar_sq), se(L.d1bar_sq));
    r.d1_raw_norm = std::sqrt(std::max(0.0, mean(L.d1_sq)));
    r.exp_weighted_d2_sq = detail::checked(mean(L.exp_d2), "E[(1+e^W_b) Dbar_2^2]");
    r.exp_weighted_d2_sq_se = se(L.exp_d2);
    if (!opt.skip_sup_x) {
        const auto sup = detail::sup_x_term(grid, kept, weights);
        r.sup_x_term = detail::checked(sup.value, "sup_x term");
        r.sup_x_at = sup.at;
        r.sup_x_term_se = sup.se;
    }
    r.loo_multiplier = static_cast<double>(n) / static_cast<double>(idx.size());
    // per-index standard errors are summed (sd of a sum is at most the sum of
    // sds) unless loo_lin is available
    double loo_sd = 0, main2_d1 = 0, main2_pi2 = 0, main2_d1_sd = 0, main2_pi2_sd = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double exib2 = c_known.empty() ? mean(L.loo_col(k, 0)) : c_known[k];
        const double exib2_se = c_known.empty() ? se(L.loo_col(k, 0)) : 0.0;
        for (int j = 1; j <= 2; ++j) {
            const std::size_t a = L.loo_col(k, j == 1 ? 2 : 4), b = a + 1;
            LooTerm t;
            t.i = idx[k];
            t.j = j;
            t.first = exib2 * mean(a);
            t.second = mean(b);
            t.first_se = std::hypot(exib2 * se(a), mean(a) * exib2_se);
            t.second_se = se(b);
            r.loo_sum += t.first + t.second;
            loo_sd += t.first_se + t.second_se;
            r.loo_terms.push_back(t);
        }
        D1ChainTerm ch;
        ch.i = idx[k];
        ch.lhs_first = mean(L.loo_col(k, 2));
        ch.lhs_second = mean(L.loo_col(k, 3));
        ch.d1_diff_l2 = std::sqrt(std::max(0.0, mean(L.loo_col(k, 6))));
        ch.xi_l2 = std::sqrt(std::max(0.0, mean(L.loo_col(k, 1))));
        r.d1_chain.push_back(ch);
        main2_d1 += ch.xi_l2 * ch.d1_diff_l2;
        main2_pi2 += ch.xi_l2 * std::sqrt(std::max(0.0, mean(L.loo_col(k, 7))));
        // delta method, treating ||xi_i||_2 as known
        const double s1 = ch.xi_l2 * detail::sqrt_se(mean(L.loo_col(k, 6)), se(L.loo_col(k, 6)));
        const double s2 = ch.xi_l2 * detail::sqrt_se(mean(L.loo_col(k, 7)), se(L.loo_col(k, 7)));
        main2_d1_sd += s1;
        main2_pi2_sd += s2;
    }
    r.loo_sum = detail::checked(r.loo_sum * r.loo_multiplier, "leave-one-out terms");
    r.loo_sum_se = (c_known.empty() ? loo_sd : se(L.loo_lin)) * r.loo_multiplier;
    r.total_theorem1 = r.tail_d1 + r.tail_d2 + r.beta2 + r.beta3 + r.d1_norm + r.exp_weighted_d2_sq + r.sup_x_term +
                       r.loo_sum;
    r.total_theorem1_se = std::sqrt(r.tail_d1_se * r.tail_d1_se + r.tail_d2_se * r.tail_d2_se +
                                    r.beta2_se * r.beta2_se + r.beta3_se * r.beta3_se + r.d1_norm_se * r.d1_norm_se +
                                    r.exp_weighted_d2_sq_se * r.exp_weighted_d2_sq_se +
                                    r.sup_x_term_se * r.sup_x_term_se + r.loo_sum_se * r.loo_sum_se);
    detail::checked(r.total_theorem1, "total");
    r.sum_abs_xi3 = mean(L.abs_xi3);
    r.sum_abs_xi3_se = se(L.abs_xi3);
    r.d1_raw_norm_se = detail::sqrt_se(mean(L.d1_sq), se(L.d1_sq));
    r.main2_d1_loo = main2_d1 * r.loo_multiplier;
    r.main2_d1_loo_se = main2_d1_sd * r.loo_multiplier;
    if (model.has_pi2) {
        r.pi2_norm = std::sqrt(std::max(0.0, mean(L.pi2_sq)));
        r.pi2_norm_se = detail::sqrt_se(mean(L.pi2_sq), se(L.pi2_sq));
        r.main2_pi2_loo = main2_pi2 * r.loo_multiplier;
        r.main2_pi2_loo_se = main2_pi2_sd * r.loo_multiplier;
        r.total_theorem2_brace = r.sum_abs_xi3 + r.d1_raw_norm + r.pi2_norm + r.main2_d1_loo + r.main2_pi2_loo;
    }
    return r;
}

struct Main2Report {
    double sum_abs_xi3 = 0;
    double d1_norm = 0;
    double pi2_norm = 0;
    double d1_loo = 0;   // sum ||xi_i||_2 ||D_1n - D_1n^(i)||_2
    double pi2_loo = 0;  // sum ||xi_i||_2 ||Pi_2 - Pi_2^(i)||_2
    double total = 0;
    bool exact = false;
    double sum_abs_xi3_se = 0, d1_norm_se = 0, pi2_norm_se = 0, d1_loo_se = 0, pi2_loo_se = 0;
};

/// The braced sum of the third-moment bound for models with D_2n = max(-1, Pi_1 + Pi_2).
inline Main2Report bound_theorem_main2(const NonlinearStatisticModel& model, const MonteCarloConfig& mc,
                                       const BoundOptions& opt = {}, const VerificationConfig& cfg = default_config()) {
    if (!model.has_pi2) throw ContractViolation("model " + model.name + " does not supply Pi_2");
    BoundOptions o = opt;
    o.skip_sup_x = true;
    const auto r = bound_theorem_main(model, mc, o, cfg);
    Main2Report out;
    out.sum_abs_xi3 = r.sum_abs_xi3;
    out.d1_norm = r.d1_raw_norm;
    out.pi2_norm = r.pi2_norm;
    out.d1_loo = r.main2_d1_loo;
    out.pi2_loo = r.main2_pi2_loo;
    out.total = *r.total_theorem2_brace;
    out.exact = r.exact;
    out.sum_abs_xi3_se = r.sum_abs_xi3_se;
    out.d1_norm_se = r.d1_raw_norm_se;
    out.pi2_norm_se = r.pi2_norm_se;
    out.d1_loo_se = r.main2_d1_loo_se;
    out.pi2_loo_se = r.main2_pi2_loo_se;
    return out;
}

/// sup_x |P(T_SN <= x) - Phi(x)| by Monte Carlo or exact enumeration.
inline KsResult ks_distance(const NonlinearStatisticModel& model, const MonteCarloConfig& mc,
                            EstimatorMode mode = EstimatorMode::automatic, std::uint64_t cap = 2'000'000) {
    if (mode == EstimatorMode::monte_carlo) mc.validate();
    BoundOptions opt;
    opt.mode = mode;
    opt.cap = cap;
    const bool exchangeable = model.symmetric && model.discrete() && model.laws.size() == 1;
    const bool exact = detail::use_exact(model, opt, exchangeable);
    std::vector<double> values, weights;
    auto row = [&](std::span<const double> x, std::span<double> out) { out[0] = evaluate_tsn(model, x); };
    detail::expectation_rows(model, mc, exact, exchangeable, cap, 1, row, &values, exact ? &weights : nullptr, {0});
    if (!exact) return ks_from_sample(std::move(values), mc.min_reps);
    std::vector<std::pair<double, double>> atoms(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) atoms[k] = {values[k], weights[k]};
    return ks_from_atoms(std::move(atoms));
}

// ---------------------------------------------------------------------------
// built-in models

namespace models {

namespace detail {

inline double law_variance(const DiscreteDistribution& d) {
    KahanSum mean, sq;
    for (std::size_t a = 0; a < d.size(); ++a) {
        mean.add(d.probs()[a] * d.values()[a]);
        sq.add(d.probs()[a] * d.values()[a] * d.values()[a]);
    }
    if (std::abs(mean.value()) > 1e-12) throw ContractViolation("law must have mean zero");
    return sq.value();
}

// sum over i of E[xi_b,i^2] and E[(xi_i^2 - 1) I(|xi_i| > 1)] for one i.i.d. summand
struct CensoredMoments {
    double xib2 = 0;
    double kappa = 0;
};

inline CensoredMoments censored_moments(const DiscreteDistribution& d, const std::function<double(double)>& xi) {
    KahanSum b2, k;
    for (std::size_t a = 0; a < d.size(); ++a) {
        const double v = xi(d.values()[a]);
        const double vb = censor_xi(v);
        b2.add(d.probs()[a] * vb * vb);
        if (std::abs(v) > 1) k.add(d.probs()[a] * (v * v - 1));
    }
    return {b2.value(), k.value()};
}

inline ModelEvaluation zero_remainders(std::size_t n) {
    ModelEvaluation ev;
    ev.d1_loo.assign(n, 0.0);
    ev.d2_loo.assign(n, 0.0);
    ev.pi2_loo.assign(n, 0.0);
    return ev;
}

}  // namespace detail

/// T_SN = W_n with xi_i = X_i / (sigma sqrt(n)) for a mean-zero law.
inline NonlinearStatisticModel zero_remainder(const DiscreteDistribution& law, std::size_t n) {
    const double scale = 1.0 / std::sqrt(detail::law_variance(law) * static_cast<double>(n));
    NonlinearStatisticModel m;
    m.name = "zero_remainder";
    m.n = n;
    m.laws = {law};
    m.symmetric = true;
    m.has_pi2 = true;
    m.xi = [scale](std::size_t, double x) { return x * scale; };
    m.evaluate = [n](std::span<const double>) { return detail::zero_remainders(n); };
    return m;
}

/// Continuous passthrough: n = 1, X ~ N(0, 1), T_SN = X.
inline NonlinearStatisticModel normal_passthrough() {
    NonlinearStatisticModel m;
    m.name = "normal_passthrough";
    m.n = 1;
    m.symmetric = true;
    m.has_pi2 = true;
    m.xi = [](std::size_t, double x) { return x; };
    m.evaluate = [](std::span<const double>) { return detail::zero_remainders(1); };
    m.sampler = [](Xoshiro256& rng, std::span<double> out) { out[0] = standard_normal(rng); };
    return m;
}

/// Self-normalized sum sum X_i / (sum X_i^2)^{1/2}: D_1n = 0 and
/// D_2n = sum xi_i^2 - 1, written as Pi_1 + Pi_2 with
/// Pi_2 = sum (xi_i^2 - 1) I(|xi_i| > 1) - sum E[(xi_i^2 - 1) I(|xi_i| > 1)].
inline NonlinearStatisticModel self_normalized_sum(const DiscreteDistribution& law, std::size_t n) {
    const double scale = 1.0 / std::sqrt(detail::law_variance(law) * static_cast<double>(n));
    auto xi1 = [scale](double x) { return x * scale; };
    const auto cm = detail::censored_moments(law, xi1);
    const double nd = static_cast<double>(n);
    NonlinearStatisticModel m;
    m.name = "self_normalized_sum";
    m.n = n;
    m.laws = {law};
    m.symmetric = true;
    m.has_pi2 = true;
    m.xi = [scale](std::size_t, double x) { return x * scale; };
    m.evaluate = [=](std::span<const double> x) {
        ModelEvaluation ev;
        std::vector<double> xi(n), pi1_part(n), pi2_part(n);
        double v2 = 0, pi1 = 0, pi2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = xi1(x[i]);
            v2 += xi[i] * xi[i];
            const double b = censor_xi(xi[i]);
            pi1_part[i] = b * b - cm.xib2;
            pi2_part[i] = std::abs(xi[i]) > 1 ? xi[i] * xi[i] - 1 : 0.0;
            pi1 += pi1_part[i];
            pi2 += pi2_part[i];
        }
        ev.d2 = std::max(-1.0, v2 - 1);
        ev.pi2 = pi2 - nd * cm.kappa;
        ev.d1_loo.assign(n, 0.0);
        ev.d2_loo.resize(n);
        ev.pi2_loo.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            ev.pi2_loo[i] = pi2 - pi2_part[i] - nd * cm.kappa;
            ev.d2_loo[i] = std::max(-1.0, pi1 - pi1_part[i] + ev.pi2_loo[i]);
        }
        return ev;
    };
    return m;
}

enum class UStatForm {
    tn,                // D_2n = s_n^2 - 1
    tn_star,           // D_2n = s_n*^2 - 1
    placeholder_rootn, // D_2n = max(-1, V_b^2 - 1 + n^{-1/2} + delta_{2n,b})
    placeholder_zero,  // same without the n^{-1/2}
};

inline std::string to_string(UStatForm f) {
    switch (f) {
        case UStatForm::tn: return "tn";
        case UStatForm::tn_star: return "tn_star";
        case UStatForm::placeholder_rootn: return "placeholder_rootn";
        case UStatForm::placeholder_zero: return "placeholder_zero";
    }
    return "?";
}

/// Studentized U-statistic over the Hoeffding components of a kernel
/// (centered, sigma_g normalized). xi_i = g(X_i) / sqrt(n) and
/// D_1n, D_1n^(i) are the projection remainders; leave-one-out versions drop
/// every combination holding X_i.
inline NonlinearStatisticModel ustat(const HoeffdingComponents& c, std::size_t n, UStatForm form,
                                     std::uint64_t kernel_call_cap = kDefaultKernelCallCap) {
    if (n <= c.m) throw ContractViolation("U-statistic model needs n > m");
    std::vector<Atom> atoms;
    for (std::size_t a = 0; a < c.atoms; ++a) atoms.push_back({ExactReal(c.values[a]), c.probs[a]});
    const DiscreteDistribution law(atoms, "components");
    const double rn = std::sqrt(static_cast<double>(n));
    const double kappa_i = kappa_summand(c, n);
    double xib2 = 0;
    for (std::size_t a = 0; a < c.atoms; ++a) {
        const double b = censor_xi(c.g(a) / rn);
        xib2 += c.probs_d[a] * b * b;
    }
    const bool placeholder = form == UStatForm::placeholder_rootn || form == UStatForm::placeholder_zero;
    const auto variant = form == UStatForm::placeholder_rootn ? Pi2Variant::with_rootn : Pi2Variant::without;
    NonlinearStatisticModel m;
    m.name = "ustat_" + to_string(form);
    m.n = n;
    m.laws = {law};
    m.symmetric = true;
    m.has_pi2 = placeholder;
    const HoeffdingComponents comp = c;
    m.xi = [comp, rn](std::size_t, double x) { return comp.g_at(x) / rn; };
    m.evaluate = [=](std::span<const double> x) {
        const auto idx = atoms_of(comp, x);
        const bool pairs = comp.m >= 2;
        const auto r = decompose_sample(comp, idx, pairs, kernel_call_cap);
        ModelEvaluation ev;
        ev.d1 = r.D1;
        ev.d1_loo.resize(n);
        for (std::size_t i = 0; i < n; ++i) ev.d1_loo[i] = r.D1 - r.psi[i] / r.C1;
        if (placeholder) {
            const auto t = pi2_terms(r, variant, kappa_i);
            double pi1 = 0;
            std::vector<double> pi1_part(n);
            for (std::size_t i = 0; i < n; ++i) {
                pi1_part[i] = t.xi_b[i] * t.xi_b[i] - xib2;
                pi1 += pi1_part[i];
            }
            ev.d2 = std::max(-1.0, pi1 + t.pi2);
            ev.pi2 = t.pi2;
            ev.pi2_loo = t.pi2_loo;
            ev.d2_loo.resize(n);
            for (std::size_t i = 0; i < n; ++i) ev.d2_loo[i] = std::max(-1.0, pi1 - pi1_part[i] + t.pi2_loo[i]);
        } else {
            const bool plain = form == UStatForm::tn;
            ev.d2 = std::max(-1.0, (plain ? r.s2 : r.s2_star) - 1);
            const auto loo = studentizer_loo(r, plain);
            ev.d2_loo.resize(n);
            for (std::size_t i = 0; i < n; ++i) ev.d2_loo[i] = std::max(-1.0, loo[i] - 1);
        }
        return ev;
    };
    return m;
}

}  // namespace models

}  // namespace sbe
