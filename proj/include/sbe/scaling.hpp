#pragma once

// KS distance of T_n and T_n* against n for a fixed kernel and discrete law,
// next to the C-free bound B_n. Samples are reduced to atom counts, so the
// cost per replicate does not grow with the number of kernel combinations.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sbe/hoeffding.hpp"
#include "sbe/kernels.hpp"
#include "sbe/ks.hpp"
#include "sbe/monte_carlo.hpp"
#include "sbe/u_stat.hpp"

namespace sbe {

struct ScalingRow {
    std::size_t n = 0;
    double ks_tn = 0, ks_tn_se = 0;
    double ks_tn_star = 0, ks_tn_star_se = 0;
    double bound = 0;          // B_n, constant-free
    double ratio = 0;          // KS(T_n) / B_n
    double sqrt_n_ks = 0;      // sqrt(n) KS(T_n)
    double bridging = 0;       // sup_x of the bridging right side
    double dkw = 0;            // DKW half-width at delta = 0.001
};

struct ScalingStudy {
    std::string kernel;
    std::string law;
    std::size_t m = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<ScalingRow> rows;
};

/// sup over x in [0, 10] of min(b x^3 / sqrt(2 pi), 2 / max(2, sqrt(2 pi) x a)) e^{-x^2 a^2 / 2}.
inline double bridging_sup(std::size_t n, std::size_t m) {
    double best = 0;
    for (int k = 0; k <= 2000; ++k) best = std::max(best, bridging_check(0.005 * k, n, m).rhs);
    return best;
}

/// Runs the study for a kernel given by name (centered at its mean under `law`).
inline ScalingStudy scaling_study(const AnyKernel& kernel, const DiscreteDistribution& law,
                                  const std::vector<std::size_t>& n_grid, std::size_t reps, std::uint64_t seed,
                                  std::size_t workers = 1, double dkw_delta = 0.001) {
    const Rational mean = kernel_mean(kernel, law);
    const AnyKernel centered = kernel.centered(mean);
    const auto comps = hoeffding(centered, law);
    const auto mom = moment_report(comps);
    const std::size_t m = kernel.degree();
    const MultisetEvaluator eval(centered, law.values());
    ScalingStudy study;
    study.kernel = kernel.name();
    study.law = law.name();
    study.m = m;
    study.reps = reps;
    study.seed = seed;
    for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
        const std::size_t n = n_grid[ni];
        MonteCarloConfig mc;
        mc.reps = reps;
        // a distinct stream family per sample size
        mc.seed = seed ^ (0x9E3779B97F4A7C15ULL * (ni + 1));
        mc.workers = workers;
        std::vector<double> kept;
        run_monte_carlo(
            mc, 2,
            [&](std::size_t, Xoshiro256& rng, std::span<double> out) {
                std::vector<std::size_t> counts(law.size(), 0);
                for (std::size_t i = 0; i < n; ++i) ++counts[law.draw_index(rng.uniform())];
                const auto r = eval.evaluate(counts);
                out[0] = r.T;
                out[1] = r.T_star;
            },
            &kept, {0, 1});
        std::vector<double> t(reps), ts(reps);
        for (std::size_t k = 0; k < reps; ++k) {
            t[k] = kept[2 * k];
            ts[k] = kept[2 * k + 1];
        }
        const auto a = ks_from_sample(std::move(t));
        const auto b = ks_from_sample(std::move(ts));
        ScalingRow row;
        row.n = n;
        row.ks_tn = a.distance;
        row.ks_tn_se = a.se;
        row.ks_tn_star = b.distance;
        row.ks_tn_star_se = b.se;
        row.bound = be_bound_ustat(mom, n, m);
        row.ratio = row.ks_tn / row.bound;
        row.sqrt_n_ks = std::sqrt(static_cast<double>(n)) * row.ks_tn;
        row.bridging = bridging_sup(n, m);
        row.dkw = dkw_epsilon(reps, dkw_delta);
        study.rows.push_back(row);
    }
    return study;
}

struct ScalingVerdict {
    double spread = 0;            // max / min of sqrt(n) KS(T_n)
    bool spread_ok = false;
    std::size_t monotone_violations = 0;
    bool bridging_ok = false;     // |KS(T_n) - KS(T_n*)| <= bridging + 3 DKW at every n
};

inline ScalingVerdict judge_scaling(const ScalingStudy& s, double max_spread, double se_slack) {
    ScalingVerdict v;
    if (s.rows.empty()) return v;
    double lo = INFINITY, hi = 0;
    for (const auto& r : s.rows) {
        lo = std::min(lo, r.sqrt_n_ks);
        hi = std::max(hi, r.sqrt_n_ks);
    }
    v.spread = lo > 0 ? hi / lo : INFINITY;
    v.spread_ok = v.spread < max_spread;
    for (std::size_t k = 1; k < s.rows.size(); ++k) {
        const auto& a = s.rows[k - 1];
        const auto& b = s.rows[k];
        if (b.ks_tn > a.ks_tn + se_slack * std::hypot(a.ks_tn_se, b.ks_tn_se)) ++v.monotone_violations;
    }
    v.bridging_ok = true;
    for (const auto& r : s.rows)
        if (std::abs(r.ks_tn - r.ks_tn_star) > r.bridging + 3 * r.dkw) v.bridging_ok = false;
    return v;
}

}  // namespace sbe
