#pragma once

// Exact checks of the moment bounds for U-statistic remainders: the kernel
// bounds (i)-(iv), the D_1n bounds, and the Pi_2 bounds, plus the
// corpus calibration of unspecified constants.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sbe/censoring.hpp"
#include "sbe/combinatorics.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"
#include "sbe/hoeffding.hpp"
#include "sbe/u_stat.hpp"

namespace sbe {

struct LemmaCheck {
    std::string name;
    std::string detail;
    double lhs = 0;
    double rhs = 0;   // constant-free right side
    bool ok = true;   // lhs <= rhs where the constant is explicit; set by calibration otherwise
    double ratio() const { return lhs == 0 ? 0.0 : (rhs > 0 ? lhs / rhs : std::numeric_limits<double>::infinity()); }
};

/// Decomposition of one sample given as atom indices of the components' law.
inline StudentizedUResult decompose_sample(const HoeffdingComponents& c, std::span<const std::size_t> atom_idx,
                                           bool want_pairs, std::uint64_t cap = kDefaultKernelCallCap) {
    const std::size_t n = atom_idx.size();
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = c.g(atom_idx[i]);
    std::vector<std::size_t> args(c.m);
    auto h = [&](std::span<const std::size_t> pos) {
        for (std::size_t j = 0; j < pos.size(); ++j) args[j] = atom_idx[pos[j]];
        return c.h_norm(args);
    };
    return decompose(n, c.m, g, h, want_pairs, cap);
}

inline std::vector<std::size_t> atoms_of(const HoeffdingComponents& c, std::span<const double> sample) {
    std::vector<std::size_t> out(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const long a = c.atom_index(sample[i]);
        if (a < 0) throw DomainError("sample value is not an atom of the law");
        out[i] = static_cast<std::size_t>(a);
    }
    return out;
}

/// E[(xi^2 - 1) I(|xi| > 1)] for xi = g(X) / sqrt(n).
inline double kappa_summand(const HoeffdingComponents& c, std::size_t n) {
    double acc = 0;
    for (std::size_t a = 0; a < c.atoms; ++a) {
        const double xi = c.g(a) / std::sqrt(static_cast<double>(n));
        if (std::abs(xi) > 1) acc += c.probs_d[a] * (xi * xi - 1);
    }
    return acc;
}

namespace detail {

inline double rat(const Rational& r) { return static_cast<double>(r); }

// sum over the overlap r of (number of ordered pairs of m-sets from n with |A n B| = r) E[hbar_r^2], raw
inline Rational overlap_sum_all(const HoeffdingComponents& c, long n) {
    const long m = static_cast<long>(c.m);
    Rational acc = 0;
    for (long r = 2; r <= m; ++r)
        acc += Rational(binomial(n, m) * binomial(m, r) * binomial(n - m, m - r)) * c.raw_hbar_second(static_cast<std::size_t>(r));
    return acc;
}

// E[(sum_{S contains i} hbar_m(S))^2], raw
inline Rational overlap_sum_through_i(const HoeffdingComponents& c, long n) {
    const long m = static_cast<long>(c.m);
    Rational acc = 0;
    for (long s = 1; s <= m - 1; ++s)
        acc += Rational(binomial(n - 1, m - 1) * binomial(m - 1, s) * binomial(n - m, m - 1 - s)) *
               c.raw_hbar_second(static_cast<std::size_t>(s + 1));
    return acc;
}

inline void require_ustat_n(const HoeffdingComponents& c, std::size_t n) {
    if (2 * c.m >= n) throw ContractViolation("U-statistic lemmas need 2m < n");
}

}  // namespace detail

enum class KernelBoundCase { i, ii, iii, iv };

/// Case (i): E[hbar_k^2] <= E[h_k^2] <= (k/m) E[h^2] for every k <= m, exact.
inline std::vector<LemmaCheck> kernel_bound_case_i(const HoeffdingComponents& c) {
    std::vector<LemmaCheck> out;
    const Rational Eh2 = c.raw_Eh2;
    for (std::size_t k = 1; k <= c.m; ++k) {
        const Rational hb2 = c.raw_hbar_second(k);
        const Rational hk2 = c.raw_abs_moment(k, 2);
        const Rational rhs = Rational(static_cast<long long>(k), static_cast<long long>(c.m)) * Eh2;
        LemmaCheck a{"ustat_results_i", "k=" + std::to_string(k) + " hbar_k vs h_k", detail::rat(hb2 / c.raw_sigma_g2),
                     detail::rat(hk2 / c.raw_sigma_g2), hb2 <= hk2};
        LemmaCheck b{"ustat_results_i", "k=" + std::to_string(k) + " h_k vs (k/m) h", detail::rat(hk2 / c.raw_sigma_g2),
                     detail::rat(rhs / c.raw_sigma_g2), hk2 <= rhs};
        out.push_back(a);
        out.push_back(b);
    }
    return out;
}

/// Case (ii): second moment of the hbar_m sum through one index, exact.
inline LemmaCheck kernel_bound_case_ii(const HoeffdingComponents& c, std::size_t n) {
    detail::require_ustat_n(c, n);
    const long nn = static_cast<long>(n), m = static_cast<long>(c.m);
    const Rational lhs = detail::overlap_sum_through_i(c, nn);
    const Rational rhs = Rational(2 * (m - 1) * (m - 1), nn * (nn - m + 1)) *
                         Rational(binomial(nn - 1, m - 1) * binomial(nn, m)) * c.raw_Eh2;
    return {"ustat_results_ii", "n=" + std::to_string(n), detail::rat(lhs / c.raw_sigma_g2),
            detail::rat(rhs / c.raw_sigma_g2), lhs <= rhs};
}

struct IndexPattern {
    std::vector<std::size_t> I;  // 0 and 1 stand for the indices 1 and 2
    std::vector<std::size_t> J;
    std::size_t d = 0;           // |I n J| outside {1, 2}
};

/// One representative of every overlap pattern for hbar_{k1, I} hbar_{k2, J}
/// against the positions 1 and 2.
inline std::vector<IndexPattern> index_patterns(std::size_t k1, std::size_t k2, std::size_t n, bool case_iv) {
    std::vector<IndexPattern> out;
    for (unsigned a = 0; a < 4; ++a)
        for (unsigned b = 0; b < 4; ++b) {
            std::vector<std::size_t> ia, jb;
            for (std::size_t t = 0; t < 2; ++t) {
                if (a & (1u << t)) ia.push_back(t);
                if (b & (1u << t)) jb.push_back(t);
            }
            if (ia.size() > k1 || jb.size() > k2) continue;
            if (case_iv && (std::count(jb.begin(), jb.end(), 0) || std::count(ia.begin(), ia.end(), 1))) continue;
            const std::size_t ri = k1 - ia.size(), rj = k2 - jb.size();
            for (std::size_t d = 0; d <= std::min(ri, rj); ++d) {
                IndexPattern p;
                p.I = ia;
                p.J = jb;
                p.d = d;
                std::size_t next = 2;
                for (std::size_t t = 0; t < ri; ++t) p.I.push_back(next++);
                for (std::size_t t = 0; t < d; ++t) p.J.push_back(2 + t);
                for (std::size_t t = d; t < rj; ++t) p.J.push_back(next++);
                if (next > n) continue;
                out.push_back(p);
            }
        }
    return out;
}

/// E[xi_b,1 xi_b,2 hbar_{k1,I} hbar_{k2,J}] exactly, with xi = g / sqrt(n)
/// in the sigma_g = 1 normalization.
inline ExactReal cross_moment_exact(const HoeffdingComponents& c, std::size_t n, const IndexPattern& p) {
    std::size_t width = 2;
    for (auto i : p.I) width = std::max(width, i + 1);
    for (auto j : p.J) width = std::max(width, j + 1);
    const std::size_t K = c.atoms;
    // R[a1 * K + a2] = sum over the other positions of prob * hbar_raw(I) hbar_raw(J)
    std::vector<Rational> R(K * K, Rational(0));
    std::vector<std::size_t> idx(width, 0), ti(p.I.size()), tj(p.J.size());
    while (true) {
        Rational w = 1;
        for (std::size_t t = 2; t < width; ++t) w *= c.probs[idx[t]];
        for (std::size_t t = 0; t < p.I.size(); ++t) ti[t] = idx[p.I[t]];
        for (std::size_t t = 0; t < p.J.size(); ++t) tj[t] = idx[p.J[t]];
        const Rational hi = c.hbar_raw(ti);
        if (hi != 0) {
            const Rational hj = c.hbar_raw(tj);
            if (hj != 0) R[idx[0] * K + idx[1]] += w * hi * hj;
        }
        std::size_t t = width;
        while (t > 0 && idx[t - 1] + 1 == K) idx[--t] = 0;
        if (t == 0) break;
        ++idx[t - 1];
    }
    // xi_b(a) = censor(g_raw(a) / sqrt(n sigma_raw^2))
    const Rational nsig = Rational(static_cast<long long>(n)) * c.raw_sigma_g2;
    const ExactReal inv_root = ExactReal::surd(Rational(1) / nsig, nsig);  // 1 / sqrt(nsig)
    std::vector<ExactReal> xb(K);
    for (std::size_t a = 0; a < K; ++a) xb[a] = censor_xi_exact(ExactReal(c.h_raw[1][a]) * inv_root);
    ExactReal acc;
    for (std::size_t a1 = 0; a1 < K; ++a1)
        for (std::size_t a2 = 0; a2 < K; ++a2) {
            const Rational& r = R[a1 * K + a2];
            if (r == 0) continue;
            acc += xb[a1] * xb[a2] * ExactReal(r * c.probs[a1] * c.probs[a2]);
        }
    return acc / c.raw_sigma_g2;
}

/// Cases (iii) and (iv) over every overlap pattern with k1, k2 in 2..m
/// (hbar_1 vanishes identically, so k = 1 only contributes zeros).
inline std::vector<LemmaCheck> kernel_bound_case_iii_iv(const HoeffdingComponents& c, std::size_t n, bool case_iv) {
    const auto mom = moment_report(c);
    const HighPrec nn = static_cast<double>(n);
    const HighPrec g3 = mom.g3_norm, h3 = mom.h3_norm, h2 = mom.h2_norm;
    const HighPrec base = HighPrec(9.5) * g3 * g3 * h3 * h3 / nn;
    const HighPrec denom = case_iv ? nn * boost::multiprecision::sqrt(nn) : nn;
    std::vector<LemmaCheck> out;
    const std::string name = case_iv ? "ustat_results_iv" : "ustat_results_iii";
    for (std::size_t k1 = 2; k1 <= c.m; ++k1)
        for (std::size_t k2 = 2; k2 <= c.m; ++k2)
            for (const auto& p : index_patterns(k1, k2, n, case_iv)) {
                const ExactReal e = cross_moment_exact(c, n, p);
                const HighPrec lhs = boost::multiprecision::abs(e.to_high_prec());
                const HighPrec rhs = base + HighPrec(2 * static_cast<double>(p.d)) * h2 / denom;
                std::string detail = "k1=" + std::to_string(k1) + " k2=" + std::to_string(k2) + " I={";
                for (auto i : p.I) detail += std::to_string(i + 1) + ",";
                detail += "} J={";
                for (auto j : p.J) detail += std::to_string(j + 1) + ",";
                detail += "} d=" + std::to_string(p.d);
                out.push_back({name, detail, lhs.convert_to<double>(), rhs.convert_to<double>(), lhs <= rhs});
            }
    return out;
}

inline std::vector<LemmaCheck> kernel_bound_check(const HoeffdingComponents& c, KernelBoundCase which, std::size_t n) {
    switch (which) {
        case KernelBoundCase::i: return kernel_bound_case_i(c);
        case KernelBoundCase::ii: return {kernel_bound_case_ii(c, n)};
        case KernelBoundCase::iii: return kernel_bound_case_iii_iv(c, n, false);
        case KernelBoundCase::iv: return kernel_bound_case_iii_iv(c, n, true);
    }
    return {};
}

/// Exact ||D_1n||_2 and ||D_1n - D_1n^(i)||_2 against their bounds.
/// Squares are compared, so the verdict is exact.
inline std::vector<LemmaCheck> d1_bound_check(const HoeffdingComponents& c, std::size_t n) {
    detail::require_ustat_n(c, n);
    const long nn = static_cast<long>(n), m = static_cast<long>(c.m);
    const Rational c1 = Rational(binomial(nn - 1, m - 1));
    const Rational scale = Rational(1) / (c1 * c1 * Rational(nn) * c.raw_sigma_g2);
    const Rational d1_sq = detail::overlap_sum_all(c, nn) * scale;
    const Rational diff_sq = detail::overlap_sum_through_i(c, nn) * scale;
    const Rational Eh2 = c.raw_Eh2 / c.raw_sigma_g2;
    const Rational rhs1_sq = Rational((m - 1) * (m - 1), m * (nn - m + 1)) * Eh2;
    const Rational rhs2_sq = Rational(2 * (m - 1) * (m - 1), nn * m * (nn - m + 1)) * Eh2;
    auto root = [](const Rational& r) { return std::sqrt(static_cast<double>(r)); };
    return {{"Dbdds_D1", "n=" + std::to_string(n), root(d1_sq), root(rhs1_sq), d1_sq <= rhs1_sq},
            {"Dbdds_D1_minus_loo", "n=" + std::to_string(n), root(diff_sq), root(rhs2_sq), diff_sq <= rhs2_sq}};
}

struct Pi2Norms {
    double pi2_l2 = 0;        // ||Pi_2||_2
    double pi2_diff_l2 = 0;   // ||Pi_2 - Pi_2^(1)||_2
    double d1_l2 = 0;         // ||D_1n||_2
    double d1_diff_l2 = 0;    // ||D_1n - D_1n^(1)||_2
};

/// Exhaustive enumeration over n i.i.d. draws from the components' law.
inline Pi2Norms pi2_norms_exact(const HoeffdingComponents& c, std::size_t n, Pi2Variant variant,
                                std::uint64_t cap = 2'000'000) {
    std::vector<Atom> atoms;
    for (std::size_t a = 0; a < c.atoms; ++a) atoms.push_back({ExactReal(c.values[a]), c.probs[a]});
    const DiscreteDistribution law(atoms, "components");
    const double kappa_i = kappa_summand(c, n);
    KahanSum p2, pd, d1, d1d;
    for_each_exchangeable(law, n, cap, [&](const std::vector<double>& sample, double w) {
        const auto idx = atoms_of(c, sample);
        const auto r = decompose_sample(c, idx, c.m >= 2);
        const auto t = pi2_terms(r, variant, kappa_i);
        p2.add(w * t.pi2 * t.pi2);
        const double diff = t.pi2 - t.pi2_loo[0];
        pd.add(w * diff * diff);
        d1.add(w * r.D1 * r.D1);
        const double dd = r.D1 - t.d1_loo[0];
        d1d.add(w * dd * dd);
    });
    return {std::sqrt(std::max(0.0, p2.value())), std::sqrt(std::max(0.0, pd.value())),
            std::sqrt(std::max(0.0, d1.value())), std::sqrt(std::max(0.0, d1d.value()))};
}

/// ||Pi_2||_2 and ||Pi_2 - Pi_2^(i)||_2 against their constant-free right
/// sides; `ok` is left for the calibration step.
inline std::vector<LemmaCheck> pi2_bound_check(const HoeffdingComponents& c, std::size_t n, Pi2Variant variant,
                                               std::uint64_t cap = 2'000'000) {
    detail::require_ustat_n(c, n);
    const auto mom = moment_report(c);
    const auto norms = pi2_norms_exact(c, n, variant, cap);
    const double nn = static_cast<double>(n), m = static_cast<double>(c.m);
    const double rhs1 = (mom.E_abs_g3 + m * mom.g3_norm * mom.h3_norm) / std::sqrt(nn);
    const double rhs2 = (m * mom.g3_norm * mom.h3_norm + std::pow(m, 1.5) * std::sqrt(mom.h2_norm)) / nn;
    const std::string tag = std::string(variant == Pi2Variant::with_rootn ? "rootn" : "zero") + " n=" + std::to_string(n);
    return {{"Djn_Pi2", tag, norms.pi2_l2, rhs1, true}, {"Djn_Pi2_minus_loo", tag, norms.pi2_diff_l2, rhs2, true}};
}

struct Calibration {
    std::string lemma;
    double c_hat = 0;    // corpus-wide: headroom * max ratio over both corpora
    double c_hat_a = 0;  // per-corpus recalibrations
    double c_hat_b = 0;
    double drift = 1;    // max(c_hat_a, c_hat_b) / min(c_hat_a, c_hat_b)
    std::size_t cases = 0;
    std::size_t failures = 0;  // ratios above c_hat (zero by construction of c_hat, re-checked)
    bool ok(double max_drift) const { return failures == 0 && cases > 0 && drift < max_drift; }
};

inline Calibration calibrate(const std::string& lemma, std::span<const double> ratios_a, std::span<const double> ratios_b,
                             double headroom) {
    Calibration cal;
    cal.lemma = lemma;
    auto top = [](std::span<const double> r) {
        double t = 0;
        for (double v : r) t = std::max(t, v);
        return t;
    };
    cal.c_hat_a = headroom * top(ratios_a);
    cal.c_hat_b = headroom * top(ratios_b);
    cal.c_hat = std::max(cal.c_hat_a, cal.c_hat_b);
    cal.cases = ratios_a.size() + ratios_b.size();
    for (auto r : {ratios_a, ratios_b})
        for (double v : r)
            if (!(v <= cal.c_hat)) ++cal.failures;
    const double lo = std::min(cal.c_hat_a, cal.c_hat_b), hi = std::max(cal.c_hat_a, cal.c_hat_b);
    cal.drift = hi == 0 ? 1.0 : (lo == 0 ? std::numeric_limits<double>::infinity() : hi / lo);
    return cal;
}

}  // namespace sbe
