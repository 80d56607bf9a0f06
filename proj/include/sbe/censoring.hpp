#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "sbe/distribution.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

/// Closed interval [a, b]; a may be -inf and b may be +inf.
struct CensorInterval {
    double a = -std::numeric_limits<double>::infinity();
    double b = std::numeric_limits<double>::infinity();

    CensorInterval() = default;
    CensorInterval(double lo, double hi) : a(lo), b(hi) {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw DomainError("censor interval needs a <= b");
    }
};

inline double censor(double y, const CensorInterval& iv) {
    if (y < iv.a) return iv.a;
    if (y > iv.b) return iv.b;
    return y;
}

/// xi_b = xi clamped to [-1, 1].
inline double censor_xi(double xi) {
    return censor(xi, CensorInterval(-1.0, 1.0));
}

/// Dbar = D clamped to [-1/2, 1/2].
inline double censor_remainder(double d) {
    return censor(d, CensorInterval(-0.5, 0.5));
}

/// Truncation D I(|D| <= c), kept only to show it is not a contraction.
inline double truncate_remainder(double d, double c = 0.5) {
    return std::abs(d) <= c ? d : 0.0;
}

inline ExactReal censor_exact(const ExactReal& y, const Rational& a, const Rational& b) {
    if (y < ExactReal(a)) return ExactReal(a);
    if (y > ExactReal(b)) return ExactReal(b);
    return y;
}

inline ExactReal censor_xi_exact(const ExactReal& y) {
    return censor_exact(y, -1, 1);
}

/// Exact per-summand moments that feed the bounds.
struct SummandMoments {
    ExactReal mean;             // E xi
    ExactReal second;           // E xi^2
    ExactReal censored_mean;    // E xi_b
    ExactReal censored_second;  // E xi_b^2
    ExactReal beta2;            // E[xi^2 I(|xi| > 1)]
    ExactReal beta3_abs;        // E[|xi|^3 I(|xi| <= 1)]
    ExactReal beta3_signed;     // E[xi^3 I(|xi| <= 1)]
    ExactReal abs_third;        // E|xi|^3
};

inline SummandMoments summand_moments(const DiscreteDistribution& d) {
    SummandMoments m;
    const ExactReal one(1);
    for (const auto& a : d.atoms()) {
        const ExactReal p(a.p);
        const ExactReal& v = a.value;
        const ExactReal v2 = v * v;
        const ExactReal av = v.abs();
        const ExactReal vb = censor_xi_exact(v);
        m.mean += v * p;
        m.second += v2 * p;
        m.censored_mean += vb * p;
        m.censored_second += vb * vb * p;
        m.abs_third += v2 * av * p;
        if (av > one) {
            m.beta2 += v2 * p;
        } else {
            m.beta3_abs += v2 * av * p;
            m.beta3_signed += v2 * v * p;
        }
    }
    return m;
}

struct BetaTerms {
    ExactReal beta2;
    ExactReal beta3;         // absolute third moments on {|xi| <= 1}
    ExactReal beta3_signed;  // signed variant
    ExactReal sum_second;    // sum E xi^2
    ExactReal sum_abs_third; // sum E|xi|^3
};

inline BetaTerms beta_terms(const std::vector<DiscreteDistribution>& dists) {
    BetaTerms out;
    for (const auto& d : dists) {
        const auto m = summand_moments(d);
        out.beta2 += m.beta2;
        out.beta3 += m.beta3_abs;
        out.beta3_signed += m.beta3_signed;
        out.sum_second += m.second;
        out.sum_abs_third += m.abs_third;
    }
    return out;
}

struct ExactCheck {
    ExactReal lhs;
    ExactReal rhs;
    bool ok;
};

struct NumericCheck {
    double lhs;
    double rhs;
    bool ok;
};

inline void require_mean_zero(const DiscreteDistribution& d) {
    if (!d.mean().is_zero()) throw ContractViolation("distribution mean is " + d.mean().str() + ", not 0");
}

/// |E xi_b| <= E[xi^2 I(|xi| > 1)], exactly.
inline ExactCheck censored_mean_bound_check(const DiscreteDistribution& d) {
    require_mean_zero(d);
    const auto m = summand_moments(d);
    ExactCheck out{m.censored_mean.abs(), m.beta2, false};
    out.ok = out.lhs <= out.rhs;
    return out;
}

/// exp(e^{2t}/4 - 1/4 + t/2).
inline double bennett_rhs(double t) {
    return std::exp(std::exp(2 * t) / 4 - 0.25 + t / 2);
}

/// E[e^{t W_b}] for W_b the sum of censored independent summands, by exact
/// enumeration of the product law (probabilities exact, exponentials in
/// 50-digit precision).
inline HighPrec censored_mgf(const std::vector<DiscreteDistribution>& dists, double t, std::uint64_t cap = 2'000'000) {
    // the MGF of a sum of independent terms factorizes; the cap still guards
    // the product space the statement ranges over.
    product_space_size(dists, cap);
    HighPrec acc = 1;
    const HighPrec tt = t;
    for (const auto& d : dists) {
        HighPrec factor = 0;
        for (const auto& a : d.atoms()) {
            const HighPrec v = censor_xi_exact(a.value).to_high_prec();
            factor += rational_to<HighPrec>(a.p) * exp(tt * v);
        }
        acc *= factor;
    }
    return acc;
}

/// Same expectation, summing over every outcome of the product space.
inline HighPrec censored_mgf_bruteforce(const std::vector<DiscreteDistribution>& dists, double t, std::uint64_t cap = 2'000'000) {
    std::vector<std::vector<HighPrec>> cv(dists.size());
    for (std::size_t k = 0; k < dists.size(); ++k)
        for (const auto& a : dists[k].atoms()) cv[k].push_back(censor_xi_exact(a.value).to_high_prec());
    HighPrec acc = 0;
    const HighPrec tt = t;
    for_each_outcome(dists, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
        HighPrec w = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) w += cv[k][idx[k]];
        acc += rational_to<HighPrec>(p) * exp(tt * w);
    });
    return acc;
}

/// Bennett-type bound for the censored sum. Requires every law mean zero and
/// sum E xi^2 <= 1, both checked exactly.
inline NumericCheck bennett_mgf_check(const std::vector<DiscreteDistribution>& dists, double t, std::uint64_t cap = 2'000'000) {
    if (!(t >= 0)) throw DomainError("Bennett check needs t >= 0");
    ExactReal total;
    for (const auto& d : dists) {
        require_mean_zero(d);
        total += d.second_moment();
    }
    if (total > ExactReal(1)) throw ContractViolation("sum of second moments " + total.str() + " exceeds 1");
    const double lhs = censored_mgf_bruteforce(dists, t, cap).convert_to<double>();
    const double rhs = bennett_rhs(t);
    return {lhs, rhs, lhs <= rhs + 1e-12};
}

/// beta2 >= 0 and beta2 + beta3 <= sum E|xi|^3, exactly.
inline bool beta_split_check(const std::vector<DiscreteDistribution>& dists) {
    const auto b = beta_terms(dists);
    return b.beta2.sign() >= 0 && (b.beta2 + b.beta3) <= b.sum_abs_third &&
           (b.beta2 + b.beta3_signed) <= b.sum_abs_third;
}

}  // namespace sbe
