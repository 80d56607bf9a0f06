#pragma once

// |E f_x'(W_b^{(i)} + t)| <= C (e^{-x} + e^{-x+t}) for x >= 1.
// The statement only asserts that some absolute C exists; callers pass a C
// calibrated on a corpus (see calibrate_expected_fprime_constant).

#include <algorithm>
#include <cmath>
#include <vector>

#include "sbe/censoring.hpp"
#include "sbe/distribution.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/stein_kernel.hpp"

namespace sbe {

/// The constant implied by the nonuniform derivative bound plus the Bennett
/// bound at t = 1: max(e^{1/2}, e * exp(e^2/4 - 1/4 + 1/2)).
inline double expected_fprime_proof_constant() {
    return std::max(std::exp(0.5), std::exp(1.0) * bennett_rhs(1.0));
}

struct ExpectedFprimeResult {
    double expectation;  // E f_x'(W_b^{(i)} + t)
    double envelope;     // e^{-x} + e^{-x+t}
    double ratio;        // |E| / envelope
    bool ok;             // ratio <= C
};

/// W_b^{(i)} is the censored sum over all laws except index `skip`.
/// Requires exact mean zero for each law and sum E xi^2 <= 1 over all laws.
inline ExpectedFprimeResult expected_fprime_bound_check(double x, double t, const std::vector<DiscreteDistribution>& xi,
                                                        std::size_t skip, double C,
                                                        std::uint64_t cap = 2'000'000) {
    if (!(x >= 1)) throw DomainError("expected f' bound needs x >= 1");
    ExactReal total;
    for (const auto& d : xi) {
        require_mean_zero(d);
        total += d.second_moment();
    }
    if (total > ExactReal(1)) throw ContractViolation("sum of second moments exceeds 1");
    std::vector<DiscreteDistribution> rest;
    for (std::size_t k = 0; k < xi.size(); ++k)
        if (k != skip) rest.push_back(xi[k]);
    std::vector<std::vector<double>> cv(rest.size());
    for (std::size_t k = 0; k < rest.size(); ++k)
        for (const auto& a : rest[k].atoms()) cv[k].push_back(censor_xi_exact(a.value).to_double());
    const SteinThreshold th(x);
    HighPrec acc = 0;
    for_each_outcome(rest, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
        double w = t;
        for (std::size_t k = 0; k < idx.size(); ++k) w += cv[k][idx[k]];
        acc += rational_to<HighPrec>(p) * HighPrec(stein_f_prime(th, w));
    });
    ExpectedFprimeResult out;
    out.expectation = acc.convert_to<double>();
    out.envelope = std::exp(-x) + std::exp(-x + t);
    out.ratio = std::abs(out.expectation) / out.envelope;
    out.ok = out.ratio <= C;
    return out;
}

struct ExpectedFprimeCase {
    std::vector<DiscreteDistribution> xi;
    std::size_t skip;
    double x;
    double t;
};

/// Max ratio over the corpus times the headroom factor.
inline double calibrate_expected_fprime_constant(const std::vector<ExpectedFprimeCase>& corpus, double headroom) {
    double worst = 0.0;
    for (const auto& c : corpus)
        worst = std::max(worst, expected_fprime_bound_check(c.x, c.t, c.xi, c.skip, INFINITY).ratio);
    return worst * headroom;
}

}  // namespace sbe
