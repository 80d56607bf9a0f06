#pragma once

// Exponential randomized concentration inequality for a sum of censored
// summands, checked by exhaustive enumeration. Events and absolute values are
// decided in exact surd arithmetic; exponentials are evaluated in 50 digits.

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "json.hpp"

#include <string>
#include <vector>

#include "sbe/censoring.hpp"
#include "sbe/distribution.hpp"
#include "sbe/enumeration.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

/// Interval endpoint as a function of the summands:
///   constant:   a
///   abs_xi:     a + b |xi_j|
///   w_b:        a + b W_b
///   sum_abs_xi: a + b sum_k |xi_k|
/// The leave-one-out version for index i drops xi_i (so |xi_j| is dropped
/// when i = j and W_b becomes W_b - xi_b,i).
struct DeltaSpec {
    enum class Kind { constant, abs_xi, w_b, sum_abs_xi };
    Kind kind = Kind::constant;
    Rational a = 0;
    Rational b = 0;
    std::size_t j = 0;

    static DeltaSpec constant(Rational a) { return {Kind::constant, std::move(a), 0, 0}; }
    static DeltaSpec abs_xi(Rational a, Rational b, std::size_t j = 0) { return {Kind::abs_xi, std::move(a), std::move(b), j}; }
    static DeltaSpec w_b(Rational a, Rational b) { return {Kind::w_b, std::move(a), std::move(b), 0}; }
    static DeltaSpec sum_abs_xi(Rational a, Rational b) { return {Kind::sum_abs_xi, std::move(a), std::move(b), 0}; }

    // value with index `skip` removed; skip = n means nothing removed
    ExactReal eval(const std::vector<ExactReal>& xi, const std::vector<ExactReal>& xib, const ExactReal& wb,
                   std::size_t skip) const {
        switch (kind) {
            case Kind::constant: return ExactReal(a);
            case Kind::abs_xi: return j == skip ? ExactReal(a) : ExactReal(a) + ExactReal(b) * xi.at(j).abs();
            case Kind::w_b: return ExactReal(a) + ExactReal(b) * (skip < xib.size() ? wb - xib[skip] : wb);
            case Kind::sum_abs_xi: {
                ExactReal s;
                for (std::size_t k = 0; k < xi.size(); ++k)
                    if (k != skip) s += xi[k].abs();
                return ExactReal(a) + ExactReal(b) * s;
            }
        }
        return {};
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::constant: return "constant";
            case Kind::abs_xi: return "abs_xi";
            case Kind::w_b: return "w_b";
            case Kind::sum_abs_xi: return "sum_abs_xi";
        }
        return "?";
    }

    nlohmann::json to_json() const {
        return {{"kind", kind_name()}, {"a", a.str()}, {"b", b.str()}, {"j", j}};
    }
};

struct RciInstance {
    std::string name;
    std::vector<DiscreteDistribution> xi;  // one law per summand
    DeltaSpec delta1, delta2;
    Rational lambda = 0;
    ExactReal delta;
    ExactReal c1, c2;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["name"] = name;
        j["xi"] = nlohmann::json::array();
        for (const auto& d : xi) j["xi"].push_back(d.to_json());
        j["delta1"] = delta1.to_json();
        j["delta2"] = delta2.to_json();
        j["lambda"] = lambda.str();
        j["delta"] = delta.str();
        j["c1"] = c1.str();
        j["c2"] = c2.str();
        return j;
    }
};

/// delta = (beta_2 + beta_3) / 4, c_1 = 1, c_2 = 1/4 with the absolute third
/// moment in beta_3. Requires sum E xi^2 = 1 exactly; the c_2 condition is
/// checked by validate_rci rather than assumed.
inline RciInstance rci_with_defaults(std::string name, std::vector<DiscreteDistribution> xi, DeltaSpec d1, DeltaSpec d2,
                                     Rational lambda) {
    const auto beta = beta_terms(xi);
    if (beta.sum_second != ExactReal(1)) throw ContractViolation("default parameters need sum E xi^2 = 1");
    RciInstance r;
    r.name = std::move(name);
    r.xi = std::move(xi);
    r.delta1 = std::move(d1);
    r.delta2 = std::move(d2);
    r.lambda = std::move(lambda);
    r.delta = (beta.beta2 + beta.beta3) * ExactReal(Rational(1, 4));
    r.c1 = ExactReal(1);
    r.c2 = ExactReal(Rational(1, 4));
    return r;
}

/// sum E[|xi_i| min(delta, |xi_i| / 2)].
inline ExactReal rci_c2_functional(const std::vector<DiscreteDistribution>& xi, const ExactReal& delta) {
    ExactReal acc;
    const ExactReal half(Rational(1, 2));
    for (const auto& d : xi)
        for (const auto& a : d.atoms()) {
            const ExactReal ax = a.value.abs();
            acc += ExactReal(a.p) * ax * min(delta, ax * half);
        }
    return acc;
}

/// Throws ContractViolation naming the first violated assumption.
inline void validate_rci(const RciInstance& r) {
    if (r.xi.empty()) throw ContractViolation("RCI instance " + r.name + " has no summands");
    if (r.lambda < 0) throw ContractViolation("RCI instance " + r.name + ": lambda < 0");
    if (!(r.delta > ExactReal(0)) || !(r.delta < ExactReal(Rational(1, 2))))
        throw ContractViolation("RCI instance " + r.name + ": delta = " + r.delta.str() + " outside (0, 1/2)");
    if (!(r.c2 > ExactReal(0)) || !(r.c1 > r.c2))
        throw ContractViolation("RCI instance " + r.name + ": need c1 > c2 > 0");
    ExactReal second;
    for (const auto& d : r.xi) {
        if (!d.mean().is_zero()) throw ContractViolation("RCI instance " + r.name + ": summand law is not mean zero");
        second += d.second_moment();
    }
    if (second > r.c1) throw ContractViolation("RCI instance " + r.name + ": sum E xi^2 = " + second.str() + " > c1");
    const auto c2v = rci_c2_functional(r.xi, r.delta);
    if (c2v < r.c2)
        throw ContractViolation("RCI instance " + r.name + ": sum E|xi| min(delta, |xi|/2) = " + c2v.str() + " < c2");
    for (const auto* d : {&r.delta1, &r.delta2})
        if (d->kind == DeltaSpec::Kind::abs_xi && d->j >= r.xi.size())
            throw ContractViolation("RCI instance " + r.name + ": Delta refers to a missing summand");
}

struct RciResult {
    HighPrec lhs;
    HighPrec rhs;
    bool ok = false;
    // pieces of the right side
    HighPrec gaussian_term;
    HighPrec loo_term;      // sum_i E[|xi_b,i| e^{lambda W_b^(i)} (|D1 - D1^(i)| + |D2 - D2^(i)|)]
    HighPrec width_term;    // E[|W_b| e^{lambda W_b} (|D2 - D1| + 2 delta)]
    HighPrec mean_term;     // sum_i |E xi_b,i| E[e^{lambda W_b^(i)} (|D2^(i) - D1^(i)| + 2 delta)]
};

/// lhs = E[e^{lambda W_b} I(Delta_1 <= W_b <= Delta_2)] and the three-part
/// right side, by exhaustive enumeration of the product law.
inline RciResult rci_check(const RciInstance& inst, std::uint64_t cap = 2'000'000) {
    validate_rci(inst);
    const std::size_t n = inst.xi.size();
    const HighPrec lam = rational_to<HighPrec>(inst.lambda);
    const HighPrec delta = inst.delta.to_high_prec();
    const ExactReal two_delta = inst.delta * ExactReal(2);

    // censored values and |E xi_b,i| per summand
    std::vector<std::vector<ExactReal>> vals(n), cens(n);
    std::vector<HighPrec> abs_mean_b(n);
    for (std::size_t i = 0; i < n; ++i) {
        ExactReal mb;
        for (const auto& a : inst.xi[i].atoms()) {
            vals[i].push_back(a.value);
            cens[i].push_back(censor_xi_exact(a.value));
            mb += cens[i].back() * ExactReal(a.p);
        }
        abs_mean_b[i] = mb.abs().to_high_prec();
    }

    HighPrec lhs = 0, e2 = 0, loo = 0, width = 0;
    std::vector<HighPrec> mean_part(n, HighPrec(0));
    std::vector<ExactReal> xi(n), xib(n);
    for_each_outcome(inst.xi, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
        ExactReal wb;
        for (std::size_t i = 0; i < n; ++i) {
            xi[i] = vals[i][idx[i]];
            xib[i] = cens[i][idx[i]];
            wb += xib[i];
        }
        const HighPrec ph = rational_to<HighPrec>(p);
        const HighPrec wbh = wb.to_high_prec();
        const HighPrec ew = exp(lam * wbh);
        const ExactReal d1 = inst.delta1.eval(xi, xib, wb, n);
        const ExactReal d2 = inst.delta2.eval(xi, xib, wb, n);
        if (d1 <= wb && wb <= d2) lhs += ph * ew;
        e2 += ph * ew * ew;
        width += ph * abs(wbh) * ew * ((d2 - d1).abs() + two_delta).to_high_prec();
        for (std::size_t i = 0; i < n; ++i) {
            const ExactReal d1i = inst.delta1.eval(xi, xib, wb, i);
            const ExactReal d2i = inst.delta2.eval(xi, xib, wb, i);
            const HighPrec ewi = exp(lam * (wb - xib[i]).to_high_prec());
            loo += ph * xib[i].abs().to_high_prec() * ewi * ((d1 - d1i).abs() + (d2 - d2i).abs()).to_high_prec();
            mean_part[i] += ph * ewi * ((d2i - d1i).abs() + two_delta).to_high_prec();
        }
    });
    RciResult r;
    r.lhs = lhs;
    r.loo_term = loo;
    r.width_term = width;
    r.mean_term = 0;
    for (std::size_t i = 0; i < n; ++i) r.mean_term += abs_mean_b[i] * mean_part[i];
    const HighPrec c1 = inst.c1.to_high_prec(), c2 = inst.c2.to_high_prec();
    r.gaussian_term = sqrt(e2) * exp(-(c2 * c2) / (16 * c1 * delta * delta));
    r.rhs = r.gaussian_term + 2 * exp(lam * delta) / c2 * (r.loo_term + r.width_term + r.mean_term);
    r.ok = r.lhs <= r.rhs;
    return r;
}

}  // namespace sbe
