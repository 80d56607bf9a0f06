#pragma once

// Brute-force expectations over finite product laws. Outcomes are visited in
// lexicographic order of atom indices, so floating accumulations are
// reproducible bit for bit.

#include <cstdint>
#include <functional>
#include <string>
#include <type_traits>
#include <vector>

#include "sbe/distribution.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

/// Size of the product space, or CapExceeded once it passes `cap`.
inline std::uint64_t product_space_size(const std::vector<DiscreteDistribution>& dists, std::uint64_t cap) {
    std::uint64_t total = 1;
    for (const auto& d : dists) {
        if (total > cap / d.size() + 1) total = cap + 1;
        else total *= d.size();
        if (total > cap)
            throw CapExceeded("product space exceeds enumeration cap of " + std::to_string(cap) + " outcomes");
    }
    return total;
}

/// Calls fn(indices, probability) for every outcome of the product law.
template <class Fn>
void for_each_outcome(const std::vector<DiscreteDistribution>& dists, std::uint64_t cap, Fn&& fn) {
    product_space_size(dists, cap);
    const std::size_t n = dists.size();
    std::vector<std::size_t> idx(n, 0);
    // prefix[k] = product of the first k probabilities
    std::vector<Rational> prefix(n + 1, Rational(1));
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * dists[k].atoms()[0].p;
    while (true) {
        fn(static_cast<const std::vector<std::size_t>&>(idx), static_cast<const Rational&>(prefix[n]));
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++idx[k] < dists[k].size()) break;
            idx[k] = 0;
            if (k == 0) return;
        }
        if (n == 0) return;
        for (std::size_t j = k; j < n; ++j) prefix[j + 1] = prefix[j] * dists[j].atoms()[idx[j]].p;
    }
}

/// Same traversal with double probabilities; faster, used where the
/// functional itself is a double.
template <class Fn>
void for_each_outcome_fast(const std::vector<DiscreteDistribution>& dists, std::uint64_t cap, Fn&& fn) {
    product_space_size(dists, cap);
    const std::size_t n = dists.size();
    std::vector<std::size_t> idx(n, 0);
    std::vector<double> prefix(n + 1, 1.0);
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * dists[k].probs()[0];
    while (true) {
        fn(static_cast<const std::vector<std::size_t>&>(idx), prefix[n]);
        std::size_t k = n;
        while (k > 0) {
            --k;
            if (++idx[k] < dists[k].size()) break;
            idx[k] = 0;
            if (k == 0) return;
        }
        if (n == 0) return;
        for (std::size_t j = k; j < n; ++j) prefix[j + 1] = prefix[j] * dists[j].probs()[idx[j]];
    }
}

/// Compensated summation (Neumaier).
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
        else comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// E[f(X_1..X_n)] with exact probabilities. f receives the atom values.
/// ExactReal or Rational results are summed exactly; double results are
/// summed in 50-digit precision.
template <class F>
auto enumerate_expectation(const std::vector<DiscreteDistribution>& dists, F&& f, std::uint64_t cap = 2'000'000) {
    using R = std::invoke_result_t<F&, const std::vector<ExactReal>&>;
    std::vector<ExactReal> vals(dists.size());
    if constexpr (std::is_same_v<R, ExactReal>) {
        ExactReal acc;
        for_each_outcome(dists, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
            for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = dists[k].atoms()[idx[k]].value;
            acc += f(static_cast<const std::vector<ExactReal>&>(vals)) * ExactReal(p);
        });
        return acc;
    } else if constexpr (std::is_same_v<R, Rational>) {
        Rational acc = 0;
        for_each_outcome(dists, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
            for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = dists[k].atoms()[idx[k]].value;
            acc += f(static_cast<const std::vector<ExactReal>&>(vals)) * p;
        });
        return acc;
    } else {
        HighPrec acc = 0;
        for_each_outcome(dists, cap, [&](const std::vector<std::size_t>& idx, const Rational& p) {
            for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = dists[k].atoms()[idx[k]].value;
            acc += rational_to<HighPrec>(p) * HighPrec(static_cast<double>(f(static_cast<const std::vector<ExactReal>&>(vals))));
        });
        return acc;
    }
}

/// E[f(x_1..x_n)] for a double-valued f of the double atom values.
template <class F>
double enumerate_expectation_double(const std::vector<DiscreteDistribution>& dists, F&& f, std::uint64_t cap = 2'000'000) {
    std::vector<double> vals(dists.size());
    KahanSum acc;
    for_each_outcome_fast(dists, cap, [&](const std::vector<std::size_t>& idx, double p) {
        for (std::size_t k = 0; k < idx.size(); ++k) vals[k] = dists[k].values()[idx[k]];
        acc.add(p * f(static_cast<const std::vector<double>&>(vals)));
    });
    return acc.value();
}

/// Exchangeable enumeration for n i.i.d. draws from `dist` when the
/// functional is symmetric in positions 1..n-1 (position 0 may be
/// distinguished). Calls fn(sample, weight) once per (first atom, multiset of
/// the rest); sample is sorted after its first entry.
template <class Fn>
void for_each_exchangeable(const DiscreteDistribution& dist, std::size_t n, std::uint64_t cap, Fn&& fn) {
    if (n == 0) throw ContractViolation("exchangeable enumeration needs n >= 1");
    const std::size_t k = dist.size();
    // number of multisets of size n-1 over k atoms, times k
    BigInt count = 1;
    for (std::size_t j = 1; j < k; ++j) count = count * (n - 1 + j) / j;
    count *= k;
    if (count > cap)
        throw CapExceeded("exchangeable enumeration exceeds cap of " + std::to_string(cap) + " points");
    std::vector<std::size_t> counts(k, 0);
    std::vector<double> sample(n);
    // log-multinomial weights in double; factorial table up to n
    std::vector<double> log_fact(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) log_fact[j] = log_fact[j - 1] + std::log(static_cast<double>(j));
    std::vector<double> log_p(k);
    for (std::size_t j = 0; j < k; ++j) log_p[j] = std::log(dist.probs()[j]);
    const std::size_t rest = n - 1;
    counts[k - 1] = rest;
    while (true) {
        double lw = log_fact[rest];
        std::size_t pos = 1;
        for (std::size_t j = 0; j < k; ++j) {
            lw += static_cast<double>(counts[j]) * log_p[j] - log_fact[counts[j]];
            for (std::size_t c = 0; c < counts[j]; ++c) sample[pos++] = dist.values()[j];
        }
        for (std::size_t first = 0; first < k; ++first) {
            sample[0] = dist.values()[first];
            fn(static_cast<const std::vector<double>&>(sample), std::exp(lw + log_p[first]));
        }
        // next composition of `rest` into k parts (reverse lexicographic on counts[0..k-2])
        std::size_t j = k - 1;
        while (j > 0 && counts[j] == 0) --j;
        if (j == 0) break;
        // move one unit from position j to j-1, and the rest of j to the end
        const std::size_t moved = counts[j];
        counts[j] = 0;
        counts[j - 1] += 1;
        counts[k - 1] = moved - 1;
    }
}

}  // namespace sbe
