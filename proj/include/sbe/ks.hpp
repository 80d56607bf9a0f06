#pragma once

// Kolmogorov distance sup_x |F(x) - Phi(x)| for empirical and for exactly
// enumerated discrete distributions. Both sides of every jump are checked.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sbe/errors.hpp"
#include "sbe/stein_kernel.hpp"

namespace sbe {

struct KsResult {
    double distance = 0;
    double at = 0;   // location of the sup
    double se = 0;   // binomial standard error of the CDF estimate at `at` (0 when exact)
};

namespace detail {
inline double phi_ext(double t) {
    if (t == INFINITY) return 1.0;
    if (t == -INFINITY) return 0.0;
    return normal_cdf(t);
}
}  // namespace detail

/// Atoms (value, weight) with weights summing to one; ties are merged.
inline KsResult ks_from_atoms(std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    KsResult r;
    double cdf = 0;
    for (std::size_t k = 0; k < atoms.size();) {
        const double v = atoms[k].first;
        const double before = cdf;
        while (k < atoms.size() && atoms[k].first == v) cdf += atoms[k++].second;
        const double phi = detail::phi_ext(v);
        for (double f : {before, cdf}) {
            if (std::abs(f - phi) > r.distance) {
                r.distance = std::abs(f - phi);
                r.at = v;
            }
        }
    }
    return r;
}

/// Empirical distribution of the sample against Phi.
inline KsResult ks_from_sample(std::vector<double> values, std::size_t min_size = 1000) {
    if (values.size() < min_size)
        throw ContractViolation("KS estimate needs at least " + std::to_string(min_size) + " replicates");
    for (double v : values)
        if (std::isnan(v)) throw DomainError("NaN statistic value in KS estimate");
    std::sort(values.begin(), values.end());
    const double N = static_cast<double>(values.size());
    KsResult r;
    for (std::size_t k = 0; k < values.size();) {
        const double v = values[k];
        const std::size_t a = k;
        while (k < values.size() && values[k] == v) ++k;
        const double phi = detail::phi_ext(v);
        for (double f : {static_cast<double>(a) / N, static_cast<double>(k) / N}) {
            if (std::abs(f - phi) > r.distance) {
                r.distance = std::abs(f - phi);
                r.at = v;
            }
        }
    }
    const double F = detail::phi_ext(r.at);
    r.se = std::sqrt(std::max(F * (1 - F), 1.0 / N) / N);
    return r;
}

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/delta) / (2 N)).
inline double dkw_epsilon(std::size_t reps, double delta) {
    return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(reps)));
}

}  // namespace sbe
