#pragma once

// Exact Hoeffding components of a symmetric kernel under a discrete law with
// rational atoms: h_k(x_1..x_k) = E[h | X_1..X_k = x_1..x_k], g = h_1,
// hbar_k = h_k - sum g(x_i). Tables are exact; the sigma_g = 1 normalization
// is applied on top (sigma_g is generally irrational, so normalized values
// are doubles while normalized second moments stay exact).

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sbe/combinatorics.hpp"
#include "sbe/distribution.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"
#include "sbe/kernels.hpp"

namespace sbe {

class HoeffdingComponents {
public:
    std::size_t m = 0;
    std::size_t atoms = 0;
    std::vector<Rational> values;       // atom values
    std::vector<double> values_d;
    std::vector<Rational> probs;
    std::vector<double> probs_d;
    Rational raw_sigma_g2;              // Var g before normalization
    Rational raw_Eh2;                   // E h^2 before normalization
    double sigma_g = 0.0;               // sqrt(raw_sigma_g2)
    std::vector<std::vector<Rational>> h_raw;  // h_raw[k] has atoms^k entries, k = 1..m (h_raw[0] = {E h})

    std::size_t table_index(std::span<const std::size_t> idx) const {
        std::size_t pos = 0;
        for (auto i : idx) pos = pos * atoms + i;
        return pos;
    }

    /// Normalized g at an atom index.
    double g(std::size_t atom) const { return g_norm_[atom]; }

    /// Normalized g at a value that must be one of the atoms.
    double g_at(double x) const {
        const auto it = std::lower_bound(values_d.begin(), values_d.end(), x);
        if (it == values_d.end() || *it != x) throw DomainError("value is not an atom of the law");
        return g_norm_[static_cast<std::size_t>(it - values_d.begin())];
    }

    long atom_index(double x) const {
        const auto it = std::lower_bound(values_d.begin(), values_d.end(), x);
        if (it == values_d.end() || *it != x) return -1;
        return static_cast<long>(it - values_d.begin());
    }

    /// Raw (unnormalized) hbar_k at atom indices.
    Rational hbar_raw(std::span<const std::size_t> idx) const {
        Rational v = h_raw[idx.size()][table_index(idx)];
        for (auto i : idx) v -= h_raw[1][i];
        return v;
    }

    /// Normalized kernel h / sigma_g at atom indices.
    double h_norm(std::span<const std::size_t> idx) const {
        return static_cast<double>(h_raw[m][table_index(idx)]) / sigma_g;
    }

    /// Normalized hbar_m at atom indices.
    double hbar_norm(std::span<const std::size_t> idx) const {
        return static_cast<double>(hbar_raw(idx)) / sigma_g;
    }

    /// E|h_k|^p before normalization (p = 2 or 3), exact.
    Rational raw_abs_moment(std::size_t k, int p) const {
        Rational acc = 0;
        std::vector<std::size_t> idx(k, 0);
        for (std::size_t pos = 0; pos < h_raw[k].size(); ++pos) {
            std::size_t rem = pos;
            Rational w = 1;
            for (std::size_t j = k; j-- > 0;) {
                idx[j] = rem % atoms;
                rem /= atoms;
                w *= probs[idx[j]];
            }
            Rational v = h_raw[k][pos];
            if (v < 0) v = -v;
            Rational pw = 1;
            for (int e = 0; e < p; ++e) pw *= v;
            acc += w * pw;
        }
        return acc;
    }

    /// E[hbar_k^2] before normalization, exact.
    Rational raw_hbar_second(std::size_t k) const {
        if (k <= 1) return 0;
        Rational acc = 0;
        std::vector<std::size_t> idx(k, 0);
        for (std::size_t pos = 0; pos < h_raw[k].size(); ++pos) {
            std::size_t rem = pos;
            Rational w = 1;
            for (std::size_t j = k; j-- > 0;) {
                idx[j] = rem % atoms;
                rem /= atoms;
                w *= probs[idx[j]];
            }
            const Rational v = hbar_raw(idx);
            acc += w * v * v;
        }
        return acc;
    }

    /// Normalized E[hbar_k^2] (exact: divide by sigma_g^2).
    Rational hbar_second(std::size_t k) const { return raw_hbar_second(k) / raw_sigma_g2; }

private:
    std::vector<double> g_norm_;

public:
    void finalize() {
        values_d.clear();
        probs_d.clear();
        for (const auto& v : values) values_d.push_back(static_cast<double>(v));
        for (const auto& p : probs) probs_d.push_back(static_cast<double>(p));
        Rational eg2 = 0;
        for (std::size_t a = 0; a < atoms; ++a) eg2 += probs[a] * h_raw[1][a] * h_raw[1][a];
        raw_sigma_g2 = eg2;
        raw_Eh2 = raw_abs_moment(m, 2);
        if (raw_sigma_g2 == 0) throw DegenerateKernel("canonical function has zero variance");
        sigma_g = std::sqrt(static_cast<double>(raw_sigma_g2));
        g_norm_.clear();
        for (std::size_t a = 0; a < atoms; ++a) g_norm_.push_back(static_cast<double>(h_raw[1][a]) / sigma_g);
    }
};

/// Exact Hoeffding tables. The law must have rational atoms, the kernel must
/// have exact mean zero under it, and atoms^m must stay within `cap`.
template <ExactKernel K>
HoeffdingComponents hoeffding(const K& kernel, const DiscreteDistribution& dist, std::uint64_t cap = 1'000'000) {
    if (!dist.has_rational_values()) throw ContractViolation("exact Hoeffding tables need rational atom values");
    const std::size_t m = kernel.degree();
    if (m == 0) throw ContractViolation("kernel degree must be at least 1");
    HoeffdingComponents c;
    c.m = m;
    c.atoms = dist.size();
    const std::size_t K_ = c.atoms;
    // C(atoms + m - 1, m) distinct multisets, atoms^m table entries
    BigInt full = 1;
    for (std::size_t j = 0; j < m; ++j) full *= K_;
    if (full > cap || binomial(static_cast<long>(K_ + m - 1), static_cast<long>(m)) > cap)
        throw CapExceeded("Hoeffding table exceeds cap");
    for (const auto& a : dist.atoms()) {
        c.values.push_back(a.value.to_rational());
        c.probs.push_back(a.p);
    }
    const auto total = static_cast<std::size_t>(full);

    // h_m over all tuples, evaluated once per sorted multiset
    std::vector<Rational> hm(total);
    std::vector<std::size_t> idx(m, 0);
    std::vector<Rational> args(m);
    std::vector<bool> done(total, false);
    for (std::size_t pos = 0; pos < total; ++pos) {
        std::size_t rem = pos;
        for (std::size_t j = m; j-- > 0;) {
            idx[j] = rem % K_;
            rem /= K_;
        }
        std::vector<std::size_t> sorted = idx;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t canon = c.table_index(sorted);
        if (!done[canon]) {
            for (std::size_t j = 0; j < m; ++j) args[j] = c.values[sorted[j]];
            hm[canon] = kernel(std::span<const Rational>(args));
            done[canon] = true;
        }
        hm[pos] = hm[canon];
    }

    // symmetry spot check: evaluate a few permuted argument orders directly
    for (std::size_t pos = 0; pos < std::min<std::size_t>(total, 64); ++pos) {
        std::size_t rem = pos;
        for (std::size_t j = m; j-- > 0;) {
            idx[j] = rem % K_;
            rem /= K_;
        }
        std::vector<std::size_t> perm = idx;
        std::reverse(perm.begin(), perm.end());
        if (m > 2) std::rotate(perm.begin(), perm.begin() + 1, perm.end());
        for (std::size_t j = 0; j < m; ++j) args[j] = c.values[perm[j]];
        const Rational direct = kernel(std::span<const Rational>(args));
        for (std::size_t j = 0; j < m; ++j) args[j] = c.values[idx[j]];
        if (direct != kernel(std::span<const Rational>(args))) throw ContractViolation("kernel is not symmetric");
    }

    // h_k(first k args) = sum over the last m - k args weighted by their probabilities
    c.h_raw.assign(m + 1, {});
    c.h_raw[m] = hm;
    for (std::size_t k = m; k-- > 0;) {
        std::size_t size_k = 1;
        for (std::size_t j = 0; j < k; ++j) size_k *= K_;
        std::vector<Rational> hk(size_k, Rational(0));
        for (std::size_t pos = 0; pos < c.h_raw[k + 1].size(); ++pos)
            hk[pos / K_] += c.h_raw[k + 1][pos] * c.probs[pos % K_];
        c.h_raw[k] = std::move(hk);
    }
    if (c.h_raw[0][0] != 0)
        throw ContractViolation("kernel mean is " + c.h_raw[0][0].str() + " under the law, not 0");
    c.finalize();
    return c;
}

/// E h under the law, exact; used to center a kernel before hoeffding().
template <ExactKernel K>
Rational kernel_mean(const K& kernel, const DiscreteDistribution& dist, std::uint64_t cap = 1'000'000) {
    if (!dist.has_rational_values()) throw ContractViolation("exact kernel mean needs rational atom values");
    const std::size_t m = kernel.degree();
    BigInt full = 1;
    for (std::size_t j = 0; j < m; ++j) full *= dist.size();
    if (full > cap) throw CapExceeded("kernel mean enumeration exceeds cap");
    std::vector<Rational> vals, probs;
    for (const auto& a : dist.atoms()) {
        vals.push_back(a.value.to_rational());
        probs.push_back(a.p);
    }
    Rational acc = 0;
    std::vector<Rational> args(m);
    const auto total = static_cast<std::size_t>(full);
    for (std::size_t pos = 0; pos < total; ++pos) {
        std::size_t rem = pos;
        Rational w = 1;
        for (std::size_t j = m; j-- > 0;) {
            const std::size_t a = rem % dist.size();
            rem /= dist.size();
            args[j] = vals[a];
            w *= probs[a];
        }
        acc += w * kernel(std::span<const Rational>(args));
    }
    return acc;
}

/// Centers the kernel by its exact mean under the law, then builds the tables.
template <ExactKernel K>
HoeffdingComponents centered_hoeffding(const K& kernel, const DiscreteDistribution& dist, std::uint64_t cap = 1'000'000) {
    return hoeffding(Centered<K>(kernel, kernel_mean(kernel, dist, cap)), dist, cap);
}

struct MomentReport {
    double E_abs_g3 = 0;  // E|g|^3 (normalized)
    double E_h2 = 0;      // E h^2 (normalized)
    double g3_norm = 0;   // ||g||_3
    double h3_norm = 0;   // ||h||_3
    double h2_norm = 0;   // ||h||_2
    Rational raw_sigma_g2;
    Rational raw_Eh2;
    Rational normalized_Eh2;
    bool jensen_ok = false;          // E|h_k|^p <= E|h_k'|^p, p in {2,3}, k <= k'
    bool extract_extra_m_ok = false; // m E g^2 <= E h^2
};

inline MomentReport moment_report(const HoeffdingComponents& c) {
    MomentReport r;
    r.raw_sigma_g2 = c.raw_sigma_g2;
    r.raw_Eh2 = c.raw_Eh2;
    r.normalized_Eh2 = c.raw_Eh2 / c.raw_sigma_g2;
    const double s = c.sigma_g;
    const double g3 = static_cast<double>(c.raw_abs_moment(1, 3));
    const double h3 = static_cast<double>(c.raw_abs_moment(c.m, 3));
    r.E_abs_g3 = g3 / (s * s * s);
    r.E_h2 = static_cast<double>(r.normalized_Eh2);
    r.g3_norm = std::cbrt(r.E_abs_g3);
    r.h3_norm = std::cbrt(h3 / (s * s * s));
    r.h2_norm = std::sqrt(r.E_h2);
    r.jensen_ok = true;
    for (int p : {2, 3}) {
        std::vector<Rational> mom;
        for (std::size_t k = 1; k <= c.m; ++k) mom.push_back(c.raw_abs_moment(k, p));
        for (std::size_t k = 1; k < mom.size(); ++k)
            if (mom[k - 1] > mom[k]) r.jensen_ok = false;
    }
    r.extract_extra_m_ok = Rational(static_cast<long long>(c.m)) * c.raw_sigma_g2 <= c.raw_Eh2;
    return r;
}

/// The constant-free bracket (E|g|^3 + m (E h^2 + ||g||_3 ||h||_3)) / sqrt(n).
inline double be_bound_ustat(const MomentReport& mom, std::size_t n, std::size_t m) {
    if (2 * m >= n) throw DomainError("the bound needs 2m < n");
    return (mom.E_abs_g3 + static_cast<double>(m) * (mom.E_h2 + mom.g3_norm * mom.h3_norm)) /
           std::sqrt(static_cast<double>(n));
}

}  // namespace sbe
