#pragma once

// Exact checks of the binomial identities used in the U-statistic moment
// calculations. All comparisons cross-multiply; nothing is divided.

#include <cstddef>
#include <string>
#include <vector>

#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

/// Pascal triangle of exact binomials C(n, k) for n <= n_max.
class BinomialTable {
public:
    explicit BinomialTable(std::size_t n_max) : rows_(n_max + 1) {
        for (std::size_t n = 0; n <= n_max; ++n) {
            rows_[n].assign(n + 1, BigInt(1));
            for (std::size_t k = 1; k < n; ++k) rows_[n][k] = rows_[n - 1][k - 1] + rows_[n - 1][k];
        }
    }

    std::size_t n_max() const { return rows_.size() - 1; }

    /// C(n, k), zero when k < 0 or k > n; n must be within the table.
    BigInt operator()(long n, long k) const {
        if (n < 0) throw DomainError("binomial with negative n");
        if (static_cast<std::size_t>(n) > n_max()) throw DomainError("binomial table too small");
        if (k < 0 || k > n) return 0;
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

    /// C(0,0) = C(n,n) = 1 and the Pascal recurrence, re-verified.
    bool self_check() const {
        for (std::size_t n = 0; n <= n_max(); ++n) {
            if (rows_[n].front() != 1 || rows_[n].back() != 1) return false;
            for (std::size_t k = 1; k < n; ++k)
                if (rows_[n][k] != rows_[n - 1][k - 1] + rows_[n - 1][k]) return false;
        }
        return true;
    }

private:
    std::vector<std::vector<BigInt>> rows_;
};

inline const BinomialTable& binomials() {
    static const BinomialTable table(128);
    return table;
}

/// C(n, k) for any size, computed multiplicatively.
inline BigInt binomial(long n, long k) {
    if (n < 0 || k < 0 || k > n) return 0;
    if (static_cast<std::size_t>(n) <= binomials().n_max()) return binomials()(n, k);
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (long j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
}

/// sum_k C(n1,k) C(n2,m-k) = C(n1+n2, m).
inline bool vandermonde_check(long n1, long n2, long m) {
    BigInt lhs = 0;
    for (long k = 0; k <= m; ++k) lhs += binomial(n1, k) * binomial(n2, m - k);
    return lhs == binomial(n1 + n2, m);
}

/// C(n,k) C(n-k, m-k) = C(n,m) C(m,k) for k <= m <= n.
inline bool product_identity_check(long n, long m, long k) {
    if (k < 0 || k > m || m > n) throw DomainError("product identity needs 0 <= k <= m <= n");
    return binomial(n, k) * binomial(n - k, m - k) == binomial(n, m) * binomial(m, k);
}

/// C(a,b) - C(a-e,b) <= C(a,b) b e / (a-b+1) for positive a, b, e with b + e <= a.
inline bool difference_bound_check(long a, long b, long e) {
    if (a <= 0 || b <= 0 || e <= 0 || b + e > a) throw DomainError("difference bound needs positive a,b,e with b+e <= a");
    const BigInt cab = binomial(a, b);
    return (cab - binomial(a - e, b)) * (a - b + 1) <= cab * b * e;
}

struct EnumEqualityResult {
    bool ok = true;
    int checked = 0;          // how many of the five identities were defined
    std::vector<int> failed;  // 1-based identity numbers that failed
};

/// The five ratios between C(n-1, m-1) and its neighbours. An identity is
/// checked when every binomial argument is nonnegative and its denominator
/// is nonzero.
inline EnumEqualityResult enum_equalities_check(long n, long m) {
    EnumEqualityResult r;
    const BigInt base = binomial(n - 1, m - 1);
    auto test = [&](int id, bool defined, const BigInt& lhs_times_den, const BigInt& rhs) {
        if (!defined) return;
        ++r.checked;
        if (lhs_times_den != rhs) {
            r.ok = false;
            r.failed.push_back(id);
        }
    };
    const bool n1 = n >= 2 && m >= 1;
    test(1, n1, binomial(n - 2, m - 1) * (n - 1), base * (n - m));
    test(2, n >= 2 && m >= 2, binomial(n - 2, m - 2) * (n - 1), base * (m - 1));
    test(3, n >= 3 && m >= 2, binomial(n - 3, m - 2) * (n - 1) * (n - 2), base * (m - 1) * (n - m));
    test(4, n >= 3 && m >= 3, binomial(n - 3, m - 3) * (n - 1) * (n - 2), base * (m - 1) * (m - 2));
    test(5, n >= 4 && m >= 4, binomial(n - 4, m - 4) * (n - 1) * (n - 2) * (n - 3),
         base * (m - 1) * (m - 2) * (m - 3));
    return r;
}

struct SweepResult {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    bool ok() const { return failures == 0 && cases > 0; }
};

/// Vandermonde over all splits n1 + n2 = n and m <= n <= n_max.
inline SweepResult sweep_vandermonde(long n_max = 30) {
    SweepResult s{"vandermonde"};
    for (long n = 0; n <= n_max; ++n)
        for (long m = 0; m <= n; ++m)
            for (long n1 = 0; n1 <= n; ++n1) {
                ++s.cases;
                if (!vandermonde_check(n1, n - n1, m)) ++s.failures;
            }
    return s;
}

inline SweepResult sweep_product_identity(long n_max = 30) {
    SweepResult s{"product_identity"};
    for (long n = 0; n <= n_max; ++n)
        for (long m = 0; m <= n; ++m)
            for (long k = 0; k <= m; ++k) {
                ++s.cases;
                if (!product_identity_check(n, m, k)) ++s.failures;
            }
    return s;
}

inline SweepResult sweep_difference_bound(long a_max = 40) {
    SweepResult s{"difference_bound"};
    for (long a = 2; a <= a_max; ++a)
        for (long b = 1; b < a; ++b)
            for (long e = 1; b + e <= a; ++e) {
                ++s.cases;
                if (!difference_bound_check(a, b, e)) ++s.failures;
            }
    return s;
}

inline SweepResult sweep_enum_equalities(long n_max = 60) {
    SweepResult s{"enum_equalities"};
    for (long n = 2; n <= n_max; ++n)
        for (long m = 1; m < n; ++m) {
            const auto r = enum_equalities_check(n, m);
            s.cases += static_cast<std::size_t>(r.checked);
            s.failures += r.failed.size();
        }
    return s;
}

inline std::vector<SweepResult> combinatorics_sweeps() {
    return {sweep_vandermonde(), sweep_product_identity(), sweep_difference_bound(), sweep_enum_equalities()};
}

}  // namespace sbe
