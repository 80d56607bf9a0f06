#pragma once

// U-statistics of degree m, the jackknife Studentizers s_n^2 and s_n*^2,
// T_n and T_n*, and the decomposition of sqrt(n) U_n / m and s_n*^2 into a
// linear part plus remainders. Combinations are visited in lexicographic
// order, so every floating sum is reproducible.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sbe/combinatorics.hpp"
#include "sbe/censoring.hpp"
#include "sbe/errors.hpp"
#include "sbe/exact.hpp"
#include "sbe/kernels.hpp"
#include "sbe/stein_kernel.hpp"

namespace sbe {

inline constexpr std::uint64_t kDefaultKernelCallCap = 10'000'000;

inline double binomial_d(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    double r = 1.0;
    if (k > n - k) k = n - k;
    for (std::size_t j = 1; j <= k; ++j) r = r * static_cast<double>(n - k + j) / static_cast<double>(j);
    return std::round(r);
}

/// Calls fn(positions) for each m-subset of {0..n-1} in lexicographic order,
/// refusing up front when C(n, m) exceeds `cap`.
template <class Fn>
void for_each_combination(std::size_t n, std::size_t m, std::uint64_t cap, Fn&& fn) {
    if (m > n) return;
    if (binomial(static_cast<long>(n), static_cast<long>(m)) > cap)
        throw CapExceeded("C(" + std::to_string(n) + "," + std::to_string(m) + ") exceeds the kernel call cap of " +
                          std::to_string(cap));
    std::vector<std::size_t> idx(m);
    for (std::size_t j = 0; j < m; ++j) idx[j] = j;
    while (true) {
        fn(std::span<const std::size_t>(idx));
        std::size_t j = m;
        while (j > 0 && idx[j - 1] == n - m + j - 1) --j;
        if (j == 0) return;
        ++idx[j - 1];
        for (std::size_t k = j; k < m; ++k) idx[k] = idx[k - 1] + 1;
    }
}

namespace detail {
inline void require_n_gt_m(std::size_t n, std::size_t m) {
    if (m == 0) throw ContractViolation("kernel degree must be at least 1");
    if (n <= m) throw ContractViolation("U-statistic needs n > m");
}
}  // namespace detail

/// Binomial-normalized symmetric sum.
template <SymmetricKernel K>
double u_statistic(const K& kernel, std::span<const double> data, std::uint64_t cap = kDefaultKernelCallCap) {
    const std::size_t n = data.size(), m = kernel.degree();
    detail::require_n_gt_m(n, m);
    std::vector<double> args(m);
    double sum = 0.0;
    for_each_combination(n, m, cap, [&](std::span<const std::size_t> idx) {
        for (std::size_t j = 0; j < m; ++j) args[j] = data[idx[j]];
        sum += kernel(std::span<const double>(args));
    });
    return sum / binomial_d(n, m);
}

struct JackknifeResult {
    double U = 0;
    std::vector<double> q;
    double s2 = 0;       // (n-1)/(n-m)^2 sum (q_i - U)^2
    double s2_star = 0;  // (n-1)/(n-m)^2 sum q_i^2
};

/// U_n and the pseudo-values q_i in one pass over the combinations.
template <SymmetricKernel K>
JackknifeResult jackknife(const K& kernel, std::span<const double> data, std::uint64_t cap = kDefaultKernelCallCap) {
    const std::size_t n = data.size(), m = kernel.degree();
    detail::require_n_gt_m(n, m);
    JackknifeResult r;
    r.q.assign(n, 0.0);
    std::vector<double> args(m);
    double sum = 0.0;
    for_each_combination(n, m, cap, [&](std::span<const std::size_t> idx) {
        for (std::size_t j = 0; j < m; ++j) args[j] = data[idx[j]];
        const double h = kernel(std::span<const double>(args));
        sum += h;
        for (auto i : idx) r.q[i] += h;
    });
    r.U = sum / binomial_d(n, m);
    const double c1 = binomial_d(n - 1, m - 1);
    const double scale = static_cast<double>(n - 1) / std::pow(static_cast<double>(n - m), 2);
    double ss = 0.0, ss_star = 0.0;
    for (auto& qi : r.q) {
        qi /= c1;
        ss += (qi - r.U) * (qi - r.U);
        ss_star += qi * qi;
    }
    r.s2 = scale * ss;
    r.s2_star = scale * ss_star;
    return r;
}

/// numerator / sqrt(denominator_sq) with the 0, +inf, -inf convention when the
/// denominator vanishes.
inline double self_normalized_ratio(double numerator, double denominator_sq) {
    if (denominator_sq > 0) return numerator / std::sqrt(denominator_sq);
    if (numerator > 0) return std::numeric_limits<double>::infinity();
    if (numerator < 0) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

struct StudentizedPair {
    double T;
    double T_star;
};

template <SymmetricKernel K>
StudentizedPair studentized(const K& kernel, std::span<const double> data, std::uint64_t cap = kDefaultKernelCallCap) {
    const auto jk = jackknife(kernel, data, cap);
    const double n = static_cast<double>(data.size()), m = static_cast<double>(kernel.degree());
    const double num = std::sqrt(n) * jk.U / m;
    return {self_normalized_ratio(num, jk.s2), self_normalized_ratio(num, jk.s2_star)};
}

/// b_n = m^2 (n-1) / (n-m)^2.
inline double b_n(std::size_t n, std::size_t m) {
    return static_cast<double>(m * m) * static_cast<double>(n - 1) / std::pow(static_cast<double>(n - m), 2);
}

inline Rational b_n_exact(std::size_t n, std::size_t m) {
    const long long d = static_cast<long long>(n - m);
    return Rational(static_cast<long long>(m * m * (n - 1)), d * d);
}

/// I(T > x) == I(T* > x / sqrt(1 + b_n x^2)) at every x of the grid.
inline bool event_equivalence_check(std::span<const double> xs, std::size_t n, std::size_t m, double T, double T_star) {
    const double b = b_n(n, m);
    for (double x : xs)
        if ((T > x) != (T_star > x / std::sqrt(1 + b * x * x))) return false;
    return true;
}

inline bool event_equivalence_check(double x, std::size_t n, std::size_t m, double T, double T_star) {
    return event_equivalence_check(std::span<const double>(&x, 1), n, m, T, T_star);
}

namespace detail {
// sign(sa sqrt(A) - sb sqrt(B)) for A, B >= 0 and signs in {-1, 0, 1}
inline int compare_signed_roots(int sa, const Rational& A, int sb, const Rational& B) {
    const int a = A == 0 ? 0 : sa;
    const int b = B == 0 ? 0 : sb;
    if (a != b) return a > b ? 1 : -1;
    if (a == 0) return 0;
    const int mag = A > B ? 1 : (A < B ? -1 : 0);
    return a > 0 ? mag : -mag;
}
inline int sgn(const Rational& r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }
}  // namespace detail

struct ExactStudentized {
    Rational U;
    Rational ss;       // sum (q_i - U)^2
    Rational ss_star;  // sum q_i^2
};

template <ExactKernel K>
ExactStudentized exact_studentized(const K& kernel, std::span<const Rational> data, std::uint64_t cap = kDefaultKernelCallCap) {
    const std::size_t n = data.size(), m = kernel.degree();
    detail::require_n_gt_m(n, m);
    std::vector<Rational> q(n, Rational(0));
    std::vector<Rational> args(m);
    Rational sum = 0;
    for_each_combination(n, m, cap, [&](std::span<const std::size_t> idx) {
        for (std::size_t j = 0; j < m; ++j) args[j] = data[idx[j]];
        const Rational h = kernel(std::span<const Rational>(args));
        sum += h;
        for (auto i : idx) q[i] += h;
    });
    ExactStudentized r;
    r.U = sum / Rational(binomial(static_cast<long>(n), static_cast<long>(m)));
    const Rational c1(binomial(static_cast<long>(n - 1), static_cast<long>(m - 1)));
    r.ss = 0;
    r.ss_star = 0;
    for (auto& qi : q) {
        qi /= c1;
        r.ss += (qi - r.U) * (qi - r.U);
        r.ss_star += qi * qi;
    }
    return r;
}

/// Both events decided in exact arithmetic (no square roots taken):
/// T > x compares sqrt(n) U / m with x s_n, and T* > x a_n(x) compares
/// sqrt(n) U sqrt(1 + b x^2) / m with x s_n*.
inline bool event_equivalence_exact(const ExactStudentized& r, std::size_t n, std::size_t m, const Rational& x) {
    const Rational scale = Rational(static_cast<long long>(n - 1), static_cast<long long>((n - m) * (n - m)));
    const Rational s2 = scale * r.ss;
    const Rational s2s = scale * r.ss_star;
    const Rational nU2 = Rational(static_cast<long long>(n)) * r.U * r.U / Rational(static_cast<long long>(m * m));
    const int su = detail::sgn(r.U), sx = detail::sgn(x);
    auto gt = [&](const Rational& denom_sq, const Rational& lhs_sq, const Rational& rhs_sq_no_denom) {
        if (denom_sq == 0) {
            // T = +-inf or 0 by the sign of U
            if (su > 0) return true;
            if (su < 0) return false;
            return Rational(0) > x;
        }
        return detail::compare_signed_roots(su, lhs_sq, sx, rhs_sq_no_denom * denom_sq) > 0;
    };
    const bool left = gt(s2, nU2, x * x);
    const Rational bx = b_n_exact(n, m) * x * x;
    const bool right = gt(s2s, nU2 * (1 + bx), x * x);
    return left == right;
}

/// Everything the decomposition of T_n* produces for one sample.
struct StudentizedUResult {
    std::size_t n = 0, m = 0;
    double U = 0;
    std::vector<double> q;
    double s2 = 0, s2_star = 0;
    double T = 0, T_star = 0;
    std::vector<double> xi;   // g(X_i) / sqrt(n)
    double W = 0;
    double D1 = 0;
    std::vector<double> psi;  // Psi_{n,i}
    double Lambda2 = 0, V2 = 0;
    double delta1 = 0, delta2 = 0;
    double d2 = 0;            // n / (n - 1)
    double C1 = 0;            // C(n-1, m-1)
    std::vector<double> pair_hbar;  // n x n: sum of hbar over combinations holding both i and j (raw, no 1/sqrt n)
    double w_plus_d1_residual = 0;  // relative
    double s_star_residual = 0;     // relative
};

/// Core decomposition over precomputed g-values and a combination evaluator
/// for the (mean-zero, sigma_g = 1) kernel.
template <class HCombo>
StudentizedUResult decompose(std::size_t n, std::size_t m, std::span<const double> g, HCombo&& h, bool want_pairs,
                             std::uint64_t cap = kDefaultKernelCallCap) {
    detail::require_n_gt_m(n, m);
    StudentizedUResult r;
    r.n = n;
    r.m = m;
    r.q.assign(n, 0.0);
    r.psi.assign(n, 0.0);
    if (want_pairs) r.pair_hbar.assign(n * n, 0.0);
    double sum_h = 0.0, sum_hb = 0.0, sum_abs = 0.0;
    for_each_combination(n, m, cap, [&](std::span<const std::size_t> idx) {
        const double hv = h(idx);
        double hb = hv;
        for (auto i : idx) hb -= g[i];
        sum_h += hv;
        sum_abs += std::abs(hv);
        sum_hb += hb;
        for (auto i : idx) {
            r.q[i] += hv;
            r.psi[i] += hb;
        }
        if (want_pairs)
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = a + 1; b < idx.size(); ++b) {
                    r.pair_hbar[idx[a] * n + idx[b]] += hb;
                    r.pair_hbar[idx[b] * n + idx[a]] += hb;
                }
    });
    const double nd = static_cast<double>(n), md = static_cast<double>(m), nm = nd - md;
    const double rn = std::sqrt(nd);
    r.C1 = binomial_d(n - 1, m - 1);
    r.U = sum_h / binomial_d(n, m);
    const double scale = (nd - 1) / (nm * nm);
    double ss = 0, ss_star = 0;
    for (auto& qi : r.q) {
        qi /= r.C1;
        ss += (qi - r.U) * (qi - r.U);
        ss_star += qi * qi;
    }
    r.s2 = scale * ss;
    r.s2_star = scale * ss_star;
    const double num = rn * r.U / md;
    r.T = self_normalized_ratio(num, r.s2);
    r.T_star = self_normalized_ratio(num, r.s2_star);

    r.xi.resize(n);
    double sum_psi = 0, sum_xi_psi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r.xi[i] = g[i] / rn;
        r.W += r.xi[i];
        r.V2 += r.xi[i] * r.xi[i];
        r.psi[i] /= rn;
        r.Lambda2 += r.psi[i] * r.psi[i];
        sum_psi += r.psi[i];
        sum_xi_psi += r.xi[i] * r.psi[i];
    }
    r.D1 = sum_hb / (r.C1 * rn);
    r.delta1 = (nd * (md - 1) * (md - 1) / (nm * nm) + 2 * (md - 1) / nm) * r.W * r.W +
               (nd - 1) * (nd - 1) * r.Lambda2 / (r.C1 * r.C1 * nm * nm) +
               2 * (nd - 1) * (md - 1) / (nm * nm * r.C1) * r.W * sum_psi;
    r.delta2 = 2 * (nd - 1) / nm / r.C1 * sum_xi_psi;
    r.d2 = nd / (nd - 1);

    // residuals are relative to the magnitude of the summed terms, so exact
    // cancellation to zero does not read as a relative error of 1
    double sum_abs_xi = 0;
    for (double v : r.xi) sum_abs_xi += std::abs(v);
    const double lhs1 = num, rhs1 = r.W + r.D1;
    const double scale1 = std::max({std::abs(lhs1), std::abs(r.W) + std::abs(r.D1),
                                    rn * sum_abs / binomial_d(n, m) / md + sum_abs_xi, 1e-300});
    r.w_plus_d1_residual = std::abs(lhs1 - rhs1) / scale1;
    const double rhs2 = r.d2 * (r.V2 + r.delta1 + r.delta2);
    const double scale2 = std::max({r.s2_star, r.d2 * (r.V2 + std::abs(r.delta1) + std::abs(r.delta2)), 1e-300});
    r.s_star_residual = std::abs(r.s2_star - rhs2) / scale2;
    return r;
}

/// Decomposition for a generic kernel: `kernel` must already be centered and
/// scaled so that E h = 0 and Var g = 1, and `g` is its canonical function.
template <SymmetricKernel K, class G>
StudentizedUResult decomposition_terms(const K& kernel, G&& g, std::span<const double> data, bool want_pairs = false,
                                       std::uint64_t cap = kDefaultKernelCallCap) {
    const std::size_t n = data.size(), m = kernel.degree();
    std::vector<double> gv(n);
    for (std::size_t i = 0; i < n; ++i) gv[i] = g(data[i]);
    std::vector<double> args(m);
    auto h = [&](std::span<const std::size_t> idx) {
        for (std::size_t j = 0; j < m; ++j) args[j] = data[idx[j]];
        return static_cast<double>(kernel(std::span<const double>(args)));
    };
    return decompose(n, m, gv, h, want_pairs, cap);
}

/// The Cauchy step behind delta_1n >= 0: the W Psi cross term is dominated
/// by the sum of the W^2 and Lambda^2 terms.
inline bool wpsi_cauchy_check(const StudentizedUResult& r, double rel_slack = 1e-12) {
    const double nd = static_cast<double>(r.n), md = static_cast<double>(r.m), nm = nd - md;
    double sum_psi = 0;
    for (double p : r.psi) sum_psi += p;
    const double cross = 2 * (nd - 1) * (md - 1) / (nm * nm * r.C1) * std::abs(r.W * sum_psi);
    const double bound = nd * (md - 1) * (md - 1) / (nm * nm) * r.W * r.W +
                         (nd - 1) * (nd - 1) / (r.C1 * r.C1 * nm * nm) * r.Lambda2;
    return cross <= bound * (1 + rel_slack) + 1e-300;
}

enum class Pi2Variant { with_rootn, without };

struct Pi2Terms {
    double pi2 = 0;
    std::vector<double> pi2_loo;
    double delta2b = 0;
    std::vector<double> delta2b_loo;
    std::vector<double> d1_loo;  // D_1n^{(i)}
    std::vector<double> xi_b;
    double kappa = 0;            // sum_i E[(xi_i^2 - 1) I(|xi_i| > 1)]
};

/// Pi_2 = delta_{2n,b} + (n^{-1/2} | 0) - kappa and its leave-one-out versions.
/// `kappa_i` is E[(xi_i^2 - 1) I(|xi_i| > 1)] for one (identically distributed) summand.
/// Needs a decomposition computed with want_pairs when m >= 2.
inline Pi2Terms pi2_terms(const StudentizedUResult& r, Pi2Variant variant, double kappa_i) {
    const std::size_t n = r.n, m = r.m;
    const double nd = static_cast<double>(n), md = static_cast<double>(m), rn = std::sqrt(nd);
    Pi2Terms t;
    t.kappa = nd * kappa_i;
    t.xi_b.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.xi_b[i] = censor_xi(r.xi[i]);
    const double extra = variant == Pi2Variant::with_rootn ? 1.0 / rn : 0.0;
    t.d1_loo.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.d1_loo[i] = r.D1 - r.psi[i] / r.C1;
    t.delta2b_loo.assign(n, 0.0);
    if (m >= 2) {
        if (r.pair_hbar.size() != n * n) throw ContractViolation("pi2_terms needs the pairwise hbar sums");
        const double c = 2 * (nd - 1) / (nd - md) / r.C1;
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) acc += t.xi_b[i] * r.psi[i];
        t.delta2b = c * acc;
        // delta^{(i)} = c / sqrt(n) sum_{j != i} xi_b,j (sqrt(n) Psi_j - P_ji)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                s += t.xi_b[j] * (rn * r.psi[j] - r.pair_hbar[j * n + i]);
            }
            t.delta2b_loo[i] = c * s / rn;
        }
    }
    t.pi2 = t.delta2b + extra - t.kappa;
    t.pi2_loo.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.pi2_loo[i] = t.delta2b_loo[i] + extra - (nd - 1) * kappa_i;
    return t;
}

/// Leave-one-out Studentizers: s*^2 (or s^2 when `plain`) rebuilt from the
/// same decomposition with every term involving X_i removed and n kept fixed.
inline std::vector<double> studentizer_loo(const StudentizedUResult& r, bool plain) {
    const std::size_t n = r.n, m = r.m;
    const double nd = static_cast<double>(n), md = static_cast<double>(m), nm = nd - md, rn = std::sqrt(nd);
    std::vector<double> out(n);
    const bool pairs = m >= 2;
    if (pairs && r.pair_hbar.size() != n * n) throw ContractViolation("studentizer_loo needs the pairwise hbar sums");
    for (std::size_t i = 0; i < n; ++i) {
        const double W = r.W - r.xi[i];
        const double V2 = r.V2 - r.xi[i] * r.xi[i];
        double Lambda2 = 0, sum_psi = 0, sum_xi_psi = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double psi = pairs ? r.psi[j] - r.pair_hbar[j * n + i] / rn : 0.0;
            Lambda2 += psi * psi;
            sum_psi += psi;
            sum_xi_psi += r.xi[j] * psi;
        }
        const double delta1 = (nd * (md - 1) * (md - 1) / (nm * nm) + 2 * (md - 1) / nm) * W * W +
                              (nd - 1) * (nd - 1) * Lambda2 / (r.C1 * r.C1 * nm * nm) +
                              2 * (nd - 1) * (md - 1) / (nm * nm * r.C1) * W * sum_psi;
        const double delta2 = 2 * (nd - 1) / nm / r.C1 * sum_xi_psi;
        double s2 = r.d2 * (V2 + delta1 + delta2);
        if (plain) {
            const double d1 = r.D1 - r.psi[i] / r.C1;
            s2 -= b_n(n, m) * (W + d1) * (W + d1);
        }
        out[i] = s2;
    }
    return out;
}

struct BridgingResult {
    double lhs;
    double rhs;
    bool ok;
};

/// |Phibar(x a) - Phibar(x)| <= min(b x^3 / sqrt(2 pi), 2 / max(2, sqrt(2 pi) x a)) e^{-x^2 a^2 / 2}
/// with a = (1 + b_n x^2)^{-1/2}.
inline BridgingResult bridging_check(double x, std::size_t n, std::size_t m) {
    if (!(x >= 0)) throw DomainError("bridging check needs x >= 0");
    if (n <= m) throw ContractViolation("bridging check needs n > m");
    const double b = b_n(n, m);
    const double a = 1.0 / std::sqrt(1.0 + b * x * x);
    const double xa = x * a;
    const double lhs = std::abs(normal_sf(xa) - normal_sf(x));
    const double first = b * x * x * x / kSqrt2Pi;
    const double second = 2.0 / std::max(2.0, kSqrt2Pi * xa);
    const double rhs = std::min(first, second) * std::exp(-xa * xa / 2);
    return {lhs, rhs, lhs <= rhs * (1 + 1e-12) + 1e-300};
}

/// U_n, s_n^2 and s_n*^2 from atom counts when every observation is one of
/// K atoms: the sums over combinations collapse to sums over multisets of
/// atoms weighted by products of binomials. Cost is independent of n.
class MultisetEvaluator {
public:
    template <SymmetricKernel Kern>
    MultisetEvaluator(const Kern& kernel, std::vector<double> atom_values)
        : m_(kernel.degree()), atoms_(std::move(atom_values)) {
        if (m_ == 0) throw ContractViolation("kernel degree must be at least 1");
        build(m_, full_);
        build(m_ - 1, rest_);
        std::vector<double> args(m_);
        for (auto& e : full_) {
            std::size_t pos = 0;
            for (std::size_t a = 0; a < atoms_.size(); ++a)
                for (std::size_t c = 0; c < e.mult[a]; ++c) args[pos++] = atoms_[a];
            e.h = kernel(std::span<const double>(args));
        }
        // h(a + M) for each atom a and each multiset M of size m - 1
        add_h_.assign(atoms_.size() * rest_.size(), 0.0);
        for (std::size_t a = 0; a < atoms_.size(); ++a)
            for (std::size_t r = 0; r < rest_.size(); ++r) {
                std::size_t pos = 0;
                args[pos++] = atoms_[a];
                for (std::size_t b = 0; b < atoms_.size(); ++b)
                    for (std::size_t c = 0; c < rest_[r].mult[b]; ++c) args[pos++] = atoms_[b];
                add_h_[a * rest_.size() + r] = kernel(std::span<const double>(args));
            }
    }

    std::size_t atoms() const { return atoms_.size(); }

    struct Result {
        double U = 0, s2 = 0, s2_star = 0, T = 0, T_star = 0;
    };

    Result evaluate(std::span<const std::size_t> counts) const {
        std::size_t n = 0;
        for (auto c : counts) n += c;
        detail::require_n_gt_m(n, m_);
        Result r;
        double sum = 0;
        for (const auto& e : full_) {
            double w = 1;
            for (std::size_t a = 0; a < atoms_.size() && w != 0; ++a) w *= binomial_d(counts[a], e.mult[a]);
            sum += w * e.h;
        }
        r.U = sum / binomial_d(n, m_);
        const double c1 = binomial_d(n - 1, m_ - 1);
        double ss = 0, ss_star = 0;
        for (std::size_t a = 0; a < atoms_.size(); ++a) {
            if (counts[a] == 0) continue;
            double qa = 0;
            for (std::size_t k = 0; k < rest_.size(); ++k) {
                double w = 1;
                for (std::size_t b = 0; b < atoms_.size() && w != 0; ++b)
                    w *= binomial_d(counts[b] - (b == a ? 1 : 0), rest_[k].mult[b]);
                qa += w * add_h_[a * rest_.size() + k];
            }
            qa /= c1;
            const double ca = static_cast<double>(counts[a]);
            ss += ca * (qa - r.U) * (qa - r.U);
            ss_star += ca * qa * qa;
        }
        const double nd = static_cast<double>(n), md = static_cast<double>(m_);
        const double scale = (nd - 1) / ((nd - md) * (nd - md));
        r.s2 = scale * ss;
        r.s2_star = scale * ss_star;
        const double num = std::sqrt(nd) * r.U / md;
        r.T = self_normalized_ratio(num, r.s2);
        r.T_star = self_normalized_ratio(num, r.s2_star);
        return r;
    }

private:
    struct Entry {
        std::vector<std::size_t> mult;
        double h = 0;
    };

    void build(std::size_t size, std::vector<Entry>& out) const {
        out.clear();
        std::vector<std::size_t> mult(atoms_.size(), 0);
        auto rec = [&](auto&& self, std::size_t a, std::size_t left) -> void {
            if (a + 1 == atoms_.size()) {
                mult[a] = left;
                out.push_back({mult, 0.0});
                return;
            }
            for (std::size_t c = 0; c <= left; ++c) {
                mult[a] = c;
                self(self, a + 1, left - c);
            }
        };
        rec(rec, 0, size);
    }

    std::size_t m_;
    std::vector<double> atoms_;
    std::vector<Entry> full_, rest_;
    std::vector<double> add_h_;
};

}  // namespace sbe
