#pragma once

// Standard normal primitives and the bounded solution f_x of the Stein
// equation f'(w) - w f(w) = I(w <= x) - Phi(x), its derivative, and
// g_x(w) = (w f_x(w))'.
//
// Every branch is written in terms of the Mills ratio R(z) = Phibar(z)/phi(z)
// = sqrt(2 pi) e^{z^2/2} Phibar(z) so nothing overflows for |w| <= 700.
// The two cancellation-prone combinations 1 - z R(z) and (1 + z^2) R(z) - z
// switch to their asymptotic series for large z.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sbe/config.hpp"
#include "sbe/errors.hpp"

namespace sbe {

inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362104849;

inline double normal_pdf(double w) {
    return std::exp(-0.5 * w * w) / kSqrt2Pi;
}

inline double normal_cdf(double w) {
    if (std::isnan(w)) throw DomainError("normal_cdf: NaN input");
    return 0.5 * std::erfc(-w * kInvSqrt2);
}

/// Phibar(w) = 1 - Phi(w), accurate in the upper tail.
inline double normal_sf(double w) {
    if (std::isnan(w)) throw DomainError("normal_sf: NaN input");
    return 0.5 * std::erfc(w * kInvSqrt2);
}

/// Scaled complementary error function e^{z^2} erfc(z) for z >= 0.
inline double erfcx(double z) {
    if (std::isnan(z)) return z;
    if (z < 0) {
        // 2 e^{z^2} - erfcx(-z); only used for moderate |z|
        const double hi = z * z;
        const double lo = std::fma(z, z, -hi);
        return 2.0 * std::exp(hi) * (1.0 + lo) - erfcx(-z);
    }
    if (z < 26.0) {
        const double hi = z * z;
        const double lo = std::fma(z, z, -hi);
        return std::exp(hi) * (1.0 + lo) * std::erfc(z);
    }
    // continued fraction 1/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    double tail = z;
    for (int k = 60; k >= 1; --k) tail = z + (0.5 * k) / tail;
    return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

/// e^{w^2/2} Phibar(w).
inline double mills_scaled(double w) {
    return 0.5 * erfcx(w * kInvSqrt2);
}

/// Mills ratio R(z) = Phibar(z)/phi(z).
inline double mills_ratio(double z) {
    return kSqrt2Pi * mills_scaled(z);
}

namespace detail {

// 1 - z R(z) = sum_{k>=1} (-1)^{k+1} (2k-1)!! / z^{2k}
inline double one_minus_z_mills(double z) {
    if (z < 12.0) return 1.0 - z * mills_ratio(z);
    const double inv2 = 1.0 / (z * z);
    double term = inv2;
    double sum = 0.0;
    for (int k = 1; k < 60; ++k) {
        sum += (k % 2 == 1) ? term : -term;
        const double next = term * (2.0 * k + 1.0) * inv2;
        if (next < 1e-18 * std::abs(sum) || next > term) break;
        term = next;
    }
    return sum;
}

// (1 + z^2) R(z) - z = z sum_{k>=2} (-1)^k (2k-3)!! (2k-2) / z^{2k}
inline double g_tail(double z) {
    if (z < 12.0) return (1.0 + z * z) * mills_ratio(z) - z;
    const double inv2 = 1.0 / (z * z);
    double dfact = 1.0;  // (2k-3)!!
    double power = inv2 * inv2;
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
        const double term = dfact * (2.0 * k - 2.0) * power;
        sum += (k % 2 == 0) ? term : -term;
        const double next = dfact * (2.0 * k - 1.0) * (2.0 * k) * power * inv2;
        if (next < 1e-18 * std::abs(sum) || next > term) break;
        dfact *= (2.0 * k - 1.0);
        power *= inv2;
    }
    return z * sum;
}

}  // namespace detail

/// The threshold x of f_x; finite and not NaN.
struct SteinThreshold {
    double x;
    explicit SteinThreshold(double value) : x(value) {
        if (!std::isfinite(value)) throw DomainError("Stein threshold must be finite");
    }
};

struct KernelEvaluation {
    double w;
    double f;
    double f_prime;
    double g;
};

inline double stein_f(SteinThreshold th, double w) {
    const double x = th.x;
    if (std::isnan(w)) return w;
    if (w <= x) {
        if (w <= 0) return kSqrt2Pi * mills_scaled(-w) * normal_sf(x);
        return kSqrt2Pi * normal_cdf(w) * std::exp(0.5 * (w - x) * (w + x)) * mills_scaled(x);
    }
    if (w >= 0) return kSqrt2Pi * mills_scaled(w) * normal_cdf(x);
    return kSqrt2Pi * normal_sf(w) * std::exp(0.5 * (w - x) * (w + x)) * mills_scaled(-x);
}

/// f_x'(w); at w = x this is x f_x(x) + Phibar(x).
inline double stein_f_prime(SteinThreshold th, double w) {
    const double x = th.x;
    if (std::isnan(w)) return w;
    if (w <= x) {
        if (w < 0) return normal_sf(x) * detail::one_minus_z_mills(-w);
        return w * stein_f(th, w) + normal_sf(x);
    }
    if (w > 0) return -normal_cdf(x) * detail::one_minus_z_mills(w);
    return w * stein_f(th, w) - normal_cdf(x);
}

/// g_x(w) = f_x(w) + w f_x'(w).
inline double stein_g(SteinThreshold th, double w) {
    const double x = th.x;
    if (std::isnan(w)) return w;
    if (w <= x) {
        if (w < 0) return normal_sf(x) * detail::g_tail(-w);
        return (1.0 + w * w) * stein_f(th, w) + w * normal_sf(x);
    }
    if (w > 0) return normal_cdf(x) * detail::g_tail(w);
    return (1.0 + w * w) * stein_f(th, w) - w * normal_cdf(x);
}

inline KernelEvaluation stein_eval(SteinThreshold th, double w) {
    return {w, stein_f(th, w), stein_f_prime(th, w), stein_g(th, w)};
}

/// f_x'(w) - w f_x(w) - (I(w <= x) - Phi(x)).
inline double stein_residual(SteinThreshold th, double w) {
    const double indicator = w <= th.x ? 1.0 : 0.0;
    const double f = stein_f(th, w);
    const double fp = stein_f_prime(th, w);
    if (w <= th.x) return (fp - w * f) - normal_sf(th.x) + (indicator - 1.0);
    return (fp - w * f) + normal_cdf(th.x) - indicator;
}

struct TailBounds {
    double lower;
    double upper;
};

/// w e^{-w^2/2} / ((1+w^2) sqrt(2 pi)) <= Phibar(w) <= min(1/2, 1/(w sqrt(2 pi))) e^{-w^2/2}.
inline TailBounds normal_tail_bounds(double w) {
    if (!(w > 0)) throw DomainError("normal_tail_bounds requires w > 0");
    const double e = std::exp(-0.5 * w * w);
    return {w * e / ((1.0 + w * w) * kSqrt2Pi), std::min(0.5, 1.0 / (w * kSqrt2Pi)) * e};
}

struct BoundViolation {
    std::string bound;
    double x;
    double w;
    double value;
    double limit;
};

struct GridCheckResult {
    std::size_t evaluated = 0;
    double max_excess = -std::numeric_limits<double>::infinity();  // max(value - limit)
    std::vector<BoundViolation> violations;

    bool ok() const { return violations.empty(); }

    void record(const char* name, double x, double w, double value, double limit, double slack) {
        ++evaluated;
        const double excess = value - limit;
        max_excess = std::max(max_excess, excess);
        if (!(excess <= slack) && violations.size() < 64) violations.push_back({name, x, w, value, limit});
    }
};

namespace detail {
inline std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 0.5));
    out.reserve(static_cast<std::size_t>(count + 1));
    for (long k = 0; k <= count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
}
}  // namespace detail

struct ResidualScan {
    std::size_t evaluated = 0;
    double max_abs = 0.0;
    double at_x = 0.0;
    double at_w = 0.0;
};

/// max |stein_residual| over the configured rectangle.
inline ResidualScan scan_stein_residual(const VerificationConfig& cfg = default_config()) {
    ResidualScan out;
    const auto xs = detail::grid(cfg.stein_x_min, cfg.stein_x_max, cfg.stein_step);
    const auto ws = detail::grid(cfg.stein_w_min, cfg.stein_w_max, cfg.stein_step);
    for (double x : xs) {
        const SteinThreshold th(x);
        for (double w : ws) {
            const double r = std::abs(stein_residual(th, w));
            ++out.evaluated;
            if (!(r <= out.max_abs)) {
                out.max_abs = r;
                out.at_x = x;
                out.at_w = w;
            }
        }
    }
    return out;
}

/// Uniform bounds: 0 < f <= 0.63, |f'| <= 1, g >= 0 everywhere and g <= 2.3 for x in [0,1].
inline GridCheckResult check_uniform_bounds(const VerificationConfig& cfg = default_config()) {
    GridCheckResult out;
    const double s = cfg.stein_bound_slack;
    const auto xs = detail::grid(cfg.stein_x_min, cfg.stein_x_max, cfg.stein_step);
    const auto ws = detail::grid(cfg.stein_w_min, cfg.stein_w_max, cfg.stein_step);
    for (double x : xs) {
        const SteinThreshold th(x);
        const bool unit = x >= 0.0 && x <= 1.0;
        for (double w : ws) {
            const auto k = stein_eval(th, w);
            out.record("f>0", x, w, -k.f, 0.0, 0.0);
            out.record("f<=0.63", x, w, k.f, 0.63, s);
            out.record("|f'|<=1", x, w, std::abs(k.f_prime), 1.0, s);
            out.record("g>=0", x, w, -k.g, 0.0, s);
            if (unit) out.record("g<=2.3", x, w, k.g, 2.3, s);
        }
    }
    return out;
}

/// Nonuniform bounds for x >= 1 on the piecewise w ranges, plus the
/// monotonicity of g on [0, x] and the two point bounds at x - 1 and x.
inline GridCheckResult check_nonuniform_bounds(const VerificationConfig& cfg = default_config()) {
    GridCheckResult out;
    const double s = cfg.stein_bound_slack;
    const auto xs = detail::grid(cfg.helping_x_min, cfg.helping_x_max, cfg.helping_x_step);
    const auto ws = detail::grid(cfg.helping_w_min, cfg.helping_w_max, cfg.helping_w_step);
    for (double x : xs) {
        const SteinThreshold th(x);
        const double ex = std::exp(-x);
        const double ehalf = std::exp(0.5 - x);
        const double sf = normal_sf(x);
        for (double w : ws) {
            const auto k = stein_eval(th, w);
            if (w <= x - 1) {
                out.record("f<=1.7e^-x", x, w, k.f, 1.7 * ex, s);
                out.record("|f'|<=e^(1/2-x)", x, w, std::abs(k.f_prime), ehalf, s);
            } else if (w <= x) {
                out.record("f<=1/x", x, w, k.f, 1.0 / x, s);
                out.record("|f'|<=1", x, w, std::abs(k.f_prime), 1.0, s);
            } else {
                out.record("f<=1/w", x, w, k.f, 1.0 / w, s);
                out.record("|f'|<=1/(1+x^2)", x, w, std::abs(k.f_prime), 1.0 / (1.0 + x * x), s);
                out.record("g<=1/w", x, w, k.g, 1.0 / w, s);
            }
            if (w <= 0) out.record("g<=1.6Phibar(x)", x, w, k.g, 1.6 * sf, s);
            out.record("g>=0", x, w, -k.g, 0.0, s);
        }
        // monotone on [0, x]
        double prev = stein_g(th, 0.0);
        for (double w = cfg.helping_w_step; w <= x; w += cfg.helping_w_step) {
            const double cur = stein_g(th, w);
            out.record("g nondecreasing on [0,x]", x, w, prev, cur, s);
            prev = cur;
        }
        out.record("g(x-1)<=x e^(1/2-x)", x, x - 1, stein_g(th, x - 1), x * ehalf, s);
        out.record("g(x)<=x+2", x, x, stein_g(th, x), x + 2, s);
    }
    return out;
}

/// Central finite difference of f against f' away from the jump at w = x.
inline GridCheckResult check_derivative_consistency(const VerificationConfig& cfg = default_config()) {
    GridCheckResult out;
    const double h = cfg.fd_step;
    const auto xs = detail::grid(cfg.stein_x_min, cfg.stein_x_max, 0.25);
    const auto ws = detail::grid(cfg.stein_w_min, cfg.stein_w_max, 0.05);
    for (double x : xs) {
        const SteinThreshold th(x);
        for (double w : ws) {
            if (std::abs(w - x) < cfg.fd_gap) continue;
            const double fd = (stein_f(th, w + h) - stein_f(th, w - h)) / (2 * h);
            out.record("|f'-fd|", x, w, std::abs(fd - stein_f_prime(th, w)), 0.0, cfg.fd_tol);
        }
    }
    return out;
}

}  // namespace sbe
