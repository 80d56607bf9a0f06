#pragma once

// Exact scalars used by the enumeration oracles.
//
// Rational is an arbitrary-precision fraction. ExactReal is a finite sum
// sum_k c_k * sqrt(r_k) with rational c_k and distinct squarefree radicands
// r_k >= 1; it is closed under +, -, * and carries an exact sign test, which
// is what lets distributions like {+-1/sqrt(3)} satisfy "mean zero" and
// "sum of variances = 1" without rounding.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "sbe/errors.hpp"

namespace sbe {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using HighPrec = boost::multiprecision::cpp_bin_float_50;

namespace detail {

using Precise200 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;
using Precise1000 = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<1000>>;

inline constexpr std::uint64_t kMaxRadicand = 1'000'000'000'000ULL;

// Splits v = s^2 * k with k squarefree; returns {s, k}.
inline std::pair<std::uint64_t, std::uint64_t> square_free_split(std::uint64_t v) {
    std::uint64_t s = 1;
    std::uint64_t k = 1;
    for (std::uint64_t p = 2; p * p <= v; ++p) {
        std::uint64_t e = 0;
        while (v % p == 0) {
            v /= p;
            ++e;
        }
        for (std::uint64_t i = 0; i < e / 2; ++i) s *= p;
        if (e % 2 == 1) k *= p;
    }
    k *= v;
    return {s, k};
}

template <class Float>
Float to_float(const Rational& r) {
    return Float(boost::multiprecision::numerator(r)) / Float(boost::multiprecision::denominator(r));
}

}  // namespace detail

/// Converts a rational to any floating type with correct rounding of each part.
template <class Float>
Float rational_to(const Rational& r) {
    if constexpr (std::is_same_v<Float, Rational>) {
        return r;
    } else if constexpr (std::is_floating_point_v<Float>) {
        return static_cast<Float>(r);
    } else {
        return detail::to_float<Float>(r);
    }
}

/// Parses "p/q", "-7", "0.125", "3e-2" into an exact rational.
namespace detail {
// BigInt(std::string) reads a leading 0 as an octal prefix, so strip it
inline BigInt parse_decimal_int(std::string s) {
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ContractViolation("bad integer '" + s + "'");
    const auto nz = s.find_first_not_of('0');
    s = nz == std::string::npos ? "0" : s.substr(nz);
    BigInt v(s);
    return negative ? BigInt(-v) : v;
}
}  // namespace detail

inline Rational parse_rational(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ContractViolation("empty rational literal");
    const auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt num = detail::parse_decimal_int(s.substr(0, slash));
            BigInt den = detail::parse_decimal_int(s.substr(slash + 1));
            if (den == 0) throw ContractViolation("zero denominator in '" + s + "'");
            return Rational(num, den);
        }
        // decimal with optional exponent, read exactly
        std::string mantissa = s;
        long long exponent = 0;
        if (const auto e = s.find_first_of("eE"); e != std::string::npos) {
            mantissa = s.substr(0, e);
            exponent = std::stoll(s.substr(e + 1));
        }
        bool negative = false;
        if (!mantissa.empty() && (mantissa[0] == '-' || mantissa[0] == '+')) {
            negative = mantissa[0] == '-';
            mantissa.erase(0, 1);
        }
        std::string digits;
        long long frac = 0;
        bool seen_point = false;
        for (char c : mantissa) {
            if (c == '.') {
                if (seen_point) throw ContractViolation("bad number '" + s + "'");
                seen_point = true;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                digits.push_back(c);
                if (seen_point) ++frac;
            } else {
                throw ContractViolation("bad number '" + s + "'");
            }
        }
        if (digits.empty()) throw ContractViolation("bad number '" + s + "'");
        BigInt value = detail::parse_decimal_int(digits);
        exponent -= frac;
        BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exponent < 0 ? -exponent : exponent));
        Rational r = exponent < 0 ? Rational(value, scale) : Rational(value * scale);
        return negative ? Rational(-r) : r;
    } catch (const ContractViolation&) {
        throw;
    } catch (const std::exception&) {
        throw ContractViolation("bad number '" + s + "'");
    }
}

inline std::string to_string(const Rational& r) {
    return r.str();
}

/// Finite sum of rational multiples of square roots of squarefree integers.
class ExactReal {
public:
    struct Term {
        std::uint64_t radicand;  // squarefree, >= 1
        Rational coef;           // nonzero
    };

    ExactReal() = default;
    ExactReal(const Rational& r) {  // NOLINT(google-explicit-constructor)
        if (r != 0) terms_.push_back({1, r});
    }
    ExactReal(long long v) : ExactReal(Rational(v)) {}  // NOLINT(google-explicit-constructor)
    ExactReal(int v) : ExactReal(Rational(v)) {}         // NOLINT(google-explicit-constructor)

    /// coef * sqrt(radicand) for a nonnegative rational radicand.
    static ExactReal surd(const Rational& coef, const Rational& radicand) {
        if (radicand < 0) throw DomainError("negative radicand");
        if (coef == 0 || radicand == 0) return {};
        // sqrt(a/b) = sqrt(a*b)/b
        const BigInt a = boost::multiprecision::numerator(radicand);
        const BigInt b = boost::multiprecision::denominator(radicand);
        const BigInt ab = a * b;
        if (ab > BigInt(detail::kMaxRadicand))
            throw DomainError("radicand too large for exact surd arithmetic");
        const auto [s, k] = detail::square_free_split(static_cast<std::uint64_t>(ab));
        ExactReal out;
        out.terms_.push_back({k, coef * Rational(BigInt(s), b)});
        return out;
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_rational() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].radicand == 1); }

    Rational to_rational() const {
        if (!is_rational()) throw DomainError("value " + str() + " is irrational");
        return terms_.empty() ? Rational(0) : terms_[0].coef;
    }

    /// Square of a single-term value, which is always rational.
    Rational square_rational() const {
        if (terms_.size() > 1) throw DomainError("square of a multi-term surd is not rational");
        if (terms_.empty()) return 0;
        return terms_[0].coef * terms_[0].coef * Rational(BigInt(terms_[0].radicand));
    }

    template <class Float>
    Float to() const {
        Float acc = 0;
        for (const auto& t : terms_) {
            Float c = rational_to<Float>(t.coef);
            if (t.radicand != 1) {
                using std::sqrt;
                c *= sqrt(Float(t.radicand));
            }
            acc += c;
        }
        return acc;
    }
    double to_double() const { return to<HighPrec>().convert_to<double>(); }
    HighPrec to_high_prec() const { return to<HighPrec>(); }

    /// Exact sign. Distinct squarefree radicals are linearly independent over
    /// the rationals, so a nonempty sum is never zero; the sign is read off a
    /// high-precision evaluation whose error bound is certified, escalating
    /// precision when the value is too close to zero.
    int sign() const {
        if (terms_.empty()) return 0;
        if (terms_.size() == 1) return terms_[0].coef > 0 ? 1 : -1;
        if (int s = certified_sign<HighPrec>(45); s != 0) return s;
        if (int s = certified_sign<detail::Precise200>(190); s != 0) return s;
        if (int s = certified_sign<detail::Precise1000>(990); s != 0) return s;
        throw DomainError("could not certify sign of " + str());
    }

    ExactReal abs() const { return sign() < 0 ? -*this : *this; }

    ExactReal operator-() const {
        ExactReal out = *this;
        for (auto& t : out.terms_) t.coef = -t.coef;
        return out;
    }

    ExactReal& operator+=(const ExactReal& o) {
        std::vector<Term> merged;
        merged.reserve(terms_.size() + o.terms_.size());
        std::size_t i = 0, j = 0;
        while (i < terms_.size() || j < o.terms_.size()) {
            if (j == o.terms_.size() || (i < terms_.size() && terms_[i].radicand < o.terms_[j].radicand)) {
                merged.push_back(terms_[i++]);
            } else if (i == terms_.size() || o.terms_[j].radicand < terms_[i].radicand) {
                merged.push_back(o.terms_[j++]);
            } else {
                Rational c = terms_[i].coef + o.terms_[j].coef;
                if (c != 0) merged.push_back({terms_[i].radicand, std::move(c)});
                ++i;
                ++j;
            }
        }
        terms_ = std::move(merged);
        return *this;
    }
    ExactReal& operator-=(const ExactReal& o) { return *this += -o; }

    ExactReal& operator*=(const ExactReal& o) {
        ExactReal out;
        for (const auto& a : terms_) {
            for (const auto& b : o.terms_) {
                const std::uint64_t g = std::gcd(a.radicand, b.radicand);
                const unsigned __int128 k = static_cast<unsigned __int128>(a.radicand / g) * (b.radicand / g);
                if (k > detail::kMaxRadicand) throw DomainError("radicand overflow in surd product");
                ExactReal t;
                t.terms_.push_back({static_cast<std::uint64_t>(k), a.coef * b.coef * Rational(BigInt(g))});
                out += t;
            }
        }
        *this = std::move(out);
        return *this;
    }

    friend ExactReal operator+(ExactReal a, const ExactReal& b) { return a += b; }
    friend ExactReal operator-(ExactReal a, const ExactReal& b) { return a -= b; }
    friend ExactReal operator*(ExactReal a, const ExactReal& b) { return a *= b; }
    friend ExactReal operator/(ExactReal a, const Rational& r) {
        if (r == 0) throw DomainError("division by zero");
        for (auto& t : a.terms_) t.coef /= r;
        return a;
    }

    friend bool operator==(const ExactReal& a, const ExactReal& b) { return (a - b).is_zero(); }
    friend bool operator<(const ExactReal& a, const ExactReal& b) { return (a - b).sign() < 0; }
    friend bool operator<=(const ExactReal& a, const ExactReal& b) { return (a - b).sign() <= 0; }
    friend bool operator>(const ExactReal& a, const ExactReal& b) { return (a - b).sign() > 0; }
    friend bool operator>=(const ExactReal& a, const ExactReal& b) { return (a - b).sign() >= 0; }

    /// "0", "-2/3", "1/3*sqrt(3)", "1/2+sqrt(2)".
    std::string str() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (std::size_t i = 0; i < terms_.size(); ++i) {
            const auto& t = terms_[i];
            std::string c = t.coef.str();
            if (i > 0 && c[0] != '-') out += "+";
            if (t.radicand == 1) {
                out += c;
            } else {
                if (t.coef == 1) {
                } else if (t.coef == -1) {
                    out += "-";
                } else {
                    out += c + "*";
                }
                out += "sqrt(" + std::to_string(t.radicand) + ")";
            }
        }
        return out;
    }

private:
    template <class Float>
    int certified_sign(int digits) const {
        Float v = to<Float>();
        Float scale = 0;
        for (const auto& t : terms_) {
            using std::sqrt;
            Float c = rational_to<Float>(t.coef);
            scale += (c < 0 ? Float(-c) : c) * sqrt(Float(t.radicand));
        }
        using std::pow;
        const Float bound = scale * pow(Float(10), -digits);
        if (v > bound) return 1;
        if (v < -bound) return -1;
        return 0;
    }

    std::vector<Term> terms_;
};

/// Parses a rational literal or "[coef*]sqrt(r)" / "-sqrt(r)" forms.
inline ExactReal parse_exact_real(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    const auto pos = s.find("sqrt(");
    if (pos == std::string::npos) return ExactReal(parse_rational(s));
    if (s.back() != ')') throw ContractViolation("bad surd literal '" + s + "'");
    const Rational radicand = parse_rational(s.substr(pos + 5, s.size() - pos - 6));
    std::string prefix = s.substr(0, pos);
    Rational coef = 1;
    if (prefix == "-") {
        coef = -1;
    } else if (prefix == "+" || prefix.empty()) {
        coef = 1;
    } else {
        if (prefix.back() != '*') throw ContractViolation("bad surd literal '" + s + "'");
        prefix.pop_back();
        coef = parse_rational(prefix);
    }
    return ExactReal::surd(coef, radicand);
}

inline ExactReal min(const ExactReal& a, const ExactReal& b) { return a <= b ? a : b; }
inline ExactReal max(const ExactReal& a, const ExactReal& b) { return a >= b ? a : b; }

}  // namespace sbe
