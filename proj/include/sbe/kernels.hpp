#pragma once

// Symmetric kernels. A kernel is any type with `std::size_t degree() const`
// and a call operator over std::span<const double> (and optionally over
// std::span<const Rational> for the exact Hoeffding tables).

#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

template <class K>
concept SymmetricKernel = requires(const K& k, std::span<const double> xs) {
    { k.degree() } -> std::convertible_to<std::size_t>;
    { k(xs) } -> std::convertible_to<double>;
};

template <class K>
concept ExactKernel = SymmetricKernel<K> && requires(const K& k, std::span<const Rational> xs) {
    { k(xs) } -> std::convertible_to<Rational>;
};

/// h(x_1..x_m) = (x_1 + ... + x_m) / m; with m = 1 the U-statistic is the sample mean.
struct MeanKernel {
    std::size_t m = 1;
    std::size_t degree() const { return m; }
    template <class T>
    T operator()(std::span<const T> xs) const {
        T s = 0;
        for (const auto& x : xs) s += x;
        return s / T(static_cast<long long>(m));
    }
};

/// h(x_1, x_2) = (x_1 - x_2)^2 / 2; its U-statistic is the unbiased sample variance.
struct VarianceKernel {
    std::size_t degree() const { return 2; }
    template <class T>
    T operator()(std::span<const T> xs) const {
        const T d = xs[0] - xs[1];
        return d * d / T(2);
    }
};

/// h(x_1, x_2) = sign(x_1 + x_2), the one-sample sign-of-pairwise-sum kernel.
struct KendallSignKernel {
    std::size_t degree() const { return 2; }
    template <class T>
    T operator()(std::span<const T> xs) const {
        const T s = xs[0] + xs[1];
        if (s > 0) return T(1);
        if (s < 0) return T(-1);
        return T(0);
    }
};

/// h(x_1..x_m) = x_1 x_2 ... x_m; degenerate under any mean-zero law.
struct ProductKernel {
    std::size_t m = 2;
    std::size_t degree() const { return m; }
    template <class T>
    T operator()(std::span<const T> xs) const {
        T p = 1;
        for (const auto& x : xs) p *= x;
        return p;
    }
};

/// h - c for an exact offset c (typically E h under the sampling law).
template <class K>
struct Centered {
    K base;
    Rational offset = 0;
    double offset_d = 0.0;

    Centered(K k, Rational c) : base(std::move(k)), offset(std::move(c)), offset_d(static_cast<double>(offset)) {}

    std::size_t degree() const { return base.degree(); }
    double operator()(std::span<const double> xs) const { return base(xs) - offset_d; }
    Rational operator()(std::span<const Rational> xs) const
        requires ExactKernel<K>
    {
        return base(xs) - offset;
    }
};

/// Type-erased kernel for run-time selection (CLI, model registry).
class AnyKernel {
public:
    AnyKernel() = default;

    template <ExactKernel K>
    AnyKernel(K k, std::string name)  // NOLINT(google-explicit-constructor)
        : m_(k.degree()), name_(std::move(name)) {
        auto shared = std::make_shared<K>(std::move(k));
        dbl_ = [shared](std::span<const double> xs) { return static_cast<double>((*shared)(xs)); };
        rat_ = [shared](std::span<const Rational> xs) { return static_cast<Rational>((*shared)(xs)); };
    }

    std::size_t degree() const { return m_; }
    const std::string& name() const { return name_; }
    double operator()(std::span<const double> xs) const { return dbl_(xs); }
    Rational operator()(std::span<const Rational> xs) const { return rat_(xs); }

    AnyKernel centered(const Rational& c) const {
        AnyKernel out = *this;
        auto dbl = dbl_;
        auto rat = rat_;
        const double cd = static_cast<double>(c);
        out.dbl_ = [dbl, cd](std::span<const double> xs) { return dbl(xs) - cd; };
        out.rat_ = [rat, c](std::span<const Rational> xs) { return rat(xs) - c; };
        return out;
    }

private:
    std::size_t m_ = 0;
    std::string name_;
    std::function<double(std::span<const double>)> dbl_;
    std::function<Rational(std::span<const Rational>)> rat_;
};

/// Built-in kernels by name: mean, variance, kendall-sign, product.
inline AnyKernel make_kernel(const std::string& name, std::size_t m) {
    if (name == "mean") return AnyKernel(MeanKernel{m == 0 ? 1 : m}, name);
    if (name == "variance") {
        if (m != 0 && m != 2) throw ContractViolation("variance kernel has degree 2");
        return AnyKernel(VarianceKernel{}, name);
    }
    if (name == "kendall-sign") {
        if (m != 0 && m != 2) throw ContractViolation("kendall-sign kernel has degree 2");
        return AnyKernel(KendallSignKernel{}, name);
    }
    if (name == "product") return AnyKernel(ProductKernel{m == 0 ? 2 : m}, name);
    throw ContractViolation("unknown kernel '" + name + "'");
}

}  // namespace sbe
