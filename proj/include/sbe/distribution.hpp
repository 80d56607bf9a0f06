#pragma once

// Finite discrete laws with exact probabilities, plus the JSON file format
//
//   {"name": "...", "atoms": [{"value": "-sqrt(1/3)", "p": "1/2"}, ...]}
//   {"distributions": [ {...}, {...} ]}
//
// Values are integers, decimal/rational strings or "c*sqrt(r)" surds.
// Probabilities are integers or "p/q" strings; a JSON float for either is
// converted exactly from its binary value. Inputs that do not sum to one are
// rejected, never renormalized.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbe/errors.hpp"
#include "sbe/exact.hpp"

namespace sbe {

struct Atom {
    ExactReal value;
    Rational p;
};

/// Rational equal to the binary64 value of d.
inline Rational rational_from_double(double d) {
    if (!std::isfinite(d)) throw ContractViolation("non-finite number");
    int exp = 0;
    const double mant = std::frexp(d, &exp);
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r{BigInt(scaled)};
    if (exp > 0) r *= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(exp)));
    if (exp < 0) r /= Rational(boost::multiprecision::pow(BigInt(2), static_cast<unsigned>(-exp)));
    return r;
}

class DiscreteDistribution {
public:
    DiscreteDistribution() = default;

    explicit DiscreteDistribution(std::vector<Atom> atoms, std::string name = {})
        : atoms_(std::move(atoms)), name_(std::move(name)) {
        if (atoms_.empty()) throw ContractViolation("distribution has no atoms");
        Rational total = 0;
        for (const auto& a : atoms_) {
            if (a.p <= 0) throw ContractViolation("atom probability must be positive");
            total += a.p;
        }
        if (total != 1) throw ContractViolation("probabilities sum to " + total.str() + ", not 1");
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
        for (std::size_t k = 1; k < atoms_.size(); ++k)
            if (atoms_[k].value == atoms_[k - 1].value)
                throw ContractViolation("duplicate atom value " + atoms_[k].value.str());
        values_.reserve(atoms_.size());
        probs_.reserve(atoms_.size());
        for (const auto& a : atoms_) {
            values_.push_back(a.value.to_double());
            probs_.push_back(static_cast<double>(a.p));
        }
    }

    /// Uniform law on the given values.
    static DiscreteDistribution uniform(const std::vector<ExactReal>& values, std::string name = {}) {
        std::vector<Atom> atoms;
        const Rational p(1, static_cast<long long>(values.size()));
        for (const auto& v : values) atoms.push_back({v, p});
        return DiscreteDistribution(std::move(atoms), std::move(name));
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    const std::string& name() const { return name_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }

    bool has_rational_values() const {
        return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.value.is_rational(); });
    }

    /// Index of the atom whose double value equals v, or -1.
    long index_of(double v) const {
        const auto it = std::lower_bound(values_.begin(), values_.end(), v);
        if (it == values_.end() || *it != v) return -1;
        return static_cast<long>(it - values_.begin());
    }

    /// E[phi(X)] for an exact-valued phi.
    template <class F>
    ExactReal expect(F&& phi) const {
        ExactReal acc;
        for (const auto& a : atoms_) acc += ExactReal(phi(a.value)) * ExactReal(a.p);
        return acc;
    }

    ExactReal mean() const {
        return expect([](const ExactReal& v) { return v; });
    }
    ExactReal second_moment() const {
        return expect([](const ExactReal& v) { return v * v; });
    }

    /// Law of c * X.
    DiscreteDistribution scaled(const ExactReal& c) const {
        if (c.is_zero()) throw ContractViolation("scaling by zero collapses atoms");
        std::vector<Atom> out;
        for (const auto& a : atoms_) out.push_back({a.value * c, a.p});
        return DiscreteDistribution(std::move(out), name_);
    }

    /// Index drawn from the law using a uniform u in [0, 1).
    std::size_t draw_index(double u) const {
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < probs_.size(); ++k) {
            acc += probs_[k];
            if (u < acc) return k;
        }
        return probs_.size() - 1;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        if (!name_.empty()) j["name"] = name_;
        j["atoms"] = nlohmann::json::array();
        for (const auto& a : atoms_) j["atoms"].push_back({{"value", a.value.str()}, {"p", a.p.str()}});
        return j;
    }

private:
    std::vector<Atom> atoms_;
    std::string name_;
    std::vector<double> values_;
    std::vector<double> probs_;
};

namespace detail {

inline ExactReal json_value(const nlohmann::json& v) {
    if (v.is_string()) return parse_exact_real(v.get<std::string>());
    if (v.is_number_integer()) return ExactReal(Rational(v.get<long long>()));
    if (v.is_number_unsigned()) return ExactReal(Rational(BigInt(v.get<unsigned long long>())));
    if (v.is_number_float()) return ExactReal(rational_from_double(v.get<double>()));
    throw ContractViolation("atom value must be a number or string");
}

inline Rational json_prob(const nlohmann::json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number_unsigned()) return Rational(BigInt(v.get<unsigned long long>()));
    if (v.is_number_float()) return rational_from_double(v.get<double>());
    throw ContractViolation("atom probability must be a number or string");
}

}  // namespace detail

inline DiscreteDistribution distribution_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("atoms") || !j["atoms"].is_array())
        throw ContractViolation("distribution object needs an \"atoms\" array");
    std::vector<Atom> atoms;
    for (const auto& a : j["atoms"]) {
        if (!a.contains("value") || !a.contains("p")) throw ContractViolation("atom needs \"value\" and \"p\"");
        atoms.push_back({detail::json_value(a["value"]), detail::json_prob(a["p"])});
    }
    return DiscreteDistribution(std::move(atoms), j.value("name", std::string{}));
}

/// One or more distributions from a JSON document.
inline std::vector<DiscreteDistribution> distributions_from_json(const nlohmann::json& j) {
    std::vector<DiscreteDistribution> out;
    if (j.is_object() && j.contains("distributions")) {
        for (const auto& d : j["distributions"]) out.push_back(distribution_from_json(d));
    } else if (j.is_array()) {
        for (const auto& d : j) out.push_back(distribution_from_json(d));
    } else {
        out.push_back(distribution_from_json(j));
    }
    if (out.empty()) throw ContractViolation("no distributions in document");
    return out;
}

inline std::vector<DiscreteDistribution> load_distributions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open distribution file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation(std::string("malformed JSON in ") + path + ": " + e.what());
    }
    return distributions_from_json(j);
}

inline std::vector<DiscreteDistribution> parse_distributions(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ContractViolation(std::string("malformed JSON: ") + e.what());
    }
    return distributions_from_json(j);
}

/// Built-in laws used by the CLI defaults and the verification corpus.
namespace laws {

inline DiscreteDistribution uniform3() {
    return DiscreteDistribution::uniform({ExactReal(-1), ExactReal(0), ExactReal(1)}, "uniform{-1,0,1}");
}

/// +-1/sqrt(k) with probability 1/2 each.
inline DiscreteDistribution symmetric_sign(long long k) {
    const ExactReal a = ExactReal::surd(1, Rational(1, k));
    return DiscreteDistribution({{a, Rational(1, 2)}, {-a, Rational(1, 2)}}, "+-1/sqrt(" + std::to_string(k) + ")");
}

/// Two-point mean-zero law: a with probability p, b = -a p/(1-p) otherwise.
inline DiscreteDistribution two_point(const Rational& a, const Rational& p) {
    const Rational b = -a * p / (1 - p);
    return DiscreteDistribution({{ExactReal(a), p}, {ExactReal(b), 1 - p}});
}

}  // namespace laws

}  // namespace sbe
