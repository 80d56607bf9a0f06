#include <catch_amalgamated.hpp>

#include "sbe/combinatorics.hpp"

using namespace sbe;

TEST_CASE("binomial table") {
    const BinomialTable t(40);
    CHECK(t.self_check());
    CHECK(t(5, 2) == 10);
    CHECK(t(40, 20) == BigInt("137846528820"));
    CHECK(t(5, 7) == 0);
    CHECK(binomial(200, 3) == BigInt(1313400));
    CHECK_THROWS_AS(t(41, 1), DomainError);
}

TEST_CASE("vandermonde examples") {
    CHECK(binomial(3, 0) * binomial(2, 2) + binomial(3, 1) * binomial(2, 1) + binomial(3, 2) * binomial(2, 0) == 10);
    CHECK(vandermonde_check(3, 2, 2));
    CHECK(vandermonde_check(4, 9, 0));
}

TEST_CASE("product identity examples") {
    CHECK(product_identity_check(7, 4, 0));
    CHECK(binomial(5, 1) * binomial(4, 2) == 30);
    CHECK(product_identity_check(5, 3, 1));
    CHECK_THROWS_AS(product_identity_check(3, 4, 1), DomainError);
}

TEST_CASE("difference bound examples") {
    CHECK(binomial(10, 3) - binomial(8, 3) == 64);
    CHECK(difference_bound_check(10, 3, 2));
    CHECK_THROWS_AS(difference_bound_check(10, 3, 0), DomainError);
    CHECK_THROWS_AS(difference_bound_check(4, 3, 2), DomainError);
}

TEST_CASE("enumerative equalities examples") {
    const auto r = enum_equalities_check(5, 3);
    CHECK(r.ok);
    CHECK(r.checked == 4);
    CHECK(binomial(3, 1) * 4 == binomial(4, 2) * 2);
    for (long m = 1; m < 12; ++m) CHECK(enum_equalities_check(m + 1, m).ok);
}

TEST_CASE("full sweeps pass") {
    for (const auto& s : combinatorics_sweeps()) {
        INFO(s.name << " cases=" << s.cases << " failures=" << s.failures);
        CHECK(s.ok());
    }
}
