#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "chy/bifurcation.hpp"

using namespace chy;

namespace {

/// Independent brute-force oracle: ordered level triples (j1, j2, j3) up to
/// j_max whose eigenvalues solve p (3 mu1 + 3 mu2 - 8) = q (4 - 3 mu3) for
/// lambda = p/q, in plain integer arithmetic.
std::set<std::array<int, 3>> kernel_oracle(long long p, long long q, int j_max) {
    std::set<std::array<int, 3>> out;
    for (int j1 = 0; j1 <= j_max; ++j1)
        for (int j2 = 0; j2 <= j_max; ++j2)
            for (int j3 = 0; j3 <= j_max; ++j3) {
                long long m1 = static_cast<long long>(j1) * (j1 + 1);
                long long m2 = static_cast<long long>(j2) * (j2 + 1);
                long long m3 = static_cast<long long>(j3) * (j3 + 1);
                if (p * (3 * (m1 + m2) - 8) == q * (4 - 3 * m3)) out.insert({j1, j2, j3});
            }
    return out;
}

} // namespace

TEST_CASE("rational arithmetic") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK((Rational(1, 3) + Rational(1, 6)) == Rational(1, 2));
    CHECK((Rational(3, 4) * Rational(2, 3)) == Rational(1, 2));
    CHECK((Rational(1, 2) / Rational(1, 4)) == Rational(2));
    CHECK(Rational(1, 4) < Rational(1, 3));
    CHECK(Rational(-1, 2).den() == 2);
    CHECK(Rational(1, -2).num() == -1);
    CHECK_THROWS_AS(Rational(1, 0), Error);
    CHECK_THROWS_AS(Rational(1, 2) / Rational(0), Error);

    SUBCASE("decimal conversion") {
        bool inexact = true;
        Rational q = Rational::from_decimal(0.25, 1000000, &inexact);
        CHECK(q == Rational(1, 4));
        CHECK_FALSE(inexact);
        q = Rational::from_decimal(1.0 / 3.0, 1000000, &inexact);
        CHECK(q == Rational(1, 3));
        q = Rational::parse("1/4");
        CHECK(q == Rational(1, 4));
        q = Rational::parse("3");
        CHECK(q == Rational(3));
    }
}

TEST_CASE("sphere factor levels") {
    auto levels = cp1_levels(5);
    REQUIRE(levels.size() == 6);
    CHECK(levels[0].eigenvalue == 0);
    CHECK(levels[0].multiplicity == 1);
    CHECK(levels[1].eigenvalue == 2);
    CHECK(levels[1].multiplicity == 3);
    CHECK(levels[2].eigenvalue == 6);
    CHECK(levels[2].multiplicity == 5);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        CHECK(levels[i].multiplicity % 2 == 1);
        if (i) CHECK(levels[i].eigenvalue > levels[i - 1].eigenvalue);
    }

    SUBCASE("telescoping multiplicity sum (j_max + 1)^2") {
        for (int j_max : {0, 1, 4, 10}) {
            long long total = 0;
            for (const auto& l : cp1_levels(j_max)) total += l.multiplicity;
            CHECK(total == static_cast<long long>(j_max + 1) * (j_max + 1));
        }
    }

    CHECK_THROWS_AS(cp1_levels(-1), ConfigError);
}

TEST_CASE("kernel families at lambda = 1/4") {
    auto fams = kernel_families(Rational(1, 4), 5);
    REQUIRE(fams.size() == 3);

    std::set<std::array<int, 3>> triples;
    long long total = 0;
    for (const auto& f : fams) {
        triples.insert({f.j1, f.j2, f.j3});
        total += f.dimension;
        CHECK_FALSE(f.beyond_quarter_formula);
        CHECK(f.prefactor == "(4*pi/3)*4^(2/3)");
    }
    CHECK(triples == std::set<std::array<int, 3>>{{2, 1, 0}, {1, 2, 0}, {0, 0, 1}});
    CHECK(total == 33);

    for (const auto& f : fams) {
        if (f.j3 == 1) {
            CHECK(f.dimension == 3);
            CHECK(f.multiplier == Rational(-8));
        } else {
            CHECK(f.dimension == 15);
            CHECK(f.multiplier == Rational(16));
        }
    }

    SUBCASE("agrees with the brute-force oracle") {
        CHECK(triples == kernel_oracle(1, 4, 5));
    }

    SUBCASE("transversality wrapper passes") {
        CHECK(transversality_multipliers(Rational(1, 4), 5).size() == 3);
    }
}

TEST_CASE("kernel families at other parameters") {
    SUBCASE("lambda = 1: dimension 27 from the mu-sum-4 oracle") {
        auto fams = kernel_families(Rational(1), 10);
        CHECK(total_kernel_dimension(fams) == 27);
        std::set<std::array<int, 3>> triples;
        for (const auto& f : fams) triples.insert({f.j1, f.j2, f.j3});
        CHECK(triples == std::set<std::array<int, 3>>{{1, 1, 0}, {1, 0, 1}, {0, 1, 1}});
        CHECK(triples == kernel_oracle(1, 1, 10));
        for (const auto& f : fams) {
            CHECK(f.beyond_quarter_formula);
            // General derivative (4 - 3 mu3) / (3 lambda^2) at lambda = 1.
            CHECK(f.multiplier == Rational(4 - 3 * f.mu3, 3));
            CHECK_FALSE(f.multiplier == Rational(0));
        }
    }

    SUBCASE("lambda = 1/3: trivial kernel within truncation") {
        CHECK(kernel_families(Rational(1, 3), 10).empty());
        CHECK(kernel_oracle(1, 3, 10).empty());
    }

    SUBCASE("symmetry under swapping the first two factors") {
        for (auto lambda : {Rational(1, 4), Rational(1), Rational(2, 5), Rational(5, 2)}) {
            auto fams = kernel_families(lambda, 8);
            std::set<std::array<int, 3>> triples, swapped;
            for (const auto& f : fams) {
                triples.insert({f.j1, f.j2, f.j3});
                swapped.insert({f.j2, f.j1, f.j3});
            }
            CHECK(triples == swapped);
        }
    }

    CHECK_THROWS_AS(kernel_families(Rational(-1, 4), 5), ConfigError);
    CHECK_THROWS_AS(kernel_families(Rational(0), 5), ConfigError);
}

TEST_CASE("bifurcation instants") {
    SUBCASE("interval (0.2, 0.3) contains exactly the quarter point") {
        auto instants = bifurcation_instants(Rational(1, 5), Rational(3, 10), 5);
        REQUIRE(instants.size() == 1);
        CHECK(instants[0].lambda == Rational(1, 4));
        CHECK(instants[0].total_dimension == 33);
        CHECK(instants[0].odd);
        CHECK(instants[0].transversal);
        CHECK(instants[0].is_bifurcation_instant());
    }

    SUBCASE("interval (0.9, 1.1) contains lambda = 1 with dimension 27") {
        auto instants = bifurcation_instants(Rational(9, 10), Rational(11, 10), 6);
        REQUIRE(instants.size() == 1);
        CHECK(instants[0].lambda == Rational(1));
        CHECK(instants[0].total_dimension == 27);
        CHECK(instants[0].odd);
    }

    SUBCASE("interval (0.30, 0.33) is empty at j_max = 10") {
        CHECK(bifurcation_instants(Rational(30, 100), Rational(33, 100), 10).empty());
    }

    SUBCASE("instants are sorted and within the interval") {
        auto instants = bifurcation_instants(Rational(1, 100), Rational(3), 6);
        REQUIRE(instants.size() > 3);
        for (std::size_t i = 0; i < instants.size(); ++i) {
            if (i) CHECK(instants[i - 1].lambda < instants[i].lambda);
            CHECK(Rational(1, 100) < instants[i].lambda);
            CHECK(instants[i].lambda < Rational(3));
            CHECK(instants[i].total_dimension > 0);
        }
    }

    CHECK_THROWS_AS(bifurcation_instants(Rational(1), Rational(1, 2), 5), ConfigError);
    CHECK_THROWS_AS(bifurcation_instants(Rational(-1), Rational(1), 5), ConfigError);
}

TEST_CASE("product model constants") {
    ProductSpectralModel m{Rational(1, 4), 5};
    const double pi = 3.14159265358979323846264338;
    CHECK(m.volume() == doctest::Approx(std::pow(4 * pi, 3) * 0.25).epsilon(1e-15));
    // S(lambda) = 2 (2 + 1/lambda) V^{1/3}.
    CHECK(m.curvature() == doctest::Approx(2.0 * 6.0 * std::cbrt(m.volume())).epsilon(1e-14));
}
