#include <catch2/catch_amalgamated.hpp>

#include "udw/entropy.hpp"
#include "udw/rng.hpp"

using namespace udw;

namespace {

DiscreteTable random_table(Rng& rng, int na, int nb) {
    DiscreteTable t;
    for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(na); ++a)
        for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(nb); ++b) {
            auto w = static_cast<std::uint64_t>(rng.in_range(0, 100));
            if (w == 0) continue;
            t.rows.push_back({a, b});
            t.weights.push_back(w);
        }
    if (t.rows.empty()) {
        t.rows.push_back({0, 0});
        t.weights.push_back(1);
    }
    return t;
}

}  // namespace

TEST_CASE("entropy basics") {
    DiscreteTable coin;
    coin.rows = {{0}, {1}};
    coin.weights = {1, 1};
    CHECK(coin.entropy({0}) == Catch::Approx(1.0));

    DiscreteTable biased;
    biased.rows = {{0}, {1}};
    biased.weights = {3, 1};
    CHECK(biased.entropy({0}) ==
          Catch::Approx(0.75 * std::log2(4.0 / 3.0) + 0.25 * 2.0).epsilon(1e-12));

    SECTION("self-information equals entropy") {
        DiscreteTable t;
        t.rows = {{0, 0}, {1, 0}, {2, 0}};
        t.weights = {1, 2, 5};
        CHECK(t.mutual_information({0}, {0}) == Catch::Approx(t.entropy({0})));
    }
    SECTION("conditioning on a determining variable removes all entropy") {
        DiscreteTable t;
        t.rows = {{0, 1}, {1, 0}, {2, 1}};
        t.weights = {4, 2, 3};
        CHECK(t.entropy({1}, {0}) == 0.0);
    }
    SECTION("independent variables carry no mutual information") {
        DiscreteTable t;
        for (std::uint32_t a = 0; a < 3; ++a)
            for (std::uint32_t b = 0; b < 4; ++b) {
                t.rows.push_back({a, b});
                t.weights.push_back((a + 1) * (b + 1));
            }
        CHECK(std::abs(t.mutual_information({0}, {1})) < 1e-12);
    }
}

TEST_CASE("chain rule and conditioning inequality on random tables") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        DiscreteTable t = random_table(rng, static_cast<int>(rng.in_range(2, 6)),
                                       static_cast<int>(rng.in_range(2, 6)));
        const double hab = t.entropy({0, 1});
        const double ha = t.entropy({0});
        const double hb = t.entropy({1});
        const double hb_a = t.entropy({1}, {0});
        const double ha_b = t.entropy({0}, {1});
        CHECK(hab == Catch::Approx(ha + hb_a).margin(1e-9));
        CHECK(hab == Catch::Approx(hb + ha_b).margin(1e-9));
        CHECK(hb_a <= hb + 1e-9);
        CHECK(ha_b <= ha + 1e-9);
        CHECK(t.mutual_information({0}, {1}) >= -1e-12);
    }
}

TEST_CASE("key packing stays collision-free across widths") {
    Key128 a, b;
    a.push(3, 2);
    a.push(0, 2);
    b.push(0, 2);
    b.push(3, 2);
    CHECK_FALSE(a == b);

    Key128 wide;
    wide.push((std::uint64_t{1} << 60) - 3, 60);
    wide.push(7, 60);
    Key128 wide2;
    wide2.push((std::uint64_t{1} << 60) - 3, 60);
    wide2.push(6, 60);
    CHECK_FALSE(wide == wide2);
    CHECK_THROWS_AS(wide.push(1, 20), std::logic_error);

    Key128 tight;
    CHECK_THROWS_AS(tight.push(4, 2), std::logic_error);  // value wider than declared
}
