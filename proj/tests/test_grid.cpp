#include <catch2/catch_amalgamated.hpp>

#include "dro/grid.hpp"

using dro::build_grid;
using dro::Error;
using dro::ErrorCode;

TEST_CASE("build_grid basic spacing") {
    auto g = build_grid(0.0, 1.0, 0.5);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == Catch::Approx(0.5));
    CHECK(g[2] == 1.0);
}

TEST_CASE("build_grid chromatography window point count") {
    auto g = build_grid(2.80, 3.749, 0.001);
    CHECK(g.size() == 950);
    CHECK(g.front() == 2.80);
    CHECK(g.back() == 3.749);
}

TEST_CASE("build_grid rejects non-divisible spans and bad steps") {
    CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.3), Error);
    try {
        build_grid(0.0, 1.0, 0.3);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonDivisibleSpan);
    }
    CHECK_THROWS_AS(build_grid(0.0, 1.0, 0.0), Error);
    CHECK_THROWS_AS(build_grid(0.0, 1.0, -0.1), Error);
    CHECK_THROWS_AS(build_grid(1.0, 1.0, 0.1), Error);
}

TEST_CASE("grid round-trips its construction parameters") {
    auto g = build_grid(2.8, 3.752, 0.008);
    CHECK(g.t0 == 2.8);
    CHECK(g.t_max == 3.752);
    CHECK(g.delta == 0.008);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(g[k] == Catch::Approx(g.t0 + double(k) * g.delta).margin(1e-12));
    // strictly increasing, equally spaced
    for (std::size_t k = 1; k < g.size(); ++k) {
        CHECK(g[k] > g[k - 1]);
        CHECK(g[k] - g[k - 1] == Catch::Approx(g.delta).margin(1e-9));
    }
}

TEST_CASE("index_of maps grid values back to indices") {
    auto g = build_grid(2.80, 3.749, 0.001);
    for (std::size_t k = 0; k < g.size(); k += 77) CHECK(g.index_of(g[k]) == k);
    CHECK_THROWS_AS(g.index_of(2.80055), Error);
    CHECK(g.contains(3.117));
    CHECK(!g.contains(5.0));
}
