#include <catch2/catch_amalgamated.hpp>

#include "dro/ambiguity.hpp"

using namespace dro;

namespace {
AmbiguityBlock uniform_block(double cap) {
    AmbiguityBlock b;
    b.grid = build_grid(0.0, 1.0, 0.1);
    b.bin_caps.assign(b.grid.size(), cap);
    return b;
}
}

TEST_CASE("validate_block accepts a healthy block") {
    auto b = uniform_block(2.0);
    auto rep = validate_block(b);
    CHECK(rep.ok);
    CHECK(b.cap_mass() == Catch::Approx(2.2)); // 0.1 * 2.0 * 11 bins
}

TEST_CASE("all-zero caps mean an empty ambiguity set") {
    auto b = uniform_block(0.0);
    auto rep = validate_block(b);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.errors.front().find("EmptyAmbiguity") == 0);
    CHECK_THROWS_AS(require_valid(b), Error);
}

TEST_CASE("mass cap just below one is rejected") {
    auto b = uniform_block(0.9 / 1.1); // total 0.9
    CHECK_FALSE(validate_block(b).ok);
}

TEST_CASE("inverted moment bounds are invalid") {
    auto b = uniform_block(2.0);
    b.moments = MomentSpec{0.7, 0.3, 1.0, 0.0};
    auto rep = validate_block(b);
    REQUIRE_FALSE(rep.ok);
    CHECK(rep.errors.front().find("InvalidMoments") == 0);
}

TEST_CASE("beta outside [2 mu_minus, 2 mu_plus] is invalid") {
    auto b = uniform_block(2.0);
    b.moments = MomentSpec{0.3, 0.7, 2.0, 0.0};
    CHECK_FALSE(validate_block(b).ok);
    b.moments->beta = 1.0; // = mu_minus + mu_plus, inside
    CHECK(validate_block(b).ok);
}

TEST_CASE("unsatisfiable variance rhs is flagged, not fatal") {
    auto b = uniform_block(2.0);
    b.moments = MomentSpec{0.3, 0.7, 1.0, 10.0}; // max of -t^2+t on [0,1] is 0.25
    auto rep = validate_block(b);
    CHECK(rep.ok);
    CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("negative caps and missing caps are invalid") {
    auto b = uniform_block(2.0);
    b.bin_caps[3] = -0.5;
    CHECK_FALSE(validate_block(b).ok);
    b = uniform_block(2.0);
    b.bin_caps.pop_back();
    CHECK_FALSE(validate_block(b).ok);
}

TEST_CASE("make_block computes caps for every grid point with overhang clamp") {
    auto grid = build_grid(0.0, 1.0, 0.1);
    auto env = EnvelopeFn::piecewise_normal(0.4, 0.6, 0.08);
    auto block = make_block(grid, env, std::nullopt);
    REQUIRE(block.bin_caps.size() == grid.size());
    // last cap is the constant extension by rho_bar(t_max)
    CHECK(block.bin_caps.back() == Catch::Approx(env.value(1.0)));
    // plateau bins carry the peak
    CHECK(block.bin_caps[4] == Catch::Approx(env.value(0.5)));
    CHECK(validate_block(block).ok);
}
