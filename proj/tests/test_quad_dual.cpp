#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dro/quad_dual.hpp"

using namespace dro;

TEST_CASE("p_eval evaluates the dual monomial") {
    QuadDual q;
    CHECK(p_eval(q, 3.7) == 0.0); // y = 0 gives the zero polynomial

    q = QuadDual{{0, 0, 0, 0, 1}, 0.0};
    CHECK(p_eval(q, 2.0) == Catch::Approx(4.0)); // pure t^2

    q = QuadDual{{1, 0, 2, 0, 1}, 0.0};
    CHECK(p_eval(q, 1.0) == Catch::Approx(2.0)); // -1 + 2 + 1
}

TEST_CASE("p_vertex returns the interior minimizer or nothing") {
    QuadDual q{{0, 0, 0, 0, 1}, 4.0};
    REQUIRE(p_vertex(q).has_value());
    CHECK(*p_vertex(q) == Catch::Approx(2.0)); // vertex of (t-2)^2 up to constants

    q = QuadDual{{0, 0, 0, 2, 1}, 0.0};
    CHECK(*p_vertex(q) == Catch::Approx(1.0)); // (beta*y5 + y4 - y3)/(2 y5)

    q = QuadDual{{1, 2, 3, 4, 0}, 1.0};
    CHECK_FALSE(p_vertex(q).has_value()); // affine, no interior minimizer
}

TEST_CASE("vertex is a minimizer") {
    QuadDual q{{0.3, 0.1, 0.7, 0.2, 1.4}, 5.2};
    const double v = *p_vertex(q);
    CHECK(p_eval(q, v) <= p_eval(q, v - 0.3));
    CHECK(p_eval(q, v) <= p_eval(q, v + 0.05));
}

TEST_CASE("vertex_drop closed form") {
    QuadDual q{{0, 0, 0, 0, 1}, 0.0};
    CHECK(vertex_drop(q, 0.1) == Catch::Approx(0.01));
    q.y[4] = 3.0;
    CHECK(vertex_drop(q, 0.5) == Catch::Approx(0.75));
    q.y[4] = 0.0;
    CHECK_THROWS_AS(vertex_drop(q, 0.1), Error);
}

TEST_CASE("vertex_drop matches direct evaluation on random duals") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        QuadDual q;
        for (auto& y : q.y) y = u01(rng);
        q.y[4] = 0.05 + u01(rng); // keep the quadratic nondegenerate
        q.beta = -2.0 + 4.0 * u01(rng);
        const double delta = 0.001 + 0.2 * u01(rng);
        const double v = *p_vertex(q);
        const double direct = p_eval(q, v - delta) - p_eval(q, v);
        CHECK(std::abs(direct - vertex_drop(q, delta)) <= 1e-12);
    }
}
