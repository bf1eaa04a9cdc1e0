#include <limits>

#include "doctest.h"
#include "nnrules/errors.hpp"
#include "nnrules/linprog.hpp"

using namespace nnrules;

TEST_CASE("box-only system is feasible") {
    LpResult r = solve_lp({0, 0}, {1, 1}, {});
    REQUIRE(r.status == LpStatus::feasible);
    CHECK(r.x[0] >= -1e-9);
    CHECK(r.x[0] <= 1 + 1e-9);
}

TEST_CASE("contradictory rows are infeasible") {
    // x0 <= 0.25 and x0 >= 0.75 inside [0,1]
    std::vector<LinearConstraint> rows = {{{1.0}, 0.25}, {{-1.0}, -0.75}};
    CHECK(solve_lp({0}, {1}, rows).status == LpStatus::infeasible);
}

TEST_CASE("negative shifted rhs goes through phase 1") {
    // x0 + x1 >= 1.5 within [0,1]^2: needs an artificial start
    std::vector<LinearConstraint> rows = {{{-1.0, -1.0}, -1.5}};
    LpResult r = solve_lp({0, 0}, {1, 1}, rows);
    REQUIRE(r.status == LpStatus::feasible);
    CHECK(r.x[0] + r.x[1] >= 1.5 - 1e-9);

    // and >= 2.5 cannot be met
    rows = {{{-1.0, -1.0}, -2.5}};
    CHECK(solve_lp({0, 0}, {1, 1}, rows).status == LpStatus::infeasible);
}

TEST_CASE("equality via paired rows pins the point") {
    std::vector<LinearConstraint> rows = {{{1.0, 0.0}, 0.5}, {{-1.0, 0.0}, -0.5}};
    LpResult r = solve_lp({0, 0}, {1, 1}, rows);
    REQUIRE(r.status == LpStatus::feasible);
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("degenerate zero-width box") {
    LpResult r = solve_lp({2, -3}, {2, -3}, {{{1.0, 1.0}, -1.0}});
    REQUIRE(r.status == LpStatus::feasible);
    CHECK(r.x[0] == doctest::Approx(2.0));
    CHECK(r.x[1] == doctest::Approx(-3.0));

    CHECK(solve_lp({2, -3}, {2, -3}, {{{1.0, 1.0}, -1.5}}).status == LpStatus::infeasible);
}

TEST_CASE("objective maximization reaches the target corner") {
    // max x0 + x1 over the triangle x0 + x1 <= 1 in [0,1]^2
    std::vector<LinearConstraint> rows = {{{1.0, 1.0}, 1.0}};
    LpResult r = solve_lp({0, 0}, {1, 1}, rows, {1.0, 1.0}, 10.0);
    REQUIRE(r.status == LpStatus::feasible);
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lo above hi is infeasible, non-finite bounds are rejected") {
    CHECK(solve_lp({1.0}, {0.0}, {}).status == LpStatus::infeasible);
    CHECK_THROWS_AS(
        solve_lp({0.0}, {std::numeric_limits<double>::infinity()}, {}),
        Error);
}
