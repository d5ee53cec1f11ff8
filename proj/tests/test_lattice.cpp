#include <set>
#include <vector>

#include "doctest.h"
#include "lattice.hpp"

using namespace crl;

TEST_CASE("site linearization round-trips and wraps") {
    TorusShape t(3, 4);
    CHECK(t.site_count() == 64);
    for (SiteIndex s = 0; s < t.site_count(); ++s) {
        LatticePoint p = t.coords_of(s);
        CHECK(t.index_of(p) == s);
    }
    // first coordinate fastest
    CHECK(t.index_of(std::vector<std::int64_t>{1, 0, 0}) == 1);
    CHECK(t.index_of(std::vector<std::int64_t>{0, 1, 0}) == 4);
    CHECK(t.index_of(std::vector<std::int64_t>{0, 0, 1}) == 16);
    // arbitrary points reduce mod L
    CHECK(t.index_of(std::vector<std::int64_t>{-1, 9, 4}) ==
          t.index_of(std::vector<std::int64_t>{3, 1, 0}));
}

TEST_CASE("step moves one site and inverts") {
    TorusShape t(2, 5);
    for (SiteIndex s = 0; s < t.site_count(); ++s) {
        for (std::uint32_t dir = 0; dir < 2; ++dir) {
            SiteIndex up = t.step(s, dir, +1);
            CHECK(t.step(up, dir, -1) == s);
            LatticePoint p = t.coords_of(s);
            p[dir] += 1;
            CHECK(t.index_of(p) == up);
        }
    }
}

TEST_CASE("taxicab norm") {
    CHECK(taxicab_norm(std::vector<std::int64_t>{}) == 0);
    CHECK(taxicab_norm(std::vector<std::int64_t>{-3, 2, 0}) == 5);
}

TEST_CASE("ball cardinality against closed forms") {
    // d=1: 2R+1; d=2: 2R^2+2R+1; d=3 hand counts
    CHECK(ball_cardinality(1, 0) == 1);
    CHECK(ball_cardinality(1, 3) == 7);
    CHECK(ball_cardinality(2, 1) == 5);
    CHECK(ball_cardinality(2, 2) == 13);
    CHECK(ball_cardinality(2, 10) == 221);
    CHECK(ball_cardinality(3, 1) == 7);
    CHECK(ball_cardinality(3, 2) == 25);
}

TEST_CASE("ball enumeration is complete, norm-correct and duplicate-free") {
    for (std::uint32_t d = 1; d <= 3; ++d) {
        for (std::int64_t R = 0; R <= 4; ++R) {
            std::set<LatticePoint> seen;
            for_each_ball_point(d, R, [&](const LatticePoint& p, std::int64_t norm) {
                CHECK(taxicab_norm(p) == norm);
                CHECK(norm <= R);
                CHECK(seen.insert(p).second);
            });
            CHECK(seen.size() == ball_cardinality(d, R));
        }
    }
}

TEST_CASE("shell enumeration matches ball differences") {
    for (std::uint32_t d = 1; d <= 3; ++d) {
        for (std::int64_t R = 1; R <= 5; ++R) {
            std::uint64_t count = 0;
            for_each_shell_point(d, R, [&](const LatticePoint& p) {
                CHECK(taxicab_norm(p) == R);
                ++count;
            });
            CHECK(count == ball_cardinality(d, R) - ball_cardinality(d, R - 1));
        }
    }
}
