#include <cmath>
#include <vector>

#include "doctest.h"
#include "ergodic.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "solver.hpp"

using namespace crl;

namespace {

CocycleField shifted_coboundary(const TorusShape& t, const std::vector<double>& y,
                                const std::vector<double>& g) {
    // increments of <n, y> plus the coboundary of g
    std::vector<std::vector<double>> inc(t.dim());
    for (std::uint32_t i = 0; i < t.dim(); ++i) {
        inc[i].resize(t.site_count());
        for (SiteIndex s = 0; s < t.site_count(); ++s)
            inc[i][s] = y[i] + g[t.step(s, i, +1)] - g[s];
    }
    return CocycleField(t, std::move(inc), y);
}

std::vector<double> random_potential(const TorusShape& t, std::uint64_t seed) {
    std::vector<double> g(t.site_count());
    for (SiteIndex s = 0; s < g.size(); ++s) g[s] = rng::uniform(seed, 9, s) - 0.5;
    return g;
}

} // namespace

TEST_CASE("profile of a translation-invariant cocycle vanishes") {
    TorusShape t(2, 16);
    CocycleField f = constant_cocycle(t, std::vector<double>{1.0, 2.0});
    const std::vector<std::int64_t> radii{1, 2, 4, 6};
    SublinearityProfile p = sublinearity_profile(f, f.target_mean(), radii);
    REQUIRE(p.values.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(p.values[i] <= 1e-13);
        CHECK(p.exact[i] == 1);
    }
}

TEST_CASE("profile matches direct enumeration on a coboundary") {
    TorusShape t(2, 12);
    std::vector<double> g = random_potential(t, 3);
    std::vector<double> y{0.5, -1.0};
    CocycleField f = shifted_coboundary(t, y, g);

    const std::vector<std::int64_t> radii{1, 2, 3, 4};
    SublinearityProfile p = sublinearity_profile(f, y, radii);
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const std::int64_t R = radii[i];
        double want = 0.0;
        for_each_ball_point(2, R, [&](const LatticePoint& n, std::int64_t) {
            const double dev = f.evaluate(n) - (y[0] * n[0] + y[1] * n[1]);
            want = std::max(want, std::abs(dev));
        });
        want /= static_cast<double>(R);
        CHECK(p.exact[i] == 1);
        CHECK(p.values[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("profile rejects bad radii and torus-sized radii") {
    TorusShape t(2, 12);
    CocycleField f = constant_cocycle(t, std::vector<double>{1.0, 0.0});
    const std::vector<double> y{1.0, 0.0};
    CHECK_THROWS_AS(sublinearity_profile(f, y, std::vector<std::int64_t>{2, 2}), Error);
    CHECK_THROWS_AS(sublinearity_profile(f, y, std::vector<std::int64_t>{0}), Error);
    try {
        sublinearity_profile(f, y, std::vector<std::int64_t>{40});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::guard);
    }
}

TEST_CASE("directional averages over full periods recover the mean exactly") {
    TorusShape t(2, 8);
    std::vector<double> y{0.75, -0.25};
    CocycleField f = shifted_coboundary(t, y, random_potential(t, 5));
    for (std::uint32_t j = 0; j < 2; ++j) {
        std::vector<std::int64_t> e(2, 0);
        e[j] = 1;
        // k a multiple of L: the coboundary telescopes around the torus
        CHECK(directional_average(f, e, 16) == doctest::Approx(y[j]).epsilon(1e-12));
        CHECK(directional_average(f, e, 8) == doctest::Approx(y[j]).epsilon(1e-12));
    }
}

TEST_CASE("box materialization agrees with pointwise evaluation") {
    TorusShape t(2, 10);
    CocycleField f = shifted_coboundary(t, {1.0, 0.5}, random_potential(t, 7));
    const std::int64_t B = 3;
    std::vector<double> box = materialize_box(f, B);
    const std::int64_t W = 2 * B + 1;
    REQUIRE(box.size() == static_cast<std::size_t>(W * W));
    for (std::int64_t n2 = -B; n2 <= B; ++n2)
        for (std::int64_t n1 = -B; n1 <= B; ++n1) {
            const std::size_t idx =
                static_cast<std::size_t>((n2 + B) * W + (n1 + B));
            CHECK(box[idx] ==
                  doctest::Approx(f.evaluate(std::vector<std::int64_t>{n1, n2})).epsilon(1e-12));
        }
}

TEST_CASE("poincare inequality hand oracle") {
    // d=1, u = indicator of site 1, R = 1: lhs = 2/3, rhs = 16
    TorusShape t(1, 8);
    std::vector<double> u(8, 0.0);
    u[1] = 1.0;
    PoincareResult r = poincare_check(t, u, 1);
    CHECK(r.lhs == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(r.rhs == doctest::Approx(16.0).epsilon(1e-14));
    CHECK(r.holds);
}

TEST_CASE("poincare inequality holds on seeded random fields") {
    TorusShape t(2, 16);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::vector<double> u(t.site_count());
        for (SiteIndex s = 0; s < u.size(); ++s) u[s] = rng::uniform(seed, 4, s);
        for (std::int64_t R = 1; R <= 4; ++R) {
            PoincareResult r = poincare_check(t, u, R);
            CHECK(r.holds);
            CHECK(r.lhs <= r.rhs);
        }
    }
}

TEST_CASE("poincare guard rejects radii reaching around the torus") {
    TorusShape t(2, 8);
    std::vector<double> u(t.site_count(), 0.0);
    CHECK_THROWS_AS(poincare_check(t, u, 3), Error);
}

TEST_CASE("oscillation exponent of an affine potential is one") {
    TorusShape t(2, 40);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    CocycleField f = constant_cocycle(t, std::vector<double>{1.0, 0.25});
    HolderEstimate h = holder_exponent(env, f, 8);
    CHECK(!h.degenerate_constant);
    CHECK(h.alpha_hat == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.fit_quality == doctest::Approx(1.0).epsilon(1e-10));
    // osc(B_r) = 2 r max_i |y_i| for an affine function
    REQUIRE(h.fit_radii.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(h.osc[i] ==
              doctest::Approx(2.0 * static_cast<double>(h.fit_radii[i])).epsilon(1e-12));
}

TEST_CASE("constant fields are reported as degenerate") {
    TorusShape t(2, 40);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    HolderEstimate h =
        holder_exponent(env, [](std::span<const std::int64_t>) { return 7.5; }, 8);
    CHECK(h.degenerate_constant);
    CHECK(h.alpha_hat == 0.0);
}

TEST_CASE("oscillation exponent rejects non-harmonic inputs") {
    TorusShape t(2, 40);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    auto quadratic = [](std::span<const std::int64_t> n) {
        return static_cast<double>(n[0] * n[0]);
    };
    CHECK_THROWS_AS(holder_exponent(env, quadratic, 8), Error);
}

TEST_CASE("oscillation exponent requires a usable radius ladder") {
    TorusShape t(2, 40);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    CocycleField f = constant_cocycle(t, std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(holder_exponent(env, f, 4), Error);  // below the minimum
    CHECK_THROWS_AS(holder_exponent(env, f, 16), Error); // 2R+1 past the guard
}

TEST_CASE("oscillation statistic closed form for unit increments") {
    // f == 1 in d=1: every point of the ball |n| <= 4R+1 contributes
    // f^2 + f^2 = 2, |B_4R| = 8R+1, so the statistic is
    // sqrt(16 R^2 / (8R+1) * 4 * 2 * (8R+3)) / R.
    TorusShape t(1, 64);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    CocycleField f = constant_cocycle(t, std::vector<double>{1.0});
    for (std::int64_t R : {1, 2, 3}) {
        const double cells = static_cast<double>(8 * R + 1);
        const double pts = static_cast<double>(8 * R + 3);
        const double want =
            std::sqrt(16.0 * static_cast<double>(R * R) / cells * 4.0 * 2.0 * pts) /
            static_cast<double>(R);
        CHECK(oscillation_constant_stat(env, f, R) == doctest::Approx(want).epsilon(1e-12));
    }

    // homogeneity: scaling the field scales the statistic
    CocycleField f3 = constant_cocycle(t, std::vector<double>{3.0});
    CHECK(oscillation_constant_stat(env, f3, 2) ==
          doctest::Approx(3.0 * oscillation_constant_stat(env, f, 2)).epsilon(1e-12));

    CHECK_THROWS_AS(oscillation_constant_stat(env, f, 8), Error); // 4R+1 past the guard
}

TEST_CASE("nearest multiple hand values") {
    CHECK(nearest_multiple(std::vector<std::int64_t>{7}, 2) == LatticePoint{6});
    CHECK(nearest_multiple(std::vector<std::int64_t>{-7}, 2) == LatticePoint{-6});
    CHECK(nearest_multiple(std::vector<std::int64_t>{1, 1}, 3) == LatticePoint({0, 0}));
    CHECK(nearest_multiple(std::vector<std::int64_t>{3, 4}, 5) == LatticePoint({2, 3}));
    CHECK(nearest_multiple(std::vector<std::int64_t>{-3, 4}, 5) == LatticePoint({-2, 3}));
    CHECK(nearest_multiple(std::vector<std::int64_t>{0, 0}, 4) == LatticePoint({0, 0}));
}

TEST_CASE("nearest multiple satisfies its approximation bounds") {
    for (std::int64_t m1 = -6; m1 <= 6; ++m1)
        for (std::int64_t m2 = -6; m2 <= 6; ++m2)
            for (std::int64_t n = 1; n <= 6; ++n) {
                const std::vector<std::int64_t> m{m1, m2};
                LatticePoint l = nearest_multiple(m, n);
                const std::int64_t norm_m = taxicab_norm(m);
                const std::int64_t norm_l = taxicab_norm(l);
                const std::int64_t dist = std::abs(l[0] - m[0]) + std::abs(l[1] - m[1]);
                CHECK(norm_l <= norm_m);
                CHECK(norm_l % n == 0);
                CHECK(norm_l == (norm_m / n) * n);
                // |l - m| <= n + |m| d / n, cleared of denominators
                CHECK(n * dist <= n * n + norm_m * 2);
            }
}
