#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "walk.hpp"

using namespace crl;

namespace {

Environment random_env(std::uint32_t d, std::uint32_t L, std::uint64_t seed) {
    return Environment::generate(TorusShape(d, L), GeneratorModel::iid_uniform(), 1.0, 2.0,
                                 seed);
}

CocycleField solved_cocycle(const Environment& env, const std::vector<double>& y) {
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());
    return harmonic_cocycle(sol, y);
}

} // namespace

TEST_CASE("transition probabilities weigh the adjacent conductances") {
    // d=1, L=2, c = [3, 5]: from site 0, right uses c(0)=3, left uses c(-1)=5
    TorusShape t(1, 2);
    Environment env = Environment::from_fields(t, {{3.0, 5.0}}, 1.0, 6.0);
    std::vector<double> p = transition_probabilities(env, std::vector<std::int64_t>{0});
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(3.0 / 8.0).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(5.0 / 8.0).epsilon(1e-15));

    Environment env2 = random_env(2, 6, 13);
    for (SiteIndex s = 0; s < env2.shape().site_count(); ++s) {
        std::vector<double> q = transition_probabilities(env2, env2.shape().coords_of(s));
        double sum = 0.0;
        for (double v : q) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("generator agrees with the weighted divergence form") {
    Environment env = random_env(2, 8, 17);
    std::vector<double> u(env.shape().site_count());
    for (SiteIndex s = 0; s < u.size(); ++s) u[s] = rng::uniform(23, 1, s) - 0.5;
    std::vector<double> a = apply_generator(env, u);
    std::vector<double> b = apply_operator(env, u, true);
    for (SiteIndex s = 0; s < u.size(); ++s) CHECK(std::abs(a[s] - b[s]) <= 1e-13);
}

TEST_CASE("detailed balance holds to rounding") {
    Environment env = random_env(2, 8, 19);
    CHECK(detailed_balance_residual(env) <= 1e-12);
}

TEST_CASE("walks are deterministic and step one site at a time") {
    Environment env = random_env(2, 8, 29);
    const LatticePoint start{0, 0};
    WalkTrajectory w1 = simulate(env, start, 64, 5);
    WalkTrajectory w2 = simulate(env, start, 64, 5);
    WalkTrajectory w3 = simulate(env, start, 64, 6);
    CHECK(w1.moves == w2.moves);
    CHECK(w1.moves != w3.moves);
    REQUIRE(w1.positions.size() == 65);
    REQUIRE(w1.moves.size() == 64);
    for (std::size_t i = 0; i < w1.moves.size(); ++i) {
        const std::uint8_t m = w1.moves[i];
        REQUIRE(m < 4);
        LatticePoint expect = w1.positions[i];
        expect[m / 2] += (m % 2 == 0) ? 1 : -1;
        CHECK(w1.positions[i + 1] == expect);
    }
}

TEST_CASE("walk moves follow the conductance distribution") {
    // strongly anisotropic ring: nearly all mass on +/- e1
    TorusShape t(2, 4);
    std::vector<std::vector<double>> f(2);
    f[0].assign(t.site_count(), 100.0);
    f[1].assign(t.site_count(), 0.01);
    Environment env = Environment::from_fields(t, std::move(f), 0.001, 1000.0);
    WalkTrajectory w = simulate(env, LatticePoint{0, 0}, 2000, 7);
    std::size_t along_e1 = 0;
    for (std::uint8_t m : w.moves)
        if (m / 2 == 0) ++along_e1;
    CHECK(along_e1 > 1900);
}

TEST_CASE("harmonic cocycles make the walk functional a martingale") {
    Environment env = random_env(2, 8, 31);
    CocycleField f = solved_cocycle(env, {1.0, 0.0});
    CHECK(martingale_residual(env, f) <= 1e-8);

    // the uncorrected linear functional is not a martingale
    CocycleField linear = constant_cocycle(env.shape(), std::vector<double>{1.0, 0.0});
    CHECK(martingale_residual(env, linear) > 1e-3);
}

TEST_CASE("constant environments give Y identical to the first coordinate") {
    Environment env =
        Environment::generate(TorusShape(2, 6), GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    CocycleField f = solved_cocycle(env, {1.0, 0.0});
    std::vector<WalkRecord> records;
    WalkEnsembleStats st = clt_ensemble(env, f, 200, 50, 3, &records);
    CHECK(st.max_sublinear_gap == 0.0);
    REQUIRE(records.size() == 50);
    for (const WalkRecord& r : records)
        CHECK(r.y == doctest::Approx(static_cast<double>(r.x[0])).epsilon(1e-12));
}

TEST_CASE("ensemble statistics are reproducible and thread-count independent") {
    Environment env = random_env(2, 8, 37);
    CocycleField f = solved_cocycle(env, {1.0, 0.0});

    setenv("CORRECTOR_LAB_THREADS", "3", 1);
    WalkEnsembleStats a = clt_ensemble(env, f, 100, 40, 11);
    setenv("CORRECTOR_LAB_THREADS", "1", 1);
    WalkEnsembleStats b = clt_ensemble(env, f, 100, 40, 11);
    unsetenv("CORRECTOR_LAB_THREADS");

    CHECK(a.mean_Y == b.mean_Y);
    CHECK(a.var_Y == b.var_Y);
    CHECK(a.max_sublinear_gap == b.max_sublinear_gap);
    CHECK(a.normality_stat == b.normality_stat);
    CHECK(a.k == 100);
    CHECK(a.n_walks == 40);
}

TEST_CASE("ensemble walks can be replayed one by one") {
    Environment env = random_env(2, 6, 41);
    CocycleField f = solved_cocycle(env, {1.0, 0.0});
    std::vector<WalkRecord> records;
    clt_ensemble(env, f, 50, 8, 13, &records);
    for (std::uint64_t w = 0; w < 8; ++w) {
        WalkTrajectory traj =
            simulate(env, LatticePoint{0, 0}, 50, walk_stream_seed(13, w));
        CHECK(traj.positions.back() == records[w].x);
    }
}

TEST_CASE("thread count helper honors the environment variable") {
    setenv("CORRECTOR_LAB_THREADS", "5", 1);
    CHECK(par::thread_count() == 5);
    setenv("CORRECTOR_LAB_THREADS", "0", 1);
    CHECK(par::thread_count() >= 1);
    unsetenv("CORRECTOR_LAB_THREADS");
    CHECK(par::thread_count() >= 1);
}

TEST_CASE("parallel for covers every index exactly once") {
    std::vector<int> hits(1000, 0);
    par::parallel_for(1000, [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t i = lo; i < hi; ++i) hits[i] += 1;
    });
    for (int h : hits) CHECK(h == 1);
    // n = 0 is a no-op
    par::parallel_for(0, [&](std::uint64_t, std::uint64_t) { CHECK(false); });
}
