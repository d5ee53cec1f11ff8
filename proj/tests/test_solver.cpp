#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "rng.hpp"
#include "solver.hpp"

using namespace crl;

namespace {

Environment random_env(std::uint32_t d, std::uint32_t L, std::uint64_t seed, double a = 1.0,
                       double b = 2.0) {
    return Environment::generate(TorusShape(d, L), GeneratorModel::iid_uniform(), a, b, seed);
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
    return acc;
}

} // namespace

TEST_CASE("operator on the unit-conductance ring is the discrete Laplacian") {
    TorusShape t(1, 4);
    Environment env = Environment::generate(t, GeneratorModel::constant(1.0), 0.5, 1.5, 0);
    std::vector<double> u{0.0, 1.0, 0.0, 0.0};

    std::vector<double> Au = apply_operator(env, u);
    CHECK(Au[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Au[1] == doctest::Approx(-2.0).epsilon(1e-15));
    CHECK(Au[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(Au[3] == doctest::Approx(0.0).epsilon(1e-15));

    // weighted form divides by bar_c = 2
    std::vector<double> Lu = apply_operator(env, u, true);
    CHECK(Lu[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Lu[1] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(Lu[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(Lu[3] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("operator is symmetric and negative semidefinite") {
    Environment env = random_env(2, 6, 11);
    const SiteIndex n = env.shape().site_count();
    std::vector<double> u(n), v(n);
    for (SiteIndex s = 0; s < n; ++s) {
        u[s] = rng::uniform(5, 1, s) - 0.5;
        v[s] = rng::uniform(5, 2, s) - 0.5;
    }
    std::vector<double> Au = apply_operator(env, u);
    std::vector<double> Av = apply_operator(env, v);
    CHECK(dot(Au, v) == doctest::Approx(dot(u, Av)).epsilon(1e-12));
    CHECK(dot(Au, u) <= 1e-12);

    std::vector<double> ones(n, 3.25);
    for (double w : apply_operator(env, ones)) CHECK(std::abs(w) <= 1e-12);
}

TEST_CASE("operator rejects size mismatch") {
    Environment env = random_env(2, 4, 1);
    CHECK_THROWS_AS(apply_operator(env, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("one-dimensional cell problem has the harmonic-mean closed form") {
    // c = [1, 2, 1, 2]: flux H = harmonic mean = 4/3, increments f = H / c
    TorusShape t(1, 4);
    Environment env = Environment::from_fields(t, {{1.0, 2.0, 1.0, 2.0}}, 0.5, 2.5);
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());

    const double y1 = 1.0;
    CocycleField f = harmonic_cocycle(sol, std::vector<double>{y1});
    const double H = 4.0 / 3.0;
    CHECK(f.increment(0, 0) == doctest::Approx(H / 1.0).epsilon(1e-10));
    CHECK(f.increment(1, 0) == doctest::Approx(H / 2.0).epsilon(1e-10));
    CHECK(f.increment(2, 0) == doctest::Approx(H / 1.0).epsilon(1e-10));
    CHECK(f.increment(3, 0) == doctest::Approx(H / 2.0).epsilon(1e-10));

    EffectiveTensor a = effective_tensor(env, sol);
    CHECK(a.at(0, 0) == doctest::Approx(H).epsilon(1e-10));
}

TEST_CASE("constant environments have zero correctors and scalar tensors") {
    Environment env =
        Environment::generate(TorusShape(2, 6), GeneratorModel::constant(1.7), 1.0, 2.0, 0);
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());
    for (std::uint32_t j = 0; j < 2; ++j)
        for (double v : sol.chi[j]) CHECK(std::abs(v) <= 1e-12);

    EffectiveTensor a = effective_tensor(env, sol);
    CHECK(a.at(0, 0) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(a.at(1, 1) == doctest::Approx(1.7).epsilon(1e-12));
    CHECK(std::abs(a.at(0, 1)) <= 1e-12);
    CHECK(std::abs(a.at(1, 0)) <= 1e-12);
}

TEST_CASE("conjugate gradient agrees with the dense elimination oracle") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Environment env = random_env(2, 5, seed);
        CorrectorSolution cg = solve_corrector(env);
        REQUIRE(cg.all_converged());
        CorrectorSolution dense = dense_oracle_solve(env);
        double gap = 0.0;
        for (std::uint32_t j = 0; j < 2; ++j)
            for (SiteIndex s = 0; s < env.shape().site_count(); ++s)
                gap = std::max(gap, std::abs(cg.chi[j][s] - dense.chi[j][s]));
        CHECK(gap <= 1e-9);
    }
}

TEST_CASE("solution is independent of the starting vector") {
    Environment env = random_env(2, 6, 21);
    SolveOptions o1, o2;
    o2.init_seed = 777;
    CorrectorSolution s1 = solve_corrector(env, o1);
    CorrectorSolution s2 = solve_corrector(env, o2);
    REQUIRE(s1.all_converged());
    REQUIRE(s2.all_converged());
    for (std::uint32_t j = 0; j < 2; ++j)
        for (SiteIndex s = 0; s < env.shape().site_count(); ++s)
            CHECK(std::abs(s1.chi[j][s] - s2.chi[j][s]) <= 1e-8);
}

TEST_CASE("reconstructed cocycle is closed, harmonic and mean-correct") {
    Environment env = random_env(2, 8, 31);
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());

    const std::vector<double> y{1.0, -0.5};
    CocycleField f = harmonic_cocycle(sol, y);
    CHECK(f.closedness_residual() <= 1e-12);
    CHECK(harmonicity_residual(env, f) <= 1e-8);
    std::vector<double> mean = f.mean_vector();
    CHECK(mean[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean[1] == doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("cocycle reconstruction is linear in the prescribed mean") {
    Environment env = random_env(2, 6, 41);
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());
    CocycleField fa = harmonic_cocycle(sol, std::vector<double>{1.0, 0.0});
    CocycleField fb = harmonic_cocycle(sol, std::vector<double>{0.0, 1.0});
    CocycleField fc = harmonic_cocycle(sol, std::vector<double>{2.0, -3.0});
    for (std::uint32_t i = 0; i < 2; ++i)
        for (SiteIndex s = 0; s < env.shape().site_count(); ++s) {
            const double want = 2.0 * fa.increment(s, i) - 3.0 * fb.increment(s, i);
            CHECK(fc.increment(s, i) == doctest::Approx(want).epsilon(1e-12));
        }
}

TEST_CASE("non-convergence is recorded, not thrown") {
    Environment env = random_env(2, 8, 51);
    SolveOptions opts;
    opts.tol = 1e-14;
    opts.max_iter = 1;
    CorrectorSolution sol = solve_corrector(env, opts);
    CHECK(!sol.all_converged());
    CHECK(sol.worst_residual() > 1e-14);
}

TEST_CASE("dense oracle is guarded by problem size") {
    Environment env = random_env(1, 4100, 61);
    CHECK_THROWS_AS(dense_oracle_solve(env), Error);
    try {
        dense_oracle_solve(env);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::guard);
    }
}

TEST_CASE("effective tensor is symmetric and elliptically bounded") {
    Environment env = random_env(2, 8, 71, 1.0, 4.0);
    CorrectorSolution sol = solve_corrector(env);
    REQUIRE(sol.all_converged());
    EffectiveTensor a = effective_tensor(env, sol);
    CHECK(a.at(0, 1) == doctest::Approx(a.at(1, 0)).epsilon(1e-10));
    std::vector<double> eig = symmetric_eigenvalues(2, a.a_hom);
    CHECK(eig.front() >= 1.0 - 1e-6);
    CHECK(eig.back() <= 4.0 + 1e-6);
}

TEST_CASE("eigenvalue helper matches hand values") {
    // [[2,1],[1,2]] -> {1,3}
    std::vector<double> m{2.0, 1.0, 1.0, 2.0};
    std::vector<double> eig = symmetric_eigenvalues(2, m);
    CHECK(eig[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eig[1] == doctest::Approx(3.0).epsilon(1e-12));

    std::vector<double> d3{3.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5};
    std::vector<double> e3 = symmetric_eigenvalues(3, d3);
    CHECK(e3[0] == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(e3[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e3[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("corrector file round-trip") {
    Environment env = random_env(2, 5, 81);
    CorrectorSolution sol = solve_corrector(env);
    const std::string path = "crl_test_corrector.cor1";
    sol.save(path);
    CorrectorSolution back = CorrectorSolution::load(path);
    CHECK(back.shape == env.shape());
    CHECK(back.tol == sol.tol);
    CHECK(back.chi == sol.chi);
    CHECK(back.residual_l2 == sol.residual_l2);
    CHECK(back.iterations == sol.iterations);
    CHECK(back.converged == sol.converged);

    std::ofstream(path, std::ios::binary | std::ios::app) << "y";
    CHECK_THROWS_AS(CorrectorSolution::load(path), Error);
    std::remove(path.c_str());
}
