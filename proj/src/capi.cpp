#include "correctorlab.h"

#include <cstring>
#include <exception>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cocycle.hpp"
#include "environment.hpp"
#include "ergodic.hpp"
#include "errors.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "walk.hpp"

struct crl_env {
    crl::Environment impl;
};
struct crl_cocycle {
    crl::CocycleField impl;
};
struct crl_corrector {
    crl::CorrectorSolution impl;
};

namespace {

thread_local std::string g_last_error;

crl_status map_code(crl::ErrorCode code) {
    switch (code) {
    case crl::ErrorCode::invalid_argument: return CRL_ERR_INVALID_ARGUMENT;
    case crl::ErrorCode::io: return CRL_ERR_IO;
    case crl::ErrorCode::format: return CRL_ERR_FORMAT;
    case crl::ErrorCode::no_convergence: return CRL_ERR_NO_CONVERGENCE;
    case crl::ErrorCode::guard: return CRL_ERR_GUARD;
    }
    return CRL_ERR_INTERNAL;
}

template <typename F>
crl_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return CRL_OK;
    } catch (const crl::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CRL_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return CRL_ERR_INTERNAL;
    }
}

void require(bool cond, const char* msg) {
    if (!cond) throw crl::Error(crl::ErrorCode::invalid_argument, msg);
}

std::span<const std::int64_t> site_span(const crl_env* env, const int64_t* site) {
    return {site, env->impl.shape().dim()};
}

} // namespace

extern "C" {

const char* crl_version(void) { return "1.0.0"; }

const char* crl_rng_algorithm(void) { return crl::rng::kAlgorithmId; }

const char* crl_last_error(void) { return g_last_error.c_str(); }

uint64_t crl_rng_draw(uint64_t seed, uint64_t stream, uint64_t counter) {
    return crl::rng::draw(seed, stream, counter);
}

double crl_rng_uniform(uint64_t seed, uint64_t stream, uint64_t counter) {
    return crl::rng::uniform(seed, stream, counter);
}

/* environment ------------------------------------------------------- */

crl_status crl_env_generate(uint32_t d, uint32_t L, double a, double b, const char* model,
                            uint64_t seed, crl_env** out) {
    return guarded([&] {
        require(model && out, "null argument");
        const crl::GeneratorModel parsed = crl::GeneratorModel::parse(model);
        crl::TorusShape shape(d, L);
        *out = new crl_env{crl::Environment::generate(shape, parsed, a, b, seed)};
    });
}

crl_status crl_env_load(const char* path, crl_env** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new crl_env{crl::Environment::load(path)};
    });
}

crl_status crl_env_save(const crl_env* env, const char* path) {
    return guarded([&] {
        require(env && path, "null argument");
        env->impl.save(path);
    });
}

void crl_env_free(crl_env* env) { delete env; }

uint32_t crl_env_dim(const crl_env* env) { return env->impl.shape().dim(); }

uint32_t crl_env_side(const crl_env* env) { return env->impl.shape().side(); }

uint64_t crl_env_seed(const crl_env* env) { return env->impl.seed(); }

double crl_env_bound_lo(const crl_env* env) { return env->impl.bound_lo(); }

double crl_env_bound_hi(const crl_env* env) { return env->impl.bound_hi(); }

crl_status crl_env_conductance(const crl_env* env, const int64_t* site, uint32_t dir,
                               double* out) {
    return guarded([&] {
        require(env && site && out, "null argument");
        *out = env->impl.conductance_at(site_span(env, site), dir);
    });
}

crl_status crl_env_bar_c(const crl_env* env, const int64_t* site, double* out) {
    return guarded([&] {
        require(env && site && out, "null argument");
        *out = env->impl.bar_c_at(site_span(env, site));
    });
}

/* cocycles ---------------------------------------------------------- */

crl_status crl_cocycle_constant(uint32_t d, uint32_t L, const double* y, crl_cocycle** out) {
    return guarded([&] {
        require(y && out, "null argument");
        crl::TorusShape shape(d, L);
        *out = new crl_cocycle{crl::constant_cocycle(shape, {y, d})};
    });
}

crl_status crl_cocycle_coboundary(uint32_t d, uint32_t L, const double* g, crl_cocycle** out) {
    return guarded([&] {
        require(g && out, "null argument");
        crl::TorusShape shape(d, L);
        std::vector<double> pot(g, g + shape.site_count());
        *out = new crl_cocycle{crl::coboundary(shape, pot)};
    });
}

crl_status crl_cocycle_load(const char* path, crl_cocycle** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new crl_cocycle{crl::CocycleField::load(path)};
    });
}

crl_status crl_cocycle_save(const crl_cocycle* S, const char* path) {
    return guarded([&] {
        require(S && path, "null argument");
        S->impl.save(path);
    });
}

void crl_cocycle_free(crl_cocycle* S) { delete S; }

uint32_t crl_cocycle_dim(const crl_cocycle* S) { return S->impl.shape().dim(); }

uint32_t crl_cocycle_side(const crl_cocycle* S) { return S->impl.shape().side(); }

crl_status crl_cocycle_evaluate(const crl_cocycle* S, const int64_t* n, double* out) {
    return guarded([&] {
        require(S && n && out, "null argument");
        *out = S->impl.evaluate({n, S->impl.shape().dim()});
    });
}

crl_status crl_cocycle_mean(const crl_cocycle* S, double* y) {
    return guarded([&] {
        require(S && y, "null argument");
        const std::vector<double> mean = S->impl.mean_vector();
        std::memcpy(y, mean.data(), mean.size() * sizeof(double));
    });
}

crl_status crl_cocycle_closedness(const crl_cocycle* S, double* out) {
    return guarded([&] {
        require(S && out, "null argument");
        *out = S->impl.closedness_residual();
    });
}

/* solver ------------------------------------------------------------ */

crl_status crl_solve(const crl_env* env, double tol, uint64_t max_iter, uint64_t init_seed,
                     crl_corrector** out) {
    return guarded([&] {
        require(env && out, "null argument");
        crl::SolveOptions opts;
        if (tol > 0.0) opts.tol = tol;
        opts.max_iter = max_iter;
        opts.init_seed = init_seed;
        *out = new crl_corrector{crl::solve_corrector(env->impl, opts)};
    });
}

crl_status crl_solve_dense(const crl_env* env, crl_corrector** out) {
    return guarded([&] {
        require(env && out, "null argument");
        *out = new crl_corrector{crl::dense_oracle_solve(env->impl)};
    });
}

crl_status crl_corrector_load(const char* path, crl_corrector** out) {
    return guarded([&] {
        require(path && out, "null argument");
        *out = new crl_corrector{crl::CorrectorSolution::load(path)};
    });
}

crl_status crl_corrector_save(const crl_corrector* c, const char* path) {
    return guarded([&] {
        require(c && path, "null argument");
        c->impl.save(path);
    });
}

void crl_corrector_free(crl_corrector* c) { delete c; }

int crl_corrector_converged(const crl_corrector* c) {
    return c && c->impl.all_converged() ? 1 : 0;
}

crl_status crl_corrector_stats(const crl_corrector* c, uint32_t j, double* residual,
                               uint64_t* iterations) {
    return guarded([&] {
        require(c && residual && iterations, "null argument");
        require(j < c->impl.shape.dim(), "direction out of range");
        *residual = c->impl.residual_l2[j];
        *iterations = c->impl.iterations[j];
    });
}

crl_status crl_corrector_chi(const crl_corrector* c, uint32_t j, double* out) {
    return guarded([&] {
        require(c && out, "null argument");
        require(j < c->impl.shape.dim(), "direction out of range");
        const std::vector<double>& chi = c->impl.chi[j];
        std::memcpy(out, chi.data(), chi.size() * sizeof(double));
    });
}

crl_status crl_harmonic_cocycle(const crl_corrector* c, const double* y, crl_cocycle** out) {
    return guarded([&] {
        require(c && y && out, "null argument");
        *out = new crl_cocycle{crl::harmonic_cocycle(c->impl, {y, c->impl.shape.dim()})};
    });
}

crl_status crl_harmonicity_residual(const crl_env* env, const crl_cocycle* S, double* out) {
    return guarded([&] {
        require(env && S && out, "null argument");
        *out = crl::harmonicity_residual(env->impl, S->impl);
    });
}

crl_status crl_effective_tensor(const crl_env* env, const crl_corrector* c, double* a_hom) {
    return guarded([&] {
        require(env && c && a_hom, "null argument");
        const crl::EffectiveTensor t = crl::effective_tensor(env->impl, c->impl);
        std::memcpy(a_hom, t.a_hom.data(), t.a_hom.size() * sizeof(double));
    });
}

crl_status crl_symmetric_eigenvalues(uint32_t d, const double* a, double* eig) {
    return guarded([&] {
        require(a && eig, "null argument");
        const std::vector<double> e =
            crl::symmetric_eigenvalues(d, {a, static_cast<std::size_t>(d) * d});
        std::memcpy(eig, e.data(), e.size() * sizeof(double));
    });
}

/* ergodic ------------------------------------------------------------ */

crl_status crl_sublinearity_profile(const crl_cocycle* S, const double* y, const int64_t* radii,
                                    size_t n_radii, double* values, uint8_t* exact) {
    return guarded([&] {
        require(S && y && radii && values, "null argument");
        const crl::SublinearityProfile prof = crl::sublinearity_profile(
            S->impl, {y, S->impl.shape().dim()}, {radii, n_radii});
        std::memcpy(values, prof.values.data(), prof.values.size() * sizeof(double));
        if (exact) std::memcpy(exact, prof.exact.data(), prof.exact.size());
    });
}

crl_status crl_directional_average(const crl_cocycle* S, const int64_t* n, int64_t k,
                                   double* out) {
    return guarded([&] {
        require(S && n && out, "null argument");
        *out = crl::directional_average(S->impl, {n, S->impl.shape().dim()}, k);
    });
}

crl_status crl_poincare_check(uint32_t d, uint32_t L, const double* u, int64_t R, double* lhs,
                              double* rhs, int* holds) {
    return guarded([&] {
        require(u && lhs && rhs && holds, "null argument");
        crl::TorusShape shape(d, L);
        std::vector<double> field(u, u + shape.site_count());
        const crl::PoincareResult res = crl::poincare_check(shape, field, R);
        *lhs = res.lhs;
        *rhs = res.rhs;
        *holds = res.holds ? 1 : 0;
    });
}

crl_status crl_holder_exponent(const crl_env* env, const crl_cocycle* S, int64_t R,
                               double* alpha_hat, double* c_hat, double* fit_quality,
                               int* degenerate, int64_t* radii_out, double* osc_out,
                               size_t* n_points) {
    return guarded([&] {
        require(env && S && alpha_hat && c_hat && fit_quality && degenerate, "null argument");
        const crl::HolderEstimate est = crl::holder_exponent(env->impl, S->impl, R);
        *alpha_hat = est.alpha_hat;
        *c_hat = est.C_hat;
        *fit_quality = est.fit_quality;
        *degenerate = est.degenerate_constant ? 1 : 0;
        if (n_points) *n_points = est.fit_radii.size();
        if (radii_out)
            std::memcpy(radii_out, est.fit_radii.data(),
                        est.fit_radii.size() * sizeof(int64_t));
        if (osc_out) std::memcpy(osc_out, est.osc.data(), est.osc.size() * sizeof(double));
    });
}

crl_status crl_oscillation_constant(const crl_env* env, const crl_cocycle* S, int64_t R,
                                    double* out) {
    return guarded([&] {
        require(env && S && out, "null argument");
        *out = crl::oscillation_constant_stat(env->impl, S->impl, R);
    });
}

crl_status crl_nearest_multiple(const int64_t* m, uint32_t d, int64_t n, int64_t* l_out) {
    return guarded([&] {
        require(m && l_out, "null argument");
        const crl::LatticePoint l = crl::nearest_multiple({m, d}, n);
        std::memcpy(l_out, l.data(), l.size() * sizeof(int64_t));
    });
}

/* walk ---------------------------------------------------------------- */

crl_status crl_transition_probabilities(const crl_env* env, const int64_t* site, double* p) {
    return guarded([&] {
        require(env && site && p, "null argument");
        const std::vector<double> probs =
            crl::transition_probabilities(env->impl, site_span(env, site));
        std::memcpy(p, probs.data(), probs.size() * sizeof(double));
    });
}

crl_status crl_detailed_balance_residual(const crl_env* env, double* out) {
    return guarded([&] {
        require(env && out, "null argument");
        *out = crl::detailed_balance_residual(env->impl);
    });
}

crl_status crl_martingale_residual(const crl_env* env, const crl_cocycle* S, double* out) {
    return guarded([&] {
        require(env && S && out, "null argument");
        *out = crl::martingale_residual(env->impl, S->impl);
    });
}

crl_status crl_simulate_walk(const crl_env* env, const int64_t* start, uint64_t k,
                             uint64_t seed, int64_t* end_pos, uint8_t* moves) {
    return guarded([&] {
        require(env && start && end_pos, "null argument");
        const std::uint32_t d = env->impl.shape().dim();
        crl::LatticePoint s(start, start + d);
        const crl::WalkTrajectory t = crl::simulate(env->impl, s, k, seed);
        std::memcpy(end_pos, t.positions.back().data(), d * sizeof(int64_t));
        if (moves && k) std::memcpy(moves, t.moves.data(), t.moves.size());
    });
}

uint64_t crl_walk_stream_seed(uint64_t seed, uint64_t walk_index) {
    return crl::walk_stream_seed(seed, walk_index);
}

crl_status crl_clt_ensemble(const crl_env* env, const crl_cocycle* S, uint64_t k,
                            uint64_t n_walks, uint64_t seed, crl_clt_stats* stats,
                            double* walk_y, int64_t* walk_x) {
    return guarded([&] {
        require(env && S && stats, "null argument");
        std::vector<crl::WalkRecord> records;
        const bool want_records = walk_y || walk_x;
        const crl::WalkEnsembleStats st = crl::clt_ensemble(
            env->impl, S->impl, k, n_walks, seed, want_records ? &records : nullptr);
        stats->k = st.k;
        stats->n_walks = st.n_walks;
        stats->mean_Y = st.mean_Y;
        stats->var_Y = st.var_Y;
        stats->var_over_k = st.var_over_k;
        stats->max_sublinear_gap = st.max_sublinear_gap;
        stats->normality_stat = st.normality_stat;
        if (want_records) {
            const std::uint32_t d = env->impl.shape().dim();
            for (std::uint64_t w = 0; w < n_walks; ++w) {
                if (walk_y) walk_y[w] = records[w].y;
                if (walk_x)
                    std::memcpy(walk_x + w * d, records[w].x.data(), d * sizeof(int64_t));
            }
        }
    });
}

} /* extern "C" */
