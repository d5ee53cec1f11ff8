/* C interface to the corrector laboratory: conductance environments on a
 * periodized lattice, harmonic cocycles (correctors) of the associated
 * network, sublinearity and oscillation diagnostics, and the random walk
 * among the conductances.
 *
 * Conventions:
 *   - Sites are points of Z^d; coordinates are reduced modulo L on lookup.
 *   - Directions are 0-based (0..d-1); moves are ordered +e1,-e1,...,+ed,-ed.
 *   - Every fallible call returns crl_status; on failure crl_last_error()
 *     gives a message for the calling thread, and output params are
 *     untouched. Handles are freed with the matching *_free.
 */
#ifndef CORRECTORLAB_H
#define CORRECTORLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CRL_API __declspec(dllexport)
#else
#define CRL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum crl_status {
    CRL_OK = 0,
    CRL_ERR_INVALID_ARGUMENT = 1,
    CRL_ERR_IO = 2,
    CRL_ERR_FORMAT = 3,
    CRL_ERR_NO_CONVERGENCE = 4,
    CRL_ERR_GUARD = 5,
    CRL_ERR_INTERNAL = 6
} crl_status;

typedef struct crl_env crl_env;             /* conductance environment */
typedef struct crl_cocycle crl_cocycle;     /* degree-1 cocycle (edge increments) */
typedef struct crl_corrector crl_corrector; /* cell-problem solution, d potentials */

CRL_API const char* crl_version(void);
CRL_API const char* crl_rng_algorithm(void);
CRL_API const char* crl_last_error(void); /* thread-local; "" if none */

/* Counter-mode RNG used throughout; pure function of its arguments. */
CRL_API uint64_t crl_rng_draw(uint64_t seed, uint64_t stream, uint64_t counter);
CRL_API double crl_rng_uniform(uint64_t seed, uint64_t stream, uint64_t counter);

/* ------------------------------------------------------------------ */
/* environment                                                        */

/* model: "constant:VALUE", "iid-uniform", "iid-two-point:P:LO:HI",
 * "checkerboard-random:LO:HI", "smooth-correlated:RADIUS".
 * Requires 0 < a < b; all generated conductances lie strictly inside (a,b). */
CRL_API crl_status crl_env_generate(uint32_t d, uint32_t L, double a, double b,
                                    const char* model, uint64_t seed, crl_env** out);
CRL_API crl_status crl_env_load(const char* path, crl_env** out);
CRL_API crl_status crl_env_save(const crl_env* env, const char* path);
CRL_API void crl_env_free(crl_env* env);

CRL_API uint32_t crl_env_dim(const crl_env* env);
CRL_API uint32_t crl_env_side(const crl_env* env);
CRL_API uint64_t crl_env_seed(const crl_env* env);
CRL_API double crl_env_bound_lo(const crl_env* env);
CRL_API double crl_env_bound_hi(const crl_env* env);
/* conductance of edge [site, site+e_dir]; site has d coordinates */
CRL_API crl_status crl_env_conductance(const crl_env* env, const int64_t* site, uint32_t dir,
                                       double* out);
CRL_API crl_status crl_env_bar_c(const crl_env* env, const int64_t* site, double* out);

/* ------------------------------------------------------------------ */
/* cocycles                                                           */

CRL_API crl_status crl_cocycle_constant(uint32_t d, uint32_t L, const double* y,
                                        crl_cocycle** out);
/* g has L^d entries, linearized first coordinate fastest */
CRL_API crl_status crl_cocycle_coboundary(uint32_t d, uint32_t L, const double* g,
                                          crl_cocycle** out);
CRL_API crl_status crl_cocycle_load(const char* path, crl_cocycle** out);
CRL_API crl_status crl_cocycle_save(const crl_cocycle* S, const char* path);
CRL_API void crl_cocycle_free(crl_cocycle* S);

CRL_API uint32_t crl_cocycle_dim(const crl_cocycle* S);
CRL_API uint32_t crl_cocycle_side(const crl_cocycle* S);
/* S summed along the canonical staircase path from 0 to n (n in Z^d) */
CRL_API crl_status crl_cocycle_evaluate(const crl_cocycle* S, const int64_t* n, double* out);
CRL_API crl_status crl_cocycle_mean(const crl_cocycle* S, double* y /* d entries */);
/* max over plaquettes of the path-independence defect */
CRL_API crl_status crl_cocycle_closedness(const crl_cocycle* S, double* out);

/* ------------------------------------------------------------------ */
/* solver                                                             */

/* Conjugate gradient for the periodic cell problem, one mean-zero potential
 * per direction. tol is the relative residual (default 1e-10 if 0);
 * max_iter 0 means 20*L*d; init_seed 0 starts from zero. Non-convergence is
 * reported by crl_corrector_converged, not by a failure status. */
CRL_API crl_status crl_solve(const crl_env* env, double tol, uint64_t max_iter,
                             uint64_t init_seed, crl_corrector** out);
/* dense elimination oracle; guarded to L^d <= 4096 */
CRL_API crl_status crl_solve_dense(const crl_env* env, crl_corrector** out);
CRL_API crl_status crl_corrector_load(const char* path, crl_corrector** out);
CRL_API crl_status crl_corrector_save(const crl_corrector* c, const char* path);
CRL_API void crl_corrector_free(crl_corrector* c);

CRL_API int crl_corrector_converged(const crl_corrector* c); /* 1 if all directions */
CRL_API crl_status crl_corrector_stats(const crl_corrector* c, uint32_t j, double* residual,
                                       uint64_t* iterations);
CRL_API crl_status crl_corrector_chi(const crl_corrector* c, uint32_t j,
                                     double* out /* L^d entries */);

/* harmonic cocycle with mean y reconstructed from the potentials */
CRL_API crl_status crl_harmonic_cocycle(const crl_corrector* c, const double* y,
                                        crl_cocycle** out);
/* node-law defect max over sites of |sum_i (c_i f_i)(n) - (c_i f_i)(n-e_i)| */
CRL_API crl_status crl_harmonicity_residual(const crl_env* env, const crl_cocycle* S,
                                            double* out);
/* homogenized tensor; a_hom receives d*d row-major entries */
CRL_API crl_status crl_effective_tensor(const crl_env* env, const crl_corrector* c,
                                        double* a_hom);
/* ascending eigenvalues of a symmetric d x d matrix (row-major) */
CRL_API crl_status crl_symmetric_eigenvalues(uint32_t d, const double* a, double* eig);

/* ------------------------------------------------------------------ */
/* ergodic diagnostics                                                */

/* M(R) = max over |n| <= R of |S(n) - <n,y>| / R for each requested radius.
 * exact[i] is 1 when the whole ball was enumerated, 0 for a shell-only
 * estimate. radii must be increasing and at most floor(L/2)-1. */
CRL_API crl_status crl_sublinearity_profile(const crl_cocycle* S, const double* y,
                                            const int64_t* radii, size_t n_radii,
                                            double* values, uint8_t* exact);
/* evaluate(S, k*n) / (k*|n|) */
CRL_API crl_status crl_directional_average(const crl_cocycle* S, const int64_t* n, int64_t k,
                                           double* out);
/* u has L^d entries; requires R+1 <= floor(L/2)-1 */
CRL_API crl_status crl_poincare_check(uint32_t d, uint32_t L, const double* u, int64_t R,
                                      double* lhs, double* rhs, int* holds);
/* Oscillation exponent of the potential of S over radii {R/8,R/4,R/2,R}.
 * radii_out/osc_out have capacity 4; *n_points gets the count. degenerate=1
 * means osc(B_R)=0 and the exponent is undefined. Requires R >= 8 and
 * 2R+1 <= floor(L/2)-1 and a node-law residual <= 1e-6 on the sample ball. */
CRL_API crl_status crl_holder_exponent(const crl_env* env, const crl_cocycle* S, int64_t R,
                                       double* alpha_hat, double* c_hat, double* fit_quality,
                                       int* degenerate, int64_t* radii_out, double* osc_out,
                                       size_t* n_points);
/* ball-averaged increment statistic, normalized by R; 4R+1 within guard */
CRL_API crl_status crl_oscillation_constant(const crl_env* env, const crl_cocycle* S,
                                            int64_t R, double* out);
/* exact integer construction: l = k*v with |v| = n; |l| <= |m| and
 * |l - m| <= n + |m|*d/n; l = 0 when |m| < n */
CRL_API crl_status crl_nearest_multiple(const int64_t* m, uint32_t d, int64_t n,
                                        int64_t* l_out);

/* ------------------------------------------------------------------ */
/* random walk                                                        */

/* p receives 2d entries in move order; they sum to 1 */
CRL_API crl_status crl_transition_probabilities(const crl_env* env, const int64_t* site,
                                                double* p);
CRL_API crl_status crl_detailed_balance_residual(const crl_env* env, double* out);
/* max over sites of |E[S-increment of one step | at site]| */
CRL_API crl_status crl_martingale_residual(const crl_env* env, const crl_cocycle* S,
                                           double* out);
/* k steps from start; end_pos receives d coordinates; moves (capacity k)
 * receives the move indices unless NULL */
CRL_API crl_status crl_simulate_walk(const crl_env* env, const int64_t* start, uint64_t k,
                                     uint64_t seed, int64_t* end_pos, uint8_t* moves);
/* per-walk stream seed used by the ensemble, for replaying single walks */
CRL_API uint64_t crl_walk_stream_seed(uint64_t seed, uint64_t walk_index);

typedef struct crl_clt_stats {
    uint64_t k;
    uint64_t n_walks;
    double mean_Y;
    double var_Y;
    double var_over_k;
    double max_sublinear_gap;
    double normality_stat;
} crl_clt_stats;

/* n_walks walks of k steps from the origin; Y accumulates the increments of
 * S along each walk. walk_y (capacity n_walks) and walk_x (capacity
 * n_walks*d, row-major) receive per-walk terminal values unless NULL. */
CRL_API crl_status crl_clt_ensemble(const crl_env* env, const crl_cocycle* S, uint64_t k,
                                    uint64_t n_walks, uint64_t seed, crl_clt_stats* stats,
                                    double* walk_y, int64_t* walk_x);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CORRECTORLAB_H */
