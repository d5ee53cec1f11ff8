#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cocycle.hpp"
#include "environment.hpp"

namespace crl {

// Moves are indexed in the fixed order +e1, -e1, +e2, -e2, ..., +ed, -ed.
// Direction of move m is m/2, sign is +1 for even m.
struct WalkTrajectory {
    LatticePoint start;
    std::vector<std::uint8_t> moves;     // k entries
    std::vector<LatticePoint> positions; // k+1 entries, unwrapped Z^d points
    std::uint64_t seed = 0;
};

struct WalkEnsembleStats {
    std::uint64_t k = 0;
    std::uint64_t n_walks = 0;
    double mean_Y = 0.0;
    double var_Y = 0.0;
    double var_over_k = 0.0;
    double max_sublinear_gap = 0.0; // max over walks of |Y_k - X_k^(1)| / max(1, |X_k|)
    double normality_stat = 0.0;    // |m4/m2^2 - 3| of the Y sample
};

// Per-walk terminal state, for CSV emission.
struct WalkRecord {
    double y = 0.0;
    LatticePoint x;
};

// Jump probabilities at a lattice point (environment read modulo L):
// p[2i] = c_i(n)/bar_c(n), p[2i+1] = c_i(n-e_i)/bar_c(n). Sums to 1.
std::vector<double> transition_probabilities(const Environment& env,
                                             std::span<const std::int64_t> site);

// (L u)(n) = sum over moves P(move) * (u(n + move) - u(n)), the conditional
// expectation of the increment. Agrees with apply_operator(env, u, true).
std::vector<double> apply_generator(const Environment& env, const std::vector<double>& u);

// The RNG stream seed for walk w of an ensemble keyed by `seed`. simulate()
// with this seed reproduces exactly the walk the ensemble ran.
std::uint64_t walk_stream_seed(std::uint64_t seed, std::uint64_t walk_index);

// k steps from `start`, inverse-CDF sampling in the fixed move order, one
// counter-mode draw per step. Deterministic in (env, start, k, seed).
WalkTrajectory simulate(const Environment& env, const LatticePoint& start, std::uint64_t k,
                        std::uint64_t seed);

// max over sites of |E[Y_{k+1} - Y_k | X_k = n]| for Y = S at the walk
// position; zero exactly when S is harmonic.
double martingale_residual(const Environment& env, const CocycleField& S);

// max over directed edges of |bar_c(n) P(n -> n+e_i) - bar_c(n+e_i) P(n+e_i -> n)|;
// algebraically zero (both flows equal c_i(n)).
double detailed_balance_residual(const Environment& env);

// n_walks independent walks from the origin, Y accumulated along edge
// increments of S. Walks are parallelized; every walk writes only its own
// slot, so results do not depend on the thread count. If `records` is given
// it receives one entry per walk.
WalkEnsembleStats clt_ensemble(const Environment& env, const CocycleField& S, std::uint64_t k,
                               std::uint64_t n_walks, std::uint64_t seed,
                               std::vector<WalkRecord>* records = nullptr);

} // namespace crl
