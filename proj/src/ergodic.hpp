#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cocycle.hpp"
#include "environment.hpp"

namespace crl {

// M(R) = max over the taxicab ball |n| <= R of |S(n) - <n,y>| / R. A value is
// exact when the whole ball was enumerated; beyond the per-dimension exact
// thresholds (d=2: R<=128, d=3: R<=24; d=1 always exact, d>=4 by ball size)
// only the boundary shell |n| = R is scanned and the entry is flagged.
struct SublinearityProfile {
    std::vector<std::int64_t> radii;
    std::vector<double> values;
    std::vector<std::uint8_t> exact;
};

SublinearityProfile sublinearity_profile(const CocycleField& S, std::span<const double> y,
                                         std::span<const std::int64_t> radii);

// evaluate(S, k*n) / (k*|n|). Paths may wrap the torus; at k*n = 0 mod L in
// every coordinate this equals sum_i n_i y_i / |n| exactly.
double directional_average(const CocycleField& S, std::span<const std::int64_t> n,
                           std::int64_t k);

struct PoincareResult {
    double lhs = 0.0; // sum over |n|<=R of (u(n) - ball mean)^2
    double rhs = 0.0; // 4R^2 sum over |n|<=R+1 of sum_i (du^2 + d*u^2)
    bool holds = false;
};

// Discrete Poincare inequality on taxicab balls; u lives on the torus and is
// read with periodic wrap. Requires R+1 <= floor(L/2)-1.
PoincareResult poincare_check(const TorusShape& shape, const std::vector<double>& u,
                              std::int64_t R);

struct HolderEstimate {
    double alpha_hat = 0.0;
    double C_hat = 0.0;
    std::int64_t R = 0;
    double fit_quality = 0.0;        // R^2 of the log-log regression, in [0,1]
    bool degenerate_constant = false; // osc(B_R) = 0, exponent undefined
    std::vector<std::int64_t> fit_radii;
    std::vector<double> osc;
};

// Oscillation exponent of a harmonic field: osc(B_r) = max - min over
// |n| <= r for r in {R/8, R/4, R/2, R}, least-squares fit of
// log osc vs log r. u is any function on Z^d (it need not be periodic);
// conductances are read modulo L. Preconditions: R >= 8,
// 2R+1 <= floor(L/2)-1, and the node-law residual of u is <= 1e-6
// everywhere on |n| <= 2R.
HolderEstimate holder_exponent(const Environment& env,
                               const std::function<double(std::span<const std::int64_t>)>& u,
                               std::int64_t R);

// Same, for the potential n -> evaluate(S, n) of a cocycle (fast path).
HolderEstimate holder_exponent(const Environment& env, const CocycleField& S, std::int64_t R);

// Ball-averaged oscillation statistic, normalized by R:
//   ((4R)^2 / |B_4R| * 4 * sum_{|n|<=4R+1} sum_i [f_i(n)^2 + f_i(n-e_i)^2])^(1/2) / R
// with the unknowable prefactor set to 1. Requires 4R+1 <= floor(L/2)-1.
double oscillation_constant_stat(const Environment& env, const CocycleField& S, std::int64_t R);

// Nearest multiple of the sphere-of-radius-n lattice directions: the exact
// integer construction l = k*v, k = floor(|m|/n), |v| = n, satisfying
// |l| <= |m| and |l - m| <= n + |m|*d/n. Returns 0 when |m| < n.
LatticePoint nearest_multiple(std::span<const std::int64_t> m, std::int64_t n);

// Values of n -> evaluate(S, n) on the box [-B, B]^d, row-major with the
// first coordinate fastest. Shared by the profile and oscillation scans.
std::vector<double> materialize_box(const CocycleField& S, std::int64_t B);

} // namespace crl
