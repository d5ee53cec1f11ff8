#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "environment.hpp"

namespace crl {

struct SolveOptions {
    double tol = 1e-10;       // relative residual ||r||_2 / ||b||_2
    std::uint64_t max_iter = 0; // 0 -> 20 * L * d
    bool jacobi = true;
    // 0 starts CG from zero; otherwise from a seeded mean-zero random vector
    // (used to probe uniqueness of the finite-volume solution).
    std::uint64_t init_seed = 0;
};

// Mean-zero potentials chi^(j), one per coordinate direction, solving the
// periodic cell problem. Non-convergence is recorded, not thrown.
struct CorrectorSolution {
    TorusShape shape;
    std::vector<std::vector<double>> chi; // [d][L^d], each mean-zero
    std::vector<double> residual_l2;      // relative, per direction
    std::vector<std::uint64_t> iterations;
    std::vector<std::uint8_t> converged;
    double tol = 0.0;

    bool all_converged() const;
    double worst_residual() const;

    void save(const std::string& path) const;
    static CorrectorSolution load(const std::string& path);
};

// Divergence-form elliptic operator
//   (A u)(n) = sum_i [ c_i(n) (u(n+e_i) - u(n)) + c_i(n-e_i) (u(n-e_i) - u(n)) ].
// A is symmetric negative semidefinite with kernel the constants. With
// `weighted` the result is divided pointwise by bar_c, giving the walk
// generator L_omega.
std::vector<double> apply_operator(const Environment& env, const std::vector<double>& u,
                                   bool weighted = false);

// Conjugate gradient on the mean-zero subspace, optionally Jacobi
// preconditioned, for all d basis directions.
CorrectorSolution solve_corrector(const Environment& env, const SolveOptions& opts = {});

// Independent verification path: dense Gaussian elimination with an explicit
// mean-zero constraint row. Guarded to L^d <= 4096.
CorrectorSolution dense_oracle_solve(const Environment& env);

// The harmonic cocycle with prescribed mean y, reconstructed as
// f_i(n) = y_i + sum_j y_j (chi^(j)(n+e_i) - chi^(j)(n)).
CocycleField harmonic_cocycle(const CorrectorSolution& sol, std::span<const double> y);

// Node-law defect: max over sites of
// |sum_i [ c_i(n-e_i) f_i(n-e_i) - c_i(n) f_i(n) ]|.
double harmonicity_residual(const Environment& env, const CocycleField& S);

struct EffectiveTensor {
    std::uint32_t d = 0;
    std::uint32_t L = 0;
    std::vector<double> a_hom; // d*d, row-major

    double at(std::uint32_t j, std::uint32_t k) const { return a_hom[j * d + k]; }
};

// Homogenized tensor from the energy of corrected gradients:
// (A_hom)_{jk} = L^-d sum_n sum_i c_i(n) (delta_ij + d_i chi^(j)) (delta_ik + d_i chi^(k)).
EffectiveTensor effective_tensor(const Environment& env, const CorrectorSolution& sol);

// Eigenvalues of a symmetric d x d matrix (row-major), ascending. Cyclic
// Jacobi sweeps; meant for the small d used here.
std::vector<double> symmetric_eigenvalues(std::uint32_t d, std::span<const double> a);

} // namespace crl
