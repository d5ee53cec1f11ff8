#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "binio.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace crl {

namespace {

constexpr char kMagic[4] = {'C', 'O', 'R', '1'};

// Neighbor tables: nb[2*i][s] = s + e_i, nb[2*i+1][s] = s - e_i (periodic).
std::vector<std::vector<SiteIndex>> neighbor_tables(const TorusShape& shape) {
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    std::vector<std::vector<SiteIndex>> nb(2 * d, std::vector<SiteIndex>(n));
    for (std::uint32_t i = 0; i < d; ++i) {
        for (SiteIndex s = 0; s < n; ++s) {
            nb[2 * i][s] = shape.step(s, i, +1);
            nb[2 * i + 1][s] = shape.step(s, i, -1);
        }
    }
    return nb;
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

void project_mean_zero(std::vector<double>& v) {
    const double m = mean_of(v);
    for (double& x : v) x -= m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) acc += a[s] * b[s];
    return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// y = (-A) x, the positive semidefinite form, using prebuilt tables.
void apply_neg(const Environment& env, const std::vector<std::vector<SiteIndex>>& nb,
               const std::vector<double>& x, std::vector<double>& y) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    for (SiteIndex s = 0; s < n; ++s) y[s] = env.bar_c(s) * x[s];
    for (std::uint32_t i = 0; i < d; ++i) {
        const std::vector<double>& c = env.field(i);
        const std::vector<SiteIndex>& up = nb[2 * i];
        const std::vector<SiteIndex>& dn = nb[2 * i + 1];
        for (SiteIndex s = 0; s < n; ++s) {
            y[s] -= c[s] * x[up[s]] + c[dn[s]] * x[dn[s]];
        }
    }
}

// rhs for (-A) chi^(j) = c_j(n) - c_j(n - e_j).
std::vector<double> cell_rhs(const Environment& env, const std::vector<std::vector<SiteIndex>>& nb,
                             std::uint32_t j) {
    const SiteIndex n = env.shape().site_count();
    const std::vector<double>& c = env.field(j);
    const std::vector<SiteIndex>& dn = nb[2 * j + 1];
    std::vector<double> b(n);
    for (SiteIndex s = 0; s < n; ++s) b[s] = c[s] - c[dn[s]];
    return b;
}

} // namespace

bool CorrectorSolution::all_converged() const {
    for (std::uint8_t f : converged)
        if (!f) return false;
    return !converged.empty();
}

double CorrectorSolution::worst_residual() const {
    double w = 0.0;
    for (double r : residual_l2) w = std::max(w, r);
    return w;
}

std::vector<double> apply_operator(const Environment& env, const std::vector<double>& u,
                                   bool weighted) {
    const TorusShape& shape = env.shape();
    if (u.size() != shape.site_count())
        throw Error(ErrorCode::invalid_argument, "field size does not match lattice");
    auto nb = neighbor_tables(shape);
    std::vector<double> out(u.size());
    apply_neg(env, nb, u, out);
    if (weighted) {
        for (SiteIndex s = 0; s < u.size(); ++s) out[s] = -out[s] / env.bar_c(s);
    } else {
        for (double& x : out) x = -x;
    }
    return out;
}

CorrectorSolution solve_corrector(const Environment& env, const SolveOptions& opts) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    if (!(opts.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be positive");
    const std::uint64_t max_iter =
        opts.max_iter ? opts.max_iter : 20ull * shape.side() * d;

    auto nb = neighbor_tables(shape);

    CorrectorSolution sol;
    sol.shape = shape;
    sol.tol = opts.tol;
    sol.chi.assign(d, std::vector<double>(n, 0.0));
    sol.residual_l2.assign(d, 0.0);
    sol.iterations.assign(d, 0);
    sol.converged.assign(d, 0);

    std::vector<double> r(n), z(n), p(n), q(n);
    for (std::uint32_t j = 0; j < d; ++j) {
        std::vector<double>& x = sol.chi[j];
        const std::vector<double> b = cell_rhs(env, nb, j);
        const double bnorm = norm2(b);
        if (bnorm == 0.0) {
            sol.converged[j] = 1;
            continue;
        }
        // b telescopes to zero sum for any valid environment; checked defensively
        // because CG on the mean-zero subspace silently diverges otherwise.
        double bsum = 0.0;
        for (double v : b) bsum += v;
        if (std::abs(bsum) > 1e-8 * (1.0 + bnorm))
            throw Error(ErrorCode::invalid_argument, "right-hand side has nonzero sum");

        if (opts.init_seed) {
            for (SiteIndex s = 0; s < n; ++s)
                x[s] = rng::uniform(opts.init_seed, j + 1, s) - 0.5;
        }
        project_mean_zero(x);

        apply_neg(env, nb, x, q);
        for (SiteIndex s = 0; s < n; ++s) r[s] = b[s] - q[s];
        auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
            if (opts.jacobi) {
                for (SiteIndex s = 0; s < n; ++s) out[s] = in[s] / env.bar_c(s);
            } else {
                out = in;
            }
            project_mean_zero(out);
        };
        precondition(r, z);
        p = z;
        double rz = dot(r, z);

        std::uint64_t it = 0;
        while (it < max_iter && norm2(r) > opts.tol * bnorm) {
            apply_neg(env, nb, p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break; // lost positivity, stop and report
            const double alpha = rz / pq;
            for (SiteIndex s = 0; s < n; ++s) x[s] += alpha * p[s];
            for (SiteIndex s = 0; s < n; ++s) r[s] -= alpha * q[s];
            precondition(r, z);
            const double rz_next = dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (SiteIndex s = 0; s < n; ++s) p[s] = z[s] + beta * p[s];
            ++it;
        }
        project_mean_zero(x);

        // report the true residual, not the recurrence value
        apply_neg(env, nb, x, q);
        for (SiteIndex s = 0; s < n; ++s) r[s] = b[s] - q[s];
        const double rel = norm2(r) / bnorm;
        sol.residual_l2[j] = rel;
        sol.iterations[j] = it;
        sol.converged[j] = rel <= opts.tol ? 1 : 0;
    }
    return sol;
}

CorrectorSolution dense_oracle_solve(const Environment& env) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    if (n > 4096)
        throw Error(ErrorCode::guard, "dense oracle limited to 4096 sites");

    auto nb = neighbor_tables(shape);
    const std::size_t m = n + 1; // extra row/column: mean-zero constraint
    std::vector<double> M(m * m, 0.0);
    for (SiteIndex s = 0; s < n; ++s) {
        M[s * m + s] += env.bar_c(s);
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex up = nb[2 * i][s];
            const SiteIndex dn = nb[2 * i + 1][s];
            M[s * m + up] -= env.conductance(s, i);
            M[s * m + dn] -= env.conductance(dn, i);
        }
        M[s * m + n] = 1.0;
        M[n * m + s] = 1.0;
    }

    std::vector<std::vector<double>> rhs(d, std::vector<double>(m, 0.0));
    for (std::uint32_t j = 0; j < d; ++j) {
        const std::vector<double> b = cell_rhs(env, nb, j);
        std::copy(b.begin(), b.end(), rhs[j].begin());
    }

    // Gaussian elimination with partial pivoting, all right-hand sides at once.
    for (std::size_t k = 0; k < m; ++k) {
        std::size_t piv = k;
        double best = std::abs(M[k * m + k]);
        for (std::size_t r = k + 1; r < m; ++r) {
            const double v = std::abs(M[r * m + k]);
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (best == 0.0) throw Error(ErrorCode::no_convergence, "singular saddle system");
        if (piv != k) {
            for (std::size_t c = k; c < m; ++c) std::swap(M[k * m + c], M[piv * m + c]);
            for (std::uint32_t j = 0; j < d; ++j) std::swap(rhs[j][k], rhs[j][piv]);
        }
        for (std::size_t r = k + 1; r < m; ++r) {
            const double f = M[r * m + k] / M[k * m + k];
            if (f == 0.0) continue;
            for (std::size_t c = k; c < m; ++c) M[r * m + c] -= f * M[k * m + c];
            for (std::uint32_t j = 0; j < d; ++j) rhs[j][r] -= f * rhs[j][k];
        }
    }
    for (std::uint32_t j = 0; j < d; ++j) {
        for (std::size_t k = m; k-- > 0;) {
            double acc = rhs[j][k];
            for (std::size_t c = k + 1; c < m; ++c) acc -= M[k * m + c] * rhs[j][c];
            rhs[j][k] = acc / M[k * m + k];
        }
    }

    CorrectorSolution sol;
    sol.shape = shape;
    sol.tol = 0.0;
    sol.chi.assign(d, std::vector<double>(n));
    sol.residual_l2.assign(d, 0.0);
    sol.iterations.assign(d, 0);
    sol.converged.assign(d, 1);
    std::vector<double> q(n), r(n);
    for (std::uint32_t j = 0; j < d; ++j) {
        std::copy(rhs[j].begin(), rhs[j].begin() + static_cast<std::ptrdiff_t>(n),
                  sol.chi[j].begin());
        project_mean_zero(sol.chi[j]);
        const std::vector<double> b = cell_rhs(env, nb, j);
        const double bnorm = norm2(b);
        if (bnorm == 0.0) continue;
        apply_neg(env, nb, sol.chi[j], q);
        for (SiteIndex s = 0; s < n; ++s) r[s] = b[s] - q[s];
        sol.residual_l2[j] = norm2(r) / bnorm;
    }
    return sol;
}

CocycleField harmonic_cocycle(const CorrectorSolution& sol, std::span<const double> y) {
    const TorusShape& shape = sol.shape;
    const std::uint32_t d = shape.dim();
    if (y.size() != d) throw Error(ErrorCode::invalid_argument, "mean vector size mismatch");
    const SiteIndex n = shape.site_count();
    std::vector<std::vector<double>> inc(d, std::vector<double>(n));
    for (std::uint32_t i = 0; i < d; ++i) {
        for (SiteIndex s = 0; s < n; ++s) {
            const SiteIndex up = shape.step(s, i, +1);
            double v = y[i];
            for (std::uint32_t j = 0; j < d; ++j)
                v += y[j] * (sol.chi[j][up] - sol.chi[j][s]);
            inc[i][s] = v;
        }
    }
    return CocycleField(shape, std::move(inc), std::vector<double>(y.begin(), y.end()));
}

double harmonicity_residual(const Environment& env, const CocycleField& S) {
    const TorusShape& shape = env.shape();
    if (!(shape == S.shape()))
        throw Error(ErrorCode::invalid_argument, "environment and cocycle shapes differ");
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    double worst = 0.0;
    for (SiteIndex s = 0; s < n; ++s) {
        double flux = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex dn = shape.step(s, i, -1);
            flux += env.conductance(dn, i) * S.increment(dn, i) -
                    env.conductance(s, i) * S.increment(s, i);
        }
        worst = std::max(worst, std::abs(flux));
    }
    return worst;
}

EffectiveTensor effective_tensor(const Environment& env, const CorrectorSolution& sol) {
    const TorusShape& shape = env.shape();
    if (!(shape == sol.shape))
        throw Error(ErrorCode::invalid_argument, "environment and solution shapes differ");
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    EffectiveTensor t;
    t.d = d;
    t.L = shape.side();
    t.a_hom.assign(static_cast<std::size_t>(d) * d, 0.0);

    std::vector<double> grad(d); // d_i chi^(j) at a fixed site, j varying
    for (std::uint32_t i = 0; i < d; ++i) {
        const std::vector<double>& c = env.field(i);
        for (SiteIndex s = 0; s < n; ++s) {
            const SiteIndex up = shape.step(s, i, +1);
            for (std::uint32_t j = 0; j < d; ++j)
                grad[j] = (j == i ? 1.0 : 0.0) + sol.chi[j][up] - sol.chi[j][s];
            for (std::uint32_t j = 0; j < d; ++j)
                for (std::uint32_t k = 0; k < d; ++k)
                    t.a_hom[j * d + k] += c[s] * grad[j] * grad[k];
        }
    }
    const double vol = static_cast<double>(n);
    for (double& v : t.a_hom) v /= vol;
    return t;
}

std::vector<double> symmetric_eigenvalues(std::uint32_t d, std::span<const double> a) {
    if (a.size() != static_cast<std::size_t>(d) * d)
        throw Error(ErrorCode::invalid_argument, "matrix size mismatch");
    std::vector<double> m(a.begin(), a.end());
    auto off = [&]() {
        double acc = 0.0;
        for (std::uint32_t p = 0; p < d; ++p)
            for (std::uint32_t q = p + 1; q < d; ++q) acc += m[p * d + q] * m[p * d + q];
        return acc;
    };
    double scale = 0.0;
    for (double v : m) scale += v * v;
    const double stop = 1e-28 * std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 64 && off() > stop; ++sweep) {
        for (std::uint32_t p = 0; p < d; ++p) {
            for (std::uint32_t q = p + 1; q < d; ++q) {
                const double apq = m[p * d + q];
                if (apq == 0.0) continue;
                const double theta = (m[q * d + q] - m[p * d + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::uint32_t r = 0; r < d; ++r) {
                    const double mrp = m[r * d + p];
                    const double mrq = m[r * d + q];
                    m[r * d + p] = c * mrp - s * mrq;
                    m[r * d + q] = s * mrp + c * mrq;
                }
                for (std::uint32_t r = 0; r < d; ++r) {
                    const double mpr = m[p * d + r];
                    const double mqr = m[q * d + r];
                    m[p * d + r] = c * mpr - s * mqr;
                    m[q * d + r] = s * mpr + c * mqr;
                }
            }
        }
    }
    std::vector<double> eig(d);
    for (std::uint32_t p = 0; p < d; ++p) eig[p] = m[p * d + p];
    std::sort(eig.begin(), eig.end());
    return eig;
}

void CorrectorSolution::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open file for writing: " + path);
    binio::put_bytes(out, kMagic, 4);
    binio::put_u32(out, 1);
    binio::put_u32(out, shape.dim());
    binio::put_u32(out, shape.side());
    binio::put_f64(out, tol);
    binio::put_f64(out, 0.0);
    binio::put_u64(out, 0);
    binio::put_u64(out, 0);
    for (const std::vector<double>& field : chi)
        for (double v : field) binio::put_f64(out, v);
    for (std::uint32_t j = 0; j < shape.dim(); ++j) {
        binio::put_f64(out, residual_l2[j]);
        binio::put_u64(out, iterations[j]);
        char flag = converged[j] ? 1 : 0;
        binio::put_bytes(out, &flag, 1);
    }
    if (!out) throw Error(ErrorCode::io, "write failed: " + path);
}

CorrectorSolution CorrectorSolution::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open file for reading: " + path);
    char magic[4];
    binio::get_bytes(in, magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw Error(ErrorCode::format, "not a corrector file: " + path);
    const std::uint32_t version = binio::get_u32(in);
    if (version != 1) throw Error(ErrorCode::format, "unsupported corrector version");
    const std::uint32_t d = binio::get_u32(in);
    const std::uint32_t L = binio::get_u32(in);
    CorrectorSolution sol;
    sol.shape = TorusShape(d, L);
    sol.tol = binio::get_f64(in);
    binio::get_f64(in);
    binio::get_u64(in);
    binio::get_u64(in);
    const SiteIndex n = sol.shape.site_count();
    sol.chi.assign(d, std::vector<double>(n));
    for (std::uint32_t j = 0; j < d; ++j)
        for (SiteIndex s = 0; s < n; ++s) sol.chi[j][s] = binio::get_f64(in);
    sol.residual_l2.assign(d, 0.0);
    sol.iterations.assign(d, 0);
    sol.converged.assign(d, 0);
    for (std::uint32_t j = 0; j < d; ++j) {
        sol.residual_l2[j] = binio::get_f64(in);
        sol.iterations[j] = binio::get_u64(in);
        char flag = 0;
        binio::get_bytes(in, &flag, 1);
        sol.converged[j] = flag ? 1 : 0;
    }
    in.peek();
    if (!in.eof()) throw Error(ErrorCode::format, "trailing bytes in corrector file");
    return sol;
}

} // namespace crl
