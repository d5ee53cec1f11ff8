#include "walk.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace crl {

std::vector<double> transition_probabilities(const Environment& env,
                                             std::span<const std::int64_t> site) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    if (site.size() != d) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    const SiteIndex s = shape.index_of(site);
    const double bc = env.bar_c(s);
    std::vector<double> p(2 * d);
    for (std::uint32_t i = 0; i < d; ++i) {
        p[2 * i] = env.conductance(s, i) / bc;
        p[2 * i + 1] = env.conductance(shape.step(s, i, -1), i) / bc;
    }
    return p;
}

std::vector<double> apply_generator(const Environment& env, const std::vector<double>& u) {
    const TorusShape& shape = env.shape();
    if (u.size() != shape.site_count())
        throw Error(ErrorCode::invalid_argument, "field size does not match lattice");
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    std::vector<double> out(n);
    for (SiteIndex s = 0; s < n; ++s) {
        const double bc = env.bar_c(s);
        const double u0 = u[s];
        double acc = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex up = shape.step(s, i, +1);
            const SiteIndex dn = shape.step(s, i, -1);
            const double p_fwd = env.conductance(s, i) / bc;
            const double p_bwd = env.conductance(dn, i) / bc;
            acc += p_fwd * (u[up] - u0) + p_bwd * (u[dn] - u0);
        }
        out[s] = acc;
    }
    return out;
}

std::uint64_t walk_stream_seed(std::uint64_t seed, std::uint64_t walk_index) {
    return rng::draw(seed, 0x57414c4bull, walk_index); // stream tag "WALK"
}

namespace {

// Cumulative jump probabilities per site, move-major within a site:
// cum[s*2d + m] = P(move <= m at site s). Last entry is 1 up to rounding.
std::vector<double> cumulative_kernel(const Environment& env) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    std::vector<double> cum(static_cast<std::size_t>(n) * 2 * d);
    for (SiteIndex s = 0; s < n; ++s) {
        const double bc = env.bar_c(s);
        double acc = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            acc += env.conductance(s, i) / bc;
            cum[s * 2 * d + 2 * i] = acc;
            acc += env.conductance(shape.step(s, i, -1), i) / bc;
            cum[s * 2 * d + 2 * i + 1] = acc;
        }
    }
    return cum;
}

inline std::uint32_t pick_move(const double* cum_site, std::uint32_t n_moves, double u) {
    for (std::uint32_t m = 0; m + 1 < n_moves; ++m)
        if (u < cum_site[m]) return m;
    return n_moves - 1;
}

} // namespace

WalkTrajectory simulate(const Environment& env, const LatticePoint& start, std::uint64_t k,
                        std::uint64_t seed) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    if (start.size() != d) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");

    WalkTrajectory t;
    t.start = start;
    t.seed = seed;
    t.moves.reserve(k);
    t.positions.reserve(k + 1);
    t.positions.push_back(start);

    LatticePoint pos = start;
    SiteIndex s = shape.index_of(start);
    const std::uint32_t n_moves = 2 * d;
    std::vector<double> cum(n_moves);
    for (std::uint64_t step = 0; step < k; ++step) {
        const double bc = env.bar_c(s);
        double acc = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            acc += env.conductance(s, i) / bc;
            cum[2 * i] = acc;
            acc += env.conductance(shape.step(s, i, -1), i) / bc;
            cum[2 * i + 1] = acc;
        }
        const double u = rng::uniform(seed, 0, step);
        const std::uint32_t m = pick_move(cum.data(), n_moves, u);
        const std::uint32_t dir = m / 2;
        const int sign = (m % 2 == 0) ? +1 : -1;
        pos[dir] += sign;
        s = shape.step(s, dir, sign);
        t.moves.push_back(static_cast<std::uint8_t>(m));
        t.positions.push_back(pos);
    }
    return t;
}

double martingale_residual(const Environment& env, const CocycleField& S) {
    const TorusShape& shape = env.shape();
    if (!(shape == S.shape()))
        throw Error(ErrorCode::invalid_argument, "environment and cocycle shapes differ");
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    double worst = 0.0;
    for (SiteIndex s = 0; s < n; ++s) {
        const double bc = env.bar_c(s);
        double acc = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex dn = shape.step(s, i, -1);
            const double p_fwd = env.conductance(s, i) / bc;
            const double p_bwd = env.conductance(dn, i) / bc;
            acc += p_fwd * S.increment(s, i) - p_bwd * S.increment(dn, i);
        }
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

double detailed_balance_residual(const Environment& env) {
    const TorusShape& shape = env.shape();
    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    double worst = 0.0;
    for (SiteIndex s = 0; s < n; ++s) {
        const double bc = env.bar_c(s);
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex up = shape.step(s, i, +1);
            const double bc_up = env.bar_c(up);
            const double flow_fwd = bc * (env.conductance(s, i) / bc);
            const double flow_bwd = bc_up * (env.conductance(s, i) / bc_up);
            worst = std::max(worst, std::abs(flow_fwd - flow_bwd));
        }
    }
    return worst;
}

WalkEnsembleStats clt_ensemble(const Environment& env, const CocycleField& S, std::uint64_t k,
                               std::uint64_t n_walks, std::uint64_t seed,
                               std::vector<WalkRecord>* records) {
    const TorusShape& shape = env.shape();
    if (!(shape == S.shape()))
        throw Error(ErrorCode::invalid_argument, "environment and cocycle shapes differ");
    if (n_walks < 1) throw Error(ErrorCode::invalid_argument, "n_walks must be >= 1");
    const std::uint32_t d = shape.dim();
    const std::uint32_t n_moves = 2 * d;
    const std::vector<double> cum = cumulative_kernel(env);

    std::vector<double> ys(n_walks);
    std::vector<double> gaps(n_walks);
    if (records) records->assign(n_walks, WalkRecord{});

    const SiteIndex origin = 0; // index of the zero point
    par::parallel_for(n_walks, [&](std::uint64_t begin, std::uint64_t end) {
        LatticePoint pos(d);
        for (std::uint64_t w = begin; w < end; ++w) {
            const std::uint64_t sw = walk_stream_seed(seed, w);
            std::fill(pos.begin(), pos.end(), 0);
            SiteIndex s = origin;
            double y = 0.0;
            for (std::uint64_t step = 0; step < k; ++step) {
                const double u = rng::uniform(sw, 0, step);
                const std::uint32_t m = pick_move(&cum[s * n_moves], n_moves, u);
                const std::uint32_t dir = m / 2;
                if (m % 2 == 0) {
                    y += S.increment(s, dir);
                    pos[dir] += 1;
                    s = shape.step(s, dir, +1);
                } else {
                    s = shape.step(s, dir, -1);
                    y -= S.increment(s, dir);
                    pos[dir] -= 1;
                }
            }
            ys[w] = y;
            const std::int64_t norm = taxicab_norm(pos);
            gaps[w] = std::abs(y - static_cast<double>(pos[0])) /
                      std::max<double>(1.0, static_cast<double>(norm));
            if (records) {
                (*records)[w].y = y;
                (*records)[w].x = pos;
            }
        }
    });

    WalkEnsembleStats st;
    st.k = k;
    st.n_walks = n_walks;
    double sum = 0.0;
    for (double y : ys) sum += y;
    st.mean_Y = sum / static_cast<double>(n_walks);
    double m2 = 0.0, m4 = 0.0, worst_gap = 0.0;
    for (std::uint64_t w = 0; w < n_walks; ++w) {
        const double g = ys[w] - st.mean_Y;
        const double g2 = g * g;
        m2 += g2;
        m4 += g2 * g2;
        worst_gap = std::max(worst_gap, gaps[w]);
    }
    m2 /= static_cast<double>(n_walks);
    m4 /= static_cast<double>(n_walks);
    st.var_Y = m2;
    st.var_over_k = k ? m2 / static_cast<double>(k) : 0.0;
    st.max_sublinear_gap = worst_gap;
    st.normality_stat = m2 > 0.0 ? std::abs(m4 / (m2 * m2) - 3.0) : 0.0;
    return st;
}

} // namespace crl
