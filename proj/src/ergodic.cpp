#include "ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"
#include "lattice.hpp"

namespace crl {

namespace {

std::int64_t torus_radius_cap(const TorusShape& shape) {
    return static_cast<std::int64_t>(shape.side() / 2) - 1;
}

// Whole-ball enumeration is affordable only up to these radii; beyond them
// the profile falls back to the boundary shell.
bool exact_ball_feasible(std::uint32_t d, std::int64_t R) {
    if (d == 1) return true;
    if (d == 2) return R <= 128;
    if (d == 3) return R <= 24;
    return ball_cardinality(d, R) <= 700000;
}

struct Box {
    std::int64_t B = 0;   // covers [-B, B]^d
    std::int64_t W = 0;   // side 2B+1
    std::uint32_t d = 0;
    std::vector<double> values;      // row-major, first coordinate fastest
    std::vector<SiteIndex> torus;    // torus site per box point
    std::vector<std::int64_t> norms; // taxicab norm per box point

    std::size_t count() const { return values.size(); }
};

// Torus indices and norms for every point of [-B, B]^d, via an odometer walk.
void fill_box_geometry(const TorusShape& shape, Box& box) {
    const std::uint32_t d = shape.dim();
    const std::int64_t B = box.B;
    const std::int64_t W = box.W;
    std::size_t count = 1;
    for (std::uint32_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(W);
    box.d = d;
    box.torus.resize(count);
    box.norms.resize(count);
    LatticePoint c(d, -B);
    for (std::size_t idx = 0;; ++idx) {
        box.torus[idx] = shape.index_of(c);
        box.norms[idx] = taxicab_norm(c);
        std::uint32_t j = 0;
        while (j < d && c[j] == B) {
            c[j] = -B;
            ++j;
        }
        if (j == d) break;
        ++c[j];
    }
}

// S evaluated across the box by one canonical evaluation at the corner plus
// a single edge increment per remaining point.
void fill_box_cocycle(const CocycleField& S, Box& box) {
    const TorusShape& shape = S.shape();
    const std::uint32_t d = shape.dim();
    const std::int64_t B = box.B;
    const std::int64_t W = box.W;
    box.values.resize(box.torus.size());

    std::vector<std::size_t> stride(d);
    stride[0] = 1;
    for (std::uint32_t j = 1; j < d; ++j) stride[j] = stride[j - 1] * static_cast<std::size_t>(W);

    LatticePoint corner(d, -B);
    box.values[0] = S.evaluate(corner);

    LatticePoint c(d, -B);
    for (std::size_t idx = 1; idx < box.values.size(); ++idx) {
        std::uint32_t j = 0;
        while (c[j] == B) {
            c[j] = -B;
            ++j;
        }
        ++c[j];
        // predecessor along the lowest coordinate that is above -B
        std::uint32_t i = 0;
        while (c[i] == -B) ++i;
        const std::size_t prev = idx - stride[i];
        box.values[idx] = box.values[prev] + S.increment(box.torus[prev], i);
    }
}

Box make_cocycle_box(const CocycleField& S, std::int64_t B) {
    Box box;
    box.B = B;
    box.W = 2 * B + 1;
    fill_box_geometry(S.shape(), box);
    fill_box_cocycle(S, box);
    return box;
}

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double quality = 0.0;
};

FitResult log_log_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    FitResult fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    if (syy == 0.0) {
        fit.quality = 1.0;
    } else {
        double ssres = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ssres += r * r;
        }
        fit.quality = std::clamp(1.0 - ssres / syy, 0.0, 1.0);
    }
    return fit;
}

HolderEstimate holder_core(const Environment& env, const Box& box, std::int64_t R) {
    const std::uint32_t d = env.shape().dim();

    std::vector<std::size_t> stride(d);
    stride[0] = 1;
    for (std::uint32_t j = 1; j < d; ++j)
        stride[j] = stride[j - 1] * static_cast<std::size_t>(box.W);

    // node-law residual on |n| <= 2R; every neighbor lies inside the box
    double worst = 0.0;
    for (std::size_t idx = 0; idx < box.count(); ++idx) {
        if (box.norms[idx] > 2 * R) continue;
        const SiteIndex s = box.torus[idx];
        const double u0 = box.values[idx];
        double flux = 0.0;
        for (std::uint32_t i = 0; i < d; ++i) {
            const SiteIndex dn = env.shape().step(s, i, -1);
            flux += env.conductance(s, i) * (box.values[idx + stride[i]] - u0) +
                    env.conductance(dn, i) * (box.values[idx - stride[i]] - u0);
        }
        worst = std::max(worst, std::abs(flux));
    }
    if (worst > 1e-6)
        throw Error(ErrorCode::invalid_argument, "field is not harmonic on the sample ball");

    // per-shell extrema for |n| <= R, then prefix to ball oscillations
    const std::size_t nr = static_cast<std::size_t>(R) + 1;
    std::vector<double> shell_max(nr, -std::numeric_limits<double>::infinity());
    std::vector<double> shell_min(nr, std::numeric_limits<double>::infinity());
    for (std::size_t idx = 0; idx < box.count(); ++idx) {
        const std::int64_t r = box.norms[idx];
        if (r > R) continue;
        shell_max[static_cast<std::size_t>(r)] =
            std::max(shell_max[static_cast<std::size_t>(r)], box.values[idx]);
        shell_min[static_cast<std::size_t>(r)] =
            std::min(shell_min[static_cast<std::size_t>(r)], box.values[idx]);
    }
    for (std::size_t r = 1; r < nr; ++r) {
        shell_max[r] = std::max(shell_max[r], shell_max[r - 1]);
        shell_min[r] = std::min(shell_min[r], shell_min[r - 1]);
    }

    HolderEstimate est;
    est.R = R;
    std::vector<std::int64_t> radii = {R / 8, R / 4, R / 2, R};
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    for (std::int64_t r : radii) {
        est.fit_radii.push_back(r);
        est.osc.push_back(shell_max[static_cast<std::size_t>(r)] -
                          shell_min[static_cast<std::size_t>(r)]);
    }

    if (est.osc.back() == 0.0) {
        est.degenerate_constant = true;
        return est;
    }
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < est.osc.size(); ++i) {
        if (est.osc[i] > 0.0) {
            xs.push_back(std::log(static_cast<double>(est.fit_radii[i])));
            ys.push_back(std::log(est.osc[i]));
        }
    }
    if (xs.size() < 2) {
        est.degenerate_constant = true;
        return est;
    }
    const FitResult fit = log_log_fit(xs, ys);
    est.alpha_hat = fit.slope;
    est.C_hat = std::exp(fit.intercept);
    est.fit_quality = fit.quality;
    return est;
}

} // namespace

std::vector<double> materialize_box(const CocycleField& S, std::int64_t B) {
    if (B < 0) throw Error(ErrorCode::invalid_argument, "box radius must be nonnegative");
    Box box = make_cocycle_box(S, B);
    return std::move(box.values);
}

SublinearityProfile sublinearity_profile(const CocycleField& S, std::span<const double> y,
                                         std::span<const std::int64_t> radii) {
    const TorusShape& shape = S.shape();
    const std::uint32_t d = shape.dim();
    if (y.size() != d) throw Error(ErrorCode::invalid_argument, "mean vector dimension mismatch");
    if (radii.empty()) throw Error(ErrorCode::invalid_argument, "empty radius list");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 1 || (i > 0 && radii[i] <= radii[i - 1]))
            throw Error(ErrorCode::invalid_argument, "radii must be strictly increasing and >= 1");
    }
    if (radii.back() > torus_radius_cap(shape))
        throw Error(ErrorCode::guard, "radius too large for torus");

    SublinearityProfile prof;
    prof.radii.assign(radii.begin(), radii.end());
    prof.values.assign(radii.size(), 0.0);
    prof.exact.assign(radii.size(), 0);

    std::int64_t B = 0; // largest radius still enumerated exactly
    for (std::int64_t R : radii)
        if (exact_ball_feasible(d, R)) B = std::max(B, R);

    std::vector<double> prefix; // max over the ball, per radius 0..B
    if (B > 0) {
        Box box = make_cocycle_box(S, B);
        prefix.assign(static_cast<std::size_t>(B) + 1, 0.0);
        std::vector<std::int64_t> c(d);
        for (std::size_t idx = 0; idx < box.count(); ++idx) {
            const std::int64_t r = box.norms[idx];
            if (r > B) continue;
            // reconstruct coordinates from the row-major index
            std::size_t rem = idx;
            double lin = 0.0;
            for (std::uint32_t j = 0; j < d; ++j) {
                c[j] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(box.W)) - B;
                rem /= static_cast<std::size_t>(box.W);
                lin += static_cast<double>(c[j]) * y[j];
            }
            const double g = std::abs(box.values[idx] - lin);
            prefix[static_cast<std::size_t>(r)] = std::max(prefix[static_cast<std::size_t>(r)], g);
        }
        for (std::size_t r = 1; r < prefix.size(); ++r)
            prefix[r] = std::max(prefix[r], prefix[r - 1]);
    }

    for (std::size_t i = 0; i < prof.radii.size(); ++i) {
        const std::int64_t R = prof.radii[i];
        if (R <= B) {
            prof.values[i] = prefix[static_cast<std::size_t>(R)] / static_cast<double>(R);
            prof.exact[i] = 1;
        } else {
            double worst = 0.0;
            for_each_shell_point(d, R, [&](const LatticePoint& n) {
                double lin = 0.0;
                for (std::uint32_t j = 0; j < d; ++j)
                    lin += static_cast<double>(n[j]) * y[j];
                worst = std::max(worst, std::abs(S.evaluate(n) - lin));
            });
            prof.values[i] = worst / static_cast<double>(R);
            prof.exact[i] = 0;
        }
    }
    return prof;
}

double directional_average(const CocycleField& S, std::span<const std::int64_t> n,
                           std::int64_t k) {
    const std::uint32_t d = S.shape().dim();
    if (n.size() != d) throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    if (taxicab_norm(n) == 0) throw Error(ErrorCode::invalid_argument, "direction must be nonzero");
    if (k < 1) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    LatticePoint target(d);
    for (std::uint32_t j = 0; j < d; ++j) target[j] = k * n[j];
    return S.evaluate(target) / (static_cast<double>(k) * static_cast<double>(taxicab_norm(n)));
}

PoincareResult poincare_check(const TorusShape& shape, const std::vector<double>& u,
                              std::int64_t R) {
    if (u.size() != shape.site_count())
        throw Error(ErrorCode::invalid_argument, "field size does not match lattice");
    if (R < 0) throw Error(ErrorCode::invalid_argument, "radius must be nonnegative");
    if (R + 1 > torus_radius_cap(shape))
        throw Error(ErrorCode::guard, "radius too large for torus");
    const std::uint32_t d = shape.dim();

    double sum = 0.0;
    std::uint64_t count = 0;
    for_each_ball_point(d, R, [&](const LatticePoint& n, std::int64_t) {
        sum += u[shape.index_of(n)];
        ++count;
    });
    const double mean = sum / static_cast<double>(count);

    PoincareResult res;
    for_each_ball_point(d, R, [&](const LatticePoint& n, std::int64_t) {
        const double g = u[shape.index_of(n)] - mean;
        res.lhs += g * g;
    });

    double grad = 0.0;
    LatticePoint nb(d);
    for_each_ball_point(d, R + 1, [&](const LatticePoint& n, std::int64_t) {
        const double u0 = u[shape.index_of(n)];
        for (std::uint32_t i = 0; i < d; ++i) {
            nb.assign(n.begin(), n.end());
            nb[i] = n[i] + 1;
            const double fwd = u[shape.index_of(nb)] - u0;
            nb[i] = n[i] - 1;
            const double bwd = u[shape.index_of(nb)] - u0;
            grad += fwd * fwd + bwd * bwd;
        }
    });
    res.rhs = 4.0 * static_cast<double>(R) * static_cast<double>(R) * grad;
    res.holds = res.lhs <= res.rhs;
    return res;
}

HolderEstimate holder_exponent(const Environment& env,
                               const std::function<double(std::span<const std::int64_t>)>& u,
                               std::int64_t R) {
    const TorusShape& shape = env.shape();
    if (R < 8) throw Error(ErrorCode::invalid_argument, "R must be at least 8 for the fit grid");
    if (2 * R + 1 > torus_radius_cap(shape))
        throw Error(ErrorCode::guard, "radius too large for torus");
    Box box;
    box.B = 2 * R + 1;
    box.W = 2 * box.B + 1;
    fill_box_geometry(shape, box);
    box.values.resize(box.torus.size());
    const std::uint32_t d = shape.dim();
    LatticePoint c(d, -box.B);
    for (std::size_t idx = 0;; ++idx) {
        box.values[idx] = u(c);
        std::uint32_t j = 0;
        while (j < d && c[j] == box.B) {
            c[j] = -box.B;
            ++j;
        }
        if (j == d) break;
        ++c[j];
    }
    return holder_core(env, box, R);
}

HolderEstimate holder_exponent(const Environment& env, const CocycleField& S, std::int64_t R) {
    const TorusShape& shape = env.shape();
    if (!(shape == S.shape()))
        throw Error(ErrorCode::invalid_argument, "environment and cocycle shapes differ");
    if (R < 8) throw Error(ErrorCode::invalid_argument, "R must be at least 8 for the fit grid");
    if (2 * R + 1 > torus_radius_cap(shape))
        throw Error(ErrorCode::guard, "radius too large for torus");
    Box box = make_cocycle_box(S, 2 * R + 1);
    return holder_core(env, box, R);
}

double oscillation_constant_stat(const Environment& env, const CocycleField& S, std::int64_t R) {
    const TorusShape& shape = env.shape();
    if (!(shape == S.shape()))
        throw Error(ErrorCode::invalid_argument, "environment and cocycle shapes differ");
    if (R < 1) throw Error(ErrorCode::invalid_argument, "radius must be >= 1");
    if (4 * R + 1 > torus_radius_cap(shape))
        throw Error(ErrorCode::guard, "radius too large for torus");
    const std::uint32_t d = shape.dim();
    double sum = 0.0;
    for_each_ball_point(d, 4 * R + 1, [&](const LatticePoint& n, std::int64_t) {
        const SiteIndex s = shape.index_of(n);
        for (std::uint32_t i = 0; i < d; ++i) {
            const double f0 = S.increment(s, i);
            const double f1 = S.increment(shape.step(s, i, -1), i);
            sum += f0 * f0 + f1 * f1;
        }
    });
    const double R2 = static_cast<double>(R) * static_cast<double>(R);
    const double vol = static_cast<double>(ball_cardinality(d, 4 * R));
    const double cprime = std::sqrt(16.0 * R2 / vol * 4.0 * sum);
    return cprime / static_cast<double>(R);
}

LatticePoint nearest_multiple(std::span<const std::int64_t> m, std::int64_t n) {
    if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
    const std::size_t d = m.size();
    if (d == 0) throw Error(ErrorCode::invalid_argument, "empty vector");
    const std::int64_t norm = taxicab_norm(m);
    LatticePoint l(d, 0);
    if (norm < n) return l;

    const std::int64_t k = norm / n;
    std::vector<std::int64_t> floor_part(d);
    std::vector<std::int64_t> remainder(d);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const __int128 num = static_cast<__int128>(std::abs(m[i])) * n;
        floor_part[i] = static_cast<std::int64_t>(num / norm);
        remainder[i] = static_cast<std::int64_t>(num % norm);
        assigned += floor_part[i];
    }
    const std::int64_t K = n - assigned; // in [0, d-1]
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return remainder[a] > remainder[b];
    });
    for (std::int64_t t = 0; t < K; ++t) ++floor_part[order[static_cast<std::size_t>(t)]];

    for (std::size_t i = 0; i < d; ++i) {
        const std::int64_t sign = m[i] < 0 ? -1 : 1;
        l[i] = sign * k * floor_part[i];
    }
    return l;
}

} // namespace crl
