#include "lattice.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace crl {

std::int64_t taxicab_norm(std::span<const std::int64_t> n) {
    std::int64_t s = 0;
    for (std::int64_t c : n) s += std::llabs(c);
    return s;
}

TorusShape::TorusShape(std::uint32_t d, std::uint32_t L) : d_(d), L_(L) {
    if (d < 1) throw Error(ErrorCode::invalid_argument, "dimension must be >= 1");
    if (L < 2) throw Error(ErrorCode::invalid_argument, "side length must be >= 2");
    count_ = 1;
    strides_.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        strides_[i] = count_;
        if (count_ > std::numeric_limits<SiteIndex>::max() / L)
            throw Error(ErrorCode::invalid_argument, "site count overflow");
        count_ *= L;
    }
}

SiteIndex TorusShape::index_of(std::span<const std::int64_t> coords) const {
    if (coords.size() != d_)
        throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    SiteIndex s = 0;
    for (std::uint32_t i = 0; i < d_; ++i)
        s += static_cast<SiteIndex>(wrap(coords[i])) * strides_[i];
    return s;
}

LatticePoint TorusShape::coords_of(SiteIndex s) const {
    LatticePoint p(d_);
    for (std::uint32_t i = 0; i < d_; ++i) {
        p[i] = static_cast<std::int64_t>(s % L_);
        s /= L_;
    }
    return p;
}

std::uint64_t ball_cardinality(std::uint32_t d, std::int64_t R) {
    if (R < 0) return 0;
    // c[r] = |B_r| in the current dimension, built up one dimension at a time.
    std::vector<std::uint64_t> c(static_cast<std::size_t>(R) + 1, 1); // d=0: only the origin
    for (std::uint32_t j = 1; j <= d; ++j) {
        std::vector<std::uint64_t> next(c.size());
        for (std::int64_t r = 0; r <= R; ++r) {
            std::uint64_t total = c[static_cast<std::size_t>(r)]; // t = 0
            for (std::int64_t t = 1; t <= r; ++t)
                total += 2 * c[static_cast<std::size_t>(r - t)];
            next[static_cast<std::size_t>(r)] = total;
        }
        c.swap(next);
    }
    return c[static_cast<std::size_t>(R)];
}

namespace {

void enumerate_ball(std::uint32_t dim, std::int64_t budget, LatticePoint& point,
                    std::int64_t norm_so_far,
                    const std::function<void(const LatticePoint&, std::int64_t)>& visit) {
    if (dim == 0) {
        visit(point, norm_so_far);
        return;
    }
    std::uint32_t i = dim - 1;
    for (std::int64_t t = -budget; t <= budget; ++t) {
        point[i] = t;
        enumerate_ball(i, budget - std::llabs(t), point, norm_so_far + std::llabs(t), visit);
    }
    point[i] = 0;
}

} // namespace

void for_each_ball_point(std::uint32_t d, std::int64_t R,
                         const std::function<void(const LatticePoint&, std::int64_t)>& visit) {
    if (R < 0) return;
    LatticePoint point(d, 0);
    enumerate_ball(d, R, point, 0, visit);
}

namespace {

void enumerate_shell(std::uint32_t dim, std::int64_t budget, LatticePoint& point,
                     const std::function<void(const LatticePoint&)>& visit) {
    if (dim == 1) {
        point[0] = budget;
        visit(point);
        if (budget != 0) {
            point[0] = -budget;
            visit(point);
        }
        point[0] = 0;
        return;
    }
    std::uint32_t i = dim - 1;
    for (std::int64_t t = -budget; t <= budget; ++t) {
        point[i] = t;
        enumerate_shell(i, budget - std::llabs(t), point, visit);
    }
    point[i] = 0;
}

} // namespace

void for_each_shell_point(std::uint32_t d, std::int64_t R,
                          const std::function<void(const LatticePoint&)>& visit) {
    if (R < 0) return;
    LatticePoint point(d, 0);
    enumerate_shell(d, R, point, visit);
}

} // namespace crl
