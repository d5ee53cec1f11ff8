#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace crl {

using SiteIndex = std::size_t;
using LatticePoint = std::vector<std::int64_t>;

// Taxicab norm |n| = sum_i |n_i|.
std::int64_t taxicab_norm(std::span<const std::int64_t> n);

// The periodized lattice Z_L^d. Sites are linearized with the first
// coordinate fastest: s = sum_j n_j * L^(j-1).
class TorusShape {
public:
    TorusShape() : d_(0), L_(0), count_(0) {} // empty placeholder, not usable
    TorusShape(std::uint32_t d, std::uint32_t L);

    std::uint32_t dim() const { return d_; }
    std::uint32_t side() const { return L_; }
    SiteIndex site_count() const { return count_; }
    SiteIndex stride(std::uint32_t dir) const { return strides_[dir]; }

    // Reduce one coordinate into {0, ..., L-1}.
    std::int64_t wrap(std::int64_t c) const {
        std::int64_t L = static_cast<std::int64_t>(L_);
        std::int64_t r = c % L;
        return r < 0 ? r + L : r;
    }

    // Site index of an arbitrary point of Z^d (coordinates reduced mod L).
    SiteIndex index_of(std::span<const std::int64_t> coords) const;

    LatticePoint coords_of(SiteIndex s) const;

    // Index of s shifted by sign * e_dir, with periodic wrap. dir is 0-based.
    SiteIndex step(SiteIndex s, std::uint32_t dir, int sign) const {
        SiteIndex st = strides_[dir];
        std::uint32_t c = static_cast<std::uint32_t>((s / st) % L_);
        if (sign > 0)
            return c == L_ - 1 ? s - st * (L_ - 1) : s + st;
        return c == 0 ? s + st * (L_ - 1) : s - st;
    }

    bool operator==(const TorusShape& o) const { return d_ == o.d_ && L_ == o.L_; }

private:
    std::uint32_t d_;
    std::uint32_t L_;
    SiteIndex count_;
    std::vector<SiteIndex> strides_;
};

// Number of lattice points with |n| <= R in Z^d.
std::uint64_t ball_cardinality(std::uint32_t d, std::int64_t R);

// Visit every point of the taxicab ball |n| <= R in Z^d. The visitor gets
// the point and its norm. Enumeration order is deterministic
// (lexicographic, last coordinate outermost).
void for_each_ball_point(std::uint32_t d, std::int64_t R,
                         const std::function<void(const LatticePoint&, std::int64_t)>& visit);

// Visit only the shell |n| == R.
void for_each_shell_point(std::uint32_t d, std::int64_t R,
                          const std::function<void(const LatticePoint&)>& visit);

} // namespace crl
