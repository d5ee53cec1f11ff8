#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lattice.hpp"

namespace crl {

// An explicit lattice path: signed unit steps, encoded as +(i+1) / -(i+1)
// for a step along +e_i / -e_i (i 0-based). The empty path is allowed.
struct PathSpec {
    std::vector<std::int32_t> steps;

    // Coordinate-by-coordinate ascending: adjust coordinate 1 fully,
    // then coordinate 2, etc.
    static PathSpec canonical(std::span<const std::int64_t> displacement);

    LatticePoint displacement(std::uint32_t d) const;
};

// A degree-1 cocycle stored by its edge increments: array i holds
// f_i(n) = S_{n+e_i} - S_n across the edge [n, n + e_i]. S_n is always
// recomputed by path summation, never tabulated. Immutable; all
// operations are pure.
class CocycleField {
public:
    // `mean` is the stored target mean vector y; pass empty to take the
    // spatial averages of the increment arrays.
    CocycleField(const TorusShape& shape, std::vector<std::vector<double>> increments,
                 std::vector<double> mean = {});

    const TorusShape& shape() const { return shape_; }
    std::uint32_t dim() const { return shape_.dim(); }
    const std::vector<double>& target_mean() const { return mean_; }
    const std::vector<double>& increments(std::uint32_t dir) const { return increments_[dir]; }
    double increment(SiteIndex s, std::uint32_t dir) const { return increments_[dir][s]; }
    double increment_at(std::span<const std::int64_t> site, std::uint32_t dir) const;

    // S at base + n, summed along the canonical path starting from `base`
    // (origin when omitted). Walks on Z^d; increments are read mod L.
    double evaluate(std::span<const std::int64_t> n) const;
    double evaluate(std::span<const std::int64_t> n, std::span<const std::int64_t> base) const;
    // Same along an explicit path; the path must connect base to base + n.
    double evaluate(std::span<const std::int64_t> n, std::span<const std::int64_t> base,
                    const PathSpec& path) const;

    // max over n, i<j of |f_i(n) + f_j(n+e_i) - f_j(n) - f_i(n+e_j)|.
    double closedness_residual() const;

    // Component i = spatial average of increment array i.
    std::vector<double> mean_vector() const;

    // max over n, i of |f_i(n) - y_i|.
    double max_deviation() const;

    void save(const std::string& path) const;
    static CocycleField load(const std::string& path);

private:
    TorusShape shape_;
    std::vector<std::vector<double>> increments_; // [d][L^d]
    std::vector<double> mean_;                    // y
};

// The coboundary of a site potential g: f_i(n) = g(n + e_i) - g(n).
// Closed with mean zero by periodic telescoping.
CocycleField coboundary(const TorusShape& shape, const std::vector<double>& g);

// The translation-invariant cocycle S_n = <n, y>.
CocycleField constant_cocycle(const TorusShape& shape, std::span<const double> y);

} // namespace crl
