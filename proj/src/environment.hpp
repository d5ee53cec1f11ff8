#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lattice.hpp"

namespace crl {

enum class ModelKind : std::uint8_t {
    constant = 0,
    iid_uniform = 1,
    iid_two_point = 2,
    checkerboard_random = 3,
    smooth_correlated = 4,
    explicit_data = 5, // wrapped caller-supplied arrays, not a generator
};

// Conductance generator. Each model maps into the open ellipticity
// interval (a, b); continuous-range models are squeezed into
// [a + eps0, b - eps0] with eps0 = 1e-12 * (b - a).
struct GeneratorModel {
    ModelKind kind = ModelKind::constant;
    double value = 1.0;   // constant
    double p = 0.5;       // two-point: probability of `hi`
    double lo = 0.0;      // two-point values
    double hi = 0.0;
    std::uint32_t radius = 1; // smooth-correlated: taxicab smoothing radius

    static GeneratorModel constant(double c);
    static GeneratorModel iid_uniform();
    static GeneratorModel iid_two_point(double p, double lo, double hi);
    static GeneratorModel checkerboard_random(double lo, double hi);
    static GeneratorModel smooth_correlated(std::uint32_t radius);

    // Parse a compact spec such as "constant:1.0", "iid-uniform",
    // "iid-two-point:0.5:1:4", "checkerboard-random:1:4",
    // "smooth-correlated:2".
    static GeneratorModel parse(const std::string& spec);
    std::string to_string() const;
};

// A stationary elliptic conductance environment on the torus. Field i holds
// the conductance of the edge [n, n + e_i mod L] at every site n. Immutable
// after construction and safe to share across threads.
class Environment {
public:
    static Environment generate(const TorusShape& shape, const GeneratorModel& model,
                                double a, double b, std::uint64_t seed);

    // Wrap explicit per-edge arrays: field i has size L^d and holds the
    // conductance of [n, n+e_i]. All values must lie strictly inside (a, b).
    static Environment from_fields(const TorusShape& shape,
                                   std::vector<std::vector<double>> fields, double a,
                                   double b);

    const TorusShape& shape() const { return shape_; }
    double bound_lo() const { return a_; }
    double bound_hi() const { return b_; }
    std::uint64_t seed() const { return seed_; }
    const GeneratorModel& model() const { return model_; }

    double conductance(SiteIndex s, std::uint32_t dir) const { return fields_[dir][s]; }
    // Arbitrary point of Z^d, reduced mod L. dir is 0-based.
    double conductance_at(std::span<const std::int64_t> site, std::uint32_t dir) const;

    // bar_c(n) = sum_i (c_i(n) + c_i(n - e_i)); always in (2da, 2db).
    double bar_c(SiteIndex s) const;
    double bar_c_at(std::span<const std::int64_t> site) const;

    const std::vector<double>& field(std::uint32_t dir) const { return fields_[dir]; }

    void save(const std::string& path) const;
    static Environment load(const std::string& path);

private:
    Environment(TorusShape shape, GeneratorModel model, double a, double b,
                std::uint64_t seed, std::vector<std::vector<double>> fields);

    TorusShape shape_;
    GeneratorModel model_;
    double a_;
    double b_;
    std::uint64_t seed_;
    std::vector<std::vector<double>> fields_; // [d][L^d]
};

} // namespace crl
