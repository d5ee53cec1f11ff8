#include "cocycle.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "binio.hpp"

namespace crl {

PathSpec PathSpec::canonical(std::span<const std::int64_t> displacement) {
    PathSpec path;
    for (std::size_t i = 0; i < displacement.size(); ++i) {
        std::int32_t step = displacement[i] >= 0 ? static_cast<std::int32_t>(i + 1)
                                                 : -static_cast<std::int32_t>(i + 1);
        for (std::int64_t t = 0; t < std::llabs(displacement[i]); ++t)
            path.steps.push_back(step);
    }
    return path;
}

LatticePoint PathSpec::displacement(std::uint32_t d) const {
    LatticePoint disp(d, 0);
    for (std::int32_t s : steps) {
        std::uint32_t i = static_cast<std::uint32_t>(std::abs(s)) - 1;
        if (s == 0 || i >= d)
            throw Error(ErrorCode::invalid_argument, "path step direction out of range");
        disp[i] += s > 0 ? 1 : -1;
    }
    return disp;
}

CocycleField::CocycleField(const TorusShape& shape, std::vector<std::vector<double>> increments,
                           std::vector<double> mean)
    : shape_(shape), increments_(std::move(increments)), mean_(std::move(mean)) {
    if (increments_.size() != shape_.dim())
        throw Error(ErrorCode::invalid_argument, "expected one increment array per direction");
    for (const auto& f : increments_)
        if (f.size() != shape_.site_count())
            throw Error(ErrorCode::invalid_argument, "increment array size mismatch");
    if (mean_.empty())
        mean_ = mean_vector();
    else if (mean_.size() != shape_.dim())
        throw Error(ErrorCode::invalid_argument, "mean vector dimension mismatch");
}

double CocycleField::increment_at(std::span<const std::int64_t> site, std::uint32_t dir) const {
    if (dir >= shape_.dim())
        throw Error(ErrorCode::invalid_argument, "direction out of range 1..d");
    return increments_[dir][shape_.index_of(site)];
}

double CocycleField::evaluate(std::span<const std::int64_t> n) const {
    LatticePoint origin(shape_.dim(), 0);
    return evaluate(n, origin);
}

double CocycleField::evaluate(std::span<const std::int64_t> n,
                              std::span<const std::int64_t> base) const {
    if (n.size() != shape_.dim() || base.size() != shape_.dim())
        throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    // Canonical path, but without materializing the step list.
    LatticePoint pos(base.begin(), base.end());
    double acc = 0.0;
    for (std::uint32_t i = 0; i < shape_.dim(); ++i) {
        SiteIndex s = shape_.index_of(pos);
        const std::vector<double>& f = increments_[i];
        if (n[i] >= 0) {
            for (std::int64_t t = 0; t < n[i]; ++t) {
                acc += f[s];
                s = shape_.step(s, i, +1);
            }
        } else {
            for (std::int64_t t = 0; t < -n[i]; ++t) {
                s = shape_.step(s, i, -1);
                acc -= f[s];
            }
        }
        pos[i] += n[i];
    }
    return acc;
}

double CocycleField::evaluate(std::span<const std::int64_t> n,
                              std::span<const std::int64_t> base, const PathSpec& path) const {
    if (n.size() != shape_.dim() || base.size() != shape_.dim())
        throw Error(ErrorCode::invalid_argument, "point dimension mismatch");
    LatticePoint disp = path.displacement(shape_.dim());
    for (std::uint32_t i = 0; i < shape_.dim(); ++i)
        if (disp[i] != n[i])
            throw Error(ErrorCode::invalid_argument, "path endpoint does not match target");

    SiteIndex s = shape_.index_of(base);
    double acc = 0.0;
    for (std::int32_t step : path.steps) {
        std::uint32_t i = static_cast<std::uint32_t>(std::abs(step)) - 1;
        if (step > 0) {
            acc += increments_[i][s];
            s = shape_.step(s, i, +1);
        } else {
            s = shape_.step(s, i, -1);
            acc -= increments_[i][s];
        }
    }
    return acc;
}

double CocycleField::closedness_residual() const {
    const std::uint32_t d = shape_.dim();
    double worst = 0.0;
    for (SiteIndex s = 0; s < shape_.site_count(); ++s) {
        for (std::uint32_t i = 0; i < d; ++i) {
            SiteIndex si = shape_.step(s, i, +1);
            for (std::uint32_t j = i + 1; j < d; ++j) {
                SiteIndex sj = shape_.step(s, j, +1);
                double defect = increments_[i][s] + increments_[j][si]
                              - increments_[j][s] - increments_[i][sj];
                worst = std::max(worst, std::fabs(defect));
            }
        }
    }
    return worst;
}

std::vector<double> CocycleField::mean_vector() const {
    std::vector<double> mean(shape_.dim(), 0.0);
    for (std::uint32_t i = 0; i < shape_.dim(); ++i) {
        double acc = 0.0;
        for (double v : increments_[i]) acc += v;
        mean[i] = acc / static_cast<double>(shape_.site_count());
    }
    return mean;
}

double CocycleField::max_deviation() const {
    double worst = 0.0;
    for (std::uint32_t i = 0; i < shape_.dim(); ++i)
        for (double v : increments_[i])
            worst = std::max(worst, std::fabs(v - mean_[i]));
    return worst;
}

namespace {
constexpr char kCocycleMagic[4] = {'C', 'C', 'F', '1'};
constexpr std::uint32_t kCocycleVersion = 1;
} // namespace

void CocycleField::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    binio::put_bytes(os, kCocycleMagic, 4);
    binio::put_u32(os, kCocycleVersion);
    binio::put_u32(os, shape_.dim());
    binio::put_u32(os, shape_.side());
    binio::put_f64(os, 0.0); // bounds unused for cocycles, layout matches RCM1
    binio::put_f64(os, 0.0);
    binio::put_u64(os, 0);
    unsigned char model_block[8] = {0xff, 0, 0, 0, 0, 0, 0, 0};
    binio::put_bytes(os, model_block, 8);
    for (double y : mean_) binio::put_f64(os, y);
    for (const auto& f : increments_)
        for (double v : f) binio::put_f64(os, v);
    if (!os) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

CocycleField CocycleField::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");
    char magic[4];
    binio::get_bytes(is, magic, 4);
    if (std::memcmp(magic, kCocycleMagic, 4) != 0)
        throw Error(ErrorCode::format, "bad magic (expected CCF1)");
    std::uint32_t version = binio::get_u32(is);
    if (version != kCocycleVersion)
        throw Error(ErrorCode::format, "unsupported CCF version " + std::to_string(version));
    std::uint32_t d = binio::get_u32(is);
    std::uint32_t L = binio::get_u32(is);
    if (d < 1 || L < 2) throw Error(ErrorCode::format, "invalid torus shape in header");
    binio::get_f64(is);
    binio::get_f64(is);
    binio::get_u64(is);
    unsigned char model_block[8];
    binio::get_bytes(is, model_block, 8);

    TorusShape shape(d, L);
    std::uintmax_t expected = 48 + 8ull * d + static_cast<std::uintmax_t>(d) * shape.site_count() * 8;
    std::error_code ec;
    std::uintmax_t actual = std::filesystem::file_size(path, ec);
    if (ec || actual != expected)
        throw Error(ErrorCode::format, "file size mismatch (truncated or trailing data)");

    std::vector<double> mean(d);
    for (std::uint32_t i = 0; i < d; ++i) mean[i] = binio::get_f64(is);
    std::vector<std::vector<double>> increments(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        increments[i].resize(shape.site_count());
        for (SiteIndex s = 0; s < shape.site_count(); ++s)
            increments[i][s] = binio::get_f64(is);
    }
    return CocycleField(shape, std::move(increments), std::move(mean));
}

CocycleField coboundary(const TorusShape& shape, const std::vector<double>& g) {
    if (g.size() != shape.site_count())
        throw Error(ErrorCode::invalid_argument, "potential size mismatch");
    std::vector<std::vector<double>> increments(shape.dim());
    for (std::uint32_t i = 0; i < shape.dim(); ++i) {
        increments[i].resize(shape.site_count());
        for (SiteIndex s = 0; s < shape.site_count(); ++s)
            increments[i][s] = g[shape.step(s, i, +1)] - g[s];
    }
    return CocycleField(shape, std::move(increments), std::vector<double>(shape.dim(), 0.0));
}

CocycleField constant_cocycle(const TorusShape& shape, std::span<const double> y) {
    if (y.size() != shape.dim())
        throw Error(ErrorCode::invalid_argument, "mean vector dimension mismatch");
    std::vector<std::vector<double>> increments(shape.dim());
    for (std::uint32_t i = 0; i < shape.dim(); ++i)
        increments[i].assign(shape.site_count(), y[i]);
    return CocycleField(shape, std::move(increments),
                        std::vector<double>(y.begin(), y.end()));
}

} // namespace crl
