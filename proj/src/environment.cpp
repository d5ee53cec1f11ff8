#include "environment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "binio.hpp"
#include "rng.hpp"

namespace crl {

GeneratorModel GeneratorModel::constant(double c) {
    GeneratorModel m;
    m.kind = ModelKind::constant;
    m.value = c;
    return m;
}

GeneratorModel GeneratorModel::iid_uniform() {
    GeneratorModel m;
    m.kind = ModelKind::iid_uniform;
    return m;
}

GeneratorModel GeneratorModel::iid_two_point(double p, double lo, double hi) {
    GeneratorModel m;
    m.kind = ModelKind::iid_two_point;
    m.p = p;
    m.lo = lo;
    m.hi = hi;
    return m;
}

GeneratorModel GeneratorModel::checkerboard_random(double lo, double hi) {
    GeneratorModel m;
    m.kind = ModelKind::checkerboard_random;
    m.p = 0.5;
    m.lo = lo;
    m.hi = hi;
    return m;
}

GeneratorModel GeneratorModel::smooth_correlated(std::uint32_t radius) {
    GeneratorModel m;
    m.kind = ModelKind::smooth_correlated;
    m.radius = radius;
    return m;
}

namespace {

std::vector<std::string> split_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    return parts;
}

double parse_real(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::invalid_argument,
                    std::string("cannot parse ") + what + ": '" + s + "'");
    }
}

} // namespace

GeneratorModel GeneratorModel::parse(const std::string& spec) {
    auto parts = split_spec(spec);
    if (parts.empty()) throw Error(ErrorCode::invalid_argument, "empty model spec");
    const std::string& name = parts[0];
    auto expect = [&](std::size_t n) {
        if (parts.size() != n)
            throw Error(ErrorCode::invalid_argument,
                        "model '" + name + "' expects " + std::to_string(n - 1) +
                            " parameter(s), got " + std::to_string(parts.size() - 1));
    };
    if (name == "constant") {
        expect(2);
        return constant(parse_real(parts[1], "constant value"));
    }
    if (name == "iid-uniform") {
        expect(1);
        return iid_uniform();
    }
    if (name == "iid-two-point") {
        expect(4);
        return iid_two_point(parse_real(parts[1], "probability"),
                             parse_real(parts[2], "low value"),
                             parse_real(parts[3], "high value"));
    }
    if (name == "checkerboard-random") {
        expect(3);
        return checkerboard_random(parse_real(parts[1], "low value"),
                                   parse_real(parts[2], "high value"));
    }
    if (name == "smooth-correlated") {
        expect(2);
        double r = parse_real(parts[1], "radius");
        if (r < 0 || r != std::floor(r))
            throw Error(ErrorCode::invalid_argument, "smoothing radius must be a nonnegative integer");
        return smooth_correlated(static_cast<std::uint32_t>(r));
    }
    throw Error(ErrorCode::invalid_argument, "unknown model '" + name + "'");
}

std::string GeneratorModel::to_string() const {
    std::ostringstream os;
    switch (kind) {
    case ModelKind::constant: os << "constant:" << value; break;
    case ModelKind::iid_uniform: os << "iid-uniform"; break;
    case ModelKind::iid_two_point: os << "iid-two-point:" << p << ":" << lo << ":" << hi; break;
    case ModelKind::checkerboard_random: os << "checkerboard-random:" << lo << ":" << hi; break;
    case ModelKind::smooth_correlated: os << "smooth-correlated:" << radius; break;
    case ModelKind::explicit_data: os << "explicit"; break;
    }
    return os.str();
}

namespace {

void validate_model_range(const GeneratorModel& m, double a, double b) {
    auto inside = [&](double v, const char* what) {
        if (!(a < v && v < b))
            throw Error(ErrorCode::invalid_argument,
                        std::string(what) + " lies outside the ellipticity interval (a, b)");
    };
    switch (m.kind) {
    case ModelKind::constant:
        inside(m.value, "constant conductance");
        break;
    case ModelKind::iid_two_point:
        if (!(m.p >= 0.0 && m.p <= 1.0))
            throw Error(ErrorCode::invalid_argument, "two-point probability must be in [0, 1]");
        inside(m.lo, "two-point low value");
        inside(m.hi, "two-point high value");
        break;
    case ModelKind::checkerboard_random:
        inside(m.lo, "two-point low value");
        inside(m.hi, "two-point high value");
        break;
    case ModelKind::iid_uniform:
    case ModelKind::smooth_correlated:
        break; // squeezed into [a + eps0, b - eps0] below
    case ModelKind::explicit_data:
        throw Error(ErrorCode::invalid_argument, "explicit-data environments cannot be generated");
    }
}

} // namespace

Environment::Environment(TorusShape shape, GeneratorModel model, double a, double b,
                         std::uint64_t seed, std::vector<std::vector<double>> fields)
    : shape_(shape), model_(model), a_(a), b_(b), seed_(seed), fields_(std::move(fields)) {}

Environment Environment::generate(const TorusShape& shape, const GeneratorModel& model,
                                  double a, double b, std::uint64_t seed) {
    if (!(a > 0.0)) throw Error(ErrorCode::invalid_argument, "ellipticity bound a must be > 0");
    if (!(a < b)) throw Error(ErrorCode::invalid_argument, "ellipticity bounds require a < b");
    validate_model_range(model, a, b);

    const std::uint32_t d = shape.dim();
    const SiteIndex n = shape.site_count();
    const double eps0 = 1e-12 * (b - a);
    const double lo = a + eps0;
    const double span = (b - eps0) - lo;

    std::vector<std::vector<double>> fields(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        std::vector<double>& f = fields[i];
        f.resize(n);
        switch (model.kind) {
        case ModelKind::constant:
            for (SiteIndex s = 0; s < n; ++s) f[s] = model.value;
            break;
        case ModelKind::iid_uniform:
            for (SiteIndex s = 0; s < n; ++s)
                f[s] = lo + span * rng::uniform(seed, i, s);
            break;
        case ModelKind::iid_two_point:
        case ModelKind::checkerboard_random: {
            double p = model.kind == ModelKind::checkerboard_random ? 0.5 : model.p;
            for (SiteIndex s = 0; s < n; ++s)
                f[s] = rng::uniform(seed, i, s) < p ? model.hi : model.lo;
            break;
        }
        case ModelKind::smooth_correlated: {
            std::vector<double> raw(n);
            for (SiteIndex s = 0; s < n; ++s) raw[s] = rng::uniform(seed, i, s);
            // Taxicab moving average with periodic wrap.
            std::int64_t r = model.radius;
            std::vector<std::pair<LatticePoint, std::int64_t>> offsets;
            for_each_ball_point(d, r, [&](const LatticePoint& o, std::int64_t) {
                offsets.emplace_back(o, 0);
            });
            LatticePoint site(d);
            for (SiteIndex s = 0; s < n; ++s) {
                LatticePoint base = shape.coords_of(s);
                double acc = 0.0;
                for (const auto& [off, unused] : offsets) {
                    (void)unused;
                    for (std::uint32_t j = 0; j < d; ++j) site[j] = base[j] + off[j];
                    acc += raw[shape.index_of(site)];
                }
                f[s] = lo + span * (acc / static_cast<double>(offsets.size()));
            }
            break;
        }
        case ModelKind::explicit_data:
            break; // unreachable, rejected by validate_model_range
        }
    }
    return Environment(shape, model, a, b, seed, std::move(fields));
}

Environment Environment::from_fields(const TorusShape& shape,
                                     std::vector<std::vector<double>> fields, double a,
                                     double b) {
    if (!(a > 0.0)) throw Error(ErrorCode::invalid_argument, "ellipticity bound a must be > 0");
    if (!(a < b)) throw Error(ErrorCode::invalid_argument, "ellipticity bounds require a < b");
    if (fields.size() != shape.dim())
        throw Error(ErrorCode::invalid_argument, "expected one conductance array per direction");
    for (const auto& f : fields) {
        if (f.size() != shape.site_count())
            throw Error(ErrorCode::invalid_argument, "conductance array has wrong length");
        for (double v : f)
            if (!(a < v && v < b))
                throw Error(ErrorCode::invalid_argument,
                            "conductance outside the ellipticity interval (a, b)");
    }
    GeneratorModel model;
    model.kind = ModelKind::explicit_data;
    return Environment(shape, model, a, b, 0, std::move(fields));
}

double Environment::conductance_at(std::span<const std::int64_t> site, std::uint32_t dir) const {
    if (dir >= shape_.dim())
        throw Error(ErrorCode::invalid_argument, "direction out of range 1..d");
    return fields_[dir][shape_.index_of(site)];
}

double Environment::bar_c(SiteIndex s) const {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < shape_.dim(); ++i)
        acc += fields_[i][s] + fields_[i][shape_.step(s, i, -1)];
    return acc;
}

double Environment::bar_c_at(std::span<const std::int64_t> site) const {
    return bar_c(shape_.index_of(site));
}

namespace {
constexpr char kEnvMagic[4] = {'R', 'C', 'M', '1'};
constexpr std::uint32_t kEnvVersion = 1;
} // namespace

void Environment::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    binio::put_bytes(os, kEnvMagic, 4);
    binio::put_u32(os, kEnvVersion);
    binio::put_u32(os, shape_.dim());
    binio::put_u32(os, shape_.side());
    binio::put_f64(os, a_);
    binio::put_f64(os, b_);
    binio::put_u64(os, seed_);
    unsigned char model_block[8] = {static_cast<unsigned char>(model_.kind), 0, 0, 0, 0, 0, 0, 0};
    binio::put_bytes(os, model_block, 8);
    for (const auto& f : fields_)
        for (double v : f) binio::put_f64(os, v);
    if (!os) throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

Environment Environment::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::io, "cannot open '" + path + "' for reading");

    char magic[4];
    binio::get_bytes(is, magic, 4);
    if (std::memcmp(magic, kEnvMagic, 4) != 0)
        throw Error(ErrorCode::format, "bad magic (expected RCM1)");
    std::uint32_t version = binio::get_u32(is);
    if (version != kEnvVersion)
        throw Error(ErrorCode::format, "unsupported RCM version " + std::to_string(version));
    std::uint32_t d = binio::get_u32(is);
    std::uint32_t L = binio::get_u32(is);
    if (d < 1 || L < 2) throw Error(ErrorCode::format, "invalid torus shape in header");
    double a = binio::get_f64(is);
    double b = binio::get_f64(is);
    if (!(a > 0.0) || !(a < b))
        throw Error(ErrorCode::format, "invalid ellipticity bounds in header");
    std::uint64_t seed = binio::get_u64(is);
    unsigned char model_block[8];
    binio::get_bytes(is, model_block, 8);
    if (model_block[0] > static_cast<unsigned char>(ModelKind::explicit_data))
        throw Error(ErrorCode::format, "unknown model id in header");
    GeneratorModel model;
    model.kind = static_cast<ModelKind>(model_block[0]);

    TorusShape shape(d, L);
    std::uintmax_t expected = 48 + static_cast<std::uintmax_t>(d) * shape.site_count() * 8;
    std::error_code ec;
    std::uintmax_t actual = std::filesystem::file_size(path, ec);
    if (ec || actual != expected)
        throw Error(ErrorCode::format, "file size mismatch (truncated or trailing data)");

    std::vector<std::vector<double>> fields(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        fields[i].resize(shape.site_count());
        for (SiteIndex s = 0; s < shape.site_count(); ++s) {
            double v = binio::get_f64(is);
            if (!(a < v && v < b))
                throw Error(ErrorCode::format, "conductance outside (a, b) in stored field");
            fields[i][s] = v;
        }
    }
    return Environment(shape, model, a, b, seed, std::move(fields));
}

} // namespace crl
