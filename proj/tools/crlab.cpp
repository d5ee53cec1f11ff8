// crlab: batch experiment runner over the corrector laboratory C API.
//
// Subcommands: gen-env, solve, verify, sublinearity, holder, lemma2-scan,
// walk-clt, sigma-eff, oracle-check. Configuration is a flat key=value file;
// --override KEY=VALUE and the dedicated flags take precedence. Exit codes:
// 0 all declared checks pass, 1 check failure, 2 configuration or input
// validation error, 3 solver non-convergence.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "correctorlab.h"
#include "json.hpp"

using nlohmann::json;

namespace {

constexpr const char* kCliVersion = "1.0.0";

struct CliError {
    int exit_code;
    std::string message;
};

int exit_code_for(crl_status st) {
    switch (st) {
    case CRL_OK: return 0;
    case CRL_ERR_NO_CONVERGENCE: return 3;
    case CRL_ERR_INTERNAL: return 1;
    default: return 2; // invalid argument, guard, io, format: input problems
    }
}

void check(crl_status st, const std::string& what) {
    if (st == CRL_OK) return;
    throw CliError{exit_code_for(st), what + ": " + crl_last_error()};
}

// ---------------------------------------------------------------- config

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "d", "L", "a", "b", "model", "seed", "tol", "max_iter", "init_seed",
        "y", "radii", "R", "osc_radii", "k", "n_walks", "walks_csv",
        "env_in", "env_out", "corrector_out", "n_seeds", "oracle_sides",
        "poincare_fields", "poincare_rmax", "m_range", "n_max", "out",
    };
    return keys;
}

struct Settings {
    std::map<std::string, std::string> kv;

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key))
            throw CliError{2, "unknown configuration key: " + key};
        kv[key] = value;
    }

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& dflt) const {
        auto it = kv.find(key);
        return it == kv.end() ? dflt : it->second;
    }

    double get_f64(const std::string& key, double dflt) const {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw CliError{2, "config key '" + key + "' is not a number: " + it->second};
        }
    }

    std::int64_t get_i64(const std::string& key, std::int64_t dflt) const {
        auto it = kv.find(key);
        if (it == kv.end()) return dflt;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw CliError{2, "config key '" + key + "' is not an integer: " + it->second};
        }
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t dflt) const {
        const std::int64_t v = get_i64(key, static_cast<std::int64_t>(dflt));
        if (v < 0) throw CliError{2, "config key '" + key + "' must be nonnegative"};
        return static_cast<std::uint64_t>(v);
    }

    std::vector<std::int64_t> get_i64_list(const std::string& key,
                                           const std::string& dflt) const {
        const std::string raw = get_str(key, dflt);
        std::vector<std::int64_t> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stoll(item));
            } catch (const std::exception&) {
                throw CliError{2, "config key '" + key + "' has a bad entry: " + item};
            }
        }
        if (out.empty()) throw CliError{2, "config key '" + key + "' is empty"};
        return out;
    }

    std::vector<double> get_f64_list(const std::string& key, const std::string& dflt) const {
        const std::string raw = get_str(key, dflt);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw CliError{2, "config key '" + key + "' has a bad entry: " + item};
            }
        }
        if (out.empty()) throw CliError{2, "config key '" + key + "' is empty"};
        return out;
    }
};

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

void load_config_file(Settings& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CliError{2, "cannot open config file: " + path};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CliError{2, path + ":" + std::to_string(lineno) + ": expected key=value"};
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::string config_hash(const Settings& cfg) {
    // FNV-1a over the sorted effective key=value pairs
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto eat = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
    };
    for (const auto& [k, v] : cfg.kv) {
        eat(k);
        eat("=");
        eat(v);
        eat("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

// ---------------------------------------------------------------- output

struct Emitter {
    std::filesystem::path dir;

    explicit Emitter(const std::string& out) : dir(out) {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw CliError{2, "cannot create output directory: " + out};
    }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write_json(const std::string& name, const json& j) const {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw CliError{2, "cannot write " + name};
        out << j.dump(2) << '\n';
    }

    void write_csv(const std::string& name, const std::string& header,
                   const std::vector<std::vector<double>>& rows) const {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw CliError{2, "cannot write " + name};
        out << header << '\n';
        char buf[32];
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << ',';
                std::snprintf(buf, sizeof buf, "%.17g", row[i]);
                out << buf;
            }
            out << '\n';
        }
    }
};

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_metadata(const Emitter& em, const std::string& subcommand, const Settings& cfg) {
    json meta = {
        {"subcommand", subcommand},
        {"config_hash", config_hash(cfg)},
        {"config", cfg.kv},
        {"rng_algorithm", crl_rng_algorithm()},
        {"library_version", crl_version()},
        {"cli_version", kCliVersion},
        {"timestamp", utc_now()},
    };
    em.write_json("metadata.json", meta);
}

// ---------------------------------------------------------------- handles

struct EnvHandle {
    crl_env* p = nullptr;
    ~EnvHandle() { crl_env_free(p); }
};
struct CocycleHandle {
    crl_cocycle* p = nullptr;
    ~CocycleHandle() { crl_cocycle_free(p); }
};
struct CorrectorHandle {
    crl_corrector* p = nullptr;
    ~CorrectorHandle() { crl_corrector_free(p); }
};

void make_env(const Settings& cfg, EnvHandle& env) {
    if (cfg.has("env_in")) {
        check(crl_env_load(cfg.get_str("env_in", "").c_str(), &env.p), "load environment");
        return;
    }
    const auto d = static_cast<std::uint32_t>(cfg.get_u64("d", 2));
    const auto L = static_cast<std::uint32_t>(cfg.get_u64("L", 16));
    const double a = cfg.get_f64("a", 1.0);
    const double b = cfg.get_f64("b", 2.0);
    const std::string model = cfg.get_str("model", "iid-uniform");
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    check(crl_env_generate(d, L, a, b, model.c_str(), seed, &env.p), "generate environment");
}

std::vector<double> target_mean(const Settings& cfg, std::uint32_t d) {
    std::vector<double> y;
    if (cfg.has("y")) {
        y = cfg.get_f64_list("y", "");
        if (y.size() != d)
            throw CliError{2, "config key 'y' must have exactly d entries"};
    } else {
        y.assign(d, 0.0);
        y[0] = 1.0;
    }
    return y;
}

// Solve the cell problem and reconstruct the mean-y harmonic cocycle.
// Exits with code 3 (via CliError) when CG did not reach tolerance.
void solve_pipeline(const Settings& cfg, const EnvHandle& env, CorrectorHandle& cor,
                    CocycleHandle& S, std::vector<double>* y_out = nullptr) {
    const double tol = cfg.get_f64("tol", 1e-10);
    const std::uint64_t max_iter = cfg.get_u64("max_iter", 0);
    const std::uint64_t init_seed = cfg.get_u64("init_seed", 0);
    check(crl_solve(env.p, tol, max_iter, init_seed, &cor.p), "solve cell problem");
    if (!crl_corrector_converged(cor.p))
        throw CliError{3, "conjugate gradient did not reach tolerance"};
    const std::uint32_t d = crl_env_dim(env.p);
    const std::vector<double> y = target_mean(cfg, d);
    check(crl_harmonic_cocycle(cor.p, y.data(), &S.p), "reconstruct cocycle");
    if (y_out) *y_out = y;
}

json corrector_summary(const CorrectorHandle& cor, std::uint32_t d) {
    json residuals = json::array();
    json iterations = json::array();
    for (std::uint32_t j = 0; j < d; ++j) {
        double r = 0;
        std::uint64_t it = 0;
        check(crl_corrector_stats(cor.p, j, &r, &it), "corrector stats");
        residuals.push_back(r);
        iterations.push_back(it);
    }
    return {{"residual_l2", residuals},
            {"iterations", iterations},
            {"converged", crl_corrector_converged(cor.p) != 0}};
}

// ---------------------------------------------------------------- commands

int cmd_gen_env(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);
    const std::string out = em.path(cfg.get_str("env_out", "env.rcm1"));
    check(crl_env_save(env.p, out.c_str()), "save environment");

    // declared check: the file round-trips to the same parameters
    EnvHandle back;
    check(crl_env_load(out.c_str(), &back.p), "reload environment");
    const std::uint32_t d = crl_env_dim(env.p);
    bool ok = crl_env_dim(back.p) == d && crl_env_side(back.p) == crl_env_side(env.p) &&
              crl_env_seed(back.p) == crl_env_seed(env.p);
    std::vector<std::int64_t> probe(d, 0);
    for (std::uint32_t dir = 0; ok && dir < d; ++dir) {
        double v0 = 0, v1 = 0;
        check(crl_env_conductance(env.p, probe.data(), dir, &v0), "probe");
        check(crl_env_conductance(back.p, probe.data(), dir, &v1), "probe");
        ok = v0 == v1;
    }

    json j = {
        {"d", d},
        {"L", crl_env_side(env.p)},
        {"a", crl_env_bound_lo(env.p)},
        {"b", crl_env_bound_hi(env.p)},
        {"model", cfg.get_str("model", "iid-uniform")},
        {"seed", crl_env_seed(env.p)},
        {"file", cfg.get_str("env_out", "env.rcm1")},
        {"roundtrip_ok", ok},
    };
    em.write_json("env.json", j);
    if (!ok) {
        std::fprintf(stderr, "gen-env: roundtrip mismatch\n");
        return 1;
    }
    return 0;
}

int cmd_solve(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);
    const double tol = cfg.get_f64("tol", 1e-10);
    CorrectorHandle cor;
    check(crl_solve(env.p, tol, cfg.get_u64("max_iter", 0), cfg.get_u64("init_seed", 0),
                    &cor.p),
          "solve cell problem");
    const std::uint32_t d = crl_env_dim(env.p);
    const std::string out = em.path(cfg.get_str("corrector_out", "corrector.cor1"));
    check(crl_corrector_save(cor.p, out.c_str()), "save corrector");

    json j = corrector_summary(cor, d);
    j["tol"] = tol;
    j["file"] = cfg.get_str("corrector_out", "corrector.cor1");
    em.write_json("solve.json", j);
    if (!crl_corrector_converged(cor.p)) {
        std::fprintf(stderr, "solve: conjugate gradient did not reach tolerance\n");
        return 3;
    }
    return 0;
}

int cmd_verify(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);
    const std::uint32_t d = crl_env_dim(env.p);
    const std::uint32_t L = crl_env_side(env.p);

    CorrectorHandle cor;
    CocycleHandle S;
    std::vector<double> y;
    solve_pipeline(cfg, env, cor, S, &y);

    double closedness = 0, harmonicity = 0, balance = 0, martingale = 0;
    check(crl_cocycle_closedness(S.p, &closedness), "closedness");
    check(crl_harmonicity_residual(env.p, S.p, &harmonicity), "harmonicity");
    check(crl_detailed_balance_residual(env.p, &balance), "detailed balance");
    check(crl_martingale_residual(env.p, S.p, &martingale), "martingale residual");

    std::vector<double> mean(d);
    check(crl_cocycle_mean(S.p, mean.data()), "cocycle mean");
    double mean_err = 0;
    for (std::uint32_t j = 0; j < d; ++j) mean_err = std::max(mean_err, std::abs(mean[j] - y[j]));

    // Poincare inequality on seeded random fields
    const std::uint64_t n_fields = cfg.get_u64("poincare_fields", 100);
    const std::int64_t rmax = cfg.get_i64("poincare_rmax", 4);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    std::uint64_t sites = 1;
    for (std::uint32_t j = 0; j < d; ++j) sites *= L;
    std::uint64_t poincare_checked = 0, poincare_violations = 0;
    std::vector<double> u(sites);
    for (std::uint64_t f = 0; f < n_fields; ++f) {
        for (std::uint64_t s = 0; s < sites; ++s)
            u[s] = crl_rng_uniform(seed, f + 1, s);
        for (std::int64_t R = 1; R <= rmax; ++R) {
            double lhs = 0, rhs = 0;
            int holds = 0;
            const crl_status st = crl_poincare_check(d, L, u.data(), R, &lhs, &rhs, &holds);
            if (st == CRL_ERR_GUARD) break; // R beyond this torus, stop the ladder
            check(st, "poincare check");
            ++poincare_checked;
            if (!holds) ++poincare_violations;
        }
    }

    const bool pass = closedness <= 1e-9 && harmonicity <= 1e-8 && mean_err <= 1e-10 &&
                      balance <= 1e-12 && martingale <= 1e-8 && poincare_violations == 0;

    json j = {
        {"closedness_residual", closedness},
        {"harmonicity_residual", harmonicity},
        {"mean_error", mean_err},
        {"detailed_balance_residual", balance},
        {"martingale_residual", martingale},
        {"poincare",
         {{"fields", n_fields},
          {"r_max", rmax},
          {"checked", poincare_checked},
          {"violations", poincare_violations}}},
        {"solver", corrector_summary(cor, d)},
        {"pass", pass},
    };
    em.write_json("verify.json", j);
    if (!pass) {
        std::fprintf(stderr, "verify: residual check failed\n");
        return 1;
    }
    return 0;
}

int cmd_sublinearity(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);

    // guard up front, before paying for the solve
    const std::vector<std::int64_t> radii = cfg.get_i64_list("radii", "2,4,8");
    const auto cap = static_cast<std::int64_t>(crl_env_side(env.p)) / 2 - 1;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 1 || (i > 0 && radii[i] <= radii[i - 1]))
            throw CliError{2, "radii must be strictly increasing and positive"};
        if (radii[i] > cap)
            throw CliError{2, "radius " + std::to_string(radii[i]) +
                                  " exceeds the torus guard floor(L/2)-1 = " +
                                  std::to_string(cap)};
    }

    CorrectorHandle cor;
    CocycleHandle S;
    std::vector<double> y;
    solve_pipeline(cfg, env, cor, S, &y);

    std::vector<double> values(radii.size());
    std::vector<std::uint8_t> exact(radii.size());
    check(crl_sublinearity_profile(S.p, y.data(), radii.data(), radii.size(), values.data(),
                                   exact.data()),
          "sublinearity profile");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < radii.size(); ++i)
        rows.push_back({static_cast<double>(radii[i]), values[i], static_cast<double>(exact[i])});
    em.write_csv("profile.csv", "R,M_R,exact", rows);

    // declared check: R*M(R) is nondecreasing across exact entries
    bool monotone = true;
    double prev = -1.0;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!exact[i]) continue;
        const double rm = static_cast<double>(radii[i]) * values[i];
        if (rm + 1e-12 < prev) monotone = false;
        prev = std::max(prev, rm);
    }

    json j = {
        {"radii", radii},
        {"values", values},
        {"exact", exact},
        {"ball_max_nondecreasing", monotone},
        {"solver", corrector_summary(cor, crl_env_dim(env.p))},
    };
    em.write_json("sublinearity.json", j);
    if (!monotone) {
        std::fprintf(stderr, "sublinearity: ball maxima not monotone\n");
        return 1;
    }
    return 0;
}

int cmd_holder(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);

    const std::int64_t R = cfg.get_i64("R", 16);
    const auto cap = static_cast<std::int64_t>(crl_env_side(env.p)) / 2 - 1;
    if (R < 8) throw CliError{2, "oscillation fit needs R >= 8"};
    if (2 * R + 1 > cap)
        throw CliError{2, "sample ball 2R+1 exceeds the torus guard floor(L/2)-1 = " +
                              std::to_string(cap) + "; need L >= " +
                              std::to_string(2 * (2 * R + 2))};

    CorrectorHandle cor;
    CocycleHandle S;
    solve_pipeline(cfg, env, cor, S);

    double alpha = 0, c_hat = 0, quality = 0;
    int degenerate = 0;
    std::int64_t fit_radii[4] = {0, 0, 0, 0};
    double osc[4] = {0, 0, 0, 0};
    std::size_t n_points = 0;
    check(crl_holder_exponent(env.p, S.p, R, &alpha, &c_hat, &quality, &degenerate, fit_radii,
                              osc, &n_points),
          "holder exponent");

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n_points; ++i)
        rows.push_back({static_cast<double>(fit_radii[i]), osc[i]});
    em.write_csv("oscillation.csv", "r,osc", rows);

    // companion statistic: the ball-averaged increment constant over a grid
    json osc_stat = json::array();
    for (std::int64_t r : cfg.get_i64_list("osc_radii", "2,4,8")) {
        double v = 0;
        const crl_status st = crl_oscillation_constant(env.p, S.p, r, &v);
        if (st == CRL_ERR_GUARD) continue; // grid entry beyond the torus guard
        check(st, "oscillation constant");
        osc_stat.push_back({{"R", r}, {"value", v}});
    }

    const bool pass = quality >= 0.0 && quality <= 1.0;
    json j = {
        {"R", R},
        {"alpha_hat", alpha},
        {"C_hat", c_hat},
        {"fit_quality", quality},
        {"degenerate_constant", degenerate != 0},
        {"fit", rows},
        {"oscillation_constant", osc_stat},
        {"pass", pass},
    };
    em.write_json("holder.json", j);
    return pass ? 0 : 1;
}

int cmd_lemma2_scan(const Settings& cfg, const Emitter& em) {
    const auto d = static_cast<std::uint32_t>(cfg.get_u64("d", 2));
    const std::int64_t range = cfg.get_i64("m_range", 20);
    const std::int64_t n_max = cfg.get_i64("n_max", 10);
    if (d < 1 || d > 4) throw CliError{2, "lemma2-scan supports d in 1..4"};
    if (range < 0 || n_max < 1) throw CliError{2, "bad scan bounds"};

    std::uint64_t checked = 0, violations = 0, zero_branch = 0;
    std::vector<std::int64_t> m(d, -range), l(d);
    for (;;) {
        std::int64_t norm_m = 0;
        for (std::uint32_t j = 0; j < d; ++j) norm_m += std::abs(m[j]);
        for (std::int64_t n = 1; n <= n_max; ++n) {
            check(crl_nearest_multiple(m.data(), d, n, l.data()), "nearest multiple");
            std::int64_t norm_l = 0, dist = 0;
            for (std::uint32_t j = 0; j < d; ++j) {
                norm_l += std::abs(l[j]);
                dist += std::abs(l[j] - m[j]);
            }
            ++checked;
            if (norm_m < n) ++zero_branch;
            // |l| <= |m| and n*|l-m| <= n^2 + |m|*d, kept in integers
            if (norm_l > norm_m || n * dist > n * n + norm_m * static_cast<std::int64_t>(d))
                ++violations;
        }
        std::uint32_t j = 0;
        while (j < d && m[j] == range) {
            m[j] = -range;
            ++j;
        }
        if (j == d) break;
        ++m[j];
    }

    json j = {
        {"d", d},
        {"m_range", range},
        {"n_max", n_max},
        {"checked", checked},
        {"zero_branch_hits", zero_branch},
        {"violations", violations},
    };
    em.write_json("lemma2.json", j);
    if (violations) {
        std::fprintf(stderr, "lemma2-scan: %" PRIu64 " bound violations\n", violations);
        return 1;
    }
    return 0;
}

int cmd_walk_clt(const Settings& cfg, const Emitter& em) {
    EnvHandle env;
    make_env(cfg, env);
    CorrectorHandle cor;
    CocycleHandle S;
    solve_pipeline(cfg, env, cor, S);

    const std::uint64_t k = cfg.get_u64("k", 1000);
    const std::uint64_t n_walks = cfg.get_u64("n_walks", 100);
    const std::uint64_t seed = cfg.get_u64("seed", 1);
    const bool want_csv = cfg.get_u64("walks_csv", 0) != 0;
    const std::uint32_t d = crl_env_dim(env.p);

    double martingale = 0;
    check(crl_martingale_residual(env.p, S.p, &martingale), "martingale residual");

    crl_clt_stats st{};
    std::vector<double> ys;
    std::vector<std::int64_t> xs;
    if (want_csv) {
        ys.resize(n_walks);
        xs.resize(n_walks * d);
    }
    check(crl_clt_ensemble(env.p, S.p, k, n_walks, seed, &st, want_csv ? ys.data() : nullptr,
                           want_csv ? xs.data() : nullptr),
          "clt ensemble");

    if (want_csv) {
        std::vector<std::vector<double>> rows;
        rows.reserve(n_walks);
        for (std::uint64_t w = 0; w < n_walks; ++w) {
            std::vector<double> row = {static_cast<double>(w), ys[w]};
            for (std::uint32_t j = 0; j < d; ++j)
                row.push_back(static_cast<double>(xs[w * d + j]));
            rows.push_back(std::move(row));
        }
        std::string header = "walk,Y";
        for (std::uint32_t j = 1; j <= d; ++j) header += ",x" + std::to_string(j);
        em.write_csv("walks.csv", header, rows);
    }

    const bool pass = martingale <= 1e-8;
    json j = {
        {"k", st.k},
        {"n_walks", st.n_walks},
        {"mean_Y", st.mean_Y},
        {"var_Y", st.var_Y},
        {"var_over_k", st.var_over_k},
        {"normality_stat", st.normality_stat},
        {"max_sublinear_gap", st.max_sublinear_gap},
        {"seed", seed},
        {"martingale_residual", martingale},
        {"pass", pass},
    };
    em.write_json("walk_clt.json", j);
    if (!pass) {
        std::fprintf(stderr, "walk-clt: martingale residual %.3e exceeds 1e-8\n", martingale);
        return 1;
    }
    return 0;
}

int cmd_sigma_eff(const Settings& cfg, const Emitter& em) {
    const auto d = static_cast<std::uint32_t>(cfg.get_u64("d", 2));
    const auto L = static_cast<std::uint32_t>(cfg.get_u64("L", 16));
    const double a = cfg.get_f64("a", 0.9);
    const double b = cfg.get_f64("b", 4.1);
    const std::string model = cfg.get_str("model", "iid-two-point:0.5:1:4");
    const std::uint64_t base_seed = cfg.get_u64("seed", 1);
    const std::uint64_t n_seeds = cfg.get_u64("n_seeds", 10);
    const double tol = cfg.get_f64("tol", 1e-10);

    std::uint64_t sites = 1;
    for (std::uint32_t j = 0; j < d; ++j) sites *= L;

    json tensors = json::array();
    std::vector<double> mean_tensor(static_cast<std::size_t>(d) * d, 0.0);
    bool bounds_ok = true;
    for (std::uint64_t i = 0; i < n_seeds; ++i) {
        const std::uint64_t seed = base_seed + i;
        EnvHandle env;
        check(crl_env_generate(d, L, a, b, model.c_str(), seed, &env.p), "generate environment");
        CorrectorHandle cor;
        check(crl_solve(env.p, tol, 0, 0, &cor.p), "solve cell problem");
        if (!crl_corrector_converged(cor.p))
            throw CliError{3, "conjugate gradient did not reach tolerance"};

        std::vector<double> t(static_cast<std::size_t>(d) * d);
        check(crl_effective_tensor(env.p, cor.p, t.data()), "effective tensor");
        for (std::size_t q = 0; q < t.size(); ++q) mean_tensor[q] += t[q];

        // symmetry and spectrum within the ellipticity interval
        double asym = 0;
        for (std::uint32_t r = 0; r < d; ++r)
            for (std::uint32_t c = r + 1; c < d; ++c)
                asym = std::max(asym, std::abs(t[r * d + c] - t[c * d + r]));
        std::vector<double> eig(d);
        check(crl_symmetric_eigenvalues(d, t.data(), eig.data()), "eigenvalues");
        if (asym > 1e-8 || eig.front() < a - 1e-6 || eig.back() > b + 1e-6) bounds_ok = false;

        // Voigt-Reuss per direction, against the per-direction field means
        std::vector<std::int64_t> site(d);
        for (std::uint32_t dir = 0; dir < d; ++dir) {
            double sum = 0, inv_sum = 0;
            for (std::uint64_t s = 0; s < sites; ++s) {
                std::uint64_t rem = s;
                for (std::uint32_t q = 0; q < d; ++q) {
                    site[q] = static_cast<std::int64_t>(rem % L);
                    rem /= L;
                }
                double c = 0;
                check(crl_env_conductance(env.p, site.data(), dir, &c), "conductance");
                sum += c;
                inv_sum += 1.0 / c;
            }
            const double arith = sum / static_cast<double>(sites);
            const double harm = static_cast<double>(sites) / inv_sum;
            const double ajj = t[dir * d + dir];
            if (ajj < harm - 1e-6 || ajj > arith + 1e-6) bounds_ok = false;
        }

        tensors.push_back({{"seed", seed}, {"a_hom", t}, {"eigenvalues", eig}});
    }
    for (double& v : mean_tensor) v /= static_cast<double>(n_seeds);

    json j = {
        {"d", d},
        {"L", L},
        {"a", a},
        {"b", b},
        {"model", model},
        {"seeds", n_seeds},
        {"base_seed", base_seed},
        {"tensors", tensors},
        {"mean_a_hom", mean_tensor},
        {"mean_a11", mean_tensor[0]},
        {"bounds_ok", bounds_ok},
    };
    em.write_json("sigma_eff.json", j);
    if (!bounds_ok) {
        std::fprintf(stderr, "sigma-eff: tensor bounds violated\n");
        return 1;
    }
    return 0;
}

int cmd_oracle_check(const Settings& cfg, const Emitter& em) {
    const auto d = static_cast<std::uint32_t>(cfg.get_u64("d", 2));
    const double a = cfg.get_f64("a", 1.0);
    const double b = cfg.get_f64("b", 2.0);
    const std::string model = cfg.get_str("model", "iid-uniform");
    const std::uint64_t base_seed = cfg.get_u64("seed", 1);
    const std::uint64_t n_seeds = cfg.get_u64("n_seeds", 5);
    const std::vector<std::int64_t> sides = cfg.get_i64_list("oracle_sides", "2,3,4,5,6");
    const double tol = cfg.get_f64("tol", 1e-10);

    double worst = 0.0;
    json runs = json::array();
    for (std::int64_t Ls : sides) {
        if (Ls < 2) throw CliError{2, "oracle side must be >= 2"};
        const auto L = static_cast<std::uint32_t>(Ls);
        std::uint64_t sites = 1;
        for (std::uint32_t j = 0; j < d; ++j) sites *= L;
        for (std::uint64_t i = 0; i < n_seeds; ++i) {
            const std::uint64_t seed = base_seed + i;
            EnvHandle env;
            check(crl_env_generate(d, L, a, b, model.c_str(), seed, &env.p),
                  "generate environment");
            CorrectorHandle cg, dense;
            check(crl_solve(env.p, tol, 0, 0, &cg.p), "solve cell problem");
            if (!crl_corrector_converged(cg.p))
                throw CliError{3, "conjugate gradient did not reach tolerance"};
            check(crl_solve_dense(env.p, &dense.p), "dense solve");

            std::vector<double> chi_cg(sites), chi_dense(sites);
            double gap = 0.0;
            for (std::uint32_t j = 0; j < d; ++j) {
                check(crl_corrector_chi(cg.p, j, chi_cg.data()), "chi");
                check(crl_corrector_chi(dense.p, j, chi_dense.data()), "chi");
                for (std::uint64_t s = 0; s < sites; ++s)
                    gap = std::max(gap, std::abs(chi_cg[s] - chi_dense[s]));
            }
            worst = std::max(worst, gap);
            runs.push_back({{"L", L}, {"seed", seed}, {"max_gap", gap}});
        }
    }

    const bool pass = worst <= 1e-9;
    json j = {
        {"d", d},
        {"model", model},
        {"sides", sides},
        {"seeds_per_side", n_seeds},
        {"runs", runs},
        {"worst_gap", worst},
        {"pass", pass},
    };
    em.write_json("oracle.json", j);
    if (!pass) {
        std::fprintf(stderr, "oracle-check: CG vs dense gap %.3e exceeds 1e-9\n", worst);
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"corrector laboratory experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key=value configuration file");
    app.add_option("--out", out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", seed, "seed override");
    app.add_option("--override", overrides, "KEY=VALUE configuration override")
        ->type_size(1);

    std::map<std::string, std::function<int(const Settings&, const Emitter&)>> handlers = {
        {"gen-env", cmd_gen_env},         {"solve", cmd_solve},
        {"verify", cmd_verify},           {"sublinearity", cmd_sublinearity},
        {"holder", cmd_holder},           {"lemma2-scan", cmd_lemma2_scan},
        {"walk-clt", cmd_walk_clt},       {"sigma-eff", cmd_sigma_eff},
        {"oracle-check", cmd_oracle_check},
    };
    for (const auto& [name, fn] : handlers) {
        (void)fn;
        app.add_subcommand(name, "")->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Settings cfg;
        if (!config_path.empty()) load_config_file(cfg, config_path);
        for (const std::string& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos)
                throw CliError{2, "--override expects KEY=VALUE, got: " + ov};
            cfg.set(trim(ov.substr(0, eq)), trim(ov.substr(eq + 1)));
        }
        if (seed_opt->count() > 0) cfg.set("seed", std::to_string(seed));
        if (!out_dir.empty()) cfg.set("out", out_dir);

        const std::string sub = app.get_subcommands().front()->get_name();
        Emitter em(cfg.get_str("out", "crlab-out"));
        write_metadata(em, sub, cfg);
        return handlers.at(sub)(cfg, em);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    }
}
