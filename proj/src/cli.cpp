#include "pcyl/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcyl/fatou.hpp"

namespace pcyl {

using nlohmann::json;

namespace {

class IOFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json cj(Complex c) { return json::array({c.real(), c.imag()}); }

Complex read_complex(const json& v, const std::string& key)
{
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError("config field '" + key + "' must be a number or [re, im]");
}

}  // namespace

RotationSpec parse_theta(const std::string& text)
{
    RotationSpec r;
    if (text == "golden") return r;
    if (text.rfind("cf:", 0) != 0) throw ConfigError("theta must be 'golden' or 'cf:LIST', got '" + text + "'");
    r.kind = "cf";
    std::string body = text.substr(3);
    if (body.size() >= 3 && body.compare(body.size() - 3, 3, "...") == 0) {
        r.periodic = true;
        body.erase(body.size() - 3);
        if (!body.empty() && body.back() == ',') body.pop_back();
    }
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int a = std::stoi(item, &used);
            if (used != item.size() || a < 1) throw ConfigError("");
            r.cf.push_back(a);
        } catch (const std::exception&) {
            throw ConfigError("continued-fraction entries must be positive integers, got '" + item + "'");
        }
    }
    if (r.cf.empty()) throw ConfigError("continued fraction needs at least one entry");
    return r;
}

std::string format_theta(const RotationSpec& r)
{
    if (r.kind == "golden") return "golden";
    std::string s = "cf:";
    for (std::size_t i = 0; i < r.cf.size(); ++i) s += (i ? "," : "") + std::to_string(r.cf[i]);
    if (r.periodic) s += ",...";
    return s;
}

void validate(const RunConfig& c)
{
    auto need = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("config out of range: " + what);
    };
    need(c.rotation.kind == "golden" || (c.rotation.kind == "cf" && !c.rotation.cf.empty()), "rotation");
    for (int a : c.rotation.cf) need(a >= 1, "continued-fraction entries >= 1");
    need(c.truncation_L >= 4 && c.truncation_L <= 60, "truncation_L in [4, 60]");
    need(c.sum_K >= 0 && c.sum_K <= 100000000, "sum_K in [0, 1e8]");
    need(c.n_max >= 1 && c.n_max <= 100000000, "n_max in [1, 1e8]");
    need(c.dio_range >= 1 && c.dio_range <= 100000000, "dio_range in [1, 1e8]");
    need(c.sum_n_max >= 1 && c.sum_n_max <= 4096, "sum_n_max in [1, 4096]");
    need(c.sum_N_max >= 1 && c.sum_N_max <= 10000000, "sum_N_max in [1, 1e7]");
    need(c.newton_tol > 0.0 && c.newton_tol < 1e-3, "newton_tol in (0, 1e-3)");
    need(c.fatou_tol > 0.0, "fatou_tol > 0");
    need(c.delta > 0.0 && c.delta <= 1.0, "delta in (0, 1]");
    need(c.epsilon > 0.0, "epsilon > 0");
    need(std::isfinite(c.a_offset), "a_offset finite");
    need(c.z_in > 0.0 && c.z_in <= 1.0, "z_in in (0, 1]");
    need(c.fit_n_min >= 10 && c.fit_n_max > 2 * c.fit_n_min && c.fit_n_max <= 100000000,
         "10 <= fit_n_min, 2 fit_n_min < fit_n_max <= 1e8");
    need(c.roundtrip_radius > 0.0 && c.roundtrip_points >= 1, "round-trip radius and points positive");
    need(c.basin_re1 > c.basin_re0 && c.basin_im1 > c.basin_im0, "basin window non-empty");
    need(c.basin_width >= 1 && c.basin_width <= 4096 && c.basin_height >= 1 && c.basin_height <= 4096,
         "basin resolution within 1..4096");
    need(c.basin_n_max >= 1, "basin_n_max >= 1");
    need(c.threads >= 0 && c.threads <= 1024, "threads in [0, 1024]");
    need(!c.out_dir.empty(), "out_dir non-empty");
}

std::string config_to_json(const RunConfig& c)
{
    json j;
    j["theta"] = format_theta(c.rotation);
    j["precision"] = to_string(c.precision);
    j["truncation_L"] = c.truncation_L;
    j["sum_K"] = c.sum_K;
    j["n_max"] = c.n_max;
    j["dio_range"] = c.dio_range;
    j["sum_n_max"] = c.sum_n_max;
    j["sum_N_max"] = c.sum_N_max;
    j["newton_tol"] = c.newton_tol;
    j["fatou_tol"] = c.fatou_tol;
    j["delta"] = c.delta;
    j["epsilon"] = c.epsilon;
    j["a_offset"] = c.a_offset;
    j["z_in"] = c.z_in;
    j["seed_z"] = cj(c.seed_z);
    j["seed_w"] = cj(c.seed_w);
    j["fit_n_min"] = c.fit_n_min;
    j["fit_n_max"] = c.fit_n_max;
    j["roundtrip_radius"] = c.roundtrip_radius;
    j["roundtrip_points"] = c.roundtrip_points;
    j["basin"] = {{"slice", c.basin_z_slice ? "z" : "w"},
                  {"re0", c.basin_re0},
                  {"re1", c.basin_re1},
                  {"im0", c.basin_im0},
                  {"im1", c.basin_im1},
                  {"fixed", cj(c.basin_fixed)},
                  {"width", c.basin_width},
                  {"height", c.basin_height},
                  {"n_max", c.basin_n_max}};
    j["out_dir"] = c.out_dir;
    j["threads"] = c.threads;
    j["random_seed"] = c.random_seed;
    return j.dump(2);
}

RunConfig config_from_json(const std::string& text)
{
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); }))
        throw ConfigError("config is empty");
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
    }
    if (!j.is_object() || j.empty()) throw ConfigError("config must be a non-empty JSON object");
    RunConfig c;
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            if (k == "theta") {
                if (v.is_string()) {
                    c.rotation = parse_theta(v.get<std::string>());
                } else if (v.is_array()) {
                    c.rotation = {"cf", v.get<std::vector<int>>(), false};
                } else if (v.is_object()) {
                    c.rotation = {"cf", v.at("cf").get<std::vector<int>>(), v.value("periodic", false)};
                } else {
                    throw ConfigError("theta must be a string, an array or {cf, periodic}");
                }
            } else if (k == "precision") {
                c.precision = precision_from_string(v.get<std::string>());
            } else if (k == "truncation_L") {
                c.truncation_L = v.get<int>();
            } else if (k == "sum_K") {
                c.sum_K = v.get<std::int64_t>();
            } else if (k == "n_max") {
                c.n_max = v.get<std::int64_t>();
            } else if (k == "dio_range") {
                c.dio_range = v.get<std::int64_t>();
            } else if (k == "sum_n_max") {
                c.sum_n_max = v.get<std::int64_t>();
            } else if (k == "sum_N_max") {
                c.sum_N_max = v.get<std::int64_t>();
            } else if (k == "newton_tol") {
                c.newton_tol = v.get<double>();
            } else if (k == "fatou_tol") {
                c.fatou_tol = v.get<double>();
            } else if (k == "delta") {
                c.delta = v.get<double>();
            } else if (k == "epsilon") {
                c.epsilon = v.get<double>();
            } else if (k == "a_offset") {
                c.a_offset = v.get<double>();
            } else if (k == "z_in") {
                c.z_in = v.get<double>();
            } else if (k == "seed_z") {
                c.seed_z = read_complex(v, k);
            } else if (k == "seed_w") {
                c.seed_w = read_complex(v, k);
            } else if (k == "fit_n_min") {
                c.fit_n_min = v.get<std::int64_t>();
            } else if (k == "fit_n_max") {
                c.fit_n_max = v.get<std::int64_t>();
            } else if (k == "roundtrip_radius") {
                c.roundtrip_radius = v.get<double>();
            } else if (k == "roundtrip_points") {
                c.roundtrip_points = v.get<int>();
            } else if (k == "basin") {
                if (!v.is_object()) throw ConfigError("basin must be an object");
                for (auto b = v.begin(); b != v.end(); ++b) {
                    const std::string& bk = b.key();
                    if (bk == "slice") {
                        const std::string s = b.value().get<std::string>();
                        if (s != "z" && s != "w") throw ConfigError("basin.slice must be 'z' or 'w'");
                        c.basin_z_slice = s == "z";
                    } else if (bk == "re0") {
                        c.basin_re0 = b.value().get<double>();
                    } else if (bk == "re1") {
                        c.basin_re1 = b.value().get<double>();
                    } else if (bk == "im0") {
                        c.basin_im0 = b.value().get<double>();
                    } else if (bk == "im1") {
                        c.basin_im1 = b.value().get<double>();
                    } else if (bk == "fixed") {
                        c.basin_fixed = read_complex(b.value(), "basin.fixed");
                    } else if (bk == "width") {
                        c.basin_width = b.value().get<int>();
                    } else if (bk == "height") {
                        c.basin_height = b.value().get<int>();
                    } else if (bk == "n_max") {
                        c.basin_n_max = b.value().get<std::int64_t>();
                    } else {
                        throw ConfigError("unknown config key 'basin." + bk + "'");
                    }
                }
            } else if (k == "out_dir") {
                c.out_dir = v.get<std::string>();
            } else if (k == "threads") {
                c.threads = v.get<int>();
            } else if (k == "random_seed") {
                c.random_seed = v.get<unsigned>();
            } else {
                throw ConfigError("unknown config key '" + k + "'");
            }
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("config has a field of the wrong type: ") + ex.what());
    }
    validate(c);
    return c;
}

namespace {

// ---------------------------------------------------------------- context

struct Context {
    RunConfig cfg;
    RotationNumber rot;
    ExplicitMap map;
    ConjugationChain chain;
    Calibration cal;
    bool calibrated = false;
    std::string calibration_error;
};

RotationNumber make_rotation(const RunConfig& cfg)
{
    if (cfg.rotation.kind == "golden") return golden_rotation(cfg.dio_range);
    return rotation_from_cf(cfg.rotation.cf, cfg.rotation.periodic, 1.0, cfg.dio_range);
}

Context make_context(const RunConfig& cfg, bool need_chain)
{
    Context ctx;
    ctx.cfg = cfg;
    ctx.rot = make_rotation(cfg);
    if (!need_chain) return ctx;
    if (ctx.rot.resonant) throw SmallDivisorError("rotation number is effectively resonant");
    ctx.map = explicit_map(ctx.rot, cfg.truncation_L, 2.0);
    ChainOptions opt;
    opt.newton_tol = cfg.newton_tol;
    ctx.chain = build_chain(ctx.map.spec, ctx.map.word, opt);
    try {
        ctx.cal = calibrate(ctx.chain, cfg.delta);
        ctx.calibrated = true;
    } catch (const CalibrationError& ex) {
        ctx.calibration_error = ex.what();
    }
    return ctx;
}

unsigned thread_count(const RunConfig& cfg)
{
    if (cfg.threads > 0) return static_cast<unsigned>(cfg.threads);
    return std::max(1u, std::thread::hardware_concurrency());
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name)
{
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IOFailure("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    return std::filesystem::path(cfg.out_dir) / name;
}

void write_file(const RunConfig& cfg, const std::string& name, const std::string& content, bool binary = false)
{
    const auto path = out_path(cfg, name);
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw IOFailure("cannot open '" + path.string() + "' for writing");
    os << content;
    os.close();
    if (!os) throw IOFailure("failed writing '" + path.string() + "'");
}

json rotation_json(const RotationNumber& rot)
{
    return {{"label", rot.label},
            {"theta", {rot.theta.hi, rot.theta.lo}},
            {"lambda", cj(rot.lambda)},
            {"dio_c", rot.dio_c},
            {"dio_r", rot.dio_r},
            {"resonant", rot.resonant}};
}

void write_manifest(const Context& ctx, const std::string& command, const std::vector<std::string>& outputs)
{
    json m;
    m["command"] = command;
    m["config"] = json::parse(config_to_json(ctx.cfg));
    m["rotation"] = rotation_json(ctx.rot);
    if (ctx.chain.h_ready) {
        m["chain"] = json::parse(chain_manifest_json(ctx.chain, ctx.calibrated ? &ctx.cal : nullptr));
        m["A"] = cj(ctx.chain.A);
    }
    if (!ctx.calibration_error.empty()) m["calibration_error"] = ctx.calibration_error;
    m["outputs"] = outputs;
    write_file(ctx.cfg, "manifest.json", m.dump(2) + "\n");
}

// ---------------------------------------------------------------- checks

struct Check {
    std::string name;
    bool pass = false;
    json detail;
};

struct Suite {
    std::vector<Check> checks;
    std::vector<std::string> warnings;

    void add(std::string name, bool pass, json detail = json::object())
    {
        checks.push_back({std::move(name), pass, std::move(detail)});
    }

    // Runs `body`; any exception becomes a failed check carrying the message.
    template <class F>
    void run(const std::string& name, F&& body)
    {
        try {
            body();
        } catch (const std::exception& ex) {
            add(name, false, {{"error", ex.what()}});
        }
    }

    bool all_pass() const
    {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }

    json to_json() const
    {
        json arr = json::array();
        std::vector<std::string> failed;
        for (const Check& c : checks) {
            arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
            if (!c.pass) failed.push_back(c.name);
        }
        return {{"checks", arr}, {"failed", failed}, {"warnings", warnings}, {"all_pass", all_pass()}};
    }
};

Complex cesaro_sum(const RotationNumber& rot, Complex u, std::int64_t N, std::int64_t window)
{
    Complex acc{}, mean{}, term{};
    const Complex step = rot.lambda;
    for (std::int64_t j = 0; j <= N; ++j) {
        if (j % 4096 == 0) term = lambda_power(rot, j);
        acc += term / (u + static_cast<double>(j));
        term *= step;
        if (j > N - window) mean += acc;
    }
    return mean / static_cast<double>(window);
}

void check_rotation(const Context& ctx, Suite& s)
{
    const RunConfig& cfg = ctx.cfg;
    s.run("rotation.diophantine_fit", [&] {
        const DiophantineFit fit = diophantine_fit(ctx.rot, ctx.rot.dio_r, cfg.dio_range);
        s.add("rotation.diophantine_fit", !fit.resonant && fit.c > 0.0,
              {{"c", fit.c}, {"r", ctx.rot.dio_r}, {"argmin", fit.argmin}, {"resonant", fit.resonant}});
    });
    s.run("rotation.sum_bound", [&] {
        const SumBoundReport rep = verify_sum_bound(ctx.rot, cfg.sum_n_max, cfg.sum_N_max);
        s.add("rotation.sum_bound", rep.pass,
              {{"max_ratio", rep.max_ratio},
               {"worst", {rep.worst_n, rep.worst_m, rep.worst_N}},
               {"resonant_n", rep.resonant_n},
               {"sums_checked", rep.sums_checked}});
    });
}

void check_small_divisor(const Context& ctx, Suite& s)
{
    s.run("numeric.small_divisor_sum", [&] {
        const DivisorSum v = small_divisor_sum(ctx.rot.lambda, 1, 100.0, 0, {ctx.cfg.sum_K, 1});
        const Complex brute = cesaro_sum(ctx.rot, 100.0, 10000000, 1000000);
        const double diff = std::abs(v.value - brute);
        s.add("numeric.small_divisor_sum", diff <= 1e-8, {{"difference", diff}, {"tail_estimate", v.tail_estimate}});
    });
}

void check_maps(const Context& ctx, Suite& s, bool with_roundtrip)
{
    const RunConfig& cfg = ctx.cfg;
    const ShearWord& word = ctx.map.word;
    const Complex lam = ctx.rot.lambda;
    s.run("maps.axis_invariance", [&] {
        double worst = 0.0;
        for (int i = 0; i < 8; ++i) {
            const Complex w0 = std::polar(10.0 * (i + 1) / 8.0, kTwoPi * i / 8.0 + 0.3);
            Point2 p{0.0, w0};
            for (std::int64_t n = 1; n <= std::min<std::int64_t>(cfg.n_max, 10000); ++n) {
                p = apply(word, p);
                worst = std::max(worst, std::abs(p.z) + std::abs(p.w - lambda_power(ctx.rot, n) * w0));
            }
        }
        s.add("maps.axis_invariance", worst <= 1e-9, {{"max_error", worst}});
    });
    if (with_roundtrip) {
        s.run("maps.round_trip", [&] {
            std::mt19937_64 rng(cfg.random_seed);
            std::uniform_real_distribution<double> U(0.0, 1.0);
            auto draw = [&] { return std::polar(cfg.roundtrip_radius * std::sqrt(U(rng)), kTwoPi * U(rng)); };
            int ok = 0, escaped = 0;
            double worst_finite = 0.0;
            for (int i = 0; i < cfg.roundtrip_points; ++i) {
                const Point2 p{draw(), draw()};
                const Point2 q = apply(word, apply_inverse(word, p));
                if (q.escaped) {
                    ++escaped;
                    continue;
                }
                const double err = std::hypot(std::abs(q.z - p.z), std::abs(q.w - p.w));
                if (std::isfinite(err)) worst_finite = std::max(worst_finite, err);
                ok += err <= 1e-10;
            }
            s.add("maps.round_trip", ok == cfg.roundtrip_points,
                  {{"within_tolerance", ok},
                   {"points", cfg.roundtrip_points},
                   {"escaped_intermediate", escaped},
                   {"worst_non_escaped", worst_finite}});
        });
    }
    s.run("maps.z2_coefficient", [&] {
        double worst = 0.0;
        for (int r = 0; r <= 4; ++r)
            for (int k = 0; k < (r ? 16 : 1); ++k) {
                const Complex w = std::polar(0.5 * r, kTwoPi * k / 16.0);
                worst = std::max(worst, std::abs(extract_z2_coefficient(word, w) - std::exp(lam * w)));
            }
        const double inv = std::abs(extract_z2_coefficient(word.inverse(), 0.0) + 1.0);
        s.add("maps.z2_coefficient", worst <= 1e-6 && inv <= 1e-6,
              {{"max_error_forward", worst}, {"inverse_error_at_0", inv}});
    });
    s.run("maps.jacobian_nonconstant", [&] {
        const Complex a = jacobian_determinant(word, {0.0, 0.0});
        const Complex b = jacobian_determinant(word, {0.1, 1.0});
        const Complex c = jacobian_determinant(word, {0.0, 1.0});
        s.add("maps.jacobian_nonconstant", std::abs(a - b) > 1e-3,
              {{"det_00", cj(a)}, {"det_0.1_1", cj(b)}, {"det_01", cj(c)}});
    });
    s.run("maps.boundary_growth", [&] {
        const Complex w = 0.5;
        double bound = 0.0;
        for (int l = 1; l <= ctx.map.spec.f_series.degree(); ++l)
            bound += 2.0 * std::abs(ctx.map.spec.f_series.coeffs[l]) * std::pow(0.5, l) * 2.0 /
                     divisor_modulus(ctx.rot, l);
        bool ok = true;
        double worst_fit = 0.0, worst_dev = 0.0, last = 0.0;
        for (std::int64_t n : {1, 10, 100, 1000, 10000}) {
            if (n > std::max<std::int64_t>(cfg.n_max, 1)) break;
            const BoundaryGrowth g = boundary_growth(ctx.map.spec, word, w, n);
            worst_fit = std::max(worst_fit, std::abs(g.closed - g.numeric) / static_cast<double>(n));
            worst_dev = std::max(worst_dev, std::abs(g.numeric - 2.0 * static_cast<double>(n)));
            last = std::abs(g.numeric);
            ok = ok && std::abs(g.closed - g.numeric) <= 1e-4 * static_cast<double>(n);
        }
        ok = ok && worst_dev <= bound;
        s.add("maps.boundary_growth", ok,
              {{"max_rel_mismatch", worst_fit}, {"max_dev_from_2n", worst_dev}, {"bound", bound}, {"last_value", last}});
    });
}

void check_conjugation(const Context& ctx, Suite& s)
{
    const ConjugationChain& ch = ctx.chain;
    const RunConfig& cfg = ctx.cfg;
    s.add("conjugation.calibration", ctx.calibrated,
          ctx.calibrated ? json{{"R", ctx.cal.R}, {"C_phi", ctx.cal.C_phi}, {"delta", ctx.cal.delta}}
                         : json{{"error", ctx.calibration_error}});
    const GammaFn gamma = make_gamma(ch.spec);
    s.run("conjugation.psi_gamma_bound", [&] {
        std::mt19937_64 rng(cfg.random_seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        const double g = gamma(cfg.delta);
        for (int i = 0; i < 1000; ++i) {
            const Complex w = std::polar(cfg.delta * std::sqrt(U(rng)), kTwoPi * U(rng));
            worst = std::max(worst, std::abs(psi_shift(ch, w)));
        }
        bool doubling = true;
        for (int i = 1; i <= 20; ++i) doubling = doubling && gamma(0.05 * i) * 2.0 <= gamma(0.1 * i) * (1 + 1e-12);
        s.add("conjugation.psi_gamma_bound", worst <= g && doubling,
              {{"max_shift", worst}, {"gamma_delta", g}, {"gamma_doubling", doubling}});
    });
    s.run("conjugation.phi", [&] {
        std::vector<double> dev;
        for (double u : {50.0, 100.0, 200.0, 400.0})
            dev.push_back(std::abs(phi_map(ch, {u, Complex(0.0, 0.3)}).w - Complex(0.0, 0.3)));
        bool decay = true;
        for (std::size_t i = 1; i < dev.size(); ++i) decay = decay && dev[i] <= 0.6 * dev[i - 1];
        const Point2 q{200.0, Complex(0.0, 0.3)};
        const Point2 back = phi_map(ch, phi_inv(ch, q));
        const double rt = std::abs(back.w - q.w) + std::abs(back.z - q.z);
        s.add("conjugation.phi", decay && rt <= 1e-9, {{"deviation", dev}, {"round_trip", rt}});
    });
    s.run("conjugation.tau", [&] {
        std::vector<double> dev;
        const Complex w{0.2, 0.1};
        for (double u : {50.0, 100.0, 200.0, 400.0}) dev.push_back(std::abs(tau_map(ch, {u, w}).z - u));
        bool decay = true;
        for (std::size_t i = 1; i < dev.size(); ++i) decay = decay && dev[i] <= 0.6 * dev[i - 1];
        const Point2 q{200.0, w};
        const Point2 back = tau_map(ch, tau_inv(ch, q));
        const double rt = std::abs(back.z - q.z);
        s.add("conjugation.tau", decay && rt <= 1e-9, {{"deviation", dev}, {"round_trip", rt}});
    });
    s.run("conjugation.h_estimate", [&] {
        double worst = 0.0;
        for (Complex w : {Complex(0.0), Complex(0.3, 0.1), Complex(0.0, cfg.delta)}) {
            std::vector<double> doubled;
            for (double u : ch.opt.h_u_samples) doubled.push_back(2.0 * u);
            worst = std::max(worst, std::abs(estimate_h(ch, w) - estimate_h(ch, w, doubled)));
        }
        const double a_gap = std::abs(ch.A - ch.A_direct);
        s.add("conjugation.h_estimate", worst <= 1e-4 && a_gap <= 1e-6,
              {{"doubling_drift", worst}, {"A_series_vs_direct", a_gap}, {"A", cj(ch.A)}});
    });
    s.run("conjugation.h_normal_form", [&] {
        double worst_ratio = 1e300;
        json rows = json::array();
        for (int k = 0; k < 9; ++k) {
            const Complex w = k == 0 ? Complex(0.0) : std::polar(cfg.delta, kTwoPi * k / 8.0);
            std::vector<double> res;
            for (double u : {125.0, 250.0, 500.0, 1000.0}) {
                const Point2 H = h_eval(ch, {u, w});
                res.push_back(std::abs(H.z - u - 1.0 - ch.A / u));
            }
            for (std::size_t i = 1; i < res.size(); ++i) worst_ratio = std::min(worst_ratio, res[i - 1] / res[i]);
            rows.push_back({{"w", cj(w)}, {"residuals", res}});
        }
        s.add("conjugation.h_normal_form", worst_ratio >= 3.0, {{"min_ratio_per_doubling", worst_ratio}, {"rows", rows}});
    });
    s.run("conjugation.injectivity", [&] {
        const Region region{ctx.calibrated ? ctx.cal.R : 10.0, cfg.delta, gamma};
        const InjectivityReport rep = injectivity_probe(ch, region, 1000, cfg.random_seed);
        s.add("conjugation.injectivity", rep.min_ratio_phi >= 1e-3 && rep.min_ratio_tau >= 1e-3,
              {{"min_ratio_phi", rep.min_ratio_phi}, {"min_ratio_tau", rep.min_ratio_tau}, {"pairs", rep.pairs}});
    });
}

OrbitOptions orbit_options(const RunConfig& cfg)
{
    OrbitOptions o;
    o.precision = cfg.precision;
    return o;
}

FatouOptions fatou_options(const RunConfig& cfg)
{
    FatouOptions o;
    o.n_max = std::max<std::int64_t>(cfg.n_max, 2);
    o.tol = cfg.fatou_tol;
    o.A_offset = cfg.a_offset;
    o.precision = cfg.precision;
    return o;
}

double calibrated_T(const Context& ctx) { return ctx.calibrated ? ctx.cal.R : 10.0; }

std::vector<Point2> calibrated_seeds(const Context& ctx, int count)
{
    std::vector<Point2> seeds;
    const double T = calibrated_T(ctx);
    for (int j = 0; j < count; ++j)
        seeds.push_back(seed_from_uw(ctx.chain, 2.0 * T, std::polar(ctx.cfg.delta / 4.0, kTwoPi * j / count)));
    return seeds;
}

void check_orbits(const Context& ctx, Suite& s)
{
    const RunConfig& cfg = ctx.cfg;
    const double T = calibrated_T(ctx);
    if (cfg.n_max < 100) s.warnings.push_back("n_max < 100: orbit checks run on very short orbits");
    s.run("orbits.transit", [&] {
        bool ok = true;
        double margin = 1e300, wdev = 0.0;
        for (const Point2& p : calibrated_seeds(ctx, 8)) {
            const OrbitRecord rec = iterate(ctx.chain, p, cfg.n_max, orbit_options(cfg));
            const TransitReport r = check_transit(rec, ctx.rot, T, cfg.delta, cfg.epsilon);
            ok = ok && r.pass;
            margin = std::min(margin, r.min_margin);
            wdev = std::max(wdev, r.max_w_dev);
        }
        s.add("orbits.transit", ok, {{"T", T}, {"min_margin", margin}, {"max_w_dev", wdev}, {"epsilon", cfg.epsilon}});
    });
    s.run("orbits.drift", [&] {
        const OrbitRecord rec = iterate(ctx.chain, calibrated_seeds(ctx, 1)[0], cfg.n_max, orbit_options(cfg));
        const DriftReport r = check_drift(rec, 100, cfg.n_max);
        if (r.samples < 10) s.warnings.push_back("orbits.drift: fewer than 10 samples in [100, n_max]");
        s.add("orbits.drift", r.pass,
              {{"C", r.C}, {"C1", r.C1}, {"median_first_decile", r.median_first},
               {"median_last_decile", r.median_last}, {"samples", r.samples}});
    });
    s.run("orbits.A_cross", [&] {
        const OrbitRecord rec = iterate(ctx.chain, {cfg.seed_z, cfg.seed_w}, cfg.fit_n_max, orbit_options(cfg));
        const AFit fit = estimate_A(rec, cfg.fit_n_min, cfg.fit_n_max);
        const double gap = std::abs(fit.A - ctx.chain.A);
        s.add("orbits.A_cross", gap <= 1e-2 && std::abs(fit.A - fit.A_refit) <= 1e-2,
              {{"A_orbit", cj(fit.A)}, {"A_refit", cj(fit.A_refit)}, {"A_chain", cj(ctx.chain.A)}, {"gap", gap}});
    });
}

void check_fatou(const Context& ctx, Suite& s)
{
    const RunConfig& cfg = ctx.cfg;
    const FatouOptions fo = fatou_options(cfg);
    if (cfg.n_max < 1000) s.warnings.push_back("n_max < 1000: Fatou-coordinate estimates are far from converged");
    s.run("fatou.cauchy_decay", [&] {
        const FatouEstimate e = fatou_coordinate(ctx.chain, {cfg.seed_z, cfg.seed_w}, fo);
        // cauchy[k] n_k / log n_k stays bounded: the tail median is no larger than the head median.
        std::vector<double> rate;
        for (std::size_t k = 0; k < e.cauchy.size(); ++k)
            rate.push_back(e.cauchy[k] * static_cast<double>(e.n[k]) / std::log(static_cast<double>(e.n[k])));
        const std::size_t h = rate.size() / 2;
        std::vector<double> a(rate.begin(), rate.begin() + static_cast<std::ptrdiff_t>(h));
        std::vector<double> b(rate.begin() + static_cast<std::ptrdiff_t>(h), rate.end());
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const bool bounded = !a.empty() && !b.empty() && b[b.size() / 2] <= a[a.size() / 2];
        s.add("fatou.cauchy_decay", e.converged && bounded,
              {{"last_cauchy", e.cauchy.empty() ? 0.0 : e.cauchy.back()}, {"rate_median", e.rate_median},
               {"converged", e.converged}});
    });
    s.run("fatou.functional_equation", [&] {
        double worst = 0.0;
        for (const Point2& p : calibrated_seeds(ctx, 10)) worst = std::max(worst, functional_equation_residual(ctx.chain, p, fo));
        const double k5 = k_step_residual(ctx.chain, {cfg.seed_z, cfg.seed_w}, 5, fo);
        s.add("fatou.functional_equation", worst <= 1e-3 && k5 <= 5e-3, {{"max_residual", worst}, {"k5_residual", k5}});
    });
    s.run("fatou.asymptotic_form", [&] {
        bool ok = true;
        json rows = json::array();
        for (Complex w : {Complex(0.0), Complex(cfg.delta / 8.0, 0.0)}) {
            const AsymptoticReport r = asymptotic_form_check(ctx.chain, w, {100, 200, 400, 800}, fo);
            ok = ok && r.pass;
            rows.push_back({{"w", cj(w)}, {"first_dev", r.first_dev}, {"second_dev", r.second_dev}, {"pass", r.pass}});
        }
        s.add("fatou.asymptotic_form", ok, {{"rays", rows}});
    });
    s.run("fatou.A_crosscheck", [&] {
        const OrbitRecord rec = iterate(ctx.chain, {cfg.seed_z, cfg.seed_w}, cfg.fit_n_max, orbit_options(cfg));
        const AFit fit = estimate_A(rec, cfg.fit_n_min, cfg.fit_n_max);
        const Complex A_used = ctx.chain.A + cfg.a_offset;
        const double gap = std::abs(fit.A - A_used);
        s.add("fatou.A_crosscheck", gap <= 1e-2, {{"A_in_Q_n", cj(A_used)}, {"A_orbit", cj(fit.A)}, {"gap", gap}});
    });
    s.run("fatou.limit_map", [&] {
        const Region region{calibrated_T(ctx), cfg.delta, make_gamma(ctx.chain.spec)};
        const LimitMapReport r = limit_map_probe(ctx.chain, region, 1000, 64, 0.01, 8);
        s.add("fatou.limit_map", r.pass,
              {{"sup_pi1", r.sup_pi1}, {"sup_w_dev", r.sup_w_dev}, {"windings", r.windings}, {"escaped", r.escaped}});
    });
    s.run("fatou.basin", [&] {
        BasinWindow win;
        BasinOptions bo;
        bo.n_max = cfg.n_max;
        bo.z_in = cfg.z_in;
        bo.ladder = {{calibrated_T(ctx), cfg.delta}};
        const BasinRaster r = basin_scan(ctx.chain, win, 64, 64, bo, static_cast<int>(thread_count(cfg)));
        const ComponentReport c = inside_component(r);
        std::size_t undecided = 0;
        for (BasinClass k : r.classes) undecided += k == BasinClass::undecided;
        const double und = static_cast<double>(undecided) / static_cast<double>(r.classes.size());
        if (und > 0.5) s.warnings.push_back("fatou.basin: undecided pixels dominate (raise n_max)");
        s.add("fatou.basin", c.touches_origin_left && c.inside_fraction >= 0.01,
              {{"inside_fraction", c.inside_fraction}, {"undecided_fraction", und},
               {"component_size", c.component_size}});
    });
}

// ---------------------------------------------------------------- commands

int finish_suite(const Context& ctx, const Suite& s, const std::string& command, const std::string& file)
{
    json report = s.to_json();
    report["command"] = command;
    write_file(ctx.cfg, file, report.dump(2) + "\n");
    write_manifest(ctx, command, {file});
    for (const Check& c : s.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    for (const std::string& w : s.warnings) std::cout << "WARN " << w << "\n";
    return s.all_pass() ? kExitPass : kExitCheckFailure;
}

int cmd_diophantine(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, false);
    Suite s;
    check_rotation(ctx, s);
    if (!ctx.rot.resonant) check_small_divisor(ctx, s);
    json report = s.to_json();
    report["c"] = ctx.rot.dio_c;
    report["r"] = ctx.rot.dio_r;
    report["resonant"] = ctx.rot.resonant;
    write_file(cfg, "diophantine.json", report.dump(2) + "\n");
    write_manifest(ctx, "diophantine", {"diophantine.json"});
    for (const Check& c : s.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    if (ctx.rot.resonant) std::cout << "rotation number is effectively resonant\n";
    return s.all_pass() && !ctx.rot.resonant ? kExitPass : kExitCheckFailure;
}

int cmd_map_check(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, false);
    ctx.map = explicit_map(ctx.rot, cfg.truncation_L, 2.0);
    Suite s;
    check_maps(ctx, s, true);
    json report = s.to_json();
    report["word"] = json::parse(word_to_json(ctx.map.word));
    write_file(cfg, "map_check.json", report.dump(2) + "\n");
    write_manifest(ctx, "map-check", {"map_check.json"});
    for (const Check& c : s.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "\n";
    return s.all_pass() ? kExitPass : kExitCheckFailure;
}

int cmd_orbit(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, true);
    const Point2 p0{cfg.seed_z, cfg.seed_w};
    const OrbitRecord rec = iterate(ctx.chain, p0, cfg.n_max, orbit_options(cfg));
    std::ostringstream csv;
    write_orbit_csv(rec, ctx.rot, csv);
    write_file(cfg, "orbit.csv", csv.str());
    json report{{"seed", {cj(p0.z), cj(p0.w)}}, {"status", to_string(rec.status)}, {"n_done", rec.n_done}};
    if (rec.status == OrbitStatus::converging) {
        const TransitReport tr = check_transit(rec, ctx.rot, calibrated_T(ctx), cfg.delta, cfg.epsilon);
        report["transit"] = {{"pass", tr.pass}, {"min_margin", tr.min_margin}, {"max_w_dev", tr.max_w_dev},
                             {"first_violation", tr.first_violation}, {"reason", tr.reason}};
        if (rec.n_done >= 100) {
            const DriftReport dr = check_drift(rec);
            report["drift"] = {{"pass", dr.pass}, {"C", dr.C}, {"C1", dr.C1}};
        }
    }
    write_file(cfg, "orbit.json", report.dump(2) + "\n");
    write_manifest(ctx, "orbit", {"orbit.csv", "orbit.json"});
    std::cout << "status " << to_string(rec.status) << " after " << rec.n_done << " steps\n";
    return kExitPass;
}

int cmd_fit_a(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, true);
    OrbitOptions oo = orbit_options(cfg);
    const OrbitRecord rec = iterate(ctx.chain, {cfg.seed_z, cfg.seed_w}, cfg.fit_n_max, oo);
    const AFit fit = estimate_A(rec, cfg.fit_n_min, cfg.fit_n_max);
    const double gap = std::abs(fit.A - ctx.chain.A);
    const bool pass = gap <= 1e-2;
    json report{{"A", cj(fit.A)},         {"B", cj(fit.B)},       {"residual", fit.residual},
                {"A_refit", cj(fit.A_refit)}, {"A_manifest", cj(ctx.chain.A)}, {"gap", gap},
                {"samples", fit.samples}, {"range", {cfg.fit_n_min, cfg.fit_n_max}}, {"pass", pass}};
    write_file(cfg, "fit_a.json", report.dump(2) + "\n");
    write_manifest(ctx, "fit-a", {"fit_a.json"});
    std::printf("A = %.8f %+.3ei (chain %.8f %+.3ei)\n", fit.A.real(), fit.A.imag(), ctx.chain.A.real(),
                ctx.chain.A.imag());
    return pass ? kExitPass : kExitCheckFailure;
}

int cmd_fatou(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, true);
    const FatouOptions fo = fatou_options(cfg);
    const Point2 p{cfg.seed_z, cfg.seed_w};
    {
        // The A used in Q_n must agree with a direct orbit fit.
        const OrbitRecord rec = iterate(ctx.chain, {Complex(-0.05, 0.0), 0.0}, cfg.fit_n_max, orbit_options(cfg));
        const AFit fit = estimate_A(rec, cfg.fit_n_min, cfg.fit_n_max);
        if (std::abs(fit.A - (ctx.chain.A + cfg.a_offset)) > 1e-1)
            throw CalibrationError("A in Q_n disagrees with the orbit fit by more than 0.1");
    }
    FatouEstimate e;
    try {
        e = fatou_coordinate(ctx.chain, p, fo);
    } catch (const ClassificationError& ex) {
        json report{{"error", ex.what()}, {"point", {cj(p.z), cj(p.w)}}};
        write_file(cfg, "fatou.json", report.dump(2) + "\n");
        write_manifest(ctx, "fatou", {"fatou.json"});
        std::cout << "classification error: " << ex.what() << "\n";
        return kExitCheckFailure;
    }
    json report = json::parse(fatou_json(e));
    report["functional_equation_residual"] = functional_equation_residual(ctx.chain, p, fo);
    report["A_in_Q_n"] = cj(ctx.chain.A + cfg.a_offset);
    write_file(cfg, "fatou.json", report.dump(2) + "\n");
    write_manifest(ctx, "fatou", {"fatou.json"});
    std::printf("phi = (%.10f %+.10fi, %.10f %+.10fi) converged=%s\n", e.final.z.real(), e.final.z.imag(),
                e.final.w.real(), e.final.w.imag(), e.converged ? "yes" : "no");
    return e.converged ? kExitPass : kExitCheckFailure;
}

int cmd_basin(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, true);
    BasinWindow win;
    win.z_slice = cfg.basin_z_slice;
    win.re0 = cfg.basin_re0;
    win.re1 = cfg.basin_re1;
    win.im0 = cfg.basin_im0;
    win.im1 = cfg.basin_im1;
    win.fixed = cfg.basin_fixed;
    BasinOptions bo;
    bo.n_max = cfg.basin_n_max;
    bo.z_in = cfg.z_in;
    bo.ladder = {{calibrated_T(ctx), cfg.delta}};
    const BasinRaster r =
        basin_scan(ctx.chain, win, cfg.basin_width, cfg.basin_height, bo, static_cast<int>(thread_count(cfg)));
    std::ostringstream pgm;
    write_pgm(r, pgm);
    write_file(cfg, "basin.pgm", pgm.str(), true);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (BasinClass k : r.classes) {
        switch (k) {
        case BasinClass::inside: ++counts[0]; break;
        case BasinClass::escaped: ++counts[1]; break;
        case BasinClass::undecided: ++counts[2]; break;
        case BasinClass::axis: ++counts[3]; break;
        }
    }
    const ComponentReport c = inside_component(r);
    json report{{"width", r.width},
                {"height", r.height},
                {"counts", {{"inside", counts[0]}, {"escaped", counts[1]}, {"undecided", counts[2]}, {"axis", counts[3]}}},
                {"legend", {{"inside", 255}, {"escaped", 0}, {"undecided", 128}, {"axis", 64}}},
                {"inside_fraction", c.inside_fraction},
                {"origin_component_size", c.component_size},
                {"touches_origin_from_left", c.touches_origin_left}};
    write_file(cfg, "basin.json", report.dump(2) + "\n");
    write_manifest(ctx, "basin", {"basin.pgm", "basin.json"});
    std::printf("inside %.2f%%, component touching origin: %s\n", 100.0 * c.inside_fraction,
                c.touches_origin_left ? "yes" : "no");
    return kExitPass;
}

int cmd_verify(const RunConfig& cfg)
{
    Context ctx = make_context(cfg, true);
    Suite s;
    check_rotation(ctx, s);
    check_small_divisor(ctx, s);
    check_maps(ctx, s, false);
    check_conjugation(ctx, s);
    check_orbits(ctx, s);
    check_fatou(ctx, s);
    return finish_suite(ctx, s, "verify", "verify.json");
}

}  // namespace

int run_cli(int argc, char** argv)
{
    CLI::App app{"Numerical laboratory for a parabolic-cylinder automorphism of C^2"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir, precision, theta;
    int threads = -1;
    std::int64_t n_max = -1;
    app.add_option("--config", config_path, "JSON run configuration");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (0: machine parallelism)");
    app.add_option("--precision", precision, "double or double-double");
    app.add_option("--n-max", n_max, "iteration count");
    app.add_option("--theta", theta, "golden | cf:LIST | cf:LIST,...");
    const std::vector<std::pair<std::string, std::string>> commands{
        {"diophantine", "Diophantine constant and partial-sum bounds"},
        {"map-check", "explicit map, inverse and normal-form coefficients"},
        {"orbit", "iterate one seed and export CSV"},
        {"fit-a", "fit A from a long orbit"},
        {"fatou", "approximate Fatou coordinate of the seed"},
        {"basin", "basin raster (PGM)"},
        {"verify", "full property suite"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }
    RunConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "cannot read config file '" << config_path << "'\n";
                return kExitUsage;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            cfg = config_from_json(ss.str());
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (threads >= 0) cfg.threads = threads;
        if (!precision.empty()) cfg.precision = precision_from_string(precision);
        if (n_max >= 0) cfg.n_max = n_max;
        if (!theta.empty()) cfg.rotation = parse_theta(theta);
        validate(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "diophantine") return cmd_diophantine(cfg);
        if (cmd == "map-check") return cmd_map_check(cfg);
        if (cmd == "orbit") return cmd_orbit(cfg);
        if (cmd == "fit-a") return cmd_fit_a(cfg);
        if (cmd == "fatou") return cmd_fatou(cfg);
        if (cmd == "basin") return cmd_basin(cfg);
        return cmd_verify(cfg);
    } catch (const IOFailure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIO;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const SmallDivisorError& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kExitCheckFailure;
    } catch (const std::exception& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}

}  // namespace pcyl
