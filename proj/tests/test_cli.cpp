#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcyl/cli.hpp"

using namespace pcyl;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args)
{
    args.insert(args.begin(), "pcyl");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("pcyl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text)
{
    const fs::path p = fs::temp_directory_path() / ("pcyl_test_" + name + ".json");
    std::ofstream(p) << text;
    return p;
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("theta parsing")
{
    CHECK(parse_theta("golden").kind == "golden");
    const RotationSpec a = parse_theta("cf:1,2,3");
    CHECK(a.cf == std::vector<int>{1, 2, 3});
    CHECK_FALSE(a.periodic);
    const RotationSpec b = parse_theta("cf:2,...");
    CHECK(b.periodic);
    CHECK(b.cf == std::vector<int>{2});
    for (const RotationSpec& r : {a, b, RotationSpec{}}) CHECK(parse_theta(format_theta(r)) == r);
    CHECK_THROWS_AS(parse_theta("silver"), ConfigError);
    CHECK_THROWS_AS(parse_theta("cf:"), ConfigError);
    CHECK_THROWS_AS(parse_theta("cf:1,0"), ConfigError);
    CHECK_THROWS_AS(parse_theta("cf:1,x"), ConfigError);
}

TEST_CASE("config round trip and validation")
{
    RunConfig c;
    c.rotation = parse_theta("cf:1,1,2,...");
    c.precision = Precision::double_double;
    c.delta = 0.123456789012345678;
    c.seed_z = Complex(-0.1, 1.0 / 3.0);
    c.basin_fixed = Complex(0.0, 0.1);
    c.basin_z_slice = false;
    c.a_offset = 1e-17;
    c.out_dir = "somewhere/else";
    const RunConfig d = config_from_json(config_to_json(c));
    CHECK(d == c);
    CHECK(config_from_json(config_to_json(RunConfig{})) == RunConfig{});

    CHECK(config_from_json(R"({"n_max": 50})").n_max == 50);
    CHECK(config_from_json(R"({"theta": [2, 3]})").rotation.cf == std::vector<int>{2, 3});
    CHECK(config_from_json(R"({"seed_w": [0.1, 0.2]})").seed_w == Complex(0.1, 0.2));
    CHECK_THROWS_AS(config_from_json(""), ConfigError);
    CHECK_THROWS_AS(config_from_json("  \n"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[1]"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"nmax": 5})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"n_max": "many"})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"n_max": 0})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"delta": 2.0})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"basin": {"re0": 1, "re1": 0}})"), ConfigError);
    CHECK_THROWS_AS(config_from_json(R"({"precision": "quad"})"), ConfigError);
}

TEST_CASE("usage and I/O exit codes")
{
    CHECK(run({}) == kExitUsage);
    CHECK(run({"nonsense"}) == kExitUsage);
    CHECK(run({"orbit", "--n-max", "abc"}) == kExitUsage);
    CHECK(run({"orbit", "--theta", "cf:0"}) == kExitUsage);
    const fs::path empty = write_config("empty", "");
    CHECK(run({"diophantine", "--config", empty.string()}) == kExitUsage);
    CHECK(run({"diophantine", "--config", "/nonexistent/cfg.json"}) == kExitUsage);
    const fs::path blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    CHECK(run({"diophantine", "--out", (blocker / "sub").string()}) == kExitIO);
}

TEST_CASE("diophantine command")
{
    const fs::path out = scratch("dio");
    CHECK(run({"diophantine", "--out", out.string()}) == kExitPass);
    const auto rep = read_json(out / "diophantine.json");
    CHECK(rep.at("all_pass").get<bool>());
    CHECK(rep.at("c").get<double>() > 0.0);
    const auto man = read_json(out / "manifest.json");
    CHECK(man.at("command") == "diophantine");
    CHECK(man.at("config").at("theta") == "golden");

    const fs::path out2 = scratch("dio_rational");
    CHECK(run({"diophantine", "--theta", "cf:4", "--out", out2.string()}) == kExitCheckFailure);
    CHECK(read_json(out2 / "diophantine.json").at("resonant").get<bool>());
}

TEST_CASE("orbit command: flags override config, output is deterministic")
{
    const fs::path cfg = write_config("orbit", R"({"seed_z": 0, "seed_w": [0.5, 0.1], "n_max": 7, "out_dir": "ignored"})");
    const fs::path a = scratch("orbit_a"), b = scratch("orbit_b");
    CHECK(run({"orbit", "--config", cfg.string(), "--out", a.string(), "--n-max", "40"}) == kExitPass);
    CHECK(run({"orbit", "--config", cfg.string(), "--out", b.string(), "--n-max", "40"}) == kExitPass);
    const std::string csv = slurp(a / "orbit.csv");
    CHECK(csv == slurp(b / "orbit.csv"));
    std::istringstream is(csv);
    int rows = 0;
    for (std::string line; std::getline(is, line); ++rows) {
        if (rows == 0) continue;
        std::stringstream ls(line);
        std::string n, re_z, im_z;
        std::getline(ls, n, ',');
        std::getline(ls, re_z, ',');
        std::getline(ls, im_z, ',');
        CHECK(re_z == "0");
        CHECK(im_z == "0");
    }
    CHECK(rows == 42);
    const auto man = read_json(a / "manifest.json");
    CHECK(man.at("config").at("n_max") == 40);
    CHECK(man.at("config").at("out_dir") == a.string());
    CHECK(man.contains("chain"));
}

TEST_CASE("fit-a, fatou and basin commands")
{
    const fs::path out = scratch("cmds");
    CHECK(run({"fit-a", "--out", out.string()}) == kExitPass);
    const auto fit = read_json(out / "fit_a.json");
    const auto man = read_json(out / "manifest.json");
    CHECK(std::abs(fit.at("A")[0].get<double>() - man.at("A")[0].get<double>()) <= 1e-2);

    CHECK(run({"fatou", "--out", out.string()}) == kExitPass);
    const auto f = read_json(out / "fatou.json");
    CHECK(f.at("converged").get<bool>());
    CHECK(f.at("functional_equation_residual").get<double>() <= 1e-3);

    const fs::path axis = write_config("axis", R"({"seed_z": 0, "seed_w": 0.3})");
    CHECK(run({"fatou", "--config", axis.string(), "--out", out.string()}) == kExitCheckFailure);
    CHECK(read_json(out / "fatou.json").contains("error"));

    const fs::path bcfg = write_config("basin", R"({"basin": {"width": 48, "height": 32, "n_max": 2000}})");
    const fs::path b1 = scratch("basin1"), b2 = scratch("basin2");
    CHECK(run({"basin", "--config", bcfg.string(), "--out", b1.string(), "--threads", "1"}) == kExitPass);
    CHECK(run({"basin", "--config", bcfg.string(), "--out", b2.string(), "--threads", "3"}) == kExitPass);
    const std::string pgm = slurp(b1 / "basin.pgm");
    CHECK(pgm == slurp(b2 / "basin.pgm"));
    CHECK(pgm.rfind("P5\n48 32\n255\n", 0) == 0);
    const auto bj = read_json(b1 / "basin.json");
    CHECK(bj.at("inside_fraction").get<double>() >= 0.01);
    CHECK(bj.at("touches_origin_from_left").get<bool>());
}

TEST_CASE("verify: default passes, injected defect fails, short run warns")
{
    const fs::path ok = scratch("verify_ok");
    CHECK(run({"verify", "--out", ok.string()}) == kExitPass);
    const auto rep = read_json(ok / "verify.json");
    CHECK(rep.at("all_pass").get<bool>());
    CHECK(rep.at("checks").size() >= 20);
    const auto man = read_json(ok / "manifest.json");
    CHECK(man.at("chain").contains("calibration"));

    const fs::path bad = scratch("verify_bad");
    const fs::path cfg = write_config("defect", R"({"a_offset": 0.1})");
    CHECK(run({"verify", "--config", cfg.string(), "--out", bad.string()}) == kExitCheckFailure);
    const auto failed = read_json(bad / "verify.json").at("failed");
    CHECK(std::find(failed.begin(), failed.end(), "fatou.asymptotic_form") != failed.end());
    CHECK(std::find(failed.begin(), failed.end(), "fatou.A_crosscheck") != failed.end());

    const fs::path brief = scratch("verify_short");
    CHECK(run({"verify", "--n-max", "10", "--out", brief.string()}) == kExitCheckFailure);
    const auto warn = read_json(brief / "verify.json").at("warnings");
    CHECK(warn.size() >= 2);
    bool basin_warned = false;
    for (const auto& w : warn) basin_warned = basin_warned || w.get<std::string>().find("undecided") != std::string::npos;
    CHECK(basin_warned);
}
