#pragma once

// Run configuration and the command-line driver.

#include <cstdint>
#include <string>
#include <vector>

#include "pcyl/numeric.hpp"

namespace pcyl {

struct RotationSpec {
    std::string kind = "golden";  // "golden" or "cf"
    std::vector<int> cf;
    bool periodic = false;

    bool operator==(const RotationSpec&) const = default;
};

/// "golden", "cf:1,2,3" (finite, rational) or "cf:1,2,..." (periodic block).
RotationSpec parse_theta(const std::string& text);
std::string format_theta(const RotationSpec& r);

struct RunConfig {
    RotationSpec rotation;
    Precision precision = Precision::standard;
    int truncation_L = 30;
    std::int64_t sum_K = 10000;
    std::int64_t n_max = 10000;
    std::int64_t dio_range = 100000;
    std::int64_t sum_n_max = 64;
    std::int64_t sum_N_max = 100000;
    double newton_tol = 1e-12;
    double fatou_tol = 1e-3;
    double delta = 0.5;
    double epsilon = 0.1;
    double a_offset = 0.0;
    double z_in = 0.05;
    Complex seed_z{-0.05, 0.0};
    Complex seed_w{0.0, 0.0};
    std::int64_t fit_n_min = 10000;
    std::int64_t fit_n_max = 100000;
    double roundtrip_radius = 2.0;
    int roundtrip_points = 1000;
    bool basin_z_slice = true;
    double basin_re0 = -0.2, basin_re1 = 0.05, basin_im0 = -0.125, basin_im1 = 0.125;
    Complex basin_fixed{0.0, 0.0};
    int basin_width = 256;
    int basin_height = 256;
    std::int64_t basin_n_max = 10000;
    std::string out_dir = "pcyl_out";
    int threads = 0;  // 0: machine parallelism
    unsigned random_seed = 1;

    bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError on out-of-range fields.
void validate(const RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);
/// Keys missing from the JSON keep their defaults; unknown keys and an empty
/// document are errors.
RunConfig config_from_json(const std::string& text);

enum ExitCode : int { kExitPass = 0, kExitCheckFailure = 1, kExitUsage = 2, kExitIO = 3 };

/// Entry point of the pcyl binary.
int run_cli(int argc, char** argv);

}  // namespace pcyl
