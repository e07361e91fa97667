#pragma once

// Rotation numbers theta with multiplier lambda = e^{2 pi i theta}.

#include <cstdint>
#include <string>
#include <vector>

#include "pcyl/numeric.hpp"

namespace pcyl {

struct RotationNumber {
    DoubleDouble theta;        // in [0, 1)
    Complex lambda;            // e^{2 pi i theta}
    std::vector<int> cf;       // partial quotients of theta = [0; a1, a2, ...]
    double dio_c = 0.0;
    double dio_r = 1.0;
    bool resonant = false;     // set when dio_c fell below the resonance threshold
    std::string label;         // "golden", "cf:1,2,3", ...
};

/// theta = (sqrt 5 - 1)/2, dio_r = 1, dio_c fitted over n <= dio_range.
RotationNumber golden_rotation(std::int64_t dio_range = 100000);

/// Rotation from a double-double angle; the cf is expanded to `cf_terms` terms
/// or until the remainder vanishes.
RotationNumber rotation_from_theta(DoubleDouble theta, double r = 1.0, std::int64_t dio_range = 100000,
                                   int cf_terms = 40);

/// theta = [0; a1, ..., ak]. With `periodic` the block repeats forever and the
/// result is a quadratic irrational; otherwise it is the rational value.
RotationNumber rotation_from_cf(const std::vector<int>& partial_quotients, bool periodic, double r = 1.0,
                                std::int64_t dio_range = 100000);

/// e^{2 pi i frac(n theta)}; lambda^{-n} is the exact conjugate of lambda^n.
Complex lambda_power(const RotationNumber& rot, std::int64_t n);
ComplexDD lambda_power_dd(const RotationNumber& rot, std::int64_t n);

/// |lambda^n - 1| computed as 2|sin(pi frac(n theta))|.
double divisor_modulus(const RotationNumber& rot, std::int64_t n);

inline constexpr double kResonanceThreshold = 1e-12;

struct DiophantineFit {
    double c = 0.0;
    std::int64_t argmin = 1;
    bool resonant = false;
};

/// c = min_{1 <= n <= Nmax} n^r |lambda^n - 1|.
DiophantineFit diophantine_fit(const RotationNumber& rot, double r, std::int64_t Nmax);

struct SumBoundReport {
    double max_ratio = 0.0;    // max |sum| |lambda^n - 1| / 2
    std::int64_t worst_n = 0, worst_m = 0, worst_N = 0;
    std::int64_t resonant_n = 0;  // first n with lambda^n = 1, 0 if none
    double resonant_growth = 0.0; // |sum| reached at that n
    std::int64_t sums_checked = 0;
    bool pass = false;
};

/// Sweeps n <= n_max, every m in `ms` and every N in [m, N_max], summing
/// lambda^{jn} directly, and compares with 2/|lambda^n - 1|.
SumBoundReport verify_sum_bound(const RotationNumber& rot, std::int64_t n_max, std::int64_t N_max,
                                const std::vector<std::int64_t>& ms = {0, 17, 500});

}  // namespace pcyl
