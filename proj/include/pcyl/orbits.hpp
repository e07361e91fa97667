#pragma once

// Forward orbits, their u-coordinates under T', and the asymptotic checks.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcyl/conjugation.hpp"

namespace pcyl {

enum class OrbitStatus { converging, escaped, undecided };

std::string to_string(OrbitStatus s);

struct OrbitOptions {
    Precision precision = Precision::standard;
    std::int64_t dense_until = 10000;  // every point is stored up to here
    std::int64_t stride = 10;          // then every stride-th point
    bool compute_u = true;
};

struct OrbitRecord {
    Point2 initial;
    std::vector<std::int64_t> n;  // iterate index of each stored point
    std::vector<Point2> points;
    std::vector<Complex> u_seq;   // first coordinate of T'(z_n, w_n); NaN where T' is undefined
    std::vector<Complex> w_seq;   // second coordinate of T'(z_n, w_n)
    OrbitStatus status = OrbitStatus::undecided;
    std::int64_t n_done = 0;
};

OrbitRecord iterate(const ConjugationChain& chain, const Point2& p0, std::int64_t n_max,
                    const OrbitOptions& opt = {});

/// Seed given in T'-coordinates.
Point2 seed_from_uw(const ConjugationChain& chain, Complex u0, Complex w0);

struct TransitReport {
    bool pass = false;
    std::int64_t first_violation = -1;
    std::string reason;
    double min_margin = 0.0;     // min Re(u_n) - T - n/2
    double max_w_dev = 0.0;      // max |w_n - lambda^n w_0|
};

/// Re(u_n) > T + n/2 and |w_n - lambda^n w_0| < eps for every stored n, with
/// (u_n, w_n) the T'-coordinates of the orbit.
TransitReport check_transit(const OrbitRecord& rec, const RotationNumber& rot, double T, double delta, double eps);

struct AFit {
    Complex A;
    Complex B;
    double residual = 0.0;
    Complex A_refit;   // same fit on [2 n_min, n_max]
    int samples = 0;
};

/// Least squares u_n = n + A log n + B over stored n in [n_min, n_max].
AFit estimate_A(const OrbitRecord& rec, std::int64_t n_min, std::int64_t n_max);
AFit estimate_A(const std::vector<std::int64_t>& n, const std::vector<Complex>& u, std::int64_t n_min,
                std::int64_t n_max);

struct DriftReport {
    bool pass = false;
    double C = 0.0;                 // smallest C with |1/u_n - 1/n| <= C log n / n^2
    double C1 = 0.0;                // smallest C1 with 1/|u_n| <= C1/n
    double median_first = 0.0;      // decile medians of |1/u_n - 1/n| n^2 / log n
    double median_last = 0.0;
    int samples = 0;
};

DriftReport check_drift(const OrbitRecord& rec, std::int64_t n_lo = 10, std::int64_t n_hi = -1);
DriftReport check_drift(const std::vector<std::int64_t>& n, const std::vector<Complex>& u, std::int64_t n_lo,
                            std::int64_t n_hi);

/// Columns n, Re z, Im z, Re w, Im w, Re u, Im u, |w - lambda^n w_0|.
void write_orbit_csv(const OrbitRecord& rec, const RotationNumber& rot, std::ostream& os);

}  // namespace pcyl
