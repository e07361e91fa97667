#pragma once

// Approximate Fatou coordinates phi_n = Q_n o T' o F^n, functional-equation
// residuals, limit-map probes and basin rasters.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcyl/orbits.hpp"

namespace pcyl {

struct FatouOptions {
    std::int64_t n_max = 10000;
    double tol = 1e-3;
    int checkpoints = 32;
    double A_offset = 0.0;  // added to A inside Q_n; used to inject a known defect
    Precision precision = Precision::standard;
};

struct FatouEstimate {
    Point2 point;
    std::vector<std::int64_t> n;        // checkpoints
    std::vector<Point2> values;         // phi_n at the checkpoints
    std::vector<double> cauchy;         // |phi_{n_{k+1}} - phi_{n_k}|
    Point2 final;
    bool converged = false;
    double rate_median = 0.0;           // median of cauchy[k] n_k / log n_k
};

/// Q_n(u, w) = (u - n - A log n, lambda^{-n} w).
Point2 q_n(const ConjugationChain& chain, const Point2& q, std::int64_t n, Complex A);

/// ClassificationError unless the orbit of p converges.
FatouEstimate fatou_coordinate(const ConjugationChain& chain, const Point2& p, const FatouOptions& opt = {});

/// |phi(F(p)) - chi(phi(p))| with both estimates at the same n_max, chi(u,w) = (u+1, lambda w).
double functional_equation_residual(const ConjugationChain& chain, const Point2& p, const FatouOptions& opt = {});

/// |phi(F^k p) - chi^k(phi(p))|.
double k_step_residual(const ConjugationChain& chain, const Point2& p, int k, const FatouOptions& opt = {});

struct AsymptoticReport {
    std::vector<double> u;
    std::vector<std::int64_t> n_used;
    std::vector<double> first_dev;   // |first(phi) - (u - A log u)|
    std::vector<double> second_dev;  // |second(phi) - w|
    bool first_decreasing = false;
    bool second_decreasing = false;
    bool pass = false;
};

/// Seeds (u, w) through T'^{-1} and compares phi with u - A log u along the
/// ray. Each point uses n = max(n_max, n_per_u * u) so the finite-n bias
/// A log(1 + u/n) stays below the deviation being measured.
AsymptoticReport asymptotic_form_check(const ConjugationChain& chain, Complex w, const std::vector<double>& u_ray,
                                       const FatouOptions& opt = {}, double n_per_u = 2000.0);

struct LimitMapReport {
    double sup_pi1 = 0.0;
    double sup_w_dev = 0.0;          // sup |pi2 F^n - lambda^n w|
    int samples = 0;
    int escaped = 0;
    std::vector<Complex> targets;
    std::vector<int> windings;
    std::vector<bool> inconclusive;
    bool pass_pi1 = false;
    bool pass_w = false;
    bool pass_winding = false;
    bool pass = false;
};

/// Samples V_{R,delta/4} = Theta(U_{R,delta/4}) and checks the n-th iterate;
/// winding certificates for `n_targets` targets on |w_0| = delta/16 (plus
/// the centre when `include_centre`).
LimitMapReport limit_map_probe(const ConjugationChain& chain, const Region& region, std::int64_t n, int M = 64,
                               double eta = 0.01, int n_targets = 8, bool include_centre = false);

enum class BasinClass : unsigned char { inside = 255, escaped = 0, undecided = 128, axis = 64 };

std::string to_string(BasinClass c);

struct BasinRung {
    double R;
    double delta;
};

struct BasinOptions {
    std::int64_t n_max = 10000;
    double z_in = 0.05;
    std::vector<BasinRung> ladder;  // defaults to {(10, 0.5)} when empty
};

BasinClass basin_classify(const ConjugationChain& chain, const Point2& p, const BasinOptions& opt = {});

struct BasinWindow {
    bool z_slice = true;  // vary z at fixed w; otherwise vary w at fixed z
    double re0 = -0.2, re1 = 0.05;
    double im0 = -0.125, im1 = 0.125;
    Complex fixed{};
};

struct BasinRaster {
    BasinWindow window;
    int width = 0;
    int height = 0;
    std::vector<BasinClass> classes;  // row-major, top row (largest Im) first

    Complex pixel_center(int i, int j) const;
    BasinClass at(int i, int j) const { return classes[static_cast<std::size_t>(j) * width + i]; }
};

BasinRaster basin_scan(const ConjugationChain& chain, const BasinWindow& window, int width, int height,
                       const BasinOptions& opt = {}, int threads = 1);

struct ComponentReport {
    double inside_fraction = 0.0;
    int component_size = 0;        // 4-connected inside component adjacent to the origin from the left
    bool touches_origin_left = false;
};

ComponentReport inside_component(const BasinRaster& raster);

void write_pgm(const BasinRaster& raster, std::ostream& os);

std::string fatou_json(const FatouEstimate& est);

struct FatouInjectivity {
    double min_separation = 0.0;
    int seeds = 0;
};

/// Minimum pairwise distance between phi-images of the given seeds.
FatouInjectivity fatou_injectivity_probe(const ConjugationChain& chain, const std::vector<Point2>& seeds,
                                         const FatouOptions& opt = {});

}  // namespace pcyl
