#pragma once

// Coordinate changes near infinity: Theta, Phi, Psi, tau, the oscillation
// function h, the residue constant A and the normalized map H.
//
// Points in "u-coordinates" reuse Point2 with the first field holding u.

#include <functional>
#include <string>
#include <vector>

#include "pcyl/maps.hpp"

namespace pcyl {

struct GammaFn {
    double C = 1.0;
    double r = 1.0;
    std::vector<double> abs_coeffs;  // |d_l|, index l (entry 0 unused)

    double operator()(double delta) const;
};

/// gamma(delta) = C sum |d_l| l^r delta^l with C = 2/c from the Diophantine fit.
GammaFn make_gamma(const AutomorphismSpec& spec);

struct Region {
    double R = 10.0;
    double delta = 0.5;
    GammaFn gamma;
};

bool in_K(const Region& region, Complex u);
bool in_U(const Region& region, Complex u, Complex w);

/// (u, w) -> (-1/u, w); DomainError on a zero first coordinate.
Point2 theta(const Point2& p);

struct ChainOptions {
    double newton_tol = 1e-12;
    int newton_max_iter = 50;
    double rouche_radius = 0.5;     // Phi^{-1} iterates must stay this close to the target w
    double sum_tol = 1e-17;         // tolerance of the divisor sums
    std::vector<double> h_u_samples{100, 200, 400, 800, 1600, 3200};
    int h_ring_points = 32;
    double h_ring_radius = 0.75;
    int h_degree = 16;
};

struct ConjugationChain {
    RotationNumber rot;
    AutomorphismSpec spec;
    std::optional<ShearWord> word;
    std::function<Point2(const Point2&)> forward;
    ChainOptions opt;

    std::vector<Complex> psi_coeffs;  // d_k/(lambda^k - 1), index k
    std::vector<Complex> mu;          // lambda^n, index n
    TruncatedSeries h_series;
    Complex A;                        // constant term of h_series
    Complex A_direct;                 // estimate_h at w = 0
    bool h_ready = false;
};

/// Precomputes the Psi and Phi data; with `fit_h` also estimates h on a ring
/// and sets A.
ConjugationChain build_chain(const AutomorphismSpec& spec, const ShearWord& word, const ChainOptions& opt = {},
                             bool fit_h = true);
ConjugationChain build_chain(const AutomorphismSpec& spec, std::function<Point2(const Point2&)> forward,
                             const ChainOptions& opt = {}, bool fit_h = true);

/// The w-correction of Phi as a polynomial in w at fixed u:
/// h_Phi(u, w) = sum_l e_l w^l, e_l = lambda^{-1} b_l S_{l-1}(u).
struct PhiKernel {
    Complex u;
    std::vector<Complex> e;

    Complex value(Complex w) const;
    Complex derivative(Complex w) const;
};

/// `radius` bounds the |w| the kernel will be evaluated at; degrees whose
/// contribution is below rounding there are skipped.
PhiKernel phi_kernel(const ConjugationChain& chain, Complex u, double radius);

/// S_n(u) = sum_{k>=0} lambda^{nk}/(u+k).
Complex divisor_series(const ConjugationChain& chain, int n, Complex u);

Point2 phi_map(const ConjugationChain& chain, const Point2& q);
Point2 phi_inv(const ConjugationChain& chain, const Point2& q);
Point2 psi_map(const ConjugationChain& chain, const Point2& q);
Point2 psi_inv(const ConjugationChain& chain, const Point2& q);
Complex psi_shift(const ConjugationChain& chain, Complex w);

/// T' = Psi^{-1} o Phi^{-1} o Theta and its inverse Theta o Phi o Psi.
Point2 t_prime(const ConjugationChain& chain, const Point2& p);
Point2 t_prime_inv(const ConjugationChain& chain, const Point2& q);

/// G~ = T' o F o T'^{-1}.
Point2 g_tilde(const ConjugationChain& chain, const Point2& q);

/// Coefficient of 1/u in first(G~(u, w)) - u - 1, by least squares over the
/// real samples.
Complex estimate_h(const ConjugationChain& chain, Complex w, const std::vector<double>& u_samples);
Complex estimate_h(const ConjugationChain& chain, Complex w);

Point2 tau_map(const ConjugationChain& chain, const Point2& q);
Point2 tau_inv(const ConjugationChain& chain, const Point2& q);

/// H = tau^{-1} o G~ o tau.
Point2 h_eval(const ConjugationChain& chain, const Point2& q);

/// T = tau^{-1} o T' and its inverse.
Point2 t_full(const ConjugationChain& chain, const Point2& p);
Point2 t_full_inv(const ConjugationChain& chain, const Point2& q);

/// Sample points of U_{R,delta}: u on the boundary and interior of K, w on
/// rings of radius 0, delta/2 and delta.
std::vector<Point2> sample_U(const Region& region, int u_per_edge = 8, int w_phases = 8);
std::vector<Complex> sample_K(const Region& region, int u_per_edge = 8);

struct CalibrationRung {
    double R = 0.0;
    double sup_h_phi = 0.0;      // sup |h_Phi| over the sample
    double sup_dh_phi = 0.0;     // sup |d_w h_Phi|
    double sup_step = 0.0;       // sup |u_1 - u_0 - 1| under G~
    double C_phi = 0.0;          // sup |h_Phi| |u|
    int newton_failures = 0;
    bool pass = false;
};

struct Calibration {
    double delta = 0.5;
    double R = 0.0;              // smallest passing rung
    double gamma_delta = 0.0;
    double C_phi = 0.0;
    std::vector<CalibrationRung> rungs;
    bool ok = false;
};

inline const std::vector<double> kDefaultRLadder{10, 15, 20, 30, 40, 60, 80, 120, 160, 240, 320};

/// Walks up the R ladder until the residual checks hold on the sampled
/// U_{R,delta}; CalibrationError if none does.
Calibration calibrate(const ConjugationChain& chain, double delta,
                      const std::vector<double>& ladder = kDefaultRLadder);

struct InjectivityReport {
    double min_ratio_phi = 0.0;  // min |image distance| / |input distance|
    double min_ratio_tau = 0.0;
    int pairs = 0;
};

InjectivityReport injectivity_probe(const ConjugationChain& chain, const Region& region, int pairs,
                                    unsigned seed = 1);

/// Chain parameters and calibrated constants as a JSON object.
std::string chain_manifest_json(const ConjugationChain& chain, const Calibration* cal = nullptr);

}  // namespace pcyl
