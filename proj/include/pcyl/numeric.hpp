#pragma once

// Scalar conventions, truncated power series and small-divisor summation.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pcyl/double_double.hpp"
#include "pcyl/errors.hpp"

namespace pcyl {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

enum class Precision { standard, double_double };

const char* to_string(Precision p);
Precision precision_from_string(const std::string& s);

/// Coefficients c_0..c_L of an entire function cut at degree L. The tail bound
/// holds on the closed disc |w| <= validity_radius.
struct TruncatedSeries {
    std::vector<Complex> coeffs;
    double validity_radius = 1.0;
    double tail_bound = 0.0;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }
    Complex coefficient(int l) const
    {
        return (l >= 0 && l < static_cast<int>(coeffs.size())) ? coeffs[l] : Complex{};
    }
};

/// Horner evaluation; throws DomainError outside the validity disc.
Complex series_eval(const TruncatedSeries& s, Complex w);
Complex series_derivative(const TruncatedSeries& s, Complex w);

/// Series of e^{a w}: c_l = a^l / l!, with the analytic remainder bound
/// (|a| rho)^{L+1}/(L+1)! e^{|a| rho}.
TruncatedSeries exp_scaled_series(Complex a, int L, double rho);

/// Remainder estimate for a generic coefficient list on |w| <= rho, by
/// extrapolating the geometric decay of the last few |c_l| rho^l, or from the
/// noise floor once they stop decaying.
double decay_tail_bound(std::span<const Complex> coeffs, double rho);

/// lambda^k for |lambda| = 1 without multiplicative drift.
Complex unit_power(Complex lambda, std::int64_t k);

/// sum_{j=m}^{N} lambda^{jn}: closed form when |lambda^n - 1| > 1e-8,
/// direct accumulation otherwise.
Complex lambda_partial_sum(Complex lambda, std::int64_t n, std::int64_t m, std::int64_t N);

inline constexpr double kSmallDivisorCutoff = 1e-8;

struct DivisorSum {
    Complex value;
    double tail_estimate = 0.0;
};

/// K explicit terms after the first, then `abel_levels` summation-by-parts
/// boundary terms for the remainder.
struct SumPolicy {
    std::int64_t K = 10000;
    int abel_levels = 1;
};

/// sum_{j>=m} lambda^{nj}/(u+j). The explicit part covers j = m..m+K; the
/// remainder from J = m+K+1 is replaced by its Abel (Euler) boundary terms.
/// tail_estimate is a rigorous bound on what is dropped.
DivisorSum small_divisor_sum(Complex lambda, std::int64_t n, Complex u, std::int64_t m,
                             const SumPolicy& policy = {});

/// Same series written in the ratio mu = lambda^n, with the number of explicit
/// terms and Abel levels chosen adaptively until the dropped part is below
/// `tol`. This is the evaluator used inside the coordinate changes.
DivisorSum oscillatory_sum(Complex mu, Complex u, std::int64_t m = 0, double tol = 1e-17);

/// Plain truncation sum_{j=m}^{m+K} mu^j/(u+j); kept for cross-checks.
Complex plain_truncated_sum(Complex mu, Complex u, std::int64_t m, std::int64_t K);

/// Coefficients a_0..a_{count-1} of f(center + t) from M equispaced samples on
/// |t| = radius (discrete Cauchy integral / DFT).
std::vector<Complex> cauchy_coefficients(const std::function<Complex(Complex)>& f, Complex center,
                                         double radius, int samples, int count);

/// Winding number of f around 0 along the circle |t - center| = radius.
/// `inconclusive` is set when a sample is too close to 0 or the phase jumps
/// by more than pi/2 between neighbours.
struct WindingResult {
    int winding = 0;
    bool inconclusive = false;
    double min_modulus = 0.0;
};
WindingResult winding_number(const std::function<Complex(Complex)>& f, Complex center, double radius,
                             int samples, double zero_threshold);

/// Damped Newton for a scalar holomorphic equation F(x) = 0 with step halving.
struct NewtonResult {
    Complex root;
    int iterations = 0;
    double residual = 0.0;
};
NewtonResult damped_newton(const std::function<Complex(Complex)>& F,
                           const std::function<Complex(Complex)>& dF, Complex x0, double tol,
                           int max_iter, const std::function<bool(Complex)>& admissible = {});

/// Least squares for complex data against real basis functions; returns the
/// coefficients and the RMS misfit.
struct FitResult {
    std::vector<Complex> coeffs;
    double rms = 0.0;
};
FitResult least_squares(const std::vector<std::vector<double>>& basis_rows, std::span<const Complex> y);

}  // namespace pcyl
