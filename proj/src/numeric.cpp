#include "pcyl/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pcyl {

const char* to_string(Precision p)
{
    return p == Precision::double_double ? "double-double" : "double";
}

Precision precision_from_string(const std::string& s)
{
    if (s == "double" || s == "standard") return Precision::standard;
    if (s == "double-double" || s == "dd") return Precision::double_double;
    throw ConfigError("unknown precision mode '" + s + "' (expected double or double-double)");
}

Complex series_eval(const TruncatedSeries& s, Complex w)
{
    if (std::abs(w) > s.validity_radius * (1.0 + 1e-12))
        throw DomainError("series evaluated outside its validity radius");
    Complex acc{};
    for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) acc = acc * w + *it;
    return acc;
}

Complex series_derivative(const TruncatedSeries& s, Complex w)
{
    if (std::abs(w) > s.validity_radius * (1.0 + 1e-12))
        throw DomainError("series evaluated outside its validity radius");
    Complex acc{};
    for (int l = s.degree(); l >= 1; --l) acc = acc * w + static_cast<double>(l) * s.coeffs[l];
    return acc;
}

TruncatedSeries exp_scaled_series(Complex a, int L, double rho)
{
    if (L < 0 || !(rho > 0.0)) throw DomainError("exp_scaled_series needs L >= 0 and rho > 0");
    TruncatedSeries s;
    s.validity_radius = rho;
    s.coeffs.resize(static_cast<std::size_t>(L) + 1);
    Complex c{1.0, 0.0};
    for (int l = 0; l <= L; ++l) {
        if (l > 0) c *= a / static_cast<double>(l);
        s.coeffs[l] = c;
    }
    const double x = std::abs(a) * rho;
    // x^{L+1}/(L+1)! e^x, in logs so large L does not overflow.
    const double log_bound = (L + 1) * std::log(std::max(x, 1e-300)) - std::lgamma(L + 2.0) + x;
    s.tail_bound = x == 0.0 ? 0.0 : std::exp(log_bound);
    return s;
}

double decay_tail_bound(std::span<const Complex> coeffs, double rho)
{
    const int L = static_cast<int>(coeffs.size()) - 1;
    if (L < 3) return 0.0;
    std::vector<double> mags;
    for (int l = L - 3; l <= L; ++l) mags.push_back(std::abs(coeffs[l]) * std::pow(rho, l));
    const double last = mags.back();
    double q = 0.0;
    for (std::size_t i = 1; i < mags.size(); ++i)
        if (mags[i - 1] > 0.0) q = std::max(q, mags[i] / mags[i - 1]);
    const double peak = *std::max_element(mags.begin(), mags.end());
    // No visible decay: the coefficients sit on a noise floor, whose remainder
    // is taken as a few multiples of the floor.
    if (q >= 0.95) return 4.0 * peak;
    // Remainder of a geometric majorant seeded from the largest recent term.
    return std::max(last, peak * q) * q / (1.0 - q);
}

Complex unit_power(Complex lambda, std::int64_t k)
{
    if (k == 0) return {1.0, 0.0};
    const bool negative = k < 0;
    std::uint64_t e = negative ? static_cast<std::uint64_t>(-(k + 1)) + 1u : static_cast<std::uint64_t>(k);
    ComplexDD base(lambda);
    ComplexDD acc(DoubleDouble(1.0));
    while (e) {
        if (e & 1u) acc = acc * base;
        base = base * base;
        e >>= 1u;
    }
    // |lambda| = 1 is assumed: rounding in the input modulus is projected out.
    Complex r = acc.to_complex();
    r /= std::abs(r);
    return negative ? std::conj(r) : r;
}

Complex lambda_partial_sum(Complex lambda, std::int64_t n, std::int64_t m, std::int64_t N)
{
    if (N < m) return {};
    const Complex mu = unit_power(lambda, n);
    if (std::abs(mu - 1.0) > kSmallDivisorCutoff)
        return (unit_power(lambda, n * (N + 1)) - unit_power(lambda, n * m)) / (mu - 1.0);
    Complex acc{};
    Complex term = unit_power(lambda, n * m);
    for (std::int64_t j = m; j <= N; ++j) {
        acc += term;
        term *= mu;
    }
    return acc;
}

namespace {

void check_ray(Complex u, std::int64_t m)
{
    // Nearest lattice point -j (j >= m) to u.
    const double j = std::max(static_cast<double>(m), std::round(-u.real()));
    if (std::abs(u + j) < 1e-12) throw DomainError("pole on the summation ray");
}

// Summation-by-parts boundary terms for sum_{k>=0} mu^k/(x+k), times mu^J.
// Returns the partial Euler sum of `levels` terms and the rigorous remainder bound.
struct AbelTail {
    Complex value;
    double bound = 0.0;
    int levels_used = 0;
};

AbelTail abel_tail(Complex mu, Complex muJ, Complex x, int levels, double tol)
{
    const Complex one_minus = 1.0 - mu;
    const double d = std::abs(one_minus);
    const Complex ratio = mu / one_minus;
    const double y = x.real();
    AbelTail out;
    Complex D = 1.0 / x;          // Delta^p f_0
    Complex rp{1.0, 0.0};         // ratio^p
    double E = 1.0 / y;           // p!/prod_{i<=p}(y+i)
    double dpow = d;              // d^{p+1}
    const bool adaptive = levels < 0;
    const int cap = adaptive ? 400 : levels;
    double prev_mag = std::numeric_limits<double>::infinity();
    int p = 0;
    for (; p < cap; ++p) {
        const Complex term = muJ * D * rp / one_minus;
        const double mag = std::abs(term);
        if (adaptive) {
            const double bound_here = mag + E / dpow;
            if (bound_here <= tol * std::max(1.0, std::abs(out.value))) break;
            if (mag > prev_mag) break;  // past the optimal truncation point
        }
        out.value += term;
        prev_mag = mag;
        D *= -static_cast<double>(p + 1) / (x + static_cast<double>(p + 1));
        rp *= ratio;
        E *= static_cast<double>(p + 1) / (y + static_cast<double>(p + 1));
        dpow *= d;
    }
    out.levels_used = p;
    const double term_mag = std::abs(D) * std::abs(rp) / d;
    out.bound = term_mag + E / dpow;
    return out;
}

}  // namespace

DivisorSum small_divisor_sum(Complex lambda, std::int64_t n, Complex u, std::int64_t m, const SumPolicy& policy)
{
    if (n < 1 || m < 0 || policy.K < 0 || policy.abel_levels < 0)
        throw DomainError("small_divisor_sum needs n >= 1, m >= 0, K >= 0");
    const Complex mu = unit_power(lambda, n);
    if (std::abs(mu - 1.0) <= kSmallDivisorCutoff)
        throw SmallDivisorError("lambda^n is within the small-divisor cutoff of 1");
    check_ray(u, m);

    // Explicit terms j = m..J-1, with J pushed right until Re(u+J) >= 1 so the
    // remainder bound is finite.
    std::int64_t J = m + policy.K + 1;
    const double need = std::ceil(1.0 - u.real());
    if (static_cast<double>(J) < need) J = static_cast<std::int64_t>(need);

    ComplexDD pw(unit_power(lambda, n * m));
    const ComplexDD mu_dd(mu);
    Complex acc{};
    for (std::int64_t j = m; j < J; ++j) {
        acc += pw.to_complex() / (u + static_cast<double>(j));
        pw = pw * mu_dd;
    }
    const AbelTail tail = abel_tail(mu, pw.to_complex(), u + static_cast<double>(J), policy.abel_levels, 0.0);
    return {acc + tail.value, tail.bound};
}

DivisorSum oscillatory_sum(Complex mu, Complex u, std::int64_t m, double tol)
{
    const double d = std::abs(1.0 - mu);
    if (d <= kSmallDivisorCutoff) throw SmallDivisorError("mu is within the small-divisor cutoff of 1");
    check_ray(u, m);
    // Start the Euler transform where d * Re(x) >= 40: the boundary terms then
    // decay well past double precision before turning around.
    const double target = std::max(1.0, 40.0 / d);
    std::int64_t J = m;
    if (u.real() + static_cast<double>(J) < target)
        J = static_cast<std::int64_t>(std::ceil(target - u.real()));
    Complex pw = std::pow(mu, static_cast<double>(m));
    if (m == 0) pw = 1.0;
    Complex acc{};
    for (std::int64_t j = m; j < J; ++j) {
        acc += pw / (u + static_cast<double>(j));
        pw *= mu;
        if (((j - m) & 255) == 255) pw /= std::abs(pw);
    }
    AbelTail tail = abel_tail(mu, pw, u + static_cast<double>(J), -1, tol);
    return {acc + tail.value, tail.bound};
}

Complex plain_truncated_sum(Complex mu, Complex u, std::int64_t m, std::int64_t K)
{
    Complex pw = std::pow(mu, static_cast<double>(m));
    Complex acc{};
    for (std::int64_t j = m; j <= m + K; ++j) {
        acc += pw / (u + static_cast<double>(j));
        pw *= mu;
    }
    return acc;
}

std::vector<Complex> cauchy_coefficients(const std::function<Complex(Complex)>& f, Complex center, double radius,
                                         int samples, int count)
{
    std::vector<Complex> values(samples);
    for (int j = 0; j < samples; ++j) values[j] = f(center + std::polar(radius, kTwoPi * j / samples));
    std::vector<Complex> a(count);
    for (int k = 0; k < count; ++k) {
        Complex acc{};
        for (int j = 0; j < samples; ++j) {
            const long phase = (static_cast<long>(j) * k) % samples;
            acc += values[j] * std::polar(1.0, -kTwoPi * static_cast<double>(phase) / samples);
        }
        a[k] = acc / (static_cast<double>(samples) * std::pow(radius, k));
    }
    return a;
}

WindingResult winding_number(const std::function<Complex(Complex)>& f, Complex center, double radius, int samples,
                             double zero_threshold)
{
    WindingResult r;
    std::vector<Complex> v(samples);
    r.min_modulus = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
        v[j] = f(center + std::polar(radius, kTwoPi * j / samples));
        r.min_modulus = std::min(r.min_modulus, std::abs(v[j]));
    }
    if (!(r.min_modulus > zero_threshold)) {
        r.inconclusive = true;
        return r;
    }
    double total = 0.0;
    for (int j = 0; j < samples; ++j) {
        const double step = std::arg(v[(j + 1) % samples] / v[j]);
        if (std::abs(step) > kPi / 2) r.inconclusive = true;
        total += step;
    }
    r.winding = static_cast<int>(std::lround(total / kTwoPi));
    return r;
}

NewtonResult damped_newton(const std::function<Complex(Complex)>& F, const std::function<Complex(Complex)>& dF,
                           Complex x0, double tol, int max_iter, const std::function<bool(Complex)>& admissible)
{
    Complex x = x0;
    Complex fx = F(x);
    for (int it = 0; it <= max_iter; ++it) {
        if (!std::isfinite(std::abs(fx))) break;
        if (std::abs(fx) <= tol) return {x, it, std::abs(fx)};
        if (it == max_iter) break;
        const Complex d = dF(x);
        if (d == Complex{} || !std::isfinite(std::abs(d))) break;
        const Complex step = fx / d;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
            return {x, it, std::abs(fx)};
        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h, t *= 0.5) {
            const Complex xn = x - t * step;
            if (admissible && !admissible(xn)) continue;
            const Complex fn = F(xn);
            if (std::abs(fn) < std::abs(fx)) {
                x = xn;
                fx = fn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    throw NoConvergenceError("damped Newton did not converge");
}

FitResult least_squares(const std::vector<std::vector<double>>& rows, std::span<const Complex> y)
{
    const std::size_t n = rows.size();
    if (n == 0 || y.size() != n) throw DomainError("least_squares: shape mismatch");
    const std::size_t p = rows.front().size();
    if (n < p) throw IllConditionedError("least_squares: fewer samples than unknowns");
    // Modified Gram-Schmidt on scaled columns.
    std::vector<std::vector<double>> q(p, std::vector<double>(n));
    std::vector<double> scale(p);
    for (std::size_t c = 0; c < p; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < n; ++r) s = std::max(s, std::abs(rows[r][c]));
        scale[c] = s > 0.0 ? s : 1.0;
        for (std::size_t r = 0; r < n; ++r) q[c][r] = rows[r][c] / scale[c];
    }
    std::vector<std::vector<double>> R(p, std::vector<double>(p, 0.0));
    for (std::size_t c = 0; c < p; ++c) {
        for (std::size_t k = 0; k < c; ++k) {
            double dot = 0.0;
            for (std::size_t r = 0; r < n; ++r) dot += q[k][r] * q[c][r];
            R[k][c] = dot;
            for (std::size_t r = 0; r < n; ++r) q[c][r] -= dot * q[k][r];
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < n; ++r) nrm += q[c][r] * q[c][r];
        nrm = std::sqrt(nrm);
        if (nrm < 1e-13) throw IllConditionedError("least_squares: dependent basis columns");
        R[c][c] = nrm;
        for (std::size_t r = 0; r < n; ++r) q[c][r] /= nrm;
    }
    std::vector<Complex> qty(p);
    for (std::size_t c = 0; c < p; ++c)
        for (std::size_t r = 0; r < n; ++r) qty[c] += q[c][r] * y[r];
    FitResult out;
    out.coeffs.assign(p, Complex{});
    for (std::size_t c = p; c-- > 0;) {
        Complex s = qty[c];
        for (std::size_t k = c + 1; k < p; ++k) s -= R[c][k] * out.coeffs[k];
        out.coeffs[c] = s / R[c][c];
    }
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        Complex fit{};
        for (std::size_t c = 0; c < p; ++c) fit += rows[r][c] / scale[c] * out.coeffs[c];
        ss += std::norm(y[r] - fit);
    }
    for (std::size_t c = 0; c < p; ++c) out.coeffs[c] /= scale[c];
    out.rms = std::sqrt(ss / static_cast<double>(n));
    return out;
}

}  // namespace pcyl
