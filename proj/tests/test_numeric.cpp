#include "doctest.h"

#include <cmath>
#include <random>

#include "pcyl/numeric.hpp"
#include "pcyl/rotation.hpp"

using namespace pcyl;

namespace {

// Partial sums of sum_{j>=m} mu^j/(u+j) up to N, averaged over the last
// `window` values of N (Cesaro mean), independent of the Abel machinery.
Complex brute_force_sum(const RotationNumber& rot, std::int64_t n, Complex u, std::int64_t m, std::int64_t N,
                        std::int64_t window)
{
    Complex acc{}, mean{};
    const Complex step = lambda_power(rot, n);
    Complex term{};
    for (std::int64_t j = m; j <= N; ++j) {
        if (((j - m) % 4096) == 0) term = lambda_power(rot, n * j);
        acc += term / (u + static_cast<double>(j));
        term *= step;
        if (j > N - window) mean += acc;
    }
    return mean / static_cast<double>(window);
}

}  // namespace

TEST_CASE("double-double arithmetic keeps about 32 digits")
{
    DoubleDouble one(1.0);
    DoubleDouble third = one / DoubleDouble(3.0);
    DoubleDouble back = third * DoubleDouble(3.0) - one;
    CHECK(std::abs(back.to_double()) < 1e-31);

    DoubleDouble e = exp(one);
    CHECK(e.hi == doctest::Approx(std::exp(1.0)).epsilon(1e-16));
    CHECK(std::abs((e * exp(-one) - one).to_double()) < 1e-30);

    DoubleDouble s, c;
    sincos(DoubleDouble(1.0), s, c);
    CHECK(s.hi == doctest::Approx(std::sin(1.0)).epsilon(1e-16));
    CHECK(std::abs((s * s + c * c - one).to_double()) < 1e-30);

    DoubleDouble r5 = sqrt(DoubleDouble(5.0));
    CHECK(std::abs((r5 * r5 - DoubleDouble(5.0)).to_double()) < 1e-30);
    CHECK(std::abs((log(e) - one).to_double()) < 1e-30);
}

TEST_CASE("series_eval basics")
{
    TruncatedSeries zero;
    zero.coeffs.assign(5, Complex{});
    CHECK(series_eval(zero, {0.3, 0.2}) == Complex{});

    TruncatedSeries s;
    s.coeffs = {{2.0, 1.0}, {3.0, 0.0}, {-1.0, 0.5}};
    s.validity_radius = 1.0;
    CHECK(series_eval(s, 0.0) == Complex(2.0, 1.0));
    CHECK_THROWS_AS(series_eval(s, 1.5), DomainError);
}

TEST_CASE("exp_scaled_series")
{
    const RotationNumber rot = golden_rotation(1000);
    const Complex lam = rot.lambda;
    TruncatedSeries s = exp_scaled_series(lam, 30, 2.0);
    CHECK(s.degree() == 30);
    CHECK(s.coeffs[0] == Complex(1.0));
    CHECK(std::abs(s.coeffs[2] - lam * lam / 2.0) < 1e-16);
    CHECK(std::abs(series_eval(s, 1.0) - std::exp(lam)) <= 1e-12);

    // Dense sampling of the disc: truncation error stays under the analytic bound.
    double worst = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Complex w = std::polar(2.0 * std::sqrt(U(rng)), kTwoPi * U(rng));
        worst = std::max(worst, std::abs(series_eval(s, w) - std::exp(lam * w)));
    }
    for (int i = 0; i < 64; ++i) {
        const Complex w = std::polar(2.0, kTwoPi * i / 64.0);
        worst = std::max(worst, std::abs(series_eval(s, w) - std::exp(lam * w)));
    }
    CHECK(worst <= s.tail_bound + 1e-13);
    CHECK(s.tail_bound > 0.0);
}

TEST_CASE("lambda_partial_sum")
{
    const Complex i{0.0, 1.0};
    CHECK(std::abs(lambda_partial_sum(i, 1, 0, 3)) < 1e-15);

    const RotationNumber rot = golden_rotation(1000);
    const Complex lam = rot.lambda;
    CHECK(std::abs(lambda_partial_sum(lam, 3, 7, 7) - unit_power(lam, 21)) < 1e-14);

    Complex direct{};
    Complex t{1.0, 0.0};
    for (int j = 0; j <= 10000; ++j) {
        direct += t;
        t *= lam;
    }
    const Complex closed = lambda_partial_sum(lam, 1, 0, 10000);
    CHECK(std::abs(closed - direct) < 1e-9);
    CHECK(std::abs(closed) <= 2.0 / std::abs(lam - 1.0));

    // Telescoping.
    for (std::int64_t P : {0, 5, 99, 998}) {
        const Complex whole = lambda_partial_sum(lam, 2, 0, 999);
        const Complex split = lambda_partial_sum(lam, 2, 0, P) + lambda_partial_sum(lam, 2, P + 1, 999);
        CHECK(std::abs(whole - split) <= 4.0 * 2.3e-16 * std::max(1.0, std::abs(whole)) * 4.0);
    }

    // Near-resonant multipliers fall back to direct accumulation.
    const Complex near_one = std::polar(1.0, 1e-10);
    const Complex s = lambda_partial_sum(near_one, 1, 0, 9);
    CHECK(std::abs(s - 10.0) < 1e-6);
}

TEST_CASE("unit_power has no multiplicative drift")
{
    const RotationNumber rot = golden_rotation(1000);
    Complex naive{1.0, 0.0};
    for (int k = 0; k < 10000; ++k) naive *= rot.lambda;
    CHECK(std::abs(unit_power(rot.lambda, 10000) - naive) < 1e-10);
    CHECK(std::abs(std::abs(unit_power(rot.lambda, 1000000)) - 1.0) < 1e-14);
    CHECK(std::abs(unit_power(rot.lambda, -37) * unit_power(rot.lambda, 37) - 1.0) < 1e-14);
}

TEST_CASE("small_divisor_sum")
{
    const RotationNumber rot = golden_rotation(1000);
    const Complex lam = rot.lambda;

    SUBCASE("K = 0 keeps only the first term plus the Abel tail")
    {
        const Complex u{3.0, 1.0};
        const std::int64_t m = 4;
        const DivisorSum s = small_divisor_sum(lam, 2, u, m, {0, 0});
        CHECK(std::abs(s.value - unit_power(lam, 2 * m) / (u + 4.0)) < 1e-15);
        CHECK(s.tail_estimate > 0.0);
    }

    SUBCASE("agrees with long brute-force summation")
    {
        const DivisorSum s = small_divisor_sum(lam, 1, 100.0, 0, {10000, 1});
        const Complex brute = brute_force_sum(rot, 1, 100.0, 0, 10000000, 1000000);
        CHECK(std::abs(s.value - brute) <= 1e-8);
        CHECK(s.tail_estimate < 1e-8);
    }

    SUBCASE("doubling K moves the value by at most the previous tail estimate")
    {
        for (std::int64_t n : {1, 2, 5, 13}) {
            for (Complex u : {Complex(100.0, 0.0), Complex(10.0, 20.0), Complex(-3.5, 2.0)}) {
                std::int64_t K = 50;
                DivisorSum prev = small_divisor_sum(lam, n, u, 0, {K, 1});
                for (int rep = 0; rep < 5; ++rep) {
                    K *= 2;
                    DivisorSum next = small_divisor_sum(lam, n, u, 0, {K, 1});
                    CHECK(std::abs(next.value - prev.value) <= prev.tail_estimate);
                    prev = next;
                }
            }
        }
    }

    SUBCASE("bound |value| <= C n^r / |u + m| over a grid")
    {
        // Fit C on the grid, then confirm it is finite and moderate.
        double C = 0.0;
        for (std::int64_t n = 1; n <= 32; ++n)
            for (double x : {10.0, 20.0, 40.0, 80.0})
                for (double y : {-30.0, -5.0, 0.0, 5.0, 30.0}) {
                    const Complex u{x, y};
                    const DivisorSum s = small_divisor_sum(lam, n, u, 0, {2000, 1});
                    C = std::max(C, std::abs(s.value) * std::abs(u) / std::pow(static_cast<double>(n), rot.dio_r));
                }
        CHECK(std::isfinite(C));
        CHECK(C < 2.0 / rot.dio_c + 1.0);
    }

    SUBCASE("errors")
    {
        CHECK_THROWS_AS(small_divisor_sum(lam, 1, Complex(-3.0, 0.0), 0), DomainError);
        CHECK_THROWS_AS(small_divisor_sum(Complex(0.0, 1.0), 4, 10.0, 0), SmallDivisorError);
    }

    SUBCASE("adaptive evaluator agrees with the fixed policy")
    {
        for (std::int64_t n : {1, 2, 3, 7, 21}) {
            const Complex mu = unit_power(lam, n);
            for (Complex u : {Complex(50.0, 0.0), Complex(5.0, -40.0), Complex(-20.0, 3.0)}) {
                const DivisorSum a = oscillatory_sum(mu, u, 1);
                const DivisorSum b = small_divisor_sum(lam, n, u, 1, {200000, 2});
                CHECK(std::abs(a.value - b.value) <= 1e-12);
                CHECK(a.tail_estimate < 1e-14);
            }
        }
    }

    SUBCASE("plain truncation oracle")
    {
        const Complex brute = plain_truncated_sum(lam, 100.0, 0, 1000000);
        const DivisorSum s = small_divisor_sum(lam, 1, 100.0, 0);
        CHECK(std::abs(s.value - brute) < 1e-6);
    }
}

TEST_CASE("cauchy coefficients and winding numbers")
{
    auto f = [](Complex z) { return std::exp(2.0 * z); };
    auto a = cauchy_coefficients(f, 0.0, 0.5, 32, 6);
    CHECK(std::abs(a[0] - 1.0) < 1e-14);
    CHECK(std::abs(a[3] - 8.0 / 6.0) < 1e-12);

    auto g = [](Complex z) { return z * z - 0.25; };
    WindingResult w = winding_number(g, 0.0, 1.0, 64, 1e-9);
    CHECK_FALSE(w.inconclusive);
    CHECK(w.winding == 2);
    w = winding_number(g, 0.5, 0.2, 64, 1e-9);
    CHECK(w.winding == 1);
    w = winding_number(g, 0.0, 0.5, 64, 1e-9);
    CHECK(w.inconclusive);
}

TEST_CASE("damped newton and least squares")
{
    auto F = [](Complex x) { return x * x * x - 2.0; };
    auto dF = [](Complex x) { return 3.0 * x * x; };
    NewtonResult r = damped_newton(F, dF, 1.0, 1e-13, 50);
    CHECK(std::abs(r.root - std::cbrt(2.0)) < 1e-13);
    auto G = [](Complex x) { return std::exp(x) + 1e-300 * x; };
    auto dG = [](Complex x) { return std::exp(x); };
    CHECK_THROWS_AS(damped_newton(G, dG, Complex(0.0, 0.0), 1e-12, 5), NoConvergenceError);

    std::vector<std::vector<double>> rows;
    std::vector<Complex> y;
    for (int n = 10; n < 200; ++n) {
        rows.push_back({1.0, std::log(n)});
        y.push_back(Complex(2.0, 1.0) + Complex(3.0, -0.5) * std::log(n));
    }
    FitResult fit = least_squares(rows, y);
    CHECK(std::abs(fit.coeffs[0] - Complex(2.0, 1.0)) < 1e-10);
    CHECK(std::abs(fit.coeffs[1] - Complex(3.0, -0.5)) < 1e-10);
    CHECK(fit.rms < 1e-10);
}
