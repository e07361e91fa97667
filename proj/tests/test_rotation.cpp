#include "doctest.h"

#include <cmath>

#include "pcyl/rotation.hpp"

using namespace pcyl;

TEST_CASE("golden rotation")
{
    const RotationNumber rot = golden_rotation();
    CHECK(rot.cf.size() >= 20);
    for (int a : rot.cf) CHECK(a == 1);
    CHECK(std::abs(std::abs(rot.lambda) - 1.0) < 1e-15);
    CHECK(rot.theta.hi == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-16));
    CHECK(rot.dio_c > 0.0);
    CHECK_FALSE(rot.resonant);

    // Independent scan: n |lambda^n - 1| with lambda^n by std::polar on a
    // long-double angle.
    const long double theta = (std::sqrt(5.0L) - 1.0L) / 2.0L;
    double c = 1e300;
    for (int n = 1; n <= 100000; ++n) {
        long double f = std::fmod(theta * n, 1.0L);
        c = std::min(c, static_cast<double>(n * 2.0L * std::fabs(std::sin(3.14159265358979323846L * f))));
    }
    CHECK(rot.dio_c == doctest::Approx(c).epsilon(1e-9));
}

TEST_CASE("continued-fraction input")
{
    const RotationNumber quarter = rotation_from_cf({4}, false, 1.0, 100);
    CHECK(quarter.theta.hi == 0.25);
    CHECK(quarter.resonant);
    CHECK(diophantine_fit(quarter, 1.0, 4).resonant);

    const RotationNumber golden_again = rotation_from_cf({1}, true);
    const RotationNumber golden = golden_rotation();
    CHECK(std::abs((golden_again.theta - golden.theta).to_double()) < 1e-30);

    const RotationNumber silver = rotation_from_cf({2}, true, 1.0, 1000);
    CHECK(silver.theta.hi == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    CHECK(silver.cf.front() == 2);
    CHECK_THROWS_AS(rotation_from_cf({}, false), ConfigError);
    CHECK_THROWS_AS(rotation_from_cf({1, 0}, false), ConfigError);

    const RotationNumber from_theta = rotation_from_theta(golden.theta, 1.0, 100);
    CHECK(from_theta.cf.size() >= 20);
    for (int a : from_theta.cf) CHECK(a == 1);
}

TEST_CASE("lambda_power")
{
    const RotationNumber rot = golden_rotation(1000);
    CHECK(lambda_power(rot, 0) == Complex(1.0, 0.0));
    const Complex a = lambda_power(rot, 1000000);
    const Complex b = lambda_power(rot, -1000000);
    CHECK(std::abs(a * b - 1.0) < 1e-14);
    CHECK(b == std::conj(a));

    Complex naive{1.0, 0.0};
    for (int k = 0; k < 10000; ++k) naive *= rot.lambda;
    CHECK(std::abs(lambda_power(rot, 10000) - naive) <= 1e-10);

    // Homomorphism property.
    for (std::int64_t x : {-999999, -12345, 0, 7, 31337, 1000000})
        for (std::int64_t y : {-1000000, -3, 1, 4242, 999999})
            CHECK(std::abs(lambda_power(rot, x + y) - lambda_power(rot, x) * lambda_power(rot, y)) < 1e-12);
}

TEST_CASE("diophantine_fit")
{
    const RotationNumber rot = golden_rotation(1000);
    CHECK(diophantine_fit(rot, 1.0, 1).c == doctest::Approx(std::abs(rot.lambda - 1.0)).epsilon(1e-14));
    const double c3 = diophantine_fit(rot, 1.0, 1000).c;
    const double c5 = diophantine_fit(rot, 1.0, 100000).c;
    CHECK(c3 >= c5);
    CHECK(c5 > 0.0);

    // Monotone in Nmax and invariant under theta -> 1 - theta.
    const RotationNumber mirror = rotation_from_theta(DoubleDouble(1.0) - rot.theta, 1.0, 1000);
    double prev = 1e300;
    for (std::int64_t N : {1, 2, 5, 10, 50, 300, 1000, 5000}) {
        const double c = diophantine_fit(rot, 1.0, N).c;
        CHECK(c <= prev);
        prev = c;
        CHECK(diophantine_fit(mirror, 1.0, N).c == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("verify_sum_bound")
{
    const RotationNumber rot = golden_rotation(1000);
    SumBoundReport rep = verify_sum_bound(rot, 8, 2000);
    CHECK(rep.pass);
    CHECK(rep.max_ratio <= 1.0 + 1e-9);

    // Single-term sums: ratio = |lambda^n - 1|/2.
    rep = verify_sum_bound(rot, 1, 0 + 1, {1});
    CHECK(rep.max_ratio == doctest::Approx(std::abs(rot.lambda - 1.0) / 2.0).epsilon(1e-12));

    const RotationNumber quarter = rotation_from_cf({4}, false, 1.0, 100);
    rep = verify_sum_bound(quarter, 4, 1000, {0});
    CHECK_FALSE(rep.pass);
    CHECK(rep.resonant_n == 4);
    CHECK(rep.resonant_growth == doctest::Approx(1001.0));
}
