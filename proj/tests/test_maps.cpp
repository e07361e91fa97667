#include "doctest.h"

#include <cmath>
#include <random>

#include "pcyl/maps.hpp"

using namespace pcyl;

namespace {

const RotationNumber& rot()
{
    static const RotationNumber r = golden_rotation(1000);
    return r;
}

// Five factors written out by hand.
Point2 hand_composition(Complex z, Complex w)
{
    const Complex lam = rot().lambda;
    w = lam * w + z;
    z = z * std::exp(w);
    w = w - z;
    z = z * std::exp(-w);
    w = w * std::exp(z);
    return {z, w};
}

}  // namespace

TEST_CASE("explicit word and spec")
{
    const ExplicitMap s = explicit_map(rot());
    CHECK(s.word.factors.size() == 5);
    CHECK(s.spec.f_series.coeffs[0] == Complex(1.0));
    CHECK(s.spec.g_series.coeffs[0] == Complex{});
    CHECK(s.spec.g_series.coeffs[1] == Complex{});
    const Complex lam = rot().lambda;
    CHECK(std::abs(s.spec.g_series.coeffs[2] + lam * lam / 2.0) < 1e-16);

    for (Complex w : {Complex(0.3, 0.0), Complex(1.0, 2.0), Complex(-7.0, 3.0)}) {
        const Point2 q = apply(s.word, {0.0, w});
        CHECK(q.z == Complex{});
        CHECK(std::abs(q.w - lam * w) <= 1e-15 * std::abs(w));
    }
}

TEST_CASE("apply matches the hand composition")
{
    const ExplicitMap s = explicit_map(rot());
    CHECK(apply(ShearWord{}, Point2{{0.2, 0.1}, {1.0, -1.0}}).z == Complex(0.2, 0.1));
    const Point2 q = apply(s.word, {0.1, 0.2});
    const Point2 r = hand_composition(0.1, 0.2);
    CHECK(std::abs(q.z - r.z) < 1e-15);
    CHECK(std::abs(q.w - r.w) < 1e-15);
    CHECK_FALSE(q.escaped);
}

TEST_CASE("axis invariance for large w")
{
    const ExplicitMap s = explicit_map(rot());
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const Complex w{700.0 * U(rng), 700.0 * U(rng)};
        const Point2 q = apply(s.word, {0.0, w});
        CHECK_FALSE(q.escaped);
        CHECK(q.z == Complex{});
        CHECK(std::abs(q.w - rot().lambda * w) <= 4e-16 * std::abs(w));
    }
}

TEST_CASE("inverse word")
{
    const ExplicitMap s = explicit_map(rot());
    const ShearWord inv = s.word.inverse();
    CHECK(inv.factors.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        const ElementaryMap twice = inv.factors[4 - i].inverse();
        CHECK(twice.kind == s.word.factors[i].kind);
        CHECK(std::abs(twice.c1 - s.word.factors[i].c1) < 1e-15);
        CHECK(std::abs(twice.scale - s.word.factors[i].scale) < 1e-15);
    }
    const Complex w{0.4, -0.7};
    const Point2 back = apply_inverse(s.word, {0.0, w});
    CHECK(std::abs(back.w - std::conj(rot().lambda) * w) < 1e-15);
    CHECK(back.z == Complex{});

    const Point2 p{0.3, Complex(0.0, -0.2)};
    const Point2 rt = apply(s.word, apply_inverse(s.word, p));
    CHECK(std::abs(rt.z - p.z) + std::abs(rt.w - p.w) <= 1e-10);
    const Point2 rt2 = apply_inverse(s.word, apply(s.word, p));
    CHECK(std::abs(rt2.z - p.z) + std::abs(rt2.w - p.w) <= 1e-10);

    // Exponential factors invert through the negated tag.
    ElementaryMap e;
    e.kind = ShearKind::multiplicative;
    e.tag = FuncTag::exp;
    e.c1 = {0.5, 0.1};
    e.a = {0.0, 1.0};
    ShearWord w2{{e, ElementaryMap::shear(Axis::second, {2.0, 1.0}, 0.3, {0.0, 1.0})}};
    const Point2 p2{{0.2, 0.4}, {-0.3, 0.1}};
    const Point2 r2 = apply_inverse(w2, apply(w2, p2));
    CHECK(std::abs(r2.z - p2.z) + std::abs(r2.w - p2.w) < 1e-14);
}

TEST_CASE("round trip on moderate bidiscs")
{
    const ExplicitMap s = explicit_map(rot());
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto sample = [&](double radius) {
        return std::polar(radius * std::sqrt(U(rng)), kTwoPi * U(rng));
    };
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Point2 p{sample(0.5), sample(0.5)};
        const Point2 q = apply(s.word, apply_inverse(s.word, p));
        REQUIRE_FALSE(q.escaped);
        worst = std::max(worst, std::hypot(std::abs(q.z - p.z), std::abs(q.w - p.w)));
    }
    CHECK(worst <= 1e-10);
}

TEST_CASE("escape flag")
{
    const ExplicitMap s = explicit_map(rot());
    const Point2 q = apply_n(s.word, {3.0, 3.0}, 100);
    CHECK(q.escaped);
    const PointDD qd = apply(s.word, PointDD{ComplexDD(Complex(1e60, 0.0)), ComplexDD(Complex(1e60, 0.0))});
    CHECK(qd.escaped);
}

TEST_CASE("double-double word evaluation agrees with double")
{
    const ExplicitMap s = explicit_map(rot());
    const Point2 p{{-0.05, 0.01}, {0.1, -0.2}};
    const Point2 q = apply(s.word, p);
    const PointDD qd = apply(s.word, PointDD{ComplexDD(p.z), ComplexDD(p.w)});
    CHECK(std::abs(qd.z.to_complex() - q.z) < 1e-15);
    CHECK(std::abs(qd.w.to_complex() - q.w) < 1e-15);
}

TEST_CASE("z^2 coefficient extraction")
{
    const ExplicitMap s = explicit_map(rot());
    const Complex lam = rot().lambda;
    CHECK(std::abs(extract_z2_coefficient(s.word, 0.0) - 1.0) < 1e-8);
    CHECK(std::abs(extract_z2_coefficient(s.word, 1.0) - std::exp(lam)) < 1e-6);
    const Complex probe = Complex(0.0, kPi) / lam;
    const Complex c1 = extract_z2_coefficient(s.word, probe, 64, 1e-3);
    const Complex c2 = extract_z2_coefficient(s.word, probe, 64, 5e-4);
    CHECK(std::abs(c1 - c2) <= 1e-8);
    for (int i = 0; i < 24; ++i) {
        const Complex w = std::polar(2.0 * (i % 4 + 1) / 4.0, kTwoPi * i / 24.0);
        CHECK(std::abs(extract_z2_coefficient(s.word, w) - series_eval(s.spec.f_series, w)) <= 1e-6);
    }
    CHECK(std::abs(extract_z2_coefficient(s.word.inverse(), 0.0) + 1.0) < 1e-6);
}

TEST_CASE("boundary growth")
{
    const ExplicitMap s = explicit_map(rot());
    const BoundaryGrowth b0 = boundary_growth(s.spec, s.word, 0.0, 17);
    CHECK(b0.closed == Complex(34.0, 0.0));
    const BoundaryGrowth b1 = boundary_growth(s.spec, s.word, {0.3, 0.1}, 1);
    CHECK(std::abs(b1.closed - 2.0 * std::exp(rot().lambda * Complex(0.3, 0.1))) < 1e-14);
    CHECK(std::abs(b1.numeric - b1.closed) < 1e-6);
    for (std::int64_t n : {1, 10, 100, 1000}) {
        const BoundaryGrowth b = boundary_growth(s.spec, s.word, 0.5, n);
        CHECK(std::abs(b.closed - b.numeric) <= 1e-4 * static_cast<double>(n));
    }
}

TEST_CASE("jacobian determinant")
{
    const ExplicitMap s = explicit_map(rot());
    const Complex j00 = jacobian_determinant(s.word, {0.0, 0.0});
    const Complex j01 = jacobian_determinant(s.word, {0.0, 1.0});
    CHECK(std::abs(j00 - rot().lambda) < 1e-10);
    CHECK(std::abs(j01 - rot().lambda) < 1e-10);  // constant along the axis
    const Complex joff = jacobian_determinant(s.word, {0.1, 1.0});
    CHECK(std::abs(joff - jacobian_determinant_exact(s.word, {0.1, 1.0})) < 1e-9);
    CHECK(std::abs(joff - j00) > 1e-3);
}

TEST_CASE("shear word JSON round trip")
{
    const ExplicitMap s = explicit_map(rot());
    const ShearWord back = word_from_json(word_to_json(s.word));
    REQUIRE(back.factors.size() == s.word.factors.size());
    const Point2 p{{0.1, -0.05}, {0.3, 0.2}};
    const Point2 a = apply(s.word, p);
    const Point2 b = apply(back, p);
    CHECK(a.z == b.z);
    CHECK(a.w == b.w);
    CHECK_THROWS_AS(word_from_json("{}"), ConfigError);
    CHECK_THROWS_AS(word_from_json("[{\"kind\":\"twist\",\"axis\":\"first\"}]"), ConfigError);
}
