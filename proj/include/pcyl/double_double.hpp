#pragma once

// Double-double real and complex arithmetic (about 106 bits of mantissa).
// Used where phases compound over very long orbits: frac(n*theta) for large n
// and orbit iteration past n ~ 1e5.

#include <cmath>
#include <complex>
#include <cstdint>

namespace pcyl {

struct DoubleDouble {
    double hi = 0.0;
    double lo = 0.0;

    constexpr DoubleDouble() = default;
    constexpr DoubleDouble(double h) : hi(h), lo(0.0) {}
    constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

    explicit operator double() const { return hi + lo; }
    double to_double() const { return hi + lo; }
};

namespace dd_detail {

inline DoubleDouble two_sum(double a, double b)
{
    double s = a + b;
    double bb = s - a;
    double e = (a - (s - bb)) + (b - bb);
    return {s, e};
}

inline DoubleDouble quick_two_sum(double a, double b)
{
    double s = a + b;
    return {s, b - (s - a)};
}

inline DoubleDouble two_prod(double a, double b)
{
    double p = a * b;
    return {p, std::fma(a, b, -p)};
}

}  // namespace dd_detail

inline DoubleDouble operator+(DoubleDouble a, DoubleDouble b)
{
    using namespace dd_detail;
    DoubleDouble s = two_sum(a.hi, b.hi);
    DoubleDouble t = two_sum(a.lo, b.lo);
    s.lo += t.hi;
    s = quick_two_sum(s.hi, s.lo);
    s.lo += t.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline DoubleDouble operator-(DoubleDouble a) { return {-a.hi, -a.lo}; }
inline DoubleDouble operator-(DoubleDouble a, DoubleDouble b) { return a + (-b); }

inline DoubleDouble operator*(DoubleDouble a, DoubleDouble b)
{
    using namespace dd_detail;
    DoubleDouble p = two_prod(a.hi, b.hi);
    p.lo += a.hi * b.lo + a.lo * b.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline DoubleDouble operator/(DoubleDouble a, DoubleDouble b)
{
    // Two Newton corrections on the double quotient.
    double q1 = a.hi / b.hi;
    DoubleDouble r = a - b * DoubleDouble(q1);
    double q2 = r.hi / b.hi;
    r = r - b * DoubleDouble(q2);
    double q3 = r.hi / b.hi;
    DoubleDouble q = dd_detail::quick_two_sum(q1, q2);
    return q + DoubleDouble(q3);
}

inline DoubleDouble& operator+=(DoubleDouble& a, DoubleDouble b) { return a = a + b; }
inline DoubleDouble& operator-=(DoubleDouble& a, DoubleDouble b) { return a = a - b; }
inline DoubleDouble& operator*=(DoubleDouble& a, DoubleDouble b) { return a = a * b; }
inline DoubleDouble& operator/=(DoubleDouble& a, DoubleDouble b) { return a = a / b; }

inline bool operator<(DoubleDouble a, DoubleDouble b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(DoubleDouble a, DoubleDouble b) { return b < a; }
inline bool operator==(DoubleDouble a, DoubleDouble b) { return a.hi == b.hi && a.lo == b.lo; }

inline DoubleDouble ldexp(DoubleDouble a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }
inline DoubleDouble abs(DoubleDouble a) { return a.hi < 0 ? -a : a; }

inline DoubleDouble floor(DoubleDouble a)
{
    double fh = std::floor(a.hi);
    if (fh != a.hi) return {fh, 0.0};
    return dd_detail::quick_two_sum(fh, std::floor(a.lo));
}

inline DoubleDouble sqrt(DoubleDouble a)
{
    if (a.hi <= 0.0) return {0.0, 0.0};
    double x = 1.0 / std::sqrt(a.hi);
    double ax = a.hi * x;
    DoubleDouble diff = a - dd_detail::two_prod(ax, ax);
    return dd_detail::two_sum(ax, diff.hi * (x * 0.5));
}

namespace dd_const {
inline constexpr DoubleDouble ln2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr DoubleDouble two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr DoubleDouble pi{3.141592653589793116e+00, 1.224646799147353207e-16};
}  // namespace dd_const

inline DoubleDouble exp(DoubleDouble a)
{
    if (a.hi > 709.0) return {HUGE_VAL, 0.0};
    if (a.hi < -745.0) return {0.0, 0.0};
    const double k = std::nearbyint(a.hi / dd_const::ln2.hi);
    DoubleDouble r = a - dd_const::ln2 * DoubleDouble(k);
    constexpr int squarings = 10;
    r = ldexp(r, -squarings);
    // exp(r) - 1 by Taylor, |r| < 3.4e-4.
    DoubleDouble term = r;
    DoubleDouble sum = r;
    for (int i = 2; i <= 12; ++i) {
        term = term * r / DoubleDouble(static_cast<double>(i));
        sum += term;
        if (std::abs(term.hi) < 1e-36) break;
    }
    // (1+s)^2 - 1 = 2s + s^2 keeps the small part exact.
    for (int i = 0; i < squarings; ++i) sum = ldexp(sum, 1) + sum * sum;
    return ldexp(sum + DoubleDouble(1.0), static_cast<int>(k));
}

inline void sincos(DoubleDouble a, DoubleDouble& s, DoubleDouble& c)
{
    const double k = std::nearbyint(a.hi / dd_const::two_pi.hi);
    DoubleDouble r = a - dd_const::two_pi * DoubleDouble(k);
    constexpr int halvings = 8;
    r = ldexp(r, -halvings);
    DoubleDouble r2 = r * r;
    DoubleDouble sn = r;
    DoubleDouble term = r;
    for (int i = 3; i <= 25; i += 2) {
        term = -(term * r2) / DoubleDouble(static_cast<double>((i - 1) * i));
        sn += term;
        if (std::abs(term.hi) < 1e-36) break;
    }
    // cos(r) - 1 kept separately so the doublings do not lose it.
    DoubleDouble cm1 = -ldexp(r2, -1);
    term = cm1;
    for (int i = 4; i <= 26; i += 2) {
        term = -(term * r2) / DoubleDouble(static_cast<double>((i - 1) * i));
        cm1 += term;
        if (std::abs(term.hi) < 1e-36) break;
    }
    for (int i = 0; i < halvings; ++i) {
        // sin 2x = 2 sin x cos x, cos 2x - 1 = -2 sin^2 x
        DoubleDouble cs = cm1 + DoubleDouble(1.0);
        DoubleDouble new_s = ldexp(sn * cs, 1);
        cm1 = -ldexp(sn * sn, 1);
        sn = new_s;
    }
    s = sn;
    c = cm1 + DoubleDouble(1.0);
}

inline DoubleDouble log(DoubleDouble a)
{
    // Newton on exp(x) = a.
    DoubleDouble x(std::log(a.hi));
    for (int i = 0; i < 2; ++i) x = x + a / exp(x) - DoubleDouble(1.0);
    return x;
}

/// Complex number with double-double components.
struct ComplexDD {
    DoubleDouble re;
    DoubleDouble im;

    ComplexDD() = default;
    ComplexDD(DoubleDouble r, DoubleDouble i = DoubleDouble()) : re(r), im(i) {}
    ComplexDD(std::complex<double> z) : re(z.real()), im(z.imag()) {}

    std::complex<double> to_complex() const { return {re.to_double(), im.to_double()}; }
};

inline ComplexDD operator+(const ComplexDD& a, const ComplexDD& b) { return {a.re + b.re, a.im + b.im}; }
inline ComplexDD operator-(const ComplexDD& a, const ComplexDD& b) { return {a.re - b.re, a.im - b.im}; }
inline ComplexDD operator-(const ComplexDD& a) { return {-a.re, -a.im}; }
inline ComplexDD operator*(const ComplexDD& a, const ComplexDD& b)
{
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline ComplexDD operator/(const ComplexDD& a, const ComplexDD& b)
{
    DoubleDouble den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}

inline double abs(const ComplexDD& a) { return std::hypot(a.re.to_double(), a.im.to_double()); }

inline ComplexDD exp(const ComplexDD& a)
{
    DoubleDouble m = exp(a.re);
    DoubleDouble s, c;
    sincos(a.im, s, c);
    return {m * c, m * s};
}

/// e^{2 pi i x} for a double-double x.
inline ComplexDD unit_phase(DoubleDouble x)
{
    DoubleDouble frac = x - floor(x);
    DoubleDouble s, c;
    sincos(dd_const::two_pi * frac, s, c);
    return {c, s};
}

}  // namespace pcyl
