#pragma once

// Automorphisms of C^2 written as words in elementary shears and overshears.

#include <optional>
#include <string>
#include <vector>

#include "pcyl/numeric.hpp"
#include "pcyl/rotation.hpp"

namespace pcyl {

struct Point2 {
    Complex z;
    Complex w;
    bool escaped = false;
};

struct PointDD {
    ComplexDD z;
    ComplexDD w;
    bool escaped = false;
};

// Orbits are flagged escaped once a coordinate exceeds this modulus, or when an
// overshear underflows a nonzero coordinate to exactly zero.
inline constexpr double kOverflowGuard = 1e100;

enum class ShearKind { additive, multiplicative };
enum class Axis { first, second };
enum class FuncTag { linear, exp, negated_exp };

/// One factor. The moved coordinate x (selected by `axis`) becomes
///   additive:       scale * x + func(y)
///   multiplicative: x * exp(func(y))
/// where y is the other coordinate and
///   linear:      func(y) = c0 + c1 y
///   exp:         func(y) =  c1 e^{a y}
///   negated_exp: func(y) = -c1 e^{a y}
struct ElementaryMap {
    ShearKind kind = ShearKind::additive;
    Axis axis = Axis::first;
    FuncTag tag = FuncTag::linear;
    Complex scale{1.0, 0.0};
    Complex c0{};
    Complex c1{};
    Complex a{};

    static ElementaryMap shear(Axis axis, Complex scale, Complex c0, Complex c1);
    static ElementaryMap overshear(Axis axis, Complex c0, Complex c1);

    ElementaryMap inverse() const;
    Complex func(Complex y) const;
    Complex func_derivative(Complex y) const;
};

/// Factors are applied first to last.
struct ShearWord {
    std::vector<ElementaryMap> factors;

    ShearWord inverse() const;
};

/// Normal-form data: first coordinate z + f(w) z^2 + O(z^3), second
/// lambda w + z g(w) + O(z^2).
struct AutomorphismSpec {
    RotationNumber rot;
    TruncatedSeries f_series;
    TruncatedSeries g_series;
    std::optional<ShearWord> realization;
};

struct ExplicitMap {
    ShearWord word;
    AutomorphismSpec spec;
};

/// The five-factor example with f(w) = e^{lambda w}, g(w) = 1 + lambda w - e^{lambda w}.
ExplicitMap explicit_map(const RotationNumber& rot, int L = 30, double rho = 2.0);

Point2 apply(const ShearWord& word, Point2 p, double guard = kOverflowGuard);
Point2 apply_inverse(const ShearWord& word, Point2 p, double guard = kOverflowGuard);
PointDD apply(const ShearWord& word, PointDD p, double guard = kOverflowGuard);
PointDD apply_inverse(const ShearWord& word, PointDD p, double guard = kOverflowGuard);

/// n-fold iterate; stops as soon as the point escapes.
Point2 apply_n(const ShearWord& word, Point2 p, std::int64_t n, double guard = kOverflowGuard);

/// z^2 coefficient of z -> first coordinate of word(z, w) by a discrete
/// Cauchy integral on |z| = rho0.
Complex extract_z2_coefficient(const ShearWord& word, Complex w, int M = 64, double rho0 = 1e-3);

struct BoundaryGrowth {
    Complex closed;   // 2 sum_{k<n} f(lambda^k w)
    Complex numeric;  // d^2/dz^2 of the first coordinate of the n-th iterate at (0, w)
    double radius = 0.0;
};

BoundaryGrowth boundary_growth(const AutomorphismSpec& spec, const ShearWord& word, Complex w, std::int64_t n,
                               int M = 64);

/// Jacobian determinant of the word at p from discrete Cauchy derivatives.
Complex jacobian_determinant(const ShearWord& word, Point2 p, double radius = 1e-4, int M = 16);

/// Product of the factor determinants along the path of p (exact closed form).
Complex jacobian_determinant_exact(const ShearWord& word, Point2 p);

std::string to_string(ShearKind k);
std::string to_string(Axis a);
std::string to_string(FuncTag t);

/// JSON list of factor descriptors.
std::string word_to_json(const ShearWord& word);
ShearWord word_from_json(const std::string& text);

}  // namespace pcyl
