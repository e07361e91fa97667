#include "pcyl/maps.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

namespace pcyl {

namespace {

Complex cexp(Complex x) { return std::exp(x); }
ComplexDD cexp(const ComplexDD& x) { return exp(x); }
double cabs(Complex x) { return std::abs(x); }
double cabs(const ComplexDD& x) { return abs(x); }

bool is_zero(Complex x) { return x == Complex{}; }
bool is_zero(const ComplexDD& x) { return x.re.hi == 0.0 && x.im.hi == 0.0; }

template <class C>
C eval_func(const ElementaryMap& e, const C& y)
{
    switch (e.tag) {
    case FuncTag::linear:
        return C(e.c0) + C(e.c1) * y;
    case FuncTag::exp:
        return C(e.c1) * cexp(C(e.a) * y);
    case FuncTag::negated_exp:
        return -(C(e.c1) * cexp(C(e.a) * y));
    }
    return C{};
}

template <class C>
bool out_of_range(const C& x, double guard)
{
    const double m = cabs(x);
    return !(m <= guard);
}

// Returns false when a nonzero coordinate underflows to exactly zero: the
// orbit has then left the representable range as surely as on overflow.
template <class C>
bool apply_factor(const ElementaryMap& e, C& z, C& w)
{
    C& x = e.axis == Axis::first ? z : w;
    const C& y = e.axis == Axis::first ? w : z;
    if (e.kind == ShearKind::additive) {
        x = C(e.scale) * x + eval_func(e, y);
    } else if (!is_zero(x)) {  // 0 * e^{f} is 0 even where e^{f} overflows
        x = x * cexp(eval_func(e, y));
        if (is_zero(x)) return false;
    }
    return true;
}

template <class P>
P run_word(const std::vector<ElementaryMap>& factors, P p, double guard)
{
    if (p.escaped) return p;
    for (const ElementaryMap& e : factors) {
        const bool kept = apply_factor(e, p.z, p.w);
        if (!kept || out_of_range(p.z, guard) || out_of_range(p.w, guard)) {
            p.escaped = true;
            return p;
        }
    }
    return p;
}

Complex json_complex(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key)) return {};
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (!v.is_array() || v.size() != 2) throw ConfigError(std::string("factor field '") + key + "' must be [re, im]");
    return {v[0].get<double>(), v[1].get<double>()};
}

nlohmann::json complex_json(Complex c) { return nlohmann::json::array({c.real(), c.imag()}); }

}  // namespace

ElementaryMap ElementaryMap::shear(Axis axis, Complex scale, Complex c0, Complex c1)
{
    ElementaryMap e;
    e.kind = ShearKind::additive;
    e.axis = axis;
    e.tag = FuncTag::linear;
    e.scale = scale;
    e.c0 = c0;
    e.c1 = c1;
    return e;
}

ElementaryMap ElementaryMap::overshear(Axis axis, Complex c0, Complex c1)
{
    ElementaryMap e;
    e.kind = ShearKind::multiplicative;
    e.axis = axis;
    e.tag = FuncTag::linear;
    e.c0 = c0;
    e.c1 = c1;
    return e;
}

ElementaryMap ElementaryMap::inverse() const
{
    ElementaryMap inv = *this;
    if (kind == ShearKind::additive) {
        if (scale == Complex{}) throw DomainError("additive shear with zero scale is not invertible");
        inv.scale = 1.0 / scale;
        inv.c0 = -c0 / scale;
        inv.c1 = -c1 / scale;
        return inv;
    }
    switch (tag) {
    case FuncTag::linear:
        inv.c0 = -c0;
        inv.c1 = -c1;
        break;
    case FuncTag::exp:
        inv.tag = FuncTag::negated_exp;
        break;
    case FuncTag::negated_exp:
        inv.tag = FuncTag::exp;
        break;
    }
    return inv;
}

Complex ElementaryMap::func(Complex y) const { return eval_func(*this, y); }

Complex ElementaryMap::func_derivative(Complex y) const
{
    switch (tag) {
    case FuncTag::linear:
        return c1;
    case FuncTag::exp:
        return c1 * a * std::exp(a * y);
    case FuncTag::negated_exp:
        return -c1 * a * std::exp(a * y);
    }
    return {};
}

ShearWord ShearWord::inverse() const
{
    ShearWord inv;
    for (auto it = factors.rbegin(); it != factors.rend(); ++it) inv.factors.push_back(it->inverse());
    return inv;
}

ExplicitMap explicit_map(const RotationNumber& rot, int L, double rho)
{
    const Complex lam = rot.lambda;
    ExplicitMap out;
    auto& f = out.word.factors;
    f.push_back(ElementaryMap::shear(Axis::second, lam, 0.0, 1.0));   // (z, lambda w + z)
    f.push_back(ElementaryMap::overshear(Axis::first, 0.0, 1.0));     // (z e^w, w)
    f.push_back(ElementaryMap::shear(Axis::second, 1.0, 0.0, -1.0));  // (z, w - z)
    f.push_back(ElementaryMap::overshear(Axis::first, 0.0, -1.0));    // (z e^{-w}, w)
    f.push_back(ElementaryMap::overshear(Axis::second, 0.0, 1.0));    // (z, w e^z)

    AutomorphismSpec& spec = out.spec;
    spec.rot = rot;
    spec.f_series = exp_scaled_series(lam, L, rho);
    spec.g_series = spec.f_series;
    spec.g_series.coeffs[0] = 0.0;
    spec.g_series.coeffs[1] = 0.0;
    for (int l = 2; l <= L; ++l) spec.g_series.coeffs[l] = -spec.f_series.coeffs[l];
    spec.realization = out.word;
    return out;
}

Point2 apply(const ShearWord& word, Point2 p, double guard) { return run_word(word.factors, p, guard); }

PointDD apply(const ShearWord& word, PointDD p, double guard) { return run_word(word.factors, p, guard); }

Point2 apply_inverse(const ShearWord& word, Point2 p, double guard)
{
    return run_word(word.inverse().factors, p, guard);
}

PointDD apply_inverse(const ShearWord& word, PointDD p, double guard)
{
    return run_word(word.inverse().factors, p, guard);
}

Point2 apply_n(const ShearWord& word, Point2 p, std::int64_t n, double guard)
{
    for (std::int64_t k = 0; k < n && !p.escaped; ++k) p = run_word(word.factors, p, guard);
    return p;
}

Complex extract_z2_coefficient(const ShearWord& word, Complex w, int M, double rho0)
{
    auto first = [&](Complex z) { return apply(word, Point2{z, w}).z; };
    return cauchy_coefficients(first, 0.0, rho0, M, 3)[2];
}

BoundaryGrowth boundary_growth(const AutomorphismSpec& spec, const ShearWord& word, Complex w, std::int64_t n, int M)
{
    if (n < 1) throw DomainError("boundary_growth needs n >= 1");
    BoundaryGrowth out;
    for (std::int64_t k = 0; k < n; ++k) out.closed += series_eval(spec.f_series, lambda_power(spec.rot, k) * w);
    out.closed *= 2.0;
    // Keep n * radius small so the z-expansion of the n-th iterate converges
    // fast on the sampling circle.
    out.radius = std::min(1e-3, 0.05 / static_cast<double>(n));
    auto first = [&](Complex z) { return apply_n(word, Point2{z, w}, n).z; };
    out.numeric = 2.0 * cauchy_coefficients(first, 0.0, out.radius, M, 3)[2];
    return out;
}

Complex jacobian_determinant(const ShearWord& word, Point2 p, double radius, int M)
{
    auto dz = [&](auto pick) {
        return cauchy_coefficients([&](Complex t) { return pick(apply(word, Point2{p.z + t, p.w})); }, 0.0, radius, M,
                                   2)[1];
    };
    auto dw = [&](auto pick) {
        return cauchy_coefficients([&](Complex t) { return pick(apply(word, Point2{p.z, p.w + t})); }, 0.0, radius, M,
                                   2)[1];
    };
    auto pz = [](const Point2& q) { return q.z; };
    auto pw = [](const Point2& q) { return q.w; };
    return dz(pz) * dw(pw) - dw(pz) * dz(pw);
}

Complex jacobian_determinant_exact(const ShearWord& word, Point2 p)
{
    Complex det{1.0, 0.0};
    for (const ElementaryMap& e : word.factors) {
        const Complex y = e.axis == Axis::first ? p.w : p.z;
        det *= e.kind == ShearKind::additive ? e.scale : std::exp(e.func(y));
        apply_factor(e, p.z, p.w);
    }
    return det;
}

std::string to_string(ShearKind k) { return k == ShearKind::additive ? "additive" : "multiplicative"; }
std::string to_string(Axis a) { return a == Axis::first ? "first" : "second"; }
std::string to_string(FuncTag t)
{
    switch (t) {
    case FuncTag::linear:
        return "linear";
    case FuncTag::exp:
        return "exp";
    case FuncTag::negated_exp:
        return "negated-exp";
    }
    return "linear";
}

std::string word_to_json(const ShearWord& word)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const ElementaryMap& e : word.factors) {
        nlohmann::json j;
        j["kind"] = to_string(e.kind);
        j["axis"] = to_string(e.axis);
        j["func"] = to_string(e.tag);
        if (e.kind == ShearKind::additive) j["scale"] = complex_json(e.scale);
        j["c0"] = complex_json(e.c0);
        j["c1"] = complex_json(e.c1);
        if (e.tag != FuncTag::linear) j["a"] = complex_json(e.a);
        arr.push_back(j);
    }
    return arr.dump();
}

ShearWord word_from_json(const std::string& text)
{
    nlohmann::json arr;
    try {
        arr = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError(std::string("shear word is not valid JSON: ") + ex.what());
    }
    if (!arr.is_array()) throw ConfigError("shear word must be a JSON array of factors");
    ShearWord word;
    for (const auto& j : arr) {
        if (!j.is_object()) throw ConfigError("each shear factor must be an object");
        ElementaryMap e;
        const std::string kind = j.value("kind", "");
        if (kind == "additive")
            e.kind = ShearKind::additive;
        else if (kind == "multiplicative")
            e.kind = ShearKind::multiplicative;
        else
            throw ConfigError("unknown factor kind '" + kind + "'");
        const std::string axis = j.value("axis", "");
        if (axis == "first")
            e.axis = Axis::first;
        else if (axis == "second")
            e.axis = Axis::second;
        else
            throw ConfigError("unknown factor axis '" + axis + "'");
        const std::string func = j.value("func", "linear");
        if (func == "linear")
            e.tag = FuncTag::linear;
        else if (func == "exp")
            e.tag = FuncTag::exp;
        else if (func == "negated-exp")
            e.tag = FuncTag::negated_exp;
        else
            throw ConfigError("unknown factor function '" + func + "'");
        e.scale = j.contains("scale") ? json_complex(j, "scale") : Complex(1.0, 0.0);
        e.c0 = json_complex(j, "c0");
        e.c1 = json_complex(j, "c1");
        e.a = json_complex(j, "a");
        word.factors.push_back(e);
    }
    return word;
}

}  // namespace pcyl
