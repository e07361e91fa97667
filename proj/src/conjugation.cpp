#include "pcyl/conjugation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"

namespace pcyl {

double GammaFn::operator()(double delta) const
{
    double acc = 0.0;
    double p = 1.0;
    for (std::size_t l = 1; l < abs_coeffs.size(); ++l) {
        p *= delta;
        acc += abs_coeffs[l] * std::pow(static_cast<double>(l), r) * p;
    }
    return C * acc;
}

GammaFn make_gamma(const AutomorphismSpec& spec)
{
    GammaFn g;
    g.r = spec.rot.dio_r;
    g.C = spec.rot.dio_c > 0.0 ? 2.0 / spec.rot.dio_c : 1e300;
    g.abs_coeffs.resize(spec.f_series.coeffs.size());
    for (std::size_t l = 1; l < spec.f_series.coeffs.size(); ++l) g.abs_coeffs[l] = std::abs(spec.f_series.coeffs[l]);
    return g;
}

bool in_K(const Region& region, Complex u)
{
    if (u.real() < -region.gamma(region.delta)) return false;
    const Complex d = u - region.R;
    if (d == Complex{}) return true;
    return std::abs(std::arg(d)) <= 0.75 * kPi + 1e-15;
}

bool in_U(const Region& region, Complex u, Complex w) { return std::abs(w) < region.delta && in_K(region, u); }

Point2 theta(const Point2& p)
{
    if (p.z == Complex{}) throw DomainError("Theta is undefined on a zero first coordinate");
    return {-1.0 / p.z, p.w, p.escaped};
}

namespace {

void prepare(ConjugationChain& c)
{
    const int L = c.spec.f_series.degree();
    const int top = std::max({L, c.spec.g_series.degree(), c.opt.h_degree}) + 1;
    c.mu.assign(static_cast<std::size_t>(top) + 1, Complex{});
    for (int n = 0; n <= top; ++n) c.mu[n] = lambda_power(c.rot, n);
    c.psi_coeffs.assign(static_cast<std::size_t>(L) + 1, Complex{});
    for (int k = 1; k <= L; ++k) {
        const Complex dk = c.spec.f_series.coeffs[k];
        if (dk == Complex{}) continue;
        if (std::abs(c.mu[k] - 1.0) <= kSmallDivisorCutoff)
            throw SmallDivisorError("lambda^k = 1 in the Psi series");
        c.psi_coeffs[k] = dk / (c.mu[k] - 1.0);
    }
}

void fit_h_series(ConjugationChain& c)
{
    const int M = c.opt.h_ring_points;
    const double r = c.opt.h_ring_radius;
    std::vector<Complex> ring(M);
    for (int j = 0; j < M; ++j) ring[j] = estimate_h(c, std::polar(r, kTwoPi * j / M));
    const int deg = std::min(c.opt.h_degree, M - 1);
    TruncatedSeries s;
    s.validity_radius = r;
    s.coeffs.resize(static_cast<std::size_t>(deg) + 1);
    for (int k = 0; k <= deg; ++k) {
        Complex acc{};
        for (int j = 0; j < M; ++j) acc += ring[j] * std::polar(1.0, -kTwoPi * ((j * k) % M) / M);
        s.coeffs[k] = acc / (static_cast<double>(M) * std::pow(r, k));
    }
    s.tail_bound = decay_tail_bound(s.coeffs, r);
    c.h_series = s;
    c.A = s.coeffs[0];
    c.A_direct = estimate_h(c, 0.0);
    c.h_ready = true;
}

double newton_scale(Complex x) { return std::max(1.0, std::abs(x)); }

}  // namespace

ConjugationChain build_chain(const AutomorphismSpec& spec, std::function<Point2(const Point2&)> forward,
                             const ChainOptions& opt, bool fit_h)
{
    ConjugationChain c;
    c.rot = spec.rot;
    c.spec = spec;
    c.forward = std::move(forward);
    c.opt = opt;
    prepare(c);
    if (fit_h) fit_h_series(c);
    return c;
}

ConjugationChain build_chain(const AutomorphismSpec& spec, const ShearWord& word, const ChainOptions& opt,
                             bool fit_h)
{
    auto fwd = [word](const Point2& p) { return apply(word, p); };
    ConjugationChain c = build_chain(spec, fwd, opt, false);
    c.word = word;
    if (fit_h) fit_h_series(c);
    return c;
}

Complex divisor_series(const ConjugationChain& chain, int n, Complex u)
{
    const Complex mu = n < static_cast<int>(chain.mu.size()) ? chain.mu[n] : lambda_power(chain.rot, n);
    return oscillatory_sum(mu, u, 0, chain.opt.sum_tol).value;
}

Complex PhiKernel::value(Complex w) const
{
    Complex acc{};
    for (std::size_t l = e.size(); l-- > 0;) acc = acc * w + e[l];
    return acc;
}

Complex PhiKernel::derivative(Complex w) const
{
    Complex acc{};
    for (std::size_t l = e.size(); l-- > 1;) acc = acc * w + static_cast<double>(l) * e[l];
    return acc;
}

PhiKernel phi_kernel(const ConjugationChain& chain, Complex u, double radius)
{
    PhiKernel k;
    k.u = u;
    const auto& b = chain.spec.g_series.coeffs;
    k.e.assign(b.size(), Complex{});
    const Complex inv_lambda = std::conj(chain.rot.lambda);
    double rl = radius * radius;
    for (std::size_t l = 2; l < b.size(); ++l, rl *= radius) {
        if (b[l] == Complex{}) continue;
        // Terms far below rounding at this radius are not worth a divisor sum.
        if (std::abs(b[l]) * rl < 1e-22 * std::max(radius, 1e-300)) continue;
        k.e[l] = inv_lambda * b[l] * divisor_series(chain, static_cast<int>(l) - 1, u);
    }
    return k;
}

Point2 phi_map(const ConjugationChain& chain, const Point2& q)
{
    const PhiKernel k = phi_kernel(chain, q.z, std::abs(q.w));
    return {q.z, q.w + k.value(q.w), q.escaped};
}

Point2 phi_inv(const ConjugationChain& chain, const Point2& q)
{
    const double guard = chain.opt.rouche_radius;
    const PhiKernel k = phi_kernel(chain, q.z, std::abs(q.w) + guard);
    const Complex target = q.w;
    auto F = [&](Complex x) { return x + k.value(x) - target; };
    auto dF = [&](Complex x) { return 1.0 + k.derivative(x); };
    auto admissible = [&](Complex x) { return std::abs(x - target) <= guard; };
    const NewtonResult r = damped_newton(F, dF, target, chain.opt.newton_tol * newton_scale(target),
                                         chain.opt.newton_max_iter, admissible);
    return {q.z, r.root, q.escaped};
}

Complex psi_shift(const ConjugationChain& chain, Complex w)
{
    if (std::abs(w) > chain.spec.f_series.validity_radius * (1.0 + 1e-12))
        throw DomainError("Psi evaluated outside the validity radius of f");
    Complex acc{};
    for (std::size_t k = chain.psi_coeffs.size(); k-- > 1;) acc = (acc + chain.psi_coeffs[k]) * w;
    return acc;
}

Point2 psi_map(const ConjugationChain& chain, const Point2& q) { return {q.z + psi_shift(chain, q.w), q.w, q.escaped}; }

Point2 psi_inv(const ConjugationChain& chain, const Point2& q) { return {q.z - psi_shift(chain, q.w), q.w, q.escaped}; }

Point2 t_prime(const ConjugationChain& chain, const Point2& p) { return psi_inv(chain, phi_inv(chain, theta(p))); }

Point2 t_prime_inv(const ConjugationChain& chain, const Point2& q) { return theta(phi_map(chain, psi_map(chain, q))); }

Point2 g_tilde(const ConjugationChain& chain, const Point2& q)
{
    const Point2 image = chain.forward(t_prime_inv(chain, q));
    if (image.escaped) throw DomainError("forward map escaped while evaluating G~");
    return t_prime(chain, image);
}

Complex estimate_h(const ConjugationChain& chain, Complex w, const std::vector<double>& u_samples)
{
    if (u_samples.size() < 4) throw DomainError("estimate_h needs at least 4 samples");
    for (std::size_t i = 0; i < u_samples.size(); ++i) {
        if (u_samples[i] < 50.0) throw DomainError("estimate_h samples must be >= 50");
        if (i && u_samples[i] <= u_samples[i - 1]) throw DomainError("estimate_h samples must increase");
    }
    std::vector<std::vector<double>> rows;
    std::vector<Complex> y;
    for (double u : u_samples) {
        const Point2 g = g_tilde(chain, {u, w});
        y.push_back((g.z - u - 1.0) * u);
        rows.push_back({1.0, 1.0 / u, 1.0 / (u * u)});
    }
    // Fit u * (first - u - 1) = a + b/u + c/u^2.
    const FitResult fit = least_squares(rows, y);
    double scale = 1.0;
    for (const Complex& v : y) scale = std::max(scale, std::abs(v));
    if (fit.rms > 1e-7 * scale) throw IllConditionedError("estimate_h: 1/u expansion does not fit the samples");
    return fit.coeffs[0];
}

Complex estimate_h(const ConjugationChain& chain, Complex w) { return estimate_h(chain, w, chain.opt.h_u_samples); }

namespace {

Complex tau_shift(const ConjugationChain& chain, Complex u, Complex w)
{
    if (!chain.h_ready) throw DomainError("tau needs the fitted h series");
    const auto& c = chain.h_series.coeffs;
    const double aw = std::abs(w);
    if (aw > chain.h_series.validity_radius * (1.0 + 1e-12))
        throw DomainError("tau evaluated outside the validity radius of h");
    Complex acc{};
    double wp = 1.0;
    Complex wj{1.0, 0.0};
    for (std::size_t j = 1; j < c.size(); ++j) {
        wp *= aw;
        wj *= w;
        if (std::abs(c[j]) * wp < 1e-22) continue;
        acc += c[j] * wj * divisor_series(chain, static_cast<int>(j), u);
    }
    return acc;
}

}  // namespace

Point2 tau_map(const ConjugationChain& chain, const Point2& q)
{
    return {q.z - tau_shift(chain, q.z, q.w), q.w, q.escaped};
}

Point2 tau_inv(const ConjugationChain& chain, const Point2& q)
{
    const Complex target = q.z;
    const Complex w = q.w;
    auto F = [&](Complex x) { return x - tau_shift(chain, x, w) - target; };
    auto dF = [&](Complex x) {
        const Complex h = 1e-4 * newton_scale(x);
        return (F(x + h) - F(x - h)) / (2.0 * h);
    };
    const NewtonResult r =
        damped_newton(F, dF, target, chain.opt.newton_tol * newton_scale(target), chain.opt.newton_max_iter);
    return {r.root, w, q.escaped};
}

Point2 h_eval(const ConjugationChain& chain, const Point2& q) { return tau_inv(chain, g_tilde(chain, tau_map(chain, q))); }

Point2 t_full(const ConjugationChain& chain, const Point2& p) { return tau_inv(chain, t_prime(chain, p)); }

Point2 t_full_inv(const ConjugationChain& chain, const Point2& q) { return t_prime_inv(chain, tau_map(chain, q)); }

std::vector<Complex> sample_K(const Region& region, int n)
{
    const double R = region.R;
    const double g = region.gamma(region.delta);
    std::vector<Complex> us;
    const double t_max = std::sqrt(2.0) * (R + g);
    for (int s : {-1, 1}) {
        const Complex dir = std::polar(1.0, s * 0.75 * kPi);
        for (int i = 0; i < n; ++i) us.push_back(R + dir * (t_max * (i + 0.5) / n));
        const double y0 = s * (R + g);
        for (int i = 0; i < n; ++i) us.push_back(Complex(-g, y0 + s * 3.0 * R * i / n));
        for (int i = 0; i < n; ++i) us.push_back(R + Complex(0.0, s * 3.0 * R * (i + 1) / n));
    }
    for (int i = 0; i < n; ++i) us.push_back(R + 3.0 * R * i / n);
    return us;
}

std::vector<Point2> sample_U(const Region& region, int u_per_edge, int w_phases)
{
    std::vector<Point2> pts;
    for (Complex u : sample_K(region, u_per_edge)) {
        pts.push_back({u, 0.0});
        for (double rad : {0.5 * region.delta, region.delta})
            for (int j = 0; j < w_phases; ++j) pts.push_back({u, std::polar(rad, kTwoPi * (j + 0.25) / w_phases)});
    }
    return pts;
}

Calibration calibrate(const ConjugationChain& chain, double delta, const std::vector<double>& ladder)
{
    Calibration cal;
    cal.delta = delta;
    const GammaFn gamma = make_gamma(chain.spec);
    cal.gamma_delta = gamma(delta);
    for (double R : ladder) {
        CalibrationRung rung;
        rung.R = R;
        const Region region{R, delta, gamma};
        for (const Point2& q : sample_U(region)) {
            try {
                const PhiKernel k = phi_kernel(chain, q.z, delta);
                const double h = std::abs(k.value(q.w));
                rung.sup_h_phi = std::max(rung.sup_h_phi, h);
                rung.sup_dh_phi = std::max(rung.sup_dh_phi, std::abs(k.derivative(q.w)));
                rung.C_phi = std::max(rung.C_phi, h * std::abs(q.z));
                const Point2 g = g_tilde(chain, q);
                rung.sup_step = std::max(rung.sup_step, std::abs(g.z - q.z - 1.0));
            } catch (const std::exception&) {
                ++rung.newton_failures;
            }
        }
        rung.pass = rung.newton_failures == 0 && rung.sup_h_phi < delta / 4 && rung.sup_dh_phi < 0.5 &&
                    rung.sup_step < 0.5;
        cal.rungs.push_back(rung);
        if (rung.pass) {
            cal.R = R;
            cal.C_phi = rung.C_phi;
            cal.ok = true;
            return cal;
        }
    }
    throw CalibrationError("no R on the ladder passes the residual checks at delta = " + std::to_string(delta));
}

InjectivityReport injectivity_probe(const ConjugationChain& chain, const Region& region, int pairs, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto draw = [&]() {
        for (;;) {
            const Complex u = region.R + std::polar(3.0 * region.R * U(rng), (U(rng) - 0.5) * 1.5 * kPi);
            if (!in_K(region, u)) continue;
            return Point2{u, std::polar(region.delta * std::sqrt(U(rng)), kTwoPi * U(rng))};
        }
    };
    auto dist = [](const Point2& a, const Point2& b) { return std::hypot(std::abs(a.z - b.z), std::abs(a.w - b.w)); };
    InjectivityReport rep;
    rep.min_ratio_phi = rep.min_ratio_tau = std::numeric_limits<double>::infinity();
    for (int i = 0; i < pairs; ++i) {
        const Point2 a = draw();
        const Point2 b = draw();
        const double d = dist(a, b);
        if (d == 0.0) continue;
        rep.min_ratio_phi = std::min(rep.min_ratio_phi, dist(phi_map(chain, a), phi_map(chain, b)) / d);
        if (chain.h_ready) rep.min_ratio_tau = std::min(rep.min_ratio_tau, dist(tau_map(chain, a), tau_map(chain, b)) / d);
        ++rep.pairs;
    }
    return rep;
}

std::string chain_manifest_json(const ConjugationChain& chain, const Calibration* cal)
{
    using nlohmann::json;
    auto cj = [](Complex c) { return json::array({c.real(), c.imag()}); };
    json j;
    j["rotation"] = {{"label", chain.rot.label},
                     {"theta", {chain.rot.theta.hi, chain.rot.theta.lo}},
                     {"lambda", cj(chain.rot.lambda)},
                     {"dio_c", chain.rot.dio_c},
                     {"dio_r", chain.rot.dio_r}};
    j["truncation_L"] = chain.spec.f_series.degree();
    j["newton_tol"] = chain.opt.newton_tol;
    j["newton_max_iter"] = chain.opt.newton_max_iter;
    j["sum_tol"] = chain.opt.sum_tol;
    j["rouche_radius"] = chain.opt.rouche_radius;
    j["h_ring"] = {{"points", chain.opt.h_ring_points}, {"radius", chain.opt.h_ring_radius}};
    j["h_u_samples"] = chain.opt.h_u_samples;
    if (chain.word) j["word"] = json::parse(word_to_json(*chain.word));
    if (chain.h_ready) {
        json coeffs = json::array();
        for (const Complex& c : chain.h_series.coeffs) coeffs.push_back(cj(c));
        j["h_series"] = {{"coeffs", coeffs},
                         {"validity_radius", chain.h_series.validity_radius},
                         {"tail_bound", chain.h_series.tail_bound}};
        j["A"] = cj(chain.A);
        j["A_direct"] = cj(chain.A_direct);
    }
    const GammaFn g = make_gamma(chain.spec);
    j["gamma"] = {{"C", g.C}, {"r", g.r}};
    if (cal) {
        json rungs = json::array();
        for (const auto& r : cal->rungs)
            rungs.push_back({{"R", r.R},
                             {"sup_h_phi", r.sup_h_phi},
                             {"sup_dh_phi", r.sup_dh_phi},
                             {"sup_step", r.sup_step},
                             {"C_phi", r.C_phi},
                             {"newton_failures", r.newton_failures},
                             {"pass", r.pass}});
        j["calibration"] = {{"delta", cal->delta},
                            {"R", cal->R},
                            {"gamma_delta", cal->gamma_delta},
                            {"C_phi", cal->C_phi},
                            {"ok", cal->ok},
                            {"rungs", rungs}};
    }
    return j.dump(2);
}

}  // namespace pcyl
