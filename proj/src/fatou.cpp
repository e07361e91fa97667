#include "pcyl/fatou.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace pcyl {

namespace {

double norm2(const Point2& a, const Point2& b) { return std::hypot(std::abs(a.z - b.z), std::abs(a.w - b.w)); }

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size() / 2;
    return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

// Walks the orbit of p and hands (n, F^n p) to `visit` at the requested
// indices (ascending). Throws ClassificationError on escape.
template <class Visit>
void walk(const ConjugationChain& chain, const Point2& p, const std::vector<std::int64_t>& at, Precision precision,
          Visit&& visit)
{
    if (p.z == Complex{}) throw ClassificationError("point lies on the invariant axis");
    std::size_t next = 0;
    std::int64_t k = 0;
    auto fire = [&](const Point2& q) {
        while (next < at.size() && at[next] == k) visit(at[next++], q);
    };
    if (precision == Precision::double_double && chain.word) {
        PointDD q{ComplexDD(p.z), ComplexDD(p.w)};
        fire(p);
        while (next < at.size()) {
            q = apply(*chain.word, q);
            ++k;
            if (q.escaped) throw ClassificationError("orbit escaped");
            fire(Point2{q.z.to_complex(), q.w.to_complex()});
        }
    } else {
        Point2 q = p;
        fire(q);
        while (next < at.size()) {
            q = chain.forward(q);
            ++k;
            if (q.escaped) throw ClassificationError("orbit escaped");
            fire(q);
        }
    }
}

Point2 t_prime_checked(const ConjugationChain& chain, const Point2& p)
{
    try {
        return t_prime(chain, p);
    } catch (const std::exception& ex) {
        throw ClassificationError(std::string("orbit not in the region of T': ") + ex.what());
    }
}

Point2 phi_at(const ConjugationChain& chain, const Point2& p, std::int64_t n, Complex A, Precision precision)
{
    Point2 out;
    const std::int64_t mid = n / 2;
    Complex u_mid{};
    walk(chain, p, {mid, n}, precision, [&](std::int64_t k, const Point2& q) {
        const Point2 t = t_prime_checked(chain, q);
        if (k == mid && mid != n) {
            u_mid = t.z;
            return;
        }
        if (t.z.real() - u_mid.real() < 0.5 * static_cast<double>(n - mid))
            throw ClassificationError("orbit is not moving to infinity in u");
        out = q_n(chain, t, n, A);
    });
    return out;
}

}  // namespace

Point2 q_n(const ConjugationChain& chain, const Point2& q, std::int64_t n, Complex A)
{
    const double nn = static_cast<double>(n);
    const Complex drift = n > 0 ? A * std::log(nn) : Complex{};
    return {q.z - nn - drift, lambda_power(chain.rot, -n) * q.w, q.escaped};
}

FatouEstimate fatou_coordinate(const ConjugationChain& chain, const Point2& p, const FatouOptions& opt)
{
    if (opt.n_max < 2 || opt.checkpoints < 2) throw DomainError("fatou_coordinate needs n_max >= 2 and >= 2 checkpoints");
    FatouEstimate est;
    est.point = p;
    for (int k = 1; k <= opt.checkpoints; ++k) {
        const auto nk = static_cast<std::int64_t>(
            std::ceil(static_cast<double>(opt.n_max) * k / static_cast<double>(opt.checkpoints)));
        if (est.n.empty() || nk > est.n.back()) est.n.push_back(nk);
    }
    const Complex A = chain.A + opt.A_offset;
    std::vector<Complex> us;
    walk(chain, p, est.n, opt.precision, [&](std::int64_t k, const Point2& q) {
        const Point2 t = t_prime_checked(chain, q);
        us.push_back(t.z);
        est.values.push_back(q_n(chain, t, k, A));
    });
    const std::size_t last = us.size() - 1, mid = last / 2;
    if (us[last].real() - us[mid].real() < 0.5 * static_cast<double>(est.n[last] - est.n[mid]))
        throw ClassificationError("orbit is not moving to infinity in u");
    std::vector<double> rate;
    for (std::size_t k = 0; k + 1 < est.values.size(); ++k) {
        est.cauchy.push_back(norm2(est.values[k + 1], est.values[k]));
        const double nk = static_cast<double>(est.n[k]);
        if (nk > 1.0) rate.push_back(est.cauchy.back() * nk / std::log(nk));
    }
    est.final = est.values.back();
    est.rate_median = median(rate);
    const std::size_t h = est.cauchy.size() / 2;
    const double first_half = median({est.cauchy.begin(), est.cauchy.begin() + static_cast<std::ptrdiff_t>(h)});
    const double second_half = median({est.cauchy.begin() + static_cast<std::ptrdiff_t>(h), est.cauchy.end()});
    est.converged = !est.cauchy.empty() && est.cauchy.back() <= opt.tol && second_half <= first_half;
    return est;
}

double functional_equation_residual(const ConjugationChain& chain, const Point2& p, const FatouOptions& opt)
{
    return k_step_residual(chain, p, 1, opt);
}

double k_step_residual(const ConjugationChain& chain, const Point2& p, int k, const FatouOptions& opt)
{
    if (k < 1) throw DomainError("k_step_residual needs k >= 1");
    const Complex A = chain.A + opt.A_offset;
    const Point2 base = phi_at(chain, p, opt.n_max, A, opt.precision);
    Point2 moved = p;
    for (int i = 0; i < k; ++i) {
        moved = chain.forward(moved);
        if (moved.escaped) throw ClassificationError("orbit escaped");
    }
    const Point2 image = phi_at(chain, moved, opt.n_max, A, opt.precision);
    const Point2 shifted{base.z + static_cast<double>(k), lambda_power(chain.rot, k) * base.w};
    return norm2(image, shifted);
}

AsymptoticReport asymptotic_form_check(const ConjugationChain& chain, Complex w, const std::vector<double>& u_ray,
                                       const FatouOptions& opt, double n_per_u)
{
    if (u_ray.size() < 4) throw DomainError("asymptotic_form_check needs at least 4 ray points");
    for (std::size_t i = 1; i < u_ray.size(); ++i)
        if (u_ray[i] <= u_ray[i - 1]) throw DomainError("asymptotic_form_check needs an increasing ray");
    AsymptoticReport rep;
    const Complex A = chain.A + opt.A_offset;
    for (double u : u_ray) {
        const std::int64_t n =
            std::max<std::int64_t>(opt.n_max, static_cast<std::int64_t>(std::ceil(n_per_u * u)));
        const Point2 p = t_prime_inv(chain, {u, w});
        const Point2 phi = phi_at(chain, p, n, A, opt.precision);
        rep.u.push_back(u);
        rep.n_used.push_back(n);
        rep.first_dev.push_back(std::abs(phi.z - (u - chain.A * std::log(Complex(u, 0.0)))));
        rep.second_dev.push_back(std::abs(phi.w - w));
    }
    rep.first_decreasing = rep.second_decreasing = true;
    for (std::size_t i = 1; i < rep.u.size(); ++i) {
        if (!(rep.first_dev[i] <= rep.first_dev[i - 1])) rep.first_decreasing = false;
        if (!(rep.second_dev[i] <= rep.second_dev[i - 1])) rep.second_decreasing = false;
    }
    rep.pass = rep.first_decreasing && rep.second_decreasing;
    return rep;
}

LimitMapReport limit_map_probe(const ConjugationChain& chain, const Region& region, std::int64_t n, int M, double eta,
                               int n_targets, bool include_centre)
{
    LimitMapReport rep;
    const double delta = region.delta;
    const Region quarter{region.R, delta / 4.0, region.gamma};
    const std::vector<Complex> us = sample_K(quarter, std::max(1, (M + 6) / 7));
    const Complex lam_n = lambda_power(chain.rot, n);
    const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < M; ++i) {
        const Complex u = us[static_cast<std::size_t>(i) % us.size()];
        // Points spread over the disc |w| < delta/4.
        const Complex w = std::polar(0.25 * delta * std::sqrt((i + 0.5) / M), golden_angle * i);
        Point2 p{-1.0 / u, w};
        for (std::int64_t k = 0; k < n && !p.escaped; ++k) p = chain.forward(p);
        ++rep.samples;
        if (p.escaped) {
            ++rep.escaped;
            continue;
        }
        rep.sup_pi1 = std::max(rep.sup_pi1, std::abs(p.z));
        rep.sup_w_dev = std::max(rep.sup_w_dev, std::abs(p.w - lam_n * w));
    }
    const Complex z0 = -1.0 / (2.0 * region.R);
    const Complex lam_minus_n = std::conj(lam_n);
    if (include_centre) rep.targets.push_back(0.0);
    for (int j = 0; j < n_targets; ++j) rep.targets.push_back(std::polar(delta / 16.0, kTwoPi * j / n_targets));
    bool all_one = true;
    for (const Complex& w0 : rep.targets) {
        auto f = [&](Complex w) {
            Point2 p{z0, w};
            for (std::int64_t k = 0; k < n && !p.escaped; ++k) p = chain.forward(p);
            if (p.escaped) return Complex(0.0, 0.0);
            return lam_minus_n * p.w - w0;
        };
        const WindingResult wr = winding_number(f, w0, delta / 8.0, M, 1e-3 * delta);
        rep.windings.push_back(wr.winding);
        rep.inconclusive.push_back(wr.inconclusive);
        if (wr.inconclusive || wr.winding != 1) all_one = false;
    }
    rep.pass_pi1 = rep.escaped == 0 && rep.sup_pi1 <= eta;
    rep.pass_w = rep.escaped == 0 && rep.sup_w_dev <= delta / 10.0;
    rep.pass_winding = all_one;
    rep.pass = rep.pass_pi1 && rep.pass_w && rep.pass_winding;
    return rep;
}

std::string to_string(BasinClass c)
{
    switch (c) {
    case BasinClass::inside:
        return "inside";
    case BasinClass::escaped:
        return "escaped";
    case BasinClass::undecided:
        return "undecided";
    case BasinClass::axis:
        return "axis";
    }
    return "undecided";
}

namespace {

struct RungTest {
    double R, delta, re_min;
};

std::vector<RungTest> rung_tests(const ConjugationChain& chain, const BasinOptions& opt)
{
    const GammaFn gamma = make_gamma(chain.spec);
    std::vector<BasinRung> ladder = opt.ladder;
    if (ladder.empty()) ladder.push_back({10.0, 0.5});
    std::vector<RungTest> out;
    for (const BasinRung& r : ladder) out.push_back({r.R, r.delta, -gamma(r.delta)});
    return out;
}

BasinClass classify_with(const ConjugationChain& chain, Point2 p, const BasinOptions& opt,
                         const std::vector<RungTest>& rungs)
{
    if (p.z == Complex{}) return BasinClass::axis;
    for (std::int64_t k = 0;; ++k) {
        const double az = std::abs(p.z);
        if (az < opt.z_in && az > 0.0) {
            const Complex u = -1.0 / p.z;
            const double aw = std::abs(p.w);
            for (const RungTest& r : rungs) {
                if (aw >= r.delta / 4.0 || u.real() < r.re_min) continue;
                const Complex d = u - r.R;
                if (d == Complex{} || std::abs(std::arg(d)) <= 0.75 * kPi) return BasinClass::inside;
            }
        }
        if (k == opt.n_max) break;
        p = chain.forward(p);
        if (p.escaped) return BasinClass::escaped;
    }
    return BasinClass::undecided;
}

}  // namespace

BasinClass basin_classify(const ConjugationChain& chain, const Point2& p, const BasinOptions& opt)
{
    return classify_with(chain, p, opt, rung_tests(chain, opt));
}

Complex BasinRaster::pixel_center(int i, int j) const
{
    const double x = window.re0 + (i + 0.5) * (window.re1 - window.re0) / width;
    const double y = window.im1 - (j + 0.5) * (window.im1 - window.im0) / height;
    return {x, y};
}

BasinRaster basin_scan(const ConjugationChain& chain, const BasinWindow& window, int width, int height,
                       const BasinOptions& opt, int threads)
{
    if (width < 1 || height < 1 || width > 4096 || height > 4096)
        throw DomainError("basin_scan resolution must be within 1..4096 per side");
    BasinRaster r;
    r.window = window;
    r.width = width;
    r.height = height;
    r.classes.assign(static_cast<std::size_t>(width) * height, BasinClass::undecided);
    const std::vector<RungTest> rungs = rung_tests(chain, opt);
    auto work = [&](int t, int nt) {
        for (int j = t; j < height; j += nt)
            for (int i = 0; i < width; ++i) {
                const Complex c = r.pixel_center(i, j);
                const Point2 p = window.z_slice ? Point2{c, window.fixed} : Point2{window.fixed, c};
                r.classes[static_cast<std::size_t>(j) * width + i] = classify_with(chain, p, opt, rungs);
            }
    };
    threads = std::max(1, std::min(threads, height));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& th : pool) th.join();
    }
    return r;
}

ComponentReport inside_component(const BasinRaster& r)
{
    ComponentReport rep;
    const std::size_t total = r.classes.size();
    std::size_t inside = 0;
    for (BasinClass c : r.classes) inside += c == BasinClass::inside;
    rep.inside_fraction = total ? static_cast<double>(inside) / static_cast<double>(total) : 0.0;

    const double dx = (r.window.re1 - r.window.re0) / r.width;
    const double dy = (r.window.im1 - r.window.im0) / r.height;
    const double reach = 2.0 * std::max(dx, dy);
    std::vector<int> label(total, 0);
    int next_label = 0;
    for (int j = 0; j < r.height; ++j)
        for (int i = 0; i < r.width; ++i) {
            const Complex c = r.pixel_center(i, j);
            if (c.real() >= 0.0 || std::abs(c) > reach || r.at(i, j) != BasinClass::inside) continue;
            if (label[static_cast<std::size_t>(j) * r.width + i]) continue;
            // Flood fill this seed's 4-connected inside component.
            ++next_label;
            int size = 0;
            std::vector<std::pair<int, int>> stack{{i, j}};
            label[static_cast<std::size_t>(j) * r.width + i] = next_label;
            while (!stack.empty()) {
                auto [a, b] = stack.back();
                stack.pop_back();
                ++size;
                const int nbr[4][2] = {{a + 1, b}, {a - 1, b}, {a, b + 1}, {a, b - 1}};
                for (const auto& q : nbr) {
                    if (q[0] < 0 || q[1] < 0 || q[0] >= r.width || q[1] >= r.height) continue;
                    const std::size_t idx = static_cast<std::size_t>(q[1]) * r.width + q[0];
                    if (label[idx] || r.classes[idx] != BasinClass::inside) continue;
                    label[idx] = next_label;
                    stack.push_back({q[0], q[1]});
                }
            }
            rep.touches_origin_left = true;
            rep.component_size = std::max(rep.component_size, size);
        }
    return rep;
}

void write_pgm(const BasinRaster& r, std::ostream& os)
{
    os << "P5\n" << r.width << ' ' << r.height << "\n255\n";
    for (BasinClass c : r.classes) os.put(static_cast<char>(static_cast<unsigned char>(c)));
}

std::string fatou_json(const FatouEstimate& est)
{
    using nlohmann::json;
    auto cj = [](Complex c) { return json::array({c.real(), c.imag()}); };
    json values = json::array();
    for (const Point2& v : est.values) values.push_back(json::array({cj(v.z), cj(v.w)}));
    json j;
    j["point"] = json::array({cj(est.point.z), cj(est.point.w)});
    j["checkpoints"] = est.n;
    j["values"] = values;
    j["cauchy"] = est.cauchy;
    j["final"] = json::array({cj(est.final.z), cj(est.final.w)});
    j["converged"] = est.converged;
    j["rate_median"] = est.rate_median;
    return j.dump(2);
}

FatouInjectivity fatou_injectivity_probe(const ConjugationChain& chain, const std::vector<Point2>& seeds,
                                         const FatouOptions& opt)
{
    FatouInjectivity rep;
    std::vector<Point2> images;
    const Complex A = chain.A + opt.A_offset;
    for (const Point2& p : seeds) {
        try {
            images.push_back(phi_at(chain, p, opt.n_max, A, opt.precision));
        } catch (const ClassificationError&) {
        }
    }
    rep.seeds = static_cast<int>(images.size());
    rep.min_separation = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < images.size(); ++a)
        for (std::size_t b = a + 1; b < images.size(); ++b)
            rep.min_separation = std::min(rep.min_separation, norm2(images[a], images[b]));
    return rep;
}

}  // namespace pcyl
