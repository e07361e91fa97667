#include "pcyl/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace pcyl {

std::string to_string(OrbitStatus s)
{
    switch (s) {
    case OrbitStatus::converging:
        return "converging";
    case OrbitStatus::escaped:
        return "escaped";
    case OrbitStatus::undecided:
        return "undecided";
    }
    return "undecided";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

void store(const ConjugationChain& chain, const OrbitOptions& opt, OrbitRecord& rec, std::int64_t n, const Point2& p)
{
    rec.n.push_back(n);
    rec.points.push_back(p);
    Complex u{kNaN, kNaN}, w{kNaN, kNaN};
    if (opt.compute_u && !p.escaped && p.z != Complex{}) {
        try {
            const Point2 q = t_prime(chain, p);
            u = q.z;
            w = q.w;
        } catch (const std::exception&) {
            // Outside the region where T' is defined; left as NaN.
        }
    }
    rec.u_seq.push_back(u);
    rec.w_seq.push_back(w);
}

bool keep(std::int64_t n, const OrbitOptions& opt) { return n <= opt.dense_until || n % opt.stride == 0; }

void classify(OrbitRecord& rec)
{
    if (rec.points.back().escaped) {
        rec.status = OrbitStatus::escaped;
        return;
    }
    rec.status = OrbitStatus::undecided;
    const std::size_t last = rec.points.size() - 1;
    if (last < 2 || rec.points[last].z == Complex{}) return;
    const std::size_t mid = last / 2;
    const Complex ul = rec.u_seq[last], um = rec.u_seq[mid];
    if (!finite(ul) || !finite(um)) return;
    // u should move right at unit speed with a bounded w.
    const double dn = static_cast<double>(rec.n[last] - rec.n[mid]);
    if (ul.real() - um.real() >= 0.5 * dn && ul.real() > 0.0 && std::abs(rec.w_seq[last]) < 10.0)
        rec.status = OrbitStatus::converging;
}

}  // namespace

OrbitRecord iterate(const ConjugationChain& chain, const Point2& p0, std::int64_t n_max, const OrbitOptions& opt)
{
    if (n_max < 1) throw DomainError("iterate needs n_max >= 1");
    if (opt.stride < 1) throw DomainError("orbit stride must be positive");
    OrbitRecord rec;
    rec.initial = p0;
    store(chain, opt, rec, 0, p0);
    if (opt.precision == Precision::double_double) {
        if (!chain.word) throw DomainError("double-double orbits need a shear word");
        PointDD p{ComplexDD(p0.z), ComplexDD(p0.w), p0.escaped};
        std::int64_t k = 0;
        while (k < n_max && !p.escaped) {
            p = apply(*chain.word, p);
            ++k;
            if (keep(k, opt) || p.escaped || k == n_max)
                store(chain, opt, rec, k, Point2{p.z.to_complex(), p.w.to_complex(), p.escaped});
        }
        rec.n_done = k;
    } else {
        Point2 p = p0;
        std::int64_t k = 0;
        while (k < n_max && !p.escaped) {
            p = chain.forward(p);
            ++k;
            if (keep(k, opt) || p.escaped || k == n_max) store(chain, opt, rec, k, p);
        }
        rec.n_done = k;
    }
    classify(rec);
    return rec;
}

Point2 seed_from_uw(const ConjugationChain& chain, Complex u0, Complex w0) { return t_prime_inv(chain, {u0, w0}); }

TransitReport check_transit(const OrbitRecord& rec, const RotationNumber& rot, double T, double /*delta*/, double eps)
{
    TransitReport r;
    r.min_margin = std::numeric_limits<double>::infinity();
    if (rec.status != OrbitStatus::converging) {
        r.reason = "orbit is " + to_string(rec.status);
        r.first_violation = 0;
        return r;
    }
    const Complex w0 = rec.w_seq.front();
    bool ok = true;
    for (std::size_t i = 0; i < rec.n.size(); ++i) {
        const double n = static_cast<double>(rec.n[i]);
        const Complex u = rec.u_seq[i];
        const double margin = finite(u) ? u.real() - T - n / 2.0 : -std::numeric_limits<double>::infinity();
        const double dev = std::abs(rec.w_seq[i] - lambda_power(rot, rec.n[i]) * w0);
        r.min_margin = std::min(r.min_margin, margin);
        if (std::isfinite(dev)) r.max_w_dev = std::max(r.max_w_dev, dev);
        if (ok && !(margin > 0.0)) {
            ok = false;
            r.first_violation = rec.n[i];
            r.reason = "Re(u_n) <= T + n/2";
        } else if (ok && !(dev < eps)) {
            ok = false;
            r.first_violation = rec.n[i];
            r.reason = "|w_n - lambda^n w_0| >= eps";
        }
    }
    r.pass = ok;
    return r;
}

AFit estimate_A(const std::vector<std::int64_t>& n, const std::vector<Complex>& u, std::int64_t n_min,
                std::int64_t n_max)
{
    if (n_min < 10) throw DomainError("estimate_A needs n_min >= 10");
    auto fit_range = [&](std::int64_t lo, std::int64_t hi, AFit& out) {
        std::vector<std::vector<double>> rows;
        std::vector<Complex> y;
        for (std::size_t i = 0; i < n.size(); ++i) {
            if (n[i] < lo || n[i] > hi || !finite(u[i])) continue;
            const double nn = static_cast<double>(n[i]);
            rows.push_back({std::log(nn), 1.0});
            y.push_back(u[i] - nn);
        }
        if (rows.size() < 3) throw DomainError("estimate_A: too few converging samples in range");
        const FitResult f = least_squares(rows, y);
        out.A = f.coeffs[0];
        out.B = f.coeffs[1];
        out.residual = f.rms;
        out.samples = static_cast<int>(rows.size());
    };
    AFit out;
    fit_range(n_min, n_max, out);
    AFit refit;
    fit_range(2 * n_min, n_max, refit);
    out.A_refit = refit.A;
    return out;
}

AFit estimate_A(const OrbitRecord& rec, std::int64_t n_min, std::int64_t n_max)
{
    if (n_max > rec.n_done) throw DomainError("estimate_A: n_max beyond the computed orbit");
    if (rec.status == OrbitStatus::escaped) throw DomainError("estimate_A: orbit escaped");
    return estimate_A(rec.n, rec.u_seq, n_min, n_max);
}

namespace {

double median(std::vector<double> v)
{
    if (v.empty()) return 0.0;
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    double m = v[k];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
        m = 0.5 * (m + v[k - 1]);
    }
    return m;
}

}  // namespace

DriftReport check_drift(const std::vector<std::int64_t>& n, const std::vector<Complex>& u, std::int64_t n_lo,
                            std::int64_t n_hi)
{
    DriftReport r;
    std::vector<double> ratio;
    bool finite_all = true;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] < std::max<std::int64_t>(n_lo, 2) || (n_hi >= 0 && n[i] > n_hi)) continue;
        const double nn = static_cast<double>(n[i]);
        if (!finite(u[i]) || u[i] == Complex{}) {
            finite_all = false;
            continue;
        }
        const double q = std::abs(1.0 / u[i] - 1.0 / nn) * nn * nn / std::log(nn);
        ratio.push_back(q);
        r.C = std::max(r.C, q);
        r.C1 = std::max(r.C1, nn / std::abs(u[i]));
    }
    r.samples = static_cast<int>(ratio.size());
    if (ratio.size() < 10) return r;
    const std::size_t dec = ratio.size() / 10;
    r.median_first = median({ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(dec)});
    r.median_last = median({ratio.end() - static_cast<std::ptrdiff_t>(dec), ratio.end()});
    r.pass = finite_all && std::isfinite(r.C) && r.median_last <= r.median_first;
    return r;
}

DriftReport check_drift(const OrbitRecord& rec, std::int64_t n_lo, std::int64_t n_hi)
{
    if (rec.status != OrbitStatus::converging) return {};
    return check_drift(rec.n, rec.u_seq, n_lo, n_hi < 0 ? rec.n_done : n_hi);
}

void write_orbit_csv(const OrbitRecord& rec, const RotationNumber& rot, std::ostream& os)
{
    os << "n,re_z,im_z,re_w,im_w,re_u,im_u,w_dev\r\n";
    char buf[512];
    const Complex w0 = rec.initial.w;
    for (std::size_t i = 0; i < rec.n.size(); ++i) {
        const Point2& p = rec.points[i];
        const Complex u = rec.u_seq[i];
        const double dev = std::abs(p.w - lambda_power(rot, rec.n[i]) * w0);
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\r\n",
                      static_cast<long long>(rec.n[i]), p.z.real(), p.z.imag(), p.w.real(), p.w.imag(), u.real(),
                      u.imag(), dev);
        os << buf;
    }
}

}  // namespace pcyl
