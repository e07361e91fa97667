#include "doctest.h"

#include <cmath>
#include <sstream>

#include "pcyl/orbits.hpp"

using namespace pcyl;

namespace {

const ConjugationChain& chain()
{
    static const ConjugationChain c = [] {
        const ExplicitMap m = explicit_map(golden_rotation(1000));
        return build_chain(m.spec, m.word);
    }();
    return c;
}

constexpr double kT = 10.0;  // calibrated R at delta = 0.5

std::vector<std::int64_t> range_n(std::int64_t a, std::int64_t b)
{
    std::vector<std::int64_t> n;
    for (std::int64_t k = a; k <= b; ++k) n.push_back(k);
    return n;
}

}  // namespace

TEST_CASE("axis orbit stays on the axis")
{
    const Complex w0{0.7, -0.4};
    const OrbitRecord rec = iterate(chain(), {0.0, w0}, 2000);
    CHECK(rec.n_done == 2000);
    CHECK(rec.points.front().w == w0);
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        CHECK(rec.points[i].z == Complex{});
        CHECK(std::abs(rec.points[i].w - lambda_power(chain().rot, rec.n[i]) * w0) <= 1e-11);
        CHECK(std::isnan(rec.u_seq[i].real()));
    }
    CHECK(rec.status == OrbitStatus::undecided);
}

TEST_CASE("classical basin seed converges, far seed escapes")
{
    const OrbitRecord rec = iterate(chain(), {-0.05, 0.0}, 10000);
    CHECK(rec.status == OrbitStatus::converging);
    CHECK(rec.points.size() == rec.u_seq.size());
    for (std::size_t i = 101; i < rec.points.size(); ++i)
        CHECK(std::abs(rec.points[i].z) < std::abs(rec.points[i - 1].z));

    const OrbitRecord far = iterate(chain(), {3.0, 3.0}, 100);
    CHECK(far.status == OrbitStatus::escaped);
    CHECK(far.n_done <= 100);
    CHECK(far.points.back().escaped);
}

TEST_CASE("decimated storage above dense_until")
{
    OrbitOptions o;
    o.dense_until = 100;
    o.stride = 7;
    const OrbitRecord rec = iterate(chain(), {-0.05, 0.0}, 1000, o);
    CHECK(rec.n[100] == 100);
    CHECK(rec.n[101] == 105);
    CHECK(rec.n.back() == 1000);
    const OrbitRecord full = iterate(chain(), {-0.05, 0.0}, 1000);
    CHECK(rec.points.back().z == full.points.back().z);
}

TEST_CASE("double-double orbit tracks the double orbit")
{
    OrbitOptions o;
    o.precision = Precision::double_double;
    const OrbitRecord a = iterate(chain(), {-0.05, 0.01}, 3000, o);
    const OrbitRecord b = iterate(chain(), {-0.05, 0.01}, 3000);
    CHECK(std::abs(a.u_seq.back() - b.u_seq.back()) <= 1e-6);
}

TEST_CASE("transit window for calibrated seeds")
{
    const RotationNumber& rot = chain().rot;
    const OrbitRecord flat = iterate(chain(), seed_from_uw(chain(), 2 * kT, 0.0), 2000);
    const TransitReport r0 = check_transit(flat, rot, kT, 0.5, 0.1);
    CHECK(r0.pass);
    // w_n is small here but not identically 0: w = 0 is not invariant under T'.
    CHECK(r0.max_w_dev <= 1e-2);

    for (int j = 0; j < 4; ++j) {
        const Point2 p = seed_from_uw(chain(), 2 * kT, std::polar(0.125, kTwoPi * j / 4.0 + 0.2));
        const OrbitRecord rec = iterate(chain(), p, 10000);
        const TransitReport r = check_transit(rec, rot, kT, 0.5, 0.1);
        CHECK(r.pass);
        CHECK(r.first_violation == -1);
        // Re(u_{n+1}) - Re(u_n) stays in [1/2, 3/2].
        for (std::size_t i = 1; i < rec.u_seq.size(); ++i) {
            const double step = rec.u_seq[i].real() - rec.u_seq[i - 1].real();
            CHECK(step >= 0.5);
            CHECK(step <= 1.5);
        }
        // lambda^{-n} w_n settles: the tail moves less than a constant over n.
        const auto wr = [&](std::size_t i) { return lambda_power(rot, -rec.n[i]) * rec.w_seq[i]; };
        for (std::size_t i : {1000u, 3000u, 9000u}) {
            const double tail = std::abs(wr(rec.w_seq.size() - 1) - wr(i));
            CHECK(tail <= 1.0 / static_cast<double>(rec.n[i]));
        }
    }

    const GammaFn g = make_gamma(chain().spec);
    const OrbitRecord bad = iterate(chain(), seed_from_uw(chain(), -2 * g(0.5), 0.1), 2000);
    const TransitReport rb = check_transit(bad, rot, kT, 0.5, 0.1);
    CHECK_FALSE(rb.pass);
    CHECK(rb.first_violation >= 0);
    CHECK_FALSE(rb.reason.empty());
}

TEST_CASE("estimate_A on synthetic sequences")
{
    const auto n = range_n(10, 5000);
    std::vector<Complex> u, v;
    for (auto k : n) {
        u.push_back(k + 3.0 * std::log(static_cast<double>(k)) + 2.0);
        v.push_back(k + 2.0);
    }
    const AFit a = estimate_A(n, u, 10, 5000);
    CHECK(std::abs(a.A - 3.0) <= 1e-9);
    CHECK(std::abs(a.B - 2.0) <= 1e-9);
    CHECK(a.residual <= 1e-10);
    const AFit b = estimate_A(n, v, 10, 5000);
    CHECK(std::abs(b.A) <= 1e-6);
    CHECK_THROWS(estimate_A(n, u, 4000, 4001));
}

TEST_CASE("estimate_A on the explicit map matches the chain")
{
    const OrbitRecord rec = iterate(chain(), {-0.05, 0.0}, 100000);
    const AFit f = estimate_A(rec, 10000, 100000);
    CHECK(std::abs(f.A - chain().A) <= 1e-2);
    CHECK(std::abs(f.A_refit - f.A) <= 1e-2);
}

TEST_CASE("drift envelope")
{
    const auto n = range_n(10, 10000);
    std::vector<Complex> exact, root;
    for (auto k : n) {
        exact.push_back(static_cast<double>(k));
        root.push_back(k + std::sqrt(static_cast<double>(k)));
    }
    const DriftReport e = check_drift(n, exact, 10, 10000);
    CHECK(e.pass);
    CHECK(e.C == 0.0);
    CHECK_FALSE(check_drift(n, root, 10, 10000).pass);

    const OrbitRecord rec = iterate(chain(), seed_from_uw(chain(), 2 * kT, 0.125), 10000);
    const DriftReport r = check_drift(rec, 100, 10000);
    CHECK(r.pass);
    CHECK(std::isfinite(r.C));
    CHECK(r.C1 > 0.0);
}

TEST_CASE("orbit CSV")
{
    const OrbitRecord rec = iterate(chain(), {0.0, 0.5}, 3);
    std::ostringstream os;
    write_orbit_csv(rec, chain().rot, os);
    const std::string s = os.str();
    CHECK(s.rfind("n,re_z,im_z,re_w,im_w,re_u,im_u,w_dev\r\n", 0) == 0);
    int lines = 0;
    std::istringstream is(s);
    for (std::string line; std::getline(is, line);) {
        CHECK(line.back() == '\r');
        if (lines++ == 0) continue;
        CHECK(line.find(",0,0,") != std::string::npos);
    }
    CHECK(lines == 5);
}
