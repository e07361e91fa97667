#include "pcyl/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pcyl {

namespace {

DoubleDouble frac(DoubleDouble x) { return x - floor(x); }

std::vector<int> expand_cf(DoubleDouble x, int terms)
{
    std::vector<int> cf;
    x = frac(x);
    for (int i = 0; i < terms; ++i) {
        if (x.hi < 1e-25) break;
        DoubleDouble inv = DoubleDouble(1.0) / x;
        DoubleDouble a = floor(inv);
        if (a.hi > 1e9) break;
        cf.push_back(static_cast<int>(a.hi));
        x = inv - a;
    }
    return cf;
}

DoubleDouble eval_cf(const std::vector<int>& a)
{
    DoubleDouble x(0.0);
    for (auto it = a.rbegin(); it != a.rend(); ++it) x = DoubleDouble(1.0) / (DoubleDouble(*it) + x);
    return x;
}

void finish(RotationNumber& rot, double r, std::int64_t dio_range)
{
    rot.lambda = unit_phase(rot.theta).to_complex();
    rot.dio_r = r;
    const DiophantineFit fit = diophantine_fit(rot, r, dio_range);
    rot.dio_c = fit.c;
    rot.resonant = fit.resonant;
}

}  // namespace

RotationNumber golden_rotation(std::int64_t dio_range)
{
    RotationNumber rot;
    rot.theta = (sqrt(DoubleDouble(5.0)) - DoubleDouble(1.0)) * DoubleDouble(0.5);
    rot.cf.assign(40, 1);
    rot.label = "golden";
    finish(rot, 1.0, dio_range);
    return rot;
}

RotationNumber rotation_from_theta(DoubleDouble theta, double r, std::int64_t dio_range, int cf_terms)
{
    RotationNumber rot;
    rot.theta = frac(theta);
    rot.cf = expand_cf(rot.theta, cf_terms);
    std::ostringstream os;
    os.precision(17);
    os << "theta:" << rot.theta.to_double();
    rot.label = os.str();
    finish(rot, r, dio_range);
    return rot;
}

RotationNumber rotation_from_cf(const std::vector<int>& pq, bool periodic, double r, std::int64_t dio_range)
{
    if (pq.empty()) throw ConfigError("continued fraction needs at least one partial quotient");
    for (int a : pq)
        if (a < 1) throw ConfigError("continued-fraction partial quotients must be positive integers");
    RotationNumber rot;
    std::ostringstream os;
    os << "cf:";
    for (std::size_t i = 0; i < pq.size(); ++i) os << (i ? "," : "") << pq[i];
    if (periodic) {
        // 120 quotients of the repeated block already pin theta below 1e-32.
        std::vector<int> longer;
        while (longer.size() < 120) longer.insert(longer.end(), pq.begin(), pq.end());
        rot.theta = frac(eval_cf(longer));
        rot.cf.assign(longer.begin(), longer.begin() + 40);
        os << ",...";
    } else {
        rot.theta = frac(eval_cf(pq));
        rot.cf = pq;
    }
    rot.label = os.str();
    finish(rot, r, dio_range);
    return rot;
}

ComplexDD lambda_power_dd(const RotationNumber& rot, std::int64_t n)
{
    if (n == 0) return ComplexDD(DoubleDouble(1.0));
    const bool neg = n < 0;
    const double an = std::abs(static_cast<double>(n));
    ComplexDD p = unit_phase(rot.theta * DoubleDouble(an));
    return neg ? ComplexDD(p.re, -p.im) : p;
}

Complex lambda_power(const RotationNumber& rot, std::int64_t n) { return lambda_power_dd(rot, n).to_complex(); }

double divisor_modulus(const RotationNumber& rot, std::int64_t n)
{
    const double f = frac(rot.theta * DoubleDouble(static_cast<double>(n))).to_double();
    return 2.0 * std::abs(std::sin(kPi * std::min(f, 1.0 - f)));
}

DiophantineFit diophantine_fit(const RotationNumber& rot, double r, std::int64_t Nmax)
{
    if (Nmax < 1) throw DomainError("diophantine_fit needs Nmax >= 1");
    DiophantineFit fit;
    fit.c = std::numeric_limits<double>::infinity();
    for (std::int64_t n = 1; n <= Nmax; ++n) {
        const double v = std::pow(static_cast<double>(n), r) * divisor_modulus(rot, n);
        if (v < fit.c) {
            fit.c = v;
            fit.argmin = n;
        }
    }
    fit.resonant = fit.c < kResonanceThreshold;
    return fit;
}

SumBoundReport verify_sum_bound(const RotationNumber& rot, std::int64_t n_max, std::int64_t N_max,
                                const std::vector<std::int64_t>& ms)
{
    if (n_max < 1 || N_max < 1) throw DomainError("verify_sum_bound needs n_max, N_max >= 1");
    SumBoundReport rep;
    for (std::int64_t n = 1; n <= n_max; ++n) {
        const double div = divisor_modulus(rot, n);
        const bool resonant = div <= kSmallDivisorCutoff;
        const Complex step = lambda_power(rot, n);
        for (std::int64_t m : ms) {
            if (m > N_max) continue;
            Complex acc{};
            Complex term{};
            for (std::int64_t j = m; j <= N_max; ++j) {
                // Re-seed the running power every 1024 steps to keep drift out.
                if (((j - m) & 1023) == 0) term = lambda_power(rot, j * n);
                acc += term;
                term *= step;
                ++rep.sums_checked;
                if (resonant) {
                    if (rep.resonant_n == 0) rep.resonant_n = n;
                    if (rep.resonant_n == n) rep.resonant_growth = std::max(rep.resonant_growth, std::abs(acc));
                    continue;
                }
                const double ratio = std::abs(acc) * div / 2.0;
                if (ratio > rep.max_ratio) {
                    rep.max_ratio = ratio;
                    rep.worst_n = n;
                    rep.worst_m = m;
                    rep.worst_N = j;
                }
            }
        }
    }
    rep.pass = rep.resonant_n == 0 && rep.max_ratio <= 1.0 + 1e-9;
    return rep;
}

}  // namespace pcyl
