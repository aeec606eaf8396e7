#include "nehari/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nehari/errors.hpp"

namespace nehari {

void validate_exponents(const Exponents& ex) {
    if (!(ex.p >= 1)) throw config_error("assumption (P) violated: need p >= 1");
    if (!(ex.p <= ex.q)) throw config_error("assumption (P) violated: need p <= q");
    if (!(ex.q < 2)) throw config_error("assumption (P) violated: need q < 2");
    if (!(ex.alpha > 1)) throw config_error("assumption (P) violated: need alpha > 1");
    if (!(ex.beta > 1)) throw config_error("assumption (P) violated: need beta > 1");
    if (!(ex.eta() > 2)) throw config_error("assumption (P) violated: need alpha + beta > 2");
}

namespace {

constexpr double kScaleTol = 1e-12;  // bracket width target, relative to the root
constexpr int kMaxIter = 200;

void require_ray_scale(double t) {
    if (!(t > 0) || !std::isfinite(t))
        throw std::domain_error("ray scale t must be positive and finite");
}

void require_usable(const FiberingCoefficients& f) {
    if (!(f.a > 0)) throw std::invalid_argument("coefficient a must be positive");
    if (f.c < 0 || f.d < 0) throw std::invalid_argument("coefficients c, d must be nonnegative");
    if (!(f.c + f.d > 0)) throw std::invalid_argument("c + d must be positive");
}

void require_coupled(const FiberingCoefficients& f) {
    require_usable(f);
    validate_exponents(f.ex);
    if (!(f.b > 0))
        throw degenerate_input("coupling coefficient b must be positive (pair outside the coupled cone)");
}

// f strictly monotone on [lo, hi] with a sign change across the bracket.
// Newton steps clipped to the shrinking bisection bracket.
template <class F, class DF>
double hybrid_root(const F& fn, const DF& dfn, double lo, double hi) {
    double flo = fn(lo);
    if (flo == 0) return lo;
    if (fn(hi) == 0) return hi;
    const bool lo_pos = flo > 0;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kMaxIter; ++it) {
        const double width = hi - lo;
        if (width <= kScaleTol * std::abs(hi)) break;
        const double fx = fn(x);
        if (fx == 0) return x;
        if ((fx > 0) == lo_pos) lo = x; else hi = x;
        const double dfx = dfn(x);
        double xn = (dfx != 0) ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        x = xn;
    }
    return 0.5 * (lo + hi);
}

struct QuotientParts {
    double num, dnum;  // numerator of the quotient and its t-derivative
    double den, dden;
};

QuotientParts parts_nehari(const FiberingCoefficients& f, double t) {
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    const double t2 = t * t, te = std::pow(t, eta);
    const double tp = std::pow(t, p), tq = std::pow(t, q);
    return {f.a * t2 - f.b * te,
            2 * f.a * t - eta * f.b * te / t,
            f.c * tp + f.d * tq,
            p * f.c * tp / t + q * f.d * tq / t};
}

QuotientParts parts_energy(const FiberingCoefficients& f, double t) {
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    const double t2 = t * t, te = std::pow(t, eta);
    const double tp = std::pow(t, p), tq = std::pow(t, q);
    return {0.5 * f.a * t2 - f.b * te / eta,
            f.a * t - f.b * te / t,
            f.c * tp / p + f.d * tq / q,
            f.c * tp / t + f.d * tq / t};
}

// Shared peak search.  Both quotients have numerator log-derivative
// t*N'/N strictly decreasing from 2 (in t < its positive zero) and
// denominator log-derivative t*D'/D nondecreasing inside [p, q]; their
// unique crossing is the interior maximum.  `hi` must be the zero of N'.
template <class Parts, class DPhi>
Peak peak_search(const FiberingCoefficients& f, const Parts& parts, const DPhi& dphi, double hi) {
    auto phi = [&](double t) {
        const QuotientParts u = parts(f, t);
        return t * u.dnum / u.num - t * u.dden / u.den;
    };
    // walk the lower end down until the sign is pinned (phi -> 2 - p > 0)
    double lo = 0.5 * hi;
    int guard = 0;
    while (phi(lo) <= 0) {
        lo *= 0.5;
        if (++guard > 600)
            throw degenerate_input("peak bracket collapsed; coefficients are numerically degenerate");
    }
    const double scale = hybrid_root(phi, dphi, lo, hi);
    const QuotientParts u = parts(f, scale);
    return {scale, u.num / u.den};
}

} // namespace

FiberingCoefficients scale_coefficients(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    FiberingCoefficients s = f;
    s.a = f.a * t * t;
    s.b = f.b * std::pow(t, f.ex.eta());
    s.c = f.c * std::pow(t, f.ex.p);
    s.d = f.d * std::pow(t, f.ex.q);
    return s;
}

double quotient_nehari(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    require_usable(f);
    const QuotientParts u = parts_nehari(f, t);
    return u.num / u.den;
}

double quotient_energy(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    require_usable(f);
    const QuotientParts u = parts_energy(f, t);
    return u.num / u.den;
}

double quotient_nehari_derivative(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    require_usable(f);
    const QuotientParts u = parts_nehari(f, t);
    return (u.dnum * u.den - u.num * u.dden) / (u.den * u.den);
}

double quotient_energy_derivative(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    require_usable(f);
    const QuotientParts u = parts_energy(f, t);
    return (u.dnum * u.den - u.num * u.dden) / (u.den * u.den);
}

Peak peak_nehari(const FiberingCoefficients& f) {
    require_coupled(f);
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    const double hi = std::pow(2 * f.a / (eta * f.b), 1.0 / (eta - 2));
    auto dphi = [&](double t) {
        const double num = f.a * t * t - f.b * std::pow(t, eta);
        const double den = f.c * std::pow(t, p) + f.d * std::pow(t, q);
        const double dn = -(eta - 2) * (eta - 2) * f.a * f.b * std::pow(t, eta + 1) / (num * num);
        const double dd = (q - p) * (q - p) * f.c * f.d * std::pow(t, p + q - 1) / (den * den);
        return dn - dd;
    };
    return peak_search(f, parts_nehari, dphi, hi);
}

Peak peak_energy(const FiberingCoefficients& f) {
    require_coupled(f);
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    const double hi = std::pow(f.a / f.b, 1.0 / (eta - 2));
    auto dphi = [&](double t) {
        const double num = 0.5 * f.a * t * t - f.b * std::pow(t, eta) / eta;
        const double den = f.c * std::pow(t, p) / p + f.d * std::pow(t, q) / q;
        const double dn = -(eta - 2) * (eta - 2) / (2 * eta) * f.a * f.b * std::pow(t, eta + 1) / (num * num);
        const double dd = (q - p) * (q - p) / (p * q) * f.c * f.d * std::pow(t, p + q - 1) / (den * den);
        return dn - dd;
    };
    return peak_search(f, parts_energy, dphi, hi);
}

ProjectionScales projection_scales(const FiberingCoefficients& f, double lambda) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw std::domain_error("lambda must be positive and finite");
    ProjectionScales out;
    out.peak = peak_nehari(f);

    const double band = 1e-9 * (1 + std::abs(out.peak.value));
    if (std::abs(lambda - out.peak.value) <= band) {
        out.kind = RootKind::tangent;
        out.plus = out.minus = out.peak.scale;
        return out;
    }
    if (lambda > out.peak.value) {
        out.kind = RootKind::none;
        return out;
    }

    auto g = [&](double t) { return quotient_nehari(f, t) - lambda; };
    auto dg = [&](double t) { return quotient_nehari_derivative(f, t); };

    // left root: quotient climbs from 0 to the peak value
    double lo = 0.5 * out.peak.scale;
    int guard = 0;
    while (g(lo) >= 0) {
        lo *= 0.5;
        if (++guard > 600) throw degenerate_input("left projection bracket collapsed");
    }
    out.plus = hybrid_root(g, dg, lo, out.peak.scale);

    // right root: the quotient falls to zero at (a/b)^{1/(eta-2)}
    double hi = std::pow(f.a / f.b, 1.0 / (f.ex.eta() - 2));
    guard = 0;
    while (g(hi) >= 0) {
        hi *= 2;
        if (++guard > 600) throw degenerate_input("right projection bracket collapsed");
    }
    out.minus = hybrid_root(g, dg, out.peak.scale, hi);
    out.kind = RootKind::two;
    return out;
}

EqualExponentForms closed_form_equal_exponents(const FiberingCoefficients& f, double theta) {
    require_coupled(f);
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    if (std::abs(p - q) > 1e-12 * (1 + std::abs(q)))
        throw std::invalid_argument("closed forms require equal exponents p == q");
    if (!(theta > 0)) throw std::invalid_argument("theta must be positive");

    const double x = (2 - q) / (eta - 2);      // exponent on the concave side
    const double y = (eta - q) / (eta - 2);    // = 1 + x
    const double a = f.a, b = f.b;
    const double coupling = b / theta;         // raw coupling integral

    EqualExponentForms out;
    out.scale_nehari = std::pow((2 - q) * a / ((eta - q) * b), 1.0 / (eta - 2));
    out.scale_energy = std::pow((2 - q) * eta * a / (2 * (eta - q) * b), 1.0 / (eta - 2));
    out.const_nehari = std::pow(theta, -x) * (eta - 2) * std::pow(eta - q, -y) * std::pow(2 - q, x);
    out.const_energy = q * (eta - 2) * std::pow((2 - q) * eta / theta, x) * std::pow(0.5 / (eta - q), y);

    const double shape = std::pow(a, y) * std::pow(coupling, -x) / (f.c + f.d);
    out.value_nehari = out.const_nehari * shape;
    out.value_energy = out.const_energy * shape;
    return out;
}

double constant_ratio_equal_exponents(double q, double eta) {
    if (!(q >= 1 && q < 2 && eta > 2))
        throw std::invalid_argument("constant ratio needs 1 <= q < 2 < eta");
    const double y = (eta - q) / (eta - 2);
    return std::pow(2.0, y) * std::pow(eta, (q - 2) / (eta - 2)) / q;
}

bool constant_inequality_holds(double q, double eta) {
    return constant_ratio_equal_exponents(q, eta) > 1.0;
}

MediantBounds mediant_bounds(double a1, double b1, double a2, double b2) {
    if (!(b1 > 0) || !(b2 > 0))
        throw std::invalid_argument("mediant bounds need positive denominators");
    const double r1 = a1 / b1, r2 = a2 / b2;
    return {std::min(r1, r2), (a1 + a2) / (b1 + b2), std::max(r1, r2)};
}

double quotient_gap_residual(const FiberingCoefficients& f, double t) {
    require_ray_scale(t);
    require_usable(f);
    const double p = f.ex.p, q = f.ex.q;
    const double tp = f.c * std::pow(t, p), tq = f.d * std::pow(t, q);
    const double lhs = quotient_nehari(f, t) - quotient_energy(f, t);
    const double weight = (q * tp + p * tq) / (tp + tq);
    const double rhs = t / (p * q) * weight * quotient_energy_derivative(f, t);
    return std::abs(lhs - rhs) / (1 + std::abs(lhs));
}

double stationary_coupling_residual(const FiberingCoefficients& f, Channel ch) {
    require_usable(f);
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();
    double rhs;
    if (ch == Channel::nehari) {
        rhs = f.a * ((2 - p) * f.c + (2 - q) * f.d) / ((eta - p) * f.c + (eta - q) * f.d);
    } else {
        rhs = f.a * ((1 / p - 0.5) * f.c + (1 / q - 0.5) * f.d) /
              ((1 / p - 1 / eta) * f.c + (1 / q - 1 / eta) * f.d);
    }
    return std::abs(f.b - rhs) / (1 + std::abs(f.b));
}

std::pair<double, double> derivative_match_residuals(const FiberingCoefficients& f, double t) {
    require_usable(f);
    const FiberingCoefficients s = scale_coefficients(f, t);
    const double p = f.ex.p, q = f.ex.q, eta = f.ex.eta();

    // re-solving lambda from each quotient puts the scaled pair exactly on
    // the matching constraint, where the identities are exact
    const double lam_n = quotient_nehari(f, t);
    const double lhs_n = quotient_nehari_derivative(f, t);
    const double second = 2 * s.a - lam_n * (p * s.c + q * s.d) - eta * s.b;
    const double res_n = std::abs(lhs_n - second / (t * (s.c + s.d))) / (1 + std::abs(lhs_n));

    // the first-derivative channel divides by the p/q-weighted norm block
    const double lam_e = quotient_energy(f, t);
    const double lhs_e = quotient_energy_derivative(f, t);
    const double first = s.a - lam_e * (s.c + s.d) - s.b;
    const double res_e = std::abs(lhs_e - first / (t * (s.c / p + s.d / q))) / (1 + std::abs(lhs_e));
    return {res_n, res_e};
}

} // namespace nehari
