#include "nehari/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "nehari/errors.hpp"

namespace nehari {

const char* to_string(NehariTag tag) {
    switch (tag) {
        case NehariTag::NPlus: return "NPlus";
        case NehariTag::NMinus: return "NMinus";
        case NehariTag::NZero: return "NZero";
        case NehariTag::OffManifold: return "OffManifold";
    }
    return "?";
}

double energy_value(const FiberingCoefficients& f, double lambda) {
    const Exponents& ex = f.ex;
    return 0.5 * f.a - lambda * (f.c / ex.p + f.d / ex.q) - f.b / ex.eta();
}

double d1_value(const FiberingCoefficients& f, double lambda) {
    return f.a - lambda * (f.c + f.d) - f.b;
}

double d2_value(const FiberingCoefficients& f, double lambda) {
    const Exponents& ex = f.ex;
    return f.a - lambda * ((ex.p - 1) * f.c + (ex.q - 1) * f.d) - (ex.eta() - 1) * f.b;
}

namespace {

// raw integral block; tolerates the zero pair (all coefficients zero),
// unlike coefficients_of which refuses it
FiberingCoefficients raw_coefficients(const ProblemParams& prm, const FieldPair& w) {
    require_same_grid(w.u, w.v);
    if (!(w.u.grid == prm.grid))
        throw std::invalid_argument("pair does not live on the problem grid");
    FiberingCoefficients f;
    f.ex = prm.exp;
    f.a = x_norm_sq(w, prm.pot_u, prm.pot_v);
    f.b = prm.theta * coupling_integral(w, prm.exp.alpha, prm.exp.beta);
    f.c = lp_norm_pow(w.u, prm.exp.p);
    f.d = lp_norm_pow(w.v, prm.exp.q);
    return f;
}

// |x|^r with the 0^0 corner pinned to 0
double abs_pow(double x, double r) {
    const double ax = std::abs(x);
    if (ax == 0.0) return 0.0;
    return std::pow(ax, r);
}

// |x|^r sign(x)
double signed_pow(double x, double r) {
    const double m = abs_pow(x, r);
    return x < 0 ? -m : m;
}

}  // namespace

double energy(const ProblemParams& prm, const FieldPair& w) {
    return energy_value(raw_coefficients(prm, w), prm.lambda);
}

double d_energy_radial(const ProblemParams& prm, const FieldPair& w) {
    return d1_value(raw_coefficients(prm, w), prm.lambda);
}

double d2_energy_radial(const ProblemParams& prm, const FieldPair& w) {
    return d2_value(raw_coefficients(prm, w), prm.lambda);
}

FieldPair gradient(const ProblemParams& prm, const FieldPair& w) {
    require_same_grid(w.u, w.v);
    if (!(w.u.grid == prm.grid))
        throw std::invalid_argument("pair does not live on the problem grid");
    const Exponents& ex = prm.exp;
    const double eta = ex.eta();
    const ScalarField vu = potential_samples(prm.pot_u, prm.grid);
    const ScalarField vv = potential_samples(prm.pot_v, prm.grid);
    FieldPair g{fractional_laplacian_apply(w.u), fractional_laplacian_apply(w.v)};
    const std::size_t total = prm.grid.size();
    for (std::size_t i = 0; i < total; ++i) {
        const double u = w.u.values[i];
        const double v = w.v.values[i];
        g.u.values[i] += vu.values[i] * u - prm.lambda * signed_pow(u, ex.p - 1) -
                         (prm.theta * ex.alpha / eta) * signed_pow(u, ex.alpha - 1) * abs_pow(v, ex.beta);
        g.v.values[i] += vv.values[i] * v - prm.lambda * signed_pow(v, ex.q - 1) -
                         (prm.theta * ex.beta / eta) * abs_pow(u, ex.alpha) * signed_pow(v, ex.beta - 1);
    }
    return g;
}

double gradient_sup_norm(const FieldPair& g) {
    double m = 0.0;
    for (double x : g.u.values) m = std::max(m, std::abs(x));
    for (double x : g.v.values) m = std::max(m, std::abs(x));
    return m;
}

NehariClass classify(const ProblemParams& prm, const FieldPair& w, double tol) {
    const FiberingCoefficients f = coefficients_of(w, prm);
    NehariClass cls;
    cls.d1 = d1_value(f, prm.lambda);
    cls.d2 = d2_value(f, prm.lambda);
    const double band = tol * (1.0 + f.a);
    if (std::abs(cls.d1) > band)
        cls.tag = NehariTag::OffManifold;
    else if (std::abs(cls.d2) <= band)
        cls.tag = NehariTag::NZero;
    else
        cls.tag = cls.d2 > 0 ? NehariTag::NPlus : NehariTag::NMinus;
    return cls;
}

double rayleigh_n(const ProblemParams& prm, const FieldPair& w) {
    return quotient_nehari(coefficients_of(w, prm), 1.0);
}

double rayleigh_e(const ProblemParams& prm, const FieldPair& w) {
    return quotient_energy(coefficients_of(w, prm), 1.0);
}

std::pair<double, double> derivative_identity_residuals(const ProblemParams& prm,
                                                        const FieldPair& w, double t) {
    return derivative_match_residuals(coefficients_of(w, prm), t);
}

double nehari_energy_form(const FiberingCoefficients& f, double lambda) {
    const Exponents& ex = f.ex;
    const double eta = ex.eta();
    return (0.5 - 1 / eta) * f.a + lambda * (1 / eta - 1 / ex.p) * f.c +
           lambda * (1 / eta - 1 / ex.q) * f.d;
}

double nminus_norm_floor(const Exponents& ex, double theta, double s_hat) {
    validate_exponents(ex);
    if (!(theta > 0) || !(s_hat > 0))
        throw std::invalid_argument("norm floor needs theta > 0 and s_hat > 0");
    const double eta = ex.eta();
    return std::pow((2 - ex.q) / (theta * (eta - ex.q) * std::pow(s_hat, eta)),
                    1 / (eta - 2));
}

}  // namespace nehari
