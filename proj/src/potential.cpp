#include "nehari/potential.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "nehari/errors.hpp"
#include "nehari/params.hpp"

namespace nehari {

PotentialSpec PotentialSpec::constant(double v0) {
    PotentialSpec p;
    p.kind = PotentialKind::constant;
    p.floor = v0;
    return p;
}

PotentialSpec PotentialSpec::power_law(double gamma) {
    PotentialSpec p;
    p.kind = PotentialKind::power_law;
    p.growth = gamma;
    return p;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> values) {
    PotentialSpec p;
    p.kind = PotentialKind::tabulated;
    p.table = std::move(values);
    return p;
}

void validate_potential(const PotentialSpec& pot, const GridSpec& g) {
    validate_grid(g);
    switch (pot.kind) {
        case PotentialKind::constant:
            if (!(pot.floor > 0) || !std::isfinite(pot.floor))
                throw config_error("assumption (V0) violated: constant potential needs a positive value");
            break;
        case PotentialKind::power_law:
            if (!std::isfinite(pot.growth) || !(pot.growth > 0.5 * g.dim))
                throw config_error("assumption (V1) violated: power-law potential needs gamma > N/2");
            break;
        case PotentialKind::tabulated: {
            if (pot.table.size() != g.size())
                throw config_error("tabulated potential does not match the grid size");
            double lo = std::numeric_limits<double>::infinity();
            for (double x : pot.table) {
                if (!std::isfinite(x)) throw config_error("tabulated potential has non-finite entries");
                lo = std::min(lo, x);
            }
            if (!(lo > 0))
                throw config_error("assumption (V0) violated: tabulated potential must be strictly positive");
            break;
        }
    }
}

ScalarField potential_samples(const PotentialSpec& pot, const GridSpec& g) {
    validate_potential(pot, g);
    ScalarField f(g);
    switch (pot.kind) {
        case PotentialKind::constant:
            for (double& x : f.values) x = pot.floor;
            break;
        case PotentialKind::power_law:
            if (g.dim == 1) {
                for (int i = 0; i < g.points_per_dim; ++i) {
                    const double x = g.coordinate(i);
                    f.values[i] = std::pow(1.0 + x * x, pot.growth);
                }
            } else {
                for (int ix = 0; ix < g.points_per_dim; ++ix) {
                    const double x = g.coordinate(ix);
                    for (int iy = 0; iy < g.points_per_dim; ++iy) {
                        const double y = g.coordinate(iy);
                        f.at(ix, iy) = std::pow(1.0 + x * x + y * y, pot.growth);
                    }
                }
            }
            break;
        case PotentialKind::tabulated:
            f.values = pot.table;
            break;
    }
    return f;
}

namespace {

double weighted_l2(const ScalarField& f, const ScalarField& weight) {
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = weight.values[i] * f.values[i] * f.values[i];
    return f.grid.cell_volume() * stable_sum(terms);
}

bool field_is_zero(const ScalarField& f) {
    bool zero = true;
    for (double x : f.values) {
        if (!std::isfinite(x)) throw std::invalid_argument("field has non-finite values");
        if (x != 0.0) zero = false;
    }
    return zero;
}

}  // namespace

double x_norm_sq(const FieldPair& w, const PotentialSpec& pot_u, const PotentialSpec& pot_v) {
    require_same_grid(w.u, w.v);
    const ScalarField vu = potential_samples(pot_u, w.u.grid);
    const ScalarField vv = potential_samples(pot_v, w.v.grid);
    return gagliardo_seminorm_sq(w.u) + gagliardo_seminorm_sq(w.v) +
           weighted_l2(w.u, vu) + weighted_l2(w.v, vv);
}

void validate_params(const ProblemParams& prm) {
    validate_grid(prm.grid);
    validate_exponents(prm.exp);
    if (!(prm.theta > 0) || !std::isfinite(prm.theta))
        throw config_error("assumption (P) violated: need theta > 0");
    if (!(prm.lambda > 0) || !std::isfinite(prm.lambda))
        throw config_error("assumption (P) violated: need lambda > 0");
    if (!(prm.grid.dim > 2.0 * prm.grid.s))
        throw config_error("assumption (P) violated: need N > 2s");
    if (!(prm.exp.eta() < prm.grid.critical_exponent()))
        throw config_error("assumption (P) violated: need alpha + beta < 2N/(N-2s)");
    validate_potential(prm.pot_u, prm.grid);
    validate_potential(prm.pot_v, prm.grid);
}

FiberingCoefficients coefficients_of(const FieldPair& w, const ProblemParams& prm) {
    require_same_grid(w.u, w.v);
    if (!(w.u.grid == prm.grid))
        throw std::invalid_argument("pair does not live on the problem grid");
    const bool zu = field_is_zero(w.u);
    const bool zv = field_is_zero(w.v);
    if (zu && zv) throw degenerate_input("zero pair has no fibering coefficients");
    FiberingCoefficients f;
    f.ex = prm.exp;
    f.a = x_norm_sq(w, prm.pot_u, prm.pot_v);
    f.b = prm.theta * coupling_integral(w, prm.exp.alpha, prm.exp.beta);
    f.c = lp_norm_pow(w.u, prm.exp.p);
    f.d = lp_norm_pow(w.v, prm.exp.q);
    return f;
}

bool in_coupling_set(const FieldPair& w, const ProblemParams& prm) {
    return coupling_integral(w, prm.exp.alpha, prm.exp.beta) > coupling_threshold(prm.grid);
}

}  // namespace nehari
