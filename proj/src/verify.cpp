#include "nehari/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "nehari/energy.hpp"
#include "nehari/rng.hpp"
#include "nehari/solver.hpp"

namespace nehari {

namespace {

double sq(double x) { return x * x; }

// admissible coefficient sets cycling through the exponent corners
// p = 1, p = q, p < q
FiberingCoefficients random_set(Rng& rng, int mode) {
    FiberingCoefficients f;
    f.a = rng.log_uniform(0.2, 5.0);
    f.b = rng.log_uniform(0.2, 5.0);
    f.c = rng.log_uniform(0.2, 5.0);
    f.d = rng.log_uniform(0.2, 5.0);
    double p, q;
    switch (mode % 3) {
        case 0:
            p = 1.0;
            q = rng.uniform(1.0, 1.95);
            break;
        case 1:
            p = q = rng.uniform(1.05, 1.95);
            break;
        default:
            p = rng.uniform(1.0, 1.9);
            q = rng.uniform(p + 0.02, 1.98);
            break;
    }
    f.ex = {p, q, rng.uniform(1.05, 2.5), rng.uniform(1.05, 2.5)};
    return f;
}

struct Row {
    SuiteResult res;

    explicit Row(std::string name) { res.name = std::move(name); }

    void check(double residual, double tol, const std::string& what) {
        ++res.checks;
        res.worst = std::max(res.worst, residual);
        if (residual > tol && res.detail.empty())
            res.detail = what + " residual " + std::to_string(residual);
    }
    void require(bool ok, const std::string& what) {
        ++res.checks;
        if (!ok && res.detail.empty()) res.detail = what;
    }
    SuiteResult done() {
        res.pass = res.detail.empty();
        return res;
    }
};

ScalarField random_field(const GridSpec& g, Rng& rng, bool signed_values) {
    ScalarField f(g);
    const double L = g.half_width;
    for (int bump = 0; bump < 3; ++bump) {
        const double cx = rng.uniform(-0.4 * L, 0.4 * L);
        const double cy = rng.uniform(-0.4 * L, 0.4 * L);
        const double w = rng.log_uniform(std::max(2.0 * g.spacing(), L / 25.0), 0.4 * L);
        const double amp = signed_values ? rng.uniform(-1.5, 1.5) : rng.log_uniform(0.3, 2.0);
        if (g.dim == 1) {
            for (int i = 0; i < g.points_per_dim; ++i)
                f.at(static_cast<std::size_t>(i)) +=
                    amp * std::exp(-0.5 * sq((g.coordinate(i) - cx) / w));
        } else {
            for (int ix = 0; ix < g.points_per_dim; ++ix)
                for (int iy = 0; iy < g.points_per_dim; ++iy)
                    f.at(ix, iy) += amp * std::exp(-0.5 * (sq((g.coordinate(ix) - cx) / w) +
                                                           sq((g.coordinate(iy) - cy) / w)));
        }
    }
    return f;
}

double field_inner(const ScalarField& f, const ScalarField& g) {
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = f.at(i) * g.at(i);
    return f.grid.cell_volume() * stable_sum(terms);
}

SuiteResult quotient_gap_identity(std::uint64_t seed) {
    Row row("quotient_gap_identity");
    Rng rng = Rng::stream(seed, 1);
    for (int i = 0; i < 300; ++i) {
        const FiberingCoefficients f = random_set(rng, i);
        for (double t : {0.3, 1.0, 2.7})
            row.check(quotient_gap_residual(f, t), 1e-9, "gap identity");
    }
    return row.done();
}

SuiteResult derivative_identities(std::uint64_t seed, bool energy_channel) {
    Row row(energy_channel ? "derivative_identity_energy" : "derivative_identity_constraint");
    Rng rng = Rng::stream(seed, energy_channel ? 3 : 2);
    for (int i = 0; i < 300; ++i) {
        const FiberingCoefficients f = random_set(rng, i);
        for (double t : {0.4, 1.0, 2.2}) {
            const auto [rn, re] = derivative_match_residuals(f, t);
            row.check(energy_channel ? re : rn, 1e-9, "derivative identity");
        }
    }
    return row.done();
}

SuiteResult peak_coupling_mediant(std::uint64_t seed, Channel ch) {
    Row row(ch == Channel::nehari ? "peak_coupling_mediant_constraint"
                                  : "peak_coupling_mediant_energy");
    Rng rng = Rng::stream(seed, ch == Channel::nehari ? 4 : 5);
    for (int i = 0; i < 300; ++i) {
        const FiberingCoefficients f = random_set(rng, i);
        const Peak pk = ch == Channel::nehari ? peak_nehari(f) : peak_energy(f);
        const FiberingCoefficients at_peak = scale_coefficients(f, pk.scale);
        row.check(stationary_coupling_residual(at_peak, ch), 1e-9, "peak mediant");
    }
    return row.done();
}

SuiteResult equal_exponent_closed_forms(std::uint64_t seed) {
    Row row("equal_exponent_closed_forms");
    Rng rng = Rng::stream(seed, 6);
    for (int i = 0; i < 200; ++i) {
        FiberingCoefficients f = random_set(rng, 1);
        const double theta = rng.log_uniform(0.3, 3.0);
        const EqualExponentForms forms = closed_form_equal_exponents(f, theta);
        const Peak pn = peak_nehari(f);
        const Peak pe = peak_energy(f);
        row.check(std::fabs(forms.scale_nehari - pn.scale) / pn.scale, 1e-8, "t_n closed form");
        row.check(std::fabs(forms.value_nehari - pn.value) / pn.value, 1e-8, "peak closed form");
        row.check(std::fabs(forms.scale_energy - pe.scale) / pe.scale, 1e-8, "t_e closed form");
        row.check(std::fabs(forms.value_energy - pe.value) / pe.value, 1e-8,
                  "energy peak closed form");
    }
    return row.done();
}

SuiteResult worked_instance() {
    Row row("worked_instance");
    FiberingCoefficients f;
    f.a = f.b = f.c = f.d = 1.0;
    f.ex = {1.5, 1.5, 1.5, 1.5};
    const Peak pn = peak_nehari(f);
    const Peak pe = peak_energy(f);
    row.check(std::fabs(pn.scale - 1.0 / 3.0), 1e-6, "t_n");
    row.check(std::fabs(pn.value - 1.0 / (3.0 * std::sqrt(3.0))), 1e-6, "peak value");
    row.check(std::fabs(pe.scale - 0.5), 1e-6, "t_e");
    row.check(std::fabs(pe.value - std::sqrt(2.0) / 8.0), 1e-6, "energy peak value");
    const EqualExponentForms forms = closed_form_equal_exponents(f, 1.0);
    row.check(std::fabs(forms.const_nehari - 2.0 / (3.0 * std::sqrt(3.0))), 1e-6, "C");
    row.check(std::fabs(forms.const_energy - 0.5 / std::sqrt(2.0)), 1e-6, "C tilde");
    row.check(std::fabs(constant_ratio_equal_exponents(1.5, 3.0) - 1.0887), 1e-4,
              "constant ratio");
    const ProjectionScales ps = projection_scales(f, 0.1);
    row.require(ps.kind == RootKind::two, "projection roots at lambda 0.1");
    row.check(std::fabs(quotient_nehari(f, ps.plus) - 0.1), 1e-9, "left root");
    row.check(std::fabs(quotient_nehari(f, ps.minus) - 0.1), 1e-9, "right root");
    return row.done();
}

SuiteResult unique_quotient_maximum(std::uint64_t seed) {
    Row row("unique_quotient_maximum");
    Rng rng = Rng::stream(seed, 7);
    constexpr int kPoints = 10000;
    std::vector<double> values(kPoints);
    for (int i = 0; i < 100; ++i) {
        const FiberingCoefficients f = random_set(rng, i);
        const Peak pk = peak_nehari(f);
        const double lo = 0.02 * pk.scale, hi = 50.0 * pk.scale;
        const double ratio = std::pow(hi / lo, 1.0 / (kPoints - 1));
        double t = lo;
        for (int k = 0; k < kPoints; ++k, t *= ratio) values[k] = quotient_nehari(f, t);

        int up_to_down = 0, down_to_up = 0, prev = 0, argmax = 0;
        for (int k = 1; k < kPoints; ++k) {
            if (values[k] > values[argmax]) argmax = k;
            const double diff = values[k] - values[k - 1];
            const int sign = std::fabs(diff) <= 1e-14 * (1.0 + std::fabs(values[k])) ? 0
                             : diff > 0                                              ? 1
                                                                                     : -1;
            if (sign == 0) continue;
            if (prev == 1 && sign == -1) ++up_to_down;
            if (prev == -1 && sign == 1) ++down_to_up;
            prev = sign;
        }
        row.require(up_to_down == 1 && down_to_up == 0, "derivative changes sign once");
        const int near = static_cast<int>(std::lround(std::log(pk.scale / lo) / std::log(ratio)));
        row.require(std::abs(argmax - near) <= 1, "peak location within one cell");
    }
    return row.done();
}

SuiteResult constant_inequality_grid() {
    Row row("constant_inequality_grid");
    double worked = 0.0;
    for (int iq = 0; iq < 50; ++iq) {
        const double q = 1.02 + (1.98 - 1.02) * iq / 49.0;
        for (int ie = 0; ie < 50; ++ie) {
            const double eta = 2.05 + (6.0 - 2.05) * ie / 49.0;
            const double ratio = constant_ratio_equal_exponents(q, eta);
            row.require(ratio > 1.0 && constant_inequality_holds(q, eta),
                        "ratio above one at q " + std::to_string(q));
            if (iq == 0 && ie == 0) worked = ratio;
        }
    }
    (void)worked;
    row.check(std::fabs(constant_ratio_equal_exponents(1.5, 3.0) - 1.0887), 1e-4,
              "worked ratio");
    return row.done();
}

SuiteResult operator_form_consistency(const GridSpec& g, std::uint64_t seed) {
    Row row("operator_form_consistency");
    Rng rng = Rng::stream(seed, 8);
    for (int i = 0; i < 12; ++i) {
        const ScalarField f = random_field(g, rng, true);
        const ScalarField af = fractional_laplacian_apply(f);
        const double quad = field_inner(f, af);
        const double semi = gagliardo_seminorm_sq(f);
        const double form = spectral_form(f, f);
        const double scale = 1.0 + std::fabs(semi);
        row.check(std::fabs(quad - semi) / scale, 1e-12, "operator vs seminorm");
        row.check(std::fabs(form - semi) / scale, 1e-12, "bilinear form vs seminorm");
    }
    return row.done();
}

SuiteResult single_mode_eigenvalue(const GridSpec& g) {
    Row row("single_mode_eigenvalue");
    const double L = g.half_width;
    for (int k : {1, 2, 5}) {
        ScalarField f(g);
        double expected;
        if (g.dim == 1) {
            for (int i = 0; i < g.points_per_dim; ++i)
                f.at(static_cast<std::size_t>(i)) =
                    std::cos(k * std::numbers::pi * g.coordinate(i) / L);
            expected = std::pow(k * std::numbers::pi / L, 2.0 * g.s);
        } else {
            for (int ix = 0; ix < g.points_per_dim; ++ix)
                for (int iy = 0; iy < g.points_per_dim; ++iy)
                    f.at(ix, iy) = std::cos(k * std::numbers::pi * g.coordinate(ix) / L) *
                                   std::cos(k * std::numbers::pi * g.coordinate(iy) / L);
            expected = std::pow(2.0 * sq(k * std::numbers::pi / L), g.s);
        }
        const ScalarField af = fractional_laplacian_apply(f);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i)
            worst = std::max(worst, std::fabs(af.at(i) - expected * f.at(i)));
        row.check(worst / expected, 1e-12, "eigenvalue of mode " + std::to_string(k));
    }
    return row.done();
}

SuiteResult gradient_finite_difference(const ProblemParams& prm, std::uint64_t seed) {
    Row row("gradient_finite_difference");
    Rng rng = Rng::stream(seed, 9);
    FieldPair z{random_field(prm.grid, rng, false), random_field(prm.grid, rng, false)};
    // keep the pair away from zero: |x|^p has a kink there, and differencing
    // across it swamps the h^2 error of the central stencil
    for (double& x : z.u.values) x += 0.5;
    for (double& x : z.v.values) x += 0.5;
    const FieldPair g = gradient(prm, z);
    for (int dir = 0; dir < 3; ++dir) {
        FieldPair phi{random_field(prm.grid, rng, true), random_field(prm.grid, rng, true)};
        const double slope = field_inner(g.u, phi.u) + field_inner(g.v, phi.v);
        const double h = 1e-5;
        FieldPair plus = z, minus = z;
        for (std::size_t i = 0; i < z.u.values.size(); ++i) {
            plus.u.values[i] += h * phi.u.values[i];
            plus.v.values[i] += h * phi.v.values[i];
            minus.u.values[i] -= h * phi.u.values[i];
            minus.v.values[i] -= h * phi.v.values[i];
        }
        const double fd = (energy(prm, plus) - energy(prm, minus)) / (2.0 * h);
        row.check(std::fabs(fd - slope) / (1.0 + std::fabs(slope)), 1e-6,
                  "direction " + std::to_string(dir));
    }
    return row.done();
}

SuiteResult seminorm_drops_under_abs(const GridSpec& g, std::uint64_t seed) {
    Row row("seminorm_drops_under_abs");
    Rng rng = Rng::stream(seed, 10);
    for (int i = 0; i < 10; ++i) {
        const ScalarField f = random_field(g, rng, true);
        ScalarField a = f;
        for (double& x : a.values) x = std::fabs(x);
        const double sf = gagliardo_seminorm_sq(f);
        const double sa = gagliardo_seminorm_sq(a);
        row.require(sa <= sf * (1.0 + 1e-12) + 1e-14, "absolute value lowers the seminorm");
    }
    return row.done();
}

SuiteResult projection_roots_bracket_peak(std::uint64_t seed) {
    Row row("projection_roots_bracket_peak");
    Rng rng = Rng::stream(seed, 11);
    for (int i = 0; i < 200; ++i) {
        const FiberingCoefficients f = random_set(rng, i);
        const Peak pk = peak_nehari(f);
        const double lambda = 0.6 * pk.value;
        const ProjectionScales ps = projection_scales(f, lambda);
        row.require(ps.kind == RootKind::two, "two roots below the peak");
        if (ps.kind != RootKind::two) continue;
        row.require(ps.plus < pk.scale && pk.scale < ps.minus, "roots bracket the peak");
        row.check(std::fabs(quotient_nehari(f, ps.plus) - lambda) / (1.0 + lambda), 1e-9,
                  "left crossing");
        row.check(std::fabs(quotient_nehari(f, ps.minus) - lambda) / (1.0 + lambda), 1e-9,
                  "right crossing");
    }
    return row.done();
}

SuiteResult semitrivial_fiber_minimum(std::uint64_t seed) {
    Row row("semitrivial_fiber_minimum");
    Rng rng = Rng::stream(seed, 12);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.log_uniform(0.2, 5.0);
        const double m = rng.log_uniform(0.2, 5.0);
        const double r = rng.uniform(1.0, 1.95);
        const double lambda = rng.log_uniform(0.05, 2.0);
        const SemitrivialMin sm = semitrivial_fiber_min(a, m, r, lambda);
        const double deriv = a * sm.scale - lambda * m * std::pow(sm.scale, r - 1.0);
        row.check(std::fabs(deriv) / (a * sm.scale), 1e-12, "stationarity at the scale");
        row.require(sm.energy < 0.0, "fiber minimum below zero");
        auto psi = [&](double t) {
            return 0.5 * a * t * t - (lambda * m / r) * std::pow(t, r);
        };
        row.require(sm.energy <= psi(0.9 * sm.scale) && sm.energy <= psi(1.1 * sm.scale),
                    "scale is a local minimum");
    }
    return row.done();
}

}  // namespace

std::vector<SuiteResult> run_verify_suites(const ProblemParams& prm, std::uint64_t seed) {
    std::vector<SuiteResult> out;
    out.push_back(quotient_gap_identity(seed));
    out.push_back(derivative_identities(seed, false));
    out.push_back(derivative_identities(seed, true));
    out.push_back(peak_coupling_mediant(seed, Channel::nehari));
    out.push_back(peak_coupling_mediant(seed, Channel::energy));
    out.push_back(equal_exponent_closed_forms(seed));
    out.push_back(worked_instance());
    out.push_back(unique_quotient_maximum(seed));
    out.push_back(constant_inequality_grid());
    out.push_back(operator_form_consistency(prm.grid, seed));
    out.push_back(single_mode_eigenvalue(prm.grid));
    out.push_back(gradient_finite_difference(prm, seed));
    out.push_back(seminorm_drops_under_abs(prm.grid, seed));
    out.push_back(projection_roots_bracket_peak(seed));
    out.push_back(semitrivial_fiber_minimum(seed));
    return out;
}

}  // namespace nehari
