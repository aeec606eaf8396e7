#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include "nehari/errors.hpp"
#include "nehari/extremal.hpp"

using namespace nehari;

namespace {

GridSpec make_grid(int n, double L = 16.0, double s = 0.45, int dim = 1) {
    GridSpec g;
    g.dim = dim;
    g.points_per_dim = n;
    g.half_width = L;
    g.s = s;
    return g;
}

ProblemParams desk_params(int n = 64) {
    ProblemParams prm;
    prm.exp = {1.4, 1.7, 1.6, 1.7};
    prm.theta = 1.3;
    prm.grid = make_grid(n);
    prm.pot_u = PotentialSpec::constant(1.0);
    prm.pot_v = PotentialSpec::constant(1.3);
    return prm;
}

ScalarField bump(const GridSpec& g, double center, double width, double amp) {
    ScalarField f(g);
    for (int i = 0; i < g.points_per_dim; ++i) {
        double r = (g.coordinate(i) - center) / width;
        f.at(static_cast<std::size_t>(i)) = amp * std::exp(-0.5 * r * r);
    }
    return f;
}

ScalarField constant_field(const GridSpec& g, double value) {
    ScalarField f(g);
    for (double& x : f.values) x = value;
    return f;
}

FieldPair bump_pair(const GridSpec& g) {
    return {bump(g, -1.5, 2.0, 1.0), bump(g, 1.0, 2.5, 0.8)};
}

FieldPair scaled(const FieldPair& w, double t) {
    FieldPair out = w;
    for (double& x : out.u.values) x *= t;
    for (double& x : out.v.values) x *= t;
    return out;
}

bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

// Pair and multiplier built so that the stationarity system holds exactly on
// a fine reference grid: the potentials are solved from the system at smooth
// positive fields, and the multiplier value that makes the radial picture
// consistent comes out in closed form,
//   lambda = (eta-2) b / ((2-p) c + (2-q) d).
// Restricting the potential tables to coarser node sets then gives a chain
// of problems whose only defect is resolution.
struct Manufactured {
    std::vector<ProblemParams> prm;   // one per requested resolution
    std::vector<FieldPair> pair;      // analytic fields at those resolutions
    double lambda_star = 0;
};

Manufactured manufactured_chain(const std::vector<int>& sizes) {
    const double L = 16.0, s = 0.45;
    const Exponents ex{1.4, 1.7, 1.6, 1.7};
    const double theta = 1.2;
    const int n_ref = 512;
    GridSpec gref = make_grid(n_ref, L, s);

    auto z1_at = [&](double x) { return std::exp(2.5 * std::cos(std::numbers::pi * x / L)); };
    auto z2_at = [&](double x) {
        return std::exp(2.2 * std::cos(std::numbers::pi * (x - 2.0) / L));
    };
    ScalarField z1(gref), z2(gref);
    for (int i = 0; i < n_ref; ++i) {
        z1.at(static_cast<std::size_t>(i)) = z1_at(gref.coordinate(i));
        z2.at(static_cast<std::size_t>(i)) = z2_at(gref.coordinate(i));
    }

    const double eta = ex.eta();
    double c = lp_norm_pow(z1, ex.p);
    double d = lp_norm_pow(z2, ex.q);
    double b = theta * coupling_integral({z1, z2}, ex.alpha, ex.beta);
    double lam = (eta - 2) * b / ((2 - ex.p) * c + (2 - ex.q) * d);

    ScalarField lap1 = fractional_laplacian_apply(z1);
    ScalarField lap2 = fractional_laplacian_apply(z2);
    std::vector<double> v1(n_ref), v2(n_ref);
    for (int i = 0; i < n_ref; ++i) {
        double u = z1.values[i], v = z2.values[i];
        v1[i] = (lam * ex.p * std::pow(u, ex.p - 1) +
                 theta * ex.alpha * std::pow(u, ex.alpha - 1) * std::pow(v, ex.beta) -
                 2 * lap1.values[i]) /
                (2 * u);
        v2[i] = (lam * ex.q * std::pow(v, ex.q - 1) +
                 theta * ex.beta * std::pow(u, ex.alpha) * std::pow(v, ex.beta - 1) -
                 2 * lap2.values[i]) /
                (2 * v);
    }
    REQUIRE(*std::min_element(v1.begin(), v1.end()) > 0);
    REQUIRE(*std::min_element(v2.begin(), v2.end()) > 0);

    Manufactured out;
    out.lambda_star = lam;
    for (int n : sizes) {
        int stride = n_ref / n;
        std::vector<double> t1(n), t2(n);
        for (int i = 0; i < n; ++i) {
            t1[i] = v1[static_cast<std::size_t>(i) * stride];
            t2[i] = v2[static_cast<std::size_t>(i) * stride];
        }
        ProblemParams prm;
        prm.exp = ex;
        prm.theta = theta;
        prm.grid = make_grid(n, L, s);
        prm.pot_u = PotentialSpec::tabulated(t1);
        prm.pot_v = PotentialSpec::tabulated(t2);
        FieldPair w{ScalarField(prm.grid), ScalarField(prm.grid)};
        for (int i = 0; i < n; ++i) {
            w.u.at(static_cast<std::size_t>(i)) = z1_at(prm.grid.coordinate(i));
            w.v.at(static_cast<std::size_t>(i)) = z2_at(prm.grid.coordinate(i));
        }
        out.prm.push_back(prm);
        out.pair.push_back(w);
    }
    return out;
}

}  // namespace

TEST_CASE("peak value on a ray: direct recompute, scale freedom, coupling guard") {
    ProblemParams prm = desk_params();
    FieldPair w = bump_pair(prm.grid);

    FiberingCoefficients f = coefficients_of(w, prm);
    FiberingCoefficients unit = scale_coefficients(f, 1.0 / std::sqrt(f.a));
    CHECK(lambda_value(prm, w, Channel::nehari) ==
          doctest::Approx(peak_nehari(unit).value).epsilon(1e-13));
    CHECK(lambda_value(prm, w, Channel::energy) ==
          doctest::Approx(peak_energy(unit).value).epsilon(1e-13));

    for (double k : {3.0, 0.2, 17.0}) {
        CHECK(std::fabs(lambda_value(prm, scaled(w, k), Channel::nehari) -
                        lambda_value(prm, w, Channel::nehari)) < 1e-12);
        CHECK(std::fabs(lambda_value(prm, scaled(w, k), Channel::energy) -
                        lambda_value(prm, w, Channel::energy)) < 1e-12);
    }

    FieldPair uncoupled{bump(prm.grid, 0.0, 2.0, 1.0), ScalarField(prm.grid)};
    CHECK_THROWS_AS(lambda_value(prm, uncoupled, Channel::nehari), degenerate_input);
}

TEST_CASE("zero-freedom family returns exactly its base value") {
    ProblemParams prm = desk_params();
    DirectionSampler sampler;
    sampler.family = SamplerFamily::perturbed_pair;
    sampler.base = bump_pair(prm.grid);
    sampler.perturb_scale = 0.0;
    sampler.count = 3;
    sampler.seed = 7;

    double ref_n = lambda_value(prm, sampler.base, Channel::nehari);
    double ref_e = lambda_value(prm, sampler.base, Channel::energy);

    ExtremalEstimate en = estimate_lambda_star(prm, sampler);
    CHECK(en.lambda_star_hat == doctest::Approx(ref_n).epsilon(1e-13));
    CHECK(en.starts.size() == 3);
    for (const StartRecord& r : en.starts) {
        CHECK(r.value == en.starts[0].value);
        CHECK(r.iterations == 0);
    }
    CHECK(x_norm_sq(en.argmin, prm.pot_u, prm.pot_v) == doctest::Approx(1.0).epsilon(1e-10));

    ExtremalEstimate ee = estimate_lambda_lower_star(prm, sampler);
    CHECK(ee.lambda_lower_star_hat == doctest::Approx(ref_e).epsilon(1e-13));

    // cross-filled fields come from the same pairs, so the gap is pinned
    CHECK(en.lambda_lower_star_hat == doctest::Approx(ref_e).epsilon(1e-12));
    CHECK(ee.lambda_star_hat == doctest::Approx(ref_n).epsilon(1e-12));
}

TEST_CASE("per-start values match the equal-exponent closed form") {
    ProblemParams prm = desk_params();
    prm.exp = {1.5, 1.5, 1.5, 1.5};
    DirectionSampler sampler;
    sampler.family = SamplerFamily::gaussian_bumps;
    sampler.count = 6;
    sampler.seed = 11;

    ExtremalEstimate en = estimate_lambda_star(prm, sampler);
    ExtremalEstimate ee = estimate_lambda_lower_star(prm, sampler);
    for (int i = 0; i < 6; ++i) {
        REQUIRE(std::isfinite(en.starts[i].value));
        EqualExponentForms cf =
            closed_form_equal_exponents(coefficients_of(en.start_pairs[i], prm), prm.theta);
        CHECK(en.starts[i].value == doctest::Approx(cf.value_nehari).epsilon(1e-8));

        REQUIRE(std::isfinite(ee.starts[i].value));
        EqualExponentForms cf_e =
            closed_form_equal_exponents(coefficients_of(ee.start_pairs[i], prm), prm.theta);
        CHECK(ee.starts[i].value == doctest::Approx(cf_e.value_energy).epsilon(1e-8));
    }
}

TEST_CASE("more starts never raise the estimate and keep the shared prefix") {
    ProblemParams prm = desk_params();
    DirectionSampler s1;
    s1.family = SamplerFamily::gaussian_bumps;
    s1.seed = 3;
    s1.count = 1;
    DirectionSampler s32 = s1;
    s32.count = 32;

    ExtremalEstimate e1 = estimate_lambda_star(prm, s1);
    ExtremalEstimate e32 = estimate_lambda_star(prm, s32);
    CHECK(e32.lambda_star_hat <= e1.lambda_star_hat);
    CHECK(e32.starts[0].value == e1.starts[0].value);
    CHECK(e32.starts[0].iterations == e1.starts[0].iterations);

    ExtremalEstimate l1 = estimate_lambda_lower_star(prm, s1);
    ExtremalEstimate l32 = estimate_lambda_lower_star(prm, s32);
    CHECK(l32.lambda_lower_star_hat <= l1.lambda_lower_star_hat);
    CHECK(l32.starts[0].value == l1.starts[0].value);
}

TEST_CASE("identical seeds reproduce results bit for bit, across thread caps") {
    ProblemParams prm = desk_params();
    DirectionSampler sampler;
    sampler.family = SamplerFamily::gaussian_bumps;
    sampler.count = 4;
    sampler.seed = 21;

    setenv("NEHARI_LAB_THREADS", "1", 1);
    ThresholdEstimates serial = estimate_thresholds(prm, sampler);
    setenv("NEHARI_LAB_THREADS", "3", 1);
    ThresholdEstimates threaded = estimate_thresholds(prm, sampler);
    unsetenv("NEHARI_LAB_THREADS");
    ThresholdEstimates again = estimate_thresholds(prm, sampler);

    CHECK(serial.lambda_star_hat == threaded.lambda_star_hat);
    CHECK(serial.lambda_lower_star_hat == threaded.lambda_lower_star_hat);
    CHECK(serial.lambda_star_hat == again.lambda_star_hat);
    CHECK(serial.lambda_lower_star_hat == again.lambda_lower_star_hat);
    CHECK(same_values(serial.nehari.argmin.u.values, threaded.nehari.argmin.u.values));
    CHECK(same_values(serial.nehari.argmin.v.values, threaded.nehari.argmin.v.values));
    CHECK(same_values(serial.energy.argmin.u.values, again.energy.argmin.u.values));
    for (int i = 0; i < 4; ++i) {
        CHECK(serial.nehari.starts[i].value == threaded.nehari.starts[i].value);
        CHECK(serial.energy.starts[i].value == threaded.energy.starts[i].value);
    }

    DirectionSampler other = sampler;
    other.seed = 22;
    ThresholdEstimates different = estimate_thresholds(prm, other);
    CHECK(different.lambda_star_hat != serial.lambda_star_hat);
}

TEST_CASE("pre-scaling every sampled pair leaves the estimates unchanged") {
    ProblemParams prm = desk_params();

    DirectionSampler g1;
    g1.family = SamplerFamily::gaussian_bumps;
    g1.count = 3;
    g1.seed = 5;
    g1.refine = true;
    DirectionSampler g3 = g1;
    g3.prescale = 3.0;
    ThresholdEstimates t1 = estimate_thresholds(prm, g1);
    ThresholdEstimates t3 = estimate_thresholds(prm, g3);
    CHECK(std::fabs(t1.lambda_star_hat - t3.lambda_star_hat) < 1e-10);
    CHECK(std::fabs(t1.lambda_lower_star_hat - t3.lambda_lower_star_hat) < 1e-10);

    DirectionSampler f1;
    f1.family = SamplerFamily::fourier_modes;
    f1.count = 3;
    f1.seed = 9;
    DirectionSampler f3 = f1;
    f3.prescale = 3.0;
    ThresholdEstimates u1 = estimate_thresholds(prm, f1);
    ThresholdEstimates u3 = estimate_thresholds(prm, f3);
    CHECK(std::fabs(u1.lambda_star_hat - u3.lambda_star_hat) < 1e-10);
    CHECK(std::fabs(u1.lambda_lower_star_hat - u3.lambda_lower_star_hat) < 1e-10);
}

TEST_CASE("strict ordering, pointwise gap, and constructive floors") {
    for (Exponents ex : {Exponents{1.4, 1.7, 1.6, 1.7}, Exponents{1.5, 1.5, 1.5, 1.5}}) {
        ProblemParams prm = desk_params();
        prm.exp = ex;
        for (SamplerFamily family :
             {SamplerFamily::gaussian_bumps, SamplerFamily::fourier_modes}) {
            DirectionSampler sampler;
            sampler.family = family;
            sampler.count = 4;
            sampler.seed = 31;
            ThresholdEstimates t = estimate_thresholds(prm, sampler);

            CHECK(t.lambda_lower_star_hat > 0);
            CHECK(t.lambda_lower_star_hat < t.lambda_star_hat);
            CHECK(t.nehari.lambda_lower_star_hat < t.nehari.lambda_star_hat);
            CHECK(t.energy.lambda_lower_star_hat < t.energy.lambda_star_hat);

            for (const auto& est : {t.nehari, t.energy}) {
                for (std::size_t i = 0; i < est.start_pairs.size(); ++i) {
                    if (!std::isfinite(est.starts[i].value)) continue;
                    double ln = lambda_value(prm, est.start_pairs[i], Channel::nehari);
                    double le = lambda_value(prm, est.start_pairs[i], Channel::energy);
                    CHECK(le < ln);
                }
            }

            CHECK(t.nehari.lower_bound_diag > 0);
            CHECK(t.energy.lower_bound_diag > 0);
            CHECK(t.lambda_star_hat > t.nehari.lower_bound_diag);
            CHECK(t.lambda_lower_star_hat > t.energy.lower_bound_diag);
            CHECK(t.nehari.lower_bound_diag ==
                  lower_bound_nehari(prm, sampler.seed));
            CHECK(t.energy.lower_bound_diag ==
                  lower_bound_energy(prm, sampler.seed));
        }
    }
}

TEST_CASE("a family that never couples raises the search error") {
    ProblemParams prm = desk_params();
    DirectionSampler sampler;
    sampler.family = SamplerFamily::perturbed_pair;
    sampler.base = {bump(prm.grid, 0.0, 2.0, 1.0), ScalarField(prm.grid)};
    sampler.perturb_scale = 0.3;
    sampler.count = 4;
    CHECK_THROWS_AS(estimate_lambda_star(prm, sampler), search_error);
    CHECK_THROWS_AS(estimate_lambda_lower_star(prm, sampler), search_error);
}

TEST_CASE("field refinement only improves on the family search") {
    ProblemParams prm = desk_params();
    DirectionSampler plain;
    plain.family = SamplerFamily::gaussian_bumps;
    plain.count = 2;
    plain.seed = 13;
    DirectionSampler polished = plain;
    polished.refine = true;

    ExtremalEstimate a = estimate_lambda_star(prm, plain);
    ExtremalEstimate b = estimate_lambda_star(prm, polished);
    CHECK(b.lambda_star_hat <= a.lambda_star_hat + 1e-15);
    CHECK(lambda_value(prm, b.argmin, Channel::nehari) ==
          doctest::Approx(b.lambda_star_hat).epsilon(1e-9));
    CHECK(x_norm_sq(b.argmin, prm.pot_u, prm.pot_v) == doctest::Approx(1.0).epsilon(1e-9));

    ExtremalEstimate c = estimate_lambda_lower_star(prm, plain);
    ExtremalEstimate d = estimate_lambda_lower_star(prm, polished);
    CHECK(d.lambda_lower_star_hat <= c.lambda_lower_star_hat + 1e-15);
}

TEST_CASE("stationarity residual vanishes on an exactly critical constant pair") {
    for (int n : {64, 128}) {
        ProblemParams prm;
        prm.exp = {1.5, 1.5, 1.5, 1.5};
        prm.theta = 1.3;
        prm.grid = make_grid(n);
        prm.pot_u = PotentialSpec::constant(2.0);
        prm.pot_v = PotentialSpec::constant(2.0);
        FieldPair w{constant_field(prm.grid, 1.0), constant_field(prm.grid, 1.0)};

        double lam = lambda_value(prm, w, Channel::nehari);
        CHECK(el_residual(prm, w, lam) < 1e-10 * (1 + lam));

        // a wrong multiplier must show up in the residual
        CHECK(el_residual(prm, w, 1.1 * lam) > 1e-3);
    }
}

TEST_CASE("stationarity residual decreases under mesh refinement") {
    Manufactured m = manufactured_chain({16, 32, 64});
    double r16 = el_residual(m.prm[0], m.pair[0], m.lambda_star);
    double r32 = el_residual(m.prm[1], m.pair[1], m.lambda_star);
    double r64 = el_residual(m.prm[2], m.pair[2], m.lambda_star);
    CAPTURE(r16);
    CAPTURE(r32);
    CAPTURE(r64);
    CHECK(r32 < r16 / 30);
    CHECK(r64 <= r32);

    // criticality pins the coupling integral to its mediant value on the ray
    CHECK(stationary_coupling_residual(coefficients_of(m.pair[2], m.prm[2]),
                                       Channel::nehari) < 1e-10);

    // a generic pair on the same problem is nowhere near critical
    FieldPair off = {bump(m.prm[2].grid, -3.0, 2.0, 1.0), bump(m.prm[2].grid, 2.0, 3.0, 0.7)};
    CHECK(el_residual(m.prm[2], off, m.lambda_star) > 1e-1);

    // moving off the constraint-peak ray destroys the smallness
    FiberingCoefficients f = coefficients_of(m.pair[2], m.prm[2]);
    double tn = peak_nehari(f).scale;
    FieldPair z_off = scaled(m.pair[2], 1.4 * tn);
    FieldPair res = el_residual_fields(m.prm[2], z_off, m.lambda_star);
    double off_norm = std::sqrt(l2_norm_sq(res.u) + l2_norm_sq(res.v));
    CHECK(off_norm > 100 * r64);
}

TEST_CASE("floor constants: worked values, monotonicity, and probe sanity") {
    Exponents ex{1.5, 1.5, 1.5, 1.5};
    // delta = ((2-q)/((eta-q) theta))^{1/(eta-2)} = 1/3 at unit ratios, so the
    // floor is (1 - 1/3)/2 * (1/3)^2 = 1/27
    CHECK(lower_bound_nehari_form(ex, 1.0, 1.0, 1.0) ==
          doctest::Approx(1.0 / 27.0).epsilon(1e-12));
    // dbar = (3/2 * 1/3)^{1} = 1/2 and the front factor is 1.5/(4 * 1.5) = 1/4
    CHECK(lower_bound_energy_form(ex, 1.0, 1.0, 1.0) ==
          doctest::Approx(0.25 * std::sqrt(0.5)).epsilon(1e-12));

    CHECK(lower_bound_nehari_form(ex, 2.0, 1.0, 1.0) <
          lower_bound_nehari_form(ex, 1.0, 1.0, 1.0));
    CHECK(lower_bound_energy_form(ex, 2.0, 1.0, 1.0) <
          lower_bound_energy_form(ex, 1.0, 1.0, 1.0));
    CHECK(lower_bound_nehari_form(ex, 1.0, 2.0, 1.0) <
          lower_bound_nehari_form(ex, 1.0, 1.0, 1.0));

    CHECK_THROWS_AS(lower_bound_nehari_form(ex, 0.0, 1.0, 1.0), std::invalid_argument);

    // the probe maximum can only sit above any single probe evaluated by hand
    ProblemParams prm = desk_params();
    double eta = prm.exp.eta();
    ScalarField f = bump(prm.grid, 0.0, 2.0, 1.0);
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = f.values[i] * f.values[i];
    double hand = std::pow(lp_norm_pow(f, eta), 1.0 / eta) /
                  std::sqrt(gagliardo_seminorm_sq(f) +
                            prm.grid.cell_volume() * stable_sum(terms));
    CHECK(embedding_ratio_estimate(prm, eta, 0, 1) >= hand - 1e-12);
    CHECK_THROWS_AS(embedding_ratio_estimate(prm, eta, 2, 1), std::invalid_argument);
}

TEST_CASE("sampler validation rejects unusable settings") {
    ProblemParams prm = desk_params();
    DirectionSampler sampler;
    sampler.count = 0;
    CHECK_THROWS_AS(estimate_lambda_star(prm, sampler), config_error);

    sampler.count = 2;
    sampler.prescale = 0.0;
    CHECK_THROWS_AS(estimate_lambda_star(prm, sampler), config_error);

    sampler.prescale = 1.0;
    sampler.family = SamplerFamily::perturbed_pair;
    sampler.perturb_scale = 0.6;
    CHECK_THROWS_AS(estimate_lambda_star(prm, sampler), config_error);

    sampler.perturb_scale = 0.2;
    sampler.base = bump_pair(make_grid(32));
    CHECK_THROWS_AS(estimate_lambda_star(prm, sampler), config_error);
}
