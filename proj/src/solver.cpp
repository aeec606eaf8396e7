#include "nehari/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>
#include <utility>

#include "nehari/errors.hpp"
#include "nehari/rng.hpp"

namespace nehari {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sq(double x) { return x * x; }

FieldPair scale_pair(const FieldPair& w, double t) {
    FieldPair out = w;
    for (double& x : out.u.values) x *= t;
    for (double& x : out.v.values) x *= t;
    return out;
}

void abs_fields(FieldPair& w) {
    for (double& x : w.u.values) x = std::fabs(x);
    for (double& x : w.v.values) x = std::fabs(x);
}

void add_bump(ScalarField& f, double cx, double cy, double width, double amp) {
    const GridSpec& g = f.grid;
    if (g.dim == 1) {
        for (int i = 0; i < g.points_per_dim; ++i)
            f.at(static_cast<std::size_t>(i)) +=
                amp * std::exp(-0.5 * sq((g.coordinate(i) - cx) / width));
    } else {
        for (int ix = 0; ix < g.points_per_dim; ++ix)
            for (int iy = 0; iy < g.points_per_dim; ++iy)
                f.at(ix, iy) += amp * std::exp(-0.5 * (sq((g.coordinate(ix) - cx) / width) +
                                                       sq((g.coordinate(iy) - cy) / width)));
    }
}

// L2 pairing h^N * sum (x_u y_u + x_v y_v), compensated like every other
// reduction in this layer
double pair_inner(const FieldPair& x, const FieldPair& y) {
    const std::size_t n = x.u.values.size();
    std::vector<double> terms(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        terms[i] = x.u.values[i] * y.u.values[i];
        terms[n + i] = x.v.values[i] * y.v.values[i];
    }
    return x.u.grid.cell_volume() * stable_sum(terms);
}

double component_norm_sq(const ScalarField& f, const PotentialSpec& pot) {
    const ScalarField vpot = potential_samples(pot, f.grid);
    std::vector<double> terms(f.values.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = vpot.at(i) * sq(f.at(i));
    return gagliardo_seminorm_sq(f) + f.grid.cell_volume() * stable_sum(terms);
}

// one candidate direction, gated and projected; F is evaluated on the scalar
// coefficients so line-search trials cost no extra transforms beyond
// coefficients_of
struct Trial {
    bool ok = false;
    FieldPair w;  // direction, a = 1
    FieldPair z;  // projected pair t * w
    double t = 0.0;
    double F = kInf;
};

Trial try_direction(const ProblemParams& prm, NehariTag branch, const FieldPair& y) {
    Trial out;
    if (!in_coupling_set(y, prm)) return out;
    FiberingCoefficients f;
    try {
        f = coefficients_of(y, prm);
    } catch (const std::domain_error&) {
        return out;
    }
    const double root_a = std::sqrt(f.a);
    const FiberingCoefficients fn = scale_coefficients(f, 1.0 / root_a);
    ProjectionScales ps;
    try {
        ps = projection_scales(fn, prm.lambda);
    } catch (const std::domain_error&) {
        return out;
    }
    if (ps.kind != RootKind::two) return out;
    out.t = branch == NehariTag::NPlus ? ps.plus : ps.minus;
    out.w = scale_pair(y, 1.0 / root_a);
    out.z = scale_pair(out.w, out.t);
    out.F = energy_value(scale_coefficients(fn, out.t), prm.lambda);
    out.ok = true;
    return out;
}

// two offset bumps with overlap; jitter keeps restarts and seeds distinct
FieldPair seeded_start(const GridSpec& g, std::uint64_t seed, int attempt) {
    Rng rng = Rng::stream(seed, 7000 + static_cast<std::uint64_t>(attempt));
    const double L = g.half_width;
    FieldPair w{ScalarField(g), ScalarField(g)};
    ScalarField* slots[2] = {&w.u, &w.v};
    const double side[2] = {-1.0, 1.0};
    for (int slot = 0; slot < 2; ++slot) {
        const double cx = side[slot] * L / 8.0 + rng.uniform(-0.1 * L, 0.1 * L);
        const double cy =
            g.dim == 2 ? side[slot] * L / 8.0 + rng.uniform(-0.1 * L, 0.1 * L) : 0.0;
        const double width = (L / 7.0) * std::exp(rng.uniform(-0.3, 0.3));
        add_bump(*slots[slot], cx, cy, width, std::exp(rng.uniform(-0.5, 0.5)));
    }
    return w;
}

LambdaRegime regime_of(const SolveConfig& cfg) {
    if (cfg.lambda_star_hat <= 0.0) return LambdaRegime::unknown;
    if (cfg.lambda >= cfg.lambda_star_hat) return LambdaRegime::at_or_above_star;
    if (cfg.lambda_lower_star_hat <= 0.0) return LambdaRegime::unknown;
    return cfg.lambda < cfg.lambda_lower_star_hat ? LambdaRegime::below_lower_star
                                                  : LambdaRegime::between_thresholds;
}

int thread_cap() {
    if (const char* env = std::getenv("NEHARI_LAB_THREADS")) {
        const int k = std::atoi(env);
        if (k >= 1) return k;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

const char* to_string(LambdaRegime r) {
    switch (r) {
        case LambdaRegime::below_lower_star: return "below_lower_star";
        case LambdaRegime::between_thresholds: return "between_thresholds";
        case LambdaRegime::at_or_above_star: return "at_or_above_star";
        default: return "unknown";
    }
}

void validate_config(const SolveConfig& cfg) {
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda))
        throw config_error("solve config: lambda must be positive and finite");
    if (cfg.branch != NehariTag::NPlus && cfg.branch != NehariTag::NMinus)
        throw config_error("solve config: branch must be NPlus or NMinus");
    if (cfg.max_outer < 1) throw config_error("solve config: max_outer must be >= 1");
    if (!(cfg.grad_tol > 0.0)) throw config_error("solve config: grad_tol must be positive");
    if (!(cfg.step0 > 0.0)) throw config_error("solve config: step0 must be positive");
    if (!(cfg.armijo > 0.0 && cfg.armijo < 1.0))
        throw config_error("solve config: armijo constant must lie in (0, 1)");
    if (cfg.max_halvings < 1) throw config_error("solve config: max_halvings must be >= 1");
    if (cfg.max_restarts < 0) throw config_error("solve config: max_restarts must be >= 0");
    if (!(cfg.nminus_cap > 0.0 && cfg.nminus_cap <= 1.0))
        throw config_error("solve config: nminus_cap must lie in (0, 1]");
    if (cfg.lambda_star_hat < 0.0 || cfg.lambda_lower_star_hat < 0.0)
        throw config_error("solve config: threshold estimates must be nonnegative (0 = unknown)");
    if (cfg.initial.u.values.empty() != cfg.initial.v.values.empty())
        throw config_error("solve config: initial pair must set both fields or neither");
}

FieldPair project(const ProblemParams& prm, const FieldPair& w, NehariTag branch) {
    validate_params(prm);
    if (branch != NehariTag::NPlus && branch != NehariTag::NMinus)
        throw std::invalid_argument("project: branch must be NPlus or NMinus");
    const FiberingCoefficients f = coefficients_of(w, prm);
    const ProjectionScales ps = projection_scales(f, prm.lambda);
    if (ps.kind != RootKind::two)
        throw solver_error("project: lambda " + std::to_string(prm.lambda) +
                           " sits at or above the ray's quotient peak " +
                           std::to_string(ps.peak.value) + "; no branch crossing exists");
    return scale_pair(w, branch == NehariTag::NPlus ? ps.plus : ps.minus);
}

double split_stationarity_residual(const ProblemParams& prm, const FieldPair& w,
                                   double lambda) {
    require_same_grid(w.u, w.v);
    const double au = component_norm_sq(w.u, prm.pot_u);
    const double av = component_norm_sq(w.v, prm.pot_v);
    const double c = lp_norm_pow(w.u, prm.exp.p);
    const double d = lp_norm_pow(w.v, prm.exp.q);
    const double b = prm.theta * coupling_integral(w, prm.exp.alpha, prm.exp.beta);
    const double eta = prm.exp.eta();
    const double r1 = au - lambda * c - (prm.exp.alpha / eta) * b;
    const double r2 = av - lambda * d - (prm.exp.beta / eta) * b;
    return std::max(std::fabs(r1), std::fabs(r2)) / (1.0 + au + av);
}

SolutionReport minimize_branch(const ProblemParams& prm0, const SolveConfig& cfg) {
    validate_params(prm0);
    validate_config(cfg);
    ProblemParams prm = prm0;
    prm.lambda = cfg.lambda;

    if (cfg.lambda_star_hat > 0.0) {
        if (cfg.branch == NehariTag::NMinus &&
            cfg.lambda > cfg.nminus_cap * cfg.lambda_star_hat)
            throw config_error(
                "solve: lambda " + std::to_string(cfg.lambda) + " is inside the root-" +
                "coalescence band above " + std::to_string(cfg.nminus_cap) +
                " * lambda_star_hat; raise nminus_cap explicitly to override");
        if (cfg.branch == NehariTag::NPlus && cfg.lambda >= cfg.lambda_star_hat)
            throw config_error("solve: lambda " + std::to_string(cfg.lambda) +
                               " is not below the threshold estimate " +
                               std::to_string(cfg.lambda_star_hat));
    }

    const bool have_initial = !cfg.initial.u.values.empty();
    if (have_initial &&
        (cfg.initial.u.grid != prm.grid || cfg.initial.v.grid != prm.grid))
        throw config_error("solve: initial pair sampled on a different grid");

    SolutionReport rep;
    rep.regime = regime_of(cfg);

    Trial cur;
    for (int attempt = 0; attempt <= cfg.max_restarts && !cur.ok; ++attempt) {
        FieldPair y = attempt == 0 && have_initial ? cfg.initial
                                                   : seeded_start(prm.grid, cfg.seed, attempt);
        abs_fields(y);
        cur = try_direction(prm, cfg.branch, y);
        rep.restarts = attempt;
    }
    if (!cur.ok)
        throw solver_error(
            "solve: no admissible start direction: every sampled ray keeps its "
            "quotient peak at or below lambda, or falls out of the coupling set");

    rep.t_history.push_back(cur.t);
    rep.energy_history.push_back(cur.F);

    int it = 0;
    for (; it < cfg.max_outer; ++it) {
        const FieldPair g = gradient(prm, cur.z);
        if (gradient_sup_norm(g) < cfg.grad_tol) break;

        // reduced gradient at the direction w is t * g up to a ray component;
        // step in the L2 tangent of w so the re-projection only has to fix
        // the scale
        const double gw = pair_inner(g, cur.w);
        const double ww = pair_inner(cur.w, cur.w);
        const double gg = pair_inner(g, g);
        const double coef = gw / ww;
        const double slope = -cur.t * (gg - gw * coef);
        if (!(slope < 0.0)) break;  // gradient parallel to the ray: flat

        bool accepted = false;
        double tau = cfg.step0;
        for (int h = 0; h <= cfg.max_halvings; ++h, tau *= 0.5) {
            FieldPair y = cur.w;
            for (std::size_t i = 0; i < y.u.values.size(); ++i) {
                y.u.values[i] =
                    std::fabs(y.u.values[i] - tau * (g.u.values[i] - coef * cur.w.u.values[i]));
                y.v.values[i] =
                    std::fabs(y.v.values[i] - tau * (g.v.values[i] - coef * cur.w.v.values[i]));
            }
            Trial next = try_direction(prm, cfg.branch, y);
            if (!next.ok) continue;
            if (next.F <= cur.F + cfg.armijo * tau * slope) {
                cur = std::move(next);
                rep.t_history.push_back(cur.t);
                rep.energy_history.push_back(cur.F);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // line search exhausted
    }
    rep.iterations = it;

    const FieldPair gfin = gradient(prm, cur.z);
    rep.grad_norm = gradient_sup_norm(gfin);
    rep.converged = rep.grad_norm < cfg.grad_tol;
    rep.energy = cur.F;
    rep.cls = classify(prm, cur.z);
    rep.coupling = coupling_integral(cur.z, prm.exp.alpha, prm.exp.beta);
    rep.split_residual = split_stationarity_residual(prm, cur.z, cfg.lambda);
    rep.min_value_u = *std::min_element(cur.z.u.values.begin(), cur.z.u.values.end());
    rep.min_value_v = *std::min_element(cur.z.v.values.begin(), cur.z.v.values.end());
    rep.pair = std::move(cur.z);

    if (rep.cls.tag != cfg.branch)
        throw solver_error(std::string("solve: accepted pair classifies as ") +
                           to_string(rep.cls.tag) + " instead of the requested branch; " +
                           "lambda is too close to the ray's quotient peak");
    if (!rep.converged && rep.coupling <= 10.0 * coupling_threshold(prm.grid))
        throw solver_error(
            "solve: descent stalled while the coupling integral collapsed toward "
            "the admissibility threshold (coupling " + std::to_string(rep.coupling) + ")");
    return rep;
}

std::vector<SweepRow> lambda_sweep(const ProblemParams& prm,
                                   const std::vector<double>& lambdas,
                                   const SolveConfig& base) {
    validate_params(prm);
    std::vector<SweepRow> rows(lambdas.size());
    if (lambdas.empty()) return rows;

    auto run_row = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.lambda = lambdas[i];
        try {
            SolveConfig cfg = base;
            cfg.lambda = lambdas[i];
            cfg.branch = NehariTag::NMinus;
            const SolutionReport rep = minimize_branch(prm, cfg);
            row.energy = rep.energy;
            row.tag = rep.cls.tag;
            row.coupling = rep.coupling;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.note = e.what();
        }
    };

    const int workers =
        std::min<int>(thread_cap(), static_cast<int>(lambdas.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < lambdas.size(); ++i) run_row(i);
        return rows;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int k = 0; k < workers; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = cursor.fetch_add(1); i < lambdas.size();
                 i = cursor.fetch_add(1))
                run_row(i);
        });
    for (std::thread& th : pool) th.join();
    return rows;
}

SemitrivialMin semitrivial_fiber_min(double a, double mass, double r, double lambda) {
    if (!(a > 0.0) || !(mass > 0.0))
        throw std::invalid_argument("semitrivial fiber: a and mass must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("semitrivial fiber: lambda must be positive");
    if (!(r >= 1.0 && r < 2.0))
        throw std::invalid_argument("semitrivial fiber: exponent must lie in [1, 2)");
    SemitrivialMin out;
    out.scale = std::pow(lambda * mass / a, 1.0 / (2.0 - r));
    out.energy = 0.5 * a * sq(out.scale) - (lambda * mass / r) * std::pow(out.scale, r);
    return out;
}

double best_semitrivial_energy(const ProblemParams& prm, int component) {
    validate_params(prm);
    if (component != 0 && component != 1)
        throw std::invalid_argument("best_semitrivial_energy: component must be 0 or 1");
    const GridSpec& g = prm.grid;
    const double r = component == 0 ? prm.exp.p : prm.exp.q;
    const PotentialSpec& pot = component == 0 ? prm.pot_u : prm.pot_v;
    const ScalarField vpot = potential_samples(pot, g);
    const double L = g.half_width;
    const double wlo = std::max(2.0 * g.spacing(), L / 40.0);
    const double whi = L / 3.0;

    // amplitude drops out: the fiber minimum value is invariant under field
    // scaling, so a (center, width) scan covers the whole bump family
    double best = 0.0;
    constexpr int kWidths = 13, kCenters = 7;
    for (int iw = 0; iw < kWidths; ++iw) {
        const double width = wlo * std::pow(whi / wlo, iw / double(kWidths - 1));
        for (int ic = 0; ic < kCenters; ++ic) {
            const double cx = -0.3 * L + 0.6 * L * ic / double(kCenters - 1);
            ScalarField f(g);
            add_bump(f, cx, cx, width, 1.0);
            std::vector<double> terms(f.values.size());
            for (std::size_t i = 0; i < terms.size(); ++i)
                terms[i] = vpot.at(i) * sq(f.at(i));
            const double a =
                gagliardo_seminorm_sq(f) + g.cell_volume() * stable_sum(terms);
            const double m = lp_norm_pow(f, r);
            if (!(m > 0.0)) continue;
            best = std::min(best, semitrivial_fiber_min(a, m, r, prm.lambda).energy);
        }
    }
    return best;
}

}  // namespace nehari
