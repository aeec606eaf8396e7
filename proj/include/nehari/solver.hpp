#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "nehari/energy.hpp"
#include "nehari/params.hpp"

namespace nehari {

// where lambda sits relative to the threshold estimates handed to the solver
enum class LambdaRegime { below_lower_star, between_thresholds, at_or_above_star, unknown };

const char* to_string(LambdaRegime r);

struct SolveConfig {
    double lambda = 0.1;
    NehariTag branch = NehariTag::NPlus;
    int max_outer = 400;
    double grad_tol = 1e-6;
    double step0 = 0.1;  // initial trial step, halved on rejection
    double armijo = 1e-4;
    int max_halvings = 30;
    std::uint64_t seed = 1;
    int max_restarts = 12;  // fresh start directions after projection failures

    // threshold estimates, 0 = not supplied.  With lambda_star_hat known the
    // steep branch refuses lambda > nminus_cap * lambda_star_hat: the two
    // projection roots coalesce at the threshold and the problem degenerates.
    double lambda_star_hat = 0.0;
    double lambda_lower_star_hat = 0.0;
    double nminus_cap = 0.95;

    FieldPair initial;  // optional start pair; empty -> seeded offset bumps
};

// branch in {NPlus, NMinus}, positive lambda/grad_tol/step0, armijo in (0,1),
// counts >= 1, nminus_cap in (0,1]; violations throw config_error
void validate_config(const SolveConfig& cfg);

struct SolutionReport {
    FieldPair pair;  // accepted minimizer, scaled onto the requested branch
    double energy = 0.0;
    NehariClass cls;
    double grad_norm = 0.0;  // sup norm of the full gradient at pair
    double coupling = 0.0;   // integral of |u|^alpha |v|^beta
    double min_value_u = 0.0;
    double min_value_v = 0.0;
    // stationarity earned at convergence rather than enforced by projection:
    // testing the system against (u,0) and (0,v) separately gives
    // a_u = lambda c + (alpha/eta) b and a_v = lambda d + (beta/eta) b, while
    // the projection step only pins their sum
    double split_residual = 0.0;
    std::vector<double> t_history;       // accepted projection scales
    std::vector<double> energy_history;  // accepted energies, nonincreasing
    LambdaRegime regime = LambdaRegime::unknown;
    int iterations = 0;
    int restarts = 0;
    bool converged = false;
};

// scale the pair onto the requested branch of the constraint set at
// params.lambda: t_plus * pair (NPlus, left of the quotient peak) or
// t_minus * pair (NMinus, right of it).  Throws solver_error when lambda
// sits at or above the ray's peak value, so no crossing exists; a zero pair
// or one with vanishing coupling is refused as degenerate_input.
FieldPair project(const ProblemParams& prm, const FieldPair& w, NehariTag branch);

// max of the two componentwise stationarity defects at multiplier lambda,
// normalized by 1 + ||(u,v)||^2
double split_stationarity_residual(const ProblemParams& prm, const FieldPair& w,
                                   double lambda);

// projected descent over start directions: absolute values of both fields
// every outer pass, normalize to a = 1, re-project onto the branch, Armijo
// backtracking on the reduced energy.  cfg.lambda overrides params.lambda.
SolutionReport minimize_branch(const ProblemParams& prm, const SolveConfig& cfg);

struct SweepRow {
    double lambda = 0.0;
    double energy = 0.0;
    NehariTag tag = NehariTag::OffManifold;
    double coupling = 0.0;
    bool ok = false;
    std::string note;  // failure reason when !ok
};

// steep-branch energies across a lambda grid; per-lambda failures land in
// their row instead of aborting the sweep.  Rows are computed in parallel
// under the NEHARI_LAB_THREADS cap; results do not depend on the cap.
std::vector<SweepRow> lambda_sweep(const ProblemParams& prm,
                                   const std::vector<double>& lambdas,
                                   const SolveConfig& base);

// fiber minimum of the single-component energy t -> a t^2 / 2 - lambda m t^r / r:
// scale (lambda m / a)^{1/(2-r)} and the (negative) value there
struct SemitrivialMin {
    double scale = 0.0;
    double energy = 0.0;
};
SemitrivialMin semitrivial_fiber_min(double a, double mass, double r, double lambda);

// best semitrivial competitor: deterministic bump scan in one slot
// (component 0 = u, 1 = v), reporting the lowest fiber-minimum energy found.
// Coupled minimizers are expected to undercut it.
double best_semitrivial_energy(const ProblemParams& prm, int component);

}  // namespace nehari
