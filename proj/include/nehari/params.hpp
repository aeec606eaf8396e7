#pragma once
#include "nehari/exponents.hpp"
#include "nehari/fibering.hpp"
#include "nehari/grid.hpp"
#include "nehari/potential.hpp"

namespace nehari {

// Everything that pins down one concrete problem instance.  The fractional
// order lives on the grid; accessors keep call sites readable.
struct ProblemParams {
    Exponents exp;
    double theta = 1.0;
    double lambda = 0.1;
    GridSpec grid;
    PotentialSpec pot_u = PotentialSpec::constant(1.0);
    PotentialSpec pot_v = PotentialSpec::constant(1.0);

    double s() const { return grid.s; }
};

// Full admissibility check: exponent ordering, theta/lambda positivity,
// N > 2s, eta strictly below the critical exponent, valid grid, valid
// potentials.  Throws config_error naming the violated clause.
void validate_params(const ProblemParams& prm);

// a = ||(u,v)||^2, b = theta * coupling, c = ||u||_p^p, d = ||v||_q^q.
// Refuses the zero pair; a pair with vanishing overlap simply gets b = 0
// and is flagged by in_coupling_set instead.
FiberingCoefficients coefficients_of(const FieldPair& w, const ProblemParams& prm);

bool in_coupling_set(const FieldPair& w, const ProblemParams& prm);

}  // namespace nehari
