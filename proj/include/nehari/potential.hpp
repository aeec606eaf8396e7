#pragma once
#include <string>
#include <vector>

#include "nehari/grid.hpp"

namespace nehari {

enum class PotentialKind { constant, power_law, tabulated };

// Potential weight in the X-norm.  Admissibility asks for a strictly
// positive floor (V0) and an integrable reciprocal (V1); the built-in
// power law (1 + |x|^2)^gamma satisfies both once gamma > N/2.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::constant;
    double floor = 1.0;          // value of a constant potential
    double growth = 1.0;         // gamma for the power law
    std::vector<double> table;   // node values for a tabulated potential

    static PotentialSpec constant(double v0);
    static PotentialSpec power_law(double gamma);
    static PotentialSpec tabulated(std::vector<double> values);
};

// throws config_error naming the violated clause ((V0) positivity, (V1)
// growth, table/grid size mismatch)
void validate_potential(const PotentialSpec& pot, const GridSpec& g);

ScalarField potential_samples(const PotentialSpec& pot, const GridSpec& g);

// ||(u,v)||^2 = [u]^2 + [v]^2 + int V1 u^2 + int V2 v^2
double x_norm_sq(const FieldPair& w, const PotentialSpec& pot_u, const PotentialSpec& pot_v);

}  // namespace nehari
