#pragma once
#include <string>

namespace nehari {

// Exponent block of the problem.  The standing admissibility condition (P)
// requires 1 <= p <= q < 2 < alpha+beta, alpha > 1, beta > 1; the upper
// bound alpha+beta < 2N/(N-2s) needs the grid and is checked at problem level.
struct Exponents {
    double p = 1.5;
    double q = 1.5;
    double alpha = 1.5;
    double beta = 1.5;

    double eta() const { return alpha + beta; }
};

// throws config_error naming the violated clause of (P)
void validate_exponents(const Exponents& ex);

} // namespace nehari
