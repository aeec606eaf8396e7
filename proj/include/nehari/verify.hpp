#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "nehari/params.hpp"

namespace nehari {

struct SuiteResult {
    std::string name;
    bool pass = false;
    int checks = 0;      // individual comparisons run
    double worst = 0.0;  // largest residual or violation seen
    std::string detail;  // filled on failure
};

// Identity and property suites over randomized admissible inputs: quotient
// and derivative identities, closed forms, peak uniqueness, spectral layer
// consistency, gradient versus finite differences.  Scalar suites draw their
// own coefficient sets from seed; field suites run on the configured grid.
std::vector<SuiteResult> run_verify_suites(const ProblemParams& prm, std::uint64_t seed);

}  // namespace nehari
