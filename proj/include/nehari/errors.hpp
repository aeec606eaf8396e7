#pragma once
#include <stdexcept>
#include <string>

namespace nehari {

// Error taxonomy is deliberately small; the CLI maps each type onto one of
// the documented exit codes (2..5).  Plain std::domain_error /
// std::invalid_argument mark argument-contract violations inside the library.

// rejected configuration or parameter set (exit 2)
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// pair lies outside the coupled admissible cone, e.g. vanishing overlap (exit 3)
struct admissibility_error : std::runtime_error {
    explicit admissibility_error(const std::string& what) : std::runtime_error(what) {}
};

// extremal-threshold search failed to produce a usable estimate (exit 4)
struct search_error : std::runtime_error {
    explicit search_error(const std::string& what) : std::runtime_error(what) {}
};

// branch minimization failed: no projection, collapse, or non-convergence (exit 5)
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

// input is structurally outside an operation's domain (zero pair, b <= 0, ...)
struct degenerate_input : std::domain_error {
    explicit degenerate_input(const std::string& what) : std::domain_error(what) {}
};

} // namespace nehari
