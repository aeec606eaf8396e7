#pragma once
#include <cstdint>
#include <string>

#include "nehari/extremal.hpp"
#include "nehari/params.hpp"
#include "nehari/solver.hpp"

namespace nehari {

// One experiment: problem, sampler and solve blocks plus output directory
// and seed.  The seed fans out to the sampler and solver streams, and the
// solver's lambda mirrors the problem block, so each appears once in a file.
struct ExperimentConfig {
    ProblemParams problem;
    DirectionSampler sampler;
    SolveConfig solve;
    std::string out_dir = "out";
    std::uint64_t seed = 1;
};

// Flat key = value lines under [section] headers, '#' starts a comment.
// Unknown sections, unknown keys, or malformed values are refused with the
// offending line number.  Parsing does not run the problem-level validators;
// the CLI validates right after resolving flag overrides.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// canonical text: fixed section and key order, shortest round-trip number
// formatting, so serialize(parse(text)) is idempotent.  Tabulated potentials
// have no text form and are refused.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a of the canonical text as 16 hex digits; stamped into every emitted
// table and report so outputs trace back to their exact configuration.  The
// output directory is excluded: redirecting files is not a new experiment.
std::string config_hash(const ExperimentConfig& cfg);

// name mappings shared by config files, CLI flags and output labels
NehariTag branch_from_string(const std::string& s);      // "plus" | "minus"
const char* branch_to_string(NehariTag tag);
SamplerFamily family_from_string(const std::string& s);
const char* family_to_string(SamplerFamily fam);

// shortest decimal text that parses back to exactly the same double
std::string format_double(double x);

}  // namespace nehari
