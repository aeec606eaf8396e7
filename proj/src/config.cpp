#include "nehari/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw config_error("config line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line, const std::string& key) {
    double out = 0;
    const char* b = v.data();
    const char* e = v.data() + v.size();
    auto res = std::from_chars(b, e, out);
    if (res.ec != std::errc{} || res.ptr != e)
        fail(line, "value for " + key + " is not a number: '" + v + "'");
    return out;
}

int parse_int(const std::string& v, int line, const std::string& key) {
    int out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        fail(line, "value for " + key + " is not an integer: '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& v, int line, const std::string& key) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        fail(line, "value for " + key + " is not a nonnegative integer: '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, "value for " + key + " must be true or false, got '" + v + "'");
}

PotentialSpec parse_potential(const std::string& v, int line, const std::string& key) {
    const std::size_t sp = v.find(' ');
    const std::string kind = sp == std::string::npos ? v : v.substr(0, sp);
    const std::string arg = sp == std::string::npos ? "" : trim(v.substr(sp + 1));
    if (kind == "constant") return PotentialSpec::constant(parse_double(arg, line, key));
    if (kind == "power_law") return PotentialSpec::power_law(parse_double(arg, line, key));
    fail(line, "potential " + key + " must be 'constant <v0>' or 'power_law <gamma>'");
}

std::string potential_string(const PotentialSpec& pot) {
    switch (pot.kind) {
        case PotentialKind::constant: return "constant " + format_double(pot.floor);
        case PotentialKind::power_law: return "power_law " + format_double(pot.growth);
        default:
            throw config_error("tabulated potentials have no config text form");
    }
}

void apply(ExperimentConfig& cfg, const std::string& sec, const std::string& key,
           const std::string& val, int line) {
    if (sec == "problem") {
        if (key == "p") cfg.problem.exp.p = parse_double(val, line, key);
        else if (key == "q") cfg.problem.exp.q = parse_double(val, line, key);
        else if (key == "alpha") cfg.problem.exp.alpha = parse_double(val, line, key);
        else if (key == "beta") cfg.problem.exp.beta = parse_double(val, line, key);
        else if (key == "theta") cfg.problem.theta = parse_double(val, line, key);
        else if (key == "lambda") cfg.problem.lambda = parse_double(val, line, key);
        else if (key == "potential_u") cfg.problem.pot_u = parse_potential(val, line, key);
        else if (key == "potential_v") cfg.problem.pot_v = parse_potential(val, line, key);
        else fail(line, "unknown key '" + key + "' in [problem]");
    } else if (sec == "grid") {
        if (key == "dim") cfg.problem.grid.dim = parse_int(val, line, key);
        else if (key == "n") cfg.problem.grid.points_per_dim = parse_int(val, line, key);
        else if (key == "half_width") cfg.problem.grid.half_width = parse_double(val, line, key);
        else if (key == "s") cfg.problem.grid.s = parse_double(val, line, key);
        else fail(line, "unknown key '" + key + "' in [grid]");
    } else if (sec == "sampler") {
        if (key == "family") cfg.sampler.family = family_from_string(val);
        else if (key == "count") cfg.sampler.count = parse_int(val, line, key);
        else if (key == "perturb_scale") cfg.sampler.perturb_scale = parse_double(val, line, key);
        else if (key == "prescale") cfg.sampler.prescale = parse_double(val, line, key);
        else if (key == "refine") cfg.sampler.refine = parse_bool(val, line, key);
        else fail(line, "unknown key '" + key + "' in [sampler]");
    } else if (sec == "solve") {
        if (key == "branch") cfg.solve.branch = branch_from_string(val);
        else if (key == "max_outer") cfg.solve.max_outer = parse_int(val, line, key);
        else if (key == "grad_tol") cfg.solve.grad_tol = parse_double(val, line, key);
        else if (key == "step0") cfg.solve.step0 = parse_double(val, line, key);
        else if (key == "armijo") cfg.solve.armijo = parse_double(val, line, key);
        else if (key == "max_halvings") cfg.solve.max_halvings = parse_int(val, line, key);
        else if (key == "max_restarts") cfg.solve.max_restarts = parse_int(val, line, key);
        else if (key == "nminus_cap") cfg.solve.nminus_cap = parse_double(val, line, key);
        else if (key == "lambda_star_hat") cfg.solve.lambda_star_hat = parse_double(val, line, key);
        else if (key == "lambda_lower_star_hat")
            cfg.solve.lambda_lower_star_hat = parse_double(val, line, key);
        else fail(line, "unknown key '" + key + "' in [solve]");
    } else if (sec == "output") {
        if (key == "dir") cfg.out_dir = val;
        else if (key == "seed") cfg.seed = parse_u64(val, line, key);
        else fail(line, "unknown key '" + key + "' in [output]");
    } else {
        fail(line, "key '" + key + "' appears before any [section] header");
    }
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

NehariTag branch_from_string(const std::string& s) {
    if (s == "plus") return NehariTag::NPlus;
    if (s == "minus") return NehariTag::NMinus;
    throw config_error("branch must be 'plus' or 'minus', got '" + s + "'");
}

const char* branch_to_string(NehariTag tag) {
    switch (tag) {
        case NehariTag::NPlus: return "plus";
        case NehariTag::NMinus: return "minus";
        default:
            throw config_error("only the plus and minus branches have config names");
    }
}

SamplerFamily family_from_string(const std::string& s) {
    if (s == "gaussian_bumps") return SamplerFamily::gaussian_bumps;
    if (s == "fourier_modes") return SamplerFamily::fourier_modes;
    if (s == "perturbed_pair") return SamplerFamily::perturbed_pair;
    throw config_error("unknown sampler family '" + s + "'");
}

const char* family_to_string(SamplerFamily fam) {
    switch (fam) {
        case SamplerFamily::gaussian_bumps: return "gaussian_bumps";
        case SamplerFamily::fourier_modes: return "fourier_modes";
        default: return "perturbed_pair";
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "unterminated section header");
            section = s.substr(1, s.size() - 2);
            if (section != "problem" && section != "grid" && section != "sampler" &&
                section != "solve" && section != "output")
                fail(line, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        apply(cfg, section, key, val, line);
    }
    cfg.sampler.seed = cfg.seed;
    cfg.solve.seed = cfg.seed;
    cfg.solve.lambda = cfg.problem.lambda;
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    auto kv = [&out](const char* key, const std::string& val) {
        out += key;
        out += " = ";
        out += val;
        out += '\n';
    };
    out += "[problem]\n";
    kv("p", format_double(cfg.problem.exp.p));
    kv("q", format_double(cfg.problem.exp.q));
    kv("alpha", format_double(cfg.problem.exp.alpha));
    kv("beta", format_double(cfg.problem.exp.beta));
    kv("theta", format_double(cfg.problem.theta));
    kv("lambda", format_double(cfg.problem.lambda));
    kv("potential_u", potential_string(cfg.problem.pot_u));
    kv("potential_v", potential_string(cfg.problem.pot_v));
    out += "\n[grid]\n";
    kv("dim", std::to_string(cfg.problem.grid.dim));
    kv("n", std::to_string(cfg.problem.grid.points_per_dim));
    kv("half_width", format_double(cfg.problem.grid.half_width));
    kv("s", format_double(cfg.problem.grid.s));
    out += "\n[sampler]\n";
    kv("family", family_to_string(cfg.sampler.family));
    kv("count", std::to_string(cfg.sampler.count));
    kv("perturb_scale", format_double(cfg.sampler.perturb_scale));
    kv("prescale", format_double(cfg.sampler.prescale));
    kv("refine", cfg.sampler.refine ? "true" : "false");
    out += "\n[solve]\n";
    kv("branch", branch_to_string(cfg.solve.branch));
    kv("max_outer", std::to_string(cfg.solve.max_outer));
    kv("grad_tol", format_double(cfg.solve.grad_tol));
    kv("step0", format_double(cfg.solve.step0));
    kv("armijo", format_double(cfg.solve.armijo));
    kv("max_halvings", std::to_string(cfg.solve.max_halvings));
    kv("max_restarts", std::to_string(cfg.solve.max_restarts));
    kv("nminus_cap", format_double(cfg.solve.nminus_cap));
    kv("lambda_star_hat", format_double(cfg.solve.lambda_star_hat));
    kv("lambda_lower_star_hat", format_double(cfg.solve.lambda_lower_star_hat));
    out += "\n[output]\n";
    kv("dir", cfg.out_dir);
    kv("seed", std::to_string(cfg.seed));
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    // the hash identifies the experiment, not where its files land
    ExperimentConfig keyed = cfg;
    keyed.out_dir = "out";
    const std::string text = serialize_config(keyed);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xF];
        h >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf);
}

}  // namespace nehari
