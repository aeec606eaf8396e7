#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nehari/config.hpp"
#include "nehari/errors.hpp"
#include "nehari/grid.hpp"

using namespace nehari;
namespace fs = std::filesystem;

namespace {

const char* kSampleConfig = R"(# desk-sized instance used across the CLI checks
[problem]
p = 1.4
q = 1.7
alpha = 1.6
beta = 1.7
theta = 1.3
lambda = 0.3
potential_u = constant 1.0
potential_v = constant 1.3

[grid]
dim = 1
n = 64
half_width = 16   # box [-16, 16]
s = 0.45

[sampler]
family = gaussian_bumps
count = 6
refine = true

[solve]
branch = plus

[output]
seed = 11
)";

void expect_config_error(const std::string& text, const std::string& needle) {
    try {
        (void)parse_config(text);
        FAIL_CHECK("no error for: " << needle);
    } catch (const config_error& e) {
        const std::string what = e.what();
        CHECK_MESSAGE(what.find(needle) != std::string::npos,
                      "wanted '" << needle << "' in '" << what << "'");
    }
}

fs::path work_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "nehari_config_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing " << path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct CliResult {
    int code = -1;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const char* bin = std::getenv("NEHARI_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "NEHARI_CLI_BIN not set");
    static int counter = 0;
    const fs::path log = work_dir() / ("cli_log_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string(bin) + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return {WEXITSTATUS(rc), read_file(log)};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

struct FiberRow {
    double t, q_n, q_e, dq_e;
    std::string marker;
};

std::vector<FiberRow> parse_fiber_csv(const std::string& text) {
    std::vector<FiberRow> rows;
    const std::vector<std::string> lines = split(text, '\n');
    REQUIRE(lines.front() == "t,q_n,q_e,dq_e_dt,marker,config_hash,seed");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::vector<std::string> c = split(lines[i], ',');
        REQUIRE(c.size() == 7);
        rows.push_back(
            {std::stod(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3]), c[4]});
    }
    return rows;
}

}  // namespace

TEST_CASE("parsing fills every block and fans out the shared knobs") {
    const ExperimentConfig cfg = parse_config(kSampleConfig);
    CHECK(cfg.problem.exp.p == 1.4);
    CHECK(cfg.problem.exp.q == 1.7);
    CHECK(cfg.problem.exp.alpha == 1.6);
    CHECK(cfg.problem.exp.beta == 1.7);
    CHECK(cfg.problem.theta == 1.3);
    CHECK(cfg.problem.lambda == 0.3);
    CHECK(cfg.problem.pot_v.floor == 1.3);
    CHECK(cfg.problem.grid.points_per_dim == 64);
    CHECK(cfg.problem.grid.half_width == 16.0);
    CHECK(cfg.sampler.count == 6);
    CHECK(cfg.sampler.refine);
    CHECK(cfg.seed == 11);
    CHECK(cfg.sampler.seed == 11);
    CHECK(cfg.solve.seed == 11);
    CHECK(cfg.solve.lambda == 0.3);
    CHECK(cfg.out_dir == "out");
}

TEST_CASE("serialization is canonical and idempotent") {
    const std::string once = serialize_config(parse_config(kSampleConfig));
    const std::string twice = serialize_config(parse_config(once));
    CHECK(once == twice);

    const ExperimentConfig defaults;
    CHECK(serialize_config(parse_config(serialize_config(defaults))) ==
          serialize_config(defaults));

    ExperimentConfig tab;
    tab.problem.pot_u = PotentialSpec::tabulated(
        std::vector<double>(tab.problem.grid.size(), 1.0));
    CHECK_THROWS_AS((void)serialize_config(tab), config_error);
}

TEST_CASE("parse errors carry the offending line number") {
    expect_config_error("[problem]\nzeta = 1\n", "config line 2");
    expect_config_error("[problem]\nzeta = 1\n", "unknown key 'zeta'");
    expect_config_error("\n\n[conjecture]\n", "config line 3");
    expect_config_error("[conjecture]\n", "unknown section");
    expect_config_error("[grid]\nn = sixty\n", "not an integer");
    expect_config_error("[problem]\np = ---\n", "not a number");
    expect_config_error("[sampler]\nrefine = maybe\n", "true or false");
    expect_config_error("[problem]\npotential_u = bessel 2\n", "'constant <v0>' or 'power_law <gamma>'");
    expect_config_error("p = 1.2\n", "before any [section]");
    expect_config_error("[grid\nn = 4\n", "unterminated section header");
    expect_config_error("[grid]\njust words\n", "expected key = value");
    expect_config_error("[grid]\n= 3\n", "empty key");
    expect_config_error("[solve]\nbranch = both\n", "branch must be 'plus' or 'minus'");
    expect_config_error("[sampler]\nfamily = comets\n", "unknown sampler family");
}

TEST_CASE("name mappings round-trip and refuse the rest") {
    CHECK(branch_from_string("plus") == NehariTag::NPlus);
    CHECK(branch_from_string("minus") == NehariTag::NMinus);
    CHECK(std::string(branch_to_string(NehariTag::NPlus)) == "plus");
    CHECK(std::string(branch_to_string(NehariTag::NMinus)) == "minus");
    CHECK_THROWS_AS((void)branch_from_string("zero"), config_error);
    CHECK_THROWS_AS((void)branch_to_string(NehariTag::NZero), config_error);

    for (SamplerFamily fam : {SamplerFamily::gaussian_bumps, SamplerFamily::fourier_modes,
                              SamplerFamily::perturbed_pair})
        CHECK(family_from_string(family_to_string(fam)) == fam);
    CHECK_THROWS_AS((void)family_from_string("comets"), config_error);
}

TEST_CASE("double formatting is shortest round-trip text") {
    for (double x : {0.1, 1.0 / 3.0, 1e-6, 6.25e9, 0.3, 1.4, 5e-324, 1.7976931348623157e308,
                     -2.5, 1234567.0}) {
        const std::string text = format_double(x);
        CHECK(std::strtod(text.c_str(), nullptr) == x);
    }
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("config hash keys the experiment, not the output directory") {
    ExperimentConfig cfg = parse_config(kSampleConfig);
    const std::string base = config_hash(cfg);
    CHECK(base.size() == 16);
    CHECK(base.find_first_not_of("0123456789abcdef") == std::string::npos);

    ExperimentConfig moved = cfg;
    moved.out_dir = "elsewhere";
    CHECK(config_hash(moved) == base);

    ExperimentConfig shifted = cfg;
    shifted.problem.lambda = 0.31;
    shifted.solve.lambda = 0.31;
    CHECK(config_hash(shifted) != base);

    ExperimentConfig reseeded = cfg;
    reseeded.seed = reseeded.sampler.seed = reseeded.solve.seed = 12;
    CHECK(config_hash(reseeded) != base);
}

TEST_CASE("cli: verify passes on the sample instance") {
    const fs::path ini = work_dir() / "sample.ini";
    write_file(ini, kSampleConfig);
    const CliResult r = run_cli("verify --config " + ini.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("suites passed") != std::string::npos);
    CHECK(r.output.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: contract violations exit with the config code") {
    const fs::path bad_q = work_dir() / "bad_q.ini";
    write_file(bad_q, "[problem]\nq = 2.5\n");
    CliResult r = run_cli("verify --config " + bad_q.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("(P)") != std::string::npos);

    const fs::path bad_pot = work_dir() / "bad_pot.ini";
    write_file(bad_pot, "[problem]\npotential_u = power_law 0.4\n");
    r = run_cli("verify --config " + bad_pot.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("(V1)") != std::string::npos);

    r = run_cli("verify --config " + (work_dir() / "no_such.ini").string());
    CHECK(r.code == 2);
}

TEST_CASE("cli: fiber refuses a pair with no shared support") {
    const fs::path ini = work_dir() / "sample.ini";
    write_file(ini, kSampleConfig);
    GridSpec g;
    g.points_per_dim = 64;
    ScalarField left(g), right(g);
    for (int i = 0; i < 20; ++i) left.at(static_cast<std::size_t>(i)) = 1.0;
    for (int i = 44; i < 64; ++i) right.at(static_cast<std::size_t>(i)) = 1.0;
    const fs::path up = work_dir() / "left.csv", vp = work_dir() / "right.csv";
    write_field_csv(left, up.string());
    write_field_csv(right, vp.string());

    const CliResult r = run_cli("fiber --config " + ini.string() + " --u " + up.string() +
                                " --v " + vp.string());
    CHECK(r.code == 3);
    CHECK(r.output.find("no coupling mass") != std::string::npos);

    const CliResult half = run_cli("fiber --config " + ini.string() + " --u " + up.string());
    CHECK(half.code == 2);
}

TEST_CASE("cli: fiber table is reproducible and ordered around its markers") {
    const fs::path ini = work_dir() / "sample.ini";
    write_file(ini, kSampleConfig);
    const fs::path out_a = work_dir() / "fiber_a", out_b = work_dir() / "fiber_b";
    CHECK(run_cli("fiber --config " + ini.string() + " --out " + out_a.string()).code == 0);
    CHECK(run_cli("fiber --config " + ini.string() + " --out " + out_b.string()).code == 0);
    const std::string csv = read_file(out_a / "fiber.csv");
    CHECK(csv == read_file(out_b / "fiber.csv"));

    const std::vector<FiberRow> rows = parse_fiber_csv(csv);
    CHECK(rows.size() == 204);

    double t_e = 0, t_plus = 0, t_max = 0;
    int n_te = 0, n_tplus = 0, n_tmax = 0, n_tminus = 0;
    for (const FiberRow& r : rows) {
        if (r.marker == "t_e") t_e = r.t, ++n_te;
        if (r.marker == "t_plus") t_plus = r.t, ++n_tplus;
        if (r.marker == "t_max") t_max = r.t, ++n_tmax;
        if (r.marker == "t_minus") ++n_tminus;
    }
    CHECK(n_te == 1);
    CHECK(n_tplus == 1);
    CHECK(n_tmax == 1);
    CHECK(n_tminus == 1);
    CHECK(t_plus < t_max);
    CHECK(t_max < t_e);

    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].t <= rows[i].t);

    // the quotients cross exactly where the energy quotient peaks
    for (const FiberRow& r : rows) {
        if (r.marker == "t_e") {
            CHECK(r.q_n == doctest::Approx(r.q_e).epsilon(1e-12));
            CHECK(std::fabs(r.dq_e) < 1e-9);
            continue;
        }
        if (std::fabs(r.t - t_e) < 5e-3 * t_e) continue;  // skip the contact band
        if (r.t < t_e) {
            CHECK(r.q_n > r.q_e);
            CHECK(r.dq_e > 0.0);
        } else {
            CHECK(r.q_n < r.q_e);
            CHECK(r.dq_e < 0.0);
        }
        if (r.marker == "t_plus" || r.marker == "t_minus")
            CHECK(r.q_n == doctest::Approx(0.3).epsilon(1e-9));
    }
}

TEST_CASE("cli: sweep consumes precomputed thresholds and shows one sign change") {
    std::string text = kSampleConfig;
    text +=
        "\n[solve]\nlambda_star_hat = 0.6234\nlambda_lower_star_hat = 0.5640\n"
        "[output]\ndir = " +
        (work_dir() / "sweep_out").string() + "\n";
    const fs::path ini = work_dir() / "sweep.ini";
    write_file(ini, text);

    const CliResult r = run_cli("sweep --config " + ini.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("estimated thresholds") == std::string::npos);
    CHECK(r.output.find("changes sign") != std::string::npos);

    const std::vector<std::string> lines = split(read_file(work_dir() / "sweep_out" / "sweep.csv"), '\n');
    CHECK(lines.front() == "lambda,energy,class,coupling,ok,note,config_hash,seed");
    int sign_changes = 0, ok_rows = 0;
    double prev = 0;
    bool have_prev = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const std::vector<std::string> c = split(lines[i], ',');
        REQUIRE(c.size() == 8);
        CHECK(c[2] == "NMinus");
        CHECK(c[4] == "1");
        ++ok_rows;
        const double energy = std::stod(c[1]);
        if (have_prev) {
            CHECK(energy < prev);
            if (prev > 0 && energy <= 0) ++sign_changes;
        }
        prev = energy;
        have_prev = true;
    }
    CHECK(ok_rows == 8);
    CHECK(sign_changes == 1);
}

TEST_CASE("cli: a lambda far above the threshold exits with the solver code") {
    const fs::path ini = work_dir() / "sample.ini";
    write_file(ini, kSampleConfig);
    const CliResult r = run_cli("solve --config " + ini.string() + " --lambda 50");
    CHECK(r.code == 5);
}
