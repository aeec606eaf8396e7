// Command line front end: verify | fiber | extremal | solve | sweep.
// Every artifact written here carries the effective config hash and the
// master seed, so runs are attributable and byte-reproducible.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nehari/config.hpp"
#include "nehari/errors.hpp"
#include "nehari/extremal.hpp"
#include "nehari/fibering.hpp"
#include "nehari/grid.hpp"
#include "nehari/params.hpp"
#include "nehari/solver.hpp"
#include "nehari/verify.hpp"

using nlohmann::ordered_json;
using namespace nehari;

namespace {

struct Invocation {
    std::string config_path;
    std::string out_dir;
    std::string branch_name;
    std::string u_path, v_path;
    std::uint64_t seed = 1;
    double lambda = 0.1;
};

// config file first, then explicit flags on top; the seed and lambda fans
// mirror what parse_config does so flag overrides behave like edits to the
// file itself
ExperimentConfig load_effective(const Invocation& inv, const CLI::App* sub) {
    auto given = [sub](const char* name) {
        const CLI::Option* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    ExperimentConfig cfg;
    if (!inv.config_path.empty()) cfg = load_config_file(inv.config_path);
    if (given("--seed")) cfg.seed = inv.seed;
    if (given("--out")) cfg.out_dir = inv.out_dir;
    if (given("--lambda")) cfg.problem.lambda = inv.lambda;
    if (given("--branch")) cfg.solve.branch = branch_from_string(inv.branch_name);
    cfg.sampler.seed = cfg.seed;
    cfg.solve.seed = cfg.seed;
    cfg.solve.lambda = cfg.problem.lambda;
    validate_params(cfg.problem);
    validate_config(cfg.solve);
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw config_error("short write to " + path);
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void add_bump(ScalarField& f, double cx, double cy, double width, double amp) {
    const GridSpec& g = f.grid;
    auto sq = [](double x) { return x * x; };
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

// overlapping offset bumps, the same shape the solver seeds from; fixed
// parameters so fiber tables are reproducible without a seed
FieldPair default_pair(const GridSpec& g) {
    FieldPair w{ScalarField(g), ScalarField(g)};
    const double off = g.half_width / 8.0, width = g.half_width / 7.0;
    add_bump(w.u, -off, -off, width, 1.0);
    add_bump(w.v, off, off, width, 0.8);
    return w;
}

int cmd_verify(const ExperimentConfig& cfg) {
    const std::vector<SuiteResult> rows = run_verify_suites(cfg.problem, cfg.seed);
    std::printf("config %s  seed %llu\n", config_hash(cfg).c_str(),
                static_cast<unsigned long long>(cfg.seed));
    std::printf("%-34s %-6s %8s %12s\n", "suite", "result", "checks", "worst");
    std::size_t passed = 0;
    for (const SuiteResult& r : rows) {
        std::printf("%-34s %-6s %8d %12.3e\n", r.name.c_str(), r.pass ? "pass" : "FAIL",
                    r.checks, r.worst);
        if (r.pass)
            ++passed;
        else if (!r.detail.empty())
            std::printf("    %s\n", r.detail.c_str());
    }
    std::printf("%zu/%zu suites passed\n", passed, rows.size());
    return passed == rows.size() ? 0 : 1;
}

int cmd_fiber(const ExperimentConfig& cfg, const Invocation& inv) {
    ProblemParams prm = cfg.problem;
    FieldPair w;
    if (inv.u_path.empty() != inv.v_path.empty())
        throw config_error("fiber: --u and --v must be given together");
    if (!inv.u_path.empty()) {
        w.u = read_field_csv(inv.u_path);
        w.v = read_field_csv(inv.v_path);
        require_same_grid(w.u, w.v);
        prm.grid = w.u.grid;  // field files carry their own grid
        validate_params(prm);
    } else {
        w = default_pair(prm.grid);
    }
    if (!in_coupling_set(w, prm))
        throw admissibility_error("fiber: pair has no coupling mass on the grid");

    const FiberingCoefficients f = coefficients_of(w, prm);
    const double lambda = prm.lambda;
    const Peak pn = peak_nehari(f);
    const Peak pe = peak_energy(f);
    const ProjectionScales ps = projection_scales(f, lambda);

    struct Row {
        double t;
        const char* marker;
    };
    std::vector<Row> rows;
    double lo = pn.scale / 50.0, hi = pn.scale * 50.0;
    if (ps.kind == RootKind::two) {
        lo = std::min(lo, ps.plus / 2.0);
        hi = std::max(hi, ps.minus * 2.0);
    }
    const int npts = 200;
    const double ratio = std::pow(hi / lo, 1.0 / (npts - 1));
    for (int i = 0; i < npts; ++i) rows.push_back({lo * std::pow(ratio, i), ""});
    rows.push_back({pn.scale, "t_max"});
    rows.push_back({pe.scale, "t_e"});
    if (ps.kind == RootKind::two) {
        rows.push_back({ps.plus, "t_plus"});
        rows.push_back({ps.minus, "t_minus"});
    } else if (ps.kind == RootKind::tangent) {
        rows.push_back({ps.plus, "t_tangent"});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });

    const std::string hash = config_hash(cfg);
    std::string csv = "t,q_n,q_e,dq_e_dt,marker,config_hash,seed\n";
    for (const Row& r : rows) {
        csv += format_double(r.t);
        csv += ',';
        csv += format_double(quotient_nehari(f, r.t));
        csv += ',';
        csv += format_double(quotient_energy(f, r.t));
        csv += ',';
        csv += format_double(quotient_energy_derivative(f, r.t));
        csv += ',';
        csv += csv_cell(r.marker);
        csv += ',';
        csv += hash;
        csv += ',';
        csv += std::to_string(cfg.seed);
        csv += '\n';
    }
    const std::string path = out_path(cfg, "fiber.csv");
    write_text(path, csv);

    std::printf("fiber table -> %s\n", path.c_str());
    std::printf("peak q_n %s at t %s\n", format_double(pn.value).c_str(),
                format_double(pn.scale).c_str());
    std::printf("peak q_e %s at t %s\n", format_double(pe.value).c_str(),
                format_double(pe.scale).c_str());
    if (ps.kind == RootKind::two)
        std::printf("lambda %s crosses q_n at t_plus %s, t_minus %s\n",
                    format_double(lambda).c_str(), format_double(ps.plus).c_str(),
                    format_double(ps.minus).c_str());
    else if (ps.kind == RootKind::tangent)
        std::printf("lambda %s is tangent to q_n at t %s\n", format_double(lambda).c_str(),
                    format_double(ps.plus).c_str());
    else
        std::printf("lambda %s sits above the q_n peak: no crossings\n",
                    format_double(lambda).c_str());
    return 0;
}

ordered_json channel_json(const ExtremalEstimate& e) {
    ordered_json c;
    c["lambda_star_hat"] = e.lambda_star_hat;
    c["lambda_lower_star_hat"] = e.lambda_lower_star_hat;
    c["lower_bound_diag"] = e.lower_bound_diag;
    ordered_json starts = ordered_json::array();
    for (const StartRecord& s : e.starts) {
        ordered_json row;
        row["start_id"] = s.start_id;
        row["value"] = s.value;
        row["iterations"] = s.iterations;
        starts.push_back(std::move(row));
    }
    c["starts"] = std::move(starts);
    return c;
}

int cmd_extremal(const ExperimentConfig& cfg) {
    const ThresholdEstimates th = estimate_thresholds(cfg.problem, cfg.sampler);
    const double floor_n = lower_bound_nehari(cfg.problem, cfg.seed);
    const double floor_e = lower_bound_energy(cfg.problem, cfg.seed);
    const double el = el_residual(cfg.problem, th.nehari.argmin, th.nehari.lambda_star_hat);

    ordered_json j;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["family"] = family_to_string(cfg.sampler.family);
    j["count"] = cfg.sampler.count;
    j["refine"] = cfg.sampler.refine;
    j["lambda_star_hat"] = th.lambda_star_hat;
    j["lambda_lower_star_hat"] = th.lambda_lower_star_hat;
    j["floor_nehari"] = floor_n;
    j["floor_energy"] = floor_e;
    j["el_residual_at_argmin"] = el;
    j["nehari"] = channel_json(th.nehari);
    j["energy"] = channel_json(th.energy);

    const std::string path = out_path(cfg, "extremal.json");
    write_text(path, j.dump(2) + "\n");
    std::printf("lambda_star_hat %s  lambda_lower_star_hat %s -> %s\n",
                format_double(th.lambda_star_hat).c_str(),
                format_double(th.lambda_lower_star_hat).c_str(), path.c_str());
    return 0;
}

int cmd_solve(const ExperimentConfig& cfg) {
    const SolutionReport rep = minimize_branch(cfg.problem, cfg.solve);
    const std::string branch = branch_to_string(cfg.solve.branch);

    ordered_json j;
    j["config_hash"] = config_hash(cfg);
    j["seed"] = cfg.seed;
    j["lambda"] = cfg.solve.lambda;
    j["branch"] = branch;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["restarts"] = rep.restarts;
    j["energy"] = rep.energy;
    j["grad_norm"] = rep.grad_norm;
    j["coupling"] = rep.coupling;
    j["min_value_u"] = rep.min_value_u;
    j["min_value_v"] = rep.min_value_v;
    j["split_residual"] = rep.split_residual;
    j["regime"] = to_string(rep.regime);
    ordered_json cls;
    cls["tag"] = to_string(rep.cls.tag);
    cls["d1"] = rep.cls.d1;
    cls["d2"] = rep.cls.d2;
    j["class"] = std::move(cls);
    j["t_history"] = rep.t_history;
    j["energy_history"] = rep.energy_history;

    const std::string base = "solution_" + branch;
    const std::string jpath = out_path(cfg, base + ".json");
    write_text(jpath, j.dump(2) + "\n");
    write_field_csv(rep.pair.u, out_path(cfg, base + "_u.csv"));
    write_field_csv(rep.pair.v, out_path(cfg, base + "_v.csv"));

    std::printf("branch %s lambda %s: energy %s, grad %s, %d iterations -> %s\n",
                branch.c_str(), format_double(cfg.solve.lambda).c_str(),
                format_double(rep.energy).c_str(), format_double(rep.grad_norm).c_str(),
                rep.iterations, jpath.c_str());
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg) {
    double hi = cfg.solve.lambda_star_hat;
    double lo = cfg.solve.lambda_lower_star_hat;
    if (!(hi > 0.0) || !(lo > 0.0)) {
        const ThresholdEstimates th = estimate_thresholds(cfg.problem, cfg.sampler);
        hi = th.lambda_star_hat;
        lo = th.lambda_lower_star_hat;
        std::printf("estimated thresholds: lambda_star_hat %s, lambda_lower_star_hat %s\n",
                    format_double(hi).c_str(), format_double(lo).c_str());
    }
    const int npts = 8;
    double first = 0.3 * lo, last = 0.94 * hi;
    if (last <= lo) last = 0.5 * (lo + hi);  // keep the grid straddling lo
    std::vector<double> lambdas(npts);
    for (int i = 0; i < npts; ++i)
        lambdas[static_cast<std::size_t>(i)] = first + (last - first) * i / (npts - 1);

    SolveConfig base = cfg.solve;
    base.lambda_star_hat = hi;
    base.lambda_lower_star_hat = lo;
    const std::vector<SweepRow> rows = lambda_sweep(cfg.problem, lambdas, base);

    const std::string hash = config_hash(cfg);
    std::string csv = "lambda,energy,class,coupling,ok,note,config_hash,seed\n";
    for (const SweepRow& r : rows) {
        csv += format_double(r.lambda);
        csv += ',';
        csv += format_double(r.energy);
        csv += ',';
        csv += to_string(r.tag);
        csv += ',';
        csv += format_double(r.coupling);
        csv += ',';
        csv += r.ok ? "1" : "0";
        csv += ',';
        csv += csv_cell(r.note);
        csv += ',';
        csv += hash;
        csv += ',';
        csv += std::to_string(cfg.seed);
        csv += '\n';
    }
    const std::string path = out_path(cfg, "sweep.csv");
    write_text(path, csv);
    std::printf("sweep table -> %s\n", path.c_str());

    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!rows[i].ok || !rows[i + 1].ok) continue;
        if (rows[i].energy > 0.0 && rows[i + 1].energy <= 0.0) {
            const double z = rows[i].lambda + (rows[i + 1].lambda - rows[i].lambda) *
                                                 rows[i].energy /
                                                 (rows[i].energy - rows[i + 1].energy);
            std::printf("steep-branch energy changes sign in [%s, %s], zero near %s\n",
                        format_double(rows[i].lambda).c_str(),
                        format_double(rows[i + 1].lambda).c_str(), format_double(z).c_str());
            break;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for a coupled concave-convex fractional system"};
    app.require_subcommand(1);
    Invocation inv;

    auto add_common = [&inv](CLI::App* sub, bool with_lambda) {
        sub->add_option("--config", inv.config_path, "config file (INI-like sections)")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", inv.seed, "master seed override");
        sub->add_option("--out", inv.out_dir, "output directory override");
        if (with_lambda) sub->add_option("--lambda", inv.lambda, "problem.lambda override");
    };

    CLI::App* verify =
        app.add_subcommand("verify", "run the identity and property suites, print a table");
    add_common(verify, false);

    CLI::App* fiber =
        app.add_subcommand("fiber", "tabulate both fibering quotients along a pair's ray");
    add_common(fiber, true);
    fiber->add_option("--u", inv.u_path, "first field CSV (defaults to a built-in bump pair)")
        ->check(CLI::ExistingFile);
    fiber->add_option("--v", inv.v_path, "second field CSV")->check(CLI::ExistingFile);

    CLI::App* extremal =
        app.add_subcommand("extremal", "multi-start estimates of both extremal thresholds");
    add_common(extremal, true);

    CLI::App* solve = app.add_subcommand("solve", "projected descent on one Nehari branch");
    add_common(solve, true);
    solve->add_option("--branch", inv.branch_name, "plus | minus")
        ->check(CLI::IsMember({"plus", "minus"}));

    CLI::App* sweep =
        app.add_subcommand("sweep", "steep-branch energies across a lambda grid");
    add_common(sweep, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    try {
        const ExperimentConfig cfg = load_effective(inv, sub);
        if (sub == verify) return cmd_verify(cfg);
        if (sub == fiber) return cmd_fiber(cfg, inv);
        if (sub == extremal) return cmd_extremal(cfg);
        if (sub == solve) return cmd_solve(cfg);
        return cmd_sweep(cfg);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const admissibility_error& e) {
        std::fprintf(stderr, "admissibility error: %s\n", e.what());
        return 3;
    } catch (const search_error& e) {
        std::fprintf(stderr, "search error: %s\n", e.what());
        return 4;
    } catch (const solver_error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 5;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "degenerate input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
