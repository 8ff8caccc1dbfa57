#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradest/harness.hpp"
#include "gradest/verify.hpp"

namespace {

using namespace gradest;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("GRADBENCH_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InvalidSpec("GRADBENCH_SEED is not a valid 64-bit seed");
        }
    }
    return 42;
}

int parse_threads(const std::string& s) {
    if (s == "auto") return 0;
    try {
        return std::stoi(s);
    } catch (const std::exception&) {
        throw InvalidSpec("--threads expects an integer or 'auto'");
    }
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(std::stoi(s.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (out.empty()) throw InvalidSpec("empty integer list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(std::stod(s.substr(pos, comma - pos)));
        pos = comma + 1;
    }
    if (out.empty()) throw InvalidSpec("empty list");
    return out;
}

// "lo:hi:steps" with steps = number of grid points.
std::vector<double> parse_grid(const std::string& s) {
    const std::size_t c1 = s.find(':');
    const std::size_t c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw InvalidSpec("grid must be lo:hi:steps, e.g. 0.05:2:40");
    const double lo = std::stod(s.substr(0, c1));
    const double hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
    const int steps = std::stoi(s.substr(c2 + 1));
    if (steps < 1 || !(hi >= lo)) throw InvalidSpec("grid must satisfy lo <= hi, steps >= 1");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        out.push_back(steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    return out;
}

std::vector<EstimatorConfig> parse_estimators(const std::string& s, double a) {
    std::vector<EstimatorConfig> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string name = s.substr(pos, comma - pos);
        pos = comma + 1;
        EstimatorConfig c;
        if (name == "ld") c.kind = EstimatorKind::ld;
        else if (name == "ft") c.kind = EstimatorKind::ft_sym;
        else if (name == "ftu") c.kind = EstimatorKind::ft_single;
        else if (name == "rt") c.kind = EstimatorKind::rt_interval;
        else if (name == "hsl") c.kind = EstimatorKind::hsl;
        else if (name == "reparam") c.kind = EstimatorKind::reparam;
        else throw InvalidSpec("unknown estimator '" + name + "' (expected ld,ft,ftu,rt,hsl,reparam)");
        c.a = a;
        out.push_back(c);
    }
    if (out.empty()) throw InvalidSpec("empty estimator list");
    return out;
}

void emit_csv(const std::vector<SweepRecord>& records, const std::string& out_path) {
    const std::string csv = to_csv(records);
    if (out_path.empty()) {
        std::fputs(csv.c_str(), stdout);
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + out_path);
    f << csv;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradbench: Monte Carlo gradient estimation workbench"};
    app.require_subcommand(1);

    std::string seed_str, threads_str = "auto", out_path, f_label = "x";
    std::string estimators_str = "ld,ft", n_grid_str = "2", a_grid_str = "0.05:2:40", gamma_grid_str = "0.03,0.1,0.3,1";
    std::string example = "fx", suite_str = "all";
    double floor_gamma = 1.0, a = 0.2;
    std::int64_t trials = 100000;

    const auto add_shared = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed_str, "64-bit RNG seed (default 42; env GRADBENCH_SEED overrides the default)");
        cmd->add_option("--trials", trials, "Monte Carlo trials per grid cell");
        cmd->add_option("--threads", threads_str, "worker threads, or 'auto'");
        cmd->add_option("--out", out_path, "CSV output path (stdout when omitted)");
        cmd->add_option("--floor", floor_gamma, "density floor parameter gamma of the rational bump");
        cmd->add_option("--f", f_label, "test function: x|x2|sin1|sin2|sin3");
    };

    CLI::App* sweep = app.add_subcommand("variance-sweep", "variance vs sample size per estimator");
    add_shared(sweep);
    sweep->add_option("--n-grid", n_grid_str, "comma list of sample sizes");
    sweep->add_option("--estimators", estimators_str, "comma list of ld,ft,ftu,rt,hsl,reparam");
    sweep->add_option("--a", a, "length scale for rt/hsl");

    CLI::App* analytical = app.add_subcommand("analytical", "closed-form example: MC vs theory");
    add_shared(analytical);
    analytical->add_option("--example", example, "fx (f(x)=x) or fx2 (f(x)=x^2)");

    CLI::App* combo = app.add_subcommand("combo-sweep", "min-variance combinations over the length-scale grid");
    add_shared(combo);
    combo->add_option("--a-grid", a_grid_str, "length-scale grid lo:hi:steps");
    combo->add_option("--estimators", estimators_str, "subset of ld,ft,rt (ld required)");

    CLI::App* denom = app.add_subcommand("denominator-study", "Var[FT]/Var[LD] as the density floor shrinks");
    add_shared(denom);
    denom->add_option("--gamma-grid", gamma_grid_str, "comma list of gamma values");
    denom->add_option("--n-grid", n_grid_str, "comma list of sample sizes");

    CLI::App* verify = app.add_subcommand("verify", "run the identity/estimator/combination check suites");
    add_shared(verify);
    verify->add_option("--suite", suite_str, "identities|estimators|combination|all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        ExperimentSpec spec;
        spec.seed = seed_str.empty() ? default_seed() : std::stoull(seed_str);
        spec.threads = parse_threads(threads_str);
        spec.trials = trials;
        spec.gamma = floor_gamma;
        spec.f_label = f_label;

        if (sweep->parsed()) {
            spec.experiment = "variance-sweep";
            spec.n_grid = parse_int_list(n_grid_str);
            spec.estimators = parse_estimators(estimators_str, a);
            emit_csv(run_variance_sweep(spec), out_path);
            return 0;
        }
        if (analytical->parsed()) {
            spec.experiment = "analytical";
            spec.analytical_example = example;
            spec.estimators = {EstimatorConfig{}};
            const AnalyticalReport rep = run_analytical(spec);
            std::printf("analytical example %s (trials=%lld seed=%llu)\n", rep.example.c_str(),
                        static_cast<long long>(rep.trials), static_cast<unsigned long long>(rep.seed));
            for (const AnalyticalQuantity& qy : rep.quantities)
                std::printf("  %-14s mc=% .6f  closed_form=% .6f\n", qy.name.c_str(), qy.mc, qy.closed_form);
            if (!out_path.empty()) emit_csv(rep.records, out_path);
            return 0;
        }
        if (combo->parsed()) {
            spec.experiment = "combo-sweep";
            spec.a_grid = parse_grid(a_grid_str);
            spec.estimators = parse_estimators(estimators_str, a);
            emit_csv(run_combo_sweep(spec), out_path);
            return 0;
        }
        if (denom->parsed()) {
            spec.experiment = "denominator-study";
            spec.gamma_grid = parse_double_list(gamma_grid_str);
            spec.n_grid = parse_int_list(n_grid_str);
            spec.estimators = {EstimatorConfig{EstimatorKind::ld}, EstimatorConfig{EstimatorKind::ft_sym}};
            emit_csv(run_denominator_study(spec), out_path);
            return 0;
        }
        if (verify->parsed()) {
            VerifyConfig cfg;
            cfg.seed = spec.seed;
            cfg.threads = spec.threads;
            cfg.trials = verify->count("--trials") > 0 ? trials : 1000000;
            const std::vector<CheckResult> results = run_verify(parse_suite(suite_str), cfg);
            for (const CheckResult& r : results) std::printf("%s\n", format_check(r).c_str());
            if (all_passed(results)) {
                std::printf("verify: %zu checks passed\n", results.size());
                return 0;
            }
            std::size_t failed = 0;
            for (const CheckResult& r : results)
                if (!r.passed) ++failed;
            std::printf("verify: %zu of %zu checks FAILED\n", failed, results.size());
            return 1;
        }
    } catch (const InvalidSpec& e) {
        std::fprintf(stderr, "invalid spec: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid spec: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
