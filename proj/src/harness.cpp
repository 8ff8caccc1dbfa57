#include "gradest/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gradest/rng.hpp"
#include "gradest/trial_map.hpp"

namespace gradest {

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0; // 1/(T-1)
    double std_error = 0.0;
};

Moments moments_of(std::span<const double> v) {
    const auto T = static_cast<std::int64_t>(v.size());
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(T);
    for (double x : v) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= static_cast<double>(T - 1);
    m.std_error = std::sqrt(m.variance / static_cast<double>(T));
    return m;
}

// Evaluates the configured estimators on one shared n-sample bump batch.
// Draw layout per trial: 0..n-1 batch points; HSL configs consume n*m inner
// uniforms each, in config order, starting at draw n.
struct BumpTrialEvaluator {
    RationalBump density;
    TestFunction1D f;
    std::vector<EstimatorConfig> configs;
    int n;

    void validate() const {
        if (n < 1) throw InvalidSpec("sample size n must be >= 1");
        for (const EstimatorConfig& c : configs) {
            switch (c.kind) {
            case EstimatorKind::ld:
            case EstimatorKind::ld_baseline:
            case EstimatorKind::hsl:
                break;
            case EstimatorKind::ft_sym:
            case EstimatorKind::rt_interval:
                if (n < 2) throw InvalidSpec(std::string(estimator_name(c.kind)) + " needs n >= 2");
                break;
            case EstimatorKind::ft_single:
                if (n % 2 != 0) throw InvalidSpec("ftu consumes the batch as (x,z) pairs; n must be even");
                break;
            case EstimatorKind::reparam:
                throw InvalidSpec("reparam requires an explicit reparameterisation; "
                                  "the rational bump has none (Gaussian only)");
            case EstimatorKind::rt_real:
                throw InvalidSpec("rt_real requires full real-line support; the rational bump is compactly "
                                  "supported (use rt)");
            case EstimatorKind::rt_nd:
                throw InvalidSpec("rt_nd is the multivariate estimator; the sweep densities are univariate");
            }
            if ((c.kind == EstimatorKind::rt_interval || c.kind == EstimatorKind::hsl) && !(c.a > 0.0))
                throw InvalidSpec("length scale a must be > 0");
            if (c.kind == EstimatorKind::hsl && c.hsl_inner_m < 1) throw InvalidSpec("hsl inner m must be >= 1");
        }
    }

    void eval(const TrialStream& stream, std::span<double> out) const {
        SampleBatch batch;
        batch.points.resize(static_cast<std::size_t>(n));
        batch.theta = density.theta;
        batch.seed_tag = stream.trial;
        for (int i = 0; i < n; ++i)
            batch.points[static_cast<std::size_t>(i)] = density.sample(stream.u(static_cast<std::uint64_t>(i)));

        std::uint64_t inner_base = static_cast<std::uint64_t>(n);
        for (std::size_t ci = 0; ci < configs.size(); ++ci) {
            const EstimatorConfig& c = configs[ci];
            switch (c.kind) {
            case EstimatorKind::ld:
                out[ci] = estimate_ld(batch, f, density, 0.0).scalar();
                break;
            case EstimatorKind::ld_baseline:
                out[ci] = estimate_ld(batch, f, density, c.baseline_b).scalar();
                break;
            case EstimatorKind::ft_sym:
                out[ci] = estimate_ft(batch, f, density, true).scalar();
                break;
            case EstimatorKind::ft_single:
                out[ci] = estimate_ft(batch, f, density, false).scalar();
                break;
            case EstimatorKind::rt_interval:
                out[ci] = estimate_rt_interval(batch, f, density, c.a).scalar();
                break;
            case EstimatorKind::hsl: {
                std::vector<double> inner(static_cast<std::size_t>(n) * static_cast<std::size_t>(c.hsl_inner_m));
                for (std::size_t j = 0; j < inner.size(); ++j)
                    inner[j] = stream.u(inner_base + static_cast<std::uint64_t>(j));
                inner_base += inner.size();
                out[ci] = estimate_hsl(batch, f, density, c.a, c.hsl_inner_m, inner).scalar();
                break;
            }
            default:
                throw InvalidSpec("estimator not valid for the sweep density");
            }
        }
    }
};

SweepRecord base_record(const ExperimentSpec& spec) {
    SweepRecord r;
    r.experiment = spec.experiment;
    r.f = spec.f_label;
    r.trials = spec.trials;
    r.seed = spec.seed;
    return r;
}

void require_common(const ExperimentSpec& spec) {
    if (spec.trials < 2) throw InvalidSpec("trials must be >= 2");
    if (!(spec.gamma > 0.0)) throw InvalidSpec("floor (gamma) must be > 0");
    if (spec.estimators.empty()) throw InvalidSpec("estimator list is empty");
}

std::string join_names(std::span<const EstimatorConfig> configs) {
    std::string s;
    for (const EstimatorConfig& c : configs) {
        if (!s.empty()) s += '+';
        s += estimator_name(c.kind);
    }
    return s;
}

} // namespace

std::string csv_header() { return "experiment,estimator,f,gamma,a,n,trials,mean,variance,std_error,seed"; }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(std::span<const SweepRecord> records) {
    std::string out = csv_header() + "\n";
    for (const SweepRecord& r : records) {
        out += r.experiment + ',' + r.estimator + ',' + r.f + ',';
        if (r.gamma) out += format_double(*r.gamma);
        out += ',';
        if (r.a) out += format_double(*r.a);
        out += ',';
        if (r.n) out += std::to_string(*r.n);
        out += ',';
        out += std::to_string(r.trials);
        out += ',';
        if (r.mean) out += format_double(*r.mean);
        out += ',';
        if (r.variance) out += format_double(*r.variance);
        out += ',';
        if (r.std_error) out += format_double(*r.std_error);
        out += ',';
        out += std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::vector<SweepRecord> run_variance_sweep(const ExperimentSpec& spec) {
    require_common(spec);
    if (spec.n_grid.empty()) throw InvalidSpec("variance-sweep: n_grid is empty");

    const TestFunction1D f = test_function_by_label(spec.f_label);
    const std::int64_t T = spec.trials;
    std::vector<SweepRecord> records;

    for (std::size_t gi = 0; gi < spec.n_grid.size(); ++gi) {
        const int n = spec.n_grid[gi];
        BumpTrialEvaluator ev{RationalBump(0.0, spec.gamma), f, spec.estimators, n};
        ev.validate();

        const std::size_t k = spec.estimators.size();
        std::vector<std::vector<double>> values(k, std::vector<double>(static_cast<std::size_t>(T)));
        map_trials_checked(T, spec.threads, [&](std::int64_t t) {
            std::vector<double> out(k);
            ev.eval(TrialStream{spec.seed, static_cast<std::uint64_t>(gi) * static_cast<std::uint64_t>(T) +
                                               static_cast<std::uint64_t>(t)},
                    out);
            for (std::size_t ci = 0; ci < k; ++ci) values[ci][static_cast<std::size_t>(t)] = out[ci];
        });

        for (std::size_t ci = 0; ci < k; ++ci) {
            const Moments m = moments_of(values[ci]);
            SweepRecord r = base_record(spec);
            r.estimator = estimator_name(spec.estimators[ci].kind);
            r.gamma = spec.gamma;
            if (spec.estimators[ci].kind == EstimatorKind::rt_interval ||
                spec.estimators[ci].kind == EstimatorKind::hsl)
                r.a = spec.estimators[ci].a;
            r.n = n;
            r.mean = m.mean;
            r.variance = m.variance;
            r.std_error = m.std_error;
            records.push_back(std::move(r));
        }
    }
    return records;
}

double AnalyticalReport::value(const std::string& name) const {
    for (const AnalyticalQuantity& q : quantities)
        if (q.name == name) return q.mc;
    throw std::invalid_argument("AnalyticalReport: no quantity named " + name);
}

double AnalyticalReport::target(const std::string& name) const {
    for (const AnalyticalQuantity& q : quantities)
        if (q.name == name) return q.closed_form;
    throw std::invalid_argument("AnalyticalReport: no quantity named " + name);
}

namespace closed_form {

double mu_fx() { return (M_PI - 2.0) / M_PI; }
double vld_fx() { return 0.25 - 2.0 / (M_PI * M_PI); }
double vft_fx() { return M_PI / 12.0 - (M_PI - 2.0) * (M_PI - 2.0) / (M_PI * M_PI); }
double cstar_fx() {
    const double p = M_PI;
    return p * (60.0 - 21.0 * p + p * p) / (24.0 + 72.0 * p - 27.0 * p * p + p * p * p);
}
double ratio_fx() {
    const double p = M_PI;
    const double p2 = p * p, p3 = p2 * p, p4 = p3 * p, p5 = p4 * p;
    const double vstar = (-384.0 - 768.0 * p + 288.0 * p2 + 112.0 * p3 - 39.0 * p4 + p5) /
                         (4.0 * p2 * (24.0 + 72.0 * p - 27.0 * p2 + p3));
    return vstar / vld_fx();
}
double vld_fx2() { return 12.0 / M_PI - 15.0 / 4.0; }
double vft_fx2() { return 4.0 * M_PI / 15.0; }
double cstar_fx2() {
    const double p = M_PI;
    return 1.0 - (285.0 * p - 880.0) / (p * (795.0 + 16.0 * p) - 2480.0);
}
double combo_variance_fx2(double c) {
    const double p = M_PI;
    return 4.0 / 15.0 * p * (c - 1.0) * (c - 1.0) + 0.25 * c * (53.0 * c - 68.0) +
           4.0 * (40.0 - 31.0 * c) * c / (3.0 * p);
}
double ratio_fx2() { return combo_variance_fx2(cstar_fx2()) / vld_fx2(); }

} // namespace closed_form

AnalyticalReport run_analytical(const ExperimentSpec& spec) {
    if (spec.trials < 2) throw InvalidSpec("trials must be >= 2");
    if (spec.analytical_example != "fx" && spec.analytical_example != "fx2")
        throw InvalidSpec("analytical example must be fx or fx2");
    const bool fx = spec.analytical_example == "fx";

    ExperimentSpec sub = spec;
    sub.f_label = fx ? "x" : "x2";
    sub.gamma = 1.0;
    sub.estimators = {EstimatorConfig{EstimatorKind::ld},
                      EstimatorConfig{fx ? EstimatorKind::ft_sym : EstimatorKind::ft_single}};

    const TestFunction1D f = test_function_by_label(sub.f_label);
    BumpTrialEvaluator ev{RationalBump(0.0, 1.0), f, sub.estimators, 2};
    ev.validate();

    const std::int64_t T = spec.trials;
    std::vector<double> obs(static_cast<std::size_t>(2 * T));
    map_trials_checked(T, spec.threads, [&](std::int64_t t) {
        std::vector<double> out(2);
        ev.eval(TrialStream{spec.seed, static_cast<std::uint64_t>(t)}, out);
        obs[static_cast<std::size_t>(2 * t)] = out[0];
        obs[static_cast<std::size_t>(2 * t + 1)] = out[1];
    });

    AnalyticalReport rep;
    rep.example = spec.analytical_example;
    rep.trials = T;
    rep.seed = spec.seed;

    // fx works in centered moments; fx2 in uncentered ones (its target is 0).
    const CovEstimate cov = empirical_cov(obs, T, 2, /*centered=*/fx);
    const MixWeights w = fx ? minvar_weights(cov) : minvar_weights_uncentered(cov);
    const double combined = w.c[0] * w.c[0] * cov.at(0, 0) + w.c[1] * w.c[1] * cov.at(1, 1) +
                            2.0 * w.c[0] * w.c[1] * cov.at(0, 1);

    double mean_ld = 0.0, mean_ft = 0.0;
    for (std::int64_t t = 0; t < T; ++t) {
        mean_ld += obs[static_cast<std::size_t>(2 * t)];
        mean_ft += obs[static_cast<std::size_t>(2 * t + 1)];
    }
    mean_ld /= static_cast<double>(T);
    mean_ft /= static_cast<double>(T);

    if (fx) {
        rep.quantities = {
            {"mu", mean_ld, closed_form::mu_fx()},
            {"mu_ft", mean_ft, closed_form::mu_fx()},
            {"V_ld", cov.at(0, 0), closed_form::vld_fx()},
            {"V_ft", cov.at(1, 1), closed_form::vft_fx()},
            {"c_star", w.c[0], closed_form::cstar_fx()},
            {"variance_ratio", combined / cov.at(0, 0), closed_form::ratio_fx()},
        };
    } else {
        rep.quantities = {
            {"mu", mean_ld, 0.0},
            {"mu_ft", mean_ft, 0.0},
            {"V_ld", cov.at(0, 0), closed_form::vld_fx2()},
            {"V_ft", cov.at(1, 1), closed_form::vft_fx2()},
            {"c_star", w.c[0], closed_form::cstar_fx2()},
            {"variance_ratio", combined / cov.at(0, 0), closed_form::ratio_fx2()},
        };
    }

    // CSV mirror of the report
    const auto emit = [&](const std::string& name, double mean, double var) {
        SweepRecord r = base_record(spec);
        r.experiment = "analytical";
        r.f = sub.f_label;
        r.estimator = name;
        r.gamma = 1.0;
        r.n = 2;
        r.mean = mean;
        r.variance = var;
        r.std_error = std::sqrt(var / static_cast<double>(T));
        rep.records.push_back(std::move(r));
    };
    emit("ld", mean_ld, cov.at(0, 0));
    emit(fx ? "ft" : "ftu", mean_ft, cov.at(1, 1));
    emit(fx ? "ld+ft" : "ld+ftu", w.c[0] * mean_ld + w.c[1] * mean_ft, combined);
    return rep;
}

std::vector<SweepRecord> run_combo_sweep(const ExperimentSpec& spec) {
    require_common(spec);
    if (spec.a_grid.empty()) throw InvalidSpec("combo-sweep: a_grid is empty");
    for (const EstimatorConfig& c : spec.estimators)
        if (c.kind != EstimatorKind::ld && c.kind != EstimatorKind::ft_sym && c.kind != EstimatorKind::rt_interval)
            throw InvalidSpec("combo-sweep: subsets draw from {ld, ft, rt}");
    const bool has_ld = std::any_of(spec.estimators.begin(), spec.estimators.end(),
                                    [](const EstimatorConfig& c) { return c.kind == EstimatorKind::ld; });
    if (!has_ld) throw InvalidSpec("combo-sweep: the variance ratio is taken against pure ld; include ld");

    const TestFunction1D f = test_function_by_label(spec.f_label);
    const std::int64_t T = spec.trials;
    const int n = 2;
    const std::size_t k = spec.estimators.size();

    // Batches are shared across the a grid (common random numbers): evaluate
    // the a-independent members once, the rt member per a.
    std::vector<SweepRecord> records;
    std::vector<std::vector<double>> values(k, std::vector<double>(static_cast<std::size_t>(T)));

    for (double a : spec.a_grid) {
        std::vector<EstimatorConfig> configs = spec.estimators;
        for (EstimatorConfig& c : configs) c.a = a;
        BumpTrialEvaluator ev{RationalBump(0.0, spec.gamma), f, configs, n};
        ev.validate();

        map_trials_checked(T, spec.threads, [&](std::int64_t t) {
            std::vector<double> out(k);
            ev.eval(TrialStream{spec.seed, static_cast<std::uint64_t>(t)}, out);
            for (std::size_t ci = 0; ci < k; ++ci) values[ci][static_cast<std::size_t>(t)] = out[ci];
        });

        std::vector<double> obs(static_cast<std::size_t>(T) * k);
        for (std::int64_t t = 0; t < T; ++t)
            for (std::size_t ci = 0; ci < k; ++ci)
                obs[static_cast<std::size_t>(t) * k + ci] = values[ci][static_cast<std::size_t>(t)];
        const CovEstimate cov = empirical_cov(obs, T, static_cast<int>(k), true);
        const MixWeights w = minvar_weights(cov);

        double combined_var = 0.0;
        double combined_mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const Moments mi = moments_of(values[i]);
            combined_mean += w.c[i] * mi.mean;
            for (std::size_t j = 0; j < k; ++j)
                combined_var += w.c[i] * w.c[j] * cov.at(static_cast<int>(i), static_cast<int>(j));

            SweepRecord r = base_record(spec);
            r.estimator = estimator_name(spec.estimators[i].kind);
            r.gamma = spec.gamma;
            r.a = a;
            r.n = n;
            r.mean = mi.mean;
            r.variance = mi.variance;
            r.std_error = mi.std_error;
            records.push_back(std::move(r));
        }

        SweepRecord r = base_record(spec);
        r.estimator = join_names(spec.estimators);
        r.gamma = spec.gamma;
        r.a = a;
        r.n = n;
        r.mean = combined_mean;
        r.variance = combined_var;
        r.std_error = std::sqrt(combined_var / static_cast<double>(T));
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<SweepRecord> run_denominator_study(const ExperimentSpec& spec) {
    ExperimentSpec sub = spec;
    if (sub.estimators.empty())
        sub.estimators = {EstimatorConfig{EstimatorKind::ld}, EstimatorConfig{EstimatorKind::ft_sym}};
    require_common(sub);
    if (sub.gamma_grid.empty()) throw InvalidSpec("denominator-study: gamma_grid is empty");
    if (sub.n_grid.empty()) throw InvalidSpec("denominator-study: n_grid is empty");
    for (double g : sub.gamma_grid)
        if (!(g > 0.0)) throw InvalidSpec("denominator-study: gamma values must be positive");

    const TestFunction1D f = test_function_by_label(sub.f_label);
    const std::int64_t T = sub.trials;
    std::vector<SweepRecord> records;

    std::size_t cell = 0;
    for (double gamma : sub.gamma_grid) {
        for (int n : sub.n_grid) {
            const std::vector<EstimatorConfig> configs{EstimatorConfig{EstimatorKind::ld},
                                                       EstimatorConfig{EstimatorKind::ft_sym}};
            BumpTrialEvaluator ev{RationalBump(0.0, gamma), f, configs, n};
            ev.validate();

            std::vector<double> ld_vals(static_cast<std::size_t>(T));
            std::vector<double> ft_vals(static_cast<std::size_t>(T));
            map_trials_checked(T, sub.threads, [&](std::int64_t t) {
                std::vector<double> out(2);
                ev.eval(TrialStream{sub.seed, static_cast<std::uint64_t>(cell) * static_cast<std::uint64_t>(T) +
                                                  static_cast<std::uint64_t>(t)},
                        out);
                ld_vals[static_cast<std::size_t>(t)] = out[0];
                ft_vals[static_cast<std::size_t>(t)] = out[1];
            });
            ++cell;

            const Moments ml = moments_of(ld_vals);
            const Moments mf = moments_of(ft_vals);
            for (const auto& [name, m] : {std::pair<const char*, const Moments&>{"ld", ml}, {"ft", mf}}) {
                SweepRecord r = base_record(sub);
                r.estimator = name;
                r.gamma = gamma;
                r.n = n;
                r.mean = m.mean;
                r.variance = m.variance;
                r.std_error = m.std_error;
                records.push_back(std::move(r));
            }
            SweepRecord ratio = base_record(sub);
            ratio.estimator = "ft_over_ld";
            ratio.gamma = gamma;
            ratio.n = n;
            ratio.variance = mf.variance / ml.variance;
            records.push_back(std::move(ratio));
        }
    }
    return records;
}

} // namespace gradest
