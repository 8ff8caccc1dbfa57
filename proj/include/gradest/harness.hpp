#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradest/combination.hpp"
#include "gradest/estimators.hpp"

namespace gradest {

// A malformed experiment (bad grids, invalid estimator/density pairing, ...).
// The CLI maps this to exit code 2.
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
    std::string experiment; // variance-sweep | analytical | combo-sweep | denominator-study
    std::vector<EstimatorConfig> estimators;
    std::string f_label = "x";
    double gamma = 1.0; // bump floor
    std::vector<int> n_grid;
    std::vector<double> a_grid;
    std::vector<double> gamma_grid;
    std::int64_t trials = 100000;
    std::uint64_t seed = 42;
    int threads = 0;                    // <= 0: OpenMP default
    std::string analytical_example = "fx"; // fx | fx2
};

struct SweepRecord {
    std::string experiment;
    std::string estimator;
    std::string f;
    std::optional<double> gamma;
    std::optional<double> a;
    std::optional<int> n;
    std::int64_t trials = 0;
    std::optional<double> mean;
    std::optional<double> variance;
    std::optional<double> std_error; // sqrt(variance / trials)
    std::uint64_t seed = 0;
};

// Exact schema: experiment,estimator,f,gamma,a,n,trials,mean,variance,std_error,seed
// Floats carry 17 significant digits so the CSV round-trips bit-exactly;
// missing-dimension cells are empty.
std::string csv_header();
std::string to_csv(std::span<const SweepRecord> records);
std::string format_double(double v); // %.17g

// Per (estimator, n): T independent n-sample batches, shared across the
// estimators of each trial; empirical mean/variance per cell.
std::vector<SweepRecord> run_variance_sweep(const ExperimentSpec& spec);

struct AnalyticalQuantity {
    std::string name;
    double mc = 0.0;
    double closed_form = 0.0;
};

struct AnalyticalReport {
    std::string example;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::vector<AnalyticalQuantity> quantities;
    std::vector<SweepRecord> records;

    double value(const std::string& name) const;  // MC value by quantity name
    double target(const std::string& name) const; // closed form by quantity name
};

// The desk-scale analytical examples on the rational bump at theta = 0.
//   fx : f(x) = x,  n = 2; log-derivative vs symmetrised fundamental trick,
//        centered moments (mu, V_ld, V_ft, c*, variance ratio).
//   fx2: f(x) = x^2, n = 2; log-derivative vs single-sum fundamental trick,
//        uncentered moments (the target gradient is 0 by symmetry).
AnalyticalReport run_analytical(const ExperimentSpec& spec);

// Per a in a_grid at n = 2: per-trial values for each member of the subset
// (ld, ft, rt), centered covariance, min-var weights, combined variance.
// Emits one row per (a, member) plus one combined row per a; the combined
// estimator label joins the member names with '+'.
std::vector<SweepRecord> run_combo_sweep(const ExperimentSpec& spec);

// Var[FT]/Var[LD] per (gamma, n); emits ld and ft rows plus a ratio row
// (estimator "ft_over_ld", ratio stored in the variance column).
std::vector<SweepRecord> run_denominator_study(const ExperimentSpec& spec);

// Closed forms of the analytical examples, as functions of pi only.
namespace closed_form {
double mu_fx();        // (pi-2)/pi
double vld_fx();       // 1/4 - 2/pi^2
double vft_fx();       // pi/12 - (pi-2)^2/pi^2
double cstar_fx();     // pi (60 - 21 pi + pi^2) / (24 + 72 pi - 27 pi^2 + pi^3)
double ratio_fx();     // V*(c*) / V_ld
double vld_fx2();      // 12/pi - 15/4
double vft_fx2();      // 4 pi / 15
double cstar_fx2();    // 1 - (285 pi - 880) / (pi (795 + 16 pi) - 2480)
double ratio_fx2();    // V(c*) / V_ld, uncentered
double combo_variance_fx2(double c); // uncentered V_{ld+ft}(c) for f(x)=x^2
} // namespace closed_form

} // namespace gradest
