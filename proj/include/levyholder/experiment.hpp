#pragma once

// Verification suites behind the command-line runner. Each suite returns named
// checks with a measured value, a threshold and a verdict; run_experiment
// writes report.json, CSV tables and summary.txt.

#include <cstdint>
#include <string>
#include <vector>

#include "levyholder/measures.hpp"
#include "levyholder/solver.hpp"
#include "levyholder/spectral.hpp"

namespace lh {

struct Check {
  std::string name;
  std::string paper_ref;  ///< descriptive label of the statement being checked
  json measured;
  json threshold;
  bool pass = false;
  json to_json() const;
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const;
  json to_json() const;
};

struct NamedMeasure {
  std::string id;
  LevyMeasure measure;
};

/// stable α ∈ {0.6, 1, 1.4} and one preset of each phi family, all 1-d.
std::vector<NamedMeasure> preset_measures();
/// The estimate/norm matrix: stable α ∈ {0.6, 1, 1.4}, phi1 and phi3.
std::vector<NamedMeasure> default_matrix_measures();

struct ForcingSpec {
  std::string kind = "default";  ///< default | harmonic | lacunary | file
  std::array<int, 3> k{1, 0, 0};
  double offset = 0.0;
  int levels = -1;               ///< lacunary: -1 means the grid's top block
  std::string path;              ///< file: binary GridFunction, constant in time
};

struct ExperimentConfig {
  std::vector<std::string> suites{"all"};
  std::vector<NamedMeasure> measures;
  TorusGrid grid{1, 1.0, 128};
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out = "out";

  // solver
  std::vector<double> lambdas{0.0, 1.0, 10.0, 100.0};
  std::vector<double> Ts{0.1, 1.0};
  std::vector<double> betas{0.3, 0.6};
  std::vector<double> mus{0.0, 0.5, 1.0};
  int K = 128;
  ForcingSpec forcing;
  bool smoke_2d = false;  ///< add a d = 2 estimate case on a 32 -> 64 grid

  // norms / fracops
  int norm_M = 256;
  std::vector<std::pair<double, double>> kappa_pairs{{0.3, 0.5}, {0.5, 1.0}};
  std::vector<double> decay_R{1.0, 0.25, 1.0 / 16, 1.0 / 64};

  // mc
  double mc_eps = 1e-3;
  std::size_t mc_paths = 100000;
  double mc_t = 0.05;

  /// Parses a config object; relative file paths resolve against base_dir.
  static ExperimentConfig from_json(const json& j, const std::string& base_dir = ".");
  json to_json() const;
};

/// ψ(ξ) of a symmetric unmodulated 1-d measure by an Ooura sine transform of
/// the tail, ψ(ξ) = -λ k ∫_0^∞ sin(kr) δ_unit(r) dr with k = 2π|ξ|.
double symbol_oracle_1d(const LevyMeasure& m, double xi);

/// ψ on |ξ| ≤ 32 against symbol_oracle_1d, and against -2π²|ξ| for stable α = 1.
Check symbol_check(const NamedMeasure& m);
/// Harmonic-forcing closed form and the K = 128 residual with its K = 256 ratio.
std::vector<Check> exactness_checks(const NamedMeasure& m, const TorusGrid& g);
/// Monte Carlo E f(x + Z_t) against spectral::semigroup, pointwise within 3 standard errors.
Check semigroup_cross_oracle(const NamedMeasure& m, const TorusGrid& g, double eps, std::uint64_t seed, double t,
                             std::size_t paths);

SuiteResult run_orv_suite(const ExperimentConfig& c);
SuiteResult run_norms_suite(const ExperimentConfig& c, const std::string& csv_dir = "");
SuiteResult run_fracops_suite(const ExperimentConfig& c, const std::string& csv_dir = "");
SuiteResult run_solver_suite(const ExperimentConfig& c, const std::string& csv_dir = "");
SuiteResult run_mc_suite(const ExperimentConfig& c);

struct ExperimentResult {
  std::vector<SuiteResult> suites;
  json report;  ///< contents of report.json
  bool pass = false;
  std::vector<std::string> failing;  ///< "suite/check" names
};

/// Runs the configured suites and writes report.json, the CSV tables and
/// summary.txt into c.out.
ExperimentResult run_experiment(const ExperimentConfig& c);

/// report.json with the timestamp removed, for determinism comparisons.
json strip_timestamp(json report);

}  // namespace lh
