#pragma once

// O-regular variation of w = 1/δ at zero: the upper ratio r1(ε), the indices
// p1 <= q1, and numerical checks of the integral comparison lemmas.

#include <span>
#include <string>
#include <vector>

#include "levyholder/measures.hpp"

namespace lh {

struct ORVOptions {
  std::vector<double> x_grid;      ///< empty: 10 log-spaced points in [1e-6, 1e-2]
  int tail_points = 5;             ///< limsup surrogate uses the smallest tail_points x
  std::vector<double> eps_small;   ///< empty: 2^-10 .. 2^-3
  std::vector<double> eps_large;   ///< empty: 2^3 .. 2^10
  double index_tol = 0.05;         ///< slack allowed in p1 <= q1
};

struct ORVReport {
  std::vector<double> eps;         ///< all sampled ε, small wing then large wing
  std::vector<double> r1;          ///< r1(ε) on eps
  double p1 = 0.0;
  double q1 = 0.0;
  double residual_small = 0.0;     ///< rms residual of the small-ε log-log fit
  double residual_large = 0.0;
  bool ordered = true;             ///< p1 <= q1 + index_tol
  bool monotone = true;            ///< r1 nondecreasing in ε on the samples
  bool warning() const { return !ordered || !monotone; }
  json to_json() const;
};

std::vector<double> default_x_grid();
std::vector<double> log_grid(double lo, double hi, int n);

/// max over the tail_points smallest x of w(εx)/w(x).
double estimate_r1(const LevyMeasure& m, double eps, std::span<const double> x_grid,
                   int tail_points = 5);

ORVReport estimate_indices(const LevyMeasure& m, const ORVOptions& opt = {});

enum class Al1Case { a, b, c, d };

Al1Case parse_al1_case(const std::string& name);
std::string to_string(Al1Case c);

struct LemmaReport {
  Al1Case which = Al1Case::a;
  double beta = 0.0;
  double tau = 0.0;
  std::vector<double> x;           ///< sampled x, decreasing
  std::vector<double> ratio;       ///< integral / (x^τ w(x)^β)
  std::vector<double> scale;       ///< x^τ w(x)^β
  double max_ratio = 0.0;
  std::string trend;               ///< observed x→0 behaviour of x^τ w(x)^β: "0" or "inf"
  bool pass = false;
  json to_json() const;
};

/// Checks the comparison inequality for case a/b/c/d on x_grid ⊂ (0,1], using
/// the supplied indices for the hypothesis test.
LemmaReport check_al1(const LevyMeasure& m, Al1Case which, double beta, double tau,
                      std::span<const double> x_grid, double p1, double q1);

/// Same, with indices from estimate_indices.
LemmaReport check_al1(const LevyMeasure& m, Al1Case which, double beta, double tau,
                      std::span<const double> x_grid);

struct AC1Report {
  std::vector<double> partial_sums;
  double sum = 0.0;
  double tail_bound = 0.0;         ///< geometric bound on the remainder after the last term
  bool converged = false;
  json to_json() const;
};

/// Partial sums of Σ_j w(N^{-j})^β up to j = terms - 1 with a geometric tail test.
AC1Report check_ac1(const LevyMeasure& m, double beta, double N, int terms = 201);

}  // namespace lh
