#pragma once

// ∂_t u = L^ν u - λu + f on the torus, u(0) = 0, advanced mode by mode with
// exponential time differencing (f̂ linear in t between snapshots).

#include <functional>
#include <string>
#include <vector>

#include "levyholder/lpnorms.hpp"
#include "levyholder/measures.hpp"
#include "levyholder/spectral.hpp"

namespace lh {

using Forcing = std::function<cplx(double t, const Point& x)>;

struct CauchyProblem {
  LevyMeasure measure;
  double lambda = 0.0;
  double T = 1.0;
  std::vector<GridFunction> forcing;  ///< snapshots at t_n = nT/K, n = 0..K

  CauchyProblem(LevyMeasure m, double lambda, double T, std::vector<GridFunction> forcing);
  static CauchyProblem from_function(const LevyMeasure& m, const TorusGrid& grid, double lambda, double T, int K,
                                     const Forcing& f);

  int K() const { return static_cast<int>(forcing.size()) - 1; }
  double dt() const { return T / K(); }
  const TorusGrid& grid() const { return forcing.front().grid(); }
};

/// (1/λ) ∧ T, with 1/0 = ∞.
double rho_lambda(double lambda, double T);

struct SolveResult {
  std::vector<double> t;
  std::vector<GridFunction> u;
  std::vector<double> norm_beta;   ///< |u(t_n)|_{β,∞}, filled by attach_norms
  std::vector<double> norm_1beta;  ///< |u(t_n)|_0 + |L u(t_n)|_{β,∞}
  double rho = 0.0;
};

SolveResult solve(const CauchyProblem& p);

/// |u|_0 + |L^ν u|_{β,∞}, the κ = 1 form of |u|_{1+β,∞}.
double norm_one_plus(const GridFunction& u, const LevyMeasure& m, double beta, const Partition& part);

void attach_norms(SolveResult& r, const LevyMeasure& m, double beta, const Partition& part);

/// max_n |u(t_n) - ∫_0^{t_n} (L u - λu + f) ds|_0 with the trapezoid rule in time.
double residual(const CauchyProblem& p, const SolveResult& r);

/// e^x - 1 over x and (e^x - 1 - x)/x², by series near 0.
cplx phi1(cplx x);
cplx phi2(cplx x);

struct EstimateRow {
  std::string forcing;  ///< id of the forcing attaining the constants ("max" when aggregated)
  double lambda = 0.0, T = 0.0, rho = 0.0;
  int M = 0;
  double C5 = 0.0, C1 = 0.0;
  std::vector<double> C2;  ///< per μ
};

/// Constants of one solve:
///   C5 = max_t |u|_{β,∞} / (ρ F),  C1 = max_t |u|_{1+β,∞} / ((1+ρ) F),
///   C2(μ) = max over dyadic pairs (t, t - 2^{-k}T) of
///           |u(t) - u(t')|_{μ+β,∞} / ([(t-t')^{1-μ} + (1+ρ)(t-t')] F),
/// with F = max_t |f(t)|_{β,∞}; |·|_{1+β,∞} is taken in the κ = 1 form.
EstimateRow measure_constants(const CauchyProblem& p, const SolveResult& r, double beta,
                              const std::vector<double>& mus, const Partition& part);

struct NamedForcing {
  std::string id;
  Forcing f;
};

struct EstimateOptions {
  std::vector<double> lambdas{0.0, 1.0, 10.0, 100.0};
  std::vector<double> Ts{0.1, 1.0};
  std::vector<double> mus{0.0, 0.5, 1.0};
  int K = 128;
  double beta = 0.3;
  double N = 2.0;
  bool refine = true;          ///< also run on the 2M grid
  double tolerance = 0.25;     ///< allowed (max - min)/(max + min)
};

struct ConstantSummary {
  double min = 0.0, max = 0.0, spread = 0.0;
  bool finite = true, pass = false;
  json to_json() const;
};

struct EstimateReport {
  std::vector<EstimateRow> rows;  ///< one per (λ, T, M), maximized over forcings
  std::vector<EstimateRow> detail;  ///< one per (forcing, λ, T, M)
  std::vector<double> mus;
  ConstantSummary C5, C1, C2;
  std::vector<ConstantSummary> C2_per_mu;
  double tolerance = 0.25;
  bool pass = false;
  json to_json() const;
  void write_csv(const std::string& path) const;
};

/// Sweeps λ, T and the grid (M, 2M); each constant is the max over the
/// forcing family, and stability is (max - min)/(max + min) over the sweep.
EstimateReport verify_estimates(const LevyMeasure& m, const TorusGrid& grid, const std::vector<NamedForcing>& forcings,
                                const EstimateOptions& opt);

/// cos(2π k·x / L) + offset, constant in time.
Forcing harmonic_forcing(const std::array<int, 3>& k, double L = 1.0, double offset = 0.0);
/// Σ_{j=0}^{levels} w(N^{-j})^β cos(2π N^j x_0 / L), a β-rough profile once levels
/// reaches the grid's top block. Needs integer N.
Forcing lacunary_forcing(const LevyMeasure& m, double beta, int N, int levels, double L = 1.0);

/// Forcing family for the estimate sweep: a constant, the lowest harmonic, a
/// harmonic in the top block of `grid`, the constant plus that harmonic scaled
/// so both blocks carry the same weighted sup, the lacunary profile, and the
/// lacunary profile modulated by cos(2π·10t). The constants are sup-type, so
/// each measured constant is the max over this family.
std::vector<NamedForcing> default_forcings(const LevyMeasure& m, const TorusGrid& grid, double beta, int N = 2);

struct RoughLimitReport {
  std::vector<int> levels;
  std::vector<double> differences;  ///< |u_{n_{k+1}}(T) - u_{n_k}(T)|_{1+β',∞}
  bool converged = false;           ///< differences non-increasing
  SolveResult finest;
  json to_json() const;
};

/// Solves with forcings truncate(f, n) for each level and checks that the
/// solutions at T form a Cauchy sequence in |·|_{1+β',∞}.
RoughLimitReport rough_input_limit(const LevyMeasure& m, const GridFunction& f, double lambda, double T, int K,
                                   double beta_prime, const std::vector<int>& levels, double N = 2.0);

}  // namespace lh
