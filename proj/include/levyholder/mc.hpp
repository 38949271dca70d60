#pragma once

// Monte Carlo Lévy paths: compound Poisson for jumps larger than ε, a drift
// fixed by the compensation regime, and optionally a Gaussian stand-in for the
// jumps below ε with covariance ∫_{|y|<=ε} y yᵀ dν.

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "levyholder/measures.hpp"
#include "levyholder/spectral.hpp"

namespace lh {

/// Generator for (seed, stream, block); the same triple always yields the same sequence.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t block);

class PathSampler {
 public:
  static constexpr std::size_t kBlock = 4096;  ///< paths per RNG block
  static constexpr int kKnots = 4096;

  /// gaussian_correction defaults to on for α >= 1 and off below.
  PathSampler(LevyMeasure m, double eps = 1e-3, std::uint64_t seed = 0,
              std::optional<bool> gaussian_correction = std::nullopt);

  const LevyMeasure& measure() const { return m_; }
  double eps() const { return eps_; }
  std::uint64_t seed() const { return seed_; }
  bool gaussian_correction() const { return gaussian_; }
  /// δ(ε), the rate of jumps with |y| > ε.
  double intensity() const { return intensity_; }
  /// Drift per unit time.
  const Point& drift() const { return drift_; }
  /// ∫_{|y|<=ε} y yᵀ dν, row-major d×d.
  const std::array<double, 9>& small_jump_covariance() const { return cov_; }

  /// Radius r with δ_i(r)/δ_i(ε) = u for the radial table of node i (log-log interpolation).
  double radius_quantile(std::size_t node, double u) const;

  /// One jump with |y| > ε.
  Point sample_jump(std::mt19937_64& rng) const;
  /// One endpoint Z_t.
  Point sample_endpoint(double t, std::mt19937_64& rng) const;

  /// n endpoints Z_t; path p comes from block p / kBlock of stream `stream`.
  std::vector<Point> sample(double t, std::size_t n, std::uint64_t stream = 0) const;
  /// n jump radii |y| (jumps with |y| > ε only).
  std::vector<double> sample_jump_radii(std::size_t n, std::uint64_t stream = 0) const;

 private:
  LevyMeasure m_;
  double eps_;
  std::uint64_t seed_;
  bool gaussian_;
  double intensity_ = 0.0;
  Point drift_{};
  std::array<double, 9> cov_{};
  std::array<double, 9> root_{};  ///< symmetric square root of cov_
  std::vector<std::size_t> table_of_;               ///< node -> radial table
  std::vector<std::vector<double>> log_r_, log_q_;  ///< knots: ln r, ln(δ_i(r)/δ_i(ε))
  std::vector<double> node_cdf_;                    ///< cumulative δ_i(ε)/δ(ε)
};

struct SemigroupEstimate {
  GridFunction mean;
  std::vector<double> std_error;  ///< per grid point
  std::size_t n_paths = 0;
};

/// E f(x + Z_t) by Monte Carlo with periodic wrap; f is evaluated off-grid
/// through its trigonometric interpolant.
SemigroupEstimate estimate_semigroup(const PathSampler& s, const GridFunction& f, double t, std::size_t n_paths,
                                     std::uint64_t stream = 0);

struct FracPowerMCOptions {
  double t0 = 1e-6;
  double T_cut = 20.0;
  double panel = 1.5;        ///< panel width in ln t
  std::size_t n_paths = 4096;  ///< paths per time node
  double jump_cap = 256.0;   ///< max expected jumps per path; ε grows with t to respect it
  double tail_tol = 1e-2;    ///< allowed tail bound relative to |f|_0
};

struct FracPowerMC {
  GridFunction value;
  std::vector<double> std_error;
  double tail_bound = 0.0;
  int nodes = 0;
};

/// c_κ ∫_0^∞ t^{-κ} [e^{-at} E f(x + Z_t) - f(x)] dt/t, i.e. (aI - L)^κ f, for κ ∈ (0,1).
/// Below t0 the integrand is replaced by t(Lf - af); beyond T_cut, E f(x + Z_t) by the
/// mean of f, with the error bounded through |S_{T_cut} f - f̄|_0.
FracPowerMC frac_power_mc(const PathSampler& s, const GridFunction& f, double kappa, double a,
                          const FracPowerMCOptions& opt = {});

struct KSResult {
  double D = 0.0;
  double p_value = 0.0;
};

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value.
KSResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
  std::vector<double> edges;
  std::vector<double> observed, expected;
};

/// Goodness of fit of sampled jump radii against δ(r)/δ(ε) on bins [edges_k, edges_{k+1}).
ChiSquareResult jump_tail_chi_square(const PathSampler& s, std::size_t n, const std::vector<double>& edges,
                                     std::uint64_t stream = 0);

}  // namespace lh
