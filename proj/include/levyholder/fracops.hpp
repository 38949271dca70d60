#pragma once

// Powers of aI - L^ν and of L^ν as Fourier multipliers:
//   (aI - L^ν)^κ  ↔ (a - ψ)^κ
//   L^{ν;κ}       ↔ -(-ψ)^κ for κ ∈ (0,1), ψ^k for integer k,
//                   L^{[κ]} L^{ν;κ-[κ]} otherwise.
// Fractional exponents need a symmetric measure (ψ real, a - ψ >= a >= 0).

#include <string>
#include <vector>

#include "levyholder/lpnorms.hpp"
#include "levyholder/measures.hpp"
#include "levyholder/spectral.hpp"

namespace lh {

/// (∫_0^∞ (e^{-t} - 1) t^{-κ} dt/t)^{-1} = 1/Γ(-κ), κ ∈ (0,1). Negative.
double c_kappa(double kappa);
/// (∫_0^∞ t^κ e^{-t} dt/t)^{-1} = 1/Γ(κ), κ > 0.
double c_kappa_prime(double kappa);

/// (aI - L^ν)^κ f for any real κ. κ < 0 needs a > 0, or a = 0 with no
/// energy where ψ vanishes (DomainError otherwise).
GridFunction frac_power(const GridFunction& f, const LevyMeasure& m, double a, double kappa);
/// (aI - L^ν)^{-κ} f, a > 0, κ > 0.
GridFunction frac_inverse(const GridFunction& f, const LevyMeasure& m, double a, double kappa);
/// L^{ν;κ} f, κ >= 0.
GridFunction generator_power(const GridFunction& f, const LevyMeasure& m, double kappa);

/// Time-integral forms c_κ ∫ t^{-κ}[e^{-at} P_t f - f] dt/t (κ ∈ (0,1)) and
/// c'_κ ∫ t^κ e^{-at} P_t f dt/t (κ > 0, a > 0), with P_t applied mode by mode
/// and composite Gauss–Legendre in ln t. The small-t end uses the generator,
/// the large-t end the decayed remainder. Cross-check only.
GridFunction frac_power_time_quadrature(const GridFunction& f, const LevyMeasure& m, double a, double kappa);
GridFunction frac_inverse_time_quadrature(const GridFunction& f, const LevyMeasure& m, double a, double kappa);

struct FracNormRow {
  std::string id;
  double norm_a = 0.0;  ///< |u|_0 + |L^{ν;κ}u|_{β,∞}
  double norm_b = 0.0;  ///< |(I - L^ν)^κ u|_{β,∞}
  double norm_c = 0.0;  ///< |u|_{β+κ,∞}
  double ratio_ab = 0.0;
  double ratio_ac = 0.0;
  double lemma_c = 0.0;  ///< |L^{ν;κ}u|_{β,∞} / |u|_{β+κ,∞}
};

struct FracNormReport {
  double beta = 0.0, kappa = 0.0;
  std::vector<FracNormRow> rows, rows_fine;
  /// Largest max/min of the three norms of one element, over the corpus and both grids.
  double spread = 0.0;
  double max_spread_allowed = 10.0;
  /// Relative change of the largest |L^{ν;κ}u|_{β,∞}/|u|_{β+κ,∞} from M to 2M.
  double lemma_drift = 0.0;
  bool pass = false;
  json to_json() const;
  void write_csv(const std::string& path) const;
};

FracNormReport equiv_frac_norms(const std::vector<CorpusEntry>& corpus, const LevyMeasure& m, double beta,
                                double kappa, const TorusGrid& grid, double N = 2.0);

struct DecayRow {
  double R = 0.0;
  double C = 0.0, c = 0.0, residual = 0.0;                  ///< ∫|P_t g| ≈ C e^{-ct}
  double C_gen = 0.0, c_gen = 0.0, residual_gen = 0.0;      ///< ∫|P_t L g|
  std::vector<double> l1, l1_gen;
};

struct DecayReport {
  std::vector<double> t_grid;
  std::vector<DecayRow> rows;
  double min_rate = 0.0;
  /// (max - min)/min of the fitted rates over R, worse of g and L g.
  double rate_spread = 0.0;
  bool pass = false;  ///< min_rate > 0
  std::vector<std::string> warnings;
  json to_json() const;
};

/// g with ĝ a smooth radial bump on |ξ| ∈ [lo, hi], lo > 0.
GridFunction annulus_bump(const TorusGrid& grid, double lo, double hi);

/// L¹ decay of P_t g and P_t L g under ν̃_R for each R, with log-linear fits.
DecayReport decay_test(const LevyMeasure& m, const std::vector<double>& R_grid, const std::vector<double>& t_grid,
                       const TorusGrid& grid, double lo = 2.0, double hi = 8.0);

}  // namespace lh
