#pragma once

// Littlewood–Paley blocks and the two w-scaled smoothness norms:
//   |u|_{β,∞} = max_j w(N^{-j})^{-β} |u * φ_j|_0
//   |u|_β     = |u|_0 + max_{h,x} |u(x+h) - u(x)| / w(|h|)^β

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "levyholder/measures.hpp"
#include "levyholder/spectral.hpp"

namespace lh {

/// Smooth step: 0 for x <= 0, 1 for x >= 1, built from h(x) = e^{-1/x}.
double smooth_step(double x);

class Partition {
 public:
  Partition(double N, const TorusGrid& grid);

  double N() const { return N_; }
  int j_max() const { return j_max_; }
  const TorusGrid& grid() const { return grid_; }

  /// χ(s): 1 for s <= 1, 0 for s >= N.
  double chi(double s) const;
  /// φ̂_j at |ξ|. The top block j_max also absorbs every mode beyond its
  /// outer edge, so Σ_j φ̂_j = 1 on the whole lattice.
  double block_symbol(int j, double xi_norm) const;
  /// Closed support annulus of φ̂_j.
  std::pair<double, double> annulus(int j) const;

 private:
  double N_;
  TorusGrid grid_;
  int j_max_;
};

struct LPDecomposition {
  std::vector<GridFunction> blocks;
  std::vector<double> weights;  ///< w(N^{-j})^{-β}
  std::vector<double> block_sup;
  int j_max = 0;
  GridFunction sum() const;
};

LPDecomposition decompose(const GridFunction& u, const Partition& p, const LevyMeasure& m, double beta);

double besov_norm(const GridFunction& u, const LevyMeasure& m, double beta, const Partition& p);

/// Lattice shifts with |h| <= L/4: every shift along each axis, plus the two
/// diagonals in d = 2 and the four body diagonals in d = 3.
std::vector<std::array<int, 3>> default_shifts(const TorusGrid& grid);

double holder_norm(const GridFunction& u, const LevyMeasure& m, double beta,
                   const std::vector<std::array<int, 3>>& shifts);
double holder_norm(const GridFunction& u, const LevyMeasure& m, double beta);

/// Σ_{j<=n} u * φ_j = F^{-1}[χ(N^{-n}|ξ|) û].
GridFunction truncate(const GridFunction& u, const Partition& p, int n);

/// Smallest C with |u|_{β',∞} <= ε |u|_{β,∞} + C |u|_0.
double interpolation_constant(const GridFunction& u, const LevyMeasure& m, double beta,
                              double beta_prime, double eps, const Partition& p);

struct CorpusEntry {
  std::string id;
  std::function<cplx(const Point&)> f;
};

/// Twelve real test functions on the unit torus, band-limited to |k| <= 40
/// (the Gaussian bumps up to a 1e-12 tail):
/// a constant, four trigonometric polynomials, three periodized Gaussian
/// bumps, three seeded random band-limited sums and a lacunary sum.
std::vector<CorpusEntry> default_corpus(int dim);

struct EquivalenceRow {
  std::string id;
  double holder = 0.0;
  double besov = 0.0;
  double ratio = 0.0;
  double holder_fine = 0.0;
  double besov_fine = 0.0;
  double ratio_fine = 0.0;
  double drift = 0.0;  ///< |ratio(M) - ratio(2M)| / ratio(M)
};

struct EquivalenceReport {
  double beta = 0.0;
  double K = 50.0;
  double max_drift_allowed = 0.1;
  std::vector<EquivalenceRow> rows;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double max_drift = 0.0;
  bool pass = false;
  json to_json() const;
  void write_csv(const std::string& path) const;
};

/// Ratio |u|_β / |u|_{β,∞} on grids M and 2M for each corpus entry. β must lie
/// in (0, 1/q1).
EquivalenceReport equivalence_report(const std::vector<CorpusEntry>& corpus, const LevyMeasure& m,
                                     double beta, double q1, const TorusGrid& grid, double N = 2.0,
                                     double K = 50.0);

}  // namespace lh
