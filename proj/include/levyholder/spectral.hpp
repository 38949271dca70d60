#pragma once

// Periodic grids on [0, L)^d and the Lévy symbol on their frequency lattice.
//
// Fourier convention: f(x) = Σ_k f̂(k) e^{i2π k·x/L}, f̂(k) = M^{-d} Σ_x f(x) e^{-i2π k·x/L},
// so ξ = k/L and a multiplier m(ξ) acts as f ↦ Σ m(ξ) f̂ e^{i2πξ·x}. The symbol is
//   ψ(ξ) = ∫ [e^{i2πξ·y} - 1 - i2π χ_α(y) ξ·y] ν(dy).
// Frequency data is stored in FFT order: index n on an axis means k = n for
// n < M/2 and k = n - M otherwise.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "levyholder/measures.hpp"

namespace lh {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;

struct TorusGrid {
  int dim = 1;
  double L = 1.0;
  int M = 256;

  TorusGrid() = default;
  TorusGrid(int dim, double L, int M);

  std::size_t size() const;
  double spacing() const { return L / M; }
  double nyquist() const { return M / (2.0 * L); }
  /// Signed lattice index of FFT-order position n.
  int wave_number(int n) const { return n < M / 2 ? n : n - M; }
  std::array<int, 3> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::array<int, 3>& idx) const;
  /// Physical position of a grid point.
  Point x(std::size_t flat) const;
  /// Frequency ξ = k/L of a frequency-space entry.
  Point xi(std::size_t flat) const;
  double xi_norm(std::size_t flat) const;
  bool operator==(const TorusGrid& o) const { return dim == o.dim && L == o.L && M == o.M; }
  json to_json() const;
};

enum class Space { physical, frequency };

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(TorusGrid grid, Space space);
  GridFunction(TorusGrid grid, std::vector<cplx> values, Space space);

  /// Samples f at every grid point.
  static GridFunction sample(const TorusGrid& grid, const std::function<cplx(const Point&)>& f);
  /// e^{i2π k·x/L} for an integer wave vector k.
  static GridFunction harmonic(const TorusGrid& grid, const std::array<int, 3>& k);

  const TorusGrid& grid() const { return grid_; }
  Space space() const { return space_; }
  std::vector<cplx>& values() { return values_; }
  const std::vector<cplx>& values() const { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  cplx operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  GridFunction to_frequency() const;
  GridFunction to_physical() const;

  /// max |u| over grid points (physical space only).
  double sup_norm() const;
  /// Σ |u| h^d (physical space only).
  double l1_norm() const;
  /// Largest |Im u| relative to sup |u|.
  double imag_fraction() const;
  /// u(· + shift) for an integer grid shift.
  GridFunction rolled(const std::array<int, 3>& shift) const;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(cplx c);

 private:
  TorusGrid grid_;
  std::vector<cplx> values_;
  Space space_ = Space::physical;
  void require_same(const GridFunction& o) const;
};

GridFunction operator+(GridFunction a, const GridFunction& b);
GridFunction operator-(GridFunction a, const GridFunction& b);
GridFunction operator*(cplx c, GridFunction a);

/// Unnormalized-inverse / normalized-forward FFT pair over the grid layout.
void fft_forward(const TorusGrid& grid, const cplx* in, cplx* out);
void fft_inverse(const TorusGrid& grid, const cplx* in, cplx* out);

/// Radial pieces of the symbol for one ray class: ψ = Σ_i λ_i [-C(|k_i|) + i sgn(k_i) S(|k_i|)].
class SymbolEvaluator {
 public:
  /// r0 is the inner radius below which the Taylor surrogate replaces the integrand.
  SymbolEvaluator(const LevyMeasure& m, double r0);

  const LevyMeasure& measure() const { return m_; }
  double r0() const { return r0_; }

  /// ψ at a single frequency (direct evaluation, no tables).
  cplx operator()(const Point& xi) const;
  /// ∫ 2 sin²(kr/2) ρ_c(r) dr for ray class c (per unit angular weight), k > 0.
  double real_part(std::size_t cls, double k) const;
  /// ∫ (sin kr - kr χ_α(r)) ρ_c(r) dr for ray class c, k > 0.
  double imag_part(std::size_t cls, double k) const;

  std::size_t classes() const { return class_rep_.size(); }
  std::size_t class_of(std::size_t node) const { return node_class_[node]; }

 private:
  const LevyMeasure& m_;
  double r0_;
  std::vector<std::size_t> node_class_;  ///< nodes sharing a modulation floor share radial data
  std::vector<std::size_t> class_rep_;   ///< representative node of each class
  std::vector<double> m1_, m2_, m3_, m4_;  ///< inner moments on [0, r0] per class

  double density(std::size_t cls, double r) const;
  double oscillatory(std::size_t cls, double k, double start, bool cosine, double& end) const;
};

struct SymbolTable {
  TorusGrid grid;
  std::vector<cplx> psi;
  std::uint64_t fingerprint = 0;
  bool tabulated = false;  ///< radial parts interpolated from a log-k table
};

/// ψ on the grid's frequency lattice; cached by (measure fingerprint, grid).
const SymbolTable& compute_symbol(const LevyMeasure& m, const TorusGrid& grid);
void clear_symbol_cache();

/// F^{-1}[mult(n) f̂(n)], with n the flat frequency index.
GridFunction apply_multiplier(const GridFunction& f, const std::function<cplx(std::size_t)>& mult);
GridFunction apply_multiplier(const GridFunction& f, const std::vector<cplx>& mult);

/// E f(· + Z_t) realized as the multiplier e^{tψ}.
GridFunction semigroup(const GridFunction& f, const LevyMeasure& m, double t);
GridFunction semigroup(const GridFunction& f, const SymbolTable& table, double t);

/// Applies L^ν (the multiplier ψ).
GridFunction apply_generator(const GridFunction& f, const LevyMeasure& m);

void write_csv(const GridFunction& f, const std::string& path);
/// Little-endian f64 (re, im) pairs plus `path + ".json"` sidecar.
void write_binary(const GridFunction& f, const std::string& path);
GridFunction read_binary(const std::string& path);

}  // namespace lh
