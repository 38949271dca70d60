#pragma once

// Lévy measures in radial-angular form.
//
// A measure is a finite sum of ray measures: node i carries a unit direction
// w_i, an angular weight λ_i and the radial density λ_i a_i(r) ρ(r), where ρ
// comes from a RadialProfile and a_i is an optional density modulation with
// values in [floor_i, 1]. The tail is δ(r) = ν(|y| > r) and w(r) = 1/δ(r).
//
// A measure also carries a zoom (scale s, mass c) so that ν̃_R = w(R) ν(R dy)
// is represented exactly: density(r) = c s ρ_base(s r), tail(r) = c δ_base(s r).

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lh {

using json = nlohmann::json;

/// Drift-compensation regime of the generator: none for α < 1, the unit ball
/// for α = 1, everything for α ∈ (1, 2).
enum class Compensation { none, unit_ball, full };

Compensation compensation_for(double alpha);

class RadialProfile {
 public:
  enum class Kind { stable_power, phi_family, tabulated };

  /// ρ(r) = scale r^{-1-α} per unit angular mass.
  static RadialProfile stable_power(double alpha, double scale = 1.0);

  /// ρ(r) = φ(r^{-2}) / r with φ one of five Bernstein-type families:
  ///   1: Σ u^{a_i}                params = {a_1, ..., a_n}, a_i ∈ (0,1)
  ///   2: (u + u^a)^b              params = {a, b}
  ///   3: u^a ln(1+u)^b            params = {a, b}, b ∈ (0, 1-a)
  ///   4: (u + m^{1/a})^a - m      params = {a, m}
  ///   5: ln(cosh √u)^a            params = {a}
  static RadialProfile phi_family(int variant, std::vector<double> params);

  /// Tail per unit angular mass given on knots; interpolated monotonically
  /// in log-log coordinates and extrapolated linearly there.
  static RadialProfile tabulated(std::vector<double> radii, std::vector<double> tails,
                                 double alpha);

  Kind kind() const { return kind_; }
  int variant() const { return variant_; }
  const std::vector<double>& params() const { return params_; }
  const std::vector<double>& table_radii() const { return radii_; }
  const std::vector<double>& table_tails() const { return tails_; }

  /// Order α implied by the profile's small-radius behaviour.
  double order() const { return order_; }

  double unit_tail(double r) const;
  double unit_density(double r) const;
  double phi(double u) const;

  /// Quadrature window in base radial coordinates.
  double r_min = 1e-8;
  double r_max = 1e4;

 private:
  Kind kind_ = Kind::stable_power;
  int variant_ = 0;
  std::vector<double> params_;
  double order_ = 1.0;
  std::vector<double> radii_;
  std::vector<double> tails_;
  struct LogLogSpline;
  std::shared_ptr<const LogLogSpline> loglog_;
  double slope_lo_ = 0.0;
  double slope_hi_ = 0.0;

  double tabulated_log_tail(double log_r) const;
};

struct AngularNode {
  std::vector<double> direction;
  double weight = 1.0;
};

/// a_i(r) = floor_i + (1 - floor_i) (1 + sin(omega ln r)) / 2.
struct DensityModulation {
  std::vector<double> floors;
  double omega = 1.0;
  double value(std::size_t node, double r) const;
};

class LevyMeasure {
 public:
  LevyMeasure(RadialProfile radial, std::vector<AngularNode> nodes, int dim,
              std::optional<double> alpha = std::nullopt,
              std::optional<DensityModulation> modulation = std::nullopt);

  /// Isotropic α-stable preset, ν(dy) = |y|^{-d-α} dy in d = 1 (uniform nodes otherwise).
  static LevyMeasure stable(int dim, double alpha, double scale = 1.0);
  static LevyMeasure from_json(const json& config);
  json to_json() const;

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  Compensation compensation() const { return compensation_for(alpha_); }
  bool symmetric() const { return symmetric_; }
  bool modulated() const { return modulation_.has_value(); }
  const RadialProfile& radial() const { return radial_; }
  std::span<const AngularNode> nodes() const { return nodes_; }
  const std::optional<DensityModulation>& modulation() const { return modulation_; }
  double zoom() const { return zoom_; }
  double mass() const { return mass_; }
  /// Σ λ_i.
  double total_weight() const { return total_weight_; }
  /// Lower bound of a_i (1 when unmodulated).
  double node_floor(std::size_t i) const;

  /// δ(r) = ν(|y| > r).
  double tail(double r) const;
  /// w(r) = 1/δ(r).
  double w(double r) const;
  double node_tail(std::size_t i, double r) const;
  double node_density(std::size_t i, double r) const;
  /// Local power exponent γ of the density near r, ρ ~ r^{-1-γ} (base profile).
  double density_exponent(double r) const;

  /// ∫_{a < |y| <= b} |y|^p over the ray of node i; b may be +infinity.
  double node_moment(std::size_t i, double p, double a, double b) const;
  double moment(double p, double a, double b) const;

  /// ν̃_R(dy) = w(R) ν(R dy).
  LevyMeasure scaled(double R) const;
  /// c ν.
  LevyMeasure with_mass(double c) const;

  /// Stable hash of the configuration and zoom state.
  std::uint64_t fingerprint() const;

  /// Inner radius below which the quadrature window ends, in this measure's coordinates.
  double window_lo() const { return radial_.r_min / zoom_; }
  double window_hi() const { return radial_.r_max / zoom_; }

 private:
  RadialProfile radial_;
  std::vector<AngularNode> nodes_;
  int dim_;
  double alpha_;
  std::optional<DensityModulation> modulation_;
  bool symmetric_ = false;
  double total_weight_ = 0.0;
  double zoom_ = 1.0;
  double mass_ = 1.0;

  double base_node_density(std::size_t i, double x) const;
  double base_node_tail(std::size_t i, double x) const;
  double base_node_moment(std::size_t i, double p, double xa, double xb) const;
  double powerlaw_piece(std::size_t i, double p, double anchor, double lo, double hi) const;
};

/// Uniform angular quadrature preset: {±1} in d = 1, `count` equally spaced
/// angles in d = 2, an antipodally closed Fibonacci set in d = 3. Weights sum
/// to the surface area of the unit sphere.
std::vector<AngularNode> uniform_nodes(int dim, int count = 0);

/// Unit directions for sampling the sphere in directional tests.
std::vector<std::vector<double>> direction_grid(int dim, int count);

struct ScaledMeasure {
  LevyMeasure measure;
  double R;
};

ScaledMeasure scale_measure(const LevyMeasure& m, double R);

enum class MomentKind { m1_cap, m2_cap, m2_m1 };

/// Moment matched to the α-regime: m1_cap for α < 1, m2_cap for α = 1, m2_m1 otherwise.
MomentKind regime_moment(double alpha);

/// ∫(|y|∧1), ∫(|y|²∧1) or ∫(|y|²∧|y|) against ν̃_R.
double scaled_moment(const ScaledMeasure& s, MomentKind kind);

/// ∫_{|y|<=1} |y|² dν.
double truncated_second_moment(const LevyMeasure& m);

/// ∫_{|y|<=1} |ξ̂·y|² dν for a unit vector ξ̂.
double directional_second_moment(const LevyMeasure& m, std::span<const double> unit);

struct ConditionReport {
  double inf_value = 0.0;
  double argmin_R = 0.0;
  std::vector<double> argmin_direction;
  double threshold = 1e-3;
  bool pass = false;
};

/// Infimum over R_grid × directions of ∫_{|y|<=1} |ξ̂·y|² dν̃_R.
ConditionReport check_condition_B(const LevyMeasure& m, std::span<const double> R_grid,
                                  const std::vector<std::vector<double>>& directions,
                                  double threshold = 1e-3);

/// inf over directions of Σ_i λ_i floor_i (ξ̂·w_i)² / Σ_i λ_i: a lower bound for
/// the normalized angular directional moment at every radius.
double angular_nondegeneracy(const LevyMeasure& m,
                             const std::vector<std::vector<double>>& directions);

struct ConditionCReport {
  double integral = 0.0;
  double growth_exponent = 0.0;  ///< local exponent of w(t)^{1/q1} at the truncation radius
  bool converged = false;
};

/// ∫_1^∞ w(t)^{1/q1} t^{-N0} dt, with a power-law tail beyond the quadrature window.
ConditionCReport check_condition_C(const LevyMeasure& m, double q1, double N0);

/// The index regime table: 0<p≤q<1 for α<1, 1≤p≤q<2 for α=1, 1<p≤q<2 for α>1.
bool condition_A_holds(double alpha, double p1, double q1, double tol = 0.0);

}  // namespace lh
