#include "levyholder/measures.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

// Boost 1.74's pchip calls isnan unqualified.
namespace boost::math::interpolators {
using std::isnan;
}
#include <boost/math/interpolators/pchip.hpp>

#include "levyholder/error.hpp"
#include "levyholder/quadrature.hpp"

namespace lh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_one(double alpha) { return std::abs(alpha - 1.0) < 1e-12; }

// ln cosh x without overflow for large x or cancellation for small x.
double log_cosh(double x) {
  x = std::abs(x);
  if (x < 1.0) {
    const double s = std::sinh(0.5 * x);
    return std::log1p(2.0 * s * s);
  }
  return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
}

void require_open_unit(double v, const char* what) {
  if (!(v > 0.0 && v < 1.0)) throw UsageError(std::string(what) + " must lie in (0,1)");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

Compensation compensation_for(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw UsageError("alpha must lie in (0,2)");
  if (is_one(alpha)) return Compensation::unit_ball;
  return alpha < 1.0 ? Compensation::none : Compensation::full;
}

// ---------------------------------------------------------------------------
// RadialProfile

struct RadialProfile::LogLogSpline {
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

RadialProfile RadialProfile::stable_power(double alpha, double scale) {
  compensation_for(alpha);
  if (!(scale > 0.0)) throw UsageError("stable scale must be positive");
  RadialProfile p;
  p.kind_ = Kind::stable_power;
  p.params_ = {scale};
  p.order_ = alpha;
  return p;
}

RadialProfile RadialProfile::phi_family(int variant, std::vector<double> params) {
  RadialProfile p;
  p.kind_ = Kind::phi_family;
  p.variant_ = variant;
  switch (variant) {
    case 1: {
      if (params.empty()) throw UsageError("phi1 needs at least one exponent");
      for (double a : params) require_open_unit(a, "phi1 exponent");
      p.order_ = 2.0 * *std::max_element(params.begin(), params.end());
      break;
    }
    case 2:
      if (params.size() != 2) throw UsageError("phi2 needs {a, b}");
      require_open_unit(params[0], "phi2 a");
      require_open_unit(params[1], "phi2 b");
      p.order_ = 2.0 * params[1];
      break;
    case 3:
      if (params.size() != 2) throw UsageError("phi3 needs {a, b}");
      require_open_unit(params[0], "phi3 a");
      if (!(params[1] > 0.0 && params[1] < 1.0 - params[0]))
        throw UsageError("phi3 b must lie in (0, 1-a)");
      p.order_ = 2.0 * params[0];
      break;
    case 4:
      if (params.size() != 2) throw UsageError("phi4 needs {a, m}");
      require_open_unit(params[0], "phi4 a");
      if (!(params[1] > 0.0)) throw UsageError("phi4 m must be positive");
      p.order_ = 2.0 * params[0];
      break;
    case 5:
      if (params.size() != 1) throw UsageError("phi5 needs {a}");
      if (!(params[0] > 0.0 && params[0] <= 1.0)) throw UsageError("phi5 a must lie in (0,1]");
      p.order_ = params[0];
      break;
    default:
      throw UsageError("phi variant must be 1..5");
  }
  p.params_ = std::move(params);
  return p;
}

RadialProfile RadialProfile::tabulated(std::vector<double> radii, std::vector<double> tails,
                                       double alpha) {
  compensation_for(alpha);
  if (radii.size() != tails.size() || radii.size() < 4)
    throw UsageError("tabulated profile needs at least 4 matching knots");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || !(tails[k] > 0.0))
      throw UsageError("tabulated radii and tails must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw UsageError("tabulated radii must increase");
    if (k > 0 && !(tails[k] < tails[k - 1]))
      throw UsageError("tabulated tails must be strictly decreasing");
  }
  RadialProfile p;
  p.kind_ = Kind::tabulated;
  p.order_ = alpha;
  p.radii_ = radii;
  p.tails_ = tails;
  std::vector<double> lx(radii.size()), ly(radii.size());
  for (std::size_t k = 0; k < radii.size(); ++k) {
    lx[k] = std::log(radii[k]);
    ly[k] = std::log(tails[k]);
  }
  const std::size_t n = lx.size();
  p.slope_lo_ = (ly[1] - ly[0]) / (lx[1] - lx[0]);
  p.slope_hi_ = (ly[n - 1] - ly[n - 2]) / (lx[n - 1] - lx[n - 2]);
  p.loglog_ = std::make_shared<const LogLogSpline>(
      LogLogSpline{boost::math::interpolators::pchip<std::vector<double>>(std::move(lx), std::move(ly))});
  return p;
}

double RadialProfile::tabulated_log_tail(double log_r) const {
  const double x0 = std::log(radii_.front());
  const double x1 = std::log(radii_.back());
  if (log_r < x0) return std::log(tails_.front()) + slope_lo_ * (log_r - x0);
  if (log_r > x1) return std::log(tails_.back()) + slope_hi_ * (log_r - x1);
  return loglog_->spline(log_r);
}

double RadialProfile::phi(double u) const {
  const auto& q = params_;
  switch (variant_) {
    case 1: {
      double s = 0.0;
      for (double a : q) s += std::pow(u, a);
      return s;
    }
    case 2:
      return std::pow(u + std::pow(u, q[0]), q[1]);
    case 3:
      return std::pow(u, q[0]) * std::pow(std::log1p(u), q[1]);
    case 4: {
      const double a = q[0], m = q[1];
      const double c = std::pow(m, 1.0 / a);
      return m * std::expm1(a * std::log1p(u / c));
    }
    case 5:
      return std::pow(log_cosh(std::sqrt(u)), q[0]);
    default:
      throw UsageError("phi is only defined for phi-family profiles");
  }
}

double RadialProfile::unit_tail(double r) const {
  if (!(r > 0.0)) throw DomainError("tail: radius must be positive");
  switch (kind_) {
    case Kind::stable_power:
      return params_[0] * std::pow(r, -order_) / order_;
    case Kind::tabulated:
      return std::exp(tabulated_log_tail(std::log(r)));
    case Kind::phi_family: {
      // Below this radius u = r^{-2} overflows; continue with the local power law.
      constexpr double kFloor = 1e-150;
      if (r < kFloor) {
        const double t0 = unit_tail(kFloor);
        const double slope = (std::log(unit_tail(kFloor * 1.01)) - std::log(t0)) / std::log(1.01);
        return t0 * std::pow(r / kFloor, slope);
      }
      const double U = 1.0 / (r * r);
      if (variant_ == 1) {
        double s = 0.0;
        for (double a : params_) s += std::pow(U, a) / a;
        return 0.5 * s;
      }
      // ½∫_0^U φ(u)/u du with u = U e^{-v}; split where u crosses 1.
      auto g = [&](double v) { return phi(U * std::exp(-v)); };
      const double v0 = std::max(0.0, std::log(U));
      double head = 0.0;
      if (v0 > 0.0) {
        const int panels = std::max(1, static_cast<int>(std::ceil(v0 / 4.0)));
        for (int k = 0; k < panels; ++k)
          head += quad::integrate(g, v0 * k / panels, v0 * (k + 1) / panels);
      }
      const double rest = quad::integrate(g, v0, kInf);
      return 0.5 * (head + rest);
    }
  }
  return 0.0;
}

double RadialProfile::unit_density(double r) const {
  if (!(r > 0.0)) throw DomainError("density: radius must be positive");
  switch (kind_) {
    case Kind::stable_power:
      return params_[0] * std::pow(r, -1.0 - order_);
    case Kind::phi_family:
      if (r < 1e-150) {
        const double slope = std::log(unit_density(1.01e-150) / unit_density(1e-150)) / std::log(1.01);
        return unit_density(1e-150) * std::pow(r / 1e-150, slope);
      }
      return phi(1.0 / (r * r)) / r;
    case Kind::tabulated: {
      const double lr = std::log(r);
      double slope;
      const double x0 = std::log(radii_.front());
      const double x1 = std::log(radii_.back());
      if (lr < x0) slope = slope_lo_;
      else if (lr > x1) slope = slope_hi_;
      else slope = loglog_->spline.prime(lr);
      return -std::exp(tabulated_log_tail(lr)) * slope / r;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// DensityModulation

double DensityModulation::value(std::size_t node, double r) const {
  const double f = floors[node];
  return f + (1.0 - f) * 0.5 * (1.0 + std::sin(omega * std::log(r)));
}

// ---------------------------------------------------------------------------
// Angular presets

std::vector<AngularNode> uniform_nodes(int dim, int count) {
  std::vector<AngularNode> nodes;
  switch (dim) {
    case 1:
      nodes.push_back({{1.0}, 1.0});
      nodes.push_back({{-1.0}, 1.0});
      break;
    case 2: {
      const int n = count > 0 ? count : 32;
      if (n % 2 != 0) throw UsageError("2-d uniform node count must be even");
      for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        nodes.push_back({{std::cos(t), std::sin(t)}, 2.0 * std::numbers::pi / n});
      }
      break;
    }
    case 3: {
      const int n = count > 0 ? count : 64;
      if (n % 2 != 0) throw UsageError("3-d uniform node count must be even");
      const int half = n / 2;
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      const double wt = 4.0 * std::numbers::pi / n;
      for (int k = 0; k < half; ++k) {
        // Upper hemisphere Fibonacci points, closed under w -> -w below.
        const double z = 1.0 - (k + 0.5) / half;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double t = golden * k;
        std::vector<double> w{rho * std::cos(t), rho * std::sin(t), z};
        nodes.push_back({w, wt});
        nodes.push_back({{-w[0], -w[1], -w[2]}, wt});
      }
      break;
    }
    default:
      throw UsageError("angular presets exist for d = 1, 2, 3");
  }
  return nodes;
}

std::vector<std::vector<double>> direction_grid(int dim, int count) {
  std::vector<std::vector<double>> dirs;
  if (count <= 0) throw UsageError("direction grid needs a positive count");
  switch (dim) {
    case 1:
      dirs = {{1.0}, {-1.0}};
      break;
    case 2:
      for (int k = 0; k < count; ++k) {
        const double t = std::numbers::pi * k / count;
        dirs.push_back({std::cos(t), std::sin(t)});
      }
      break;
    case 3: {
      const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
      for (int k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * (k + 0.5) / count;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        dirs.push_back({rho * std::cos(golden * k), rho * std::sin(golden * k), z});
      }
      break;
    }
    default:
      throw UsageError("direction grids exist for d = 1, 2, 3");
  }
  return dirs;
}

// ---------------------------------------------------------------------------
// LevyMeasure

LevyMeasure::LevyMeasure(RadialProfile radial, std::vector<AngularNode> nodes, int dim,
                         std::optional<double> alpha, std::optional<DensityModulation> modulation)
    : radial_(std::move(radial)), nodes_(std::move(nodes)), dim_(dim),
      modulation_(std::move(modulation)) {
  if (dim_ < 1 || dim_ > 3) throw UsageError("dimension must be 1, 2 or 3");
  if (nodes_.empty()) throw UsageError("angular measure needs at least one node");
  if (!(radial_.r_min > 0.0 && radial_.r_max > radial_.r_min))
    throw UsageError("need 0 < r_min < r_max");

  alpha_ = radial_.order();
  if (alpha) {
    if (std::abs(*alpha - alpha_) > 1e-9)
      throw UsageError("alpha disagrees with the order of the radial profile");
  }
  if (is_one(alpha_)) alpha_ = 1.0;
  compensation_for(alpha_);

  for (auto& n : nodes_) {
    if (static_cast<int>(n.direction.size()) != dim_)
      throw UsageError("angular node direction has the wrong dimension");
    if (!(n.weight > 0.0)) throw UsageError("angular weights must be positive");
    const double norm = std::sqrt(dot(n.direction, n.direction));
    if (!(norm > 0.0)) throw UsageError("angular direction must be nonzero");
    for (double& c : n.direction) c /= norm;
    total_weight_ += n.weight;
  }
  if (modulation_) {
    auto& fl = modulation_->floors;
    if (fl.size() == 1 && nodes_.size() > 1) fl.assign(nodes_.size(), fl[0]);
    if (fl.size() != nodes_.size()) throw UsageError("density_bound floors must match node count");
    for (double f : fl)
      if (!(f > 0.0 && f <= 1.0)) throw UsageError("density_bound floors must lie in (0,1]");
  }

  symmetric_ = true;
  for (std::size_t i = 0; i < nodes_.size() && symmetric_; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < nodes_.size() && !found; ++j) {
      double gap = 0.0;
      for (int k = 0; k < dim_; ++k)
        gap = std::max(gap, std::abs(nodes_[i].direction[k] + nodes_[j].direction[k]));
      found = gap < 1e-9 && std::abs(nodes_[i].weight - nodes_[j].weight) <= 1e-12 * nodes_[i].weight &&
              node_floor(i) == node_floor(j);
    }
    symmetric_ = found;
  }
  if (alpha_ == 1.0 && !symmetric_)
    throw UsageError("alpha = 1 requires an angular measure closed under w -> -w");

  if (compensation() == Compensation::full) {
    const double gamma = -1.0 - quad::log_slope([&](double r) { return radial_.unit_density(r); },
                                                radial_.r_max);
    if (!(gamma > 1.0 + 1e-6))
      throw UsageError("alpha in (1,2) needs a finite first moment of large jumps");
  }
}

LevyMeasure LevyMeasure::stable(int dim, double alpha, double scale) {
  return LevyMeasure(RadialProfile::stable_power(alpha, scale), uniform_nodes(dim), dim);
}

double LevyMeasure::node_floor(std::size_t i) const {
  return modulation_ ? modulation_->floors[i] : 1.0;
}

double LevyMeasure::base_node_density(std::size_t i, double x) const {
  const double rho = radial_.unit_density(x);
  return modulation_ ? modulation_->value(i, x) * rho : rho;
}

double LevyMeasure::powerlaw_piece(std::size_t i, double p, double anchor, double lo,
                                   double hi) const {
  // ∫_lo^hi s^p a_i(s) ρ(s) ds with ρ continued as a pure power from `anchor`.
  if (!(hi > lo)) return 0.0;
  const double gamma =
      -1.0 - quad::log_slope([&](double r) { return radial_.unit_density(r); }, anchor);
  const double e = p - gamma;
  const double K = radial_.unit_density(anchor) * std::pow(anchor, 1.0 + p);
  const double f = node_floor(i);
  const double c0 = f + 0.5 * (1.0 - f);
  const double c1 = 0.5 * (1.0 - f);
  const double om = modulation_ ? modulation_->omega : 1.0;

  auto F = [&](double s) -> double {
    if (s == 0.0) {
      if (e <= 0.0) throw NumericError("moment diverges at the origin");
      return 0.0;
    }
    if (std::isinf(s)) {
      if (e >= 0.0) throw NumericError("moment diverges at infinity");
      return 0.0;
    }
    const double t = s / anchor;
    const double th = om * std::log(s);
    const double base = std::abs(e) < 1e-14 ? std::log(t) : std::pow(t, e) / e;
    const double te = std::pow(t, e);
    return c0 * base + c1 * te * (e * std::sin(th) - om * std::cos(th)) / (e * e + om * om);
  };
  return K * (F(hi) - F(lo));
}

double LevyMeasure::base_node_tail(std::size_t i, double x) const {
  if (!modulation_) return radial_.unit_tail(x);
  const double hi = std::max(radial_.r_max, 100.0 * x);
  const double body = quad::integrate_log([&](double s) { return base_node_density(i, s); }, x, hi);
  return body + powerlaw_piece(i, 0.0, hi, hi, kInf);
}

double LevyMeasure::base_node_moment(std::size_t i, double p, double xa, double xb) const {
  if (!(xb > xa)) return 0.0;
  if (!modulation_) {
    if (radial_.kind() == RadialProfile::Kind::stable_power) {
      const double e = p - alpha_;
      auto F = [&](double s) -> double {
        if (s == 0.0) {
          if (e <= 0.0) throw NumericError("moment diverges at the origin");
          return 0.0;
        }
        if (std::isinf(s)) {
          if (e >= 0.0) throw NumericError("moment diverges at infinity");
          return 0.0;
        }
        return e == 0.0 ? std::log(s) : std::pow(s, e) / e;
      };
      return radial_.params()[0] * (F(xb) - F(xa));
    }
    if (p == 0.0) {
      if (xa == 0.0) throw NumericError("mass diverges at the origin");
      return radial_.unit_tail(xa) - (std::isinf(xb) ? 0.0 : radial_.unit_tail(xb));
    }
  }
  const double lo = radial_.r_min;
  const double hi = radial_.r_max;
  double total = 0.0;
  if (xa < lo) {
    const double top = std::min(xb, lo);
    total += powerlaw_piece(i, p, top, xa, top);
  }
  const double a = std::max(xa, lo);
  const double b = std::min(xb, hi);
  if (b > a) {
    total += quad::integrate_log(
        [&](double s) { return std::pow(s, p) * base_node_density(i, s); }, a, b);
  }
  if (xb > hi) {
    const double bottom = std::max(xa, hi);
    total += powerlaw_piece(i, p, bottom, bottom, xb);
  }
  return total;
}

double LevyMeasure::tail(double r) const {
  if (!(r > 0.0)) throw DomainError("tail: radius must be positive");
  const double x = zoom_ * r;
  if (!modulation_) return mass_ * total_weight_ * radial_.unit_tail(x);
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) s += nodes_[i].weight * base_node_tail(i, x);
  return mass_ * s;
}

double LevyMeasure::w(double r) const {
  const double d = tail(r);
  if (!(d > 0.0) || !std::isfinite(1.0 / d))
    throw NumericError("w: tail underflows at r = " + std::to_string(r));
  return 1.0 / d;
}

double LevyMeasure::node_tail(std::size_t i, double r) const {
  if (!(r > 0.0)) throw DomainError("tail: radius must be positive");
  return mass_ * nodes_.at(i).weight * base_node_tail(i, zoom_ * r);
}

double LevyMeasure::node_density(std::size_t i, double r) const {
  if (!(r > 0.0)) throw DomainError("density: radius must be positive");
  return mass_ * zoom_ * nodes_.at(i).weight * base_node_density(i, zoom_ * r);
}

double LevyMeasure::density_exponent(double r) const {
  return -1.0 -
         quad::log_slope([&](double x) { return radial_.unit_density(x); }, zoom_ * r);
}

double LevyMeasure::node_moment(std::size_t i, double p, double a, double b) const {
  if (a < 0.0 || b < a) throw DomainError("moment: need 0 <= a <= b");
  const double za = zoom_ * a;
  const double zb = std::isinf(b) ? kInf : zoom_ * b;
  return mass_ * nodes_.at(i).weight * std::pow(zoom_, -p) * base_node_moment(i, p, za, zb);
}

double LevyMeasure::moment(double p, double a, double b) const {
  if (!modulation_) {
    // Identical rays: one radial integral suffices.
    return total_weight_ / nodes_[0].weight * node_moment(0, p, a, b);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) s += node_moment(i, p, a, b);
  return s;
}

LevyMeasure LevyMeasure::scaled(double R) const {
  if (!(R > 0.0)) throw DomainError("scale R must be positive");
  LevyMeasure out = *this;
  out.mass_ = mass_ * w(R);
  out.zoom_ = zoom_ * R;
  return out;
}

LevyMeasure LevyMeasure::with_mass(double c) const {
  if (!(c > 0.0)) throw DomainError("mass factor must be positive");
  LevyMeasure out = *this;
  out.mass_ *= c;
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

std::string family_name(const RadialProfile& r) {
  switch (r.kind()) {
    case RadialProfile::Kind::stable_power: return "stable";
    case RadialProfile::Kind::tabulated: return "tabulated";
    case RadialProfile::Kind::phi_family: return "phi" + std::to_string(r.variant());
  }
  return "";
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw UsageError(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

}  // namespace

LevyMeasure LevyMeasure::from_json(const json& c) {
  if (!c.is_object()) throw UsageError("measure config must be an object");
  if (!c.contains("family") || !c["family"].is_string())
    throw UsageError("measure config needs a string 'family'");
  const std::string family = c["family"].get<std::string>();
  const int dim = c.contains("dim") ? c["dim"].get<int>() : 1;
  const json params = c.value("params", json::object());
  std::optional<double> alpha;
  if (c.contains("alpha")) alpha = get_number(c, "alpha");

  std::vector<AngularNode> nodes;
  const json ang = c.value("angular", json{{"kind", "uniform"}});
  const std::string ang_kind = ang.value("kind", "uniform");
  if (ang_kind == "uniform") {
    nodes = uniform_nodes(dim, ang.value("count", 0));
  } else if (ang_kind == "nodes") {
    if (!ang.contains("nodes") || !ang["nodes"].is_array() || ang["nodes"].empty())
      throw UsageError("angular kind 'nodes' needs a nonempty 'nodes' array");
    for (const auto& n : ang["nodes"]) {
      AngularNode node;
      node.direction = n.at("direction").get<std::vector<double>>();
      node.weight = n.value("weight", 1.0);
      nodes.push_back(std::move(node));
    }
  } else {
    throw UsageError("angular kind must be 'uniform' or 'nodes'");
  }

  RadialProfile radial;
  if (family == "stable") {
    if (!alpha) throw UsageError("stable family needs 'alpha'");
    radial = RadialProfile::stable_power(*alpha, params.value("scale", 1.0));
  } else if (family.size() == 4 && family.rfind("phi", 0) == 0) {
    const int variant = family[3] - '0';
    std::vector<double> q;
    switch (variant) {
      case 1:
        q = params.at("exponents").get<std::vector<double>>();
        break;
      case 2:
      case 3:
        q = {get_number(params, "a"), get_number(params, "b")};
        break;
      case 4:
        q = {get_number(params, "a"), get_number(params, "m")};
        break;
      case 5:
        q = {get_number(params, "a")};
        break;
      default:
        throw UsageError("unknown family '" + family + "'");
    }
    radial = RadialProfile::phi_family(variant, q);
  } else if (family == "tabulated") {
    if (!alpha) throw UsageError("tabulated family needs 'alpha'");
    auto radii = params.at("radii").get<std::vector<double>>();
    auto tails = params.at("tails").get<std::vector<double>>();
    double total = 0.0;
    for (const auto& n : nodes) total += n.weight;
    for (double& t : tails) t /= total;
    radial = RadialProfile::tabulated(std::move(radii), std::move(tails), *alpha);
  } else {
    throw UsageError("unknown family '" + family + "'");
  }
  radial.r_min = c.value("r_min", radial.r_min);
  radial.r_max = c.value("r_max", radial.r_max);

  std::optional<DensityModulation> mod;
  if (c.contains("density_bound") && !c["density_bound"].is_null()) {
    const json& db = c["density_bound"];
    DensityModulation dm;
    if (db.contains("floors")) dm.floors = db["floors"].get<std::vector<double>>();
    else dm.floors = {get_number(db, "floor")};
    dm.omega = db.value("omega", 1.0);
    mod = dm;
  }

  LevyMeasure m(std::move(radial), std::move(nodes), dim, alpha, mod);
  if (c.contains("symmetric") && c["symmetric"].get<bool>() && !m.symmetric())
    throw UsageError("'symmetric' requested but angular nodes are not closed under w -> -w");
  m.zoom_ = c.value("zoom", 1.0);
  m.mass_ = c.value("mass", 1.0);
  return m;
}

json LevyMeasure::to_json() const {
  json j;
  j["family"] = family_name(radial_);
  j["alpha"] = alpha_;
  j["dim"] = dim_;
  json params = json::object();
  const auto& q = radial_.params();
  switch (radial_.kind()) {
    case RadialProfile::Kind::stable_power:
      params["scale"] = q[0];
      break;
    case RadialProfile::Kind::tabulated: {
      params["radii"] = radial_.table_radii();
      auto tails = radial_.table_tails();
      for (double& t : tails) t *= total_weight_;
      params["tails"] = tails;
      break;
    }
    case RadialProfile::Kind::phi_family:
      switch (radial_.variant()) {
        case 1: params["exponents"] = q; break;
        case 2:
        case 3: params["a"] = q[0]; params["b"] = q[1]; break;
        case 4: params["a"] = q[0]; params["m"] = q[1]; break;
        case 5: params["a"] = q[0]; break;
      }
      break;
  }
  j["params"] = params;
  json nodes = json::array();
  for (const auto& n : nodes_) nodes.push_back({{"direction", n.direction}, {"weight", n.weight}});
  j["angular"] = {{"kind", "nodes"}, {"nodes", nodes}};
  if (modulation_) j["density_bound"] = {{"floors", modulation_->floors}, {"omega", modulation_->omega}};
  j["symmetric"] = symmetric_;
  j["r_min"] = radial_.r_min;
  j["r_max"] = radial_.r_max;
  if (zoom_ != 1.0) j["zoom"] = zoom_;
  if (mass_ != 1.0) j["mass"] = mass_;
  return j;
}

std::uint64_t LevyMeasure::fingerprint() const {
  const std::string text = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Scaled moments and conditions

ScaledMeasure scale_measure(const LevyMeasure& m, double R) {
  if (!(R > 0.0 && R <= 1.0)) throw DomainError("scaled measure needs R in (0,1]");
  return {m.scaled(R), R};
}

MomentKind regime_moment(double alpha) {
  switch (compensation_for(alpha)) {
    case Compensation::none: return MomentKind::m1_cap;
    case Compensation::unit_ball: return MomentKind::m2_cap;
    case Compensation::full: return MomentKind::m2_m1;
  }
  return MomentKind::m2_cap;
}

double scaled_moment(const ScaledMeasure& s, MomentKind kind) {
  const LevyMeasure& m = s.measure;
  switch (kind) {
    case MomentKind::m1_cap: return m.moment(1.0, 0.0, 1.0) + m.tail(1.0);
    case MomentKind::m2_cap: return m.moment(2.0, 0.0, 1.0) + m.tail(1.0);
    case MomentKind::m2_m1: return m.moment(2.0, 0.0, 1.0) + m.moment(1.0, 1.0, kInf);
  }
  return 0.0;
}

double truncated_second_moment(const LevyMeasure& m) { return m.moment(2.0, 0.0, 1.0); }

double directional_second_moment(const LevyMeasure& m, std::span<const double> unit) {
  if (static_cast<int>(unit.size()) != m.dim()) throw UsageError("direction has the wrong dimension");
  const auto nodes = m.nodes();
  double s = 0.0;
  double shared = -1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double c = dot(unit, nodes[i].direction);
    if (c == 0.0) continue;
    double mi;
    if (m.modulated()) {
      mi = m.node_moment(i, 2.0, 0.0, 1.0);
    } else {
      if (shared < 0.0) shared = m.node_moment(0, 2.0, 0.0, 1.0) / nodes[0].weight;
      mi = shared * nodes[i].weight;
    }
    s += c * c * mi;
  }
  return s;
}

ConditionReport check_condition_B(const LevyMeasure& m, std::span<const double> R_grid,
                                  const std::vector<std::vector<double>>& directions,
                                  double threshold) {
  if (R_grid.empty() || directions.empty()) throw UsageError("condition B needs nonempty grids");
  ConditionReport rep;
  rep.threshold = threshold;
  rep.inf_value = kInf;
  for (double R : R_grid) {
    const LevyMeasure s = scale_measure(m, R).measure;
    for (const auto& d : directions) {
      const double v = directional_second_moment(s, d);
      if (v < rep.inf_value) {
        rep.inf_value = v;
        rep.argmin_R = R;
        rep.argmin_direction = d;
      }
    }
  }
  rep.pass = rep.inf_value >= threshold;
  return rep;
}

double angular_nondegeneracy(const LevyMeasure& m,
                             const std::vector<std::vector<double>>& directions) {
  const auto nodes = m.nodes();
  double best = kInf;
  for (const auto& d : directions) {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double c = dot(d, nodes[i].direction);
      s += nodes[i].weight * m.node_floor(i) * c * c;
    }
    best = std::min(best, s / m.total_weight());
  }
  return best;
}

ConditionCReport check_condition_C(const LevyMeasure& m, double q1, double N0) {
  if (!(q1 > 0.0)) throw UsageError("condition C needs q1 > 0");
  ConditionCReport rep;
  auto g = [&](double t) { return std::pow(m.w(t), 1.0 / q1); };
  const double T = std::max(1.0, m.window_hi());
  rep.growth_exponent = quad::log_slope(g, T);
  const double decay = rep.growth_exponent - N0;
  if (!(decay < -1.0 - 1e-9)) {
    rep.integral = kInf;
    rep.converged = false;
    return rep;
  }
  const double body = quad::integrate_log([&](double t) { return g(t) * std::pow(t, -N0); }, 1.0, T);
  const double tail = g(T) * std::pow(T, 1.0 - N0) / (-1.0 - decay);
  rep.integral = body + tail;
  rep.converged = std::isfinite(rep.integral);
  return rep;
}

bool condition_A_holds(double alpha, double p1, double q1, double tol) {
  if (p1 > q1 + tol) return false;
  switch (compensation_for(alpha)) {
    case Compensation::none: return p1 > -tol && q1 < 1.0 + tol;
    case Compensation::unit_ball: return p1 >= 1.0 - tol && q1 < 2.0 + tol;
    case Compensation::full: return p1 > 1.0 - tol && q1 < 2.0 + tol;
  }
  return false;
}

}  // namespace lh
