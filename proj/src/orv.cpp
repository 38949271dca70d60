#include "levyholder/orv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyholder/error.hpp"
#include "levyholder/parallel.hpp"
#include "levyholder/quadrature.hpp"

namespace lh {

namespace {

constexpr double kMargin = 1e-9;

struct Fit {
  double slope = 0.0;
  double rms = 0.0;
};

Fit least_squares(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  Fit f;
  f.slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (my + f.slope * (x[i] - mx));
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  return f;
}

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> v;
  for (int k = lo; k <= hi; ++k) v.push_back(std::ldexp(1.0, k));
  return v;
}

}  // namespace

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw UsageError("log_grid needs 0 < lo <= hi, n >= 1");
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

std::vector<double> default_x_grid() { return log_grid(1e-6, 1e-2, 10); }

double estimate_r1(const LevyMeasure& m, double eps, std::span<const double> x_grid,
                   int tail_points) {
  if (!(eps > 0.0)) throw DomainError("r1 needs eps > 0");
  if (x_grid.empty() || tail_points < 1) throw UsageError("r1 needs a nonempty x grid");
  std::vector<double> xs(x_grid.begin(), x_grid.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = std::min<std::size_t>(xs.size(), tail_points);
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // w(εx)/w(x) = δ(x)/δ(εx).
    best = std::max(best, m.tail(xs[i]) / m.tail(eps * xs[i]));
  }
  return best;
}

ORVReport estimate_indices(const LevyMeasure& m, const ORVOptions& opt) {
  const auto xg = opt.x_grid.empty() ? default_x_grid() : opt.x_grid;
  const auto small = opt.eps_small.empty() ? powers_of_two(-10, -3) : opt.eps_small;
  const auto large = opt.eps_large.empty() ? powers_of_two(3, 10) : opt.eps_large;
  if (small.size() < 2 || large.size() < 2) throw UsageError("each eps wing needs two points");

  ORVReport rep;
  rep.eps = small;
  rep.eps.insert(rep.eps.end(), large.begin(), large.end());
  rep.r1.assign(rep.eps.size(), 0.0);
  parallel_for(rep.eps.size(),
               [&](std::size_t i) { rep.r1[i] = estimate_r1(m, rep.eps[i], xg, opt.tail_points); });

  auto wing = [&](std::size_t from, std::size_t to) {
    std::vector<double> lx, ly;
    for (std::size_t i = from; i < to; ++i) {
      lx.push_back(std::log(rep.eps[i]));
      ly.push_back(std::log(rep.r1[i]));
    }
    return least_squares(lx, ly);
  };
  const Fit fs = wing(0, small.size());
  const Fit fl = wing(small.size(), rep.eps.size());
  rep.p1 = fs.slope;
  rep.q1 = fl.slope;
  rep.residual_small = fs.rms;
  rep.residual_large = fl.rms;
  rep.ordered = rep.p1 <= rep.q1 + opt.index_tol;

  std::vector<std::size_t> order(rep.eps.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rep.eps[a] < rep.eps[b]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (rep.r1[order[k]] < rep.r1[order[k - 1]] * (1.0 - 1e-12)) rep.monotone = false;
  return rep;
}

json ORVReport::to_json() const {
  json samples = json::array();
  for (std::size_t i = 0; i < eps.size(); ++i) samples.push_back({{"eps", eps[i]}, {"r1", r1[i]}});
  return {{"r1_samples", samples},
          {"p1", p1},
          {"q1", q1},
          {"fit_diagnostics", {{"residual_small", residual_small}, {"residual_large", residual_large}}},
          {"warning", warning()}};
}

Al1Case parse_al1_case(const std::string& name) {
  if (name == "a") return Al1Case::a;
  if (name == "b") return Al1Case::b;
  if (name == "c") return Al1Case::c;
  if (name == "d") return Al1Case::d;
  throw UsageError("lemma case must be a, b, c or d");
}

std::string to_string(Al1Case c) {
  switch (c) {
    case Al1Case::a: return "a";
    case Al1Case::b: return "b";
    case Al1Case::c: return "c";
    case Al1Case::d: return "d";
  }
  return "?";
}

LemmaReport check_al1(const LevyMeasure& m, Al1Case which, double beta, double tau,
                      std::span<const double> x_grid, double p1, double q1) {
  std::ostringstream why;
  bool ok = true;
  switch (which) {
    case Al1Case::a:
      if (!(beta > 0.0)) why << "case a requires beta > 0", ok = false;
      else if (!(tau > -beta * p1 + kMargin)) why << "case a requires tau > -beta*p1 = " << -beta * p1, ok = false;
      break;
    case Al1Case::b:
      if (!(beta > 0.0)) why << "case b requires beta > 0", ok = false;
      else if (!(tau < -beta * q1 - kMargin)) why << "case b requires tau < -beta*q1 = " << -beta * q1, ok = false;
      break;
    case Al1Case::c:
      if (!(beta < 0.0)) why << "case c requires beta < 0", ok = false;
      else if (!(tau > -beta * q1 + kMargin)) why << "case c requires tau > -beta*q1 = " << -beta * q1, ok = false;
      break;
    case Al1Case::d:
      if (!(beta < 0.0)) why << "case d requires beta < 0", ok = false;
      else if (!(tau < -beta * p1 - kMargin)) why << "case d requires tau < -beta*p1 = " << -beta * p1, ok = false;
      break;
  }
  if (!ok) throw UsageError(why.str() + " (tau = " + std::to_string(tau) + ")");
  if (x_grid.size() < 2) throw UsageError("lemma check needs at least two x points");

  LemmaReport rep;
  rep.which = which;
  rep.beta = beta;
  rep.tau = tau;
  rep.x.assign(x_grid.begin(), x_grid.end());
  for (double x : rep.x)
    if (!(x > 0.0 && x <= 1.0)) throw UsageError("lemma x grid must lie in (0,1]");
  std::sort(rep.x.begin(), rep.x.end(), std::greater<>());

  auto g = [&](double t) { return std::pow(t, tau) * std::pow(m.w(t), beta); };
  const bool from_zero = which == Al1Case::a || which == Al1Case::c;
  rep.ratio.assign(rep.x.size(), 0.0);
  rep.scale.assign(rep.x.size(), 0.0);
  parallel_for(rep.x.size(), [&](std::size_t i) {
    const double x = rep.x[i];
    double integral;
    if (from_zero) {
      // ∫_0^x g dt/t: log panels down to x·1e-8, power-law continuation below.
      const double lo = x * 1e-8;
      const double kappa = quad::log_slope(g, lo);
      integral = quad::integrate_log([&](double t) { return g(t) / t; }, lo, x);
      integral = kappa > 0.0 ? integral + g(lo) / kappa : std::numeric_limits<double>::infinity();
    } else {
      integral = quad::integrate_log([&](double t) { return g(t) / t; }, x, 1.0);
    }
    rep.scale[i] = g(x);
    rep.ratio[i] = integral / rep.scale[i];
  });

  rep.max_ratio = *std::max_element(rep.ratio.begin(), rep.ratio.end());
  const std::size_t n = rep.x.size();
  const std::size_t k = std::min<std::size_t>(5, n);
  std::vector<double> lx, ly;
  for (std::size_t i = n - k; i < n; ++i) {
    lx.push_back(std::log(rep.x[i]));
    ly.push_back(std::log(rep.scale[i]));
  }
  const double slope = least_squares(lx, ly).slope;
  rep.trend = slope > 0.0 ? "0" : "inf";
  const std::string expected = from_zero ? "0" : "inf";

  // Bounded: the ratio on the smaller half of the grid does not outgrow the larger half.
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double& side = i < n / 2 ? head : tail;
    side = std::max(side, rep.ratio[i]);
  }
  const bool bounded = std::isfinite(rep.max_ratio) && tail <= 1.5 * head;
  rep.pass = bounded && rep.trend == expected;
  return rep;
}

LemmaReport check_al1(const LevyMeasure& m, Al1Case which, double beta, double tau,
                      std::span<const double> x_grid) {
  const auto idx = estimate_indices(m);
  return check_al1(m, which, beta, tau, x_grid, idx.p1, idx.q1);
}

json LemmaReport::to_json() const {
  return {{"case", to_string(which)}, {"beta", beta},         {"tau", tau},
          {"max_ratio", max_ratio},   {"trend", trend},       {"pass", pass}};
}

AC1Report check_ac1(const LevyMeasure& m, double beta, double N, int terms) {
  if (!(beta > 0.0) || !(N > 1.0) || terms < 25) throw UsageError("ac1 needs beta > 0, N > 1, terms >= 25");
  AC1Report rep;
  std::vector<double> term(terms);
  for (int j = 0; j < terms; ++j) term[j] = std::pow(m.w(std::pow(N, -j)), beta);
  double s = 0.0;
  for (double t : term) {
    s += t;
    rep.partial_sums.push_back(s);
  }
  rep.sum = s;
  // Largest successive ratio over the last 20 terms bounds the remainder geometrically.
  double q = 0.0;
  for (int j = terms - 20; j < terms; ++j) q = std::max(q, term[j] / term[j - 1]);
  if (q < 1.0) {
    rep.tail_bound = term.back() * q / (1.0 - q);
    rep.converged = rep.tail_bound <= 1e-10 * std::max(1.0, rep.sum);
  } else {
    rep.tail_bound = std::numeric_limits<double>::infinity();
  }
  return rep;
}

json AC1Report::to_json() const {
  return {{"sum", sum}, {"tail_bound", tail_bound}, {"converged", converged}, {"terms", partial_sums.size()}};
}

}  // namespace lh
