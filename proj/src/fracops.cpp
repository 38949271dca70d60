#include "levyholder/fracops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "levyholder/error.hpp"
#include "levyholder/parallel.hpp"

namespace lh {

namespace {

bool is_integer(double k) { return std::floor(k) == k; }

cplx int_pow(cplx z, long n) {
  cplx r = 1.0;
  const bool inv = n < 0;
  for (long i = 0; i < std::labs(n); ++i) r *= z;
  return inv ? 1.0 / r : r;
}

void require_symmetric(const LevyMeasure& m, double kappa) {
  if (!is_integer(kappa) && !m.symmetric()) {
    throw UsageError("fractional powers are defined only for symmetric measures (kappa = " + std::to_string(kappa) + ")");
  }
}

// 20-point Gauss–Legendre nodes and weights on [-1, 1].
struct GL20 {
  std::vector<double> x, w;
  GL20() {
    using G = boost::math::quadrature::gauss<double, 20>;
    const auto& a = G::abscissa();
    const auto& b = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
      x.push_back(a[i]);
      w.push_back(b[i]);
      x.push_back(-a[i]);
      w.push_back(b[i]);
    }
  }
};

// Σ over log-t panels of kernel(t) for t in [t0, T], panel width h in ln t.
template <class K>
void log_t_panels(double t0, double T, double h, K&& kernel) {
  static const GL20 gl;
  const double l0 = std::log(t0), l1 = std::log(T);
  const int n = std::max(1, static_cast<int>(std::ceil((l1 - l0) / h)));
  const double step = (l1 - l0) / n;
  for (int p = 0; p < n; ++p) {
    const double mid = l0 + (p + 0.5) * step;
    for (std::size_t q = 0; q < gl.x.size(); ++q) {
      const double t = std::exp(mid + 0.5 * step * gl.x[q]);
      // dt/t = d ln t
      kernel(t, 0.5 * step * gl.w[q]);
    }
  }
}

std::vector<double> fit_exponential(const std::vector<double>& t, const std::vector<double>& y) {
  // ln y = ln C - c t
  const std::size_t n = t.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ly = std::log(y[i]);
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icpt = (sy - slope * st) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - (icpt + slope * t[i]);
    ss += e * e;
  }
  return {std::exp(icpt), -slope, std::sqrt(ss / n)};
}

}  // namespace

double c_kappa(double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw UsageError("c_kappa needs kappa in (0,1)");
  return 1.0 / std::tgamma(-kappa);
}

double c_kappa_prime(double kappa) {
  if (!(kappa > 0.0)) throw UsageError("c'_kappa needs kappa > 0");
  return 1.0 / std::tgamma(kappa);
}

GridFunction frac_power(const GridFunction& f, const LevyMeasure& m, double a, double kappa) {
  if (!(a >= 0.0)) throw UsageError("frac_power needs a >= 0");
  require_symmetric(m, kappa);
  if (kappa == 0.0) return f;
  const auto& psi = compute_symbol(m, f.grid()).psi;
  const GridFunction F = f.to_frequency();
  double scale = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) scale = std::max(scale, std::abs(F[i]));
  std::vector<cplx> mult(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    const cplx base = a - psi[i];
    if (kappa < 0.0 && std::abs(base) == 0.0) {
      if (std::abs(F[i]) > 1e-13 * scale) {
        throw DomainError("negative power of aI - L is singular on this input: a - psi vanishes on its support");
      }
      mult[i] = 0.0;
      continue;
    }
    mult[i] = is_integer(kappa) ? int_pow(base, static_cast<long>(kappa)) : cplx(std::pow(base.real(), kappa), 0.0);
  }
  return apply_multiplier(f, mult);
}

GridFunction frac_inverse(const GridFunction& f, const LevyMeasure& m, double a, double kappa) {
  if (!(a > 0.0)) throw UsageError("frac_inverse needs a > 0");
  if (!(kappa > 0.0)) throw UsageError("frac_inverse needs kappa > 0");
  return frac_power(f, m, a, -kappa);
}

GridFunction generator_power(const GridFunction& f, const LevyMeasure& m, double kappa) {
  if (!(kappa >= 0.0)) throw UsageError("generator_power needs kappa >= 0");
  require_symmetric(m, kappa);
  const auto& psi = compute_symbol(m, f.grid()).psi;
  const long n = static_cast<long>(std::floor(kappa));
  const double s = kappa - n;
  std::vector<cplx> mult(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    cplx v = int_pow(psi[i], n);
    if (s > 0.0) v *= -std::pow(std::max(0.0, -psi[i].real()), s);
    mult[i] = v;
  }
  return apply_multiplier(f, mult);
}

GridFunction frac_power_time_quadrature(const GridFunction& f, const LevyMeasure& m, double a, double kappa) {
  if (!(kappa > 0.0 && kappa < 1.0)) throw UsageError("time-quadrature power needs kappa in (0,1)");
  if (!(a >= 0.0)) throw UsageError("time-quadrature power needs a >= 0");
  require_symmetric(m, kappa);
  const auto& psi = compute_symbol(m, f.grid()).psi;
  GridFunction F = f.to_frequency();
  double zmax = 0.0, zmin = std::numeric_limits<double>::infinity();
  for (const auto& p : psi) {
    const double z = a - p.real();
    if (z > 0.0) {
      zmax = std::max(zmax, z);
      zmin = std::min(zmin, z);
    }
  }
  if (zmax == 0.0) return 0.0 * f;
  const double t0 = 1e-6 / zmax, T = 40.0 / zmin;
  std::vector<cplx> acc(F.size(), 0.0);
  log_t_panels(t0, T, 0.25, [&](double t, double wt) {
    const double tk = std::pow(t, -kappa);
    for (std::size_t i = 0; i < F.size(); ++i) {
      const double z = psi[i].real() - a;
      acc[i] += wt * tk * std::expm1(z * t);
    }
  });
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double z = psi[i].real() - a;
    if (z == 0.0) {
      F[i] = 0.0;
      continue;
    }
    // (0, t0): e^{zt} - 1 ≈ zt; (T, ∞): e^{zT} < e^{-40}.
    const double small = z * std::pow(t0, 1.0 - kappa) / (1.0 - kappa);
    const double large = -std::pow(T, -kappa) / kappa;
    F[i] *= c_kappa(kappa) * (acc[i] + small + large);
  }
  return f.space() == Space::physical ? F.to_physical() : F;
}

GridFunction frac_inverse_time_quadrature(const GridFunction& f, const LevyMeasure& m, double a, double kappa) {
  if (!(a > 0.0 && kappa > 0.0)) throw UsageError("time-quadrature inverse needs a > 0 and kappa > 0");
  require_symmetric(m, kappa);
  const auto& psi = compute_symbol(m, f.grid()).psi;
  GridFunction F = f.to_frequency();
  double zmax = 0.0;
  for (const auto& p : psi) zmax = std::max(zmax, a - p.real());
  const double t0 = 1e-10 / zmax, T = 40.0 / a;
  std::vector<cplx> acc(F.size(), 0.0);
  log_t_panels(t0, T, 0.25, [&](double t, double wt) {
    const double tk = std::pow(t, kappa);
    for (std::size_t i = 0; i < F.size(); ++i) acc[i] += wt * tk * std::exp((psi[i].real() - a) * t);
  });
  const double small = std::pow(t0, kappa) / kappa;
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= c_kappa_prime(kappa) * (acc[i] + small);
  return f.space() == Space::physical ? F.to_physical() : F;
}

// ---------------------------------------------------------------------------
// Norm equivalences

json FracNormReport::to_json() const {
  auto rows_json = [](const std::vector<FracNormRow>& rs) {
    json out = json::array();
    for (const auto& r : rs) {
      out.push_back({{"function_id", r.id},
                     {"norm_a", r.norm_a},
                     {"norm_b", r.norm_b},
                     {"norm_c", r.norm_c},
                     {"ratio_ab", r.ratio_ab},
                     {"ratio_ac", r.ratio_ac},
                     {"lemma_c", r.lemma_c}});
    }
    return out;
  };
  return {{"beta", beta},     {"kappa", kappa}, {"spread", spread}, {"max_spread_allowed", max_spread_allowed},
          {"lemma_drift", lemma_drift}, {"pass", pass}, {"rows", rows_json(rows)}, {"rows_fine", rows_json(rows_fine)}};
}

void FracNormReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path);
  out.precision(17);
  out << "function_id,norm_a,norm_b,norm_c,ratio_ab,ratio_ac\n";
  for (const auto& r : rows) {
    out << r.id << ',' << r.norm_a << ',' << r.norm_b << ',' << r.norm_c << ',' << r.ratio_ab << ',' << r.ratio_ac << '\n';
  }
}

FracNormReport equiv_frac_norms(const std::vector<CorpusEntry>& corpus, const LevyMeasure& m, double beta,
                                double kappa, const TorusGrid& grid, double N) {
  if (!m.symmetric()) throw UsageError("fractional norm equivalence needs a symmetric measure");
  if (!(beta > 0.0 && kappa > 0.0)) throw UsageError("fractional norm equivalence needs beta, kappa > 0");
  if (corpus.empty()) throw UsageError("empty corpus");
  FracNormReport rep;
  rep.beta = beta;
  rep.kappa = kappa;
  auto run = [&](const TorusGrid& g) {
    const Partition p(N, g);
    std::vector<FracNormRow> rows(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto& r = rows[i];
      r.id = corpus[i].id;
      const auto u = GridFunction::sample(g, corpus[i].f);
      const double lk = besov_norm(generator_power(u, m, kappa), m, beta, p);
      r.norm_a = u.sup_norm() + lk;
      r.norm_b = besov_norm(frac_power(u, m, 1.0, kappa), m, beta, p);
      r.norm_c = besov_norm(u, m, beta + kappa, p);
      r.ratio_ab = r.norm_a / r.norm_b;
      r.ratio_ac = r.norm_a / r.norm_c;
      r.lemma_c = lk / r.norm_c;
    }
    return rows;
  };
  rep.rows = run(grid);
  rep.rows_fine = run(TorusGrid(grid.dim, grid.L, 2 * grid.M));

  for (const auto* rs : {&rep.rows, &rep.rows_fine}) {
    for (const auto& r : *rs) {
      const double hi = std::max({r.norm_a, r.norm_b, r.norm_c});
      const double lo = std::min({r.norm_a, r.norm_b, r.norm_c});
      rep.spread = std::max(rep.spread, hi / lo);
    }
  }
  double lc = 0.0, lf = 0.0;
  for (const auto& r : rep.rows) lc = std::max(lc, r.lemma_c);
  for (const auto& r : rep.rows_fine) lf = std::max(lf, r.lemma_c);
  rep.lemma_drift = lc > 0.0 ? std::abs(lf - lc) / lc : 0.0;
  rep.pass = rep.spread <= rep.max_spread_allowed && rep.lemma_drift <= 0.1;
  return rep;
}

// ---------------------------------------------------------------------------
// Decay of the rescaled semigroups

GridFunction annulus_bump(const TorusGrid& grid, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw UsageError("annulus bump needs 0 < lo < hi");
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  GridFunction F(grid, Space::frequency);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = (grid.xi_norm(i) - mid) / half;
    F[i] = smooth_step(2.0 * (1.0 - std::abs(x)));
  }
  return F.to_physical();
}

json DecayReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"R", r.R},
                  {"C", r.C},
                  {"c", r.c},
                  {"residual", r.residual},
                  {"C_gen", r.C_gen},
                  {"c_gen", r.c_gen},
                  {"residual_gen", r.residual_gen}});
  }
  return {{"t_grid", t_grid}, {"rows", rs},     {"min_rate", min_rate},
          {"rate_spread", rate_spread}, {"pass", pass}, {"warnings", warnings}};
}

DecayReport decay_test(const LevyMeasure& m, const std::vector<double>& R_grid, const std::vector<double>& t_grid,
                       const TorusGrid& grid, double lo, double hi) {
  if (R_grid.empty() || t_grid.size() < 2) throw UsageError("decay test needs R values and at least two times");
  DecayReport rep;
  rep.t_grid = t_grid;
  const GridFunction g = annulus_bump(grid, lo, hi);
  rep.rows.resize(R_grid.size());
  for (std::size_t k = 0; k < R_grid.size(); ++k) {
    auto& row = rep.rows[k];
    row.R = R_grid[k];
    const LevyMeasure mr = scale_measure(m, row.R).measure;
    const SymbolTable& tab = compute_symbol(mr, grid);
    const GridFunction Lg = apply_multiplier(g, tab.psi);
    row.l1.resize(t_grid.size());
    row.l1_gen.resize(t_grid.size());
    parallel_for(t_grid.size(), [&](std::size_t i) {
      row.l1[i] = semigroup(g, tab, t_grid[i]).l1_norm();
      row.l1_gen[i] = semigroup(Lg, tab, t_grid[i]).l1_norm();
    });
    const auto fa = fit_exponential(t_grid, row.l1);
    const auto fb = fit_exponential(t_grid, row.l1_gen);
    row.C = fa[0];
    row.c = fa[1];
    row.residual = fa[2];
    row.C_gen = fb[0];
    row.c_gen = fb[1];
    row.residual_gen = fb[2];
    for (double res : {row.residual, row.residual_gen}) {
      if (res > 0.5) rep.warnings.push_back("log-linear fit residual " + std::to_string(res) + " at R = " + std::to_string(row.R));
    }
  }
  // Spread across R, taken separately for g and L g.
  rep.min_rate = std::numeric_limits<double>::infinity();
  rep.rate_spread = 0.0;
  for (auto rate : {&DecayRow::c, &DecayRow::c_gen}) {
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (const auto& r : rep.rows) {
      mn = std::min(mn, r.*rate);
      mx = std::max(mx, r.*rate);
    }
    rep.min_rate = std::min(rep.min_rate, mn);
    rep.rate_spread = std::max(rep.rate_spread, mn > 0.0 ? (mx - mn) / mn : std::numeric_limits<double>::infinity());
  }
  rep.pass = rep.min_rate > 0.0;
  return rep;
}

}  // namespace lh
