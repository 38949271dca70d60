#include "levyholder/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "levyholder/error.hpp"
#include "levyholder/parallel.hpp"

namespace lh {

namespace {

using std::numbers::pi;

// Block sup-norms |v * φ_j|_0 and the matching w(N^{-j}).
struct Blocks {
  std::vector<double> sup, w;
  double weighted(double e) const {
    double s = 0.0;
    for (std::size_t j = 0; j < sup.size(); ++j) s = std::max(s, std::pow(w[j], -e) * sup[j]);
    return s;
  }
};

Blocks block_sups(const GridFunction& v, const LevyMeasure& m, const Partition& part) {
  const auto d = decompose(v, part, m, 1.0);
  Blocks b;
  b.sup = d.block_sup;
  for (double wt : d.weights) b.w.push_back(1.0 / wt);
  return b;
}

ConstantSummary summarize(const std::vector<double>& xs, double tol) {
  ConstantSummary s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = 0.0;
  for (double x : xs) {
    if (!(std::isfinite(x) && x > 0.0)) s.finite = false;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.spread = s.finite ? (s.max - s.min) / (s.max + s.min) : std::numeric_limits<double>::infinity();
  s.pass = s.finite && s.spread <= tol;
  return s;
}

}  // namespace

CauchyProblem::CauchyProblem(LevyMeasure m, double lam, double horizon, std::vector<GridFunction> f)
    : measure(std::move(m)), lambda(lam), T(horizon), forcing(std::move(f)) {
  if (!(lambda >= 0.0)) throw UsageError("lambda must be nonnegative");
  if (!(T > 0.0)) throw UsageError("horizon T must be positive");
  if (forcing.size() < 2) throw UsageError("forcing needs at least two snapshots (K >= 1)");
  for (auto& s : forcing) {
    if (!(s.grid() == forcing.front().grid())) throw UsageError("forcing snapshots must share one grid");
    if (s.space() != Space::physical) s = s.to_physical();
  }
  if (forcing.front().grid().dim != measure.dim()) throw UsageError("forcing grid dimension differs from the measure");
}

CauchyProblem CauchyProblem::from_function(const LevyMeasure& m, const TorusGrid& grid, double lambda, double T, int K,
                                           const Forcing& f) {
  if (K < 1) throw UsageError("K must be at least 1");
  std::vector<GridFunction> snaps;
  snaps.reserve(K + 1);
  for (int n = 0; n <= K; ++n) {
    const double t = T * n / K;
    snaps.push_back(GridFunction::sample(grid, [&](const Point& x) { return f(t, x); }));
  }
  return CauchyProblem(m, lambda, T, std::move(snaps));
}

double rho_lambda(double lambda, double T) { return lambda > 0.0 ? std::min(1.0 / lambda, T) : T; }

cplx phi1(cplx x) {
  if (std::abs(x) < 0.1) {
    cplx s = 0.0, term = 1.0;
    for (int k = 1; k <= 14; ++k) {
      term /= double(k);  // x^{k-1}/k!
      s += term;
      term *= x;
    }
    return s;
  }
  return (std::exp(x) - 1.0) / x;
}

cplx phi2(cplx x) {
  if (std::abs(x) < 0.1) {
    cplx s = 0.0, term = 0.5;
    for (int k = 2; k <= 15; ++k) {
      s += term;  // x^{k-2}/k!
      term *= x / double(k + 1);
    }
    return s;
  }
  return (std::exp(x) - 1.0 - x) / (x * x);
}

SolveResult solve(const CauchyProblem& p) {
  const TorusGrid& g = p.grid();
  const auto& psi = compute_symbol(p.measure, g).psi;
  const int K = p.K();
  const double h = p.dt();
  std::vector<GridFunction> F(K + 1);
  parallel_for(K + 1, [&](std::size_t n) { F[n] = p.forcing[n].to_frequency(); });

  std::vector<GridFunction> U(K + 1, GridFunction(g, Space::frequency));
  const std::size_t size = g.size();
  const std::size_t chunk = 1024;
  parallel_for((size + chunk - 1) / chunk, [&](std::size_t c) {
    const std::size_t lo = c * chunk, hi = std::min(size, lo + chunk);
    for (std::size_t i = lo; i < hi; ++i) {
      const cplx zh = (psi[i] - p.lambda) * h;
      const cplx E = std::exp(zh), w1 = h * phi1(zh), w2 = h * phi2(zh);
      cplx u = 0.0;
      for (int n = 0; n < K; ++n) {
        u = E * u + w1 * F[n][i] + w2 * (F[n + 1][i] - F[n][i]);
        U[n + 1][i] = u;
      }
    }
  });

  SolveResult r;
  r.rho = rho_lambda(p.lambda, p.T);
  r.t.resize(K + 1);
  r.u.resize(K + 1);
  for (int n = 0; n <= K; ++n) r.t[n] = p.T * n / K;
  parallel_for(K + 1, [&](std::size_t n) { r.u[n] = U[n].to_physical(); });
  // u(0) = 0 exactly, independent of FFT round-off.
  r.u[0] = GridFunction(g, Space::physical);
  return r;
}

double norm_one_plus(const GridFunction& u, const LevyMeasure& m, double beta, const Partition& part) {
  return u.sup_norm() + besov_norm(apply_generator(u, m), m, beta, part);
}

void attach_norms(SolveResult& r, const LevyMeasure& m, double beta, const Partition& part) {
  r.norm_beta.assign(r.u.size(), 0.0);
  r.norm_1beta.assign(r.u.size(), 0.0);
  parallel_for(r.u.size(), [&](std::size_t n) {
    r.norm_beta[n] = besov_norm(r.u[n], m, beta, part);
    r.norm_1beta[n] = norm_one_plus(r.u[n], m, beta, part);
  });
}

double residual(const CauchyProblem& p, const SolveResult& r) {
  const TorusGrid& g = p.grid();
  const auto& psi = compute_symbol(p.measure, g).psi;
  const int K = p.K();
  const double h = p.dt();
  GridFunction acc(g, Space::frequency);
  GridFunction prev(g, Space::frequency);
  double worst = 0.0;
  for (int n = 0; n <= K; ++n) {
    const GridFunction U = r.u[n].to_frequency();
    const GridFunction Fn = p.forcing[n].to_frequency();
    GridFunction G(g, Space::frequency);
    for (std::size_t i = 0; i < g.size(); ++i) G[i] = (psi[i] - p.lambda) * U[i] + Fn[i];
    if (n > 0) {
      for (std::size_t i = 0; i < g.size(); ++i) acc[i] += 0.5 * h * (prev[i] + G[i]);
    }
    prev = G;
    worst = std::max(worst, (U - acc).to_physical().sup_norm());
  }
  return worst;
}

EstimateRow measure_constants(const CauchyProblem& p, const SolveResult& r, double beta,
                              const std::vector<double>& mus, const Partition& part) {
  const LevyMeasure& m = p.measure;
  double F = 0.0;
  for (const auto& f : p.forcing) F = std::max(F, besov_norm(f, m, beta, part));
  if (!(F > 0.0)) throw UsageError("forcing has zero norm; estimate constants are undefined");

  EstimateRow row;
  row.lambda = p.lambda;
  row.T = p.T;
  row.rho = r.rho;
  row.M = p.grid().M;
  std::vector<double> nb(r.u.size()), n1(r.u.size());
  if (r.norm_beta.size() == r.u.size()) {
    nb = r.norm_beta;
    n1 = r.norm_1beta;
  } else {
    parallel_for(r.u.size(), [&](std::size_t n) {
      nb[n] = besov_norm(r.u[n], m, beta, part);
      n1[n] = norm_one_plus(r.u[n], m, beta, part);
    });
  }
  for (std::size_t n = 0; n < r.u.size(); ++n) {
    row.C5 = std::max(row.C5, nb[n] / (r.rho * F));
    row.C1 = std::max(row.C1, n1[n] / ((1.0 + r.rho) * F));
  }

  // Dyadic pairs (t_n, t_n - 2^{-k} T).
  const int K = p.K();
  std::vector<std::pair<int, int>> pairs;
  for (int step = K / 2; step >= 1; step /= 2) {
    for (int n = step; n <= K; ++n) pairs.emplace_back(n, n - step);
  }
  std::vector<std::vector<double>> best(pairs.size(), std::vector<double>(mus.size(), 0.0));
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [a, b] = pairs[k];
    const GridFunction v = r.u[a] - r.u[b];
    const double dt = r.t[a] - r.t[b];
    const Blocks bv = block_sups(v, m, part);
    double one_plus = -1.0;
    for (std::size_t q = 0; q < mus.size(); ++q) {
      const double mu = mus[q];
      double num;
      if (mu >= 1.0) {
        if (one_plus < 0.0) one_plus = v.sup_norm() + block_sups(apply_generator(v, m), m, part).weighted(beta);
        num = one_plus;
      } else {
        num = bv.weighted(beta + mu);
      }
      const double den = (std::pow(dt, 1.0 - mu) + (1.0 + r.rho) * dt) * F;
      best[k][q] = num / den;
    }
  });
  row.C2.assign(mus.size(), 0.0);
  for (const auto& b : best) {
    for (std::size_t q = 0; q < mus.size(); ++q) row.C2[q] = std::max(row.C2[q], b[q]);
  }
  return row;
}

json ConstantSummary::to_json() const {
  return {{"min", min}, {"max", max}, {"spread", spread}, {"finite", finite}, {"pass", pass}};
}

json EstimateReport::to_json() const {
  auto row_json = [](const EstimateRow& r) {
    return json{{"forcing", r.forcing}, {"lambda", r.lambda}, {"T", r.T}, {"rho", r.rho}, {"M", r.M},
                {"C_est5", r.C5},       {"C_est1", r.C1},     {"C_est2", r.C2}};
  };
  json rs = json::array(), ds = json::array(), per = json::array();
  for (const auto& r : rows) rs.push_back(row_json(r));
  for (const auto& r : detail) ds.push_back(row_json(r));
  for (const auto& s : C2_per_mu) per.push_back(s.to_json());
  return {{"mu", mus},         {"tolerance", tolerance}, {"C_est5", C5.to_json()}, {"C_est1", C1.to_json()},
          {"C_est2", C2.to_json()}, {"C_est2_per_mu", per}, {"rows", rs}, {"detail", ds}, {"pass", pass}};
}

void EstimateReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path);
  out.precision(17);
  out << "forcing,lambda,T,M,rho,C_est5,C_est1";
  for (double mu : mus) out << ",C_est2_mu" << mu;
  out << '\n';
  for (const auto* set : {&rows, &detail}) {
    for (const auto& r : *set) {
      out << r.forcing << ',' << r.lambda << ',' << r.T << ',' << r.M << ',' << r.rho << ',' << r.C5 << ',' << r.C1;
      for (double c : r.C2) out << ',' << c;
      out << '\n';
    }
  }
}

EstimateReport verify_estimates(const LevyMeasure& m, const TorusGrid& grid, const std::vector<NamedForcing>& forcings,
                                const EstimateOptions& opt) {
  if (forcings.empty()) throw UsageError("estimate verification needs at least one forcing");
  if (opt.lambdas.empty() || opt.Ts.empty() || opt.mus.empty()) throw UsageError("empty parameter matrix");
  if (!(opt.beta > 0.0)) throw UsageError("estimate verification needs beta > 0");
  EstimateReport rep;
  rep.mus = opt.mus;
  rep.tolerance = opt.tolerance;
  std::vector<TorusGrid> grids{grid};
  if (opt.refine) grids.emplace_back(grid.dim, grid.L, 2 * grid.M);
  for (const auto& g : grids) {
    const Partition part(opt.N, g);
    for (double T : opt.Ts) {
      for (double lam : opt.lambdas) {
        EstimateRow agg;
        agg.forcing = "max";
        agg.lambda = lam;
        agg.T = T;
        agg.M = g.M;
        agg.rho = rho_lambda(lam, T);
        agg.C2.assign(opt.mus.size(), 0.0);
        for (const auto& nf : forcings) {
          const auto p = CauchyProblem::from_function(m, g, lam, T, opt.K, nf.f);
          const auto r = solve(p);
          EstimateRow row = measure_constants(p, r, opt.beta, opt.mus, part);
          row.forcing = nf.id;
          agg.C5 = std::max(agg.C5, row.C5);
          agg.C1 = std::max(agg.C1, row.C1);
          for (std::size_t q = 0; q < opt.mus.size(); ++q) agg.C2[q] = std::max(agg.C2[q], row.C2[q]);
          rep.detail.push_back(std::move(row));
        }
        rep.rows.push_back(std::move(agg));
      }
    }
  }
  std::vector<double> c5, c1, c2;
  std::vector<std::vector<double>> c2mu(opt.mus.size());
  for (const auto& r : rep.rows) {
    c5.push_back(r.C5);
    c1.push_back(r.C1);
    for (std::size_t q = 0; q < r.C2.size(); ++q) {
      c2.push_back(r.C2[q]);
      c2mu[q].push_back(r.C2[q]);
    }
  }
  rep.C5 = summarize(c5, opt.tolerance);
  rep.C1 = summarize(c1, opt.tolerance);
  rep.C2 = summarize(c2, opt.tolerance);
  for (const auto& v : c2mu) rep.C2_per_mu.push_back(summarize(v, opt.tolerance));
  rep.pass = rep.C5.pass && rep.C1.pass && rep.C2.pass;
  return rep;
}

Forcing harmonic_forcing(const std::array<int, 3>& k, double L, double offset) {
  return [k, L, offset](double, const Point& x) {
    const double ph = 2 * pi * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) / L;
    return cplx(std::cos(ph) + offset, 0.0);
  };
}

Forcing lacunary_forcing(const LevyMeasure& m, double beta, int N, int levels, double L) {
  if (N < 2) throw UsageError("lacunary forcing needs integer N >= 2");
  std::vector<double> amp;
  for (int j = 0; j <= levels; ++j) amp.push_back(std::pow(m.w(std::pow(double(N), -j)), beta));
  return [amp, N, L](double, const Point& x) {
    double s = 0.0, freq = 1.0;
    for (double a : amp) {
      s += a * std::cos(2 * pi * freq * x[0] / L);
      freq *= N;
    }
    return cplx(s, 0.0);
  };
}

std::vector<NamedForcing> default_forcings(const LevyMeasure& m, const TorusGrid& grid, double beta, int N) {
  const Partition part(N, grid);
  const int top = part.j_max();
  const int k = static_cast<int>(std::lround(std::pow(double(N), top)));
  const double a = std::pow(m.w(std::pow(double(N), -top)) / m.w(1.0), beta);
  const double L = grid.L;
  const Forcing lac = lacunary_forcing(m, beta, N, top, L);
  const Forcing high = harmonic_forcing({k, 0, 0}, L);
  return {
      {"constant", [](double, const Point&) { return cplx(1.0, 0.0); }},
      {"harmonic_1", harmonic_forcing({1, 0, 0}, L)},
      {"harmonic_" + std::to_string(k), high},
      {"constant+harmonic_" + std::to_string(k), [high, a](double t, const Point& x) { return 1.0 + a * high(t, x); }},
      {"lacunary", lac},
      {"lacunary_osc", [lac](double t, const Point& x) { return std::cos(20 * pi * t) * lac(t, x); }},
  };
}

json RoughLimitReport::to_json() const {
  return {{"levels", levels}, {"differences", differences}, {"converged", converged}};
}

RoughLimitReport rough_input_limit(const LevyMeasure& m, const GridFunction& f, double lambda, double T, int K,
                                   double beta_prime, const std::vector<int>& levels, double N) {
  if (levels.size() < 2) throw UsageError("rough-input limit needs at least two truncation levels");
  const Partition part(N, f.grid());
  RoughLimitReport rep;
  rep.levels = levels;
  GridFunction prev;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const GridFunction fn = truncate(f.space() == Space::physical ? f : f.to_physical(), part, levels[k]);
    CauchyProblem p(m, lambda, T, std::vector<GridFunction>(K + 1, fn));
    SolveResult r = solve(p);
    if (k > 0) rep.differences.push_back(norm_one_plus(r.u.back() - prev, m, beta_prime, part));
    prev = r.u.back();
    if (k + 1 == levels.size()) rep.finest = std::move(r);
  }
  rep.converged = true;
  for (std::size_t k = 1; k < rep.differences.size(); ++k) {
    if (rep.differences[k] > rep.differences[k - 1] * (1 + 1e-9)) rep.converged = false;
  }
  return rep;
}

}  // namespace lh
