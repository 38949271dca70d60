#include "levyholder/lpnorms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "levyholder/error.hpp"
#include "levyholder/parallel.hpp"

namespace lh {

namespace {

using std::numbers::pi;

double bump_h(double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

}  // namespace

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = bump_h(x), b = bump_h(1.0 - x);
  return a / (a + b);
}

Partition::Partition(double N, const TorusGrid& grid) : N_(N), grid_(grid) {
  if (!(N > 1.0)) throw UsageError("partition base N must exceed 1");
  const double top = grid.nyquist() / N;
  // Small slack so exact powers of N are not lost to rounding.
  j_max_ = top >= 1.0 ? static_cast<int>(std::floor(std::log(top) / std::log(N) + 1e-12)) : 0;
}

double Partition::chi(double s) const { return smooth_step((N_ - s) / (N_ - 1.0)); }

double Partition::block_symbol(int j, double xi) const {
  if (j < 0 || j > j_max_) return 0.0;
  const double inner = j == 0 ? 0.0 : chi(std::pow(N_, 1 - j) * xi);
  // The top block also takes every lattice mode beyond its outer edge, so the
  // blocks always sum to one on the grid.
  const double outer = j == j_max_ ? 1.0 : chi(std::pow(N_, -j) * xi);
  return outer - inner;
}

std::pair<double, double> Partition::annulus(int j) const {
  const double lo = j == 0 ? 0.0 : std::pow(N_, j - 1);
  const double hi = j == j_max_ ? std::numeric_limits<double>::infinity() : std::pow(N_, j + 1);
  return {lo, hi};
}

GridFunction LPDecomposition::sum() const {
  if (blocks.empty()) throw UsageError("empty decomposition");
  GridFunction s = blocks.front();
  for (std::size_t j = 1; j < blocks.size(); ++j) s += blocks[j];
  return s;
}

LPDecomposition decompose(const GridFunction& u, const Partition& p, const LevyMeasure& m, double beta) {
  if (!(u.grid() == p.grid())) throw UsageError("partition grid differs from the function grid");
  const TorusGrid& g = u.grid();
  const GridFunction U = u.to_frequency();
  std::vector<double> xi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) xi[i] = g.xi_norm(i);

  LPDecomposition d;
  d.j_max = p.j_max();
  const std::size_t n = static_cast<std::size_t>(d.j_max) + 1;
  d.blocks.resize(n);
  d.weights.resize(n);
  d.block_sup.resize(n);
  parallel_for(n, [&](std::size_t j) {
    GridFunction B = U;
    for (std::size_t i = 0; i < B.size(); ++i) B[i] *= p.block_symbol(static_cast<int>(j), xi[i]);
    d.blocks[j] = B.to_physical();
    d.block_sup[j] = d.blocks[j].sup_norm();
    d.weights[j] = std::pow(m.w(std::pow(p.N(), -static_cast<double>(j))), -beta);
  });
  return d;
}

double besov_norm(const GridFunction& u, const LevyMeasure& m, double beta, const Partition& p) {
  if (!(beta > 0.0)) throw UsageError("besov norm needs beta > 0");
  const auto d = decompose(u, p, m, beta);
  double s = 0.0;
  for (std::size_t j = 0; j < d.blocks.size(); ++j) s = std::max(s, d.weights[j] * d.block_sup[j]);
  return s;
}

std::vector<std::array<int, 3>> default_shifts(const TorusGrid& g) {
  std::vector<std::array<int, 3>> out;
  const double h = g.spacing(), cap = g.L / 4.0 * (1.0 + 1e-12);
  for (int s = 1; s * h <= cap; ++s) {
    for (int a = 0; a < g.dim; ++a) {
      std::array<int, 3> v{0, 0, 0};
      v[a] = s;
      out.push_back(v);
    }
    if (g.dim >= 2 && s * h * std::sqrt(double(g.dim)) <= cap) {
      if (g.dim == 2) {
        out.push_back({s, s, 0});
        out.push_back({s, -s, 0});
      } else {
        out.push_back({s, s, s});
        out.push_back({s, s, -s});
        out.push_back({s, -s, s});
        out.push_back({-s, s, s});
      }
    }
  }
  return out;
}

double holder_norm(const GridFunction& u, const LevyMeasure& m, double beta,
                   const std::vector<std::array<int, 3>>& shifts) {
  if (u.space() != Space::physical) throw UsageError("holder norm needs physical data");
  const TorusGrid& g = u.grid();
  std::vector<double> best(shifts.size(), 0.0);
  parallel_for(shifts.size(), [&](std::size_t k) {
    const auto& s = shifts[k];
    double len2 = 0.0;
    for (int a = 0; a < g.dim; ++a) len2 += double(s[a]) * s[a];
    const double len = std::sqrt(len2) * g.spacing();
    if (len == 0.0) return;
    // Row-major walk with unused axes of extent 1.
    const int M = g.M;
    const int n0 = M, n1 = g.dim >= 2 ? M : 1, n2 = g.dim >= 3 ? M : 1;
    auto wrap = [M](int i) { return ((i % M) + M) % M; };
    double mx = 0.0;
    for (int a = 0; a < n0; ++a) {
      const std::size_t ra = std::size_t(a) * n1 * n2, sa = std::size_t(wrap(a + s[0])) * n1 * n2;
      for (int b = 0; b < n1; ++b) {
        const std::size_t rb = ra + std::size_t(b) * n2;
        const std::size_t sb = sa + std::size_t(n1 > 1 ? wrap(b + s[1]) : 0) * n2;
        for (int c = 0; c < n2; ++c) {
          const std::size_t sc = sb + (n2 > 1 ? wrap(c + s[2]) : 0);
          mx = std::max(mx, std::norm(u[sc] - u[rb + c]));
        }
      }
    }
    best[k] = std::sqrt(mx) / std::pow(m.w(len), beta);
  });
  double semi = 0.0;
  for (double b : best) semi = std::max(semi, b);
  return u.sup_norm() + semi;
}

double holder_norm(const GridFunction& u, const LevyMeasure& m, double beta) {
  return holder_norm(u, m, beta, default_shifts(u.grid()));
}

GridFunction truncate(const GridFunction& u, const Partition& p, int n) {
  if (n > p.j_max()) throw UsageError("truncation level exceeds j_max");
  if (n < 0) return 0.0 * u;
  const TorusGrid& g = u.grid();
  if (n == p.j_max()) return u;
  const double scale = std::pow(p.N(), -n);
  return apply_multiplier(u, [&](std::size_t i) { return cplx(p.chi(scale * g.xi_norm(i)), 0.0); });
}

double interpolation_constant(const GridFunction& u, const LevyMeasure& m, double beta,
                              double beta_prime, double eps, const Partition& p) {
  const double sup = u.sup_norm();
  if (sup == 0.0) return 0.0;
  const double hi = besov_norm(u, m, beta, p);
  const double lo = besov_norm(u, m, beta_prime, p);
  return std::max(0.0, lo - eps * hi) / sup;
}

std::vector<CorpusEntry> default_corpus(int dim) {
  using Profile = std::function<double(double)>;
  std::vector<std::pair<std::string, Profile>> profiles;
  profiles.emplace_back("constant", [](double) { return 1.0; });
  profiles.emplace_back("cos1", [](double x) { return std::cos(2 * pi * x); });
  profiles.emplace_back("trig3_5", [](double x) { return std::cos(6 * pi * x) + 0.5 * std::sin(10 * pi * x); });
  profiles.emplace_back("cos12", [](double x) { return std::cos(24 * pi * x); });
  profiles.emplace_back("cos40", [](double x) { return std::cos(80 * pi * x); });
  for (double sigma : {0.1, 0.05, 0.03}) {
    char id[32];
    std::snprintf(id, sizeof id, "bump%.2f", sigma);
    profiles.emplace_back(id, [sigma](double x) {
      double s = 0.0;
      for (int n = -3; n <= 3; ++n) {
        const double d = x - 0.5 + n;
        s += std::exp(-d * d / (2 * sigma * sigma));
      }
      return s;
    });
  }
  for (unsigned seed : {11u, 12u, 13u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> a(33), b(33);
    for (int k = 1; k <= 32; ++k) {
      a[k] = unif(rng) / k;
      b[k] = unif(rng) / k;
    }
    profiles.emplace_back("random" + std::to_string(seed), [a, b](double x) {
      double s = 0.0;
      for (int k = 1; k <= 32; ++k) s += a[k] * std::cos(2 * pi * k * x) + b[k] * std::sin(2 * pi * k * x);
      return s;
    });
  }
  profiles.emplace_back("lacunary", [](double x) {
    double s = 0.0;
    for (int j = 0; j <= 5; ++j) s += std::pow(2.0, -0.5 * j) * std::cos(2 * pi * std::ldexp(1.0, j) * x);
    return s;
  });

  std::vector<CorpusEntry> out;
  for (auto& [id, prof] : profiles) {
    out.push_back({id, [prof, dim](const Point& x) {
                     double v = prof(x[0]);
                     if (dim >= 2) v += 0.5 * prof(x[1]);
                     if (dim >= 3) v += 0.25 * prof(x[2]);
                     return cplx(v, 0.0);
                   }});
  }
  return out;
}

json EquivalenceReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"function_id", r.id},
                  {"besov", r.besov},
                  {"holder", r.holder},
                  {"ratio", r.ratio},
                  {"besov_fine", r.besov_fine},
                  {"holder_fine", r.holder_fine},
                  {"ratio_fine", r.ratio_fine},
                  {"drift", r.drift}});
  }
  return {{"beta", beta},   {"K", K},           {"min_ratio", min_ratio}, {"max_ratio", max_ratio},
          {"max_drift", max_drift}, {"pass", pass}, {"rows", rs}};
}

void EquivalenceReport::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path);
  out.precision(17);
  out << "function_id,beta,besov,holder,ratio\n";
  for (const auto& r : rows) out << r.id << ',' << beta << ',' << r.besov << ',' << r.holder << ',' << r.ratio << '\n';
}

EquivalenceReport equivalence_report(const std::vector<CorpusEntry>& corpus, const LevyMeasure& m,
                                     double beta, double q1, const TorusGrid& grid, double N, double K) {
  if (!(beta > 0.0 && beta * q1 < 1.0)) {
    throw UsageError("norm equivalence needs beta in (0, 1/q1); got beta = " + std::to_string(beta) +
                     ", q1 = " + std::to_string(q1));
  }
  if (corpus.empty()) throw UsageError("empty corpus");
  const TorusGrid fine(grid.dim, grid.L, 2 * grid.M);
  const Partition p(N, grid), pf(N, fine);
  EquivalenceReport rep;
  rep.beta = beta;
  rep.K = K;
  rep.rows.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto& r = rep.rows[i];
    r.id = corpus[i].id;
    const auto u = GridFunction::sample(grid, corpus[i].f);
    const auto uf = GridFunction::sample(fine, corpus[i].f);
    r.besov = besov_norm(u, m, beta, p);
    r.holder = holder_norm(u, m, beta);
    r.ratio = r.holder / r.besov;
    r.besov_fine = besov_norm(uf, m, beta, pf);
    r.holder_fine = holder_norm(uf, m, beta);
    r.ratio_fine = r.holder_fine / r.besov_fine;
    r.drift = std::abs(r.ratio - r.ratio_fine) / r.ratio;
  }
  rep.min_ratio = rep.max_ratio = rep.rows.front().ratio;
  for (const auto& r : rep.rows) {
    rep.min_ratio = std::min({rep.min_ratio, r.ratio, r.ratio_fine});
    rep.max_ratio = std::max({rep.max_ratio, r.ratio, r.ratio_fine});
    rep.max_drift = std::max(rep.max_drift, r.drift);
  }
  rep.pass = rep.min_ratio >= 1.0 / K && rep.max_ratio <= K && rep.max_drift <= rep.max_drift_allowed;
  return rep;
}

}  // namespace lh
