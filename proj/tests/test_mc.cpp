#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyholder/error.hpp"
#include "levyholder/fracops.hpp"
#include "levyholder/mc.hpp"
#include "levyholder/parallel.hpp"

using namespace lh;
using std::numbers::pi;

TEST_CASE("jump radii follow the normalized tail") {
  for (double alpha : {0.6, 1.0, 1.4}) {
    const PathSampler s(LevyMeasure::stable(1, alpha), 1e-3, 7);
    // δ(r)/δ(ε) = (ε/r)^α, so the quantile is ε u^{-1/α}.
    for (double u : {1.0, 0.5, 1e-3, 1e-9}) CHECK(s.radius_quantile(0, u) == doctest::Approx(1e-3 * std::pow(u, -1 / alpha)).epsilon(1e-6));
    std::vector<double> edges{1e-3};
    for (int k = 1; k <= 8; ++k) edges.push_back(1e-3 * std::pow(4.0, k));
    edges.push_back(INFINITY);
    const auto r = jump_tail_chi_square(s, 200000, edges);
    INFO("alpha " << alpha << " chi2 " << r.statistic);
    CHECK(r.p_value > 0.01);
  }
  const LevyMeasure phi(RadialProfile::phi_family(3, {0.5, 0.3}), uniform_nodes(1), 1);
  const PathSampler s(phi, 1e-3, 3);
  const auto r = jump_tail_chi_square(s, 200000, {1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, INFINITY});
  CHECK(r.p_value > 0.01);
  CHECK_THROWS_AS(PathSampler(LevyMeasure::stable(1, 1.4), 1e-9), UsageError);
}

TEST_CASE("Cauchy characteristic function") {
  const PathSampler s(LevyMeasure::stable(1, 1.0), 1e-3, 2024);
  CHECK(s.gaussian_correction());
  CHECK(s.drift()[0] == 0.0);
  const double t = 0.05;
  const std::size_t n = 100000;
  const auto z = s.sample(t, n);
  for (double xi : {1.0, 2.0, 4.0}) {
    double c = 0.0, c2 = 0.0, sn = 0.0, s2 = 0.0;
    for (const auto& p : z) {
      const double a = std::cos(2 * pi * xi * p[0]), b = std::sin(2 * pi * xi * p[0]);
      c += a;
      c2 += a * a;
      sn += b;
      s2 += b * b;
    }
    c /= n;
    sn /= n;
    const double sc = std::sqrt((c2 / n - c * c) / n), ss = std::sqrt((s2 / n - sn * sn) / n);
    INFO("xi " << xi << " cf " << c << " vs " << std::exp(-2 * pi * pi * xi * t));
    CHECK(std::abs(c - std::exp(-2 * pi * pi * xi * t)) < 3 * sc);
    CHECK(std::abs(sn) < 3 * ss);
  }
}

TEST_CASE("small t and symmetry") {
  const PathSampler s(LevyMeasure::stable(1, 1.0), 1e-3, 5);
  // Z_t is Cauchy with scale γ = πt: E(|Z| ∧ 1) = 1 - (2/π)[atan(1/γ) - (γ/2) ln(1 + 1/γ²)].
  double prev = INFINITY;
  for (double t : {1e-1, 1e-2, 1e-3}) {
    const std::size_t n = 20000;
    double m = 0.0, m2 = 0.0;
    for (const auto& p : s.sample(t, n)) {
      const double v = std::min(std::abs(p[0]), 1.0);
      m += v;
      m2 += v * v;
    }
    m /= n;
    const double se = std::sqrt((m2 / n - m * m) / n);
    const double gam = pi * t;
    const double exact = 1 - 2 / pi * (std::atan(1 / gam) - 0.5 * gam * std::log1p(1 / (gam * gam)));
    CHECK(std::abs(m - exact) < 3 * se);
    CHECK(m < prev);
    prev = m;
  }
  // Sign test and a bounded odd statistic for α = 1.4.
  const PathSampler q(LevyMeasure::stable(1, 1.4), 1e-2, 6);
  const std::size_t n = 50000;
  double pos = 0.0, th = 0.0, th2 = 0.0;
  for (const auto& p : q.sample(0.1, n)) {
    pos += p[0] > 0.0;
    th += std::tanh(p[0]);
    th2 += std::tanh(p[0]) * std::tanh(p[0]);
  }
  CHECK(std::abs(pos / n - 0.5) < 3 * 0.5 / std::sqrt(double(n)));
  CHECK(std::abs(th / n) < 3 * std::sqrt(th2 / n / n));
}

TEST_CASE("reproducibility") {
  const PathSampler a(LevyMeasure::stable(1, 1.4), 1e-2, 99);
  const PathSampler b(LevyMeasure::stable(1, 1.4), 1e-2, 99);
  const PathSampler c(LevyMeasure::stable(1, 1.4), 1e-2, 100);
  const auto za = a.sample(0.05, 10000), zb = b.sample(0.05, 10000), zc = c.sample(0.05, 10000);
  CHECK(za == zb);
  CHECK(za != zc);
  set_num_threads(3);
  CHECK(a.sample(0.05, 10000) == za);
  const TorusGrid g(1, 1.0, 32);
  const auto f = GridFunction::harmonic(g, {2, 0, 0});
  const auto e3 = estimate_semigroup(a, f, 0.05, 9000);
  set_num_threads(1);
  const auto e1 = estimate_semigroup(a, f, 0.05, 9000);
  CHECK(e1.mean.values() == e3.mean.values());
  CHECK(e1.std_error == e3.std_error);
}

TEST_CASE("scaled stable measures agree in law") {
  // ν̃_R = (α/2) ν for the 1-d stable preset, so Z̃_t has the law of Z_{αt/2}.
  for (double alpha : {1.0, 1.4}) {
    const auto m = LevyMeasure::stable(1, alpha);
    const double eps = alpha > 1.0 ? 1e-2 : 1e-3;
    const PathSampler base(m, eps, 11);
    const PathSampler scaled(scale_measure(m, 1.0 / 16).measure, eps, 12);
    std::vector<double> x, y;
    for (const auto& p : base.sample(alpha * 0.1 / 2, 20000)) x.push_back(p[0]);
    for (const auto& p : scaled.sample(0.1, 20000)) y.push_back(p[0]);
    const auto ks = ks_two_sample(x, y);
    INFO("alpha " << alpha << " D " << ks.D);
    CHECK(ks.p_value > 0.01);
    // A time mismatch must be detected.
    std::vector<double> z;
    for (const auto& p : base.sample(0.2, 20000)) z.push_back(p[0]);
    CHECK(ks_two_sample(x, z).p_value < 1e-6);
  }
}

TEST_CASE("semigroup estimate against the spectral multiplier") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const PathSampler s(m, 1e-3, 42);
  const TorusGrid g(1, 1.0, 128);
  const auto one = GridFunction::sample(g, [](const Point&) { return cplx(2.5, 0.0); });
  const auto c = estimate_semigroup(s, one, 0.05, 5000);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(c.mean[i] == one[i]);
    CHECK(c.std_error[i] == 0.0);
  }

  const auto f = GridFunction::sample(g, [](const Point& x) {
    return std::exp(std::cos(2 * pi * x[0])) + 0.3 * std::sin(6 * pi * x[0]);
  });
  const auto ref = semigroup(f, m, 0.05);
  const auto est = estimate_semigroup(s, f, 0.05, 20000);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < g.size(); ++i) ok += std::abs(est.mean[i] - ref[i]) <= 3 * est.std_error[i];
  CHECK(ok >= 0.95 * g.size());
  // Standard error scales like n^{-1/2}.
  const auto big = estimate_semigroup(s, f, 0.05, 80000, 1);
  double r = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) r += est.std_error[i] / big.std_error[i];
  CHECK(r / g.size() == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("fractional powers by Monte Carlo") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const PathSampler s(m, 1e-3, 8);
  const TorusGrid g(1, 1.0, 16);
  const auto one = GridFunction::sample(g, [](const Point&) { return cplx(1.0, 0.0); });
  const auto z = frac_power_mc(s, one, 0.5, 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(std::abs(z.value[i]) < 1e-12);

  const auto h = GridFunction::sample(g, [](const Point& x) { return std::cos(2 * pi * x[0]); });
  for (double a : {0.0, 1.0}) {
    const auto mc = frac_power_mc(s, h, 0.5, a);
    const auto ref = frac_power(h, m, a, 0.5);
    for (std::size_t i = 0; i < g.size(); ++i) {
      INFO("a " << a << " x " << g.x(i)[0] << " mc " << mc.value[i] << " ref " << ref[i] << " se " << mc.std_error[i]);
      CHECK(std::abs(mc.value[i] - ref[i]) < 4 * mc.std_error[i] + 2e-2 * ref.sup_norm());
    }
  }
  CHECK_THROWS_AS(frac_power_mc(PathSampler(LevyMeasure(RadialProfile::stable_power(0.7), {{{1.0}, 1.0}}, 1)), h, 0.5, 1.0),
                  UsageError);
}
