#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "levyholder/error.hpp"
#include "levyholder/fracops.hpp"

using namespace lh;
using std::numbers::pi;

namespace {

GridFunction smooth_sample(const TorusGrid& g) {
  return GridFunction::sample(g, [](const Point& x) {
    return std::exp(std::cos(2 * pi * x[0])) + 0.3 * std::sin(6 * pi * x[0]);
  });
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST_CASE("normalizing constants against their defining integrals") {
  boost::math::quadrature::exp_sinh<double> es;
  for (double k : {0.25, 0.5, 0.8}) {
    const double I = es.integrate([&](double t) { return std::expm1(-t) * std::pow(t, -k - 1); });
    CHECK(c_kappa(k) == doctest::Approx(1.0 / I).epsilon(1e-9));
    const double J = es.integrate([&](double t) { return std::pow(t, k - 1) * std::exp(-t); });
    CHECK(c_kappa_prime(k) == doctest::Approx(1.0 / J).epsilon(1e-9));
  }
  // ∫ (e^{-t} - 1) t^{-3/2} dt = -2√π.
  CHECK(c_kappa(0.5) == doctest::Approx(-1.0 / (2 * std::sqrt(pi))).epsilon(1e-12));
  CHECK_THROWS_AS(c_kappa(1.0), UsageError);
}

TEST_CASE("powers on harmonics") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const TorusGrid g(1, 1.0, 128);
  const int k = 5;
  const auto h = GridFunction::harmonic(g, {k, 0, 0});
  const double psi = -2 * pi * pi * k;
  const auto p1 = frac_power(h, m, 0.0, 1.0);
  const auto l1 = generator_power(h, m, 1.0);
  const auto lh = generator_power(h, m, 0.5);
  const auto inv = frac_inverse(h, m, 2.0, 0.7);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(std::abs(p1[i] - (-psi) * h[i]) < 1e-10 * -psi);
    CHECK(std::abs(l1[i] - psi * h[i]) < 1e-10 * -psi);
    CHECK(std::abs(lh[i] + std::sqrt(-psi) * h[i]) < 1e-11);
    CHECK(std::abs(inv[i] - std::pow(2.0 - psi, -0.7) * h[i]) < 1e-13);
  }
  const auto one = GridFunction::sample(g, [](const Point&) { return cplx(3.0, 0.0); });
  const auto c = frac_inverse(one, m, 1.0, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - 3.0) < 1e-13);
}

TEST_CASE("composition laws") {
  const auto m = LevyMeasure::stable(1, 1.4);
  const TorusGrid g(1, 1.0, 128);
  const auto f = smooth_sample(g);
  const double tol = 1e-12 * frac_power(f, m, 1.0, 1.0).sup_norm();

  CHECK(max_diff(frac_power(frac_power(f, m, 0.0, 0.5), m, 0.0, 0.5), frac_power(f, m, 0.0, 1.0)) < tol);
  CHECK(max_diff(frac_power(f, m, 0.0, 1.0), 0.0 * f - apply_generator(f, m)) < tol);
  for (auto [k, s] : {std::pair{0.3, 0.4}, {1.5, -0.7}, {-0.2, -0.6}, {2.0, -2.0}}) {
    const auto lhs = frac_power(frac_power(f, m, 1.0, k), m, 1.0, s);
    const auto rhs = frac_power(f, m, 1.0, k + s);
    CHECK(max_diff(lhs, rhs) < 1e-12 * std::max(1.0, rhs.sup_norm()));
  }
  // [κ] + s split: (aI - L)^{1.3} = (aI - L)(aI - L)^{0.3}.
  const auto split = frac_power(frac_power(f, m, 1.0, 0.3), m, 1.0, 1.0);
  CHECK(max_diff(split, frac_power(f, m, 1.0, 1.3)) < tol);
  for (double a : {1.0, 0.5}) {
    const auto round = frac_power(frac_inverse(f, m, a, 0.5), m, a, 0.5);
    CHECK(max_diff(round, f) < 1e-10);
  }
  // Commutation with the spectral derivative.
  auto deriv = [&](const GridFunction& u) {
    return apply_multiplier(u, [&](std::size_t i) { return cplx(0.0, 2 * pi * g.xi(i)[0]); });
  };
  CHECK(max_diff(deriv(frac_power(f, m, 1.0, 0.6)), frac_power(deriv(f), m, 1.0, 0.6)) < 1e-10);
  // κ → 1 continuity.
  const auto target = frac_power(f, m, 1.0, 1.0);
  double prev = INFINITY;
  for (double k : {0.9, 0.99, 0.999}) {
    const double d = max_diff(frac_power(f, m, 1.0, k), target);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("domain errors") {
  const TorusGrid g(1, 1.0, 64);
  const LevyMeasure one_sided(RadialProfile::stable_power(0.7), {{{1.0}, 1.0}}, 1);
  const auto f = smooth_sample(g);
  CHECK_THROWS_AS(frac_power(f, one_sided, 1.0, 0.5), UsageError);
  CHECK_NOTHROW(frac_power(f, one_sided, 1.0, 2.0));
  CHECK_THROWS_AS(frac_inverse(f, LevyMeasure::stable(1, 1.0), 0.0, 0.5), UsageError);
  CHECK_THROWS_AS(frac_power(f, LevyMeasure::stable(1, 1.0), 0.0, -0.5), DomainError);
  const auto h = GridFunction::harmonic(g, {2, 0, 0});
  CHECK_NOTHROW(frac_power(h, LevyMeasure::stable(1, 1.0), 0.0, -0.5));
}

TEST_CASE("time-integral forms agree with the multipliers") {
  const TorusGrid g(1, 1.0, 128);
  const auto f = smooth_sample(g);
  for (const auto& m : {LevyMeasure::stable(1, 1.0), LevyMeasure(RadialProfile::phi_family(3, {0.4, 0.3}), uniform_nodes(1), 1)}) {
    for (double a : {0.0, 1.0}) {
      for (double k : {0.3, 0.5, 0.8}) {
        const auto ref = frac_power(f, m, a, k);
        CHECK(max_diff(frac_power_time_quadrature(f, m, a, k), ref) < 1e-4 * ref.sup_norm());
      }
    }
    for (double k : {0.5, 1.0, 1.7}) {
      const auto ref = frac_inverse(f, m, 1.0, k);
      CHECK(max_diff(frac_inverse_time_quadrature(f, m, 1.0, k), ref) < 1e-4 * ref.sup_norm());
    }
  }
}

TEST_CASE("fractional norm equivalence") {
  const TorusGrid g(1, 1.0, 256);
  const auto m = LevyMeasure::stable(1, 1.0);
  const auto rep = equiv_frac_norms(default_corpus(1), m, 0.3, 0.5, g);
  INFO(rep.to_json().dump());
  CHECK(rep.spread <= 10.0);
  CHECK(rep.lemma_drift <= 0.1);
  CHECK(rep.pass);

  // cos 2πx sits in block 0 with φ̂_0 = 1 and w(1) = 1/2, ψ(1) = -2π²:
  //   a = 1 + 2π² 2^β, b = (1 + 2π²) 2^β, c = 2^{β+κ} for κ = 1.
  const auto one = equiv_frac_norms({default_corpus(1)[1]}, m, 0.5, 1.0, g);
  const double b2 = std::sqrt(2.0);
  CHECK(one.rows[0].norm_a == doctest::Approx(1 + 2 * pi * pi * b2).epsilon(1e-10));
  CHECK(one.rows[0].norm_b == doctest::Approx((1 + 2 * pi * pi) * b2).epsilon(1e-10));
  CHECK(one.rows[0].norm_c == doctest::Approx(2 * b2).epsilon(1e-12));
  CHECK(one.spread == doctest::Approx((1 + 2 * pi * pi) / 2).epsilon(1e-10));

  CHECK_THROWS_AS(equiv_frac_norms(default_corpus(1), LevyMeasure(RadialProfile::stable_power(0.7), {{{1.0}, 1.0}}, 1), 0.3, 0.5, g),
                  UsageError);
}

TEST_CASE("decay of rescaled semigroups") {
  const TorusGrid g(1, 1.0, 256);
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.02 * i);
  const std::vector<double> Rs{1.0, 0.25, 1.0 / 16, 1.0 / 64};
  const auto rep = decay_test(LevyMeasure::stable(1, 1.0), Rs, ts, g);
  INFO(rep.to_json().dump());
  CHECK(rep.pass);
  CHECK(rep.rate_spread <= 0.1);
  // t = 0 point: ∫|g|.
  const auto bump = annulus_bump(g, 2.0, 8.0);
  CHECK(rep.rows[0].l1[0] == doctest::Approx(bump.l1_norm()).epsilon(1e-14));

  // Every mode of g has Re ψ̃ <= -μ, μ = π²·lo for ν̃_R = ν/2, so c >= μ.
  const auto ph = decay_test(LevyMeasure(RadialProfile::phi_family(4, {0.7, 0.1}), uniform_nodes(1), 1), Rs, ts, g);
  INFO(ph.to_json().dump());
  CHECK(ph.pass);
  for (const auto& r : rep.rows) CHECK(r.c >= pi * pi * 2.0 * (1 - 1e-3));
}
