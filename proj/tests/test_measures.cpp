#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levyholder/error.hpp"
#include "levyholder/measures.hpp"

using namespace lh;

namespace {

// Oracle: ∫_r^∞ g(s) ds by exp-sinh, independent of the library's log panels.
template <class G>
double oracle_tail_integral(G g, double r) {
  boost::math::quadrature::exp_sinh<double> es;
  return es.integrate(g, r, std::numeric_limits<double>::infinity());
}

LevyMeasure phi_measure(int variant, std::vector<double> q) {
  return LevyMeasure(RadialProfile::phi_family(variant, q), uniform_nodes(1), 1);
}

}  // namespace

TEST_CASE("stable 1-d tail and w") {
  const auto m = LevyMeasure::stable(1, 1.0);
  CHECK(m.tail(1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.w(1.0) == doctest::Approx(0.5).epsilon(1e-14));
  double prev = m.tail(1.0);
  for (double r = 2.0; r < 1e6; r *= 3.0) {
    const double t = m.tail(r);
    CHECK(t < prev);
    prev = t;
  }
  const auto m7 = LevyMeasure::stable(1, 0.7);
  for (double r : {1e-5, 0.03, 1.0, 40.0}) {
    CHECK(m7.w(r) == doctest::Approx(0.7 * std::pow(r, 0.7) / 2.0).epsilon(1e-13));
    CHECK(m7.w(r) * m7.tail(r) == doctest::Approx(1.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(m.tail(0.0), DomainError);
  CHECK_THROWS_AS(m.tail(-1.0), DomainError);
}

TEST_CASE("phi-family tails match direct quadrature of the density") {
  for (int v = 1; v <= 5; ++v) {
    std::vector<double> q;
    switch (v) {
      case 1: q = {0.15, 0.45}; break;
      case 2: q = {0.5, 0.35}; break;
      case 3: q = {0.5, 0.3}; break;
      case 4: q = {0.7, 0.1}; break;
      case 5: q = {0.6}; break;
    }
    const auto m = phi_measure(v, q);
    const auto& prof = m.radial();
    for (double r : {1e-4, 1e-2, 0.5, 3.0}) {
      const double expect =
          2.0 * oracle_tail_integral([&](double s) { return prof.phi(1.0 / (s * s)) / s; }, r);
      CAPTURE(v);
      CAPTURE(r);
      CHECK(m.tail(r) == doctest::Approx(expect).epsilon(1e-8));
    }
  }
}

TEST_CASE("phi3 tail is comparable to phi(r^-2)") {
  const auto m = phi_measure(3, {0.5, 0.3});
  double lo = 1e300, hi = 0.0;
  for (double r = 1e-4; r <= 1.0; r *= 1.5) {
    const double ratio = m.tail(r) / m.radial().phi(1.0 / (r * r));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(lo > 0.0);
  CHECK(hi / lo < 4.0);
}

TEST_CASE("scaled measure tail identity") {
  const auto base = phi_measure(2, {0.5, 0.35});
  DensityModulation dm{{0.3}, 2.0};
  const LevyMeasure mod(RadialProfile::stable_power(0.8), uniform_nodes(2, 8), 2, std::nullopt, dm);
  int pairs = 0;
  for (const LevyMeasure* m : {&base, &mod}) {
    for (double R : {1.0, 0.3, 1e-2, 1e-5}) {
      const auto s = scale_measure(*m, R);
      CHECK(s.measure.tail(1.0) == doctest::Approx(1.0).epsilon(1e-12));
      for (double rho : {0.01, 0.7, 5.0}) {
        CHECK(s.measure.tail(rho) == doctest::Approx(m->w(R) * m->tail(R * rho)).epsilon(1e-10));
        ++pairs;
      }
    }
  }
  CHECK(pairs >= 20);
}

TEST_CASE("modulated tail agrees with brute-force quadrature") {
  DensityModulation dm{{0.25}, 1.5};
  const LevyMeasure m(RadialProfile::stable_power(0.5), uniform_nodes(1), 1, std::nullopt, dm);
  for (double r : {1e-3, 0.2, 7.0}) {
    auto dens = [&](double s) {
      const double a = 0.25 + 0.75 * 0.5 * (1.0 + std::sin(1.5 * std::log(s)));
      return a * std::pow(s, -1.5);
    };
    // Oracle on ln s, where the oscillation is regular.
    boost::math::quadrature::tanh_sinh<double> ts;
    const double L = 60.0;
    const double body = ts.integrate([&](double t) { return std::exp(t) * dens(std::exp(t)); },
                                     std::log(r), std::log(r) + L);
    CHECK(m.tail(r) == doctest::Approx(2.0 * body).epsilon(1e-9));
  }
}

TEST_CASE("scaled moments of stable measures") {
  const auto m1 = LevyMeasure::stable(1, 1.0);
  for (double R : {1.0, 0.1, 1e-3}) {
    const auto s = scale_measure(m1, R);
    CHECK(truncated_second_moment(s.measure) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(scale_measure(m1, 1.0).measure.tail(1.0) == doctest::Approx(1.0));
  const auto mh = LevyMeasure::stable(1, 0.5);
  // (α/2)(2/(1-α) + 2/α) = 2 for α = 1/2.
  for (double R : {1.0, 0.1, 0.01}) {
    CHECK(scaled_moment(scale_measure(mh, R), MomentKind::m1_cap) ==
          doctest::Approx(2.0).epsilon(1e-6));
  }
  CHECK(regime_moment(0.5) == MomentKind::m1_cap);
  CHECK(regime_moment(1.0) == MomentKind::m2_cap);
  CHECK(regime_moment(1.5) == MomentKind::m2_m1);
  const auto m15 = LevyMeasure::stable(1, 1.5);
  // (α/2)(2/(2-α) + 2/(α-1)) = 0.75 (4 + 4) = 6.
  CHECK(scaled_moment(scale_measure(m15, 0.01), MomentKind::m2_m1) ==
        doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("scaled moments of phi presets are bounded as R -> 0") {
  const auto m = phi_measure(4, {0.7, 0.1});
  const auto kind = regime_moment(m.alpha());
  double max10 = 0.0, max20 = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double v = scaled_moment(scale_measure(m, std::ldexp(1.0, -k)), kind);
    if (k <= 10) max10 = std::max(max10, v);
    max20 = std::max(max20, v);
  }
  CHECK(max20 <= 1.05 * max10);
}

TEST_CASE("condition B") {
  const std::vector<double> Rs{1.0, 0.5, 1e-2, 1e-4};
  const auto m1 = LevyMeasure::stable(1, 1.0);
  const auto rep = check_condition_B(m1, Rs, direction_grid(1, 1));
  CHECK(rep.inf_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.pass);

  const auto iso = LevyMeasure::stable(2, 0.8);
  const auto dirs = direction_grid(2, 16);
  const double ref = directional_second_moment(iso, dirs[0]);
  for (const auto& d : dirs) CHECK(directional_second_moment(iso, d) == doctest::Approx(ref).epsilon(1e-10));

  DensityModulation dm{{0.2}, 1.0};
  const LevyMeasure mod(RadialProfile::phi_family(2, {0.5, 0.35}), uniform_nodes(2, 16), 2,
                        std::nullopt, dm);
  const auto repm = check_condition_B(mod, Rs, dirs);
  double inf_total = 1e300;
  for (double R : Rs) inf_total = std::min(inf_total, truncated_second_moment(scale_measure(mod, R).measure));
  CHECK(repm.inf_value >= angular_nondegeneracy(mod, dirs) * inf_total);
  CHECK_THROWS_AS(check_condition_B(m1, std::vector<double>{}, direction_grid(1, 1)), UsageError);
}

TEST_CASE("condition C") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const auto c = check_condition_C(m, 1.0, 3.0);
  CHECK(c.converged);
  CHECK(c.integral == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_FALSE(check_condition_C(m, 1.0, 2.0).converged);
  const auto p1 = phi_measure(1, {0.15, 0.45});
  const auto cp = check_condition_C(p1, 0.9, 3.0);
  CHECK(cp.converged);
  CHECK(std::isfinite(cp.integral));
}

TEST_CASE("tabulated profile reproduces a power law") {
  std::vector<double> radii, tails;
  for (int k = -8; k <= 4; ++k) {
    radii.push_back(std::pow(10.0, k));
    tails.push_back(2.0 * std::pow(10.0, -0.6 * k) / 0.6);
  }
  json cfg{{"family", "tabulated"}, {"alpha", 0.6}, {"dim", 1}, {"params", {{"radii", radii}, {"tails", tails}}}};
  const auto m = LevyMeasure::from_json(cfg);
  const auto s = LevyMeasure::stable(1, 0.6);
  for (double r : {1e-10, 3e-5, 0.7, 123.0, 1e6}) CHECK(m.tail(r) == doctest::Approx(s.tail(r)).epsilon(1e-10));
  std::swap(tails[2], tails[3]);
  cfg["params"]["tails"] = tails;
  CHECK_THROWS_AS(LevyMeasure::from_json(cfg), UsageError);
}

TEST_CASE("structural checks and JSON") {
  std::vector<AngularNode> one_sided{{{1.0}, 1.0}};
  CHECK_THROWS_AS(LevyMeasure(RadialProfile::stable_power(1.0), one_sided, 1), UsageError);
  CHECK_NOTHROW(LevyMeasure(RadialProfile::stable_power(0.5), one_sided, 1));
  CHECK_FALSE(LevyMeasure(RadialProfile::stable_power(0.5), one_sided, 1).symmetric());
  CHECK(LevyMeasure::stable(3, 1.0).symmetric());
  CHECK_THROWS_AS(LevyMeasure(RadialProfile::stable_power(1.5), one_sided, 1, 1.2), UsageError);

  double sphere = 0.0;
  for (const auto& n : uniform_nodes(3)) sphere += n.weight;
  CHECK(sphere == doctest::Approx(4.0 * M_PI));

  const json cfg{{"family", "phi2"}, {"dim", 2}, {"params", {{"a", 0.5}, {"b", 0.35}}},
                 {"angular", {{"kind", "uniform"}, {"count", 8}}}};
  const auto m = LevyMeasure::from_json(cfg);
  CHECK(m.alpha() == doctest::Approx(0.7));
  const auto back = LevyMeasure::from_json(m.to_json());
  CHECK(back.fingerprint() == m.fingerprint());
  CHECK(back.tail(0.3) == doctest::Approx(m.tail(0.3)).epsilon(1e-14));
  CHECK(m.scaled(0.5).fingerprint() != m.fingerprint());
  CHECK_THROWS_AS(LevyMeasure::from_json(json{{"family", "gamma"}}), UsageError);
  CHECK_THROWS_AS(LevyMeasure::from_json(json{{"family", "stable"}, {"alpha", 2.5}}), UsageError);
}

TEST_CASE("condition A table") {
  CHECK(condition_A_holds(0.5, 0.45, 0.55));
  CHECK_FALSE(condition_A_holds(0.5, 0.45, 1.2));
  CHECK(condition_A_holds(1.0, 1.0, 1.0));
  CHECK_FALSE(condition_A_holds(1.5, 0.9, 1.5));
}
