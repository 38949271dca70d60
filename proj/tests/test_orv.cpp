#include <doctest.h>

#include <cmath>

#include "levyholder/error.hpp"
#include "levyholder/orv.hpp"

using namespace lh;

namespace {

std::vector<LevyMeasure> presets() {
  std::vector<LevyMeasure> out;
  out.push_back(LevyMeasure::stable(1, 0.5));
  out.push_back(LevyMeasure::stable(1, 1.0));
  out.push_back(LevyMeasure::stable(1, 1.5));
  const auto nodes = uniform_nodes(1);
  out.emplace_back(RadialProfile::phi_family(1, {0.15, 0.45}), nodes, 1);
  out.emplace_back(RadialProfile::phi_family(2, {0.5, 0.35}), nodes, 1);
  out.emplace_back(RadialProfile::phi_family(3, {0.5, 0.3}), nodes, 1);
  out.emplace_back(RadialProfile::phi_family(4, {0.7, 0.1}), nodes, 1);
  out.emplace_back(RadialProfile::phi_family(5, {0.6}), nodes, 1);
  return out;
}

}  // namespace

TEST_CASE("r1 of a stable measure") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const auto xg = default_x_grid();
  CHECK(estimate_r1(m, 0.5, xg) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(estimate_r1(m, 1.0, xg) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(estimate_r1(LevyMeasure::stable(1, 0.7), 4.0, xg) ==
        doctest::Approx(std::pow(4.0, 0.7)).epsilon(1e-12));
}

TEST_CASE("indices of power laws") {
  const auto r = estimate_indices(LevyMeasure::stable(1, 0.7));
  CHECK(r.p1 == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(r.q1 == doctest::Approx(0.7).epsilon(1e-9));
  CHECK_FALSE(r.warning());

  // δ(r) = 1/r, so w(r) = r.
  std::vector<double> radii, tails;
  for (int k = -9; k <= 5; ++k) {
    radii.push_back(std::pow(10.0, k));
    tails.push_back(std::pow(10.0, -k));
  }
  const auto lin = LevyMeasure::from_json(
      {{"family", "tabulated"}, {"alpha", 1.0}, {"params", {{"radii", radii}, {"tails", tails}}}});
  const auto rl = estimate_indices(lin);
  CHECK(rl.p1 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rl.q1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("phi2 ratio lies between the two power bounds") {
  const LevyMeasure m(RadialProfile::phi_family(2, {0.5, 0.35}), uniform_nodes(1), 1);
  const auto xg = default_x_grid();
  for (double e : {1.0 / 1024, 1.0 / 16, 0.5}) {
    const double r = estimate_r1(m, e, xg);
    CHECK(r >= 0.9 * std::pow(e, 0.7));
    CHECK(r <= 1.1 * std::pow(e, 0.35));
  }
  for (double e : {2.0, 64.0, 1024.0}) {
    const double r = estimate_r1(m, e, xg);
    CHECK(r >= 0.9 * std::pow(e, 0.35));
    CHECK(r <= 1.1 * std::pow(e, 0.7));
  }
}

TEST_CASE("presets: sandwich and regime table") {
  for (const auto& m : presets()) {
    const auto r = estimate_indices(m);
    CAPTURE(m.to_json()["family"].get<std::string>());
    CAPTURE(m.alpha());
    CHECK(r.p1 <= m.alpha() + 0.05);
    CHECK(r.q1 >= m.alpha() - 0.05);
    CHECK(r.ordered);
    CHECK(condition_A_holds(m.alpha(), r.p1, r.q1, 0.05));
  }
}

TEST_CASE("indices are invariant under c nu and r1 is submultiplicative") {
  const LevyMeasure m(RadialProfile::phi_family(3, {0.5, 0.3}), uniform_nodes(1), 1);
  const auto a = estimate_indices(m);
  const auto b = estimate_indices(m.with_mass(7.5));
  CHECK(std::abs(a.p1 - b.p1) < 1e-12);
  CHECK(std::abs(a.q1 - b.q1) < 1e-12);

  // The sampled limsup sits at finite x; phi5 is still pre-asymptotic there.
  const auto xg = default_x_grid();
  const LevyMeasure m5(RadialProfile::phi_family(5, {0.6}), uniform_nodes(1), 1);
  for (double e1 : {0.25, 0.5, 4.0})
    for (double e2 : {0.125, 2.0, 8.0}) {
      CHECK(estimate_r1(m5, e1 * e2, xg) <=
            estimate_r1(m5, e1, xg) * estimate_r1(m5, e2, xg) * 1.02);
    }
}

TEST_CASE("comparison lemma on a stable measure") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const auto xs = log_grid(1e-6, 1.0, 12);
  // ∫_0^x t^{1/2}(t/2) dt/t = x^{3/2}/3 against x^{1/2}·x/2.
  const auto a = check_al1(m, Al1Case::a, 1.0, 0.5, xs);
  CHECK(a.pass);
  CHECK(a.trend == "0");
  for (double r : a.ratio) CHECK(r == doctest::Approx(2.0 / 3.0).epsilon(1e-7));

  // ∫_x^1 t^{-2}(t/2) dt/t = (1/x - 1)/2 against x^{-1}/2.
  const auto b = check_al1(m, Al1Case::b, 1.0, -2.0, xs);
  CHECK(b.pass);
  CHECK(b.trend == "inf");
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(b.ratio[i] == doctest::Approx(1.0 - b.x[i]).epsilon(1e-9));

  const auto c = check_al1(m, Al1Case::c, -1.0, 1.5, xs);
  CHECK(c.pass);
  const auto d = check_al1(m, Al1Case::d, -1.0, 0.5, xs);
  CHECK(d.pass);

  const auto idx = estimate_indices(m);
  CHECK_THROWS_AS(check_al1(m, Al1Case::a, 1.0, -idx.p1, xs, idx.p1, idx.q1), UsageError);
  CHECK_THROWS_AS(check_al1(m, Al1Case::c, 1.0, 2.0, xs), UsageError);
  const auto j = a.to_json();
  for (const char* key : {"case", "beta", "tau", "max_ratio", "trend", "pass"}) CHECK(j.contains(key));
}

TEST_CASE("summability over dyadic radii") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const auto s1 = check_ac1(m, 1.0, 2.0);
  CHECK(s1.converged);
  CHECK(s1.sum == doctest::Approx(1.0).epsilon(1e-12));
  const auto s2 = check_ac1(m, 2.0, 2.0);
  CHECK(s2.sum < s1.sum);
  const LevyMeasure m5(RadialProfile::phi_family(5, {0.6}), uniform_nodes(1), 1);
  CHECK(check_ac1(m5, 1.0, 2.0).converged);
}
