#include <doctest.h>

#include <cmath>
#include <numbers>

#include "levyholder/error.hpp"
#include "levyholder/lpnorms.hpp"

using namespace lh;
using std::numbers::pi;

namespace {

// 1-d Cauchy measure: δ(r) = 2/r, so w(r) = r/2.
double cauchy_w(double r) { return r / 2.0; }

}  // namespace

TEST_CASE("partition of unity") {
  const TorusGrid g(1, 1.0, 256);
  const Partition p(2.0, g);
  CHECK(p.j_max() == 6);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double s = 0.0;
    for (int j = 0; j <= p.j_max(); ++j) s += p.block_symbol(j, g.xi_norm(i));
    CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(p.block_symbol(3, 2.0) == 0.0);
  CHECK(p.block_symbol(3, 8.0) == 1.0);
  CHECK(p.block_symbol(0, 0.5) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(Partition(1.0, g), UsageError);
  CHECK(Partition(2.0, TorusGrid(1, 1.0, 512)).j_max() == 7);
}

TEST_CASE("besov norm closed forms") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const TorusGrid g(1, 1.0, 256);
  const Partition p(2.0, g);
  const auto one = GridFunction::sample(g, [](const Point&) { return cplx(1.0, 0.0); });
  for (double beta : {0.2, 0.4, 0.9}) CHECK(besov_norm(one, m, beta, p) == doctest::Approx(std::pow(2.0, beta)).epsilon(1e-12));
  CHECK(besov_norm(0.0 * one, m, 0.4, p) == 0.0);

  for (int k : {1, 3, 5, 12, 40}) {
    const auto h = GridFunction::harmonic(g, {k, 0, 0});
    const double beta = 0.4;
    double expect = 0.0;
    for (int j = 0; j <= p.j_max(); ++j) {
      expect = std::max(expect, std::pow(cauchy_w(std::pow(2.0, -j)), -beta) * p.block_symbol(j, k));
    }
    CHECK(besov_norm(h, m, beta, p) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("holder norm closed forms") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const int M = 256;
  const TorusGrid g(1, 1.0, M);
  const auto one = GridFunction::sample(g, [](const Point&) { return cplx(3.0, 0.0); });
  CHECK(holder_norm(one, m, 0.4) == 3.0);

  // max_x |cos 2π(x+h) - cos 2πx| = 2 sin(πh) max_x |sin(2πx + πh)|; on the grid the
  // second factor reaches 1 for even shifts and cos(π/M) for odd ones.
  const auto c = GridFunction::sample(g, [](const Point& x) { return std::cos(2 * pi * x[0]); });
  for (double beta : {0.3, 0.7}) {
    double semi = 0.0;
    for (int s = 1; s <= M / 4; ++s) {
      const double h = double(s) / M;
      const double peak = s % 2 == 0 ? 1.0 : std::cos(pi / M);
      semi = std::max(semi, 2 * std::sin(pi * h) * peak / std::pow(cauchy_w(h), beta));
    }
    CHECK(holder_norm(c, m, beta) == doctest::Approx(1.0 + semi).epsilon(1e-12));
    CHECK(holder_norm(c.rolled({37, 0, 0}), m, beta) == holder_norm(c, m, beta));
  }

  const TorusGrid g2(2, 1.0, 32);
  const auto sh = default_shifts(g2);
  CHECK(sh.size() == 2 * 8 + 2 * 5);
}

TEST_CASE("block structure on the corpus") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const TorusGrid g(1, 1.0, 256);
  const Partition p(2.0, g);
  const auto corpus = default_corpus(1);
  CHECK(corpus.size() == 12);
  for (const auto& e : corpus) {
    const auto u = GridFunction::sample(g, e.f);
    const auto d = decompose(u, p, m, 0.4);
    const auto back = d.sum();
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(back[i] - u[i]) < 1e-10);

    // u_j * φ_k = 0 for |j - k| >= 2.
    for (int j = 0; j <= p.j_max(); ++j) {
      for (int k = 0; k <= p.j_max(); ++k) {
        if (std::abs(j - k) < 2) continue;
        const auto jk = apply_multiplier(d.blocks[j], [&](std::size_t i) { return cplx(p.block_symbol(k, g.xi_norm(i)), 0.0); });
        CHECK(jk.sup_norm() < 1e-13);
      }
    }

    // |u|_0 <= Σ_j w(N^{-j})^β |u|_{β,∞}.
    const double beta = 0.4;
    double C = 0.0;
    for (int j = 0; j <= p.j_max(); ++j) C += std::pow(m.w(std::pow(2.0, -j)), beta);
    CHECK(u.sup_norm() <= C * besov_norm(u, m, beta, p) * (1 + 1e-12));

    const double c1 = interpolation_constant(u, m, 0.6, 0.3, 0.1, p);
    const double c2 = interpolation_constant(u, m, 0.6, 0.3, 0.01, p);
    CHECK(std::isfinite(c1));
    CHECK(c2 >= c1);
  }
}

TEST_CASE("truncation") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const TorusGrid g(1, 1.0, 256);
  const Partition p(2.0, g);
  const auto h = GridFunction::harmonic(g, {8, 0, 0});
  CHECK(truncate(h, p, 2).sup_norm() < 1e-14);
  CHECK_THROWS_AS(truncate(h, p, 7), UsageError);

  for (const auto& e : default_corpus(1)) {
    const auto u = GridFunction::sample(g, e.f);
    const auto full = truncate(u, p, p.j_max());
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(std::abs(full[i] - u[i]) < 1e-10);
    // |u_n - u|_{β',∞} decreases in n.
    double prev = INFINITY;
    for (int n = 0; n < p.j_max(); ++n) {
      const double err = besov_norm(u - truncate(u, p, n), m, 0.2, p);
      CHECK(err <= prev * (1 + 1e-12) + 1e-13);
      prev = err;
    }
  }
}

TEST_CASE("norm equivalence report") {
  const auto m = LevyMeasure::stable(1, 1.0);
  const TorusGrid g(1, 1.0, 256);
  const auto rep = equivalence_report(default_corpus(1), m, 0.4, 1.0, g);
  CHECK(rep.rows.size() == 12);
  CHECK(rep.pass);
  for (const auto& r : rep.rows) {
    CHECK(r.ratio > 0.0);
    CHECK(r.drift <= 0.1);
  }
  const auto single = equivalence_report({default_corpus(1).front()}, m, 0.4, 1.0, g);
  CHECK(single.rows[0].besov > 0.0);
  CHECK(std::isfinite(single.rows[0].ratio));
  CHECK_THROWS_AS(equivalence_report(default_corpus(1), m, 1.0, 1.0, g), UsageError);

  const TorusGrid g2(2, 1.0, 256);
  const auto rep2 = equivalence_report(default_corpus(2), LevyMeasure::stable(2, 1.0), 0.4, 1.0, g2);
  INFO(rep2.to_json().dump());
  CHECK(rep2.pass);
}
