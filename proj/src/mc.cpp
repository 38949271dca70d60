#include "levyholder/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include "levyholder/error.hpp"
#include "levyholder/fracops.hpp"
#include "levyholder/parallel.hpp"
#include "levyholder/quadrature.hpp"

namespace lh {

namespace {

using std::numbers::pi;

constexpr double kMaxIntensity = 1e9;
constexpr double kTableFloor = 1e-14;  // smallest tabulated δ(r)/δ(ε)

// Signed dim-vector Σ_i w_i ∫_{a<|y|<=b} |y| dν_i.
Point first_moment(const LevyMeasure& m, double a, double b) {
  Point v{};
  if (!(b > a)) return v;
  const auto nodes = m.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double mom = m.node_moment(i, 1.0, a, b);
    for (int k = 0; k < m.dim(); ++k) v[k] += nodes[i].direction[k] * mom;
  }
  return v;
}

double find_radius_with_tail(const LevyMeasure& m, double target, double lo) {
  // ln δ(e^x) - ln target is decreasing in x.
  auto g = [&](double x) { return std::log(m.tail(std::exp(x))) - std::log(target); };
  double a = std::log(lo), b = a + 1.0;
  while (g(b) > 0.0) {
    a = b;
    b += 2.0;
    if (b > 80.0) throw NumericError("tail never drops below the requested level");
  }
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, a, b, boost::math::tools::eps_tolerance<double>(40), iters);
  return std::exp(0.5 * (r.first + r.second));
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(block), hi(block)};
  return std::mt19937_64(seq);
}

PathSampler::PathSampler(LevyMeasure m, double eps, std::uint64_t seed, std::optional<bool> gaussian_correction)
    : m_(std::move(m)), eps_(eps), seed_(seed), gaussian_(gaussian_correction.value_or(m_.alpha() >= 1.0)) {
  if (!(eps_ > 0.0)) throw UsageError("jump cutoff eps must be positive");
  intensity_ = m_.tail(eps_);
  if (!std::isfinite(intensity_) || intensity_ > kMaxIntensity)
    throw UsageError("jump intensity δ(eps) = " + std::to_string(intensity_) + " is too large; use a larger eps");
  if (!(intensity_ > 0.0)) throw UsageError("measure has no mass beyond eps");

  const auto nodes = m_.nodes();
  const int d = m_.dim();

  // Node choice and radial tables. Unmodulated nodes share one radial shape.
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    acc += m_.node_tail(i, eps_);
    node_cdf_.push_back(acc);
  }
  for (double& c : node_cdf_) c /= acc;
  const std::size_t tables = m_.modulated() ? nodes.size() : 1;
  for (std::size_t i = 0; i < nodes.size(); ++i) table_of_.push_back(m_.modulated() ? i : 0);
  for (std::size_t k = 0; k < tables; ++k) {
    auto q = [&](double r) { return m_.node_tail(k, r) / m_.node_tail(k, eps_); };
    double r_hi = 10.0 * eps_;
    while (q(r_hi) > kTableFloor && r_hi < 1e15 * eps_) r_hi *= 10.0;
    std::vector<double> lr(kKnots), lq(kKnots);
    const double a = std::log(eps_), b = std::log(r_hi);
    for (int j = 0; j < kKnots; ++j) {
      lr[j] = a + (b - a) * j / (kKnots - 1);
      lq[j] = j == 0 ? 0.0 : std::log(q(std::exp(lr[j])));
    }
    log_r_.push_back(std::move(lr));
    log_q_.push_back(std::move(lq));
  }

  // Drift: -∫_{|y|>ε} χ y dν + ∫_{|y|<=ε} (1 - χ) y dν.
  if (!m_.symmetric()) {
    Point v{};
    switch (m_.compensation()) {
      case Compensation::none:
        v = first_moment(m_, 0.0, eps_);
        break;
      case Compensation::unit_ball: {
        const Point in = first_moment(m_, eps_, 1.0);
        const Point out = first_moment(m_, 1.0, eps_);
        for (int k = 0; k < d; ++k) v[k] = out[k] - in[k];
        break;
      }
      case Compensation::full: {
        const Point big = first_moment(m_, eps_, std::numeric_limits<double>::infinity());
        for (int k = 0; k < d; ++k) v[k] = -big[k];
        break;
      }
    }
    drift_ = v;
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double mom = m_.node_moment(i, 2.0, 0.0, eps_);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) cov_[3 * r + c] += nodes[i].direction[r] * nodes[i].direction[c] * mom;
  }
  Eigen::MatrixXd C(d, d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) C(r, c) = cov_[3 * r + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd S = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) root_[3 * r + c] = S(r, c);
}

double PathSampler::radius_quantile(std::size_t node, double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw DomainError("quantile level must lie in (0, 1]");
  const auto& lr = log_r_[table_of_.at(node)];
  const auto& lq = log_q_[table_of_.at(node)];
  const double y = std::log(u);
  const std::size_t n = lq.size();
  if (y <= lq[n - 1]) {
    const double slope = (lq[n - 1] - lq[n - 2]) / (lr[n - 1] - lr[n - 2]);
    return std::exp(lr[n - 1] + (y - lq[n - 1]) / slope);
  }
  // lq is decreasing; first knot with lq < y.
  const auto it = std::upper_bound(lq.begin(), lq.end(), y, std::greater<double>());
  const std::size_t j = static_cast<std::size_t>(it - lq.begin());
  if (j == 0) return eps_;
  const double th = (y - lq[j - 1]) / (lq[j] - lq[j - 1]);
  return std::exp(lr[j - 1] + th * (lr[j] - lr[j - 1]));
}

Point PathSampler::sample_jump(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const double v = U(rng);
  const std::size_t node =
      std::min<std::size_t>(std::upper_bound(node_cdf_.begin(), node_cdf_.end(), v) - node_cdf_.begin(),
                            node_cdf_.size() - 1);
  const double r = radius_quantile(node, 1.0 - U(rng));
  const auto& dir = m_.nodes()[node].direction;
  Point y{};
  for (int k = 0; k < m_.dim(); ++k) y[k] = r * dir[k];
  return y;
}

Point PathSampler::sample_endpoint(double t, std::mt19937_64& rng) const {
  const int d = m_.dim();
  Point z{};
  for (int k = 0; k < d; ++k) z[k] = t * drift_[k];
  std::poisson_distribution<long long> P(intensity_ * t);
  const long long n = P(rng);
  for (long long j = 0; j < n; ++j) {
    const Point y = sample_jump(rng);
    for (int k = 0; k < d; ++k) z[k] += y[k];
  }
  if (gaussian_) {
    std::normal_distribution<double> N(0.0, 1.0);
    std::array<double, 3> g{};
    for (int k = 0; k < d; ++k) g[k] = N(rng);
    const double s = std::sqrt(t);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) z[r] += s * root_[3 * r + c] * g[c];
  }
  return z;
}

std::vector<Point> PathSampler::sample(double t, std::size_t n, std::uint64_t stream) const {
  if (!(t > 0.0)) throw UsageError("sample: t must be positive");
  if (n == 0) throw UsageError("sample: need at least one path");
  std::vector<Point> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    auto rng = make_rng(seed_, stream, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) out[p] = sample_endpoint(t, rng);
  });
  return out;
}

std::vector<double> PathSampler::sample_jump_radii(std::size_t n, std::uint64_t stream) const {
  std::vector<double> out(n);
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    auto rng = make_rng(seed_, stream, b);
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t p = b * kBlock; p < end; ++p) {
      const Point y = sample_jump(rng);
      out[p] = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    }
  });
  return out;
}

SemigroupEstimate estimate_semigroup(const PathSampler& s, const GridFunction& f, double t, std::size_t n_paths,
                                     std::uint64_t stream) {
  if (!(t > 0.0)) throw UsageError("estimate_semigroup: t must be positive");
  if (n_paths < 2) throw UsageError("estimate_semigroup: need at least two paths");
  const TorusGrid& g = f.grid();
  if (g.dim != s.measure().dim()) throw UsageError("grid and measure dimensions differ");
  const GridFunction F = f.space() == Space::frequency ? f : f.to_frequency();
  const std::size_t npts = g.size();

  double fmax = 0.0;
  for (std::size_t i = 0; i < npts; ++i) fmax = std::max(fmax, std::abs(F[i]));
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < npts; ++i)
    if (std::abs(F[i]) > 1e-14 * fmax) active.push_back(i);
  const bool direct = active.size() * npts <= (std::size_t{1} << 22);

  // Basis e^{i2πξ_k·x_j} for the direct sum.
  std::vector<cplx> basis;
  if (direct) {
    basis.resize(active.size() * npts);
    parallel_for(active.size(), [&](std::size_t a) {
      const Point xi = g.xi(active[a]);
      for (std::size_t j = 0; j < npts; ++j) {
        const Point x = g.x(j);
        basis[a * npts + j] = std::polar(1.0, 2 * pi * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]));
      }
    });
  }
  auto shifted = [&](const Point& z, std::vector<cplx>& out, std::vector<cplx>& work) {
    if (direct) {
      std::fill(out.begin(), out.end(), cplx(0.0));
      for (std::size_t a = 0; a < active.size(); ++a) {
        const Point xi = g.xi(active[a]);
        const double ph = 2 * pi * (xi[0] * z[0] + xi[1] * z[1] + xi[2] * z[2]);
        const cplx c = F[active[a]] * (ph == 0.0 ? cplx(1.0, 0.0) : std::polar(1.0, ph));
        const cplx* e = &basis[a * npts];
        for (std::size_t j = 0; j < npts; ++j) out[j] += c * e[j];
      }
    } else {
      std::fill(work.begin(), work.end(), cplx(0.0));
      for (std::size_t a : active) {
        const Point xi = g.xi(a);
        const double ph = 2 * pi * (xi[0] * z[0] + xi[1] * z[1] + xi[2] * z[2]);
        work[a] = F[a] * (ph == 0.0 ? cplx(1.0, 0.0) : std::polar(1.0, ph));
      }
      fft_inverse(g, work.data(), out.data());
    }
  };

  std::vector<cplx> base(npts), scratch(npts);
  shifted(Point{}, base, scratch);

  const std::size_t blocks = (n_paths + PathSampler::kBlock - 1) / PathSampler::kBlock;
  std::vector<std::vector<cplx>> s1(blocks, std::vector<cplx>(npts));
  std::vector<std::vector<double>> s2(blocks, std::vector<double>(npts));
  parallel_for(blocks, [&](std::size_t b) {
    auto rng = make_rng(s.seed(), stream, b);
    std::vector<cplx> val(npts), work(npts);
    const std::size_t end = std::min(n_paths, (b + 1) * PathSampler::kBlock);
    for (std::size_t p = b * PathSampler::kBlock; p < end; ++p) {
      shifted(s.sample_endpoint(t, rng), val, work);
      for (std::size_t j = 0; j < npts; ++j) {
        const cplx dv = val[j] - base[j];
        s1[b][j] += dv;
        s2[b][j] += std::norm(dv);
      }
    }
  });

  SemigroupEstimate est;
  est.n_paths = n_paths;
  est.mean = GridFunction(g, Space::physical);
  est.std_error.assign(npts, 0.0);
  const double n = static_cast<double>(n_paths);
  for (std::size_t j = 0; j < npts; ++j) {
    cplx a = 0.0;
    double q = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
      a += s1[b][j];
      q += s2[b][j];
    }
    const cplx mean = a / n;
    est.mean[j] = base[j] + mean;
    const double var = std::max(0.0, (q - n * std::norm(mean)) / (n - 1.0));
    est.std_error[j] = std::sqrt(var / n);
  }
  return est;
}

FracPowerMC frac_power_mc(const PathSampler& s, const GridFunction& f, double kappa, double a,
                          const FracPowerMCOptions& opt) {
  const LevyMeasure& m = s.measure();
  if (!m.symmetric()) throw UsageError("frac_power_mc needs a symmetric measure");
  if (!(kappa > 0.0 && kappa < 1.0)) throw UsageError("frac_power_mc needs kappa in (0,1)");
  if (!(a >= 0.0)) throw UsageError("frac_power_mc needs a >= 0");
  if (!(opt.t0 > 0.0 && opt.T_cut > opt.t0)) throw UsageError("frac_power_mc needs 0 < t0 < T_cut");
  const GridFunction u = f.space() == Space::physical ? f : f.to_physical();
  const TorusGrid& g = u.grid();
  const std::size_t npts = g.size();
  const double ck = c_kappa(kappa);

  // Node sampler: ε grows so that the expected jump count stays below jump_cap.
  auto sampler_at = [&](double t) {
    if (s.intensity() * t <= opt.jump_cap) return s;
    const double eps_t = find_radius_with_tail(m, opt.jump_cap / t, s.eps());
    return PathSampler(m, eps_t, s.seed(), true);
  };

  std::vector<cplx> acc(npts, 0.0);
  std::vector<double> var(npts, 0.0);

  // Small t: t^{-κ}[e^{-at}S_t f - f] ≈ t^{1-κ}(Lf - af).
  {
    const GridFunction Lf = apply_generator(u, m);
    const double w = std::pow(opt.t0, 1.0 - kappa) / (1.0 - kappa);
    for (std::size_t j = 0; j < npts; ++j) acc[j] += w * (Lf[j] - a * u[j]);
  }

  // Gauss–Legendre in s = ln t.
  using GL = boost::math::quadrature::gauss<double, 6>;
  const double s0 = std::log(opt.t0), s1 = std::log(opt.T_cut);
  const int panels = std::max(1, static_cast<int>(std::ceil((s1 - s0) / opt.panel)));
  const double h = (s1 - s0) / panels;
  std::vector<std::pair<double, double>> nodes;  // (t, weight in s)
  for (int p = 0; p < panels; ++p) {
    const double mid = s0 + (p + 0.5) * h;
    for (std::size_t q = 0; q < GL::abscissa().size(); ++q) {
      const double x = GL::abscissa()[q], w = GL::weights()[q];
      nodes.emplace_back(std::exp(mid + 0.5 * h * x), 0.5 * h * w);
      if (x != 0.0) nodes.emplace_back(std::exp(mid - 0.5 * h * x), 0.5 * h * w);
    }
  }
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto [t, w] = nodes[k];
    const auto est = estimate_semigroup(sampler_at(t), u, t, opt.n_paths, k + 1);
    const double wt = w * std::pow(t, -kappa);
    const double damp = std::exp(-a * t);
    for (std::size_t j = 0; j < npts; ++j) {
      acc[j] += wt * (damp * est.mean[j] - u[j]);
      var[j] += std::pow(wt * damp * est.std_error[j], 2);
    }
  }

  // Large t: -f T^{-κ}/κ exactly, plus e^{-at} f̄ for e^{-at} S_t f.
  const double T = opt.T_cut;
  const double I = a == 0.0 ? std::pow(T, -kappa) / kappa
                            : quad::integrate_log([&](double t) { return std::pow(t, -kappa - 1.0) * std::exp(-a * t); },
                                                  T, T + 60.0 / a);
  const cplx mean_f = u.to_frequency()[0];
  for (std::size_t j = 0; j < npts; ++j) acc[j] += -u[j] * std::pow(T, -kappa) / kappa + mean_f * I;
  const auto last = estimate_semigroup(sampler_at(T), u, T, opt.n_paths, nodes.size() + 1);
  double dev = 0.0;
  for (std::size_t j = 0; j < npts; ++j) dev = std::max(dev, std::abs(last.mean[j] - mean_f) + 3.0 * last.std_error[j]);

  FracPowerMC out;
  out.nodes = static_cast<int>(nodes.size());
  out.tail_bound = std::abs(ck) * dev * I;
  if (out.tail_bound > opt.tail_tol * std::max(u.sup_norm(), 1e-300))
    throw NumericError("frac_power_mc: tail beyond T_cut is not negligible (bound " + std::to_string(out.tail_bound) +
                       "); increase a or T_cut");
  out.value = GridFunction(g, Space::physical);
  out.std_error.resize(npts);
  for (std::size_t j = 0; j < npts; ++j) {
    out.value[j] = ck * acc[j];
    out.std_error[j] = std::abs(ck) * std::sqrt(var[j]);
  }
  return out;
}

KSResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw UsageError("ks_two_sample needs two non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    D = std::max(D, std::abs(i / na - j / nb));
  }
  // Kolmogorov distribution Q(λ) = 2 Σ (-1)^{k-1} e^{-2k²λ²} with Stephens' small-sample factor.
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lam = (ne + 0.12 + 0.11 / ne) * D;
  double p = 1.0;
  if (lam >= 0.2) {
    p = 0.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = std::exp(-2.0 * k * k * lam * lam);
      p += (k % 2 ? 2.0 : -2.0) * term;
      if (term < 1e-16) break;
    }
    p = std::clamp(p, 0.0, 1.0);
  }
  return {D, p};
}

ChiSquareResult jump_tail_chi_square(const PathSampler& s, std::size_t n, const std::vector<double>& edges,
                                     std::uint64_t stream) {
  if (edges.size() < 3) throw UsageError("chi-square needs at least two bins");
  if (!std::is_sorted(edges.begin(), edges.end()) || edges.front() < s.eps())
    throw UsageError("bin edges must be increasing and start at or above eps");
  ChiSquareResult r;
  r.edges = edges;
  const std::size_t bins = edges.size() - 1;
  r.observed.assign(bins, 0.0);
  r.expected.assign(bins, 0.0);
  const auto radii = s.sample_jump_radii(n, stream);
  for (double x : radii) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    if (it == edges.begin() || it == edges.end()) continue;
    r.observed[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0;
  }
  const double d0 = s.intensity();
  auto tail = [&](double x) { return std::isinf(x) ? 0.0 : s.measure().tail(x); };
  for (std::size_t k = 0; k < bins; ++k) r.expected[k] = n * (tail(edges[k]) - tail(edges[k + 1])) / d0;
  for (std::size_t k = 0; k < bins; ++k) {
    if (r.expected[k] > 0.0) r.statistic += std::pow(r.observed[k] - r.expected[k], 2) / r.expected[k];
  }
  // Edges covering (ε, ∞) pin the total, costing one degree of freedom.
  r.dof = static_cast<int>(bins) - (edges.front() == s.eps() && std::isinf(edges.back()) ? 1 : 0);
  r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
  return r;
}

}  // namespace lh
