#include "levyholder/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "levyholder/error.hpp"
#include "levyholder/fracops.hpp"
#include "levyholder/lpnorms.hpp"
#include "levyholder/mc.hpp"
#include "levyholder/orv.hpp"
#include "levyholder/parallel.hpp"

namespace lh {

namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

LevyMeasure phi_preset(int variant, std::vector<double> p) {
  return LevyMeasure(RadialProfile::phi_family(variant, std::move(p)), uniform_nodes(1), 1);
}

bool is_stable_preset(const LevyMeasure& m) {
  return m.radial().kind() == RadialProfile::Kind::stable_power && !m.modulated();
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::vector<double> number_list(const json& v, const char* key) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array() && !v.empty()) return v.get<std::vector<double>>();
  throw UsageError(std::string("'") + key + "' must be a number or a nonempty array");
}

GridFunction smooth_profile(const TorusGrid& g) {
  return GridFunction::sample(g, [&](const Point& x) {
    double s = 0.0, c = 1.0;
    for (int k = 0; k < g.dim; ++k, c *= 0.5) s += c * (std::exp(std::cos(2 * pi * x[k] / g.L)) + 0.3 * std::sin(6 * pi * x[k] / g.L));
    return cplx(s, 0.0);
  });
}

double max_abs_diff(const GridFunction& a, const GridFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::vector<NamedForcing> forcings_for(const ForcingSpec& f, const LevyMeasure& m, const TorusGrid& g, double beta) {
  if (f.kind == "default") return default_forcings(m, g, beta);
  if (f.kind == "harmonic") return {{"harmonic", harmonic_forcing(f.k, g.L, f.offset)}};
  if (f.kind == "lacunary") {
    const int levels = f.levels >= 0 ? f.levels : Partition(2.0, g).j_max();
    return {{"lacunary", lacunary_forcing(m, beta, 2, levels, g.L)}};
  }
  if (f.kind == "file") {
    const GridFunction u = read_binary(f.path);
    if (u.grid().dim != g.dim || u.grid().L != g.L) throw UsageError("forcing file grid does not match the config grid");
    const GridFunction U = u.to_frequency();
    // Trigonometric interpolant, so refined grids see the same forcing.
    return {{"file", [U](double, const Point& x) {
               const TorusGrid& gg = U.grid();
               cplx s = 0.0;
               for (std::size_t i = 0; i < U.size(); ++i) {
                 if (U[i] == cplx(0.0)) continue;
                 const Point xi = gg.xi(i);
                 s += U[i] * std::polar(1.0, 2 * pi * (xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]));
               }
               return s;
             }}};
  }
  throw UsageError("forcing kind must be default, harmonic, lacunary or file");
}

json summary_json(const ConstantSummary& s) { return s.to_json(); }

}  // namespace

json Check::to_json() const {
  return {{"name", name}, {"paper_ref", paper_ref}, {"measured", measured}, {"threshold", threshold}, {"pass", pass}};
}

bool SuiteResult::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

json SuiteResult::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) cs.push_back(c.to_json());
  return {{"suite", suite}, {"checks", cs}, {"pass", pass()}};
}

std::vector<NamedMeasure> preset_measures() {
  return {
      {"stable_0.6", LevyMeasure::stable(1, 0.6)},
      {"stable_1", LevyMeasure::stable(1, 1.0)},
      {"stable_1.4", LevyMeasure::stable(1, 1.4)},
      {"phi1", phi_preset(1, {0.15, 0.45})},
      {"phi2", phi_preset(2, {0.5, 0.35})},
      {"phi3", phi_preset(3, {0.4, 0.3})},
      {"phi4", phi_preset(4, {0.7, 0.1})},
      {"phi5", phi_preset(5, {0.6})},
  };
}

std::vector<NamedMeasure> default_matrix_measures() {
  return {
      {"stable_0.6", LevyMeasure::stable(1, 0.6)},
      {"stable_1", LevyMeasure::stable(1, 1.0)},
      {"stable_1.4", LevyMeasure::stable(1, 1.4)},
      {"phi1", phi_preset(1, {0.15, 0.45})},
      {"phi3", phi_preset(3, {0.4, 0.3})},
  };
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  ExperimentConfig c;
  if (j.contains("suite")) {
    const auto& s = j["suite"];
    c.suites = s.is_array() ? s.get<std::vector<std::string>>() : std::vector<std::string>{s.get<std::string>()};
  }
  for (const auto& s : c.suites) {
    if (s != "all" && s != "orv" && s != "norms" && s != "fracops" && s != "solver" && s != "mc-validate")
      throw UsageError("unknown suite '" + s + "'");
  }

  auto add_measure = [&](const json& mj, std::size_t idx) {
    std::string id = mj.value("id", "");
    if (id.empty()) {
      id = mj.value("family", std::string("measure"));
      if (mj.contains("alpha")) id += "_" + fmt(mj["alpha"].get<double>());
      if (idx > 0) id += "#" + std::to_string(idx);
    }
    c.measures.push_back({id, LevyMeasure::from_json(mj)});
  };
  if (j.contains("measure")) add_measure(j["measure"], 0);
  if (j.contains("measures")) {
    const auto& ms = j["measures"];
    if (ms.is_string()) {
      const auto name = ms.get<std::string>();
      if (name == "presets") c.measures = preset_measures();
      else if (name == "matrix") c.measures = default_matrix_measures();
      else throw UsageError("'measures' must be an array, \"presets\" or \"matrix\"");
    } else {
      if (!ms.is_array() || ms.empty()) throw UsageError("'measures' must be a nonempty array");
      for (std::size_t i = 0; i < ms.size(); ++i) add_measure(ms[i], i);
    }
  }
  if (c.measures.empty()) throw UsageError("config needs 'measure' or 'measures'");

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    c.grid = TorusGrid(g.value("dim", c.measures.front().measure.dim()), g.value("L", 1.0), g.value("M", 128));
  } else {
    c.grid = TorusGrid(c.measures.front().measure.dim(), 1.0, 128);
  }
  for (const auto& m : c.measures)
    if (m.measure.dim() != c.grid.dim) throw UsageError("measure '" + m.id + "' dimension differs from the grid");

  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  if (j.contains("out")) c.out = j["out"].get<std::string>();
  if (j.contains("lambda")) c.lambdas = number_list(j["lambda"], "lambda");
  if (j.contains("T")) c.Ts = number_list(j["T"], "T");
  if (j.contains("beta")) c.betas = number_list(j["beta"], "beta");
  if (j.contains("mu")) c.mus = number_list(j["mu"], "mu");
  if (j.contains("K")) c.K = j["K"].get<int>();
  if (c.K < 2) throw UsageError("'K' must be at least 2");
  for (double l : c.lambdas)
    if (l < 0.0) throw UsageError("'lambda' values must be nonnegative");
  for (double t : c.Ts)
    if (!(t > 0.0)) throw UsageError("'T' values must be positive");
  for (double b : c.betas)
    if (!(b > 0.0 && b < 1.0)) throw UsageError("'beta' values must lie in (0,1)");
  if (j.contains("forcing")) {
    const auto& f = j["forcing"];
    c.forcing.kind = f.value("kind", "default");
    if (f.contains("k")) {
      const auto k = f["k"].get<std::vector<int>>();
      for (std::size_t i = 0; i < k.size() && i < 3; ++i) c.forcing.k[i] = k[i];
    }
    c.forcing.offset = f.value("offset", 0.0);
    c.forcing.levels = f.value("levels", -1);
    if (c.forcing.kind == "file") {
      if (!f.contains("path")) throw UsageError("file forcing needs 'path'");
      fs::path p = f["path"].get<std::string>();
      if (p.is_relative()) p = fs::path(base_dir) / p;
      if (!fs::exists(p)) throw UsageError("forcing file not found: " + p.string());
      c.forcing.path = p.string();
    } else if (c.forcing.kind != "default" && c.forcing.kind != "harmonic" && c.forcing.kind != "lacunary") {
      throw UsageError("forcing kind must be default, harmonic, lacunary or file");
    }
  }
  c.smoke_2d = j.value("smoke_2d", false);
  if (j.contains("norms")) {
    const auto& n = j["norms"];
    c.norm_M = n.value("M", c.norm_M);
    if (n.contains("kappa_pairs")) {
      c.kappa_pairs.clear();
      for (const auto& p : n["kappa_pairs"]) c.kappa_pairs.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    if (n.contains("decay_R")) c.decay_R = n["decay_R"].get<std::vector<double>>();
  }
  if (j.contains("mc")) {
    const auto& m = j["mc"];
    c.mc_eps = m.value("eps", c.mc_eps);
    c.mc_paths = m.value("paths", c.mc_paths);
    c.mc_t = m.value("t", c.mc_t);
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json ms = json::array();
  for (const auto& m : measures) {
    json mj = m.measure.to_json();
    mj["id"] = m.id;
    ms.push_back(mj);
  }
  json pairs = json::array();
  for (const auto& [b, k] : kappa_pairs) pairs.push_back({b, k});
  return {{"suite", suites},
          {"measures", ms},
          {"grid", grid.to_json()},
          {"seed", seed},
          {"lambda", lambdas},
          {"T", Ts},
          {"beta", betas},
          {"mu", mus},
          {"K", K},
          {"forcing", {{"kind", forcing.kind}, {"k", forcing.k}, {"offset", forcing.offset}, {"levels", forcing.levels}}},
          {"smoke_2d", smoke_2d},
          {"norms", {{"M", norm_M}, {"kappa_pairs", pairs}, {"decay_R", decay_R}}},
          {"mc", {{"eps", mc_eps}, {"paths", mc_paths}, {"t", mc_t}}}};
}

double symbol_oracle_1d(const LevyMeasure& m, double xi) {
  if (m.dim() != 1 || !m.symmetric() || m.modulated()) throw UsageError("symbol oracle needs a symmetric unmodulated 1-d measure");
  if (xi == 0.0) return 0.0;
  const double k = 2 * pi * std::abs(xi);
  boost::math::quadrature::ooura_fourier_sin<double> os(1e-13);
  const double zoom = m.zoom();
  const double I = os.integrate([&](double r) { return m.radial().unit_tail(zoom * r); }, k).first;
  return -m.mass() * m.total_weight() * k * I;
}

SuiteResult run_orv_suite(const ExperimentConfig& c) {
  SuiteResult s{"orv", {}};
  const auto xs = log_grid(1e-4, 1.0, 13);
  for (const auto& [id, m] : c.measures) {
    const auto idx = estimate_indices(m);
    const double a = m.alpha();
    s.checks.push_back({"sandwich/" + id, "index sandwich p1 <= alpha <= q1",
                        {{"p1", idx.p1}, {"q1", idx.q1}, {"alpha", a}},
                        {{"tol", 0.05}},
                        idx.p1 <= a + 0.05 && a <= idx.q1 + 0.05});

    struct Case {
      Al1Case which;
      double beta, tau;
    };
    const Case cases[] = {{Al1Case::a, 1.0, -idx.p1 + 0.5},
                          {Al1Case::b, 1.0, -idx.q1 - 0.5},
                          {Al1Case::c, -1.0, idx.q1 + 0.5},
                          {Al1Case::d, -1.0, idx.p1 - 0.5}};
    for (const auto& cs : cases) {
      const auto r = check_al1(m, cs.which, cs.beta, cs.tau, xs, idx.p1, idx.q1);
      s.checks.push_back({"al1_" + to_string(cs.which) + "/" + id, "integral comparison lemma, case " + to_string(cs.which),
                          r.to_json(), {{"x_min", xs.back()}, {"x_max", xs.front()}}, r.pass});
    }

    const auto ac = check_ac1(m, 1.0, 2.0);
    bool ac_pass = ac.converged;
    json ac_thr = {{"converged", true}};
    if (is_stable_preset(m) && a == 1.0) {
      ac_pass = ac_pass && std::abs(ac.sum - 1.0) <= 1e-6;
      ac_thr["sum"] = 1.0;
      ac_thr["tol"] = 1e-6;
    }
    s.checks.push_back({"ac1/" + id, "dyadic summability of w(N^-j)^beta, beta = 1, N = 2",
                        {{"sum", ac.sum}, {"tail_bound", ac.tail_bound}, {"converged", ac.converged}}, ac_thr, ac_pass});

    // Regime-matched scaled moments over R = 2^{-k}.
    const auto kind = regime_moment(a);
    double max10 = 0.0, max20 = 0.0;
    bool finite = true;
    for (int k = 0; k <= 20; ++k) {
      const double v = scaled_moment(scale_measure(m, std::ldexp(1.0, -k)), kind);
      finite = finite && std::isfinite(v);
      if (k <= 10) max10 = std::max(max10, v);
      max20 = std::max(max20, v);
    }
    s.checks.push_back({"al2_moments/" + id, "scaled moments bounded uniformly in R",
                        {{"max_k<=10", max10}, {"max_k<=20", max20}},
                        {{"growth", 1.05}},
                        finite && max20 <= 1.05 * max10});

    std::vector<double> Rs;
    for (int k = 0; k <= 20; ++k) Rs.push_back(std::ldexp(1.0, -k));
    const auto B = check_condition_B(m, Rs, direction_grid(m.dim(), 16));
    json thr = {{"min", B.threshold}};
    bool b_pass = B.pass;
    if (is_stable_preset(m) && m.dim() == 1) {
      const double expect = a / (2.0 - a);
      thr = {{"value", expect}, {"tol", 1e-6}};
      b_pass = std::abs(B.inf_value - expect) <= 1e-6;
    }
    s.checks.push_back({"condition_B/" + id, "nondegeneracy: inf of truncated second moments of scaled measures",
                        {{"inf", B.inf_value}, {"argmin_R", B.argmin_R}}, thr, b_pass});
  }
  return s;
}

SuiteResult run_norms_suite(const ExperimentConfig& c, const std::string& csv_dir) {
  SuiteResult s{"norms", {}};
  const TorusGrid g(c.grid.dim, c.grid.L, c.norm_M);
  const auto corpus = default_corpus(g.dim);
  for (const auto& [id, m] : c.measures) {
    const double q1 = estimate_indices(m).q1;
    for (double beta : c.betas) {
      if (!(beta < 1.0 / q1)) continue;
      const auto r = equivalence_report(corpus, m, beta, q1, g);
      if (!csv_dir.empty()) r.write_csv((fs::path(csv_dir) / ("norms_" + id + "_beta" + fmt(beta) + ".csv")).string());
      s.checks.push_back({"equivalence/" + id + "/beta=" + fmt(beta), "Besov-type and Hölder-type norms are equivalent",
                          {{"min_ratio", r.min_ratio}, {"max_ratio", r.max_ratio}, {"max_drift", r.max_drift}, {"q1", q1}},
                          {{"band", {1.0 / r.K, r.K}}, {"max_drift", r.max_drift_allowed}},
                          r.pass});
    }
  }
  return s;
}

SuiteResult run_fracops_suite(const ExperimentConfig& c, const std::string& csv_dir) {
  SuiteResult s{"fracops", {}};
  const TorusGrid g(c.grid.dim, c.grid.L, c.norm_M);
  const auto corpus = default_corpus(g.dim);
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.02 * i);
  for (const auto& [id, m] : c.measures) {
    if (m.symmetric()) {
      for (const auto& [beta, kappa] : c.kappa_pairs) {
        const auto r = equiv_frac_norms(corpus, m, beta, kappa, g);
        if (!csv_dir.empty())
          r.write_csv((fs::path(csv_dir) / ("fracnorms_" + id + "_beta" + fmt(beta) + "_kappa" + fmt(kappa) + ".csv")).string());
        s.checks.push_back({"frac_norms/" + id + "/beta=" + fmt(beta) + ",kappa=" + fmt(kappa),
                            "three fractional norms are equivalent",
                            {{"spread", r.spread}, {"lemma_drift", r.lemma_drift}},
                            {{"max_spread", r.max_spread_allowed}, {"max_drift", 0.1}},
                            r.pass});
      }
      const auto f = smooth_profile(g);
      double err = 0.0;
      for (const auto& pr : c.kappa_pairs) {
        const double kappa = pr.second;
        err = std::max(err, max_abs_diff(frac_power(frac_inverse(f, m, 1.0, kappa), m, 1.0, kappa), f));
      }
      s.checks.push_back({"roundtrip/" + id, "(aI - L)^kappa (aI - L)^-kappa = id", {{"max_error", err}}, {{"max_error", 1e-10}},
                          err <= 1e-10});
    }
    const auto d = decay_test(m, c.decay_R, ts, g);
    const bool stable = is_stable_preset(m);
    s.checks.push_back({"decay/" + id, "rescaled semigroups decay exponentially, uniformly in R",
                        {{"min_rate", d.min_rate}, {"rate_spread", d.rate_spread}, {"warnings", d.warnings}},
                        stable ? json{{"min_rate", "> 0"}, {"max_rate_spread", 0.1}} : json{{"min_rate", "> 0"}},
                        d.pass && (!stable || d.rate_spread <= 0.1)});
  }
  return s;
}

Check symbol_check(const NamedMeasure& nm) {
  const auto& [id, m] = nm;
  const TorusGrid gs(1, 1.0, 128);
  const auto& psi = compute_symbol(m, gs).psi;
  const bool closed_form = is_stable_preset(m) && m.alpha() == 1.0;
  double rel = 0.0, closed = 0.0;
  for (int n = 1; n <= 32; ++n) {
    const double o = symbol_oracle_1d(m, n);
    for (const std::size_t i : {std::size_t(n), std::size_t(gs.M - n)}) {
      rel = std::max(rel, std::abs(psi[i] - o) / std::abs(o));
      if (closed_form) closed = std::max(closed, std::abs(psi[i].real() + 2 * pi * pi * n) / (2 * pi * pi * n));
    }
  }
  json meas = {{"max_rel_error_vs_quadrature", rel}};
  bool ok = rel <= 1e-6;
  if (closed_form) {
    meas["max_rel_error_vs_closed_form"] = closed;
    ok = ok && closed <= 1e-6;
  }
  return {"symbol/" + id, "symbol of the generator on |xi| <= 32", meas, {{"max_rel_error", 1e-6}}, ok};
}

std::vector<Check> exactness_checks(const NamedMeasure& nm, const TorusGrid& g) {
  const auto& [id, m] = nm;
  const auto p = CauchyProblem::from_function(m, g, 0.0, 0.1, 128, harmonic_forcing({1, 0, 0}, g.L));
  const auto r = solve(p);
  const double psi1 = compute_symbol(m, g).psi[g.flat_index({1, 0, 0})].real();
  double err = 0.0;
  for (std::size_t n = 0; n < r.u.size(); ++n) {
    const double amp = -std::expm1(psi1 * r.t[n]) / -psi1;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(r.u[n][i] - amp * std::cos(2 * pi * g.x(i)[0] / g.L)));
  }
  const double res = residual(p, r);
  const auto p2 = CauchyProblem::from_function(m, g, 0.0, 0.1, 256, harmonic_forcing({1, 0, 0}, g.L));
  const double res2 = residual(p2, solve(p2));
  // The trapezoid error grows like |psi(1)|^2; the absolute bound is set for the Cauchy case.
  const bool bound = is_stable_preset(m) && m.alpha() == 1.0;
  return {{"harmonic_closed_form/" + id, "per-mode Duhamel integral of a harmonic forcing", {{"max_error", err}},
           {{"max_error", 1e-8}}, err <= 1e-8},
          {"residual/" + id, "integral form of the equation, K = 128, T = 0.1",
           {{"residual", res}, {"residual_K256", res2}, {"ratio", res / res2}},
           bound ? json{{"max_residual", 1e-6}, {"ratio", {3.5, 4.5}}} : json{{"ratio", {3.5, 4.5}}},
           (!bound || res <= 1e-6) && res / res2 >= 3.5 && res / res2 <= 4.5}};
}

Check semigroup_cross_oracle(const NamedMeasure& nm, const TorusGrid& g, double eps, std::uint64_t seed, double t,
                             std::size_t paths) {
  const auto& [id, m] = nm;
  const PathSampler ps(m, eps, seed);
  const auto f = smooth_profile(g);
  const auto ref = semigroup(f, m, t);
  const auto est = estimate_semigroup(ps, f, t, paths, 1);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < g.size(); ++i) ok += std::abs(est.mean[i] - ref[i]) <= 3.0 * est.std_error[i];
  const double frac = double(ok) / g.size();
  return {"semigroup_cross_oracle/" + id, "E f(x + Z_t) equals the multiplier e^{t psi}",
          {{"fraction_within_3se", frac}, {"paths", paths}, {"t", t}}, {{"min_fraction", 0.95}}, frac >= 0.95};
}

SuiteResult run_solver_suite(const ExperimentConfig& c, const std::string& csv_dir) {
  SuiteResult s{"solver", {}};
  const TorusGrid& g = c.grid;
  for (const auto& [id, m] : c.measures) {
    if (m.dim() == 1 && m.symmetric() && !m.modulated()) s.checks.push_back(symbol_check({id, m}));
    for (auto& ch : exactness_checks({id, m}, g)) s.checks.push_back(std::move(ch));

    for (double beta : c.betas) {
      EstimateOptions opt;
      opt.lambdas = c.lambdas;
      opt.Ts = c.Ts;
      opt.mus = c.mus;
      opt.K = c.K;
      opt.beta = beta;
      const auto rep = verify_estimates(m, g, forcings_for(c.forcing, m, g, beta), opt);
      if (!csv_dir.empty()) rep.write_csv((fs::path(csv_dir) / ("estimates_" + id + "_beta" + fmt(beta) + ".csv")).string());
      const std::string tag = id + "/beta=" + fmt(beta);
      const json thr = {{"max_spread", rep.tolerance}};
      s.checks.push_back({"C_est5/" + tag, "zero-order estimate, constant independent of f, lambda, T",
                          summary_json(rep.C5), thr, rep.C5.pass});
      s.checks.push_back({"C_est1/" + tag, "order 1+beta estimate, constant independent of f, lambda, T",
                          summary_json(rep.C1), thr, rep.C1.pass});
      for (std::size_t q = 0; q < rep.mus.size(); ++q) {
        s.checks.push_back({"C_est2/" + tag + "/mu=" + fmt(rep.mus[q]),
                            "time-difference estimate, constant independent of f, lambda, T", summary_json(rep.C2_per_mu[q]), thr,
                            rep.C2_per_mu[q].pass});
      }
      // Cross-μ spread: reported, not asserted.
      json across = summary_json(rep.C2);
      across.erase("pass");
      s.checks.push_back({"C_est2_across_mu/" + tag, "time-difference constant across mu (informational)", across,
                          {{"asserted", false}}, true});
    }

    // Rough input: truncations of a β-rough lacunary profile.
    {
      const Partition part(2.0, g);
      const double beta = c.betas.front();
      const auto lac = lacunary_forcing(m, beta, 2, part.j_max(), g.L);
      const auto f = GridFunction::sample(g, [&](const Point& x) { return lac(0.0, x); });
      std::vector<int> levels;
      for (int n = 1; n <= part.j_max(); ++n) levels.push_back(n);
      const auto r = rough_input_limit(m, f, 1.0, 0.5, 16, beta / 2, levels);
      s.checks.push_back({"rough_input/" + id, "solutions for truncated rough forcings form a Cauchy sequence",
                          r.to_json(), {{"differences", "non-increasing"}}, r.converged});
    }
  }

  if (c.smoke_2d) {
    const auto m = LevyMeasure::stable(2, 1.0);
    const TorusGrid g2(2, 1.0, 32);
    EstimateOptions opt;
    opt.lambdas = {0.0, 10.0};
    opt.Ts = {0.1};
    opt.mus = c.mus;
    opt.K = 32;
    opt.beta = 0.3;
    const auto rep = verify_estimates(m, g2, default_forcings(m, g2, 0.3), opt);
    const bool finite = rep.C5.finite && rep.C1.finite && rep.C2.finite;
    s.checks.push_back({"estimates_2d_smoke/stable_1", "estimates run in d = 2",
                        {{"C_est5", summary_json(rep.C5)}, {"C_est1", summary_json(rep.C1)}, {"C_est2", summary_json(rep.C2)}},
                        {{"finite", true}}, finite});
  }
  return s;
}

SuiteResult run_mc_suite(const ExperimentConfig& c) {
  SuiteResult s{"mc-validate", {}};
  for (const auto& [id, m] : c.measures) {
    if (m.dim() != 1) continue;
    const PathSampler ps(m, c.mc_eps, c.seed);
    const TorusGrid g(1, c.grid.L, c.grid.M);

    s.checks.push_back(semigroup_cross_oracle({id, m}, g, c.mc_eps, c.seed, c.mc_t, c.mc_paths));

    // Empirical characteristic function at ξ ∈ {1, 2, 4}.
    const auto z = ps.sample(c.mc_t, c.mc_paths, 2);
    json rows = json::array();
    bool cf_ok = true;
    for (double xi : {1.0, 2.0, 4.0}) {
      const cplx target = std::exp(c.mc_t * compute_symbol(m, TorusGrid(1, 1.0, 16)).psi[static_cast<std::size_t>(xi)]);
      double cr = 0.0, cr2 = 0.0, ci = 0.0, ci2 = 0.0;
      for (const auto& p : z) {
        const double a = std::cos(2 * pi * xi * p[0]), b = std::sin(2 * pi * xi * p[0]);
        cr += a, cr2 += a * a, ci += b, ci2 += b * b;
      }
      const double n = static_cast<double>(z.size());
      cr /= n, ci /= n;
      const double sr = std::sqrt((cr2 / n - cr * cr) / n), si = std::sqrt((ci2 / n - ci * ci) / n);
      const bool good = std::abs(cr - target.real()) <= 3 * sr && std::abs(ci - target.imag()) <= 3 * si;
      cf_ok = cf_ok && good;
      rows.push_back({{"xi", xi}, {"empirical", {cr, ci}}, {"exact", {target.real(), target.imag()}}, {"se", {sr, si}}});
    }
    s.checks.push_back({"characteristic_function/" + id, "E exp(i 2 pi xi Z_t) = exp(t psi(xi))", rows, {{"sigmas", 3}}, cf_ok});

    std::vector<double> edges{c.mc_eps};
    for (int k = 1; k <= 8; ++k) edges.push_back(c.mc_eps * std::pow(4.0, k));
    edges.push_back(INFINITY);
    const auto chi = jump_tail_chi_square(ps, 200000, edges, 3);
    s.checks.push_back({"jump_tail_chi2/" + id, "jump radii follow delta(r)/delta(eps)",
                        {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}},
                        {{"min_p_value", 0.01}}, chi.p_value > 0.01});

    if (is_stable_preset(m)) {
      const double a = m.alpha();
      const PathSampler sc(scale_measure(m, 1.0 / 16).measure, c.mc_eps, c.seed + 1);
      std::vector<double> x, y;
      for (const auto& p : ps.sample(a * 0.1 / 2, 20000, 4)) x.push_back(p[0]);
      for (const auto& p : sc.sample(0.1, 20000, 5)) y.push_back(p[0]);
      const auto ks = ks_two_sample(x, y);
      s.checks.push_back({"self_similarity_ks/" + id, "scaled measure nu_R = (alpha/2) nu for stable laws",
                          {{"D", ks.D}, {"p_value", ks.p_value}}, {{"min_p_value", 0.01}}, ks.p_value > 0.01});
    }

    const auto a1 = ps.sample(c.mc_t, 5000, 6), a2 = PathSampler(m, c.mc_eps, c.seed).sample(c.mc_t, 5000, 6);
    s.checks.push_back({"reproducibility/" + id, "identical seed gives identical paths", {{"identical", a1 == a2}},
                        {{"identical", true}}, a1 == a2});
  }
  return s;
}

json strip_timestamp(json report) {
  report.erase("timestamp");
  return report;
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  set_num_threads(std::max(1u, c.threads));
  fs::create_directories(c.out);
  const std::string dir = c.out;
  auto want = [&](const std::string& name) {
    for (const auto& s : c.suites)
      if (s == name || s == "all") return true;
    return false;
  };

  ExperimentResult res;
  std::vector<std::pair<std::string, double>> timings;
  auto timed = [&](const std::string& name, auto&& fn) {
    if (!want(name)) return;
    const auto t0 = std::chrono::steady_clock::now();
    res.suites.push_back(fn());
    timings.emplace_back(name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  timed("orv", [&] { return run_orv_suite(c); });
  timed("norms", [&] { return run_norms_suite(c, dir); });
  timed("fracops", [&] { return run_fracops_suite(c, dir); });
  timed("solver", [&] { return run_solver_suite(c, dir); });
  timed("mc-validate", [&] { return run_mc_suite(c); });

  res.pass = true;
  json suites = json::array();
  for (const auto& s : res.suites) {
    suites.push_back(s.to_json());
    for (const auto& ch : s.checks) {
      if (!ch.pass) {
        res.pass = false;
        res.failing.push_back(s.suite + "/" + ch.name);
      }
    }
  }
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  res.report = {{"timestamp", stamp}, {"seed", c.seed}, {"config", c.to_json()}, {"suites", suites}, {"pass", res.pass}};

  std::ofstream(fs::path(dir) / "report.json") << res.report.dump(2) << '\n';
  std::ofstream sum(fs::path(dir) / "summary.txt");
  sum << "levyholder report " << stamp << "  seed " << c.seed << '\n';
  for (std::size_t i = 0; i < res.suites.size(); ++i) {
    const auto& s = res.suites[i];
    sum << '\n' << "[" << s.suite << "] " << (s.pass() ? "PASS" : "FAIL") << "  (" << timings[i].second << " s)\n";
    for (const auto& ch : s.checks) sum << "  " << (ch.pass ? "PASS " : "FAIL ") << ch.name << "  " << ch.measured.dump() << '\n';
  }
  sum << '\n' << (res.pass ? "all checks passed" : std::to_string(res.failing.size()) + " check(s) failed") << '\n';
  return res;
}

}  // namespace lh
