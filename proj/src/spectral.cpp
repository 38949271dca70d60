#include "levyholder/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <fftw3.h>

#include "levyholder/error.hpp"
#include "levyholder/parallel.hpp"
#include "levyholder/quadrature.hpp"

namespace lh {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOscTol = 1e-11;
constexpr std::size_t kDirectLimit = 4096;
constexpr int kTablePerDecade = 128;

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

// sin x - x without cancellation for small x.
double sin_minus_x(double x) {
  if (std::abs(x) < 0.1) {
    const double x2 = x * x;
    return -x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
  }
  return std::sin(x) - x;
}

}  // namespace

// ---------------------------------------------------------------------------
// TorusGrid

TorusGrid::TorusGrid(int d, double len, int m) : dim(d), L(len), M(m) {
  if (dim < 1 || dim > 3) throw UsageError("grid dimension must be 1, 2 or 3");
  if (!(L > 0.0)) throw UsageError("grid side length must be positive");
  if (M < 2 || (M & (M - 1)) != 0) throw UsageError("points per axis must be a power of two");
}

std::size_t TorusGrid::size() const { return ipow(static_cast<std::size_t>(M), dim); }

std::array<int, 3> TorusGrid::multi_index(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % M);
    flat /= M;
  }
  return idx;
}

std::size_t TorusGrid::flat_index(const std::array<int, 3>& idx) const {
  std::size_t f = 0;
  for (int a = 0; a < dim; ++a) f = f * M + static_cast<std::size_t>(((idx[a] % M) + M) % M);
  return f;
}

Point TorusGrid::x(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = idx[a] * spacing();
  return p;
}

Point TorusGrid::xi(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = wave_number(idx[a]) / L;
  return p;
}

double TorusGrid::xi_norm(std::size_t flat) const {
  const Point p = xi(flat);
  return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

json TorusGrid::to_json() const { return {{"dim", dim}, {"L", L}, {"M", M}}; }

// ---------------------------------------------------------------------------
// FFT

namespace {

struct PlanCache {
  std::mutex mu;
  std::map<std::tuple<int, int, int>, fftw_plan> plans;

  fftw_plan get(const TorusGrid& g, int sign) {
    std::lock_guard lock(mu);
    const auto key = std::make_tuple(g.dim, g.M, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    const std::size_t n = g.size();
    auto* a = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* b = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    int dims[3] = {g.M, g.M, g.M};
    fftw_plan p = fftw_plan_dft(g.dim, dims, a, b, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    if (!p) throw NumericError("FFTW failed to create a plan");
    plans.emplace(key, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void run_fft(const TorusGrid& g, const cplx* in, cplx* out, int sign) {
  const std::size_t n = g.size();
  std::vector<cplx> src(in, in + n);
  fftw_plan p = plan_cache().get(g, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

void fft_forward(const TorusGrid& g, const cplx* in, cplx* out) {
  run_fft(g, in, out, FFTW_FORWARD);
  const double s = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= s;
}

void fft_inverse(const TorusGrid& g, const cplx* in, cplx* out) { run_fft(g, in, out, FFTW_BACKWARD); }

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(TorusGrid grid, Space space)
    : grid_(grid), values_(grid.size(), cplx(0.0, 0.0)), space_(space) {}

GridFunction::GridFunction(TorusGrid grid, std::vector<cplx> values, Space space)
    : grid_(grid), values_(std::move(values)), space_(space) {
  if (values_.size() != grid_.size()) throw UsageError("grid function size does not match grid");
}

GridFunction GridFunction::sample(const TorusGrid& grid, const std::function<cplx(const Point&)>& f) {
  GridFunction u(grid, Space::physical);
  for (std::size_t i = 0; i < u.size(); ++i) u.values_[i] = f(grid.x(i));
  return u;
}

GridFunction GridFunction::harmonic(const TorusGrid& grid, const std::array<int, 3>& k) {
  return sample(grid, [&](const Point& x) {
    double ph = 0.0;
    for (int a = 0; a < grid.dim; ++a) ph += k[a] * x[a];
    return std::polar(1.0, 2.0 * kPi * ph / grid.L);
  });
}

GridFunction GridFunction::to_frequency() const {
  if (space_ == Space::frequency) return *this;
  GridFunction out(grid_, Space::frequency);
  fft_forward(grid_, values_.data(), out.values_.data());
  return out;
}

GridFunction GridFunction::to_physical() const {
  if (space_ == Space::physical) return *this;
  GridFunction out(grid_, Space::physical);
  fft_inverse(grid_, values_.data(), out.values_.data());
  return out;
}

double GridFunction::sup_norm() const {
  if (space_ != Space::physical) throw UsageError("sup norm needs physical data");
  double s = 0.0;
  for (const auto& v : values_) s = std::max(s, std::abs(v));
  return s;
}

double GridFunction::l1_norm() const {
  if (space_ != Space::physical) throw UsageError("L1 norm needs physical data");
  double s = 0.0;
  for (const auto& v : values_) s += std::abs(v);
  return s * std::pow(grid_.spacing(), grid_.dim);
}

double GridFunction::imag_fraction() const {
  double im = 0.0, mx = 0.0;
  for (const auto& v : values_) {
    im = std::max(im, std::abs(v.imag()));
    mx = std::max(mx, std::abs(v));
  }
  return mx > 0.0 ? im / mx : 0.0;
}

GridFunction GridFunction::rolled(const std::array<int, 3>& shift) const {
  if (space_ != Space::physical) throw UsageError("roll needs physical data");
  GridFunction out(grid_, Space::physical);
  for (std::size_t i = 0; i < size(); ++i) {
    auto idx = grid_.multi_index(i);
    for (int a = 0; a < grid_.dim; ++a) idx[a] += shift[a];
    out.values_[i] = values_[grid_.flat_index(idx)];
  }
  return out;
}

void GridFunction::require_same(const GridFunction& o) const {
  if (!(grid_ == o.grid_) || space_ != o.space_) throw UsageError("grid functions live on different grids");
}

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  require_same(o);
  for (std::size_t i = 0; i < size(); ++i) values_[i] += o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  require_same(o);
  for (std::size_t i = 0; i < size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

GridFunction& GridFunction::operator*=(cplx c) {
  for (auto& v : values_) v *= c;
  return *this;
}

GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
GridFunction operator*(cplx c, GridFunction a) { return a *= c; }

// ---------------------------------------------------------------------------
// SymbolEvaluator

SymbolEvaluator::SymbolEvaluator(const LevyMeasure& m, double r0) : m_(m), r0_(r0) {
  if (!(r0_ > 0.0)) throw UsageError("inner Taylor radius must be positive");
  const auto nodes = m_.nodes();
  node_class_.resize(nodes.size());
  std::vector<double> floors;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double f = m_.node_floor(i);
    auto it = std::find(floors.begin(), floors.end(), f);
    if (it == floors.end()) {
      floors.push_back(f);
      class_rep_.push_back(i);
      node_class_[i] = floors.size() - 1;
    } else {
      node_class_[i] = static_cast<std::size_t>(it - floors.begin());
    }
  }
  for (std::size_t rep : class_rep_) {
    const double lam = nodes[rep].weight;
    m2_.push_back(m_.node_moment(rep, 2.0, 0.0, r0_) / lam);
    m4_.push_back(m_.node_moment(rep, 4.0, 0.0, r0_) / lam);
    const bool need_odd = !m_.symmetric();
    m3_.push_back(need_odd ? m_.node_moment(rep, 3.0, 0.0, r0_) / lam : 0.0);
    m1_.push_back(need_odd && m_.alpha() < 1.0 ? m_.node_moment(rep, 1.0, 0.0, r0_) / lam : 0.0);
  }
}

double SymbolEvaluator::density(std::size_t cls, double r) const {
  const std::size_t rep = class_rep_[cls];
  return m_.node_density(rep, r) / m_.nodes()[rep].weight;
}

double SymbolEvaluator::oscillatory(std::size_t cls, double k, double start, bool cosine,
                                    double& end) const {
  // Half-period Gauss–Legendre panels; stops on a full period boundary once the
  // first neglected asymptotic term of the tail is below tolerance.
  const double half = kPi / k;
  double a = start;
  double sum = 0.0;
  auto g = [&](double r) {
    const double rho = density(cls, r);
    return cosine ? (1.0 - std::cos(k * r)) * rho : std::sin(k * r) * rho;
  };
  // Align to a multiple of the half period.
  const double first = std::ceil(start / half - 1e-12) * half;
  if (first > a) {
    sum += quad::gauss_legendre(g, a, first);
    a = first;
  }
  long j = std::lround(a / half);
  const long max_panels = 4'000'000;
  for (long n = 0;; ++n) {
    const double b = (j + 1) * half;
    sum += quad::gauss_legendre(g, a, b);
    a = b;
    ++j;
    if (j % 2 == 0 && n >= 8) {
      const double h = 1e-4 * a;
      const double drho = (density(cls, a + h) - density(cls, a - h)) / (2.0 * h);
      const double est = cosine ? 20.0 * std::abs(drho) / (k * k * (k * a) * (k * a))
                                : 10.0 * std::abs(drho) / (k * k * (k * a));
      if (est <= kOscTol * std::max(std::abs(sum), 1e-300)) break;
    }
    if (n > max_panels) throw NumericError("symbol quadrature did not converge at k = " + std::to_string(k));
  }
  end = a;
  return sum;
}

double SymbolEvaluator::real_part(std::size_t cls, double k) const {
  if (!(k > 0.0)) return 0.0;
  const double k2 = k * k;
  double s = 0.5 * k2 * m2_[cls] - k2 * k2 / 24.0 * m4_[cls];
  const double b = std::max(r0_, kPi / k);
  if (b > r0_) {
    s += quad::integrate_log(
        [&](double r) {
          const double sn = std::sin(0.5 * k * r);
          return 2.0 * sn * sn * density(cls, r);
        },
        r0_, b);
  }
  double R = b;
  s += oscillatory(cls, k, b, true, R);
  const std::size_t rep = class_rep_[cls];
  const double lam = m_.nodes()[rep].weight;
  const double h = 1e-4 * R;
  const double drho = (density(cls, R + h) - density(cls, R - h)) / (2.0 * h);
  s += m_.node_tail(rep, R) / lam + drho / k2;
  return s;
}

double SymbolEvaluator::imag_part(std::size_t cls, double k) const {
  if (!(k > 0.0) || m_.symmetric()) return 0.0;
  const double k3 = k * k * k;
  const bool full = m_.compensation() == Compensation::full;
  double s = -k3 / 6.0 * m3_[cls] + (full ? 0.0 : k * m1_[cls]);
  const double b = std::max(r0_, kPi / k);
  if (b > r0_) {
    s += quad::integrate_log(
        [&](double r) {
          const double v = full ? sin_minus_x(k * r) : std::sin(k * r);
          return v * density(cls, r);
        },
        r0_, b);
  }
  double R = b;
  s += oscillatory(cls, k, b, false, R);
  s += density(cls, R) / k;
  if (full) {
    const std::size_t rep = class_rep_[cls];
    s -= k * m_.node_moment(rep, 1.0, b, kInf) / m_.nodes()[rep].weight;
  }
  return s;
}

cplx SymbolEvaluator::operator()(const Point& xi) const {
  const auto nodes = m_.nodes();
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double proj = 0.0;
    for (int a = 0; a < m_.dim(); ++a) proj += xi[a] * nodes[i].direction[a];
    const double k = 2.0 * kPi * proj;
    if (k == 0.0) continue;
    const std::size_t c = node_class_[i];
    re -= nodes[i].weight * real_part(c, std::abs(k));
    if (!m_.symmetric()) im += nodes[i].weight * (k > 0 ? 1.0 : -1.0) * imag_part(c, std::abs(k));
  }
  return {re, im};
}

// ---------------------------------------------------------------------------
// Symbol tables

namespace {

struct CacheKey {
  std::uint64_t fp;
  int dim;
  double L;
  int M;
  auto operator<=>(const CacheKey&) const = default;
};

struct SymbolCache {
  std::mutex mu;
  std::map<CacheKey, std::unique_ptr<SymbolTable>> tables;
};

SymbolCache& symbol_cache() {
  static SymbolCache cache;
  return cache;
}

// Radial value lookup for one class: exact values at the needed |k|, or a
// log-k spline of value / k^α when there are too many distinct |k|.
class RadialLookup {
 public:
  RadialLookup(std::vector<double> ks, const std::function<double(double)>& f, double alpha)
      : alpha_(alpha) {
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end(), [](double a, double b) { return b - a <= 1e-13 * b; }),
             ks.end());
    if (ks.empty()) return;
    if (ks.size() <= kDirectLimit) {
      keys_ = ks;
      vals_.resize(ks.size());
      parallel_for(ks.size(), [&](std::size_t i) { vals_[i] = f(ks[i]); });
      return;
    }
    tabulated_ = true;
    lo_ = std::log(ks.front());
    const double hi = std::log(ks.back());
    const int n = std::max(8, static_cast<int>(std::ceil((hi - lo_) / std::log(10.0) * kTablePerDecade)) + 1);
    step_ = (hi - lo_) / (n - 1);
    std::vector<double> y(n);
    parallel_for(n, [&](std::size_t i) {
      const double k = std::exp(lo_ + step_ * i);
      y[i] = f(k) / std::pow(k, alpha_);
    });
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        y.begin(), y.end(), lo_, step_);
    hi_ = hi;
  }

  double operator()(double k) const {
    if (tabulated_) {
      const double lk = std::clamp(std::log(k), lo_, hi_);
      return (*spline_)(lk) * std::pow(k, alpha_);
    }
    auto it = std::lower_bound(keys_.begin(), keys_.end(), k * (1.0 - 1e-13));
    if (it == keys_.end() || std::abs(*it - k) > 1e-12 * k) throw NumericError("symbol lookup missed a frequency");
    return vals_[static_cast<std::size_t>(it - keys_.begin())];
  }

  bool tabulated() const { return tabulated_; }

 private:
  double alpha_;
  bool tabulated_ = false;
  std::vector<double> keys_, vals_;
  double lo_ = 0.0, hi_ = 0.0, step_ = 1.0;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
};

}  // namespace

const SymbolTable& compute_symbol(const LevyMeasure& m, const TorusGrid& grid) {
  if (m.dim() != grid.dim) throw UsageError("measure and grid dimensions differ");
  const CacheKey key{m.fingerprint(), grid.dim, grid.L, grid.M};
  auto& cache = symbol_cache();
  {
    std::lock_guard lock(cache.mu);
    auto it = cache.tables.find(key);
    if (it != cache.tables.end()) return *it->second;
  }

  const double r0 = 1e-3 / grid.nyquist();
  const SymbolEvaluator ev(m, r0);
  const auto nodes = m.nodes();
  const std::size_t n = grid.size();

  // Signed projections k_i = 2π ξ·w_i for every lattice point and node.
  std::vector<double> proj(n * nodes.size());
  for (std::size_t f = 0; f < n; ++f) {
    const Point xi = grid.xi(f);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      double p = 0.0;
      for (int a = 0; a < grid.dim; ++a) p += xi[a] * nodes[i].direction[a];
      proj[f * nodes.size() + i] = 2.0 * kPi * p;
    }
  }
  std::vector<std::vector<double>> needed(ev.classes());
  for (std::size_t f = 0; f < n; ++f)
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double k = std::abs(proj[f * nodes.size() + i]);
      if (k > 1e-12) needed[ev.class_of(i)].push_back(k);
    }

  auto table = std::make_unique<SymbolTable>();
  table->grid = grid;
  table->fingerprint = key.fp;
  std::vector<RadialLookup> re, im;
  for (std::size_t c = 0; c < ev.classes(); ++c) {
    re.emplace_back(needed[c], [&](double k) { return ev.real_part(c, k); }, m.alpha());
    if (!m.symmetric())
      im.emplace_back(needed[c], [&](double k) { return ev.imag_part(c, k); }, m.alpha());
    table->tabulated = table->tabulated || re.back().tabulated();
  }

  table->psi.assign(n, cplx(0.0, 0.0));
  for (std::size_t f = 1; f < n; ++f) {
    double sr = 0.0, si = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double k = proj[f * nodes.size() + i];
      const double ak = std::abs(k);
      if (ak <= 1e-12) continue;
      const std::size_t c = ev.class_of(i);
      sr -= nodes[i].weight * re[c](ak);
      if (!m.symmetric()) si += nodes[i].weight * (k > 0 ? 1.0 : -1.0) * im[c](ak);
    }
    if (!std::isfinite(sr) || !std::isfinite(si)) {
      const Point xi = grid.xi(f);
      throw NumericError("symbol is not finite at xi = (" + std::to_string(xi[0]) + ", " +
                         std::to_string(xi[1]) + ", " + std::to_string(xi[2]) + ")");
    }
    table->psi[f] = {sr, si};
  }

  std::lock_guard lock(cache.mu);
  auto [it, inserted] = cache.tables.emplace(key, std::move(table));
  return *it->second;
}

void clear_symbol_cache() {
  auto& cache = symbol_cache();
  std::lock_guard lock(cache.mu);
  cache.tables.clear();
}

// ---------------------------------------------------------------------------
// Multipliers

GridFunction apply_multiplier(const GridFunction& f, const std::function<cplx(std::size_t)>& mult) {
  GridFunction F = f.to_frequency();
  for (std::size_t i = 0; i < F.size(); ++i) F[i] *= mult(i);
  return f.space() == Space::physical ? F.to_physical() : F;
}

GridFunction apply_multiplier(const GridFunction& f, const std::vector<cplx>& mult) {
  if (mult.size() != f.size()) throw UsageError("multiplier size does not match grid");
  return apply_multiplier(f, [&](std::size_t i) { return mult[i]; });
}

GridFunction semigroup(const GridFunction& f, const SymbolTable& table, double t) {
  if (!(t >= 0.0)) throw UsageError("semigroup time must be nonnegative");
  if (!(table.grid == f.grid())) throw UsageError("symbol table grid differs from the function grid");
  if (t == 0.0) return f;
  return apply_multiplier(f, [&](std::size_t i) { return std::exp(t * table.psi[i]); });
}

GridFunction semigroup(const GridFunction& f, const LevyMeasure& m, double t) {
  if (!(t >= 0.0)) throw UsageError("semigroup time must be nonnegative");
  if (t == 0.0) return f;
  return semigroup(f, compute_symbol(m, f.grid()), t);
}

GridFunction apply_generator(const GridFunction& f, const LevyMeasure& m) {
  return apply_multiplier(f, compute_symbol(m, f.grid()).psi);
}

// ---------------------------------------------------------------------------
// Export

void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path);
  out.precision(17);
  const auto& g = f.grid();
  const bool phys = f.space() == Space::physical;
  const char* axes[3] = {"0", "1", "2"};
  for (int a = 0; a < g.dim; ++a) out << (phys ? "x" : "xi") << (g.dim > 1 ? axes[a] : "") << ",";
  out << "re,im\n";
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point p = phys ? g.x(i) : g.xi(i);
    for (int a = 0; a < g.dim; ++a) out << p[a] << ",";
    out << f[i].real() << "," << f[i].imag() << "\n";
  }
}

void write_binary(const GridFunction& f, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "binary export assumes little-endian");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open " + path);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  const auto& g = f.grid();
  const json side{{"dim", g.dim},
                  {"L", g.L},
                  {"M", g.M},
                  {"space", f.space() == Space::physical ? "physical" : "frequency"},
                  {"dtype", "f64le"},
                  {"layout", "row-major, interleaved re/im"},
                  {"count", f.size()},
                  {"frequency_order", "fft"}};
  std::ofstream(path + ".json") << side.dump(2) << "\n";
}

GridFunction read_binary(const std::string& path) {
  std::ifstream sin(path + ".json");
  if (!sin) throw UsageError("missing sidecar " + path + ".json");
  json side;
  sin >> side;
  const TorusGrid g(side.at("dim").get<int>(), side.at("L").get<double>(), side.at("M").get<int>());
  const Space sp = side.at("space").get<std::string>() == "physical" ? Space::physical : Space::frequency;
  std::vector<cplx> vals(g.size());
  std::ifstream in(path, std::ios::binary);
  if (!in.read(reinterpret_cast<char*>(vals.data()), static_cast<std::streamsize>(vals.size() * sizeof(cplx))))
    throw UsageError("binary file " + path + " is truncated");
  return GridFunction(g, std::move(vals), sp);
}

}  // namespace lh
