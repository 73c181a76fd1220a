#include "conclab/charfn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace conclab {

std::complex<double> cf_eval(const DiscreteDistribution& f, std::span<const double> t) {
  if (t.size() != static_cast<std::size_t>(f.dim()))
    throw std::invalid_argument("cf_eval: argument dimension mismatch");
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto p = f.point(i);
    double phase = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) phase += t[j] * p[j];
    re += f.mass(i) * std::cos(phase);
    im += f.mass(i) * std::sin(phase);
  }
  return {re, im};
}

double cf_eval(const CompoundPoissonSpec& spec, std::span<const double> t, double z) {
  const auto& levy = spec.levy();
  if (t.size() != static_cast<std::size_t>(levy.dim()))
    throw std::invalid_argument("cf_eval: argument dimension mismatch");
  double expo = 0.0;
  for (std::size_t i = 0; i < levy.size(); ++i) {
    auto p = levy.point(i);
    double phase = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) phase += t[j] * p[j] * z;
    expo += levy.weight(i) * (std::cos(phase) - 1.0);
  }
  return std::exp(expo);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature (G7/K15 pair).
// ---------------------------------------------------------------------------

namespace {

// Kronrod-15 nodes on [0,1] side (symmetric) with weights; the embedded
// Gauss-7 rule uses the odd-index nodes.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelEval {
  double kronrod;
  double gauss_diff;  // |K15 - G7|
};

template <typename F>
PanelEval eval_panel_1d(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 8; ++i) {
    double fv;
    if (i == 7) {
      fv = f(c);
      resk += kWgk[7] * fv;
      resg += kWg[3] * fv;
    } else {
      double f1 = f(c - h * kXgk[i]);
      double f2 = f(c + h * kXgk[i]);
      resk += kWgk[i] * (f1 + f2);
      if (i % 2 == 1) resg += kWg[i / 2] * (f1 + f2);
    }
  }
  return PanelEval{resk * h, std::fabs(resk - resg) * h};
}

struct Interval {
  double a, b, integral, err;
};

struct AdaptiveResult {
  double value;
  double err;
  std::size_t panels;
};

template <typename F>
AdaptiveResult adaptive_1d(const F& f, double lo, double hi, double tol,
                           std::size_t budget, std::size_t initial_panels) {
  initial_panels = std::clamp<std::size_t>(initial_panels, 1, budget);
  std::vector<Interval> heap;
  heap.reserve(initial_panels + 64);
  double width = (hi - lo) / static_cast<double>(initial_panels);
  double total = 0.0, toterr = 0.0;
  for (std::size_t i = 0; i < initial_panels; ++i) {
    double a = lo + width * static_cast<double>(i);
    double b = (i + 1 == initial_panels) ? hi : a + width;
    auto pe = eval_panel_1d(f, a, b);
    heap.push_back({a, b, pe.kronrod, pe.gauss_diff});
    total += pe.kronrod;
    toterr += pe.gauss_diff;
  }
  auto cmp = [](const Interval& x, const Interval& y) { return x.err < y.err; };
  std::make_heap(heap.begin(), heap.end(), cmp);
  while (toterr > tol && heap.size() < budget) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Interval worst = heap.back();
    heap.pop_back();
    total -= worst.integral;
    toterr -= worst.err;
    double mid = 0.5 * (worst.a + worst.b);
    for (auto [a, b] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
      auto pe = eval_panel_1d(f, a, b);
      heap.push_back({a, b, pe.kronrod, pe.gauss_diff});
      std::push_heap(heap.begin(), heap.end(), cmp);
      total += pe.kronrod;
      toterr += pe.gauss_diff;
    }
    if (worst.b - worst.a < 1e-15 * (hi - lo)) break;  // panel width at rounding floor
  }
  if (toterr > tol)
    throw quadrature_budget_exceeded("adaptive quadrature: tolerance unreachable within panel budget");
  // deterministic compensated re-sum in interval order
  std::sort(heap.begin(), heap.end(),
            [](const Interval& x, const Interval& y) { return x.a < y.a; });
  double s = 0.0, c = 0.0, e = 0.0;
  for (const auto& iv : heap) {
    double t = s + iv.integral;
    c += (std::fabs(s) >= std::fabs(iv.integral)) ? (s - t) + iv.integral
                                                  : (iv.integral - t) + s;
    s = t;
    e += iv.err;
  }
  return AdaptiveResult{s + c, e, heap.size()};
}

struct Rect {
  double ax, bx, ay, by, integral, err;
};

template <typename F>
std::pair<double, double> eval_panel_2d(const F& f, const Rect& r) {
  const double cx = 0.5 * (r.ax + r.bx), hx = 0.5 * (r.bx - r.ax);
  const double cy = 0.5 * (r.ay + r.by), hy = 0.5 * (r.by - r.ay);
  double nodes_x[15], nodes_y[15];
  double wk_x[15], wk_y[15], wg_x[15], wg_y[15];
  int m = 0;
  for (int i = 0; i < 8; ++i) {
    if (i == 7) {
      nodes_x[m] = cx;
      nodes_y[m] = cy;
      wk_x[m] = kWgk[7];
      wk_y[m] = kWgk[7];
      wg_x[m] = kWg[3];
      wg_y[m] = kWg[3];
      ++m;
    } else {
      for (double sgn : {-1.0, 1.0}) {
        nodes_x[m] = cx + sgn * hx * kXgk[i];
        nodes_y[m] = cy + sgn * hy * kXgk[i];
        wk_x[m] = kWgk[i];
        wk_y[m] = kWgk[i];
        wg_x[m] = (i % 2 == 1) ? kWg[i / 2] : 0.0;
        wg_y[m] = wg_x[m];
        ++m;
      }
    }
  }
  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 15; ++j) {
      double fv = f(nodes_x[i], nodes_y[j]);
      resk += wk_x[i] * wk_y[j] * fv;
      resg += wg_x[i] * wg_y[j] * fv;
    }
  }
  resk *= hx * hy;
  resg *= hx * hy;
  return {resk, std::fabs(resk - resg)};
}

template <typename F>
AdaptiveResult adaptive_2d(const F& f, double lox, double hix, double loy, double hiy,
                           double tol, std::size_t budget, std::size_t init_x,
                           std::size_t init_y) {
  init_x = std::clamp<std::size_t>(init_x, 1, 256);
  init_y = std::clamp<std::size_t>(init_y, 1, 256);
  std::vector<Rect> heap;
  double total = 0.0, toterr = 0.0;
  double wx = (hix - lox) / static_cast<double>(init_x);
  double wy = (hiy - loy) / static_cast<double>(init_y);
  for (std::size_t i = 0; i < init_x; ++i) {
    for (std::size_t j = 0; j < init_y; ++j) {
      Rect r{lox + wx * i, lox + wx * (i + 1), loy + wy * j, loy + wy * (j + 1), 0, 0};
      auto [v, e] = eval_panel_2d(f, r);
      r.integral = v;
      r.err = e;
      heap.push_back(r);
      total += v;
      toterr += e;
    }
  }
  auto cmp = [](const Rect& x, const Rect& y) { return x.err < y.err; };
  std::make_heap(heap.begin(), heap.end(), cmp);
  while (toterr > tol && heap.size() < budget) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Rect worst = heap.back();
    heap.pop_back();
    total -= worst.integral;
    toterr -= worst.err;
    Rect h1 = worst, h2 = worst;
    if (worst.bx - worst.ax >= worst.by - worst.ay) {
      double mid = 0.5 * (worst.ax + worst.bx);
      h1.bx = mid;
      h2.ax = mid;
    } else {
      double mid = 0.5 * (worst.ay + worst.by);
      h1.by = mid;
      h2.ay = mid;
    }
    for (Rect* r : {&h1, &h2}) {
      auto [v, e] = eval_panel_2d(f, *r);
      r->integral = v;
      r->err = e;
      heap.push_back(*r);
      std::push_heap(heap.begin(), heap.end(), cmp);
      total += v;
      toterr += e;
    }
    if (worst.bx - worst.ax < 1e-12 * (hix - lox) &&
        worst.by - worst.ay < 1e-12 * (hiy - loy))
      break;
  }
  if (toterr > tol)
    throw quadrature_budget_exceeded("adaptive quadrature: tolerance unreachable within panel budget");
  std::sort(heap.begin(), heap.end(), [](const Rect& x, const Rect& y) {
    if (x.ax != y.ax) return x.ax < y.ax;
    return x.ay < y.ay;
  });
  double s = 0.0, c = 0.0, e = 0.0;
  for (const auto& r : heap) {
    double t = s + r.integral;
    c += (std::fabs(s) >= std::fabs(r.integral)) ? (s - t) + r.integral
                                                 : (r.integral - t) + s;
    s = t;
    e += r.err;
  }
  return AdaptiveResult{s + c, e, heap.size()};
}

// panels sized so that the fastest oscillation advances at most ~2*pi per
// panel; keyed to the largest coordinate magnitude of the atoms
std::size_t oscillation_panels(double range, double max_freq) {
  double p = range * max_freq / (2.0 * std::numbers::pi);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(p)) + 1, 1, 2048);
}

double max_abs_coordinate(const std::vector<double>& pts) {
  double m = 0.0;
  for (double v : pts) m = std::max(m, std::fabs(v));
  return m;
}

template <typename Obj>
EsseenEstimate esseen_impl(const Obj& obj, int d, const std::vector<double>& atom_pts,
                           double tau, QuadratureLimits lim) {
  if (!(tau > 0.0)) throw std::invalid_argument("esseen_integral: tau must be > 0");
  if (d > 2)
    throw std::invalid_argument("esseen_integral: certified error requires d <= 2");
  const double r = 1.0 / tau;
  const double maxc = max_abs_coordinate(atom_pts);
  EsseenEstimate est;
  est.tau = tau;
  if (d == 1) {
    auto f = [&](double t) {
      double tv[1] = {t};
      if constexpr (std::is_same_v<Obj, DiscreteDistribution>)
        return std::abs(cf_eval(obj, std::span<const double>(tv, 1)));
      else
        return cf_eval(obj, std::span<const double>(tv, 1));
    };
    auto res = adaptive_1d(f, -r, r, lim.tol, lim.panel_budget,
                           oscillation_panels(2.0 * r, maxc));
    est.value = tau * res.value;
    est.quadrature_error = tau * res.err;
    est.panels = res.panels;
  } else {
    auto f = [&](double tx, double ty) {
      double tv[2] = {tx, ty};
      if constexpr (std::is_same_v<Obj, DiscreteDistribution>)
        return std::abs(cf_eval(obj, std::span<const double>(tv, 2)));
      else
        return cf_eval(obj, std::span<const double>(tv, 2));
    };
    std::size_t init = oscillation_panels(2.0 * r, maxc);
    auto res = adaptive_2d(f, -r, r, -r, r, lim.tol, lim.panel_budget, init, init);
    est.value = tau * tau * res.value;
    est.quadrature_error = tau * tau * res.err;
    est.panels = res.panels;
  }
  return est;
}

}  // namespace

EsseenEstimate esseen_integral(const DiscreteDistribution& f, double tau,
                               QuadratureLimits lim) {
  return esseen_impl(f, f.dim(), f.points(), tau, lim);
}

EsseenEstimate esseen_integral(const CompoundPoissonSpec& spec, double tau,
                               QuadratureLimits lim) {
  return esseen_impl(spec, spec.dim(), spec.levy().points(), tau, lim);
}

// ---------------------------------------------------------------------------
// Lattice detection and inversion
// ---------------------------------------------------------------------------

std::optional<double> common_lattice_scale(std::span<const double> values,
                                           std::int64_t max_den) {
  double base = 0.0;
  for (double v : values) {
    double a = std::fabs(v);
    if (a > 0.0 && (base == 0.0 || a < base)) base = a;
  }
  if (base == 0.0) return std::nullopt;
  std::int64_t lcm = 1;
  for (double v : values) {
    if (v == 0.0) continue;
    auto ratio = Rational::from_double(v / base, max_den);
    if (!ratio) return std::nullopt;
    std::int64_t den = ratio->den();
    std::int64_t g = std::gcd(lcm, den);
    double test = static_cast<double>(lcm / g) * static_cast<double>(den);
    if (test > static_cast<double>(max_den)) return std::nullopt;
    lcm = lcm / g * den;
  }
  double g = base / static_cast<double>(lcm);
  // verify tightly: genuine lattice members reconstruct to ~1e-16 relative,
  // while the best bounded-denominator convergent of an irrational typically
  // misses by far more; the index cap keeps the torus transforms desk-sized
  for (double v : values) {
    double q = v / g;
    if (std::fabs(q - std::round(q)) > 1e-12 * (1.0 + std::fabs(q))) return std::nullopt;
    if (std::fabs(q) > 65536.0) return std::nullopt;
  }
  return g;
}

std::optional<double> common_lattice_scale(const SpectralMeasure& m, std::int64_t max_den) {
  return common_lattice_scale(std::span<const double>(m.points()), max_den);
}

namespace {

struct LatticeSpec {
  double g = 1.0;
  std::vector<long long> z;  // integer atoms, row-major size() x d
  std::vector<double> w;
  int d = 1;
};

LatticeSpec to_lattice(const CompoundPoissonSpec& spec) {
  auto g = common_lattice_scale(spec.levy());
  if (!g) throw non_lattice_support("lattice path: Levy atoms share no lattice");
  LatticeSpec ls;
  ls.g = *g;
  ls.d = spec.dim();
  const auto& pts = spec.levy().points();
  ls.z.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    ls.z[i] = static_cast<long long>(std::llround(pts[i] / ls.g));
  ls.w = spec.levy().weights();
  return ls;
}

double lattice_cf(const LatticeSpec& ls, std::span<const double> theta) {
  double expo = 0.0;
  const auto dd = static_cast<std::size_t>(ls.d);
  for (std::size_t i = 0; i < ls.w.size(); ++i) {
    double phase = 0.0;
    for (std::size_t j = 0; j < dd; ++j)
      phase += theta[j] * static_cast<double>(ls.z[i * dd + j]);
    expo += ls.w[i] * (std::cos(phase) - 1.0);
  }
  return std::exp(expo);
}

// smallest J with the Poisson(L) tail P(N > J) <= tol
long long poisson_truncation(double lambda, double tol) {
  if (lambda <= 0.0) return 0;
  long long j = 0;
  double term = std::exp(-lambda);
  double cum = term;
  while (1.0 - cum > tol) {
    ++j;
    term *= lambda / static_cast<double>(j);
    cum += term;
    if (j > 100000) break;
  }
  return j;
}

long long max_abs_int(const std::vector<long long>& z) {
  long long m = 0;
  for (long long v : z) m = std::max(m, std::llabs(v));
  return m;
}

}  // namespace

double lattice_inversion(const CompoundPoissonSpec& spec, std::span<const long long> k,
                         double tol, QuadratureLimits lim) {
  LatticeSpec ls = to_lattice(spec);
  if (k.size() != static_cast<std::size_t>(ls.d))
    throw std::invalid_argument("lattice_inversion: index dimension mismatch");
  if (ls.d > 2)
    throw std::invalid_argument("lattice_inversion: d <= 2 required");
  const double pi = std::numbers::pi;
  long long maxz = std::max<long long>(max_abs_int(ls.z), 1);
  lim.tol = std::min(lim.tol, tol);
  if (ls.d == 1) {
    auto f = [&](double th) {
      double tv[1] = {th};
      return std::cos(static_cast<double>(k[0]) * th) *
             lattice_cf(ls, std::span<const double>(tv, 1));
    };
    std::size_t init = oscillation_panels(2.0 * pi, static_cast<double>(maxz + std::llabs(k[0])));
    auto res = adaptive_1d(f, -pi, pi, tol * pi, lim.panel_budget, init);
    return res.value / (2.0 * pi);
  }
  auto f = [&](double tx, double ty) {
    double tv[2] = {tx, ty};
    return std::cos(static_cast<double>(k[0]) * tx + static_cast<double>(k[1]) * ty) *
           lattice_cf(ls, std::span<const double>(tv, 2));
  };
  long long kk = std::max(std::llabs(k[0]), std::llabs(k[1]));
  std::size_t init = oscillation_panels(2.0 * pi, static_cast<double>(maxz + kk));
  auto res = adaptive_2d(f, -pi, pi, -pi, pi, tol * 4.0 * pi * pi, lim.panel_budget,
                         init, init);
  return res.value / (4.0 * pi * pi);
}

DiscreteDistribution lattice_law(const CompoundPoissonSpec& spec, double tol,
                                 std::size_t atom_cap) {
  LatticeSpec ls = to_lattice(spec);
  if (ls.d > 2) throw std::invalid_argument("lattice_law: d <= 2 required");
  const double lambda = spec.alpha();
  if (lambda <= 0.0) return point_mass(std::vector<double>(ls.d, 0.0));
  long long jmax = poisson_truncation(lambda, tol * 0.25);
  long long maxz = std::max<long long>(max_abs_int(ls.z), 1);

  if (ls.d == 1) {
    long long big_k = jmax * maxz;
    // one torus grid evaluates every mass at once; aliasing contributions are
    // masses beyond +-big_k, bounded by the truncated Poisson tail
    long long grid_n = 2 * big_k + 2;
    if (static_cast<std::size_t>(grid_n) > atom_cap || grid_n > (1LL << 22))
      throw cap_exceeded("lattice_law: torus grid exceeds cap");
    std::vector<double> cf(grid_n);
    const double pi = std::numbers::pi;
    for (long long m = 0; m < grid_n; ++m) {
      double th = -pi + 2.0 * pi * static_cast<double>(m) / static_cast<double>(grid_n);
      double tv[1] = {th};
      cf[m] = lattice_cf(ls, std::span<const double>(tv, 1));
    }
    std::vector<double> pts;
    std::vector<double> ms;
    pts.reserve(2 * big_k + 1);
    ms.reserve(2 * big_k + 1);
    for (long long k = -big_k; k <= big_k; ++k) {
      double s = 0.0, comp = 0.0;
      for (long long m = 0; m < grid_n; ++m) {
        double th = -pi + 2.0 * pi * static_cast<double>(m) / static_cast<double>(grid_n);
        double term = std::cos(static_cast<double>(k) * th) * cf[m];
        double t = s + term;
        comp += (std::fabs(s) >= std::fabs(term)) ? (s - t) + term : (term - t) + s;
        s = t;
      }
      double mass = (s + comp) / static_cast<double>(grid_n);
      if (mass > tol * 1e-3) {
        pts.push_back(ls.g * static_cast<double>(k));
        ms.push_back(mass);
      }
    }
    double total = 0.0;
    for (double m : ms) total += m;
    for (double& m : ms) m /= total;
    return DiscreteDistribution(1, std::move(pts), std::move(ms));
  }

  // d == 2
  long long kx = jmax * [&] {
    long long m = 1;
    for (std::size_t i = 0; i < ls.w.size(); ++i)
      m = std::max(m, std::llabs(ls.z[i * 2]));
    return m;
  }();
  long long ky = jmax * [&] {
    long long m = 1;
    for (std::size_t i = 0; i < ls.w.size(); ++i)
      m = std::max(m, std::llabs(ls.z[i * 2 + 1]));
    return m;
  }();
  long long nx = 2 * kx + 2, ny = 2 * ky + 2;
  if (static_cast<double>(nx) * static_cast<double>(ny) > 4.0e6)
    throw cap_exceeded("lattice_law: torus grid exceeds cap");
  const double pi = std::numbers::pi;
  std::vector<double> cf(static_cast<std::size_t>(nx * ny));
  for (long long mx = 0; mx < nx; ++mx) {
    double thx = -pi + 2.0 * pi * static_cast<double>(mx) / static_cast<double>(nx);
    for (long long my = 0; my < ny; ++my) {
      double thy = -pi + 2.0 * pi * static_cast<double>(my) / static_cast<double>(ny);
      double tv[2] = {thx, thy};
      cf[static_cast<std::size_t>(mx * ny + my)] =
          lattice_cf(ls, std::span<const double>(tv, 2));
    }
  }
  // separable cosine transform: contract the y axis once per k2, then sweep k1
  std::vector<double> pts;
  std::vector<double> ms;
  std::vector<double> partial(static_cast<std::size_t>(nx));
  for (long long k2 = -ky; k2 <= ky; ++k2) {
    for (long long mx = 0; mx < nx; ++mx) {
      double s = 0.0;
      for (long long my = 0; my < ny; ++my) {
        double thy = -pi + 2.0 * pi * static_cast<double>(my) / static_cast<double>(ny);
        s += std::cos(static_cast<double>(k2) * thy) *
             cf[static_cast<std::size_t>(mx * ny + my)];
      }
      partial[static_cast<std::size_t>(mx)] = s;
    }
    for (long long k1 = -kx; k1 <= kx; ++k1) {
      double s = 0.0;
      for (long long mx = 0; mx < nx; ++mx) {
        double thx = -pi + 2.0 * pi * static_cast<double>(mx) / static_cast<double>(nx);
        s += std::cos(static_cast<double>(k1) * thx) * partial[static_cast<std::size_t>(mx)];
      }
      double mass = s / static_cast<double>(nx * ny);
      if (mass > tol * 1e-3) {
        pts.push_back(ls.g * static_cast<double>(k1));
        pts.push_back(ls.g * static_cast<double>(k2));
        ms.push_back(mass);
      }
    }
  }
  double total = 0.0;
  for (double m : ms) total += m;
  for (double& m : ms) m /= total;
  return DiscreteDistribution(2, std::move(pts), std::move(ms));
}

// ---------------------------------------------------------------------------
// compound_poisson_exact
// ---------------------------------------------------------------------------

DiscreteDistribution compound_poisson_exact(const CompoundPoissonSpec& spec,
                                            double tail_tol, std::size_t atom_cap) {
  const double lambda = spec.alpha();
  const int d = spec.dim();
  if (lambda <= 0.0) return point_mass(std::vector<double>(d, 0.0));
  if (!(tail_tol > 0.0)) throw std::invalid_argument("compound_poisson_exact: tail_tol > 0");
  long long jmax = poisson_truncation(lambda, tail_tol);
  DiscreteDistribution w = spec.base();
  const auto dd = static_cast<std::size_t>(d);

  // accumulate sum_j pois_j * W^{*j} over raw atom lists, merging at the end
  std::vector<double> cur_pts(dd, 0.0);
  std::vector<double> cur_ms{1.0};
  std::vector<double> out_pts;
  std::vector<double> out_ms;
  double pois = std::exp(-lambda);
  double cum = 0.0;
  for (long long j = 0;; ++j) {
    cum += pois;
    for (std::size_t i = 0; i < cur_ms.size(); ++i) {
      for (std::size_t c = 0; c < dd; ++c) out_pts.push_back(cur_pts[i * dd + c]);
      out_ms.push_back(pois * cur_ms[i]);
    }
    if (j == jmax) break;
    std::size_t next = cur_ms.size() * w.size();
    if (next > atom_cap || out_ms.size() + next > atom_cap)
      throw cap_exceeded("compound_poisson_exact: atom cap exceeded");
    std::vector<double> npts;
    std::vector<double> nms;
    npts.reserve(next * dd);
    nms.reserve(next);
    for (std::size_t i = 0; i < cur_ms.size(); ++i) {
      for (std::size_t s = 0; s < w.size(); ++s) {
        auto ws = w.point(s);
        for (std::size_t c = 0; c < dd; ++c)
          npts.push_back(cur_pts[i * dd + c] + ws[c]);
        nms.push_back(cur_ms[i] * w.mass(s));
      }
    }
    DiscreteDistribution merged(d, std::move(npts), std::move(nms));
    cur_pts = merged.points();
    cur_ms = merged.masses();
    pois *= lambda / static_cast<double>(j + 1);
  }
  // proportional redistribution of the truncated Poisson tail
  for (double& m : out_ms) m /= cum;
  return DiscreteDistribution(d, std::move(out_pts), std::move(out_ms));
}

// ---------------------------------------------------------------------------
// smoothed concentration
// ---------------------------------------------------------------------------

std::string to_string(QPath p) {
  switch (p) {
    case QPath::degenerate: return "degenerate";
    case QPath::inversion_exact: return "inversion-exact";
    case QPath::esseen_surrogate: return "esseen-surrogate";
  }
  return "unknown";
}

SmoothedConcentration smoothed_concentration(const CoefficientVector& a, double lambda,
                                             double kappa, double tol) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::invalid_argument("smoothed_concentration: lambda in [0,1]");
  if (!(kappa > 0.0)) throw std::invalid_argument("smoothed_concentration: kappa > 0");
  if (lambda == 0.0) return {1.0, 0.0, QPath::degenerate};
  CompoundPoissonSpec spec = weighted_sum_levy_spec(a, lambda);
  if (common_lattice_scale(spec.levy())) {
    DiscreteDistribution law = lattice_law(spec, tol * 0.5);
    ConcentrationResult q = concentration(law, kappa);
    double width = q.upper - q.lower;
    return {q.upper, tol + width, QPath::inversion_exact};
  }
  EsseenEstimate e = esseen_integral(spec, kappa, QuadratureLimits{tol, 1u << 18});
  return {e.value, e.quadrature_error, QPath::esseen_surrogate};
}

double smoothed_concentration_bound(const CoefficientVector& a,
                                    const DiscreteDistribution& x, double tau,
                                    double kappa, double delta, double tol) {
  if (!(tau >= 0.0)) throw std::invalid_argument("bound: tau >= 0");
  if (!(kappa > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("bound: kappa, delta > 0");
  DiscreteDistribution g = symmetrize(x);
  double p = tail_mass(g, tau / kappa);
  double factor = static_cast<double>(regularity_factor(kappa, delta, a.dim()));
  return factor * smoothed_concentration(a, p, delta, tol).value;
}

}  // namespace conclab
