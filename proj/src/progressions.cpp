#include "conclab/progressions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace conclab {

namespace {

constexpr double kBodyEps = 1e-12;

void merge_multiplicity(int d, std::vector<double>& points,
                        std::vector<long long>& mult, double tol) {
  const std::size_t n = mult.size();
  if (n == 0) return;
  const auto dd = static_cast<std::size_t>(d);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < dd; ++j) {
      double x = points[a * dd + j], y = points[b * dd + j];
      if (x != y) return x < y;
    }
    return false;
  });
  std::vector<double> out_p;
  std::vector<long long> out_m;
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t i = idx[r];
    bool joined = false;
    if (!out_m.empty()) {
      std::size_t last = out_m.size() - 1;
      bool close = true;
      for (std::size_t j = 0; j < dd; ++j) {
        if (std::fabs(points[i * dd + j] - out_p[last * dd + j]) > tol) {
          close = false;
          break;
        }
      }
      if (close) {
        out_m[last] += mult[i];
        joined = true;
      }
    }
    if (!joined) {
      for (std::size_t j = 0; j < dd; ++j) out_p.push_back(points[i * dd + j]);
      out_m.push_back(mult[i]);
    }
  }
  points = std::move(out_p);
  mult = std::move(out_m);
}

double points_scale(const std::vector<double>& pts) {
  double m = 0.0;
  for (double v : pts) m = std::max(m, std::fabs(v));
  return m;
}

// solve r x r linear system in place; returns false when singular
bool solve_small(std::vector<std::vector<double>> m, std::vector<double>& rhs) {
  const std::size_t r = rhs.size();
  for (std::size_t col = 0; col < r; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < r; ++i) {
      if (std::fabs(m[i][col]) > std::fabs(m[piv][col])) piv = i;
    }
    if (std::fabs(m[piv][col]) < 1e-12) return false;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t i = 0; i < r; ++i) {
      if (i == col) continue;
      double f = m[i][col] / m[col][col];
      for (std::size_t j = col; j < r; ++j) m[i][j] -= f * m[col][j];
      rhs[i] -= f * rhs[col];
    }
  }
  for (std::size_t i = 0; i < r; ++i) rhs[i] /= m[i][i];
  return true;
}

int matrix_rank(std::vector<std::vector<double>> m) {
  if (m.empty()) return 0;
  const std::size_t rows = m.size();
  const std::size_t cols = m.front().size();
  int rank = 0;
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < rows; ++col) {
    std::size_t piv = row;
    for (std::size_t i = row + 1; i < rows; ++i) {
      if (std::fabs(m[i][col]) > std::fabs(m[piv][col])) piv = i;
    }
    if (std::fabs(m[piv][col]) < 1e-10) continue;
    std::swap(m[piv], m[row]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == row) continue;
      double f = m[i][col] / m[row][col];
      for (std::size_t j = 0; j < cols; ++j) m[i][j] -= f * m[row][j];
    }
    ++rank;
    ++row;
  }
  return rank;
}

}  // namespace

// ---------------------------------------------------------------------------
// ConvexBody
// ---------------------------------------------------------------------------

ConvexBody ConvexBody::box(std::vector<double> radii) {
  ConvexBody b;
  b.kind_ = Kind::box;
  b.r_ = static_cast<int>(radii.size());
  for (double r : radii) {
    if (!(r >= 0.0) || !std::isfinite(r))
      throw std::invalid_argument("ConvexBody: box radii must be >= 0");
  }
  b.radii_ = std::move(radii);
  if (b.r_ < 1) throw std::invalid_argument("ConvexBody: rank >= 1 required");
  return b;
}

ConvexBody ConvexBody::ellipsoid(std::vector<double> radii) {
  ConvexBody b;
  b.kind_ = Kind::ellipsoid;
  b.r_ = static_cast<int>(radii.size());
  for (double r : radii) {
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("ConvexBody: ellipsoid radii must be > 0");
  }
  b.radii_ = std::move(radii);
  if (b.r_ < 1) throw std::invalid_argument("ConvexBody: rank >= 1 required");
  return b;
}

ConvexBody ConvexBody::slabs(int r, std::vector<std::vector<double>> normals) {
  ConvexBody b;
  b.kind_ = Kind::slabs;
  b.r_ = r;
  if (r < 1) throw std::invalid_argument("ConvexBody: rank >= 1 required");
  for (const auto& w : normals) {
    if (static_cast<int>(w.size()) != r)
      throw std::invalid_argument("ConvexBody: slab normal dimension mismatch");
  }
  b.normals_ = std::move(normals);
  return b;
}

bool ConvexBody::contains(std::span<const double> x) const {
  switch (kind_) {
    case Kind::box: {
      for (int j = 0; j < r_; ++j) {
        if (std::fabs(x[j]) > radii_[j] + kBodyEps * (1.0 + radii_[j])) return false;
      }
      return true;
    }
    case Kind::ellipsoid: {
      double s = 0.0;
      for (int j = 0; j < r_; ++j) {
        double t = x[j] / radii_[j];
        s += t * t;
      }
      return s <= 1.0 + kBodyEps;
    }
    case Kind::slabs: {
      for (const auto& w : normals_) {
        double dot = 0.0;
        double scale = 0.0;
        for (int j = 0; j < r_; ++j) {
          dot += w[j] * x[j];
          scale += std::fabs(w[j] * x[j]);
        }
        if (std::fabs(dot) > 1.0 + kBodyEps * (1.0 + scale)) return false;
      }
      return true;
    }
  }
  return false;
}

std::vector<double> ConvexBody::bounding_radii() const {
  if (kind_ != Kind::slabs) return radii_;
  // boundedness requires the slab normals to span R^r; the bounding box is
  // then attained at polytope vertices (r active constraints with signs)
  const auto rr = static_cast<std::size_t>(r_);
  if (matrix_rank(normals_) < r_)
    throw std::invalid_argument("ConvexBody: slab intersection is unbounded");
  std::vector<double> best(rr, 0.0);
  const std::size_t s = normals_.size();
  if (s < rr) throw std::invalid_argument("ConvexBody: slab intersection is unbounded");
  std::vector<std::size_t> comb(rr);
  std::iota(comb.begin(), comb.end(), 0);
  auto next_comb = [&]() {
    for (std::size_t i = rr; i-- > 0;) {
      if (comb[i] < s - (rr - i)) {
        ++comb[i];
        for (std::size_t j = i + 1; j < rr; ++j) comb[j] = comb[j - 1] + 1;
        return true;
      }
    }
    return false;
  };
  do {
    for (unsigned signs = 0; signs < (1u << rr); ++signs) {
      std::vector<std::vector<double>> m(rr, std::vector<double>(rr));
      std::vector<double> rhs(rr);
      for (std::size_t i = 0; i < rr; ++i) {
        m[i] = normals_[comb[i]];
        rhs[i] = ((signs >> i) & 1u) ? 1.0 : -1.0;
      }
      if (!solve_small(std::move(m), rhs)) continue;
      if (!contains(rhs)) continue;
      for (std::size_t j = 0; j < rr; ++j)
        best[j] = std::max(best[j], std::fabs(rhs[j]));
    }
  } while (next_comb());
  return best;
}

std::vector<std::vector<long long>> enumerate_lattice_points(const ConvexBody& v,
                                                             std::size_t cap) {
  const int r = v.rank();
  if (r > kMaxLatticeRank)
    throw std::invalid_argument("enumerate_lattice_points: rank exceeds desk scale");
  std::vector<double> radii = v.bounding_radii();
  std::vector<long long> lo(r), hi(r);
  double cells = 1.0;
  for (int j = 0; j < r; ++j) {
    if (!std::isfinite(radii[j]))
      throw std::invalid_argument("enumerate_lattice_points: unbounded body");
    hi[j] = static_cast<long long>(std::floor(radii[j] + kBodyEps));
    lo[j] = -hi[j];
    cells *= static_cast<double>(hi[j] - lo[j] + 1);
    if (cells > 1e15)
      throw cap_exceeded("enumerate_lattice_points: bounding box too large");
  }
  std::vector<std::vector<long long>> out;
  std::vector<long long> cur(lo);
  std::vector<double> x(r);
  while (true) {
    for (int j = 0; j < r; ++j) x[j] = static_cast<double>(cur[j]);
    if (v.contains(x)) {
      out.push_back(cur);
      if (out.size() > cap)
        throw cap_exceeded("enumerate_lattice_points: cap exceeded");
    }
    int j = r - 1;
    while (j >= 0 && cur[j] == hi[j]) {
      cur[j] = lo[j];
      --j;
    }
    if (j < 0) break;
    ++cur[j];
  }
  return out;
}

// ---------------------------------------------------------------------------
// GAP
// ---------------------------------------------------------------------------

void GAP::validate() const {
  if (g0.empty()) throw std::invalid_argument("GAP: dimension >= 1 required");
  if (gens.size() != lo.size() || gens.size() != hi.size())
    throw std::invalid_argument("GAP: generator/bound size mismatch");
  for (const auto& g : gens) {
    if (g.size() != g0.size())
      throw std::invalid_argument("GAP: generator dimension mismatch");
  }
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (lo[j] > hi[j]) throw std::invalid_argument("GAP: L_j <= L'_j required");
  }
  (void)volume();
}

long long GAP::volume() const {
  long long v = 1;
  for (std::size_t j = 0; j < lo.size(); ++j) {
    long long w = hi[j] - lo[j] + 1;
    if (v > kVolumeCap / w) throw cap_exceeded("GAP: volume exceeds cap");
    v *= w;
  }
  return v;
}

bool GAP::symmetric() const {
  for (double v : g0) {
    if (v != 0.0) return false;
  }
  for (std::size_t j = 0; j < lo.size(); ++j) {
    if (lo[j] != -hi[j]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// CGAP
// ---------------------------------------------------------------------------

int CGAP::rank() const {
  int r = 0;
  for (const auto& b : blocks) r += static_cast<int>(b.h.size());
  return r;
}

bool CGAP::pure() const {
  for (const auto& b : blocks) {
    if (b.offset != 0.0) return false;
  }
  return true;
}

void CGAP::validate() const {
  if (blocks.empty()) throw std::invalid_argument("CGAP: at least one block");
  for (const auto& b : blocks) {
    if (b.h.empty()) throw std::invalid_argument("CGAP: empty block");
    if (static_cast<int>(b.h.size()) != b.body.rank())
      throw std::invalid_argument("CGAP: h/body rank mismatch");
  }
}

CGAP CGAP::rank1(double h, double offset, long long half_width) {
  CGAP k;
  k.blocks.push_back(CgapBlock{
      {h}, ConvexBody::box({static_cast<double>(half_width) + 0.5}), offset});
  return k;
}

// ---------------------------------------------------------------------------
// SignedCube
// ---------------------------------------------------------------------------

GAP SignedCube::as_gap() const {
  GAP g;
  g.g0.assign(static_cast<std::size_t>(dim()), 0.0);
  g.gens = u;
  g.lo.assign(u.size(), -1);
  g.hi.assign(u.size(), 1);
  return g;
}

CGAP SignedCube::as_cgap() const {
  if (dim() != 1)
    throw std::invalid_argument("SignedCube::as_cgap: one-dimensional cubes only");
  CGAP k;
  std::vector<double> h;
  h.reserve(u.size());
  for (const auto& v : u) h.push_back(v[0]);
  k.blocks.push_back(
      CgapBlock{std::move(h), ConvexBody::box(std::vector<double>(u.size(), 1.5)), 0.0});
  return k;
}

// ---------------------------------------------------------------------------
// points_of
// ---------------------------------------------------------------------------

PointSet points_of(const GAP& k, std::size_t cap) {
  k.validate();
  long long vol = k.volume();
  if (static_cast<std::size_t>(vol) > cap)
    throw cap_exceeded("points_of: GAP volume exceeds cap");
  const int d = k.dim();
  const auto dd = static_cast<std::size_t>(d);
  const int r = k.rank();
  std::vector<double> pts;
  std::vector<long long> mult;
  pts.reserve(static_cast<std::size_t>(vol) * dd);
  mult.reserve(static_cast<std::size_t>(vol));
  std::vector<long long> cur(k.lo);
  while (true) {
    for (std::size_t j = 0; j < dd; ++j) {
      double x = k.g0[j];
      for (int i = 0; i < r; ++i) x += static_cast<double>(cur[i]) * k.gens[i][j];
      pts.push_back(x);
    }
    mult.push_back(1);
    int j = r - 1;
    while (j >= 0 && cur[j] == k.hi[j]) {
      cur[j] = k.lo[j];
      --j;
    }
    if (j < 0) break;
    ++cur[j];
  }
  double tol = kMergeRelTol * (1.0 + points_scale(pts));
  merge_multiplicity(d, pts, mult, tol);
  PointSet ps;
  ps.d = d;
  ps.points = std::move(pts);
  ps.multiplicity = std::move(mult);
  ps.volume = vol;
  return ps;
}

PointSet points_of(const CGAP& k, std::size_t cap) {
  k.validate();
  const int d = k.dim();
  // enumerate each block's one-dimensional values with multiplicity
  std::vector<std::vector<double>> block_vals(d);
  std::vector<std::vector<long long>> block_mult(d);
  long long vol = 1;
  for (int b = 0; b < d; ++b) {
    auto lattice = enumerate_lattice_points(k.blocks[b].body, cap);
    if (lattice.size() > k.m_cap)
      throw cap_exceeded("points_of: CGAP lattice-point count exceeds m_cap");
    std::vector<double> vals;
    std::vector<long long> mult(lattice.size(), 1);
    vals.reserve(lattice.size());
    for (const auto& nu : lattice) {
      double x = k.blocks[b].offset;
      for (std::size_t i = 0; i < nu.size(); ++i)
        x += static_cast<double>(nu[i]) * k.blocks[b].h[i];
      vals.push_back(x);
    }
    double tol = kMergeRelTol * (1.0 + points_scale(vals));
    merge_multiplicity(1, vals, mult, tol);
    if (vol > 0 && lattice.size() > 0 &&
        static_cast<double>(vol) * static_cast<double>(lattice.size()) >
            static_cast<double>(kVolumeCap))
      throw cap_exceeded("points_of: CGAP volume exceeds cap");
    vol *= static_cast<long long>(lattice.size());
    block_vals[b] = std::move(vals);
    block_mult[b] = std::move(mult);
  }
  // cartesian product across blocks
  std::size_t count = 1;
  for (int b = 0; b < d; ++b) {
    count *= block_vals[b].size();
    if (count > cap) throw cap_exceeded("points_of: CGAP product exceeds cap");
  }
  std::vector<double> pts;
  std::vector<long long> mult;
  pts.reserve(count * static_cast<std::size_t>(d));
  mult.reserve(count);
  std::vector<std::size_t> cur(static_cast<std::size_t>(d), 0);
  while (true) {
    long long m = 1;
    for (int b = 0; b < d; ++b) {
      pts.push_back(block_vals[b][cur[b]]);
      m *= block_mult[b][cur[b]];
    }
    mult.push_back(m);
    int b = d - 1;
    while (b >= 0 && cur[b] + 1 == block_vals[b].size()) {
      cur[b] = 0;
      --b;
    }
    if (b < 0) break;
    ++cur[b];
  }
  double tol = kMergeRelTol * (1.0 + points_scale(pts));
  merge_multiplicity(d, pts, mult, tol);
  PointSet ps;
  ps.d = d;
  ps.points = std::move(pts);
  ps.multiplicity = std::move(mult);
  ps.volume = vol;
  return ps;
}

PointSet points_of(const SignedCube& k, std::size_t cap) {
  return points_of(k.as_gap(), cap);
}

// ---------------------------------------------------------------------------
// neighborhoods and covers
// ---------------------------------------------------------------------------

double neighborhood_distance(std::span<const double> x, const PointSet& k) {
  if (x.size() != static_cast<std::size_t>(k.d))
    throw std::invalid_argument("neighborhood_distance: dimension mismatch");
  double best = kInfinity;
  for (std::size_t i = 0; i < k.size(); ++i)
    best = std::min(best, max_norm_dist(x, k.point(i)));
  return best;
}

CoverCount cover_count(const CoefficientVector& a, const PointSet& k, double tau) {
  if (a.dim() != k.d) throw std::invalid_argument("cover_count: dimension mismatch");
  CoverCount cc;
  double slack = kMergeRelTol * (1.0 + points_scale(k.points));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (neighborhood_distance(a.entry(i), k) <= tau + slack)
      ++cc.covered;
    else
      cc.outliers.push_back(i);
  }
  return cc;
}

// ---------------------------------------------------------------------------
// embed / product / properize
// ---------------------------------------------------------------------------

EmbedResult embed_cgap_in_gap(const CGAP& k, std::size_t cap) {
  k.validate();
  const int d = k.dim();
  GAP g;
  g.g0.assign(static_cast<std::size_t>(d), 0.0);
  for (int b = 0; b < d; ++b) {
    g.g0[b] = k.blocks[b].offset;
    auto lattice = enumerate_lattice_points(k.blocks[b].body, cap);
    const auto rb = k.blocks[b].h.size();
    std::vector<long long> bound(rb, 0);
    for (const auto& nu : lattice) {
      for (std::size_t i = 0; i < rb; ++i)
        bound[i] = std::max(bound[i], std::llabs(nu[i]));
    }
    for (std::size_t i = 0; i < rb; ++i) {
      std::vector<double> gen(static_cast<std::size_t>(d), 0.0);
      gen[b] = k.blocks[b].h[i];
      g.gens.push_back(std::move(gen));
      g.lo.push_back(-bound[i]);
      g.hi.push_back(bound[i]);
    }
  }
  g.validate();
  PointSet cg = points_of(k, cap);
  double ratio = cg.size() == 0
                     ? 0.0
                     : static_cast<double>(g.volume()) / static_cast<double>(cg.size());
  return EmbedResult{std::move(g), ratio};
}

GAP product(const std::vector<GAP>& parts) {
  if (parts.empty()) throw std::invalid_argument("product: at least one part");
  const int d = static_cast<int>(parts.size());
  GAP g;
  g.g0.assign(static_cast<std::size_t>(d), 0.0);
  for (int b = 0; b < d; ++b) {
    const GAP& p = parts[b];
    if (p.dim() != 1) throw std::invalid_argument("product: parts must be one-dimensional");
    g.g0[b] = p.g0[0];
    for (int i = 0; i < p.rank(); ++i) {
      std::vector<double> gen(static_cast<std::size_t>(d), 0.0);
      gen[b] = p.gens[i][0];
      g.gens.push_back(std::move(gen));
      g.lo.push_back(p.lo[i]);
      g.hi.push_back(p.hi[i]);
    }
  }
  g.validate();
  return g;
}

CGAP product(const std::vector<CGAP>& parts) {
  if (parts.empty()) throw std::invalid_argument("product: at least one part");
  CGAP out;
  out.m_cap = kEnumerationCap;
  for (const auto& p : parts) {
    if (p.dim() != 1) throw std::invalid_argument("product: parts must be one-dimensional");
    out.blocks.push_back(p.blocks.front());
    out.m_cap = std::min(out.m_cap, p.m_cap);
  }
  out.validate();
  return out;
}

SignedCube product(const std::vector<SignedCube>& parts) {
  if (parts.empty()) throw std::invalid_argument("product: at least one part");
  const int d = static_cast<int>(parts.size());
  SignedCube out;
  for (int b = 0; b < d; ++b) {
    const SignedCube& p = parts[b];
    if (p.dim() != 1) throw std::invalid_argument("product: parts must be one-dimensional");
    for (const auto& v : p.u) {
      std::vector<double> gen(static_cast<std::size_t>(d), 0.0);
      gen[b] = v[0];
      out.u.push_back(std::move(gen));
    }
  }
  return out;
}

namespace {

constexpr int kPrimes[16] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// perturbation magnitudes: delta_j <= tau / (2 Vol) and the total reachable
// displacement sum_j maxbound_j * delta_j <= tau, so [K]_tau lies inside
// [K*]_{2tau} by construction
std::vector<double> perturbation_magnitudes(const GAP& k, double tau,
                                            const std::vector<double>& unit_weights) {
  const int r = k.rank();
  double vol = static_cast<double>(k.volume());
  double wmax = 0.0;
  for (double w : unit_weights) wmax = std::max(wmax, w);
  double bound_sum = 0.0;
  for (int j = 0; j < r; ++j) {
    double b = static_cast<double>(std::max(std::llabs(k.lo[j]), std::llabs(k.hi[j])));
    bound_sum += b * unit_weights[j];
  }
  double scale = tau / (2.0 * vol * std::max(wmax, 1e-300));
  if (bound_sum > 0.0) scale = std::min(scale, tau / bound_sum);
  std::vector<double> out(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) out[j] = scale * unit_weights[j];
  return out;
}

GAP perturb(const GAP& k, const std::vector<double>& deltas) {
  GAP out = k;
  for (int j = 0; j < k.rank(); ++j) {
    auto& gen = out.gens[j];
    double norm = max_norm(gen);
    if (norm == 0.0) {
      gen[0] += deltas[j];
    } else {
      for (auto& c : gen) c += deltas[j] * (c / norm);
    }
  }
  return out;
}

bool proper_and_contains(const GAP& original, const GAP& candidate, double tau,
                         std::size_t cap) {
  PointSet ps = points_of(candidate, cap);
  if (!ps.proper()) return false;
  PointSet orig = points_of(original, cap);
  for (std::size_t i = 0; i < orig.size(); ++i) {
    if (neighborhood_distance(orig.point(i), ps) > tau * (1.0 + 1e-12)) return false;
  }
  return true;
}

}  // namespace

GAP properize(const GAP& k, double tau, std::uint64_t seed) {
  if (!(tau > 0.0)) throw std::invalid_argument("properize: tau must be > 0");
  k.validate();
  PointSet ps = points_of(k);
  if (ps.proper()) return k;
  const int r = k.rank();
  std::vector<double> weights(static_cast<std::size_t>(r));
  double pmax = static_cast<double>(kPrimes[std::min(r - 1, 15)]);
  for (int j = 0; j < r; ++j)
    weights[j] = static_cast<double>(kPrimes[std::min(j, 15)]) / pmax;
  GAP cand = perturb(k, perturbation_magnitudes(k, tau, weights));
  if (proper_and_contains(k, cand, tau, kEnumerationCap)) return cand;
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  for (int attempt = 0; attempt < 16; ++attempt) {
    for (int j = 0; j < r; ++j) {
      // fresh weights in (0, 1], deterministic given seed
      weights[j] = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    }
    cand = perturb(k, perturbation_magnitudes(k, tau, weights));
    if (proper_and_contains(k, cand, tau, kEnumerationCap)) return cand;
  }
  throw std::runtime_error("properize: no proper perturbation within retry budget");
}

SignedCube properize(const SignedCube& k, double tau, std::uint64_t seed) {
  GAP g = properize(k.as_gap(), tau, seed);
  SignedCube out;
  out.u = g.gens;
  return out;
}

}  // namespace conclab
