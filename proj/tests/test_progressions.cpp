#include <doctest.h>

#include <set>

#include "conclab/progressions.hpp"

using namespace conclab;

namespace {

std::set<double> point_values(const PointSet& ps) {
  std::set<double> out;
  for (std::size_t i = 0; i < ps.size(); ++i) out.insert(ps.point(i)[0]);
  return out;
}

}  // namespace

TEST_CASE("lattice enumeration in boxes and disks") {
  auto box = enumerate_lattice_points(ConvexBody::box({2.5}));
  REQUIRE(box.size() == 5);
  CHECK(box.front() == std::vector<long long>{-2});
  CHECK(box.back() == std::vector<long long>{2});

  auto disk = enumerate_lattice_points(ConvexBody::ellipsoid({1.5, 1.5}));
  CHECK(disk.size() == 9);  // the 3x3 grid of |nu_i| <= 1

  auto tiny = enumerate_lattice_points(ConvexBody::box({0.5}));
  REQUIRE(tiny.size() == 1);
  CHECK(tiny[0] == std::vector<long long>{0});

  CHECK_THROWS_AS(enumerate_lattice_points(ConvexBody::box({1e9, 1e9})), cap_exceeded);
}

TEST_CASE("slab bodies: membership, bounds, unboundedness") {
  // |x+y| <= 1 and |x-y| <= 1: a diamond with vertices (+-1, 0), (0, +-1)
  ConvexBody diamond = ConvexBody::slabs(2, {{1.0, 1.0}, {1.0, -1.0}});
  auto pts = enumerate_lattice_points(diamond);
  CHECK(pts.size() == 5);
  auto radii = diamond.bounding_radii();
  CHECK(radii[0] == doctest::Approx(1.0));
  CHECK(radii[1] == doctest::Approx(1.0));

  ConvexBody degenerate = ConvexBody::slabs(2, {{1.0, 0.0}});
  CHECK_THROWS_AS(degenerate.bounding_radii(), std::invalid_argument);
}

TEST_CASE("points_of a GAP with multiplicity") {
  GAP g;
  g.g0 = {0.0};
  g.gens = {{3.0}};
  g.lo = {-2};
  g.hi = {2};
  PointSet ps = points_of(g);
  CHECK(ps.proper());
  CHECK(ps.volume == 5);
  CHECK(point_values(ps) == std::set<double>{-6, -3, 0, 3, 6});

  GAP collinear;
  collinear.g0 = {0.0};
  collinear.gens = {{1.0}, {1.0}};
  collinear.lo = {-1, -1};
  collinear.hi = {1, 1};
  PointSet cps = points_of(collinear);
  CHECK(cps.volume == 9);
  CHECK(cps.size() == 5);  // collisions along the diagonal
  CHECK_FALSE(cps.proper());
  long long mult0 = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps.point(i)[0] == 0.0) mult0 = cps.multiplicity[i];
  }
  CHECK(mult0 == 3);
}

TEST_CASE("points_of a CGAP") {
  CGAP k = CGAP::rank1(2.0, 0.0, 2);  // step 2, |j| <= 2
  PointSet ps = points_of(k);
  CHECK(point_values(ps) == std::set<double>{-4, -2, 0, 2, 4});
  CHECK(ps.volume == 5);

  // h = 2 against a box of radius 2.5 is the same set, through the body path
  CGAP k2;
  k2.blocks.push_back(CgapBlock{{2.0}, ConvexBody::box({2.5}), 0.0});
  CHECK(point_values(points_of(k2)) == std::set<double>{-4, -2, 0, 2, 4});
}

TEST_CASE("signed cube points and the three representations agree") {
  SignedCube cube;
  cube.u = {{1.0}, {10.0}};
  PointSet direct = points_of(cube);
  CHECK(point_values(direct) ==
        std::set<double>{-11, -10, -9, -1, 0, 1, 9, 10, 11});
  CHECK(direct.volume == 9);

  PointSet via_gap = points_of(cube.as_gap());
  PointSet via_cgap = points_of(cube.as_cgap());
  CHECK(point_values(via_gap) == point_values(direct));
  CHECK(point_values(via_cgap) == point_values(direct));
  CHECK(via_gap.volume == direct.volume);
  CHECK(via_cgap.volume == direct.volume);
  CHECK(cube.as_gap().symmetric());
}

TEST_CASE("neighborhood distance in max-norm") {
  GAP g;
  g.g0 = {0.0};
  g.gens = {{3.0}};
  g.lo = {-2};
  g.hi = {2};
  PointSet ps = points_of(g);
  double x4[1] = {4.0};
  CHECK(neighborhood_distance(x4, ps) == doctest::Approx(1.0));
  double x0[1] = {0.0};
  CHECK(neighborhood_distance(x0, ps) == 0.0);

  // product set {0,3,6} x {0}: max-norm distance of (4,0) is max(1,0) = 1
  GAP gx;
  gx.g0 = {3.0, 0.0};
  gx.gens = {{3.0, 0.0}};
  gx.lo = {-1};
  gx.hi = {1};
  PointSet psx = points_of(gx);
  double p[2] = {4.0, 0.0};
  CHECK(neighborhood_distance(p, psx) == doctest::Approx(1.0));
}

TEST_CASE("cover_count") {
  CGAP k = CGAP::rank1(1.0, 0.0, 5);  // {-5..5}
  PointSet ps = points_of(k);
  CoefficientVector a({1.0, 2.0, 3.0, 10.0}, 1);
  CoverCount cc = cover_count(a, ps, 0.0);
  CHECK(cc.covered == 3);
  REQUIRE(cc.outliers.size() == 1);
  CHECK(cc.outliers[0] == 3);
  CHECK(cover_count(a, ps, 10.0).covered == 4);
  CoverCount monotone_check = cover_count(a, ps, 4.9);
  CHECK(monotone_check.covered >= cc.covered);
}

TEST_CASE("embed CGAP in a symmetric GAP") {
  CGAP disk;
  disk.blocks.push_back(CgapBlock{{1.0, 10.0}, ConvexBody::ellipsoid({1.5, 1.5}), 0.0});
  EmbedResult emb = embed_cgap_in_gap(disk);
  CHECK(emb.gap.symmetric());
  CHECK(emb.gap.rank() == 2);
  CHECK(emb.gap.volume() == 9);
  CHECK(emb.volume_ratio == doctest::Approx(1.0));
  // containment: every CGAP point at distance zero from the GAP
  PointSet gap_pts = points_of(emb.gap);
  PointSet cgap_pts = points_of(disk);
  for (std::size_t i = 0; i < cgap_pts.size(); ++i) {
    CHECK(neighborhood_distance(cgap_pts.point(i), gap_pts) <= 1e-12);
  }

  CGAP degenerate = CGAP::rank1(0.0, 0.0, 0);
  EmbedResult zero = embed_cgap_in_gap(degenerate);
  CHECK(points_of(zero.gap).size() == 1);
}

TEST_CASE("products assemble block structure") {
  GAP g1;
  g1.g0 = {0.0};
  g1.gens = {{3.0}};
  g1.lo = {-1};
  g1.hi = {1};
  GAP g2;
  g2.g0 = {0.0};
  g2.gens = {{5.0}};
  g2.lo = {-1};
  g2.hi = {1};
  GAP prod = product(std::vector<GAP>{g1, g2});
  CHECK(prod.rank() == 2);
  CHECK(prod.volume() == 9);
  PointSet ps = points_of(prod);
  CHECK(ps.size() == 9);
  for (const auto& gen : prod.gens) {
    int nonzero = 0;
    for (double c : gen) nonzero += (c != 0.0);
    CHECK(nonzero == 1);
  }

  // collapsing one factor to {0}
  GAP zero;
  zero.g0 = {0.0};
  zero.gens = {{0.0}};
  zero.lo = {0};
  zero.hi = {0};
  GAP prod0 = product(std::vector<GAP>{g1, zero});
  CHECK(points_of(prod0).size() == 3);

  // signed-cube assembly: u1 = (1,0), u2 = (0,2)
  SignedCube c1;
  c1.u = {{1.0}};
  SignedCube c2;
  c2.u = {{2.0}};
  SignedCube cp = product(std::vector<SignedCube>{c1, c2});
  REQUIRE(cp.rank() == 2);
  CHECK(cp.u[0] == std::vector<double>{1.0, 0.0});
  CHECK(cp.u[1] == std::vector<double>{0.0, 2.0});

  // product volume multiplies
  CGAP k1 = CGAP::rank1(3.0, 0.0, 1);
  CGAP k2 = CGAP::rank1(5.0, 0.0, 2);
  CGAP kp = product(std::vector<CGAP>{k1, k2});
  CHECK(points_of(kp).volume == 15);
}

TEST_CASE("properize fixes collinear generators") {
  GAP collinear;
  collinear.g0 = {0.0};
  collinear.gens = {{1.0}, {1.0}};
  collinear.lo = {-1, -1};
  collinear.hi = {1, 1};
  CHECK_FALSE(points_of(collinear).proper());

  GAP fixed = properize(collinear, 0.1);
  PointSet fps = points_of(fixed);
  CHECK(fps.proper());
  CHECK(fixed.volume() == collinear.volume());
  CHECK(fixed.lo == collinear.lo);
  CHECK(fixed.hi == collinear.hi);
  // [K]_tau within [K*]_{2tau}: every original point within tau of the fix
  PointSet ops = points_of(collinear);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    CHECK(neighborhood_distance(ops.point(i), fps) <= 0.1 + 1e-12);
  }

  // already proper: returned unchanged
  GAP g;
  g.g0 = {0.0};
  g.gens = {{3.0}};
  g.lo = {-2};
  g.hi = {2};
  GAP same = properize(g, 0.5);
  CHECK(same.gens[0][0] == 3.0);

  SignedCube cube;
  cube.u = {{1.0}, {1.0}, {2.0}};
  SignedCube pc = properize(cube, 0.25);
  PointSet pps = points_of(pc);
  CHECK(pps.proper());
  CHECK(pps.size() == 27);
  CHECK_THROWS_AS(properize(g, 0.0), std::invalid_argument);
}
