#include "bentspec/geometry.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bentspec;

namespace {

// Vector-geometry oracle for the dihedral angles of a trihedral corner:
// build explicit unit rays with the prescribed pairwise angles and measure
// the angle between face planes along each edge.
std::array<double, 3> dihedrals_from_rays(const std::array<double, 3>& a) {
  using V = std::array<double, 3>;
  auto dot = [](const V& u, const V& v) {
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  };
  auto normalized = [&](V u) {
    const double n = std::sqrt(dot(u, u));
    return V{u[0] / n, u[1] / n, u[2] / n};
  };
  // a[0] = angle(e0,e1), a[1] = angle(e1,e2), a[2] = angle(e2,e0).
  const V e0{1, 0, 0};
  const V e1{std::cos(a[0]), std::sin(a[0]), 0};
  const double u = std::cos(a[2]);
  const double v = (std::cos(a[1]) - u * std::cos(a[0])) / std::sin(a[0]);
  const double w2 = 1.0 - u * u - v * v;
  EXPECT_GT(w2, 0.0) << "degenerate test triple";
  const V e2{u, v, std::sqrt(w2)};
  const std::array<V, 3> e{e0, e1, e2};

  auto dihedral_at = [&](int m, int i, int j) {
    auto tangent = [&](const V& x) {
      const double c = dot(x, e[m]);
      return normalized(V{x[0] - c * e[m][0], x[1] - c * e[m][1], x[2] - c * e[m][2]});
    };
    const V ti = tangent(e[i]), tj = tangent(e[j]);
    return std::acos(std::clamp(dot(ti, tj), -1.0, 1.0));
  };
  // The formula's beta_k is the spherical angle opposite the side a_k, i.e.
  // the dihedral along the edge not bounding that side.
  std::array<double, 3> beta{};
  for (int k = 0; k < 3; ++k) {
    const int m = (k + 2) % 3;
    beta[k] = dihedral_at(m, (m + 1) % 3, (m + 2) % 3);
  }
  return beta;
}

}  // namespace

TEST(VGuideMap, StraightIsIdentity) {
  const Vec2 p = vguide_map(kPi / 2, {0.5, 3.0}, MapDir::forward);
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p[1], 3.0, 1e-15);
}

TEST(VGuideMap, HandEvaluated) {
  const Vec2 p = vguide_map(kPi / 4, {0.0, 1.0}, MapDir::forward);
  EXPECT_NEAR(p[0], 1.0, 1e-14);  // 0*sqrt(2) + 1*1
  EXPECT_NEAR(p[1], 1.0, 1e-15);
}

TEST(VGuideMap, RoundTrip) {
  const Vec2 p = vguide_map(kPi / 4, {1.0, 1.0}, MapDir::inverse);
  const Vec2 q = vguide_map(kPi / 4, p, MapDir::forward);
  EXPECT_NEAR(q[0], 1.0, 1e-14);
  EXPECT_NEAR(q[1], 1.0, 1e-15);
}

TEST(VGuideMap, Errors) {
  EXPECT_THROW(vguide_map(2.0, {0.5, 0.0}, MapDir::forward), validation_error);
  EXPECT_THROW(vguide_map(-0.1, {0.5, 0.0}, MapDir::forward), validation_error);
  EXPECT_THROW(vguide_map(0.7, {1.5, 0.0}, MapDir::forward), geometry_error);
}

TEST(ConeMap, Examples) {
  const Vec2 p = cone_map(kPi / 2, {0.3, 5.0}, MapDir::forward);
  EXPECT_NEAR(p[0], 0.3, 1e-15);
  const Vec2 q = cone_map(kPi / 6, {0.0, 1.0}, MapDir::forward);
  EXPECT_NEAR(q[0], std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(q[1], 1.0, 1e-15);
  EXPECT_THROW(cone_map(0.7, {0.3, -1.0}, MapDir::forward), geometry_error);
}

TEST(ConeMap, RandomRoundTrip) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ur(0.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p{ux(rng), ur(rng)};
    const Vec2 q = cone_map(0.83, cone_map(0.83, p, MapDir::forward), MapDir::inverse);
    EXPECT_NEAR(q[0], p[0], 1e-14);
    EXPECT_NEAR(q[1], p[1], 1e-14);
  }
}

TEST(LayerMap, StraightIsIdentity) {
  const LayerSpec spec = regular_layer(4, kPi / 2, 10.0);
  const Vec3 p{0.37, 2.5, 1.9};
  const Vec3 q = layer_map(spec, p, MapDir::forward);
  EXPECT_NEAR(q[0], p[0], 1e-15);
  EXPECT_NEAR(q[1], p[1], 1e-15);
  EXPECT_NEAR(q[2], p[2], 1e-15);
}

TEST(LayerMap, HandEvaluated) {
  const LayerSpec spec = regular_layer(4, kPi / 4, 10.0);
  const Vec3 q = layer_map(spec, {0.0, 1.0, 0.0}, MapDir::forward);
  EXPECT_NEAR(q[0], 1.0, 1e-14);  // cot(pi/4) * cos(0)
  EXPECT_NEAR(q[1], 1.0, 1e-15);
}

TEST(LayerMap, InterfaceContinuity) {
  const LayerSpec spec = regular_layer(3, 0.9, 10.0);
  for (std::size_t j = 0; j < spec.n_sectors(); ++j) {
    const double phi = spec.sector_centers[j] + 0.5 * spec.sector_angles[j];
    const double x = 0.4, r = 3.1;
    // Evaluate the forward formula with the centers of both adjacent sectors.
    const std::size_t jn = (j + 1) % spec.n_sectors();
    const double cn = spec.sector_centers[jn] +
                      (jn == 0 ? 2 * kPi : 0.0);  // unwrap the seam
    const double from_j = x / std::sin(spec.tilt) +
                          r * std::cos(phi - spec.sector_centers[j]) /
                              std::tan(spec.tilt);
    const double from_jn =
        x / std::sin(spec.tilt) + r * std::cos(phi - cn) / std::tan(spec.tilt);
    EXPECT_NEAR(from_j, from_jn, 1e-13);
    const Vec3 q = layer_map(spec, {x, r, phi}, MapDir::forward);
    EXPECT_NEAR(q[0], from_j, 1e-13);
  }
}

TEST(LayerMap, RandomRoundTrip) {
  const LayerSpec spec = layer_axis({kPi / 2, kPi / 2, 0.7}, 10.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, 1.0), ur(0.0, 10.0),
      up(-0.5 * spec.sector_angles[0], 2 * kPi - 0.5 * spec.sector_angles[0]);
  double max_err = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p{ux(rng), ur(rng), up(rng)};
    const Vec3 q =
        layer_map(spec, layer_map(spec, p, MapDir::forward), MapDir::inverse);
    max_err = std::max({max_err, std::abs(q[0] - p[0]), std::abs(q[1] - p[1]),
                        std::abs(q[2] - p[2])});
  }
  EXPECT_LT(max_err, 1e-13);
}

TEST(Maps, JacobianDeterminantIsCscTheta) {
  // Numeric differentiation at random points away from the piecewise seams.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  const double fd = 1e-6;

  const double theta = 0.8;
  for (int i = 0; i < 20; ++i) {
    const double x = u01(rng), z = 0.3 + u01(rng);
    auto at = [&](double xx, double zz) {
      return vguide_map(theta, {xx, zz}, MapDir::forward);
    };
    const double j00 = (at(x + fd, z)[0] - at(x - fd, z)[0]) / (2 * fd);
    const double j01 = (at(x, z + fd)[0] - at(x, z - fd)[0]) / (2 * fd);
    const double j10 = (at(x + fd, z)[1] - at(x - fd, z)[1]) / (2 * fd);
    const double j11 = (at(x, z + fd)[1] - at(x, z - fd)[1]) / (2 * fd);
    EXPECT_NEAR(j00 * j11 - j01 * j10, 1.0 / std::sin(theta), 1e-5);
  }

  const LayerSpec spec = regular_layer(3, 0.7, 20.0);
  for (int i = 0; i < 20; ++i) {
    const Vec3 p{u01(rng), 1.0 + u01(rng), 0.3 * u01(rng)};  // inside sector 0
    Eigen::Matrix3d J;
    for (int d = 0; d < 3; ++d) {
      Vec3 hi = p, lo = p;
      hi[d] += fd;
      lo[d] -= fd;
      const Vec3 qh = layer_map(spec, hi, MapDir::forward);
      const Vec3 ql = layer_map(spec, lo, MapDir::forward);
      for (int c = 0; c < 3; ++c) J(c, d) = (qh[c] - ql[c]) / (2 * fd);
    }
    EXPECT_NEAR(J.determinant(), 1.0 / std::sin(spec.tilt), 1e-5);
  }
}

TEST(RegularTilt, Examples) {
  EXPECT_NEAR(regular_tilt(kPi / 2, 4), kPi / 2, 1e-14);
  EXPECT_NEAR(regular_tilt(kPi / 2, 3), std::asin(1.0 / std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(regular_tilt(kPi / 2, 3), 0.61548, 1e-5);
  const double expected = std::asin(std::tan(0.2) / std::tan(kPi / 3));
  EXPECT_NEAR(regular_tilt(0.4, 3), expected, 1e-15);
  EXPECT_THROW(regular_tilt(2.8, 3), geometry_error);
  EXPECT_THROW(regular_tilt(0.4, 2), validation_error);
}

TEST(TrihedralDihedrals, Octant) {
  const auto beta = trihedral_dihedrals({kPi / 2, kPi / 2, kPi / 2});
  for (double b : beta) EXPECT_NEAR(b, kPi / 2, 1e-14);
}

TEST(TrihedralDihedrals, TwoRightAnglesAndSmall) {
  const double eps = 0.3;
  auto beta = trihedral_dihedrals({kPi / 2, kPi / 2, eps});
  std::sort(beta.begin(), beta.end());
  EXPECT_NEAR(beta[0], eps, 1e-13);
  EXPECT_NEAR(beta[1], kPi / 2, 1e-13);
  EXPECT_NEAR(beta[2], kPi / 2, 1e-13);
}

TEST(TrihedralDihedrals, AgreesWithRayOracle) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ua(0.2, 2.2);
  int checked = 0;
  while (checked < 100) {
    std::array<double, 3> a{ua(rng), ua(rng), ua(rng)};
    bool valid = a[0] + a[1] + a[2] < 2 * kPi;
    for (int k = 0; k < 3; ++k)
      if (!(a[k] < a[(k + 1) % 3] + a[(k + 2) % 3])) valid = false;
    if (!valid) continue;
    // Skip near-degenerate triples where the oracle's square root vanishes.
    const double u = std::cos(a[2]);
    const double v = (std::cos(a[1]) - u * std::cos(a[0])) / std::sin(a[0]);
    if (1.0 - u * u - v * v < 1e-4) continue;
    const auto beta = trihedral_dihedrals(a);
    const auto oracle = dihedrals_from_rays(a);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(beta[k], oracle[k], 1e-12);
    ++checked;
  }
}

TEST(TrihedralDihedrals, Errors) {
  EXPECT_THROW(trihedral_dihedrals({2.5, 0.3, 0.3}), geometry_error);
  EXPECT_THROW(trihedral_dihedrals({3.3, 0.3, 0.3}), validation_error);
}

TEST(LayerAxis, Octant) {
  const LayerSpec spec = layer_axis({kPi / 2, kPi / 2, kPi / 2}, 10.0);
  EXPECT_NEAR(spec.tilt, std::asin(1.0 / std::sqrt(3.0)), 1e-13);
  for (double psi : spec.sector_angles) EXPECT_NEAR(psi, 2 * kPi / 3, 1e-13);
}

TEST(LayerAxis, RegularInputMatchesRegularTilt) {
  for (double alpha : {0.4, 0.9, 1.3}) {
    for (int n : {3, 4, 5}) {
      if (std::tan(alpha / 2) / std::tan(kPi / n) >= 1.0) continue;
      const LayerSpec spec = layer_axis(std::vector<double>(n, alpha), 10.0);
      EXPECT_NEAR(spec.tilt, regular_tilt(alpha, n), 1e-13);
      for (double psi : spec.sector_angles) EXPECT_NEAR(psi, 2 * kPi / n, 1e-13);
    }
  }
}

TEST(LayerAxis, DefiningEquationsResiduals) {
  const std::vector<double> alphas{kPi / 2, kPi / 2, 0.3};
  const LayerSpec spec = layer_axis(alphas, 10.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    sum += spec.sector_angles[j];
    const double res = std::sin(spec.tilt) -
                       std::tan(alphas[j] / 2) / std::tan(spec.sector_angles[j] / 2);
    EXPECT_LT(std::abs(res), 1e-12);
  }
  EXPECT_NEAR(sum, 2 * kPi, 1e-12);
}

TEST(LayerAxis, InfeasibleInput) {
  EXPECT_THROW(layer_axis({2.2, 2.2, 2.2}, 10.0), geometry_error);
}

TEST(LayerSpec, SectorLookupTieBreak) {
  const LayerSpec spec = regular_layer(4, 0.9, 10.0);
  // Interface between sectors 0 and 1 sits at psi/2; lower index wins.
  EXPECT_EQ(spec.sector_of(0.5 * spec.sector_angles[0]), 0u);
  EXPECT_EQ(spec.sector_of(0.5 * spec.sector_angles[0] + 1e-9), 1u);
  EXPECT_EQ(spec.sector_of(0.0), 0u);
  EXPECT_EQ(spec.sector_of(-0.5 * spec.sector_angles[0]), 0u);
}

TEST(LayerSpec, Validation) {
  EXPECT_THROW(LayerSpec(0.5, {1.0, 1.0, 1.0}, 10.0), validation_error);
  EXPECT_THROW(regular_layer(2, 0.5, 10.0), validation_error);
  EXPECT_THROW(regular_layer(4, 0.5, -1.0), validation_error);
}
