#include "bentspec/assemble.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "bentspec/geometry.hpp"
#include "bentspec/mesh.hpp"
#include "pullback_oracle.hpp"

using namespace bentspec;
using oracle::mapped_stiffness_layer;
using oracle::mapped_stiffness_meridian;
using oracle::mapped_stiffness_strip;

namespace {

double rel_diff(const SpMat& a, const SpMat& b) {
  return SpMat(a - b).norm() / b.norm();
}

Eigen::VectorXd random_vec(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

const double kThetas[] = {0.3, 0.7, 1.2};

}  // namespace

TEST(AssembleStrip, PullbackEquivalence) {
  const Mesh mesh = mesh_strip(2.0, 0.2, 1.1);
  const FormSet fs = assemble_strip(mesh);
  for (double theta : kThetas) {
    const SpMat lhs = std::sin(theta) * mapped_stiffness_strip(mesh, fs, theta);
    const SpMat rhs = stiffness_at(fs, theta);
    EXPECT_LT(rel_diff(lhs, rhs), 1e-10) << "theta = " << theta;
  }
}

TEST(AssembleMeridian, PullbackEquivalence) {
  const Mesh mesh = mesh_meridian(4.0, 0.25, 1.1);
  for (int m : {0, 1}) {
    const FormSet fs = assemble_meridian(mesh, m);
    for (double theta : kThetas) {
      const SpMat lhs =
          std::sin(theta) * mapped_stiffness_meridian(mesh, fs, theta, m);
      const SpMat rhs = stiffness_at(fs, theta);
      EXPECT_LT(rel_diff(lhs, rhs), 1e-10) << "m = " << m << " theta = " << theta;
    }
  }
}

TEST(AssembleLayer, PullbackEquivalenceHalfSector) {
  const LayerSpec ref = regular_layer(3, 0.6, 2.0, true);
  const Mesh mesh = mesh_layer_sector(ref, 0.4, 1.1);
  const FormSet fs = assemble_layer(mesh, ref);
  for (double theta : kThetas) {
    const LayerSpec bent(theta, ref.sector_angles, ref.r_max, true);
    const SpMat lhs = std::sin(theta) * mapped_stiffness_layer(mesh, bent, fs);
    const SpMat rhs = stiffness_at(fs, theta);
    EXPECT_LT(rel_diff(lhs, rhs), 1e-9) << "theta = " << theta;
  }
}

TEST(AssembleLayer, PullbackEquivalenceFullRing) {
  const LayerSpec ref = layer_axis({kPi / 2, kPi / 2, 0.7}, 2.0);
  const Mesh mesh = mesh_layer_sector(ref, 0.4, 1.1, 3);
  const FormSet fs = assemble_layer(mesh, ref);
  for (double theta : kThetas) {
    const LayerSpec bent(theta, ref.sector_angles, ref.r_max, false);
    const SpMat lhs = std::sin(theta) * mapped_stiffness_layer(mesh, bent, fs);
    const SpMat rhs = stiffness_at(fs, theta);
    EXPECT_LT(rel_diff(lhs, rhs), 1e-9) << "theta = " << theta;
  }
}

TEST(Assemble, SymmetryAndDefiniteness) {
  const Mesh strip = mesh_strip(1.5, 0.25, 1.0);
  const Mesh meridian = mesh_meridian(3.0, 0.4, 1.1);
  const Mesh layer = mesh_layer_sector(regular_layer(3, 0.6, 2.0, true), 0.5, 1.0);
  const FormSet sets[] = {assemble_strip(strip), assemble_meridian(meridian, 0),
                          assemble_meridian(meridian, 1),
                          assemble_layer(layer, regular_layer(3, 0.6, 2.0, true))};
  for (const FormSet& fs : sets) {
    EXPECT_LT(SpMat(fs.R - SpMat(fs.R.transpose())).norm(), 1e-14 * fs.K0.norm());
    EXPECT_LT(SpMat(fs.K0 - SpMat(fs.K0.transpose())).norm(),
              1e-12 * fs.K0.norm());
    for (unsigned s = 0; s < 5; ++s) {
      const Eigen::VectorXd v = random_vec(fs.n_dofs, 100 + s);
      EXPECT_GT(v.dot(fs.M * v), 0.0);
      EXPECT_GT(v.dot(fs.K0 * v), 0.0);
    }
  }
}

// The remainder is dominated by the reference energy pointwise under the
// quadrature, so the bound holds at machine precision for every vector.
TEST(Assemble, RemainderDominatedByStiffness) {
  const Mesh strip = mesh_strip(2.0, 0.2, 1.1);
  const Mesh meridian = mesh_meridian(4.0, 0.3, 1.1);
  const LayerSpec lspec = layer_axis({kPi / 2, kPi / 2, 0.7}, 2.0);
  const Mesh layer = mesh_layer_sector(lspec, 0.4, 1.1);
  const FormSet sets[] = {assemble_strip(strip), assemble_meridian(meridian, 0),
                          assemble_meridian(meridian, 1),
                          assemble_layer(layer, lspec)};
  for (const FormSet& fs : sets)
    for (unsigned s = 0; s < 20; ++s) {
      const Eigen::VectorXd v = random_vec(fs.n_dofs, 200 + s);
      const double k0 = v.dot(fs.K0 * v);
      const double r = v.dot(fs.R * v);
      EXPECT_LE(std::abs(r), k0 * (1.0 + 1e-12));
    }
}

TEST(Assemble, DofCounts) {
  // Strip: walls and truncation eliminated.
  const FormSet s = assemble_strip(mesh_strip(1.0, 0.25, 1.0));
  EXPECT_EQ(s.n_dofs, 3 * 7);  // (5-2) x (9-2)
  // Meridian: axis free for m = 0, essential for m >= 1.
  const Mesh mm = mesh_meridian(2.0, 0.5, 1.0);
  EXPECT_EQ(assemble_meridian(mm, 0).n_dofs, 1 * 4);
  EXPECT_EQ(assemble_meridian(mm, 1).n_dofs, 1 * 3);
  // Layer half sector: axis nodes collapse to one dof per x-station.
  const LayerSpec half = regular_layer(3, 0.6, 2.0, true);
  const FormSet lh = assemble_layer(mesh_layer_sector(half, 0.5, 1.0, 4), half);
  EXPECT_EQ(lh.n_dofs, 1 * (3 * 5 + 1));
  // Full ring: the periodic seam is identified as well.
  const LayerSpec ring = layer_axis({kPi / 2, kPi / 2, 0.7}, 2.0);
  const FormSet lr = assemble_layer(mesh_layer_sector(ring, 0.5, 1.0, 2), ring);
  EXPECT_EQ(lr.n_dofs, 1 * (3 * 6 + 1));
}

TEST(Assemble, StiffnessAtAffineAndValidated) {
  const FormSet fs = assemble_strip(mesh_strip(1.0, 0.25, 1.0));
  const SpMat k = stiffness_at(fs, 0.9);
  EXPECT_LT(rel_diff(k, SpMat(fs.K0 + std::cos(0.9) * fs.R)), 1e-15);
  EXPECT_THROW(stiffness_at(fs, 0.0), validation_error);
  EXPECT_THROW(stiffness_at(fs, kPi / 2 + 0.1), validation_error);
}

TEST(Assemble, InputValidation) {
  const Mesh strip = mesh_strip(1.0, 0.25, 1.0);
  const Mesh layer = mesh_layer_sector(regular_layer(3, 0.6, 2.0, true), 0.5, 1.0);
  EXPECT_THROW(assemble_strip(layer), validation_error);
  EXPECT_THROW(assemble_meridian(layer, 0), validation_error);
  EXPECT_THROW(assemble_meridian(strip, -1), validation_error);
  EXPECT_THROW(assemble_layer(strip, regular_layer(3, 0.6, 2.0, true)),
               validation_error);
  // Straddling element: a strip mesh shifted off-center.
  Mesh shifted = strip;
  for (std::size_t i = 0; i < shifted.n_nodes(); ++i)
    shifted.coords[i * 2 + 1] += 0.1;
  EXPECT_THROW(assemble_strip(shifted), validation_error);
}
