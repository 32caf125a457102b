#include "bentspec/spectra.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace bentspec;

TEST(Spectra, StraightStripMatchesSeparation) {
  // theta = pi/2 is the straight strip (0,1) x (-L,L) with Dirichlet ends:
  // lambda_1 = pi^2 (1 + (1/(2L))^2), and nothing below the threshold pi^2.
  const double L = 2.0;
  const Spectrum s = solve_vguide(kPi / 2, L, 0.05, 2);
  EXPECT_EQ(s.certified_count, 0);
  EXPECT_TRUE(s.eigenvalues.empty());
  EXPECT_EQ(s.problem, "vguide");
  EXPECT_EQ(s.threshold, kPiSq);
}

TEST(Spectra, BentGuideHasTrappedMode) {
  const double theta = kPi / 4;
  const Spectrum s = solve_vguide(theta, 3.0, 0.05, 4);
  ASSERT_GE(s.certified_count, 1);
  ASSERT_FALSE(s.eigenvalues.empty());
  const double l1 = s.eigenvalues[0];
  EXPECT_GT(l1, (1.0 - std::cos(theta)) * kPiSq);
  EXPECT_LT(l1, kPiSq);
  EXPECT_LE(s.residuals[0], 1e-7);
}

TEST(Spectra, VguideRefinementDecreasesLambda1) {
  // Nested P1 spaces: refinement can only lower the Galerkin eigenvalue.
  double prev = 0.0;
  for (int level = 0; level < 3; ++level) {
    SolveOptions opts;
    opts.refine_levels = level;
    const Spectrum s = solve_vguide(kPi / 4, 3.0, 0.1, 1, opts);
    ASSERT_FALSE(s.eigenvalues.empty());
    if (level > 0) EXPECT_LT(s.eigenvalues[0], prev);
    prev = s.eigenvalues[0];
  }
}

TEST(Spectra, ConeSolveMergesModes) {
  SolveOptions opts;
  opts.grading = 1.1;
  const Spectrum s = solve_cone(0.5, 20.0, 0.04, {0, 1}, 4, opts);
  EXPECT_EQ(s.problem, "cone");
  ASSERT_GE(s.certified_count, 1);
  ASSERT_EQ(s.eigenvalues.size(), s.modes.size());
  EXPECT_TRUE(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
  for (double ev : s.eigenvalues) EXPECT_LT(ev, kPiSq);
  // The ground state of a conical layer is axisymmetric.
  ASSERT_FALSE(s.modes.empty());
  EXPECT_EQ(s.modes[0], 0);
}

TEST(Spectra, LayerDihedralsKnownCases) {
  // Octant corner: three mutually orthogonal faces, all dihedrals pi/2.
  const double oct_tilt = std::asin(std::tan(kPi / 4) / std::tan(kPi / 3));
  const auto oct = layer_dihedrals(regular_layer(3, oct_tilt, 5.0));
  for (double b : oct) EXPECT_NEAR(b, kPi / 2, 1e-12);
  // tilt = pi/2 is the flat layer: dihedrals pi.
  const auto flat = layer_dihedrals(regular_layer(4, kPi / 2, 5.0));
  for (double b : flat) EXPECT_NEAR(b, kPi, 1e-12);
}

TEST(Spectra, RefLambdaMinAtLeastPiSq) {
  const FormSet strip = assemble_strip(mesh_strip(3.0, 0.1, 1.15));
  EXPECT_GE(ref_lambda_min(strip), kPiSq);
  const FormSet cone = assemble_meridian(mesh_meridian(10.0, 0.2, 1.15), 0);
  EXPECT_GE(ref_lambda_min(cone), kPiSq);
}

TEST(Spectra, ExtrapolateSyntheticSecondOrder) {
  // v(l) = c + a 4^{-l}: the order-2 model is exact.
  const double c = 7.5, a = 0.3;
  const auto rep = extrapolate(
      [&](int l) { return c + a * std::pow(0.25, l); }, 4);
  ASSERT_TRUE(rep.estimate.has_value());
  EXPECT_NEAR(*rep.estimate, c, 1e-12);
  ASSERT_TRUE(rep.observed_order.has_value());
  EXPECT_NEAR(*rep.observed_order, 2.0, 1e-10);
  EXPECT_FALSE(rep.warning);
  EXPECT_LT(rep.error_bar, a);
}

TEST(Spectra, ExtrapolateNonMonotoneWarns) {
  const double vals[] = {1.0, 0.5, 0.8};
  const auto rep = extrapolate([&](int l) { return vals[l]; }, 3);
  EXPECT_TRUE(rep.warning);
  EXPECT_FALSE(rep.estimate.has_value());
}

TEST(Spectra, ThresholdFlatAndCapped) {
  EXPECT_EQ(threshold(kPi), kPiSq);
  EXPECT_EQ(threshold(4.0), kPiSq);
}

TEST(Spectra, LayerSolveBasics) {
  const double tilt = std::asin(std::tan(kPi / 4) / std::tan(kPi / 3));
  const LayerSpec spec = regular_layer(3, tilt, 6.0, true);
  SolveOptions opts;
  opts.grading = 1.2;
  const Spectrum s = solve_layer(spec, 0.25, 4, opts);
  EXPECT_EQ(s.problem, "layer");
  EXPECT_LT(s.threshold, kPiSq);
  EXPECT_GT(s.threshold, 0.8 * kPiSq);
  EXPECT_EQ(s.eigenvalues.size(), s.residuals.size());
  for (double ev : s.eigenvalues) EXPECT_LT(ev, s.threshold);
  EXPECT_GT(s.n_dofs, 0);
}

TEST(Spectra, TrihedralOctantSetup) {
  SolveOptions opts;
  opts.grading = 1.2;
  const Spectrum s =
      solve_trihedral({kPi / 2, kPi / 2, kPi / 2}, 0.25, 4, 6.0, opts);
  EXPECT_EQ(s.problem, "trihedral");
  // Equal right vertex angles recover the octant tilt asin(1/sqrt(3)).
  EXPECT_NEAR(s.params.at("tilt"), std::asin(1.0 / std::sqrt(3.0)), 1e-10);
  // All dihedrals are pi/2, so the threshold is the right-angle guide level.
  EXPECT_NEAR(s.threshold, threshold(kPi / 2), 1e-14);
  EXPECT_LT(s.threshold, kPiSq);
}

TEST(Spectra, Validation) {
  EXPECT_THROW(solve_vguide(0.0, 2.0, 0.1), validation_error);
  EXPECT_THROW(solve_vguide(2.0, 2.0, 0.1), validation_error);
  EXPECT_THROW(threshold(0.0), validation_error);
  EXPECT_THROW(threshold(-1.0), validation_error);
  EXPECT_THROW(
      extrapolate([](int) { return 0.0; }, 2), validation_error);
  EXPECT_THROW(solve_cone(kPi / 4, 20.0, 0.1, {0, 0}), validation_error);
}
