#pragma once

// Domain descriptions and the angle-parameterized coordinate transforms that
// map each straight reference domain (strip, straight layer) onto its bent
// counterpart.  All angles are radians, double precision; no degree API.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "bentspec/common.hpp"

namespace bentspec {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

enum class MapDir { forward, inverse };

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Planar V-shaped waveguide of unit width with half-opening angle theta,
/// truncated at |z| = half_length.
struct VGuideSpec {
  double theta;
  double half_length;

  VGuideSpec(double theta_, double half_length_)
      : theta(theta_), half_length(half_length_) {
    if (!(theta > 0.0 && theta <= kPi / 2))
      throw validation_error("VGuideSpec: theta must lie in (0, pi/2]");
    if (!(half_length > 0.0))
      throw validation_error("VGuideSpec: half_length must be positive");
  }
};

/// Conical layer of unit thickness, half-opening theta, reduced to meridian
/// coordinates (x, r); `modes` lists the angular Fourier indices to solve.
struct ConeSpec {
  double theta;
  double r_max;
  std::vector<int> modes;

  ConeSpec(double theta_, double r_max_, std::vector<int> modes_)
      : theta(theta_), r_max(r_max_), modes(std::move(modes_)) {
    if (!(theta > 0.0 && theta <= kPi / 2))
      throw validation_error("ConeSpec: theta must lie in (0, pi/2]");
    if (!(r_max > 1.0)) throw validation_error("ConeSpec: r_max must exceed 1");
    if (modes.empty()) throw validation_error("ConeSpec: modes must be nonempty");
    auto sorted = modes;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw validation_error("ConeSpec: modes must be distinct");
    if (sorted.front() < 0)
      throw validation_error("ConeSpec: modes must be nonnegative");
  }
};

/// Polyhedral layer of unit width around an inscribed-ball axis: every face
/// makes the tilt angle theta with the axis; sector j covers azimuths of
/// width psi_j around the bisector center c_j.
struct LayerSpec {
  double tilt;
  std::vector<double> sector_angles;   // psi_j, sums to 2*pi
  std::vector<double> sector_centers;  // bisector azimuths, c_0 = 0
  double r_max;
  bool symmetry_subspace;

  LayerSpec(double tilt_, std::vector<double> sector_angles_, double r_max_,
            bool symmetry_subspace_ = true)
      : tilt(tilt_),
        sector_angles(std::move(sector_angles_)),
        r_max(r_max_),
        symmetry_subspace(symmetry_subspace_) {
    if (!(tilt > 0.0 && tilt <= kPi / 2))
      throw validation_error("LayerSpec: tilt must lie in (0, pi/2]");
    if (!(r_max > 0.0)) throw validation_error("LayerSpec: r_max must be positive");
    if (sector_angles.size() < 3)
      throw validation_error("LayerSpec: need at least 3 sectors");
    double sum = 0.0;
    for (double psi : sector_angles) {
      if (!(psi > 0.0 && psi < kPi))
        throw validation_error("LayerSpec: each sector angle must lie in (0, pi)");
      sum += psi;
    }
    if (std::abs(sum - 2 * kPi) > 1e-12)
      throw validation_error("LayerSpec: sector angles must sum to 2*pi");
    // Cumulative bisectors starting at 0.
    sector_centers.resize(sector_angles.size());
    sector_centers[0] = 0.0;
    for (std::size_t j = 1; j < sector_angles.size(); ++j)
      sector_centers[j] = sector_centers[j - 1] +
                          0.5 * (sector_angles[j - 1] + sector_angles[j]);
  }

  std::size_t n_sectors() const { return sector_angles.size(); }

  bool is_regular(double tol = 1e-12) const {
    for (double psi : sector_angles)
      if (std::abs(psi - sector_angles[0]) > tol) return false;
    return true;
  }

  /// Start of sector 0's azimuth range; the full layer covers
  /// [phi_start, phi_start + 2*pi).
  double phi_start() const { return -0.5 * sector_angles[0]; }

  /// Sector index owning azimuth phi.  Points exactly on an interface belong
  /// to the lower-index sector.
  std::size_t sector_of(double phi) const {
    double start = phi_start();
    double t = std::fmod(phi - start, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < sector_angles.size(); ++j) {
      acc += sector_angles[j];
      if (t <= acc) return j;
    }
    return sector_angles.size() - 1;
  }
};

/// A regular layer with N equal sectors at the given tilt.
inline LayerSpec regular_layer(int N, double tilt, double r_max,
                               bool symmetry_subspace = true) {
  if (N < 3) throw validation_error("regular_layer: N must be at least 3");
  return LayerSpec(tilt, std::vector<double>(N, 2 * kPi / N), r_max,
                   symmetry_subspace);
}

/// Vertex angles of a trihedral corner and the dihedral angles derived from
/// them.  beta_k is the dihedral paired with alpha_k via the spherical law of
/// cosines (small vertex angle <-> small dihedral).
struct TrihedralAngles {
  std::array<double, 3> alphas;
  std::array<double, 3> betas;

  explicit TrihedralAngles(const std::array<double, 3>& a);
};

// ---------------------------------------------------------------------------
// Coordinate transforms
// ---------------------------------------------------------------------------

/// Piecewise-affine map between the straight strip {0 <= x <= 1} and the
/// V-guide with half-opening theta: forward (x, z) -> (x csc t + |z| cot t, z).
inline Vec2 vguide_map(double theta, const Vec2& p, MapDir dir) {
  if (!(theta > 0.0 && theta <= kPi / 2))
    throw validation_error("vguide_map: theta must lie in (0, pi/2]");
  const double x = p[0], z = p[1];
  if (dir == MapDir::forward) {
    if (x < -1e-14 || x > 1.0 + 1e-14)
      throw geometry_error("vguide_map: point outside reference strip 0<=x<=1");
    return {x / std::sin(theta) + std::abs(z) / std::tan(theta), z};
  }
  const double xs = x * std::sin(theta) - std::abs(z) * std::cos(theta);
  if (xs < -1e-12 || xs > 1.0 + 1e-12)
    throw geometry_error("vguide_map: point outside bent guide");
  return {xs, z};
}

/// Meridian map between the straight layer and the conical layer:
/// forward (x, r) -> (x csc t + r cot t, r).  The azimuth is untouched by the
/// axisymmetric reduction and carries no coordinate here.
inline Vec2 cone_map(double theta, const Vec2& p, MapDir dir) {
  if (!(theta > 0.0 && theta <= kPi / 2))
    throw validation_error("cone_map: theta must lie in (0, pi/2]");
  const double x = p[0], r = p[1];
  if (r < 0.0) throw geometry_error("cone_map: negative radius");
  if (dir == MapDir::forward)
    return {x / std::sin(theta) + r / std::tan(theta), r};
  return {x * std::sin(theta) - r * std::cos(theta), r};
}

/// Sector-wise map between the straight layer and the polyhedral layer:
/// forward (x, r, phi) -> (x csc t + r cot t cos(phi - c_j), r, phi) on
/// sector j.  Continuous across interfaces since the cosine factors agree.
inline Vec3 layer_map(const LayerSpec& spec, const Vec3& p, MapDir dir) {
  const double x = p[0], r = p[1], phi = p[2];
  if (r < 0.0) throw geometry_error("layer_map: negative radius");
  const std::size_t j = spec.sector_of(phi);
  const double c = std::cos(phi - spec.sector_centers[j]);
  const double t = spec.tilt;
  if (dir == MapDir::forward)
    return {x / std::sin(t) + r * c / std::tan(t), r, phi};
  return {x * std::sin(t) - r * std::cos(t) * c, r, phi};
}

// ---------------------------------------------------------------------------
// Spherical-trigonometric solvers
// ---------------------------------------------------------------------------

/// Tilt angle of a regular N-sector layer with vertex angle alpha:
/// sin theta = tan(alpha/2) * cot(pi/N).
inline double regular_tilt(double alpha, int N) {
  if (N < 3) throw validation_error("regular_tilt: N must be at least 3");
  if (!(alpha > 0.0 && alpha < kPi))
    throw validation_error("regular_tilt: alpha must lie in (0, pi)");
  const double s = std::tan(alpha / 2) / std::tan(kPi / N);
  if (!(s > 0.0))
    throw geometry_error("regular_tilt: degenerate vertex angle");
  if (s > 1.0)
    throw geometry_error("regular_tilt: vertex angle too large for N faces");
  return std::asin(s);
}

/// Dihedral angles from vertex angles of a trihedral corner:
/// cos beta_k = (cos a_k - cos a_i cos a_j) / (sin a_i sin a_j).
inline std::array<double, 3> trihedral_dihedrals(const std::array<double, 3>& a) {
  for (double alpha : a)
    if (!(alpha > 0.0 && alpha < kPi))
      throw validation_error("trihedral_dihedrals: vertex angles must lie in (0, pi)");
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    if (!(a[k] < a[i] + a[j]))
      throw geometry_error("trihedral_dihedrals: vertex angles violate the triangle inequality");
  }
  if (!(a[0] + a[1] + a[2] < 2 * kPi))
    throw geometry_error("trihedral_dihedrals: vertex angles must sum below 2*pi");
  std::array<double, 3> beta{};
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    const double den = std::sin(a[i]) * std::sin(a[j]);
    if (den < 1e-14)
      throw geometry_error("trihedral_dihedrals: flat configuration");
    double c = (std::cos(a[k]) - std::cos(a[i]) * std::cos(a[j])) / den;
    if (c > 1.0 + 1e-12 || c < -1.0 - 1e-12)
      throw geometry_error("trihedral_dihedrals: flat configuration");
    beta[k] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  return beta;
}

inline TrihedralAngles::TrihedralAngles(const std::array<double, 3>& a)
    : alphas(a), betas(trihedral_dihedrals(a)) {}

/// Recovers the common tilt theta and the sector angles psi_j of a layer with
/// an inscribed ball from its vertex angles.  Each face satisfies
/// tan(psi_j/2) = tan(alpha_j/2) / sin theta; the sector sum is strictly
/// decreasing in theta, so bisection on theta is unconditionally convergent.
inline LayerSpec layer_axis(const std::vector<double>& alphas, double r_max,
                            bool symmetry_subspace = false) {
  if (alphas.size() < 3)
    throw validation_error("layer_axis: need at least 3 vertex angles");
  double sum = 0.0;
  for (double alpha : alphas) {
    if (!(alpha > 0.0 && alpha < kPi))
      throw validation_error("layer_axis: vertex angles must lie in (0, pi)");
    sum += alpha;
  }
  if (!(sum < 2 * kPi))
    throw geometry_error("layer_axis: vertex angles sum to 2*pi or more (flat or reflex)");

  auto sector_sum = [&](double theta) {
    double s = 0.0;
    for (double alpha : alphas)
      s += 2.0 * std::atan(std::tan(alpha / 2) / std::sin(theta));
    return s - 2 * kPi;
  };

  double lo = 1e-12, hi = kPi / 2;  // f(lo) > 0 > f(hi)
  double theta = 0.0;
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    theta = 0.5 * (lo + hi);
    const double f = sector_sum(theta);
    if (std::abs(f) < 1e-14 || hi - lo < 1e-16) {
      converged = true;
      break;
    }
    (f > 0.0 ? lo : hi) = theta;
  }
  if (!converged && hi - lo > 1e-12)
    throw numerical_error("layer_axis: bisection failed to converge");
  theta = 0.5 * (lo + hi);

  std::vector<double> psi(alphas.size());
  double psum = 0.0;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    psi[j] = 2.0 * std::atan(std::tan(alphas[j] / 2) / std::sin(theta));
    psum += psi[j];
  }
  // Absorb the bisection residual so the invariant sum == 2*pi holds exactly.
  for (double& p : psi) p *= 2 * kPi / psum;

  // Defining-equation residuals gate feasibility for n > 3.
  if (alphas.size() > 3) {
    for (std::size_t j = 0; j < alphas.size(); ++j) {
      const double res =
          std::sin(theta) - std::tan(alphas[j] / 2) / std::tan(psi[j] / 2);
      if (std::abs(res) > 1e-9)
        throw geometry_error("layer_axis: no inscribed-ball configuration for these angles");
    }
  }
  return LayerSpec(theta, std::move(psi), r_max, symmetry_subspace);
}

}  // namespace bentspec
