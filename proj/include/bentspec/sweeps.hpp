#pragma once

// Theorem-level experiments: angle sweeps with per-index monotonicity
// verdicts, the transported-trial-function check, flat-limit bound checks and
// the trihedral non-monotonicity demonstration.  A sweep assembles its forms
// once and evaluates the pencil K(theta) = K0 + cos(theta) R per grid point.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bentspec/assemble.hpp"
#include "bentspec/common.hpp"
#include "bentspec/eigensolve.hpp"
#include "bentspec/geometry.hpp"
#include "bentspec/mesh.hpp"
#include "bentspec/spectra.hpp"

namespace bentspec {

enum class Verdict : int { pass = 0, fail = 1, not_certified = 2 };

struct SweepFamily {
  enum class Kind { vguide, cone, layer } kind = Kind::vguide;
  double L = 4.0;        // vguide truncation
  double r_max = 20.0;   // cone / layer truncation
  int mode = 0;          // cone Fourier index
  int n_sectors = 3;     // layer
  bool symmetry_subspace = true;  // layer
};

struct SweepPoint {
  double theta = 0.0;
  double threshold = 0.0;
  double lower_bound = 0.0;  // (1 - cos theta) * lambda_min(K0, M)
  int certified_count = 0;
  std::vector<double> eigenvalues;  // below threshold
};

struct SweepResult {
  SweepFamily family;
  std::vector<SweepPoint> points;
  // verdicts[i][j]: lambda_j monotone between grid points i and i+1.
  std::vector<std::vector<Verdict>> verdicts;
  double margin = 0.0;
  double ref_lambda_min = 0.0;
  bool all_pass() const {
    for (const auto& row : verdicts)
      for (Verdict v : row)
        if (v == Verdict::fail) return false;
    return true;
  }
};

namespace detail {

inline void sweep_point(SweepPoint& pt, const FormSet& forms, double theta,
                        int k, const EigenOptions& eo) {
  const SpMat K = stiffness_at(forms, theta);
  pt.certified_count =
      count_below(K, forms.M, pt.threshold * (1.0 - 1e-9));
  const int kk = std::min(std::max(pt.certified_count, 1),
                          std::max(1, forms.n_dofs - 1));
  const EigenResult er =
      smallest_eigenpairs(K, forms.M, std::min(std::max(kk, k), forms.n_dofs - 1), eo);
  for (double ev : er.eigenvalues)
    if (ev < pt.threshold) pt.eigenvalues.push_back(ev);
}

}  // namespace detail

/// Sweeps the opening angle over a strictly increasing grid on one fixed
/// reference mesh.  Verdict for index j between consecutive grid points:
/// pass if lambda_j(theta_i) <= lambda_j(theta_{i+1}) + margin, evaluated
/// only where both eigenvalues are certified below their thresholds.
inline SweepResult sweep_angle(const SweepFamily& family,
                               const std::vector<double>& thetas, double h,
                               int k = 8, const SolveOptions& opts = {}) {
  if (thetas.empty()) throw validation_error("sweep_angle: empty grid");
  for (std::size_t i = 0; i + 1 < thetas.size(); ++i)
    if (!(thetas[i] < thetas[i + 1]))
      throw validation_error("sweep_angle: grid must be strictly increasing");
  for (double t : thetas)
    if (!(t > 0.0 && t <= kPi / 2))
      throw validation_error("sweep_angle: angles must lie in (0, pi/2]");

  Mesh mesh;
  std::optional<FormSet> forms;
  switch (family.kind) {
    case SweepFamily::Kind::vguide:
      mesh = mesh_strip(family.L, h, opts.grading);
      forms = assemble_strip(mesh);
      break;
    case SweepFamily::Kind::cone:
      mesh = mesh_meridian(family.r_max, h, opts.grading);
      forms = assemble_meridian(mesh, family.mode);
      break;
    case SweepFamily::Kind::layer: {
      // The reference mesh and forms do not depend on the tilt; any valid
      // tilt yields the same straight-layer grid.
      const LayerSpec ref = regular_layer(family.n_sectors, kPi / 4,
                                          family.r_max, family.symmetry_subspace);
      mesh = mesh_layer_sector(ref, h, opts.grading, opts.phi_steps);
      forms = assemble_layer(mesh, ref);
      break;
    }
  }

  EigenOptions eo;
  eo.tol = opts.tol;
  eo.seed = opts.seed;
  SweepResult out;
  out.family = family;
  out.margin = 2.0 * opts.tol;
  out.ref_lambda_min = ref_lambda_min(*forms, opts);

  for (double theta : thetas) {
    SweepPoint pt;
    pt.theta = theta;
    if (family.kind == SweepFamily::Kind::layer) {
      const LayerSpec at_theta = regular_layer(family.n_sectors, theta,
                                               family.r_max,
                                               family.symmetry_subspace);
      const auto betas = layer_dihedrals(at_theta);
      pt.threshold = threshold(*std::min_element(betas.begin(), betas.end()));
    } else {
      pt.threshold = kPiSq;
    }
    pt.lower_bound = (1.0 - std::cos(theta)) * out.ref_lambda_min;
    detail::sweep_point(pt, *forms, theta, k, eo);
    out.points.push_back(std::move(pt));
  }

  for (std::size_t i = 0; i + 1 < out.points.size(); ++i) {
    const auto& a = out.points[i];
    const auto& b = out.points[i + 1];
    const std::size_t nj = std::max(a.eigenvalues.size(), b.eigenvalues.size());
    std::vector<Verdict> row(nj, Verdict::not_certified);
    const std::size_t both = std::min(
        {a.eigenvalues.size(), b.eigenvalues.size(),
         static_cast<std::size_t>(a.certified_count),
         static_cast<std::size_t>(b.certified_count)});
    for (std::size_t j = 0; j < both; ++j)
      row[j] = a.eigenvalues[j] <= b.eigenvalues[j] + out.margin
                   ? Verdict::pass
                   : Verdict::fail;
    out.verdicts.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Transported trial function check
// ---------------------------------------------------------------------------

struct TransportRow {
  double theta;
  double q;  // v' K(theta) v
};

struct TransportReport {
  std::vector<TransportRow> rows;  // grid then sigma, ascending
  double q_sigma = 0.0;
  double r_value = 0.0;  // v'Rv
  bool below_threshold = false;
  bool r_negative = false;
  bool increasing = false;
  bool pass() const {
    return !below_threshold || (r_negative && increasing);
  }
};

/// Evaluates q(theta) = v'(K0 + cos(theta) R)v for an M-normalized v on a
/// grid below sigma.  Whenever q(sigma) < threshold the remainder value v'Rv
/// must be strictly negative and q strictly increasing in theta.
inline TransportReport transported_form_check(const FormSet& forms,
                                              const Eigen::VectorXd& v,
                                              double sigma,
                                              const std::vector<double>& thetas,
                                              double threshold_value = kPiSq) {
  const double mnorm = v.dot(forms.M * v);
  if (std::abs(mnorm - 1.0) > 1e-8)
    throw validation_error("transported_form_check: v must be M-normalized");
  for (double t : thetas)
    if (!(t > 0.0 && t < sigma))
      throw validation_error("transported_form_check: grid must lie in (0, sigma)");

  TransportReport rep;
  const double k0 = v.dot(forms.K0 * v);
  rep.r_value = v.dot(forms.R * v);
  auto q = [&](double theta) { return k0 + std::cos(theta) * rep.r_value; };
  std::vector<double> grid = thetas;
  std::sort(grid.begin(), grid.end());
  grid.push_back(sigma);
  for (double t : grid) rep.rows.push_back({t, q(t)});
  rep.q_sigma = q(sigma);
  rep.below_threshold = rep.q_sigma < threshold_value;
  rep.r_negative = rep.r_value < 0.0;
  rep.increasing = true;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    if (!(rep.rows[i].q < rep.rows[i + 1].q)) rep.increasing = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Flat limit
// ---------------------------------------------------------------------------

struct FlatLimitRow {
  double theta;
  double lambda1;
  double lower_bound;  // (1 - cos theta) * lambda_min(K0, M)
  double gap;          // pi^2 - lambda1
};

struct FlatLimitReport {
  std::vector<FlatLimitRow> rows;
  bool bounds_hold = false;
  bool gap_decreasing = false;
};

/// Checks the exact discrete bound (1 - cos theta) lambda_min(K0,M) <=
/// lambda_1(theta) and the decrease of the gap pi^2 - lambda_1 along a grid
/// approaching pi/2.  The gap may go negative on a coarse truncated mesh
/// (the discrete lambda_1 then sits above the continuum threshold); only its
/// monotone decrease is asserted.
inline FlatLimitReport flat_limit_check(const FormSet& forms,
                                        const std::vector<double>& thetas,
                                        const SolveOptions& opts = {}) {
  for (std::size_t i = 0; i + 1 < thetas.size(); ++i)
    if (!(thetas[i] < thetas[i + 1]))
      throw validation_error("flat_limit_check: grid must be strictly increasing");
  EigenOptions eo;
  eo.tol = opts.tol;
  eo.seed = opts.seed;
  const double lam0 = ref_lambda_min(forms, opts);
  FlatLimitReport rep;
  rep.bounds_hold = true;
  for (double theta : thetas) {
    const SpMat K = stiffness_at(forms, theta);
    const double l1 = smallest_eigenpairs(K, forms.M, 1, eo).eigenvalues[0];
    FlatLimitRow row{theta, l1, (1.0 - std::cos(theta)) * lam0, kPiSq - l1};
    if (!(row.lower_bound <= l1)) rep.bounds_hold = false;
    rep.rows.push_back(row);
  }
  rep.gap_decreasing = true;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i)
    if (!(rep.rows[i].gap > rep.rows[i + 1].gap)) rep.gap_decreasing = false;
  return rep;
}

// ---------------------------------------------------------------------------
// Non-monotone demonstration
// ---------------------------------------------------------------------------

struct NonmonotoneReport {
  Spectrum narrow;  // trihedral (pi/2, pi/2, eps)
  Spectrum wide;    // trihedral (pi/2, pi/2, pi/2)
  std::array<double, 3> narrow_alphas{}, wide_alphas{};
  std::array<double, 3> narrow_betas{}, wide_betas{};
  bool angle_dominance = false;  // wide dominates narrow componentwise
  bool nonmonotone = false;      // narrow count 0, wide count >= 1
};

/// Matched-discretization comparison of the trihedral layers with vertex
/// angles (pi/2, pi/2, eps) and (pi/2, pi/2, pi/2): the more unfolded layer
/// has a trapped mode while the less unfolded one has none.
inline NonmonotoneReport nonmonotone_demo(double eps, double h,
                                          double r_max = 12.0,
                                          const SolveOptions& opts = {}) {
  if (!(eps > 0.0 && eps <= kPi / 2))
    throw validation_error("nonmonotone_demo: eps must lie in (0, pi/2]");
  NonmonotoneReport rep;
  rep.narrow_alphas = {kPi / 2, kPi / 2, eps};
  rep.wide_alphas = {kPi / 2, kPi / 2, kPi / 2};
  rep.narrow_betas = trihedral_dihedrals(rep.narrow_alphas);
  rep.wide_betas = trihedral_dihedrals(rep.wide_alphas);
  rep.narrow = solve_trihedral(rep.narrow_alphas, h, opts.k, r_max, opts);
  rep.wide = solve_trihedral(rep.wide_alphas, h, opts.k, r_max, opts);
  rep.angle_dominance = true;
  for (int i = 0; i < 3; ++i) {
    if (rep.narrow_alphas[i] > rep.wide_alphas[i]) rep.angle_dominance = false;
    if (rep.narrow_betas[i] > rep.wide_betas[i]) rep.angle_dominance = false;
  }
  rep.nonmonotone =
      rep.narrow.certified_count == 0 && rep.wide.certified_count >= 1;
  return rep;
}

}  // namespace bentspec
