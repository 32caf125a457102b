#pragma once

// Assembly of the mass matrix M, reference stiffness K0 and remainder R on
// the Dirichlet-constrained space, so that the Dirichlet form of the bent
// domain at opening angle theta is exactly v^T (K0 + cos(theta) R) v on the
// fixed reference mesh.
//
// The remainder integrands, fixed by the chain rule applied to the forward
// transforms (and certified by the pullback-equivalence tests):
//   strip:    r(v) = -2 int sgn(z) dx(v) dz(v)
//   meridian: r(v) = -2 int dx(v) dr(v) * r
//   layer:    r(v) = int ( -2 cos(phi - c_j) r dr(v) dx(v)
//                          +2 sin(phi - c_j) dphi(v) dx(v) ) dphi dx dr
// Note the sign of the sin term in the layer case: it comes out positive in
// the derivation, with no radial weight.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <vector>

#include "bentspec/common.hpp"
#include "bentspec/geometry.hpp"
#include "bentspec/mesh.hpp"

namespace bentspec {

using SpMat = Eigen::SparseMatrix<double>;

enum class FormFamily : int { strip = 0, meridian = 1, layer = 2 };

struct FormSet {
  SpMat M;   // symmetric positive definite
  SpMat K0;  // symmetric positive definite
  SpMat R;   // symmetric, |v'Rv| <= v'K0v
  std::vector<int> dof_of_node;  // -1 for constrained nodes
  int n_dofs = 0;
  FormFamily family = FormFamily::strip;
  int mode = 0;  // Fourier index, meridian only
};

/// K(theta) = K0 + cos(theta) * R; exactly affine in cos(theta).
inline SpMat stiffness_at(const FormSet& forms, double theta) {
  if (!(theta > 0.0 && theta <= kPi / 2))
    throw validation_error("stiffness_at: theta must lie in (0, pi/2]");
  return forms.K0 + std::cos(theta) * forms.R;
}

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// Dirichlet elimination plus node identification (axis collapse, periodic
/// seam).  Returns the node->dof map; constrained nodes get -1.
inline std::vector<int> build_dof_map(const Mesh& mesh, bool constrain_axis,
                                      bool identify_axis, int& n_dofs) {
  const std::size_t n = mesh.n_nodes();
  UnionFind uf(n);
  std::vector<char> constrained(n, 0);

  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    const BoundaryTag tag = mesh.facet_tag[f];
    const int* v = mesh.facet(f);
    for (int q = 0; q < mesh.nodes_per_facet(); ++q) {
      if (tag == BoundaryTag::dirichlet_wall ||
          tag == BoundaryTag::dirichlet_truncation)
        constrained[v[q]] = 1;
      if (tag == BoundaryTag::axis && constrain_axis) constrained[v[q]] = 1;
    }
  }

  if (identify_axis && mesh.dim == 3) {
    // All nodes at r = 0 with the same x are one physical point.
    std::map<double, int> rep;
    for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
      if (mesh.facet_tag[f] != BoundaryTag::axis) continue;
      const int* v = mesh.facet(f);
      for (int q = 0; q < 4; ++q) {
        const double x = mesh.coord(v[q], 0);
        auto [it, fresh] = rep.emplace(x, v[q]);
        if (!fresh) uf.unite(it->second, v[q]);
      }
    }
  }

  if (mesh.periodic_phi && mesh.dim == 3) {
    double phi_lo = mesh.coord(0, 2), phi_hi = mesh.coord(0, 2);
    for (std::size_t i = 1; i < n; ++i) {
      phi_lo = std::min(phi_lo, mesh.coord(i, 2));
      phi_hi = std::max(phi_hi, mesh.coord(i, 2));
    }
    std::map<std::array<double, 2>, int> lo_rep;
    for (std::size_t i = 0; i < n; ++i)
      if (mesh.coord(i, 2) == phi_lo)
        lo_rep[{mesh.coord(i, 0), mesh.coord(i, 1)}] = static_cast<int>(i);
    for (std::size_t i = 0; i < n; ++i)
      if (mesh.coord(i, 2) == phi_hi) {
        auto it = lo_rep.find({mesh.coord(i, 0), mesh.coord(i, 1)});
        if (it == lo_rep.end())
          throw numerical_error("build_dof_map: unmatched periodic seam node");
        uf.unite(it->second, static_cast<int>(i));
      }
  }

  // A group is constrained if any member is.
  for (std::size_t i = 0; i < n; ++i)
    if (constrained[i]) constrained[uf.find(static_cast<int>(i))] = 1;

  std::vector<int> dof(n, -1);
  n_dofs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int root = uf.find(static_cast<int>(i));
    if (constrained[root]) continue;
    if (dof[root] < 0) dof[root] = n_dofs++;
    dof[i] = dof[root];
  }
  return dof;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

inline void scatter(Triplets& out, const std::vector<int>& dof, const int* nodes,
                    int nn, const Eigen::MatrixXd& local) {
  for (int a = 0; a < nn; ++a) {
    const int i = dof[nodes[a]];
    if (i < 0) continue;
    for (int b = 0; b < nn; ++b) {
      const int j = dof[nodes[b]];
      if (j < 0) continue;
      out.emplace_back(i, j, local(a, b));
    }
  }
}

inline SpMat from_triplets(const Triplets& t, int n) {
  SpMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

inline SpMat symmetrized(const SpMat& a) {
  SpMat s = 0.5 * (a + SpMat(a.transpose()));
  s.makeCompressed();
  return s;
}

struct TriGeom {
  double area;
  std::array<double, 3> gx, gy;  // constant P1 gradients
};

inline TriGeom tri_geom(const Mesh& mesh, std::size_t e) {
  const int* v = mesh.elem(e);
  const double x0 = mesh.coord(v[0], 0), y0 = mesh.coord(v[0], 1);
  const double x1 = mesh.coord(v[1], 0), y1 = mesh.coord(v[1], 1);
  const double x2 = mesh.coord(v[2], 0), y2 = mesh.coord(v[2], 1);
  const double det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
  if (!(std::abs(det) > 0.0))
    throw numerical_error("tri_geom: degenerate element");
  TriGeom g;
  g.area = 0.5 * std::abs(det);
  g.gx = {(y1 - y2) / det, (y2 - y0) / det, (y0 - y1) / det};
  g.gy = {(x2 - x1) / det, (x0 - x2) / det, (x1 - x0) / det};
  return g;
}

/// Degree-4 triangle rule (6 interior points); weights sum to 1.
struct TriQuad {
  static constexpr int n = 6;
  std::array<std::array<double, 3>, 6> bary;
  std::array<double, 6> w;
  TriQuad() {
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    bary = {{{1 - 2 * a, a, a},
             {a, 1 - 2 * a, a},
             {a, a, 1 - 2 * a},
             {1 - 2 * b, b, b},
             {b, 1 - 2 * b, b},
             {b, b, 1 - 2 * b}}};
    w = {wa, wa, wa, wb, wb, wb};
  }
};

inline const TriQuad& tri_quad() {
  static const TriQuad q;
  return q;
}

/// 3-point Gauss-Legendre on [0,1].
struct Gauss3 {
  std::array<double, 3> x{0.5 - std::sqrt(0.15), 0.5, 0.5 + std::sqrt(0.15)};
  std::array<double, 3> w{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

inline const Gauss3& gauss3() {
  static const Gauss3 g;
  return g;
}

struct BoxGeom {
  std::array<double, 3> lo, hi;
  std::array<int, 8> corner;  // global node of tensor corner (bit i -> dir i)
};

inline BoxGeom box_geom(const Mesh& mesh, std::size_t e) {
  const int* v = mesh.elem(e);
  BoxGeom g;
  for (int d = 0; d < 3; ++d) {
    g.lo[d] = g.hi[d] = mesh.coord(v[0], d);
    for (int q = 1; q < 8; ++q) {
      g.lo[d] = std::min(g.lo[d], mesh.coord(v[q], d));
      g.hi[d] = std::max(g.hi[d], mesh.coord(v[q], d));
    }
  }
  for (int q = 0; q < 8; ++q) {
    int bits = 0;
    for (int d = 0; d < 3; ++d) {
      const double mid = 0.5 * (g.lo[d] + g.hi[d]);
      if (mesh.coord(v[q], d) > mid) bits |= 1 << d;
      if (!(g.hi[d] > g.lo[d]))
        throw numerical_error("box_geom: degenerate cell");
    }
    g.corner[bits] = v[q];
  }
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Strip
// ---------------------------------------------------------------------------

/// P1 forms on the strip: M = int u v, K0 = int grad u . grad v,
/// R = -2 int sgn(z) dx(u) dz(v), symmetrized.
inline FormSet assemble_strip(const Mesh& mesh) {
  if (mesh.dim != 2) throw validation_error("assemble_strip: expected a 2D mesh");
  FormSet fs;
  fs.family = FormFamily::strip;
  fs.dof_of_node = detail::build_dof_map(mesh, false, false, fs.n_dofs);

  detail::Triplets tm, tk, tr;
  Eigen::MatrixXd Me(3, 3), Ke(3, 3), Re(3, 3);
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const int* v = mesh.elem(e);
    double zmin = 0.0, zmax = 0.0;
    for (int q = 0; q < 3; ++q) {
      zmin = std::min(zmin, mesh.coord(v[q], 1));
      zmax = std::max(zmax, mesh.coord(v[q], 1));
    }
    if (zmin < -1e-14 && zmax > 1e-14)
      throw validation_error("assemble_strip: element straddles z = 0");
    const double sgn =
        (mesh.coord(v[0], 1) + mesh.coord(v[1], 1) + mesh.coord(v[2], 1)) > 0.0
            ? 1.0
            : -1.0;
    const auto g = detail::tri_geom(mesh, e);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        Me(a, b) = g.area / 12.0 * (a == b ? 2.0 : 1.0);
        Ke(a, b) = g.area * (g.gx[a] * g.gx[b] + g.gy[a] * g.gy[b]);
        Re(a, b) = -2.0 * sgn * g.area * g.gx[a] * g.gy[b];
      }
    detail::scatter(tm, fs.dof_of_node, v, 3, Me);
    detail::scatter(tk, fs.dof_of_node, v, 3, Ke);
    detail::scatter(tr, fs.dof_of_node, v, 3, Re);
  }
  fs.M = detail::from_triplets(tm, fs.n_dofs);
  fs.K0 = detail::from_triplets(tk, fs.n_dofs);
  fs.R = detail::symmetrized(detail::from_triplets(tr, fs.n_dofs));
  return fs;
}

// ---------------------------------------------------------------------------
// Meridian (Fourier mode m)
// ---------------------------------------------------------------------------

/// Axisymmetric forms for Fourier mode m on the meridian rectangle:
/// M = int u v r, K0 = int (dx u dx v + dr u dr v + m^2 u v / r^2) r,
/// R = -2 int dx(u) dr(v) r, symmetrized.  For m >= 1 the axis carries an
/// essential zero condition; quadrature points are interior, never at r = 0.
inline FormSet assemble_meridian(const Mesh& mesh, int m) {
  if (mesh.dim != 2) throw validation_error("assemble_meridian: expected a 2D mesh");
  if (m < 0) throw validation_error("assemble_meridian: mode must be nonnegative");
  FormSet fs;
  fs.family = FormFamily::meridian;
  fs.mode = m;
  fs.dof_of_node = detail::build_dof_map(mesh, m >= 1, false, fs.n_dofs);

  const auto& quad = detail::tri_quad();
  detail::Triplets tm, tk, tr;
  Eigen::MatrixXd Me(3, 3), Ke(3, 3), Re(3, 3);
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const int* v = mesh.elem(e);
    const auto g = detail::tri_geom(mesh, e);
    Me.setZero();
    Ke.setZero();
    Re.setZero();
    for (int q = 0; q < quad.n; ++q) {
      double r = 0.0;
      std::array<double, 3> N{};
      for (int a = 0; a < 3; ++a) {
        N[a] = quad.bary[q][a];
        r += N[a] * mesh.coord(v[a], 1);
      }
      const double w = quad.w[q] * g.area;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          Me(a, b) += w * N[a] * N[b] * r;
          Ke(a, b) += w * (g.gx[a] * g.gx[b] + g.gy[a] * g.gy[b]) * r;
          if (m > 0) Ke(a, b) += w * m * m * N[a] * N[b] / r;
          Re(a, b) += -2.0 * w * g.gx[a] * g.gy[b] * r;
        }
    }
    detail::scatter(tm, fs.dof_of_node, v, 3, Me);
    detail::scatter(tk, fs.dof_of_node, v, 3, Ke);
    detail::scatter(tr, fs.dof_of_node, v, 3, Re);
  }
  fs.M = detail::from_triplets(tm, fs.n_dofs);
  fs.K0 = detail::from_triplets(tk, fs.n_dofs);
  fs.R = detail::symmetrized(detail::from_triplets(tr, fs.n_dofs));
  return fs;
}

// ---------------------------------------------------------------------------
// Layer (trilinear cells in (x, r, phi))
// ---------------------------------------------------------------------------

/// Cylindrical forms on the layer sector grid:
/// M  = int u v r,
/// K0 = int (dx u dx v + dr u dr v + r^-2 dphi u dphi v) r,
/// R  = int (-2 cos(phi - c_j) r dr(u) dx(v) + 2 sin(phi - c_j) dphi(u) dx(v)),
/// symmetrized.  Axis nodes are identified across phi (one dof per x); the
/// periodic seam of a full-ring mesh is identified likewise.
inline FormSet assemble_layer(const Mesh& mesh, const LayerSpec& spec) {
  if (mesh.dim != 3) throw validation_error("assemble_layer: expected a 3D mesh");
  for (std::size_t e = 0; e < mesh.n_elems(); ++e)
    if (mesh.region[e] < 0 ||
        mesh.region[e] >= static_cast<int>(spec.n_sectors()))
      throw validation_error("assemble_layer: sector tags do not match the spec");

  FormSet fs;
  fs.family = FormFamily::layer;
  fs.dof_of_node = detail::build_dof_map(mesh, false, true, fs.n_dofs);

  const auto& g1 = detail::gauss3();
  detail::Triplets tm, tk, tr;
  Eigen::MatrixXd Me(8, 8), Ke(8, 8), Re(8, 8);
  std::array<double, 8> N{}, gx{}, gr{}, gp{};
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const auto box = detail::box_geom(mesh, e);
    const double cj = spec.sector_centers[mesh.region[e]];
    const std::array<double, 3> len{box.hi[0] - box.lo[0], box.hi[1] - box.lo[1],
                                    box.hi[2] - box.lo[2]};
    const double vol = len[0] * len[1] * len[2];
    Me.setZero();
    Ke.setZero();
    Re.setZero();
    for (int qx = 0; qx < 3; ++qx)
      for (int qr = 0; qr < 3; ++qr)
        for (int qp = 0; qp < 3; ++qp) {
          const std::array<double, 3> t{g1.x[qx], g1.x[qr], g1.x[qp]};
          const double w = g1.w[qx] * g1.w[qr] * g1.w[qp] * vol;
          const double r = box.lo[1] + t[1] * len[1];
          const double phi = box.lo[2] + t[2] * len[2];
          for (int c = 0; c < 8; ++c) {
            const double s0 = (c & 1) ? t[0] : 1 - t[0];
            const double s1 = (c & 2) ? t[1] : 1 - t[1];
            const double s2 = (c & 4) ? t[2] : 1 - t[2];
            const double d0 = ((c & 1) ? 1.0 : -1.0) / len[0];
            const double d1 = ((c & 2) ? 1.0 : -1.0) / len[1];
            const double d2 = ((c & 4) ? 1.0 : -1.0) / len[2];
            N[c] = s0 * s1 * s2;
            gx[c] = d0 * s1 * s2;
            gr[c] = s0 * d1 * s2;
            gp[c] = s0 * s1 * d2;
          }
          const double cphi = std::cos(phi - cj), sphi = std::sin(phi - cj);
          for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
              Me(a, b) += w * N[a] * N[b] * r;
              Ke(a, b) += w * ((gx[a] * gx[b] + gr[a] * gr[b]) * r +
                               gp[a] * gp[b] / r);
              Re(a, b) += w * (-2.0 * cphi * r * gr[a] * gx[b] +
                               2.0 * sphi * gp[a] * gx[b]);
            }
        }
    std::array<int, 8> nodes = box.corner;
    detail::scatter(tm, fs.dof_of_node, nodes.data(), 8, Me);
    detail::scatter(tk, fs.dof_of_node, nodes.data(), 8, Ke);
    detail::scatter(tr, fs.dof_of_node, nodes.data(), 8, Re);
  }
  fs.M = detail::from_triplets(tm, fs.n_dofs);
  fs.K0 = detail::from_triplets(tk, fs.n_dofs);
  fs.R = detail::symmetrized(detail::from_triplets(tr, fs.n_dofs));
  return fs;
}

}  // namespace bentspec
