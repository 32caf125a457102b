#pragma once

// Structured conforming meshes of the truncated reference domains: the
// straight strip (0,1) x (-L,L), the straight-layer meridian
// (0,1) x (0,r_max), and the straight-layer 3D sector box in (x,r,phi).
// 2D meshes are triangulations, 3D meshes are coordinate-box hexahedra.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "bentspec/common.hpp"
#include "bentspec/geometry.hpp"

namespace bentspec {

enum class BoundaryTag : int {
  dirichlet_wall = 0,
  dirichlet_truncation = 1,
  symmetry_plane = 2,
  axis = 3,
};

enum class MeshFamily : int { strip = 0, meridian = 1, layer = 2 };

struct Mesh {
  MeshFamily family = MeshFamily::strip;
  int dim = 2;
  double h = 0.0;
  // Full layer meshes cover the whole 2*pi azimuth range; the two extreme
  // phi-planes then describe the same physical plane and their nodes are
  // identified by the assembly's dof map.
  bool periodic_phi = false;

  std::vector<double> coords;  // dim * n_nodes, interleaved
  std::vector<int> elems;      // nodes_per_elem * n_elems
  std::vector<int> region;     // one tag per element
  std::vector<int> facets;     // nodes_per_facet * n_facets
  std::vector<BoundaryTag> facet_tag;

  int nodes_per_elem() const { return dim == 2 ? 3 : 8; }
  int nodes_per_facet() const { return dim == 2 ? 2 : 4; }
  std::size_t n_nodes() const { return coords.size() / dim; }
  std::size_t n_elems() const { return elems.size() / nodes_per_elem(); }
  std::size_t n_facets() const { return facets.size() / nodes_per_facet(); }

  double coord(std::size_t node, int d) const { return coords[node * dim + d]; }
  const int* elem(std::size_t e) const { return elems.data() + e * nodes_per_elem(); }
  const int* facet(std::size_t f) const { return facets.data() + f * nodes_per_facet(); }
};

namespace detail {

/// Node positions 0 = p_0 < p_1 < ... < p_n = total with steps growing
/// geometrically by `grading`; the first step is h scaled so the last node
/// lands on `total` exactly.  Consecutive step ratios equal `grading`.
inline std::vector<double> graded_axis(double total, double h, double grading) {
  if (!(total > 0.0) || !(h > 0.0))
    throw validation_error("graded_axis: lengths must be positive");
  if (!(grading >= 1.0))
    throw validation_error("graded_axis: grading must be at least 1");
  std::size_t n;
  if (grading == 1.0) {
    n = static_cast<std::size_t>(std::llround(total / h));
    if (n < 1) n = 1;
  } else {
    // Smallest n with h*(g^n - 1)/(g - 1) >= total.
    double s = 0.0, step = h;
    n = 0;
    while (s < total && n < 100000) {
      s += step;
      step *= grading;
      ++n;
    }
  }
  std::vector<double> pos(n + 1);
  double raw_sum = grading == 1.0
                       ? h * static_cast<double>(n)
                       : h * (std::pow(grading, static_cast<double>(n)) - 1.0) /
                             (grading - 1.0);
  const double scale = total / raw_sum;
  pos[0] = 0.0;
  double step = h * scale;
  for (std::size_t i = 1; i <= n; ++i) {
    pos[i] = pos[i - 1] + step;
    step *= grading;
  }
  pos[n] = total;  // kill accumulated rounding
  return pos;
}

inline std::vector<double> uniform_axis(double lo, double hi, std::size_t cells) {
  std::vector<double> pos(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    pos[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(cells);
  return pos;
}

inline std::size_t transverse_cells(double h) {
  auto n = static_cast<std::size_t>(std::llround(1.0 / h));
  return n < 2 ? 2 : n;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Strip
// ---------------------------------------------------------------------------

/// Triangulation of (0,1) x (-L,L), mirror-symmetric under z -> -z, with a
/// node line at z = 0 and element size growing by `grading` away from it.
/// Region tag: 0 for z > 0, 1 for z < 0.
inline Mesh mesh_strip(double L, double h, double grading = 1.0) {
  if (!(L > 0.0)) throw validation_error("mesh_strip: L must be positive");
  if (!(h > 0.0)) throw validation_error("mesh_strip: h must be positive");
  if (h >= 2.0 * L)
    throw validation_error("mesh_strip: h too large, fewer than two cells across");

  const auto xs = detail::uniform_axis(0.0, 1.0, detail::transverse_cells(h));
  const auto zh = detail::graded_axis(L, std::min(h, L), grading);
  std::vector<double> zs;
  for (auto it = zh.rbegin(); it != zh.rend(); ++it) zs.push_back(-*it);
  for (std::size_t i = 1; i < zh.size(); ++i) zs.push_back(zh[i]);

  Mesh m;
  m.family = MeshFamily::strip;
  m.dim = 2;
  m.h = h;
  const std::size_t nx = xs.size(), nz = zs.size();
  m.coords.reserve(2 * nx * nz);
  for (std::size_t j = 0; j < nz; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      m.coords.push_back(xs[i]);
      m.coords.push_back(zs[j]);
    }
  auto id = [&](std::size_t i, std::size_t j) { return static_cast<int>(j * nx + i); };

  for (std::size_t j = 0; j + 1 < nz; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      const double zc = 0.5 * (zs[j] + zs[j + 1]);
      const int tag = zc > 0.0 ? 0 : 1;
      if (zc > 0.0) {
        m.elems.insert(m.elems.end(), {a, b, c});
        m.elems.insert(m.elems.end(), {a, c, d});
      } else {
        // Mirrored split so the triangulation is symmetric under z -> -z.
        m.elems.insert(m.elems.end(), {a, b, d});
        m.elems.insert(m.elems.end(), {b, c, d});
      }
      m.region.push_back(tag);
      m.region.push_back(tag);
    }

  for (std::size_t j = 0; j + 1 < nz; ++j) {
    m.facets.insert(m.facets.end(), {id(0, j), id(0, j + 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_wall);
    m.facets.insert(m.facets.end(), {id(nx - 1, j), id(nx - 1, j + 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_wall);
  }
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    m.facets.insert(m.facets.end(), {id(i, 0), id(i + 1, 0)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_truncation);
    m.facets.insert(m.facets.end(), {id(i, nz - 1), id(i + 1, nz - 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_truncation);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Meridian
// ---------------------------------------------------------------------------

/// Triangulation of (0,1) x (0,r_max) with r-steps growing by `grading` away
/// from the axis r = 0.
inline Mesh mesh_meridian(double r_max, double h, double grading = 1.0) {
  if (!(r_max > 1.0)) throw validation_error("mesh_meridian: r_max must exceed 1");
  if (!(h > 0.0)) throw validation_error("mesh_meridian: h must be positive");
  if (h >= r_max)
    throw validation_error("mesh_meridian: h too large, fewer than two cells across");

  const auto xs = detail::uniform_axis(0.0, 1.0, detail::transverse_cells(h));
  const auto rs = detail::graded_axis(r_max, h, grading);

  Mesh m;
  m.family = MeshFamily::meridian;
  m.dim = 2;
  m.h = h;
  const std::size_t nx = xs.size(), nr = rs.size();
  for (std::size_t j = 0; j < nr; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      m.coords.push_back(xs[i]);
      m.coords.push_back(rs[j]);
    }
  auto id = [&](std::size_t i, std::size_t j) { return static_cast<int>(j * nx + i); };

  for (std::size_t j = 0; j + 1 < nr; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      m.elems.insert(m.elems.end(), {a, b, c});
      m.elems.insert(m.elems.end(), {a, c, d});
      m.region.push_back(0);
      m.region.push_back(0);
    }

  for (std::size_t j = 0; j + 1 < nr; ++j) {
    m.facets.insert(m.facets.end(), {id(0, j), id(0, j + 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_wall);
    m.facets.insert(m.facets.end(), {id(nx - 1, j), id(nx - 1, j + 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_wall);
  }
  for (std::size_t i = 0; i + 1 < nx; ++i) {
    m.facets.insert(m.facets.end(), {id(i, 0), id(i + 1, 0)});
    m.facet_tag.push_back(BoundaryTag::axis);
    m.facets.insert(m.facets.end(), {id(i, nr - 1), id(i + 1, nr - 1)});
    m.facet_tag.push_back(BoundaryTag::dirichlet_truncation);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Layer sector
// ---------------------------------------------------------------------------

/// Structured hexahedral grid in (x, r, phi) on (0,1) x (0,r_max) x the
/// azimuth range of `spec`.  With symmetry_subspace set (regular layers
/// only), just the half-sector phi in (c_0, c_0 + psi_0/2) is meshed; the
/// extreme phi-planes carry the natural symmetry_plane tag.  Otherwise all
/// sectors are meshed with cell faces on every sector interface and the mesh
/// is marked phi-periodic.  `phi_steps` is the cell count per meshed sector
/// range (0 = automatic).  Region tag: sector index.
inline Mesh mesh_layer_sector(const LayerSpec& spec, double h,
                              double grading = 1.0, int phi_steps = 0) {
  if (!(h > 0.0)) throw validation_error("mesh_layer_sector: h must be positive");
  if (h >= spec.r_max)
    throw validation_error("mesh_layer_sector: h too large, fewer than two cells across");
  if (spec.symmetry_subspace && !spec.is_regular())
    throw validation_error(
        "mesh_layer_sector: symmetry subspace requires a regular layer");

  const auto xs = detail::uniform_axis(0.0, 1.0, detail::transverse_cells(h));
  const auto rs = detail::graded_axis(spec.r_max, h, grading);

  // Azimuth node positions: per-sector uniform subdivision, interfaces kept.
  std::vector<double> phis;
  std::vector<int> phi_cell_sector;
  if (spec.symmetry_subspace) {
    const double lo = spec.sector_centers[0];
    const double hi = lo + 0.5 * spec.sector_angles[0];
    int np = phi_steps > 0 ? phi_steps
                           : std::max<int>(4, static_cast<int>(std::ceil((hi - lo) / (2 * h))));
    phis = detail::uniform_axis(lo, hi, np);
    phi_cell_sector.assign(np, 0);
  } else {
    double lo = spec.phi_start();
    phis.push_back(lo);
    for (std::size_t j = 0; j < spec.n_sectors(); ++j) {
      const double hi = lo + spec.sector_angles[j];
      int np = phi_steps > 0
                   ? phi_steps
                   : std::max<int>(4, static_cast<int>(std::ceil((hi - lo) / (2 * h))));
      for (int q = 1; q <= np; ++q)
        phis.push_back(lo + (hi - lo) * q / np);
      phi_cell_sector.insert(phi_cell_sector.end(), np, static_cast<int>(j));
      lo = hi;
    }
  }

  Mesh m;
  m.family = MeshFamily::layer;
  m.dim = 3;
  m.h = h;
  m.periodic_phi = !spec.symmetry_subspace;
  const std::size_t nx = xs.size(), nr = rs.size(), np = phis.size();
  m.coords.reserve(3 * nx * nr * np);
  for (std::size_t k = 0; k < np; ++k)
    for (std::size_t j = 0; j < nr; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        m.coords.push_back(xs[i]);
        m.coords.push_back(rs[j]);
        m.coords.push_back(phis[k]);
      }
  auto id = [&](std::size_t i, std::size_t j, std::size_t k) {
    return static_cast<int>((k * nr + j) * nx + i);
  };

  for (std::size_t k = 0; k + 1 < np; ++k)
    for (std::size_t j = 0; j + 1 < nr; ++j)
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        m.elems.insert(m.elems.end(),
                       {id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k),
                        id(i, j + 1, k), id(i, j, k + 1), id(i + 1, j, k + 1),
                        id(i + 1, j + 1, k + 1), id(i, j + 1, k + 1)});
        m.region.push_back(phi_cell_sector[k]);
      }

  auto add_facet = [&](int a, int b, int c, int d, BoundaryTag tag) {
    m.facets.insert(m.facets.end(), {a, b, c, d});
    m.facet_tag.push_back(tag);
  };
  for (std::size_t k = 0; k + 1 < np; ++k)
    for (std::size_t j = 0; j + 1 < nr; ++j) {
      add_facet(id(0, j, k), id(0, j + 1, k), id(0, j + 1, k + 1), id(0, j, k + 1),
                BoundaryTag::dirichlet_wall);
      add_facet(id(nx - 1, j, k), id(nx - 1, j + 1, k), id(nx - 1, j + 1, k + 1),
                id(nx - 1, j, k + 1), BoundaryTag::dirichlet_wall);
    }
  for (std::size_t k = 0; k + 1 < np; ++k)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      add_facet(id(i, 0, k), id(i + 1, 0, k), id(i + 1, 0, k + 1), id(i, 0, k + 1),
                BoundaryTag::axis);
      add_facet(id(i, nr - 1, k), id(i + 1, nr - 1, k), id(i + 1, nr - 1, k + 1),
                id(i, nr - 1, k + 1), BoundaryTag::dirichlet_truncation);
    }
  for (std::size_t j = 0; j + 1 < nr; ++j)
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      add_facet(id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0),
                BoundaryTag::symmetry_plane);
      add_facet(id(i, j, np - 1), id(i + 1, j, np - 1), id(i + 1, j + 1, np - 1),
                id(i, j + 1, np - 1), BoundaryTag::symmetry_plane);
    }
  return m;
}

// ---------------------------------------------------------------------------
// Uniform refinement
// ---------------------------------------------------------------------------

/// Edge-midpoint refinement: triangles split into 4, box hexahedra into 8.
/// Region and boundary tags are inherited; h is halved.
inline Mesh refine(const Mesh& mesh) {
  Mesh out;
  out.family = mesh.family;
  out.dim = mesh.dim;
  out.h = mesh.h / 2;
  out.periodic_phi = mesh.periodic_phi;
  out.coords = mesh.coords;

  std::map<std::array<int, 2>, int> edge_node;
  auto midpoint = [&](int a, int b) {
    std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = edge_node.find(key);
    if (it != edge_node.end()) return it->second;
    const int idx = static_cast<int>(out.coords.size() / out.dim);
    for (int d = 0; d < out.dim; ++d)
      out.coords.push_back(0.5 * (mesh.coord(a, d) + mesh.coord(b, d)));
    edge_node.emplace(key, idx);
    return idx;
  };
  // Center of an (axis-aligned) quad or box: midpoint of the diagonal through
  // the smallest node id.  The opposite corner is the unique farthest one, so
  // the same center node is found however the corners are ordered.
  auto center = [&](std::initializer_list<int> nodes) {
    const int a = *std::min_element(nodes.begin(), nodes.end());
    double best = -1.0;
    int b = a;
    for (int u : nodes) {
      double d2 = 0.0;
      for (int d = 0; d < out.dim; ++d) {
        const double t = mesh.coord(u, d) - mesh.coord(a, d);
        d2 += t * t;
      }
      if (d2 > best) {
        best = d2;
        b = u;
      }
    }
    return midpoint(a, b);
  };

  if (mesh.dim == 2) {
    for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
      const int* v = mesh.elem(e);
      const int ab = midpoint(v[0], v[1]);
      const int bc = midpoint(v[1], v[2]);
      const int ca = midpoint(v[2], v[0]);
      const int tag = mesh.region[e];
      out.elems.insert(out.elems.end(), {v[0], ab, ca});
      out.elems.insert(out.elems.end(), {ab, v[1], bc});
      out.elems.insert(out.elems.end(), {ca, bc, v[2]});
      out.elems.insert(out.elems.end(), {ab, bc, ca});
      out.region.insert(out.region.end(), 4, tag);
    }
    for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
      const int* v = mesh.facet(f);
      const int ab = midpoint(v[0], v[1]);
      out.facets.insert(out.facets.end(), {v[0], ab});
      out.facets.insert(out.facets.end(), {ab, v[1]});
      out.facet_tag.insert(out.facet_tag.end(), 2, mesh.facet_tag[f]);
    }
    return out;
  }

  // Hexahedra: children are the 8 sub-boxes around each original corner.
  for (std::size_t e = 0; e < mesh.n_elems(); ++e) {
    const int* v = mesh.elem(e);
    // Local corner layout as generated: v[0..3] bottom phi-face (x,r loop),
    // v[4..7] top phi-face.
    const int e01 = midpoint(v[0], v[1]), e12 = midpoint(v[1], v[2]);
    const int e23 = midpoint(v[2], v[3]), e30 = midpoint(v[3], v[0]);
    const int e45 = midpoint(v[4], v[5]), e56 = midpoint(v[5], v[6]);
    const int e67 = midpoint(v[6], v[7]), e74 = midpoint(v[7], v[4]);
    const int e04 = midpoint(v[0], v[4]), e15 = midpoint(v[1], v[5]);
    const int e26 = midpoint(v[2], v[6]), e37 = midpoint(v[3], v[7]);
    const int f_bot = center({v[0], v[1], v[2], v[3]});
    const int f_top = center({v[4], v[5], v[6], v[7]});
    const int f_a = center({v[0], v[1], v[5], v[4]});
    const int f_b = center({v[1], v[2], v[6], v[5]});
    const int f_c = center({v[2], v[3], v[7], v[6]});
    const int f_d = center({v[3], v[0], v[4], v[7]});
    const int cc = center({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
    const int tag = mesh.region[e];
    auto hex = [&](int a, int b, int c, int d, int aa, int bb, int ccn, int dd) {
      out.elems.insert(out.elems.end(), {a, b, c, d, aa, bb, ccn, dd});
      out.region.push_back(tag);
    };
    hex(v[0], e01, f_bot, e30, e04, f_a, cc, f_d);
    hex(e01, v[1], e12, f_bot, f_a, e15, f_b, cc);
    hex(f_bot, e12, v[2], e23, cc, f_b, e26, f_c);
    hex(e30, f_bot, e23, v[3], f_d, cc, f_c, e37);
    hex(e04, f_a, cc, f_d, v[4], e45, f_top, e74);
    hex(f_a, e15, f_b, cc, e45, v[5], e56, f_top);
    hex(cc, f_b, e26, f_c, f_top, e56, v[6], e67);
    hex(f_d, cc, f_c, e37, e74, f_top, e67, v[7]);
  }
  for (std::size_t f = 0; f < mesh.n_facets(); ++f) {
    const int* v = mesh.facet(f);
    const int e01 = midpoint(v[0], v[1]), e12 = midpoint(v[1], v[2]);
    const int e23 = midpoint(v[2], v[3]), e30 = midpoint(v[3], v[0]);
    const int fc = center({v[0], v[1], v[2], v[3]});
    const BoundaryTag tag = mesh.facet_tag[f];
    auto quad = [&](int a, int b, int c, int d) {
      out.facets.insert(out.facets.end(), {a, b, c, d});
      out.facet_tag.push_back(tag);
    };
    quad(v[0], e01, fc, e30);
    quad(e01, v[1], e12, fc);
    quad(fc, e12, v[2], e23);
    quad(e30, fc, e23, v[3]);
  }
  return out;
}

}  // namespace bentspec
