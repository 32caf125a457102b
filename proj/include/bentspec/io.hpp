#pragma once

// Serialization: plain-text mesh dump (bit-exact round trip), coordinate
// matrix dump for debugging, JSON results, sweep CSV and a minimal built-in
// SVG line plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bentspec/assemble.hpp"
#include "bentspec/common.hpp"
#include "bentspec/mesh.hpp"
#include "bentspec/spectra.hpp"
#include "bentspec/sweeps.hpp"

namespace bentspec {

using json = nlohmann::ordered_json;

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Mesh dump: `# h=... periodic=... family=...` metadata comment, then a
// `dim n_nodes n_elements` header, node coordinate lines, element lines of
// vertex indices + region tag, and facet lines of vertex indices + tag name
// until end of file.
// ---------------------------------------------------------------------------

inline const char* tag_name(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::dirichlet_wall: return "dirichlet_wall";
    case BoundaryTag::dirichlet_truncation: return "dirichlet_truncation";
    case BoundaryTag::symmetry_plane: return "symmetry_plane";
    case BoundaryTag::axis: return "axis";
  }
  throw validation_error("tag_name: unknown tag");
}

inline BoundaryTag tag_from_name(const std::string& s) {
  if (s == "dirichlet_wall") return BoundaryTag::dirichlet_wall;
  if (s == "dirichlet_truncation") return BoundaryTag::dirichlet_truncation;
  if (s == "symmetry_plane") return BoundaryTag::symmetry_plane;
  if (s == "axis") return BoundaryTag::axis;
  throw validation_error("tag_from_name: unknown tag " + s);
}

inline std::string dump_mesh(const Mesh& m) {
  std::ostringstream os;
  os << "# h=" << fmt17(m.h) << " periodic=" << (m.periodic_phi ? 1 : 0)
     << " family=" << static_cast<int>(m.family) << "\n";
  os << m.dim << ' ' << m.n_nodes() << ' ' << m.n_elems() << "\n";
  for (std::size_t i = 0; i < m.n_nodes(); ++i) {
    for (int d = 0; d < m.dim; ++d) os << (d ? " " : "") << fmt17(m.coord(i, d));
    os << "\n";
  }
  for (std::size_t e = 0; e < m.n_elems(); ++e) {
    const int* v = m.elem(e);
    for (int q = 0; q < m.nodes_per_elem(); ++q) os << v[q] << ' ';
    os << m.region[e] << "\n";
  }
  for (std::size_t f = 0; f < m.n_facets(); ++f) {
    const int* v = m.facet(f);
    for (int q = 0; q < m.nodes_per_facet(); ++q) os << v[q] << ' ';
    os << tag_name(m.facet_tag[f]) << "\n";
  }
  return os.str();
}

inline Mesh parse_mesh(std::istream& is) {
  Mesh m;
  std::string line;
  if (!std::getline(is, line)) throw validation_error("parse_mesh: empty input");
  if (line.rfind("# ", 0) == 0) {
    int per = 0, fam = 0;
    if (std::sscanf(line.c_str(), "# h=%lg periodic=%d family=%d", &m.h, &per,
                    &fam) != 3)
      throw validation_error("parse_mesh: bad metadata line");
    m.periodic_phi = per != 0;
    m.family = static_cast<MeshFamily>(fam);
    if (!std::getline(is, line)) throw validation_error("parse_mesh: truncated");
  }
  std::size_t n_nodes = 0, n_elems = 0;
  {
    std::istringstream hs(line);
    if (!(hs >> m.dim >> n_nodes >> n_elems))
      throw validation_error("parse_mesh: bad header");
  }
  m.coords.resize(m.dim * n_nodes);
  for (std::size_t i = 0; i < n_nodes; ++i)
    for (int d = 0; d < m.dim; ++d)
      if (!(is >> m.coords[i * m.dim + d]))
        throw validation_error("parse_mesh: truncated nodes");
  const int npe = m.nodes_per_elem();
  m.elems.resize(npe * n_elems);
  m.region.resize(n_elems);
  for (std::size_t e = 0; e < n_elems; ++e) {
    for (int q = 0; q < npe; ++q)
      if (!(is >> m.elems[e * npe + q]))
        throw validation_error("parse_mesh: truncated elements");
    if (!(is >> m.region[e]))
      throw validation_error("parse_mesh: truncated element tag");
  }
  const int npf = m.nodes_per_facet();
  while (true) {
    std::vector<int> v(npf);
    if (!(is >> v[0])) break;
    for (int q = 1; q < npf; ++q)
      if (!(is >> v[q])) throw validation_error("parse_mesh: truncated facet");
    std::string tag;
    if (!(is >> tag)) throw validation_error("parse_mesh: truncated facet tag");
    m.facets.insert(m.facets.end(), v.begin(), v.end());
    m.facet_tag.push_back(tag_from_name(tag));
  }
  return m;
}

inline Mesh parse_mesh(const std::string& text) {
  std::istringstream is(text);
  return parse_mesh(is);
}

// ---------------------------------------------------------------------------
// Matrix dump: documented header, node->dof map, then `row col value`
// triplets (17 significant digits) per matrix section.
// ---------------------------------------------------------------------------

inline std::string dump_forms(const FormSet& fs) {
  std::ostringstream os;
  os << "# form set: family=" << static_cast<int>(fs.family)
     << " mode=" << fs.mode << " n_dofs=" << fs.n_dofs << "\n";
  os << "# dofmap: node dof (-1 = constrained); matrices as `row col value`\n";
  os << "dofmap " << fs.dof_of_node.size() << "\n";
  for (std::size_t i = 0; i < fs.dof_of_node.size(); ++i)
    os << i << ' ' << fs.dof_of_node[i] << "\n";
  auto dump = [&](const char* name, const SpMat& a) {
    os << "matrix " << name << ' ' << a.nonZeros() << "\n";
    for (int c = 0; c < a.outerSize(); ++c)
      for (SpMat::InnerIterator it(a, c); it; ++it)
        os << it.row() << ' ' << it.col() << ' ' << fmt17(it.value()) << "\n";
  };
  dump("M", fs.M);
  dump("K0", fs.K0);
  dump("R", fs.R);
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON results (schema version 1; see docs/result-schema.json)
// ---------------------------------------------------------------------------

inline json to_json(const Spectrum& s) {
  json j;
  j["schema_version"] = 1;
  j["problem"] = s.problem;
  j["params"] = s.params;
  j["threshold"] = s.threshold;
  j["eigenvalues"] = s.eigenvalues;
  j["residuals"] = s.residuals;
  j["modes"] = s.modes;
  j["certified_count"] = s.certified_count;
  j["n_dofs"] = s.n_dofs;
  j["refine_level"] = s.refine_level;
  return j;
}

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_certified: return "not_certified";
  }
  throw validation_error("verdict_name: unknown verdict");
}

inline json to_json(const SweepResult& r) {
  json j;
  j["schema_version"] = 1;
  j["margin"] = r.margin;
  j["ref_lambda_min"] = r.ref_lambda_min;
  json pts = json::array();
  for (const auto& p : r.points) {
    json pj;
    pj["theta"] = p.theta;
    pj["threshold"] = p.threshold;
    pj["lower_bound"] = p.lower_bound;
    pj["certified_count"] = p.certified_count;
    pj["eigenvalues"] = p.eigenvalues;
    pts.push_back(pj);
  }
  j["points"] = pts;
  json verd = json::array();
  for (const auto& row : r.verdicts) {
    json rj = json::array();
    for (Verdict v : row) rj.push_back(verdict_name(v));
    verd.push_back(rj);
  }
  j["verdicts"] = verd;
  j["all_pass"] = r.all_pass();
  return j;
}

inline json to_json(const NonmonotoneReport& r) {
  json j;
  j["schema_version"] = 1;
  j["narrow"] = to_json(r.narrow);
  j["wide"] = to_json(r.wide);
  j["narrow_alphas"] = r.narrow_alphas;
  j["wide_alphas"] = r.wide_alphas;
  j["narrow_betas"] = r.narrow_betas;
  j["wide_betas"] = r.wide_betas;
  j["angle_dominance"] = r.angle_dominance;
  j["nonmonotone"] = r.nonmonotone;
  return j;
}

// ---------------------------------------------------------------------------
// CSV: one row per (theta, j)
// ---------------------------------------------------------------------------

inline std::string to_csv(const SweepResult& r) {
  std::ostringstream os;
  os << "theta,j,lambda,certified,threshold,lower_bound\n";
  for (const auto& p : r.points) {
    if (p.eigenvalues.empty()) {
      os << fmt17(p.theta) << ",0,," << 0 << ',' << fmt17(p.threshold) << ','
         << fmt17(p.lower_bound) << "\n";
      continue;
    }
    for (std::size_t j = 0; j < p.eigenvalues.size(); ++j) {
      const bool cert = j < static_cast<std::size_t>(p.certified_count);
      os << fmt17(p.theta) << ',' << j + 1 << ',' << fmt17(p.eigenvalues[j])
         << ',' << (cert ? 1 : 0) << ',' << fmt17(p.threshold) << ','
         << fmt17(p.lower_bound) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Minimal SVG line plot of lambda_j(theta) against the threshold line
// ---------------------------------------------------------------------------

inline std::string to_svg(const SweepResult& r) {
  const double W = 640, H = 480, ml = 60, mr = 20, mt = 20, mb = 40;
  double xmin = r.points.front().theta, xmax = r.points.back().theta;
  double ymin = 1e300, ymax = -1e300;
  for (const auto& p : r.points) {
    ymin = std::min(ymin, p.threshold);
    ymax = std::max(ymax, p.threshold);
    for (double ev : p.eigenvalues) {
      ymin = std::min(ymin, ev);
      ymax = std::max(ymax, ev);
    }
  }
  if (!(ymax > ymin)) {
    ymin -= 1.0;
    ymax += 1.0;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto X = [&](double t) {
    return xmax > xmin ? ml + (W - ml - mr) * (t - xmin) / (xmax - xmin)
                       : 0.5 * (ml + W - mr);
  };
  auto Y = [&](double v) { return H - mb - (H - mt - mb) * (v - ymin) / (ymax - ymin); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = xmin + (xmax - xmin) * i / 4;
    const double v = ymin + (ymax - ymin) * i / 4;
    os << "<line x1=\"" << X(t) << "\" y1=\"" << H - mb << "\" x2=\"" << X(t)
       << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << X(t) << "\" y=\"" << H - mb + 18
       << "\" font-size=\"11\" text-anchor=\"middle\">" << t << "</text>\n";
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << Y(v) << "\" x2=\"" << ml
       << "\" y2=\"" << Y(v) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << Y(v) + 4
       << "\" font-size=\"11\" text-anchor=\"end\">" << v << "</text>\n";
  }
  // threshold polyline
  os << "<polyline fill=\"none\" stroke=\"red\" stroke-dasharray=\"4 3\" points=\"";
  for (const auto& p : r.points) os << X(p.theta) << ',' << Y(p.threshold) << ' ';
  os << "\"/>\n";
  // eigenvalue branches
  std::size_t nmax = 0;
  for (const auto& p : r.points) nmax = std::max(nmax, p.eigenvalues.size());
  const char* colors[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"};
  for (std::size_t j = 0; j < nmax; ++j) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[j % 5] << "\" points=\"";
    for (const auto& p : r.points)
      if (j < p.eigenvalues.size())
        os << X(p.theta) << ',' << Y(p.eigenvalues[j]) << ' ';
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

/// Write-to-temp then rename, so readers never observe partial files.
inline void write_atomic(const std::filesystem::path& path,
                         const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_atomic: cannot open " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

}  // namespace bentspec
