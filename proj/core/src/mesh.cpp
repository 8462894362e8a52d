#include "vstokes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "vstokes/error.hpp"

namespace vstokes {

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::Dirichlet: return "dirichlet";
    case BoundaryKind::FreeSlip: return "freeslip";
    case BoundaryKind::Traction: return "traction";
  }
  return "unknown";
}

void DomainSpec::validate() const {
  if (dim != 2 && dim != 3) throw InvalidArgument("DomainSpec: dim must be 2 or 3");
  if (viscosity.empty()) throw InvalidArgument("DomainSpec: no viscosities given");
  for (double mu : viscosity)
    if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("DomainSpec: viscosity must be positive");
  for (int k = 0; k < dim; ++k)
    if (!(hi[k] > lo[k])) throw InvalidArgument("DomainSpec: empty bounding box");
  if (!subdomain || !boundary || !forcing)
    throw InvalidArgument("DomainSpec: subdomain, boundary and forcing callbacks are required");
}

double DomainSpec::volume() const {
  double v = 1.0;
  for (int k = 0; k < dim; ++k) v *= hi[k] - lo[k];
  return v;
}

std::vector<int> EntityTags::gamma_f_facets() const {
  std::vector<int> out = freeslip_facets;
  out.insert(out.end(), traction_facets.begin(), traction_facets.end());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Geometry helpers

double MeshLevel::cell_volume(int c) const {
  const auto& cv = cells[c];
  const Point& p0 = vertices[cv[0]];
  if (dim == 2) {
    const Point a = vertices[cv[1]] - p0, b = vertices[cv[2]] - p0;
    return 0.5 * std::abs(a[0] * b[1] - a[1] * b[0]);
  }
  const Point a = vertices[cv[1]] - p0, b = vertices[cv[2]] - p0, e = vertices[cv[3]] - p0;
  return std::abs(dot(a, cross(b, e))) / 6.0;
}

Point MeshLevel::cell_centroid(int c) const {
  Point s{0, 0, 0};
  for (int k = 0; k <= dim; ++k) s = s + vertices[cells[c][k]];
  return (1.0 / (dim + 1)) * s;
}

double MeshLevel::facet_area(int f) const {
  const auto& fv = facets[f].vertices;
  if (dim == 2) return norm(vertices[fv[1]] - vertices[fv[0]]);
  return 0.5 * norm(cross(vertices[fv[1]] - vertices[fv[0]], vertices[fv[2]] - vertices[fv[0]]));
}

Point MeshLevel::facet_centroid(int f) const {
  Point s{0, 0, 0};
  for (int k = 0; k < dim; ++k) s = s + vertices[facets[f].vertices[k]];
  return (1.0 / dim) * s;
}

namespace {

Point raw_facet_normal(const MeshLevel& m, const std::array<int, 3>& fv) {
  Point n;
  if (m.dim == 2) {
    const Point t = m.vertices[fv[1]] - m.vertices[fv[0]];
    n = {t[1], -t[0], 0.0};
  } else {
    n = cross(m.vertices[fv[1]] - m.vertices[fv[0]], m.vertices[fv[2]] - m.vertices[fv[0]]);
  }
  const double len = norm(n);
  if (len == 0.0) throw DegenerateCell("zero-area facet");
  return (1.0 / len) * n;
}

// Unit normal of facet vertices `fv` pointing away from `cell`.
Point outward_normal(const MeshLevel& m, const std::array<int, 3>& fv, int cell) {
  Point n = raw_facet_normal(m, fv);
  Point fc{0, 0, 0};
  for (int k = 0; k < m.dim; ++k) fc = fc + m.vertices[fv[k]];
  fc = (1.0 / m.dim) * fc;
  if (dot(n, fc - m.cell_centroid(cell)) < 0.0) n = -1.0 * n;
  return n;
}

}  // namespace

Point MeshLevel::facet_normal(int f) const { return outward_normal(*this, facets[f].vertices, facets[f].cells[0]); }

double MeshLevel::longest_edge(int c) const {
  double h = 0.0;
  for (int a = 0; a <= dim; ++a)
    for (int b = a + 1; b <= dim; ++b) h = std::max(h, norm(vertices[cells[c][a]] - vertices[cells[c][b]]));
  return h;
}

// ---------------------------------------------------------------------------
// Facet derivation

namespace {

using BoundaryTagger = std::function<BoundaryKind(const std::array<int, 3>& fv, int cell, const Point& normal)>;

void build_facets(MeshLevel& m, const BoundaryTagger& tagger) {
  struct FaceRec {
    std::array<int, 3> key;
    int cell;
    int local;
  };
  const int nv = m.verts_per_cell();
  std::vector<FaceRec> recs;
  recs.reserve(static_cast<size_t>(m.num_cells()) * nv);
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int k = 0; k < nv; ++k) {
      std::array<int, 3> key{-1, -1, -1};
      int j = 0;
      for (int a = 0; a < nv; ++a)
        if (a != k) key[j++] = m.cells[c][a];
      std::sort(key.begin(), key.begin() + m.dim);
      recs.push_back({key, c, k});
    }
  }
  std::sort(recs.begin(), recs.end(), [](const FaceRec& a, const FaceRec& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.cell < b.cell;
  });

  m.facets.clear();
  m.cell_facets.assign(m.num_cells(), {-1, -1, -1, -1});
  for (size_t i = 0; i < recs.size();) {
    size_t j = i + 1;
    while (j < recs.size() && recs[j].key == recs[i].key) ++j;
    if (j - i > 2) throw MeshError("non-conforming mesh: facet shared by more than two cells");

    Facet f;
    f.vertices = recs[i].key;
    const int id = static_cast<int>(m.facets.size());
    if (j - i == 2) {
      int c0 = recs[i].cell, c1 = recs[i + 1].cell;
      const int s0 = m.cell_subdomain[c0], s1 = m.cell_subdomain[c1];
      if (s0 != s1) {
        f.kind = FacetKind::Interface;
        if (s1 < s0) std::swap(c0, c1);
      }
      f.cells = {c0, c1};
      m.cell_facets[recs[i].cell][recs[i].local] = id;
      m.cell_facets[recs[i + 1].cell][recs[i + 1].local] = id;
    } else {
      f.kind = FacetKind::Boundary;
      f.cells = {recs[i].cell, -1};
      f.boundary = tagger(f.vertices, recs[i].cell, outward_normal(m, f.vertices, recs[i].cell));
      m.cell_facets[recs[i].cell][recs[i].local] = id;
    }
    m.facets.push_back(f);
    i = j;
  }
}

void tag_cells_and_check_resolution(MeshLevel& m, const DomainSpec& spec) {
  const int nsub = static_cast<int>(spec.viscosity.size());
  m.cell_subdomain.resize(m.num_cells());
  for (int c = 0; c < m.num_cells(); ++c) {
    const Point xc = m.cell_centroid(c);
    const int id = spec.subdomain(xc);
    if (id < 0 || id >= nsub) throw MeshError("subdomain predicate returned an id without viscosity");
    // A point just inside each corner sees the side of that corner; an
    // interface crossing the cell interior separates at least two corners.
    for (int k = 0; k <= m.dim; ++k) {
      const Point probe = xc + (1.0 - 1e-6) * (m.vertices[m.cells[c][k]] - xc);
      if (spec.subdomain(probe) != id)
        throw MeshError("interface not resolvable at requested resolution (cell " + std::to_string(c) + ")");
    }
    m.cell_subdomain[c] = id;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction

MeshLevel build_case_mesh(const DomainSpec& spec, int cells_per_unit) {
  spec.validate();
  if (cells_per_unit < 1) throw InvalidArgument("cells_per_unit must be positive");

  std::array<int, 3> n{1, 1, 1};
  for (int k = 0; k < spec.dim; ++k) {
    const double cells = (spec.hi[k] - spec.lo[k]) * cells_per_unit;
    n[k] = static_cast<int>(std::lround(cells));
    if (n[k] < 1 || std::abs(cells - n[k]) > 1e-9)
      throw MeshError("box extent is not a multiple of the requested cell size");
  }

  MeshLevel m;
  m.dim = spec.dim;
  const int nx = n[0] + 1, ny = n[1] + 1, nz = spec.dim == 3 ? n[2] + 1 : 1;
  auto vid = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        Point x{spec.lo[0] + (spec.hi[0] - spec.lo[0]) * i / n[0], spec.lo[1] + (spec.hi[1] - spec.lo[1]) * j / n[1],
                0.0};
        if (spec.dim == 3) x[2] = spec.lo[2] + (spec.hi[2] - spec.lo[2]) * k / n[2];
        m.vertices.push_back(x);
      }

  if (spec.dim == 2) {
    for (int j = 0; j < n[1]; ++j)
      for (int i = 0; i < n[0]; ++i) {
        const int v00 = vid(i, j, 0), v10 = vid(i + 1, j, 0), v01 = vid(i, j + 1, 0), v11 = vid(i + 1, j + 1, 0);
        m.cells.push_back({v00, v10, v11, -1});
        m.cells.push_back({v00, v11, v01, -1});
      }
  } else {
    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int k = 0; k < n[2]; ++k)
      for (int j = 0; j < n[1]; ++j)
        for (int i = 0; i < n[0]; ++i)
          for (const auto& p : perms) {
            std::array<int, 3> ijk{i, j, k};
            std::array<int, 4> tet{};
            tet[0] = vid(ijk[0], ijk[1], ijk[2]);
            for (int s = 0; s < 3; ++s) {
              ++ijk[p[s]];
              tet[s + 1] = vid(ijk[0], ijk[1], ijk[2]);
            }
            m.cells.push_back(tet);
          }
  }
  m.parent_cell.assign(m.num_cells(), -1);

  tag_cells_and_check_resolution(m, spec);

  build_facets(m, [&](const std::array<int, 3>& fv, int, const Point& normal) {
    Point fc{0, 0, 0};
    for (int k = 0; k < m.dim; ++k) fc = fc + m.vertices[fv[k]];
    fc = (1.0 / m.dim) * fc;
    const auto tag = spec.boundary(fc, normal);
    if (!tag) throw MeshError("boundary facet without a boundary tag");
    return *tag;
  });
  return m;
}

MeshLevel refine_uniform(const MeshLevel& coarse) {
  MeshLevel fine;
  fine.dim = coarse.dim;
  fine.vertices = coarse.vertices;
  fine.vertex_parents.reserve(coarse.vertices.size() * (coarse.dim == 3 ? 8 : 4));
  for (int v = 0; v < coarse.num_vertices(); ++v) fine.vertex_parents.push_back({v, v});

  std::unordered_map<long long, int> edge_mid;
  edge_mid.reserve(coarse.vertices.size() * 8);
  const long long nvc = coarse.num_vertices();
  auto mid = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    const long long key = a * nvc + b;
    auto it = edge_mid.find(key);
    if (it != edge_mid.end()) return it->second;
    const int id = static_cast<int>(fine.vertices.size());
    fine.vertices.push_back(midpoint(coarse.vertices[a], coarse.vertices[b]));
    fine.vertex_parents.push_back({a, b});
    edge_mid.emplace(key, id);
    return id;
  };

  const int children = coarse.dim == 3 ? 8 : 4;
  fine.cells.reserve(static_cast<size_t>(coarse.num_cells()) * children);
  for (int c = 0; c < coarse.num_cells(); ++c) {
    const auto& x = coarse.cells[c];
    if (coarse.dim == 2) {
      const int x01 = mid(x[0], x[1]), x02 = mid(x[0], x[2]), x12 = mid(x[1], x[2]);
      fine.cells.push_back({x[0], x01, x02, -1});
      fine.cells.push_back({x01, x[1], x12, -1});
      fine.cells.push_back({x02, x12, x[2], -1});
      fine.cells.push_back({x01, x12, x02, -1});
    } else {
      const int x01 = mid(x[0], x[1]), x02 = mid(x[0], x[2]), x03 = mid(x[0], x[3]);
      const int x12 = mid(x[1], x[2]), x13 = mid(x[1], x[3]), x23 = mid(x[2], x[3]);
      fine.cells.push_back({x[0], x01, x02, x03});
      fine.cells.push_back({x01, x[1], x12, x13});
      fine.cells.push_back({x02, x12, x[2], x23});
      fine.cells.push_back({x03, x13, x23, x[3]});
      fine.cells.push_back({x01, x02, x03, x13});
      fine.cells.push_back({x01, x02, x12, x13});
      fine.cells.push_back({x02, x03, x13, x23});
      fine.cells.push_back({x02, x12, x13, x23});
    }
    for (int k = 0; k < children; ++k) {
      fine.parent_cell.push_back(c);
      fine.cell_subdomain.push_back(coarse.cell_subdomain[c]);
    }
  }

  build_facets(fine, [&](const std::array<int, 3>&, int cell, const Point& normal) {
    const int parent = fine.parent_cell[cell];
    for (int k = 0; k <= coarse.dim; ++k) {
      const int pf = coarse.cell_facets[parent][k];
      const Facet& f = coarse.facets[pf];
      if (f.kind != FacetKind::Boundary) continue;
      if (dot(coarse.facet_normal(pf), normal) > 1.0 - 1e-10) return f.boundary;
    }
    throw MeshError("refined boundary facet has no parent boundary facet");
  });
  return fine;
}

EntityTags classify_entities(const MeshLevel& m, const DomainSpec& spec) {
  EntityTags t;
  const int nsub = static_cast<int>(spec.viscosity.size());
  t.interior_facets.resize(nsub);
  t.interface_vertex.assign(m.num_vertices(), 0);
  t.dirichlet_vertex.assign(m.num_vertices(), 0);

  auto mark = [&](std::vector<char>& set, const Facet& f) {
    for (int k = 0; k < m.dim; ++k) set[f.vertices[k]] = 1;
  };
  for (int i = 0; i < m.num_facets(); ++i) {
    const Facet& f = m.facets[i];
    switch (f.kind) {
      case FacetKind::Interior: {
        const int s = m.cell_subdomain[f.cells[0]];
        if (s < 0 || s >= nsub) throw MeshError("cell subdomain id out of range");
        t.interior_facets[s].push_back(i);
        break;
      }
      case FacetKind::Interface:
        t.interface_facets.push_back(i);
        mark(t.interface_vertex, f);
        break;
      case FacetKind::Boundary:
        switch (f.boundary) {
          case BoundaryKind::Dirichlet:
            t.dirichlet_facets.push_back(i);
            mark(t.dirichlet_vertex, f);
            break;
          case BoundaryKind::FreeSlip:
            t.freeslip_facets.push_back(i);
            mark(t.interface_vertex, f);
            break;
          case BoundaryKind::Traction:
            t.traction_facets.push_back(i);
            mark(t.interface_vertex, f);
            break;
        }
        break;
    }
  }
  return t;
}

MeshHierarchy build_hierarchy(const DomainSpec& spec, int cells_per_unit, int levels) {
  if (levels < 1) throw InvalidArgument("hierarchy needs at least one level");
  MeshHierarchy h;
  h.levels.reserve(levels);
  h.levels.push_back(build_case_mesh(spec, cells_per_unit));
  for (int l = 1; l < levels; ++l) h.levels.push_back(refine_uniform(h.levels.back()));
  return h;
}

double min_dihedral_angle(const MeshLevel& m) {
  double best = std::numbers::pi;
  for (int c = 0; c < m.num_cells(); ++c) {
    const auto& cv = m.cells[c];
    if (m.dim == 2) {
      for (int k = 0; k < 3; ++k) {
        const Point a = m.vertices[cv[(k + 1) % 3]] - m.vertices[cv[k]];
        const Point b = m.vertices[cv[(k + 2) % 3]] - m.vertices[cv[k]];
        best = std::min(best, std::acos(std::clamp(dot(a, b) / (norm(a) * norm(b)), -1.0, 1.0)));
      }
      continue;
    }
    // Face k is opposite vertex k; the edge shared by faces k and l joins the
    // two remaining vertices. Dihedral angle = pi - angle(outward normals).
    std::array<Point, 4> normals;
    const Point xc = m.cell_centroid(c);
    for (int k = 0; k < 4; ++k) {
      std::array<int, 3> fv{};
      int j = 0;
      for (int a = 0; a < 4; ++a)
        if (a != k) fv[j++] = cv[a];
      Point n = cross(m.vertices[fv[1]] - m.vertices[fv[0]], m.vertices[fv[2]] - m.vertices[fv[0]]);
      n = (1.0 / norm(n)) * n;
      if (dot(n, m.vertices[fv[0]] - xc) < 0.0) n = -1.0 * n;
      normals[k] = n;
    }
    for (int k = 0; k < 4; ++k)
      for (int l = k + 1; l < 4; ++l)
        best = std::min(best, std::numbers::pi - std::acos(std::clamp(dot(normals[k], normals[l]), -1.0, 1.0)));
  }
  return best;
}

void write_mesh_dump(std::ostream& os, const MeshLevel& m) {
  os << "# vstokes mesh dump v1: dim nvertices ncells nfacets\n";
  os << m.dim << ' ' << m.num_vertices() << ' ' << m.num_cells() << ' ' << m.num_facets() << '\n';
  os << "# vertices: x y z\n";
  os.precision(17);
  for (const auto& x : m.vertices) os << x[0] << ' ' << x[1] << ' ' << x[2] << '\n';
  os << "# cells: v0 .. v" << m.dim << " subdomain\n";
  for (int c = 0; c < m.num_cells(); ++c) {
    for (int k = 0; k <= m.dim; ++k) os << m.cells[c][k] << ' ';
    os << m.cell_subdomain[c] << '\n';
  }
  os << "# facets: vertices cell0 cell1 kind(interior|interface|boundary:<tag>)\n";
  for (const auto& f : m.facets) {
    for (int k = 0; k < m.dim; ++k) os << f.vertices[k] << ' ';
    os << f.cells[0] << ' ' << f.cells[1] << ' ';
    switch (f.kind) {
      case FacetKind::Interior: os << "interior"; break;
      case FacetKind::Interface: os << "interface"; break;
      case FacetKind::Boundary: os << "boundary:" << to_string(f.boundary); break;
    }
    os << '\n';
  }
}

}  // namespace vstokes
