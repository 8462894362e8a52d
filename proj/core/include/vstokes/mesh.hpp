#pragma once

// Interface-resolving simplicial meshes for box geometries and their
// nested uniform refinement (red refinement in 2D, Bey refinement in 3D).

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vstokes/geometry.hpp"

namespace vstokes {

enum class BoundaryKind { Dirichlet, FreeSlip, Traction };

std::string to_string(BoundaryKind kind);

/// Geometry, viscosity partition, boundary tagging and data of a problem.
///
/// The box [lo, hi] is meshed; `subdomain` maps a point to the id i of the
/// isoviscous region Omega_i. `boundary` receives the centroid and outward
/// unit normal of a boundary facet and must return its tag.
struct DomainSpec {
  int dim = 3;
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};
  std::vector<double> viscosity;
  std::function<int(const Point&)> subdomain;
  std::function<std::optional<BoundaryKind>(const Point& centroid, const Point& normal)> boundary;
  std::function<Point(const Point& x, int subdomain)> forcing;
  std::function<Point(const Point& x)> dirichlet;

  /// Throws InvalidArgument on non-positive viscosity or missing callbacks.
  void validate() const;
  double volume() const;
};

enum class FacetKind { Interior, Interface, Boundary };

/// Codimension-one entity. `cells[0]` owns the orientation: the unit
/// normal points out of cells[0]. On an interface facet cells[0] is the
/// cell with the lower subdomain id; on the boundary cells[1] == -1.
struct Facet {
  std::array<int, 3> vertices{-1, -1, -1};
  std::array<int, 2> cells{-1, -1};
  FacetKind kind = FacetKind::Interior;
  BoundaryKind boundary = BoundaryKind::Dirichlet;  // meaningful for Boundary facets only
};

struct MeshLevel {
  int dim = 3;
  std::vector<Point> vertices;
  /// dim + 1 vertex indices per cell; unused slots are -1. Cells keep the
  /// vertex order produced by refinement (Bey ordering in 3D), so the
  /// orientation sign is not normalized; geometry uses |det|.
  std::vector<std::array<int, 4>> cells;
  std::vector<int> cell_subdomain;
  std::vector<Facet> facets;
  /// cell_facets[c][k] is the facet opposite local vertex k.
  std::vector<std::array<int, 4>> cell_facets;
  /// Coarser-level parent of each cell (-1 on the coarsest level).
  std::vector<int> parent_cell;
  /// For each vertex, the two coarse vertices whose midpoint it is; old
  /// vertices carry {v, v}. Empty on the coarsest level.
  std::vector<std::array<int, 2>> vertex_parents;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }
  int num_facets() const { return static_cast<int>(facets.size()); }
  int verts_per_cell() const { return dim + 1; }

  double cell_volume(int c) const;
  Point cell_centroid(int c) const;
  double facet_area(int f) const;
  Point facet_centroid(int f) const;
  /// Unit normal pointing out of facets[f].cells[0].
  Point facet_normal(int f) const;
  double longest_edge(int c) const;
};

/// Facet and vertex sets used for DoF classification.
struct EntityTags {
  std::vector<int> interface_facets;  ///< Gamma_12
  std::vector<int> dirichlet_facets;  ///< Gamma_D
  std::vector<int> freeslip_facets;   ///< Gamma_F, free-slip
  std::vector<int> traction_facets;   ///< Gamma_F, traction-free
  std::vector<std::vector<int>> interior_facets;  ///< per subdomain
  /// Vertices on the closure of Gamma_12 and Gamma_F (free-slip or traction).
  std::vector<char> interface_vertex;
  /// Vertices on the closure of Gamma_D.
  std::vector<char> dirichlet_vertex;

  std::vector<int> gamma_f_facets() const;
};

struct MeshHierarchy {
  std::vector<MeshLevel> levels;  ///< level 0 is the coarsest

  int num_levels() const { return static_cast<int>(levels.size()); }
  const MeshLevel& finest() const { return levels.back(); }
};

/// Structured box mesh with `cells_per_unit` cells per unit length along
/// each axis. 2D rectangles split into two triangles, 3D cubes into six
/// Kuhn tetrahedra sharing the main diagonal. Throws MeshError when a cell
/// straddles two subdomains.
MeshLevel build_case_mesh(const DomainSpec& spec, int cells_per_unit);

/// Uniform refinement: 4 children per triangle, 8 per tetrahedron (Bey's
/// rule, octahedron split along the x02-x13 diagonal). Children inherit
/// the subdomain id; boundary tags are inherited from the parent facet.
MeshLevel refine_uniform(const MeshLevel& mesh);

EntityTags classify_entities(const MeshLevel& mesh, const DomainSpec& spec);

MeshHierarchy build_hierarchy(const DomainSpec& spec, int cells_per_unit, int levels);

/// Smallest dihedral angle (radians) over all cells; in 2D the smallest
/// interior angle.
double min_dihedral_angle(const MeshLevel& mesh);

/// Plain-text dump: header line, then vertices, cells and facets.
void write_mesh_dump(std::ostream& os, const MeshLevel& mesh);

}  // namespace vstokes
