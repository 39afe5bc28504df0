#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "cloudgrade/point_cloud.hpp"

namespace cloudgrade {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  std::size_t triangle_count() const { return triangles.size(); }
  void append(const TriangleMesh& other);
  Aabb bounds() const;
  double area() const;
  void translate(const Vec3& t);
  /// Per-axis scale about the origin.
  void scale(const Vec3& s);
  /// Drops triangles with area below min_area; throws Error on out-of-range
  /// vertex indices.
  void cleanup(double min_area = 1e-10);
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c);

/// Minimal OBJ interchange: `v` and (fan-triangulated) `f` records.
void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path);
TriangleMesh load_obj(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Structured building geometry: planar rectangular panels with rectangular
// cutouts. Damage operators edit panels; meshes are derived per epoch.

struct Rect2 {
  double u0 = 0, v0 = 0, u1 = 0, v1 = 0;

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
  double area() const { return width() * height(); }
  bool valid() const { return u1 > u0 && v1 > v0; }
  bool contains(const Rect2& o) const {
    return o.u0 >= u0 && o.u1 <= u1 && o.v0 >= v0 && o.v1 <= v1;
  }
  Rect2 intersect(const Rect2& o) const {
    return {std::max(u0, o.u0), std::max(v0, o.v0), std::min(u1, o.u1), std::min(v1, o.v1)};
  }
  bool overlaps(const Rect2& o) const { return intersect(o).valid(); }
};

enum class PanelRole { Roof, Facade, Floor, Trim, Debris, Rubble };

/// Planar rectangle spanned by two orthonormal axes, optionally with
/// non-overlapping rectangular holes in (u, v) coordinates.
struct Panel {
  Vec3 origin = Vec3::Zero();
  Vec3 u_dir = Vec3::UnitX();
  Vec3 v_dir = Vec3::UnitY();
  double width = 0.0;
  double height = 0.0;
  PanelRole role = PanelRole::Facade;
  bool cuttable = true;
  std::vector<Rect2> holes;

  Vec3 at(double u, double v) const { return origin + u * u_dir + v * v_dir; }
  Vec3 normal() const { return u_dir.cross(v_dir); }
  Rect2 frame() const { return {0, 0, width, height}; }
  double area_without_holes() const;
};

struct BuildingModel {
  std::vector<Panel> panels;
  std::vector<std::array<Vec3, 3>> extra_triangles;  // gable ends, rubble; never cut

  double height() const;
  Aabb bounds() const;
  /// Footprint (xy bounds at any z).
  Rect2 footprint() const;
  /// Surface area of roof+facade panels (the damageable envelope).
  double envelope_area() const;
};

TriangleMesh to_mesh(const BuildingModel& model);
BuildingModel scale_model(const BuildingModel& model, const Vec3& s);
BuildingModel translate_model(const BuildingModel& model, const Vec3& t);

/// The 28 procedural base building models (boxes with flat or gabled roofs,
/// L-shapes, towers, halls) used to assemble virtual scenes.
std::vector<BuildingModel> make_base_models();

/// Recovers a panel-based model from a triangle mesh whose planar faces are
/// full rectangles (true for all meshes produced by to_mesh). Planar patches
/// that are not rectangles are carried as extra_triangles. Roles are assigned
/// from face normals: |n_z| >= 0.7 up high -> Roof, |n_z| <= 0.3 -> Facade,
/// downward or near the base -> Floor, otherwise Trim.
BuildingModel model_from_mesh(const TriangleMesh& mesh);

}  // namespace cloudgrade
