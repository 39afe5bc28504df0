#include "cloudgrade/features.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

#include "cloudgrade/parallel.hpp"

namespace cloudgrade {

namespace {

const std::array<std::pair<FeatureId, const char*>, 21> kFeatureNames = {{
    {FeatureId::Linearity, "linearity"},
    {FeatureId::Planarity, "planarity"},
    {FeatureId::Sphericity, "sphericity"},
    {FeatureId::Omnivariance, "omnivariance"},
    {FeatureId::Anisotropy, "anisotropy"},
    {FeatureId::Eigenentropy, "eigenentropy"},
    {FeatureId::SurfaceVariation, "surfacevariation"},
    {FeatureId::Curvature, "curvature"},
    {FeatureId::Verticality, "verticality"},
    {FeatureId::Roughness, "roughness"},
    {FeatureId::NumNeighbors, "numneighbors"},
    {FeatureId::PointDensity2D, "pointdensity2d"},
    {FeatureId::SurfaceDensity, "surfacedensity"},
    {FeatureId::VolumeDensity, "volumedensity"},
    {FeatureId::ZRank, "zrank"},
    {FeatureId::ZRange, "zrange"},
    {FeatureId::Lambda1, "lambda1"},
    {FeatureId::Lambda2, "lambda2"},
    {FeatureId::Lambda3, "lambda3"},
    {FeatureId::SumLambda, "sumlambda"},
    {FeatureId::NormalVector, "normalvector"},
}};

bool needs_eigen(FeatureId id) {
  switch (id) {
    case FeatureId::NumNeighbors:
    case FeatureId::PointDensity2D:
    case FeatureId::SurfaceDensity:
    case FeatureId::VolumeDensity:
    case FeatureId::ZRank:
    case FeatureId::ZRange:
      return false;
    default:
      return true;
  }
}

}  // namespace

std::string feature_name(FeatureId id) {
  for (const auto& [fid, name] : kFeatureNames)
    if (fid == id) return name;
  throw UnknownFeature("invalid feature id");
}

FeatureId feature_from_name(const std::string& name) {
  for (const auto& [fid, fname] : kFeatureNames)
    if (name == fname) return fid;
  throw UnknownFeature("unknown feature name: '" + name + "'");
}

const std::vector<FeatureId>& all_features() {
  static const std::vector<FeatureId> ids = [] {
    std::vector<FeatureId> v;
    for (const auto& [fid, name] : kFeatureNames) v.push_back(fid);
    return v;
  }();
  return ids;
}

const std::vector<FeatureId>& default_robust_features() {
  static const std::vector<FeatureId> ids = {
      FeatureId::Planarity,    FeatureId::SurfaceVariation, FeatureId::Roughness,
      FeatureId::NumNeighbors, FeatureId::PointDensity2D,   FeatureId::SurfaceDensity,
      FeatureId::VolumeDensity, FeatureId::ZRank,           FeatureId::ZRange,
      FeatureId::NormalVector,
  };
  return ids;
}

std::size_t FeatureTable::rows() const {
  if (!columns.empty()) return columns.begin()->second.size();
  return normals.size();
}

const std::vector<double>& FeatureTable::column(FeatureId id) const {
  auto it = columns.find(id);
  if (it == columns.end())
    throw UnknownFeature("feature table has no column '" + feature_name(id) + "'");
  return it->second;
}

namespace {

struct NeighborhoodEigen {
  EigenStructure eig;
  Vec3 centroid;
  Eigen::Matrix3d axes;  // columns: e1 (l1), e2 (l2), normal
};

std::optional<NeighborhoodEigen> eigen_of(const std::vector<Vec3>& pts,
                                          const std::vector<int>& nbrs) {
  if (nbrs.size() < 3) return std::nullopt;
  Vec3 mean = Vec3::Zero();
  for (int j : nbrs) mean += pts[j];
  mean /= static_cast<double>(nbrs.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (int j : nbrs) {
    const Vec3 d = pts[j] - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(nbrs.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  NeighborhoodEigen out;
  // Eigen sorts ascending; we report descending.
  out.eig.l1 = std::max(0.0, es.eigenvalues()(2));
  out.eig.l2 = std::max(0.0, es.eigenvalues()(1));
  out.eig.l3 = std::max(0.0, es.eigenvalues()(0));
  Vec3 normal = es.eigenvectors().col(0);
  if (normal.z() < 0 || (normal.z() == 0 && (normal.x() < 0 || (normal.x() == 0 && normal.y() < 0))))
    normal = -normal;
  out.eig.normal = normal;
  out.centroid = mean;
  out.axes.col(0) = es.eigenvectors().col(2);
  out.axes.col(1) = es.eigenvectors().col(1);
  out.axes.col(2) = normal;
  return out;
}

/// Mean curvature |a + c| of the least-squares quadric w = a u^2 + b uv + c v^2
/// fitted around point p in the local eigen frame.
double quadric_curvature(const std::vector<Vec3>& pts, const std::vector<int>& nbrs,
                         const Vec3& p, const Eigen::Matrix3d& axes) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Vec3 atb = Vec3::Zero();
  for (int j : nbrs) {
    const Vec3 local = axes.transpose() * (pts[j] - p);
    const double u = local.x(), v = local.y(), w = local.z();
    const Vec3 row(u * u, u * v, v * v);
    ata.noalias() += row * row.transpose();
    atb += row * w;
  }
  // Least-norm solve tolerates rank-deficient (planar/linear) neighborhoods.
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(ata, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-10);
  const Vec3 coeff = svd.solve(atb);
  return std::abs(coeff.x() + coeff.z());
}

}  // namespace

std::optional<EigenStructure> local_eigenstructure(const SpatialIndex& index,
                                                   const PointCloud& cloud, int p, double r) {
  std::vector<int> nbrs;
  index.for_each_in_radius(cloud.points[p], r, QueryMode::Ball3D,
                           [&nbrs](int j, double) { nbrs.push_back(j); });
  auto ne = eigen_of(cloud.points, nbrs);
  if (!ne) return std::nullopt;
  return ne->eig;
}

FeatureTable compute_features(const PointCloud& cloud, const SpatialIndex& index, double r,
                              const std::vector<FeatureId>& ids, int jobs) {
  if (!(r > 0.0)) throw InvalidRadius("feature radius must be > 0");
  if (index.size() != cloud.size())
    throw FeatureMismatch("index size does not match cloud size");

  FeatureTable table;
  table.radius = r;
  for (FeatureId id : all_features())
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) table.ids.push_back(id);

  const std::size_t n = cloud.size();
  bool want_normals = false;
  bool want_eigen = false;
  bool want_disc = false;
  for (FeatureId id : table.ids) {
    if (id == FeatureId::NormalVector) want_normals = true;
    else table.columns[id].assign(n, kMissingValue);
    if (needs_eigen(id)) want_eigen = true;
    if (id == FeatureId::PointDensity2D) want_disc = true;
  }
  if (want_normals) table.normals.assign(n, Vec3::Constant(kMissingValue));

  const double ball_area = M_PI * r * r;
  const double ball_volume = 4.0 / 3.0 * M_PI * r * r * r;

  // Column pointers indexed by feature id; null when not requested.
  std::array<double*, 21> col{};
  for (auto& [id, values] : table.columns) col[static_cast<int>(id)] = values.data();
  auto set = [&col](FeatureId id, std::size_t i, double v) {
    if (double* c = col[static_cast<int>(id)]) c[i] = v;
  };

  parallel_for(n, jobs, [&](std::size_t i) {
    std::vector<int> nbrs;
    double z_min = std::numeric_limits<double>::infinity();
    double z_max = -std::numeric_limits<double>::infinity();
    index.for_each_in_radius(cloud.points[i], r, QueryMode::Ball3D, [&](int j, double) {
      nbrs.push_back(j);
      z_min = std::min(z_min, cloud.points[j].z());
      z_max = std::max(z_max, cloud.points[j].z());
    });

    // Counts exclude the point itself (it always matches its own query).
    int others = 0;
    for (int j : nbrs)
      if (j != static_cast<int>(i)) ++others;

    set(FeatureId::NumNeighbors, i, static_cast<double>(others));
    set(FeatureId::SurfaceDensity, i, others / ball_area);
    set(FeatureId::VolumeDensity, i, others / ball_volume);
    if (want_disc) {
      int disc = 0;
      index.for_each_in_radius(cloud.points[i], r, QueryMode::Disc2D, [&](int j, double) {
        if (j != static_cast<int>(i)) ++disc;
      });
      set(FeatureId::PointDensity2D, i, disc / ball_area);
    }
    const double zr = z_max - z_min;
    set(FeatureId::ZRange, i, zr);
    set(FeatureId::ZRank, i, zr > 0 ? (cloud.points[i].z() - z_min) / zr : 0.5);

    if (!want_eigen) return;
    auto ne = eigen_of(cloud.points, nbrs);
    if (!ne) return;  // missing sentinel stays in place

    const double l1 = ne->eig.l1, l2 = ne->eig.l2, l3 = ne->eig.l3;
    const double sum = l1 + l2 + l3;
    set(FeatureId::Lambda1, i, l1);
    set(FeatureId::Lambda2, i, l2);
    set(FeatureId::Lambda3, i, l3);
    set(FeatureId::SumLambda, i, sum);
    set(FeatureId::Omnivariance, i, std::cbrt(l1 * l2 * l3));
    if (l1 > 0) {
      set(FeatureId::Linearity, i, (l1 - l2) / l1);
      set(FeatureId::Planarity, i, (l2 - l3) / l1);
      set(FeatureId::Sphericity, i, l3 / l1);
      set(FeatureId::Anisotropy, i, (l1 - l3) / l1);
    }
    if (sum > 0) {
      set(FeatureId::SurfaceVariation, i, l3 / sum);
      double entropy = 0.0;
      for (double l : {l1, l2, l3}) {
        const double e = l / sum;
        if (e > 0) entropy -= e * std::log(e);
      }
      set(FeatureId::Eigenentropy, i, entropy);
    }
    set(FeatureId::Verticality, i, 1.0 - std::abs(ne->eig.normal.z()));
    set(FeatureId::Roughness, i, std::abs(ne->eig.normal.dot(cloud.points[i] - ne->centroid)));
    if (col[static_cast<int>(FeatureId::Curvature)])
      set(FeatureId::Curvature, i, quadric_curvature(cloud.points, nbrs, cloud.points[i], ne->axes));
    if (want_normals) table.normals[i] = ne->eig.normal;
  });

  return table;
}

}  // namespace cloudgrade
