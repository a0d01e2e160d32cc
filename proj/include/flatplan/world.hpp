#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "flatplan/flat_state.hpp"
#include "flatplan/lqmt.hpp"

namespace flatplan::world {

struct Aabb {
  Vec3 origin = Vec3::Zero();  // minimum corner
  Vec3 size = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= origin.array()).all() &&
           (p.array() <= (origin + size).array()).all();
  }
};

struct Workspace {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3(3.0, 1.2, 1.0);

  bool valid() const { return (hi.array() > lo.array()).all(); }
  double diagonal() const { return (hi - lo).norm(); }
};

struct VoxelGrid {
  double resolution = 0.01;
  Vec3 lo = Vec3::Zero();
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<std::uint8_t> occupancy;  // 1 iff voxel center inside an obstacle

  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) +
           std::size_t(dims[0]) * (std::size_t(j) + std::size_t(dims[1]) * std::size_t(k));
  }
  Vec3 center(int i, int j, int k) const {
    return lo + resolution * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  std::size_t voxel_count() const {
    return std::size_t(dims[0]) * dims[1] * dims[2];
  }
};

/// Exact Euclidean distances between voxel centers, stored as squared
/// integer distances in voxel units. kNoObstacle marks a grid with no
/// occupied voxel at all.
struct DistanceField {
  static constexpr std::int64_t kNoObstacle = std::numeric_limits<std::int64_t>::max();

  double resolution = 0.01;
  Vec3 lo = Vec3::Zero();
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  std::vector<std::int64_t> squared;  // voxel units

  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) +
           std::size_t(dims[0]) * (std::size_t(j) + std::size_t(dims[1]) * std::size_t(k));
  }
  double distance_m(std::size_t idx) const {
    const std::int64_t sq = squared[idx];
    if (sq == kNoObstacle) return std::numeric_limits<double>::infinity();
    return std::sqrt(double(sq)) * resolution;
  }
  Vec3 extent_hi() const { return lo + resolution * dims.cast<double>(); }
};

/// Voxel occupied iff its center lies inside the closed union of obstacles.
VoxelGrid rasterize(const std::vector<Aabb>& obstacles, const Workspace& ws,
                    double resolution);

/// Exact squared-distance transform, one separable pass per dimension.
DistanceField edt(const VoxelGrid& grid);

/// Conservative clearance at an arbitrary point: distance at the containing
/// voxel center minus half the voxel diagonal, clamped at zero.
double clearance(const DistanceField& field, const Vec3& point);

/// Sound collision check of a sampled edge: every sample needs clearance
/// beyond radius + margin and gaps between samples are bisected until the
/// ball argument covers them (down to voxel resolution).
bool edge_collision_free(const DistanceField& field,
                         const std::vector<lqmt::EdgeSample>& samples,
                         double payload_radius, double margin);

}  // namespace flatplan::world
