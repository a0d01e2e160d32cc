#include "flatplan/world.hpp"

#include <algorithm>
#include <cmath>

#include "flatplan/errors.hpp"

namespace flatplan::world {

namespace {

// Large finite stand-in for "no seed on this scan line". Small enough that
// value + coordinate squares stay exactly representable in a double.
constexpr double kFar = 1e12;

// 1D lower-envelope squared distance transform (Felzenszwalb/Huttenlocher).
// All parabola values are integers well below 2^53, so the arithmetic that
// decides the envelope is exact and the output matches integer brute force.
void transform_1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
                  std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * q - 2.0 * p);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = double(q) - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

VoxelGrid rasterize(const std::vector<Aabb>& obstacles, const Workspace& ws,
                    double resolution) {
  if (!ws.valid() || !(resolution > 0.0))
    raise(ErrorCode::kDegenerateWorkspace, "rasterize: empty workspace or non-positive resolution");
  VoxelGrid grid;
  grid.resolution = resolution;
  grid.lo = ws.lo;
  for (int i = 0; i < 3; ++i)
    grid.dims[i] = int(std::ceil((ws.hi[i] - ws.lo[i]) / resolution - 1e-12));
  grid.occupancy.assign(grid.voxel_count(), 0);

  for (const auto& box : obstacles) {
    // index range of voxels whose centers lie inside the closed box
    int lo_idx[3], hi_idx[3];
    bool empty = false;
    for (int i = 0; i < 3; ++i) {
      const double a = (box.origin[i] - ws.lo[i]) / resolution - 0.5;
      const double b = (box.origin[i] + box.size[i] - ws.lo[i]) / resolution - 0.5;
      lo_idx[i] = std::max(0, int(std::ceil(a - 1e-12)));
      hi_idx[i] = std::min(grid.dims[i] - 1, int(std::floor(b + 1e-12)));
      if (lo_idx[i] > hi_idx[i]) empty = true;
    }
    if (empty) continue;
    for (int k = lo_idx[2]; k <= hi_idx[2]; ++k)
      for (int j = lo_idx[1]; j <= hi_idx[1]; ++j)
        for (int i = lo_idx[0]; i <= hi_idx[0]; ++i) grid.occupancy[grid.index(i, j, k)] = 1;
  }
  return grid;
}

DistanceField edt(const VoxelGrid& grid) {
  DistanceField field;
  field.resolution = grid.resolution;
  field.lo = grid.lo;
  field.dims = grid.dims;
  const int nx = grid.dims[0], ny = grid.dims[1], nz = grid.dims[2];
  const std::size_t total = grid.voxel_count();
  std::vector<double> work(total);
  for (std::size_t i = 0; i < total; ++i) work[i] = grid.occupancy[i] ? 0.0 : kFar;

  const int nmax = std::max({nx, ny, nz});
  std::vector<double> f(nmax), d(nmax), z(nmax + 1);
  std::vector<int> v(nmax);

  // pass along x
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) f[i] = work[grid.index(i, j, k)];
      transform_1d(f, d, v, z, nx);
      for (int i = 0; i < nx; ++i) work[grid.index(i, j, k)] = d[i];
    }
  // pass along y
  for (int k = 0; k < nz; ++k)
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) f[j] = work[grid.index(i, j, k)];
      transform_1d(f, d, v, z, ny);
      for (int j = 0; j < ny; ++j) work[grid.index(i, j, k)] = d[j];
    }
  // pass along z
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < nz; ++k) f[k] = work[grid.index(i, j, k)];
      transform_1d(f, d, v, z, nz);
      for (int k = 0; k < nz; ++k) work[grid.index(i, j, k)] = d[k];
    }

  field.squared.assign(total, DistanceField::kNoObstacle);
  for (std::size_t i = 0; i < total; ++i)
    if (work[i] < kFar) field.squared[i] = std::llround(work[i]);
  return field;
}

double clearance(const DistanceField& field, const Vec3& point) {
  const Vec3 rel = (point - field.lo) / field.resolution;
  int idx[3];
  for (int i = 0; i < 3; ++i) {
    idx[i] = int(std::floor(rel[i]));
    if (rel[i] < 0.0 || idx[i] >= field.dims[i]) {
      if (rel[i] == double(field.dims[i]))  // closed upper face
        idx[i] = field.dims[i] - 1;
      else
        raise(ErrorCode::kOutOfWorkspace, "clearance: point outside the workspace grid");
    }
  }
  const double d = field.distance_m(field.index(idx[0], idx[1], idx[2]));
  const double correction = 0.5 * field.resolution * std::sqrt(3.0);
  return std::max(0.0, d - correction);
}

bool edge_collision_free(const DistanceField& field,
                         const std::vector<lqmt::EdgeSample>& samples,
                         double payload_radius, double margin) {
  const double inflate = payload_radius + margin;
  auto free_clearance = [&](const Vec3& p, double& out) {
    try {
      out = clearance(field, p) - inflate;
    } catch (const PlanningError&) {
      return false;  // outside the workspace counts as collision
    }
    return out >= 0.0;
  };

  // segment safe if the endpoint clearance balls cover it; bisect otherwise
  struct Seg {
    static bool check(const DistanceField& field, const Vec3& a, const Vec3& b, double ca,
                      double cb, double inflate, int depth) {
      const double len = (b - a).norm();
      if (ca + cb >= len) return true;
      if (len < field.resolution || depth <= 0) return true;  // sound up to voxel resolution
      const Vec3 mid = 0.5 * (a + b);
      double cm;
      try {
        cm = clearance(field, mid) - inflate;
      } catch (const PlanningError&) {
        return false;
      }
      if (cm < 0.0) return false;
      return check(field, a, mid, ca, cm, inflate, depth - 1) &&
             check(field, mid, b, cm, cb, inflate, depth - 1);
    }
  };

  std::vector<double> clear(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!free_clearance(samples[i].state.position(), clear[i])) return false;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const Vec3 a = samples[i].state.position();
    const Vec3 b = samples[i + 1].state.position();
    if (!Seg::check(field, a, b, clear[i], clear[i + 1], payload_radius + margin, 32))
      return false;
  }
  return true;
}

}  // namespace flatplan::world
