#pragma once

#include <optional>

#include "voxmesh/neighbor_index.hpp"
#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

struct SmoothingParams {
    int k = 8;
    std::optional<double> h; // Gaussian bandwidth; computed when absent
    int threads = 0;
};

/// Gaussian weight exp(-d^2/h^2).
inline double gaussian_weight(double d, double h) {
    double r = d / h;
    return std::exp(-r * r);
}

/// Bandwidth heuristic: max over all points of the distance to their k-th
/// nearest neighbor (the anticipated spacing between neighboring points).
double compute_h(const PointCloud& cloud, int k);

/// One weighted-average smoothing pass over k-neighborhoods (the point's own
/// zero-distance term included). Point count and labels unchanged.
PointCloud mls_smooth(const PointCloud& cloud, const SmoothingParams& params);

/// Density uniformization: cubes of edge `scale` (default: mean
/// nearest-neighbor distance); each occupied cube keeps the one input point
/// nearest to the cube centroid.
PointCloud octree_uniform(const PointCloud& cloud, std::optional<double> scale = std::nullopt);

/// Points inserted per triangle edge for an interior budget of s.
/// Round-half-up of sqrt(2s + 1/2) - 1/sqrt(2).
int edge_insert_count(int s);

/// Delaunay-based up-sampling: triangulates the cloud, then inserts evenly
/// spaced edge points plus the interior nodes of the barycentric lattice,
/// scaling each triangle's budget by its area relative to the mean. Shared
/// edges are populated once.
PointCloud upsample_delaunay(const PointCloud& cloud, int s);

} // namespace voxmesh
