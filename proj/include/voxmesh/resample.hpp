#pragma once

#include <map>
#include <span>
#include <vector>

#include "voxmesh/point_cloud.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace voxmesh {

/// Per-point class ids: 0 = ordinary, 1 = external-edge in binary mode, or
/// 0..C-1 curvature classes (0 = flattest).
using FeatureLabels = std::vector<int>;

struct SamplingPlan {
    long target_total = 0;
    std::map<std::pair<BoxIndex, int>, int> quotas; // (box, class) -> count
    std::vector<double> class_rates;
};

/// Surface-variation edge detector: a point is external-edge when
/// lambda0 / (lambda0 + lambda1 + lambda2) of its k-neighborhood covariance
/// exceeds `threshold`. Substitute for an external detector; labels loaded
/// from file bypass it.
FeatureLabels classify_edge_points(const PointCloud& cloud, int k, double threshold);

/// Quantile split of surface variation into n_classes equal-population bins
/// (ties collapse into the lower class; class 0 = flattest).
FeatureLabels classify_by_curvature(const PointCloud& cloud, int k, int n_classes);

/// Raw surface variation per point (exposed for classification audits).
std::vector<double> surface_variation(const PointCloud& cloud, int k);

/// Proportional per-(box, class) quotas, rate-weighted and integerized by
/// largest remainder so the total equals `target` exactly. Per-cell caps at
/// the cell population; overflow redistributes to uncapped cells.
SamplingPlan plan_allocation(const VoxelGrid& grid, const FeatureLabels& labels, long target,
                             const std::vector<double>& class_rates);

/// Greedy farthest point sampling of `candidates` (global point ids into
/// `cloud`) against fixed seed positions. With no seeds the first pick is the
/// candidate farthest from the candidate centroid; ties break by index.
std::vector<int> fps_box(const PointCloud& cloud, std::span<const int> candidates,
                         std::span<const Vec3> seeds, int m);

struct ResampleOptions {
    int threads = 0;
};

/// Round-scheduled FPS over the grid: 8 parity rounds, boxes within a round
/// independent, each box seeded by samples already chosen in its 26-adjacent
/// boxes. `labels` must be the array the plan was built from. Output has
/// exactly plan.target_total points; the chosen points' labels carry over
/// (cloud labels when present, otherwise the classification).
PointCloud resample(const VoxelGrid& grid, const SamplingPlan& plan, const FeatureLabels& labels,
                    const ResampleOptions& options = {});

} // namespace voxmesh
