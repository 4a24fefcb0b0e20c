#include "voxmesh/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace voxmesh {

double default_scale(const PointCloud& cloud) {
    if (cloud.empty()) raise(ErrorCode::EmptyInput, "default_scale of empty cloud");
    AABB box = bounding_box(cloud);
    double longest = box.longest_edge();
    if (!(longest > 0.0)) {
        raise(ErrorCode::DegenerateInput, "bounding box has zero longest border");
    }
    return 2.0 * longest / std::cbrt(static_cast<double>(cloud.size()));
}

VoxelGrid::VoxelGrid(const PointCloud& cloud, double v_scale)
    : cloud_(&cloud), v_scale_(v_scale) {
    if (!(v_scale > 0.0) || !std::isfinite(v_scale)) {
        raise(ErrorCode::InvalidParam, "v_scale must be positive");
    }
    if (cloud.empty()) raise(ErrorCode::EmptyInput, "VoxelGrid over empty cloud");

    AABB box = bounding_box(cloud);
    origin_ = box.min;
    Vec3 extent = box.extent();
    // the max face belongs to the last cell; the clamp in box_of_position
    // guards against floating-point overshoot there
    max_index_ = BoxIndex{static_cast<int>(std::floor(extent.x() / v_scale_)),
                          static_cast<int>(std::floor(extent.y() / v_scale_)),
                          static_cast<int>(std::floor(extent.z() / v_scale_))};

    point_box_.resize(cloud.size());
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        point_box_[i] = box_of_position(cloud.points[i]);
        boxes_[point_box_[i]].push_back(i);
    }
}

VoxelGrid::VoxelGrid(const PointCloud& cloud, const VoxelGrid& align_to)
    : cloud_(&cloud),
      origin_(align_to.origin_),
      v_scale_(align_to.v_scale_),
      max_index_(align_to.max_index_) {
    if (cloud.empty()) raise(ErrorCode::EmptyInput, "VoxelGrid over empty cloud");
    point_box_.resize(cloud.size());
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        point_box_[i] = box_of_position(cloud.points[i]);
        boxes_[point_box_[i]].push_back(i);
    }
}

BoxIndex VoxelGrid::box_of_position(const Vec3& p) const {
    Vec3 rel = (p - origin_) / v_scale_;
    // points on the grid's max face fall back into the last cell
    return BoxIndex{
        std::clamp(static_cast<int>(std::floor(rel.x())), 0, max_index_.i),
        std::clamp(static_cast<int>(std::floor(rel.y())), 0, max_index_.j),
        std::clamp(static_cast<int>(std::floor(rel.z())), 0, max_index_.k)};
}

const std::vector<int>& VoxelGrid::members(const BoxIndex& b) const {
    static const std::vector<int> empty;
    auto it = boxes_.find(b);
    return it == boxes_.end() ? empty : it->second;
}

std::vector<int> VoxelGrid::adjacent_members(const BoxIndex& b, bool include_center) const {
    std::vector<int> out;
    for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
            for (int dk = -1; dk <= 1; ++dk) {
                if (!include_center && di == 0 && dj == 0 && dk == 0) continue;
                auto it = boxes_.find(BoxIndex{b.i + di, b.j + dj, b.k + dk});
                if (it == boxes_.end()) continue;
                out.insert(out.end(), it->second.begin(), it->second.end());
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<double> VoxelGrid::intrinsic_distance(int a, int b) const {
    const auto& pts = cloud_->points;
    if (a == b) return 0.0;

    // Dijkstra over the implicit point graph; neighbor set of p = all points
    // sharing or adjacent to p's box.
    std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[a] = 0.0;
    queue.emplace(0.0, a);

    while (!queue.empty()) {
        auto [d, u] = queue.top();
        queue.pop();
        if (d > dist[u]) continue;
        if (u == b) return d;
        for (int v : adjacent_members(point_box_[u], true)) {
            if (v == u) continue;
            double nd = d + (pts[v] - pts[u]).norm();
            if (nd < dist[v]) {
                dist[v] = nd;
                queue.emplace(nd, v);
            }
        }
    }
    return std::nullopt;
}

} // namespace voxmesh
