#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

struct BoxIndex {
    int i = 0, j = 0, k = 0;
    auto operator<=>(const BoxIndex&) const = default;
};

/// True iff the boxes touch (26-neighborhood, including a == b).
inline bool adjacent(const BoxIndex& a, const BoxIndex& b) {
    return std::abs(a.i - b.i) <= 1 && std::abs(a.j - b.j) <= 1 && std::abs(a.k - b.k) <= 1;
}

/// Parity color 0..7; same-color boxes are never adjacent.
inline int round_color(const BoxIndex& b) {
    auto mod2 = [](int v) { return ((v % 2) + 2) % 2; };
    return mod2(b.i) + 2 * mod2(b.j) + 4 * mod2(b.k);
}

/// Default cube scale: 2 * longest bounding-box border / cbrt(|P|).
double default_scale(const PointCloud& cloud);

/// Cubic partition of a point cloud. Each point belongs to exactly one box;
/// only occupied boxes are stored. Immutable after construction.
class VoxelGrid {
public:
    VoxelGrid(const PointCloud& cloud, double v_scale);
    /// Same partition geometry as `align_to` (origin and extents), over a
    /// different cloud — used when a subset cloud must keep box identities.
    VoxelGrid(const PointCloud& cloud, const VoxelGrid& align_to);

    double v_scale() const { return v_scale_; }
    const Vec3& origin() const { return origin_; }
    const PointCloud& cloud() const { return *cloud_; }

    BoxIndex box_of_point(int point_index) const { return point_box_[point_index]; }
    BoxIndex box_of_position(const Vec3& p) const;

    /// Member point indices of a box; empty when unoccupied.
    const std::vector<int>& members(const BoxIndex& b) const;

    /// Occupied boxes in lexicographic (i,j,k) order.
    const std::map<BoxIndex, std::vector<int>>& boxes() const { return boxes_; }
    std::size_t occupied_count() const { return boxes_.size(); }

    /// Point indices in boxes 26-adjacent to b (b itself excluded or included).
    std::vector<int> adjacent_members(const BoxIndex& b, bool include_center) const;

    /// Shortest path between two cloud points through the graph whose edges
    /// connect points in identical-or-adjacent boxes, weighted by Euclidean
    /// length. nullopt when no box-adjacent chain exists.
    std::optional<double> intrinsic_distance(int a, int b) const;

private:
    const PointCloud* cloud_;
    Vec3 origin_;
    double v_scale_;
    BoxIndex max_index_;
    std::map<BoxIndex, std::vector<int>> boxes_;
    std::vector<BoxIndex> point_box_;
};

} // namespace voxmesh
