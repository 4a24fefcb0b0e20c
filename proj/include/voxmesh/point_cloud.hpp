#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <optional>
#include <vector>

#include "voxmesh/error.hpp"

namespace voxmesh {

using Vec3 = Eigen::Vector3d;

struct AABB {
    Vec3 min{0, 0, 0};
    Vec3 max{0, 0, 0};

    Vec3 extent() const { return max - min; }
    double diagonal() const { return (max - min).norm(); }
    /// Longest border of the box.
    double longest_edge() const { return extent().maxCoeff(); }
};

/// A point set with optional per-point class labels (0 = ordinary).
/// Positions are immutable by convention once handed to an index or grid.
class PointCloud {
public:
    std::vector<Vec3> points;
    std::optional<std::vector<int>> labels;

    PointCloud() = default;
    explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) { validate(); }
    PointCloud(std::vector<Vec3> pts, std::vector<int> lbls)
        : points(std::move(pts)), labels(std::move(lbls)) {
        validate();
    }

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }

    int label(std::size_t i) const { return labels ? (*labels)[i] : 0; }

    /// Bounding-box diagonal, cached on first use.
    double source_diag() const;

    /// Checks finiteness and label-length invariants; throws InvalidParam.
    void validate() const;

private:
    mutable double cached_diag_ = -1.0;
};

AABB bounding_box(const PointCloud& cloud);

} // namespace voxmesh
