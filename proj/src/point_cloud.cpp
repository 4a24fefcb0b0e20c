#include "voxmesh/point_cloud.hpp"

#include <cmath>

namespace voxmesh {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::InsufficientPoints: return "InsufficientPoints";
        case ErrorCode::InvalidParam: return "InvalidParam";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::TargetExceedsInput: return "TargetExceedsInput";
        case ErrorCode::QuotaExceedsPopulation: return "QuotaExceedsPopulation";
        case ErrorCode::NonManifoldEdge: return "NonManifoldEdge";
        case ErrorCode::OrientationError: return "OrientationError";
        case ErrorCode::NonManifoldInput: return "NonManifoldInput";
        case ErrorCode::MeshingFailed: return "MeshingFailed";
        case ErrorCode::EmptyMesh: return "EmptyMesh";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ProjectionUnstable: return "ProjectionUnstable";
    }
    return "UnknownError";
}

void PointCloud::validate() const {
    for (const Vec3& p : points) {
        if (!p.allFinite()) raise(ErrorCode::InvalidParam, "non-finite coordinate in point cloud");
    }
    if (labels && labels->size() != points.size()) {
        raise(ErrorCode::InvalidParam, "label array length does not match point count");
    }
}

double PointCloud::source_diag() const {
    if (cached_diag_ < 0.0) {
        cached_diag_ = points.empty() ? 0.0 : bounding_box(*this).diagonal();
    }
    return cached_diag_;
}

AABB bounding_box(const PointCloud& cloud) {
    if (cloud.empty()) raise(ErrorCode::EmptyInput, "bounding_box of empty cloud");
    AABB box{cloud.points.front(), cloud.points.front()};
    for (const Vec3& p : cloud.points) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
    }
    return box;
}

} // namespace voxmesh
