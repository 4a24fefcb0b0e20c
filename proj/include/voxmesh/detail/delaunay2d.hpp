#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace voxmesh::detail {

/// Bowyer-Watson Delaunay triangulation of a small planar point set.
/// Insertion order is the input order, which makes cocircular tie-breaking
/// deterministic across calls with identical input.
std::vector<std::array<int, 3>> delaunay2d(const std::vector<Eigen::Vector2d>& points);

} // namespace voxmesh::detail
