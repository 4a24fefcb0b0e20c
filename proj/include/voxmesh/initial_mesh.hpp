#pragma once

#include "voxmesh/halfedge_mesh.hpp"
#include "voxmesh/point_cloud.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace voxmesh {

struct MesherParams {
    int k = 16;            // neighborhood size for tangent-plane Delaunay
    int hole_fill_max = 8; // ear-fill boundary loops up to this many edges
    int threads = 0;
};

/// PCA normals over k-neighborhoods restricted to adjacent voxel boxes,
/// globally oriented by minimum-spanning-tree propagation.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, const VoxelGrid& grid, int k);

/// Greedy local-projection triangulation: per point, its adjacent-box
/// neighborhood is projected to the tangent plane and triangulated; a
/// triangle survives when all three vertices propose it, conflicts are
/// resolved best-quality-first, and small holes are ear-filled. No output
/// face spans non-adjacent boxes.
HalfEdgeMesh reconstruct_initial(const PointCloud& cloud, const VoxelGrid& grid,
                                 const MesherParams& params = {});

} // namespace voxmesh
