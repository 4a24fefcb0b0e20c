#pragma once

#include <vector>

#include "voxmesh/halfedge_mesh.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace voxmesh {

struct RemeshParams {
    int iterations = 5;
    bool preserve_edges = false; // guard external-edge and boundary vertices
    bool adaptive = false;       // curvature-scaled per-vertex target lengths
    int adaptive_classes = 5;
    std::vector<double> adaptive_rates{2, 3, 4, 5, 6};
    /// External-edge endpoint is immovable when it has at least this many
    /// external-edge neighbors (3 reads the guard as "more than two"; set 2
    /// for the "two or more" reading).
    int crease_guard_min_neighbors = 3;
    double smoothing_lambda = 0.5;
};

struct RemeshIteration {
    long splits = 0;
    long collapses = 0;
    long flips = 0;
    double mean_edge = 0.0;
    double q_avg = 0.0; // after the iteration
};

struct RemeshStats {
    std::vector<RemeshIteration> iterations;
    long vertex_deficit = 0; // splits minus collapses over the whole run
    double q_avg_initial = 0.0;
};

/// Deletes every face with a vertex pair in non-adjacent voxel boxes (the
/// rebuilt internal edges appear as boundary loops), removes isolated
/// vertices, keeps flags. Idempotent.
HalfEdgeMesh rebuild_internal_edges(const HalfEdgeMesh& mesh, const VoxelGrid& grid);

/// Arithmetic mean over unique live edges.
double mean_edge_length(const HalfEdgeMesh& mesh);

/// Per-vertex split/collapse target lengths: the global mean edge length
/// scaled inversely to the vertex's curvature-class weight. Near-constant
/// curvature collapses to a single class (all targets equal the mean).
std::vector<double> adaptive_target_length(const HalfEdgeMesh& mesh, int n_classes,
                                           const std::vector<double>& rates);

/// Split / budgeted collapse / valence flips / tangential smoothing, with
/// external-edge and boundary guards. Mutates the mesh in place and compacts
/// it; returns per-iteration statistics.
RemeshStats isotropic_remesh(HalfEdgeMesh& mesh, const RemeshParams& params);

} // namespace voxmesh
