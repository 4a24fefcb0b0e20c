#pragma once

#include <optional>
#include <string>

#include "voxmesh/halfedge_mesh.hpp"
#include "voxmesh/io.hpp"
#include "voxmesh/point_cloud.hpp"
#include "voxmesh/resample.hpp"

namespace voxmesh {

struct PipelineConfig {
    // preprocess
    int preprocess_k = 8;
    int preprocess_passes = 1;
    double octree_scale = 0.0; // 0 = auto (mean nearest-neighbor distance)
    bool smooth = true;
    bool uniform = true;
    int upsample_s = 6;
    // grid
    double v_scale = 0.0; // 0 = auto
    // resample
    long points = 0; // 0 = no resampling (mesh the preprocessed cloud)
    std::string mode = "none"; // none | edges | curvature
    std::string rates;         // "7:3" (edges) or "2:3:4:5:6" (curvature)
    double edge_threshold = 0.05;
    int classify_k = 16;
    int curvature_classes = 5;
    long seed = 0; // reserved; the pipeline is deterministic without randomness
    // initial mesh
    int mesh_k = 16;
    int hole_fill_max = 8;
    // remesh
    int iterations = 5; // 0 skips remeshing
    std::optional<bool> preserve_edges; // default: on in edges mode
    bool adaptive = false;
    bool keep_internal_edges = false;
    int crease_guard_min_neighbors = 3;
    // metrics
    int mls_k = 12;
    bool with_mls = true;
    // execution
    int threads = 0; // 0 = hardware concurrency

    /// Nested JSON with every key, fixed order (the canonical form that gets
    /// hashed and embedded into reports).
    std::string to_json() const;
    /// Overlays the keys present in `json_text` onto this config.
    void apply_json(const std::string& json_text);
    std::string hash() const;

    std::vector<double> class_rates_for_mode() const;
    bool effective_preserve_edges() const {
        return preserve_edges ? *preserve_edges : mode == "edges";
    }
};

struct PipelineResult {
    HalfEdgeMesh mesh;
    PointCloud preprocessed; // the cloud the grid and MLS reference use
    ReportDocument report;
};

/// preprocess -> grid -> classify -> plan -> resample -> triangulate ->
/// optional internal-edge rebuild -> remesh -> metrics.
PipelineResult run_reconstruct(const PointCloud& input, const PipelineConfig& config,
                               const std::string& input_name = "");

/// Stage runners shared by the CLI subcommands.
PointCloud run_preprocess(const PointCloud& input, const PipelineConfig& config);
PointCloud run_resample_stage(const PointCloud& preprocessed, const PipelineConfig& config);

} // namespace voxmesh
