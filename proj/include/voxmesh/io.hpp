#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voxmesh/halfedge_mesh.hpp"
#include "voxmesh/metrics.hpp"
#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

enum class CloudFormat { Ply, Obj, Xyz };
enum class MeshFormat { Ply, Obj };
enum class PlyEncoding { Ascii, BinaryLittleEndian };

/// Format guessed from the extension; unknown extensions parse as XYZ.
CloudFormat cloud_format_of(const std::filesystem::path& path);
MeshFormat mesh_format_of(const std::filesystem::path& path);

/// Positions plus an optional per-point integer "class" property (PLY only).
PointCloud load_point_cloud(const std::filesystem::path& path);
PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format);

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyEncoding encoding = PlyEncoding::BinaryLittleEndian);

struct LoadedMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::optional<std::vector<int>> labels; // PLY "class" property
};

LoadedMesh load_mesh(const std::filesystem::path& path);

void save_mesh(const HalfEdgeMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::array<std::uint8_t, 3>>* vertex_colors = nullptr,
               PlyEncoding encoding = PlyEncoding::Ascii);

/// Everything a run writes into its JSON report.
struct ReportDocument {
    std::string input_path;
    long target_points = 0;
    std::string config_hash;
    long seed = 0;
    QualityReport quality;
    long vertex_count = 0;
    int boundary_loop_count = 0;
    int component_count = 0;
    long euler_characteristic = 0;
    bool closed = false;
    long remesh_splits = 0, remesh_collapses = 0, remesh_deficit = 0;
    std::vector<double> q_avg_per_iteration;
    double q_avg_initial = 0.0;
    std::map<std::string, double> timings_ms;
    std::string effective_config_json; // embedded verbatim
};

/// Deterministic JSON document (fixed key order, shortest round-trip floats).
void save_report(const ReportDocument& report, const std::filesystem::path& path);
std::string report_to_json(const ReportDocument& report);

/// CSV rows "bin_start_deg,bin_end_deg,count".
void save_histogram_csv(const ReportDocument& report, const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// Writes via a temporary file in the same directory, renamed on success.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

} // namespace voxmesh
