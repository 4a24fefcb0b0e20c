#pragma once

#include <optional>
#include <vector>

#include "voxmesh/halfedge_mesh.hpp"
#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

/// Isotropy measure in [0,1]: (6/sqrt(3)) * inradius / longest edge.
/// 1 for equilateral, 0 for degenerate.
double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c);

/// Smallest interior angle in degrees; 0 for degenerate.
double min_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c);

/// A scalar metric that is absent when the low-quality rule fired.
struct MaybeStat {
    std::optional<double> value;
    std::string nan_reason; // set iff !value
};

struct QualityReport {
    MaybeStat q_min, theta_min;
    double q_avg = 0.0;
    double theta_avg = 0.0; // mean of per-triangle minimum angles, degrees
    long triangle_count = 0;
    std::vector<long> histogram;          // 60 bins over [0, 60] degrees
    std::vector<double> vertex_min_angle; // degrees, per live vertex; -1 if no face
    double mls_max = 0.0, mls_avg = 0.0;  // fraction of bounding-box diagonal
    bool mls_computed = false;
};

inline constexpr double kQualityFloorQ = 0.1;
inline constexpr double kQualityFloorThetaDeg = 5.0;
inline constexpr int kHistogramBins = 60;

/// Per-vertex displacement to the MLS surface of `original`, as a fraction
/// of the original's bounding-box diagonal. Returns (max, avg).
std::pair<double, double> mls_error(const HalfEdgeMesh& mesh, const PointCloud& original, int k);

struct ReportParams {
    int mls_k = 12;
    bool with_mls = true;
};

/// Aggregates Q and theta over triangles, applies the low-quality rule to
/// the minima, builds the angle histogram and per-vertex minimum angles, and
/// computes the MLS error pair against `original`.
QualityReport mesh_report(const HalfEdgeMesh& mesh, const PointCloud& original,
                          const ReportParams& params = {});

/// Per-vertex minimum-corner-angle colors: [0,60] degrees mapped linearly
/// through blue -> green -> red. Vertices without faces get gray.
std::vector<std::array<std::uint8_t, 3>> angle_color_map(const QualityReport& report);

} // namespace voxmesh
