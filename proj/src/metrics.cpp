#include "voxmesh/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "voxmesh/neighbor_index.hpp"
#include "voxmesh/parallel.hpp"
#include "voxmesh/preprocess.hpp"

namespace voxmesh {

double triangle_quality(const Vec3& a, const Vec3& b, const Vec3& c) {
    const double la = (b - c).norm();
    const double lb = (c - a).norm();
    const double lc = (a - b).norm();
    const double longest = std::max({la, lb, lc});
    const double perimeter = la + lb + lc;
    if (longest <= 0.0 || perimeter <= 0.0) return 0.0;
    const double area = 0.5 * (b - a).cross(c - a).norm();
    const double inradius = 2.0 * area / perimeter;
    return (6.0 / std::sqrt(3.0)) * inradius / longest;
}

double min_angle_deg(const Vec3& a, const Vec3& b, const Vec3& c) {
    auto corner = [](const Vec3& at, const Vec3& p, const Vec3& q) {
        Vec3 u = p - at, v = q - at;
        double nu = u.norm(), nv = v.norm();
        if (nu <= 0.0 || nv <= 0.0) return 0.0;
        double cosine = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
        return std::acos(cosine) * 180.0 / M_PI;
    };
    double area2 = (b - a).cross(c - a).norm();
    if (area2 <= 0.0) return 0.0;
    return std::min({corner(a, b, c), corner(b, c, a), corner(c, a, b)});
}

std::pair<double, double> mls_error(const HalfEdgeMesh& mesh, const PointCloud& original, int k) {
    if (static_cast<int>(original.size()) <= k) {
        raise(ErrorCode::InsufficientPoints, "mls_error reference cloud too small");
    }
    const double diag = bounding_box(original).diagonal();
    if (!(diag > 0.0)) raise(ErrorCode::DegenerateInput, "reference cloud is a point");
    const double h = compute_h(original, k);
    const double tol = 1e-6 * diag;

    NeighborIndex index(original);

    std::vector<int> verts;
    for (int v = 0; v < mesh.vertices_size(); ++v) {
        if (!mesh.vertex_deleted(v)) verts.push_back(v);
    }
    if (verts.empty()) raise(ErrorCode::EmptyMesh, "mesh has no vertices");

    std::vector<double> delta(verts.size(), 0.0);
    std::vector<std::uint8_t> diverged(verts.size(), 0);

    parallel_for(verts.size(), 0, [&](std::size_t vi) {
        const Vec3 start = mesh.position(verts[vi]);
        Vec3 x = start;
        bool converged = false;
        for (int iter = 0; iter < 20; ++iter) {
            auto nn = index.knn(x, k);
            double wsum = 0.0;
            Vec3 centroid = Vec3::Zero();
            for (const Neighbor& nb : nn) {
                double w = gaussian_weight(nb.distance, h);
                wsum += w;
                centroid += w * original.points[nb.index];
            }
            if (wsum <= 0.0) break;
            centroid /= wsum;

            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (const Neighbor& nb : nn) {
                double w = gaussian_weight(nb.distance, h);
                Vec3 d = original.points[nb.index] - centroid;
                cov += w * d * d.transpose();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
            Vec3 normal = solver.eigenvectors().col(0);

            Vec3 next = x - normal.dot(x - centroid) * normal;
            double step = (next - x).norm();
            x = next;
            if (step < tol) {
                converged = true;
                break;
            }
        }
        if (!converged) diverged[vi] = 1;
        delta[vi] = (x - start).norm() / diag;
    });

    long bad = std::count(diverged.begin(), diverged.end(), std::uint8_t(1));
    if (bad * 100 > static_cast<long>(verts.size())) {
        raise(ErrorCode::ProjectionUnstable,
              std::to_string(bad) + " of " + std::to_string(verts.size()) +
                  " vertices did not converge");
    }

    double dmax = 0.0, davg = 0.0;
    for (double d : delta) {
        dmax = std::max(dmax, d);
        davg += d;
    }
    davg /= static_cast<double>(delta.size());
    return {dmax, davg};
}

QualityReport mesh_report(const HalfEdgeMesh& mesh, const PointCloud& original,
                          const ReportParams& params) {
    if (mesh.n_faces() == 0) raise(ErrorCode::EmptyMesh, "mesh has no faces");

    QualityReport report;
    report.histogram.assign(kHistogramBins, 0);
    report.vertex_min_angle.assign(mesh.vertices_size(), -1.0);

    double q_min = 2.0, theta_min = 361.0;
    double q_sum = 0.0, theta_sum = 0.0;

    for (int f = 0; f < mesh.faces_size(); ++f) {
        if (mesh.face_deleted(f)) continue;
        auto [a, b, c] = mesh.face_vertices(f);
        const Vec3 &pa = mesh.position(a), &pb = mesh.position(b), &pc = mesh.position(c);

        double q = triangle_quality(pa, pb, pc);
        double theta = min_angle_deg(pa, pb, pc);
        q_min = std::min(q_min, q);
        theta_min = std::min(theta_min, theta);
        q_sum += q;
        theta_sum += theta;
        ++report.triangle_count;

        int bin = std::min(kHistogramBins - 1,
                           std::max(0, static_cast<int>(std::floor(theta))));
        ++report.histogram[bin];

        // corner angles feed the per-vertex minima
        auto corner = [](const Vec3& at, const Vec3& p, const Vec3& q2) {
            Vec3 u = p - at, v = q2 - at;
            double nu = u.norm(), nv = v.norm();
            if (nu <= 0.0 || nv <= 0.0) return 0.0;
            return std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0)) * 180.0 / M_PI;
        };
        struct {
            int v;
            double angle;
        } corners[3] = {{a, corner(pa, pb, pc)}, {b, corner(pb, pc, pa)}, {c, corner(pc, pa, pb)}};
        for (const auto& entry : corners) {
            double& slot = report.vertex_min_angle[entry.v];
            if (slot < 0.0 || entry.angle < slot) slot = entry.angle;
        }
    }

    report.q_avg = q_sum / static_cast<double>(report.triangle_count);
    report.theta_avg = theta_sum / static_cast<double>(report.triangle_count);

    if (q_min < kQualityFloorQ) {
        report.q_min.nan_reason = "below_quality_floor";
    } else {
        report.q_min.value = q_min;
    }
    if (theta_min < kQualityFloorThetaDeg) {
        report.theta_min.nan_reason = "below_quality_floor";
    } else {
        report.theta_min.value = theta_min;
    }

    if (params.with_mls && !original.empty()) {
        auto [dmax, davg] = mls_error(mesh, original, params.mls_k);
        report.mls_max = dmax;
        report.mls_avg = davg;
        report.mls_computed = true;
    }
    return report;
}

std::vector<std::array<std::uint8_t, 3>> angle_color_map(const QualityReport& report) {
    std::vector<std::array<std::uint8_t, 3>> colors(report.vertex_min_angle.size(),
                                                    {128, 128, 128});
    for (std::size_t v = 0; v < colors.size(); ++v) {
        double angle = report.vertex_min_angle[v];
        if (angle < 0.0) continue;
        double t = std::clamp(angle / 60.0, 0.0, 1.0);
        double r, g, b;
        if (t < 0.5) { // blue -> green
            double s = t / 0.5;
            r = 0.0;
            g = s;
            b = 1.0 - s;
        } else { // green -> red
            double s = (t - 0.5) / 0.5;
            r = s;
            g = 1.0 - s;
            b = 0.0;
        }
        colors[v] = {static_cast<std::uint8_t>(std::lround(255.0 * r)),
                     static_cast<std::uint8_t>(std::lround(255.0 * g)),
                     static_cast<std::uint8_t>(std::lround(255.0 * b))};
    }
    return colors;
}

} // namespace voxmesh
