#include "voxmesh/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "voxmesh/initial_mesh.hpp"
#include "voxmesh/parallel.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace voxmesh {

double compute_h(const PointCloud& cloud, int k) {
    if (k < 1) raise(ErrorCode::InvalidParam, "compute_h requires k >= 1");
    if (static_cast<int>(cloud.size()) <= k) {
        raise(ErrorCode::InsufficientPoints,
              "compute_h needs more than k=" + std::to_string(k) + " points");
    }
    NeighborIndex index(cloud);
    double h = 0.0;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        auto nn = index.knn_point(i, k);
        h = std::max(h, nn.back().distance);
    }
    return h;
}

PointCloud mls_smooth(const PointCloud& cloud, const SmoothingParams& params) {
    if (static_cast<int>(cloud.size()) <= params.k) {
        raise(ErrorCode::InsufficientPoints, "mls_smooth needs more than k points");
    }
    const double h = params.h ? *params.h : compute_h(cloud, params.k);
    if (!(h > 0.0)) {
        // all points coincident: weighted mean is the point itself
        return cloud;
    }

    NeighborIndex index(cloud);
    PointCloud out = cloud;
    parallel_for(cloud.size(), params.threads, [&](std::size_t i) {
        const Vec3& p = cloud.points[i];
        Vec3 sum = p; // own term, weight theta(0) = 1
        double weight = 1.0;
        for (const Neighbor& n : index.knn_point(static_cast<int>(i), params.k)) {
            double w = gaussian_weight(n.distance, h);
            sum += w * cloud.points[n.index];
            weight += w;
        }
        out.points[i] = sum / weight;
    });
    return out;
}

PointCloud octree_uniform(const PointCloud& cloud, std::optional<double> scale_opt) {
    if (cloud.empty()) raise(ErrorCode::EmptyInput, "octree_uniform of empty cloud");
    if (cloud.size() == 1) return cloud;

    double scale;
    if (scale_opt) {
        scale = *scale_opt;
    } else {
        NeighborIndex index(cloud);
        double sum = 0.0;
        for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
            sum += index.knn_point(i, 1).front().distance;
        }
        scale = sum / static_cast<double>(cloud.size());
    }
    if (!(scale > 0.0)) raise(ErrorCode::InvalidParam, "octree scale must be positive");

    const Vec3 anchor = bounding_box(cloud).min;
    struct Cell {
        int best = -1;
        double best_d2 = 0.0;
    };
    auto cube_of = [&](const Vec3& p) {
        return std::array<std::int64_t, 3>{
            static_cast<std::int64_t>(std::floor((p.x() - anchor.x()) / scale)),
            static_cast<std::int64_t>(std::floor((p.y() - anchor.y()) / scale)),
            static_cast<std::int64_t>(std::floor((p.z() - anchor.z()) / scale))};
    };

    std::map<std::array<std::int64_t, 3>, Cell> cells;
    for (int i = 0; i < static_cast<int>(cloud.size()); ++i) {
        auto key = cube_of(cloud.points[i]);
        Vec3 centroid = anchor + scale * Vec3(key[0] + 0.5, key[1] + 0.5, key[2] + 0.5);
        double d2 = (cloud.points[i] - centroid).squaredNorm();
        Cell& cell = cells[key];
        if (cell.best < 0 || d2 < cell.best_d2) {
            cell.best = i;
            cell.best_d2 = d2;
        }
    }

    PointCloud out;
    out.points.reserve(cells.size());
    if (cloud.labels) out.labels.emplace();
    for (const auto& [key, cell] : cells) {
        out.points.push_back(cloud.points[cell.best]);
        if (cloud.labels) out.labels->push_back((*cloud.labels)[cell.best]);
    }
    return out;
}

int edge_insert_count(int s) {
    if (s < 0) raise(ErrorCode::InvalidParam, "edge_insert_count requires s >= 0");
    double value = std::sqrt(2.0 * s + 0.5) - 1.0 / std::sqrt(2.0);
    return static_cast<int>(std::floor(value + 0.5));
}

PointCloud upsample_delaunay(const PointCloud& cloud, int s) {
    if (s < 1) raise(ErrorCode::InvalidParam, "upsample_delaunay requires s >= 1");
    if (cloud.size() < 3) raise(ErrorCode::DegenerateInput, "need at least 3 points");

    // provisional triangulation of the cloud as-is
    VoxelGrid grid(cloud, default_scale(cloud));
    MesherParams mesher;
    HalfEdgeMesh mesh = reconstruct_initial(cloud, grid, mesher);
    auto faces = mesh.face_list();
    if (faces.empty()) raise(ErrorCode::DegenerateInput, "triangulation produced no faces");

    double mean_area = 0.0;
    std::vector<double> area(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& t = faces[f];
        area[f] = 0.5 * (cloud.points[t[1]] - cloud.points[t[0]])
                            .cross(cloud.points[t[2]] - cloud.points[t[0]])
                            .norm();
        mean_area += area[f];
    }
    mean_area /= static_cast<double>(faces.size());
    if (!(mean_area > 0.0)) raise(ErrorCode::DegenerateInput, "all triangles degenerate");

    auto per_face_sl = [&](std::size_t f) {
        int st = static_cast<int>(std::floor(s * area[f] / mean_area + 0.5));
        return edge_insert_count(st);
    };

    // shared edges get populated once, with the larger of the two budgets
    std::map<std::pair<int, int>, int> edge_sl;
    for (std::size_t f = 0; f < faces.size(); ++f) {
        int sl = per_face_sl(f);
        for (int k = 0; k < 3; ++k) {
            int a = faces[f][k], b = faces[f][(k + 1) % 3];
            if (a > b) std::swap(a, b);
            auto [it, fresh] = edge_sl.try_emplace({a, b}, sl);
            if (!fresh) it->second = std::max(it->second, sl);
        }
    }

    PointCloud out = cloud;
    if (cloud.labels && !out.labels) out.labels.emplace(cloud.size(), 0);
    auto push = [&](const Vec3& p, int label) {
        out.points.push_back(p);
        if (out.labels) out.labels->push_back(label);
    };

    for (const auto& [edge, sl] : edge_sl) {
        const Vec3& a = cloud.points[edge.first];
        const Vec3& b = cloud.points[edge.second];
        for (int i = 1; i <= sl; ++i) {
            double t = static_cast<double>(i) / (sl + 1);
            push((1.0 - t) * a + t * b,
                 cloud.label(t <= 0.5 ? edge.first : edge.second));
        }
    }

    for (std::size_t f = 0; f < faces.size(); ++f) {
        int sl = per_face_sl(f);
        int n = sl + 1;
        const auto& t = faces[f];
        for (int i = 1; i < n; ++i) {
            for (int j = 1; i + j < n; ++j) {
                int k = n - i - j;
                Vec3 p = (i * cloud.points[t[0]] + j * cloud.points[t[1]] +
                          k * cloud.points[t[2]]) /
                         static_cast<double>(n);
                int corner = i >= j ? (i >= k ? 0 : 2) : (j >= k ? 1 : 2);
                push(p, cloud.label(t[corner]));
            }
        }
    }
    return out;
}

} // namespace voxmesh
