#include "voxmesh/detail/delaunay2d.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace voxmesh::detail {

namespace {

using Eigen::Vector2d;

double orient2d(const Vector2d& a, const Vector2d& b, const Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// > 0 when d lies strictly inside the circumcircle of CCW triangle (a,b,c).
double incircle(const Vector2d& a, const Vector2d& b, const Vector2d& c, const Vector2d& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad2 = adx * adx + ady * ady;
    const double bd2 = bdx * bdx + bdy * bdy;
    const double cd2 = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) +
           ad2 * (bdx * cdy - cdx * bdy);
}

struct Tri {
    int a, b, c;
    bool alive = true;
};

} // namespace

std::vector<std::array<int, 3>> delaunay2d(const std::vector<Vector2d>& points) {
    const int n = static_cast<int>(points.size());
    std::vector<std::array<int, 3>> result;
    if (n < 3) return result;

    // normalize into the unit square for conditioning
    Vector2d lo = points[0], hi = points[0];
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    double span = std::max((hi - lo).maxCoeff(), 1e-300);
    std::vector<Vector2d> pts(n + 3);
    for (int i = 0; i < n; ++i) pts[i] = (points[i] - lo) / span;

    // super-triangle comfortably containing the unit square
    pts[n] = Vector2d(-50.0, -50.0);
    pts[n + 1] = Vector2d(51.0, -50.0);
    pts[n + 2] = Vector2d(0.5, 80.0);

    std::vector<Tri> tris;
    tris.push_back({n, n + 1, n + 2});

    constexpr double kEps = 1e-12;

    for (int p = 0; p < n; ++p) {
        // cavity = triangles whose circumcircle strictly contains p
        std::vector<int> bad;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            if (incircle(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], pts[p]) > kEps) {
                bad.push_back(t);
            }
        }
        if (bad.empty()) continue; // duplicate or degenerate position; skip

        // boundary of the cavity: edges used by exactly one bad triangle
        std::map<std::pair<int, int>, std::pair<int, int>> edges; // sorted -> directed
        for (int t : bad) {
            const Tri& tri = tris[t];
            for (auto [u, v] : {std::pair{tri.a, tri.b}, {tri.b, tri.c}, {tri.c, tri.a}}) {
                auto key = std::minmax(u, v);
                auto it = edges.find(key);
                if (it == edges.end()) {
                    edges.emplace(key, std::pair{u, v});
                } else {
                    edges.erase(it);
                }
            }
            tris[t].alive = false;
        }
        for (const auto& [key, dir] : edges) {
            Tri fresh{dir.first, dir.second, p};
            double area2 = orient2d(pts[fresh.a], pts[fresh.b], pts[fresh.c]);
            if (std::abs(area2) <= 1e-15) continue; // collinear sliver
            if (area2 < 0.0) std::swap(fresh.b, fresh.c);
            tris.push_back(fresh);
        }
    }

    for (const Tri& t : tris) {
        if (!t.alive) continue;
        if (t.a >= n || t.b >= n || t.c >= n) continue; // touches super-triangle
        result.push_back({t.a, t.b, t.c});
    }
    return result;
}

} // namespace voxmesh::detail
