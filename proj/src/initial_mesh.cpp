#include "voxmesh/initial_mesh.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "voxmesh/detail/delaunay2d.hpp"
#include "voxmesh/metrics.hpp"
#include "voxmesh/neighbor_index.hpp"
#include "voxmesh/parallel.hpp"

namespace voxmesh {

namespace {

/// k nearest neighbors of point i restricted to boxes adjacent to its own.
std::vector<int> adjacent_knn(const PointCloud& cloud, const VoxelGrid& grid,
                              const NeighborIndex& index, int i, int k) {
    const BoxIndex home = grid.box_of_point(i);
    int query = k;
    const int n = static_cast<int>(cloud.size());
    while (true) {
        auto nn = index.knn_point(i, query);
        std::vector<int> kept;
        kept.reserve(k);
        for (const Neighbor& cand : nn) {
            if (adjacent(home, grid.box_of_point(cand.index))) {
                kept.push_back(cand.index);
                if (static_cast<int>(kept.size()) == k) return kept;
            }
        }
        if (static_cast<int>(nn.size()) >= n - 1) return kept; // cloud exhausted
        query *= 2;
    }
}

struct TriKey {
    std::array<int, 3> v; // sorted
    bool operator==(const TriKey&) const = default;
};
struct TriKeyHash {
    std::size_t operator()(const TriKey& t) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int x : t.v) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

TriKey make_key(int a, int b, int c) {
    std::array<int, 3> v{a, b, c};
    std::sort(v.begin(), v.end());
    return TriKey{v};
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

} // namespace

std::vector<Vec3> estimate_normals(const PointCloud& cloud, const VoxelGrid& grid, int k) {
    const int n = static_cast<int>(cloud.size());
    if (n <= k) raise(ErrorCode::InsufficientPoints, "estimate_normals needs more than k points");

    NeighborIndex index(cloud);
    std::vector<Vec3> normals(n);
    std::vector<std::vector<int>> neighborhoods(n);

    parallel_for(n, 0, [&](std::size_t i) {
        auto nn = adjacent_knn(cloud, grid, index, static_cast<int>(i), k);
        neighborhoods[i] = nn;

        Vec3 mean = cloud.points[i];
        for (int j : nn) mean += cloud.points[j];
        mean /= static_cast<double>(nn.size() + 1);

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        Vec3 d = cloud.points[i] - mean;
        cov += d * d.transpose();
        for (int j : nn) {
            d = cloud.points[j] - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        normals[i] = solver.eigenvectors().col(0).normalized();
    });

    // orientation: spanning-tree propagation, seeded at the topmost point of
    // each component with its normal turned toward +z
    std::vector<std::vector<int>> graph(n);
    for (int i = 0; i < n; ++i) {
        for (int j : neighborhoods[i]) {
            graph[i].push_back(j);
            graph[j].push_back(i);
        }
    }

    std::vector<std::uint8_t> done(n, 0);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (cloud.points[a].z() != cloud.points[b].z())
            return cloud.points[a].z() > cloud.points[b].z();
        return a < b;
    });

    using Entry = std::pair<double, std::pair<int, int>>; // (cost, (to, from))
    for (int seed : order) {
        if (done[seed]) continue;
        if (normals[seed].z() < 0.0) normals[seed] = -normals[seed];
        done[seed] = 1;

        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        auto relax = [&](int from) {
            for (int to : graph[from]) {
                if (!done[to]) {
                    double cost = 1.0 - std::abs(normals[from].dot(normals[to]));
                    queue.push({cost, {to, from}});
                }
            }
        };
        relax(seed);
        while (!queue.empty()) {
            auto [cost, edge] = queue.top();
            queue.pop();
            auto [to, from] = edge;
            if (done[to]) continue;
            if (normals[from].dot(normals[to]) < 0.0) normals[to] = -normals[to];
            done[to] = 1;
            relax(to);
        }
    }
    return normals;
}

HalfEdgeMesh reconstruct_initial(const PointCloud& cloud, const VoxelGrid& grid,
                                 const MesherParams& params) {
    const int n = static_cast<int>(cloud.size());
    if (n < 3) raise(ErrorCode::DegenerateInput, "need at least 3 points");

    const auto normals = estimate_normals(cloud, grid, std::min(params.k, n - 1));
    NeighborIndex index(cloud);

    // --- per-point tangent-plane Delaunay, star collection -----------------
    std::vector<std::vector<TriKey>> proposals(n);
    parallel_for(n, params.threads, [&](std::size_t pi) {
        const int i = static_cast<int>(pi);
        auto nn = adjacent_knn(cloud, grid, index, i, std::min(params.k, n - 1));
        if (nn.size() < 2) return;

        std::vector<int> local(nn);
        local.push_back(i);
        std::sort(local.begin(), local.end()); // canonical insertion order

        const Vec3& normal = normals[i];
        int axis = 0;
        for (int a = 1; a < 3; ++a) {
            if (std::abs(normal[a]) < std::abs(normal[axis])) axis = a;
        }
        Vec3 u = Vec3::Unit(axis) - normal[axis] * normal;
        u.normalize();
        Vec3 v = normal.cross(u);

        std::vector<Eigen::Vector2d> plane(local.size());
        int self = 0;
        for (std::size_t j = 0; j < local.size(); ++j) {
            Vec3 d = cloud.points[local[j]] - cloud.points[i];
            plane[j] = Eigen::Vector2d(d.dot(u), d.dot(v));
            if (local[j] == i) self = static_cast<int>(j);
        }

        for (const auto& tri : detail::delaunay2d(plane)) {
            if (tri[0] != self && tri[1] != self && tri[2] != self) continue;
            int a = local[tri[0]], b = local[tri[1]], c = local[tri[2]];
            // the box-adjacency invariant must hold pairwise
            if (!adjacent(grid.box_of_point(a), grid.box_of_point(b)) ||
                !adjacent(grid.box_of_point(b), grid.box_of_point(c)) ||
                !adjacent(grid.box_of_point(a), grid.box_of_point(c))) {
                continue;
            }
            proposals[pi].push_back(make_key(a, b, c));
        }
    });

    std::unordered_map<TriKey, int, TriKeyHash> votes;
    for (const auto& list : proposals) {
        for (const TriKey& key : list) ++votes[key];
    }

    struct Candidate {
        TriKey key;
        double quality;
    };
    std::vector<Candidate> accepted;
    for (const auto& [key, count] : votes) {
        if (count < 3) continue;
        accepted.push_back(
            {key, triangle_quality(cloud.points[key.v[0]], cloud.points[key.v[1]],
                                   cloud.points[key.v[2]])});
    }
    std::sort(accepted.begin(), accepted.end(), [](const Candidate& a, const Candidate& b) {
        if (a.quality != b.quality) return a.quality > b.quality;
        return a.key.v < b.key.v;
    });

    // --- greedy manifold assembly, best quality first -----------------------
    // A face's winding is forced by already-placed neighbors (it must oppose
    // them); unconstrained faces follow their vertex normals. Contradictory
    // constraints drop the face.
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_use; // key -> {fwd, rev} counts... see below
    // edge_use value: directed occupancy for (min->max, max->min)
    auto directed_free = [&](int a, int b) {
        auto it = edge_use.find(edge_key(a, b));
        if (it == edge_use.end()) return true;
        return it->second[a < b ? 0 : 1] == 0;
    };
    auto occupy = [&](int a, int b) { ++edge_use[edge_key(a, b)][a < b ? 0 : 1]; };

    std::vector<std::array<int, 3>> faces;
    std::vector<double> face_quality;
    for (const Candidate& cand : accepted) {
        auto [a, b, c] = cand.key.v;

        Vec3 face_n = (cloud.points[b] - cloud.points[a])
                          .cross(cloud.points[c] - cloud.points[a]);
        Vec3 mean_n = normals[a] + normals[b] + normals[c];
        std::array<int, 3> tri{a, b, c};
        if (face_n.dot(mean_n) < 0.0) std::swap(tri[1], tri[2]);

        // try the normal-guided winding first, then the flip
        std::array<int, 3> flipped{tri[0], tri[2], tri[1]};
        auto fits = [&](const std::array<int, 3>& t) {
            return directed_free(t[0], t[1]) && directed_free(t[1], t[2]) &&
                   directed_free(t[2], t[0]);
        };
        const std::array<int, 3>* chosen = nullptr;
        if (fits(tri)) {
            chosen = &tri;
        } else if (fits(flipped)) {
            chosen = &flipped;
        }
        if (!chosen) continue;

        faces.push_back(*chosen);
        face_quality.push_back(cand.quality);
        occupy((*chosen)[0], (*chosen)[1]);
        occupy((*chosen)[1], (*chosen)[2]);
        occupy((*chosen)[2], (*chosen)[0]);
    }

    // --- bowtie cleanup: keep the dominant fan at each vertex ----------------
    std::vector<std::uint8_t> dropped(faces.size(), 0);
    for (int pass = 0; pass < 10; ++pass) {
        std::vector<std::vector<int>> vertex_faces(n);
        for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
            if (dropped[f]) continue;
            for (int v : faces[f]) vertex_faces[v].push_back(f);
        }
        bool changed = false;
        for (int v = 0; v < n; ++v) {
            const auto& inc = vertex_faces[v];
            if (inc.size() < 2) continue;
            // union faces sharing an edge incident at v
            std::map<int, int> local; // face -> local id
            for (int f : inc) local.emplace(f, static_cast<int>(local.size()));
            std::vector<int> parent(local.size());
            std::iota(parent.begin(), parent.end(), 0);
            std::function<int(int)> find = [&](int x) {
                while (parent[x] != x) x = parent[x] = parent[parent[x]];
                return x;
            };
            std::map<std::uint64_t, int> spoke; // edge at v -> local face
            for (int f : inc) {
                for (int k3 = 0; k3 < 3; ++k3) {
                    int p = faces[f][k3], q = faces[f][(k3 + 1) % 3];
                    if (p != v && q != v) continue;
                    int other = p == v ? q : p;
                    auto [it, fresh] = spoke.try_emplace(edge_key(v, other), local[f]);
                    if (!fresh) {
                        int ra = find(it->second), rb = find(local[f]);
                        if (ra != rb) parent[ra] = rb;
                    }
                }
            }
            std::map<int, std::pair<int, double>> sectors; // root -> (count, quality)
            for (int f : inc) {
                auto& s = sectors[find(local[f])];
                ++s.first;
                s.second += face_quality[f];
            }
            if (sectors.size() < 2) continue;
            int best_root = -1;
            std::pair<int, double> best{-1, 0.0};
            for (const auto& [root, score] : sectors) {
                if (score.first > best.first ||
                    (score.first == best.first && score.second > best.second)) {
                    best = score;
                    best_root = root;
                }
            }
            for (int f : inc) {
                if (find(local[f]) != best_root) {
                    dropped[f] = 1;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }

    std::vector<std::array<int, 3>> kept;
    std::vector<double> kept_quality;
    for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
        if (!dropped[f]) {
            kept.push_back(faces[f]);
            kept_quality.push_back(face_quality[f]);
        }
    }

    // --- hole filling ---------------------------------------------------------
    {
        std::unordered_map<std::uint64_t, int> edge_count;
        for (const auto& t : kept) {
            ++edge_count[edge_key(t[0], t[1])];
            ++edge_count[edge_key(t[1], t[2])];
            ++edge_count[edge_key(t[2], t[0])];
        }
        HalfEdgeMesh probe = HalfEdgeMesh::build(cloud.points, kept);
        for (const auto& loop_halfedges : probe.boundary_loops()) {
            if (static_cast<int>(loop_halfedges.size()) > params.hole_fill_max) continue;
            std::vector<int> loop;
            loop.reserve(loop_halfedges.size());
            for (int h : loop_halfedges) loop.push_back(probe.to_vertex(h));

            // local orientation of the hole: fills that fold back onto the
            // surface (open sheets, not holes) get rejected against this
            Vec3 rim_normal = Vec3::Zero();
            for (int h : loop_halfedges) {
                int f = probe.face(HalfEdgeMesh::twin(h));
                if (f != HalfEdgeMesh::kInvalid) rim_normal += probe.face_normal(f);
            }
            if (rim_normal.norm() > 0.0) rim_normal.normalize();

            while (loop.size() >= 3) {
                int best = -1;
                double best_quality = 1e-12;
                const int m = static_cast<int>(loop.size());
                for (int e = 0; e < m; ++e) {
                    int a = loop[e], b = loop[(e + 1) % m], c = loop[(e + 2) % m];
                    if (a == c) continue;
                    auto it = edge_count.find(edge_key(a, c));
                    int used = it == edge_count.end() ? 0 : it->second;
                    if (used >= 2 || (m > 3 && used >= 1)) continue;
                    Vec3 n = (cloud.points[b] - cloud.points[a])
                                 .cross(cloud.points[c] - cloud.points[a]);
                    if (n.norm() > 0.0 && n.normalized().dot(rim_normal) < 0.05) continue;
                    double q = triangle_quality(cloud.points[a], cloud.points[b],
                                                cloud.points[c]);
                    if (q > best_quality) {
                        best_quality = q;
                        best = e;
                    }
                }
                if (best < 0) break;
                int a = loop[best], b = loop[(best + 1) % m], c = loop[(best + 2) % m];
                // boundary halfedges run opposite the face winding: the fill
                // face traverses the free directions a->b->c
                kept.push_back({a, b, c});
                kept_quality.push_back(best_quality);
                ++edge_count[edge_key(a, b)];
                ++edge_count[edge_key(b, c)];
                ++edge_count[edge_key(a, c)];
                loop.erase(loop.begin() + (best + 1) % m);
            }
        }
    }

    // --- final audit ------------------------------------------------------------
    std::vector<std::uint8_t> has_face(n, 0);
    for (const auto& t : kept) {
        for (int v : t) has_face[v] = 1;
    }
    const int covered = static_cast<int>(std::count(has_face.begin(), has_face.end(), 1));
    if (covered < (9 * n) / 10) {
        raise(ErrorCode::MeshingFailed,
              "only " + std::to_string(covered) + " of " + std::to_string(n) +
                  " points received a face");
    }

    HalfEdgeMesh mesh = HalfEdgeMesh::build(cloud.points, kept);
    return mesh;
}

} // namespace voxmesh
