#include "voxmesh/remesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voxmesh/metrics.hpp"
#include "voxmesh/point_cloud.hpp"
#include "voxmesh/resample.hpp"

namespace voxmesh {

namespace {

struct EulerCounts {
    int v, e, f;
};

EulerCounts counts_of(const HalfEdgeMesh& m) {
    return {m.n_vertices(), m.n_edges(), m.n_faces()};
}

void expect_delta(const EulerCounts& before, const EulerCounts& after, int dv, int de, int df,
                  const char* op) {
    if (after.v - before.v != dv || after.e - before.e != de || after.f - before.f != df) {
        raise(ErrorCode::NonManifoldInput,
              std::string(op) + " produced an unexpected element-count delta");
    }
}

double current_q_avg(const HalfEdgeMesh& mesh) {
    double sum = 0.0;
    long count = 0;
    for (int f = 0; f < mesh.faces_size(); ++f) {
        if (mesh.face_deleted(f)) continue;
        auto [a, b, c] = mesh.face_vertices(f);
        sum += triangle_quality(mesh.position(a), mesh.position(b), mesh.position(c));
        ++count;
    }
    return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

int external_neighbor_count(const HalfEdgeMesh& mesh, int v) {
    int count = 0;
    mesh.for_each_outgoing(v, [&](int h) {
        if (mesh.flag(mesh.to_vertex(h)) == VertexFlag::ExternalEdge) ++count;
    });
    return count;
}

} // namespace

HalfEdgeMesh rebuild_internal_edges(const HalfEdgeMesh& mesh, const VoxelGrid& grid) {
    std::vector<BoxIndex> box(mesh.vertices_size());
    for (int v = 0; v < mesh.vertices_size(); ++v) {
        if (!mesh.vertex_deleted(v)) box[v] = grid.box_of_position(mesh.position(v));
    }

    std::vector<std::array<int, 3>> kept;
    std::vector<std::uint8_t> used(mesh.vertices_size(), 0);
    for (int f = 0; f < mesh.faces_size(); ++f) {
        if (mesh.face_deleted(f)) continue;
        auto t = mesh.face_vertices(f);
        if (adjacent(box[t[0]], box[t[1]]) && adjacent(box[t[1]], box[t[2]]) &&
            adjacent(box[t[0]], box[t[2]])) {
            kept.push_back(t);
            for (int v : t) used[v] = 1;
        }
    }

    std::vector<int> remap(mesh.vertices_size(), -1);
    std::vector<Vec3> positions;
    std::vector<VertexFlag> flags;
    for (int v = 0; v < mesh.vertices_size(); ++v) {
        if (!used[v]) continue;
        remap[v] = static_cast<int>(positions.size());
        positions.push_back(mesh.position(v));
        flags.push_back(mesh.flag(v));
    }
    for (auto& t : kept) {
        for (int& v : t) v = remap[v];
    }

    HalfEdgeMesh out = HalfEdgeMesh::build(std::move(positions), kept);
    for (std::size_t v = 0; v < flags.size(); ++v) {
        out.set_flag(static_cast<int>(v), flags[v]);
    }
    return out;
}

double mean_edge_length(const HalfEdgeMesh& mesh) {
    if (mesh.n_edges() == 0) raise(ErrorCode::EmptyMesh, "mesh has no edges");
    double sum = 0.0;
    long count = 0;
    for (int e = 0; e < mesh.halfedges_size() / 2; ++e) {
        if (mesh.edge_deleted(e)) continue;
        sum += mesh.edge_length(e);
        ++count;
    }
    return sum / static_cast<double>(count);
}

std::vector<double> adaptive_target_length(const HalfEdgeMesh& mesh, int n_classes,
                                           const std::vector<double>& rates) {
    const double global = mean_edge_length(mesh);
    std::vector<double> targets(mesh.vertices_size(), global);

    std::vector<int> live;
    std::vector<Vec3> positions;
    for (int v = 0; v < mesh.vertices_size(); ++v) {
        if (mesh.vertex_deleted(v)) continue;
        live.push_back(v);
        positions.push_back(mesh.position(v));
    }
    const int k = 16;
    if (static_cast<int>(live.size()) <= k || n_classes < 2) return targets;

    PointCloud cloud(std::move(positions));
    auto variation = surface_variation(cloud, k);

    // near-constant curvature collapses to one class: when the bulk spread
    // of variation values is small relative to their median, adaptive
    // sizing degenerates to the uniform target
    std::vector<double> sorted = variation;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        return sorted[static_cast<std::size_t>(q * (sorted.size() - 1))];
    };
    double spread = quantile(0.9) - quantile(0.1);
    double median = quantile(0.5);
    if (spread <= median || spread <= 1e-12) return targets;

    // rank split with tie collapse, as in classify_by_curvature
    const std::size_t n = variation.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return variation[a] < variation[b]; });
    std::vector<int> cls(n, 0);
    std::size_t run_start = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (pos > 0 && variation[order[pos]] != variation[order[pos - 1]]) run_start = pos;
        cls[order[pos]] = static_cast<int>(run_start * static_cast<std::size_t>(n_classes) / n);
    }

    auto weight_of = [&](int c) {
        return c < static_cast<int>(rates.size()) && rates[c] > 0.0 ? rates[c] : 1.0;
    };
    double mean_weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean_weight += weight_of(cls[i]);
    mean_weight /= static_cast<double>(n);

    for (std::size_t i = 0; i < n; ++i) {
        targets[live[i]] = global * mean_weight / weight_of(cls[i]);
    }
    return targets;
}

RemeshStats isotropic_remesh(HalfEdgeMesh& mesh, const RemeshParams& params) {
    if (params.iterations < 1) raise(ErrorCode::InvalidParam, "iterations must be >= 1");
    if (mesh.n_faces() == 0) raise(ErrorCode::NonManifoldInput, "remesh input has no faces");
    mesh.garbage_collect();

    RemeshStats stats;
    stats.q_avg_initial = current_q_avg(mesh);

    long carried_deficit = 0;
    for (int iteration = 0; iteration < params.iterations; ++iteration) {
        RemeshIteration iter_stats;
        const double global_l = mean_edge_length(mesh);
        iter_stats.mean_edge = global_l;

        std::vector<double> target;
        if (params.adaptive) {
            target = adaptive_target_length(mesh, params.adaptive_classes, params.adaptive_rates);
        } else {
            target.assign(mesh.vertices_size(), global_l);
        }
        auto edge_target = [&](int va, int vb) { return 0.5 * (target[va] + target[vb]); };

        // --- (b) split every long edge at its midpoint ----------------------
        long splits = 0;
        bool more = true;
        while (more) {
            more = false;
            struct LongEdge {
                double length;
                int edge;
            };
            std::vector<LongEdge> long_edges;
            for (int e = 0; e < mesh.halfedges_size() / 2; ++e) {
                if (mesh.edge_deleted(e)) continue;
                int va = mesh.to_vertex(2 * e), vb = mesh.to_vertex(2 * e + 1);
                double len = mesh.edge_length(e);
                if (len > (4.0 / 3.0) * edge_target(va, vb)) long_edges.push_back({len, e});
            }
            std::sort(long_edges.begin(), long_edges.end(), [](const LongEdge& a, const LongEdge& b) {
                if (a.length != b.length) return a.length > b.length;
                return a.edge < b.edge;
            });
            for (const auto& [len, e] : long_edges) {
                if (mesh.edge_deleted(e)) continue;
                int va = mesh.to_vertex(2 * e), vb = mesh.to_vertex(2 * e + 1);
                if (!(mesh.edge_length(e) > (4.0 / 3.0) * edge_target(va, vb))) continue;

                EulerCounts before = counts_of(mesh);
                bool interior = !mesh.is_boundary_edge(e);
                int v = mesh.split_edge(e, mesh.edge_midpoint(e));
#ifndef NDEBUG
                mesh.check_integrity();
#endif
                expect_delta(before, counts_of(mesh), 1, interior ? 3 : 2, interior ? 2 : 1,
                             "split");
                if (mesh.flag(va) == VertexFlag::ExternalEdge &&
                    mesh.flag(vb) == VertexFlag::ExternalEdge) {
                    mesh.set_flag(v, VertexFlag::ExternalEdge);
                }
                target.push_back(edge_target(va, vb));
                ++splits;
                more = true;
            }
        }
        iter_stats.splits = splits;

        // --- (c) collapse short edges, shortest first ------------------------
        // budget: this iteration's splits plus any deficit left over from
        // earlier iterations (the point-count control contract)
        const long budget = splits + carried_deficit;
        long collapses = 0;
        bool progressed = true;
        while (collapses < budget && progressed) {
            progressed = false;
            struct ShortEdge {
                double length;
                int edge;
            };
            std::vector<ShortEdge> short_edges;
            for (int e = 0; e < mesh.halfedges_size() / 2; ++e) {
                if (mesh.edge_deleted(e)) continue;
                int va = mesh.to_vertex(2 * e), vb = mesh.to_vertex(2 * e + 1);
                double len = mesh.edge_length(e);
                if (len < 0.8 * edge_target(va, vb)) short_edges.push_back({len, e});
            }
            std::sort(short_edges.begin(), short_edges.end(),
                      [](const ShortEdge& a, const ShortEdge& b) {
                          if (a.length != b.length) return a.length < b.length;
                          return a.edge < b.edge;
                      });

            for (const auto& [len, e] : short_edges) {
                if (collapses >= budget) break; // budget met
                if (mesh.edge_deleted(e)) continue;
                int va = mesh.to_vertex(2 * e + 1), vb = mesh.to_vertex(2 * e);
                if (!(mesh.edge_length(e) < 0.8 * edge_target(va, vb))) continue;

                const bool a_ext = mesh.flag(va) == VertexFlag::ExternalEdge;
                const bool b_ext = mesh.flag(vb) == VertexFlag::ExternalEdge;
                // the paper's guard: an endpoint that anchors a crease makes
                // the whole edge ineligible
                const bool a_guarded =
                    a_ext && external_neighbor_count(mesh, va) >= params.crease_guard_min_neighbors;
                const bool b_guarded =
                    b_ext && external_neighbor_count(mesh, vb) >= params.crease_guard_min_neighbors;
                if (a_guarded || b_guarded) continue;

                if (params.preserve_edges &&
                    (mesh.is_boundary_vertex(va) || mesh.is_boundary_vertex(vb))) {
                    continue;
                }

                // collapse direction: the protected endpoint survives
                int from = va, into = vb;
                Vec3 pos;
                if (a_ext != b_ext) {
                    // keep the crease: ordinary endpoint folds into the feature
                    from = a_ext ? vb : va;
                    into = a_ext ? va : vb;
                    pos = mesh.position(into);
                } else if (mesh.is_boundary_vertex(va) != mesh.is_boundary_vertex(vb)) {
                    from = mesh.is_boundary_vertex(va) ? vb : va;
                    into = mesh.is_boundary_vertex(va) ? va : vb;
                    pos = mesh.position(into);
                } else {
                    pos = mesh.edge_midpoint(e);
                }

                int h = mesh.find_halfedge(from, into);
                if (h == HalfEdgeMesh::kInvalid || !mesh.is_collapse_ok(h)) continue;

                // geometric vetoes: no overlong result edges, no flipped faces
                bool veto = false;
                auto check_ring = [&](int center) {
                    mesh.for_each_outgoing(center, [&](int g) {
                        if (veto) return;
                        int w = mesh.to_vertex(g);
                        if (w == from || w == into) return;
                        if ((pos - mesh.position(w)).norm() >
                            (4.0 / 3.0) * edge_target(into, w)) {
                            veto = true;
                        }
                    });
                };
                check_ring(from);
                check_ring(into);
                if (!veto) {
                    auto face_flips = [&](int center) {
                        mesh.for_each_outgoing(center, [&](int g) {
                            if (veto) return;
                            int f = mesh.face(g);
                            if (f == HalfEdgeMesh::kInvalid) return;
                            auto t = mesh.face_vertices(f);
                            if (t[0] == from || t[1] == from || t[2] == from) {
                                if (t[0] == into || t[1] == into || t[2] == into) return;
                            }
                            Vec3 p[3], q[3];
                            for (int i3 = 0; i3 < 3; ++i3) {
                                p[i3] = mesh.position(t[i3]);
                                q[i3] = (t[i3] == from || t[i3] == into) ? pos
                                                                         : mesh.position(t[i3]);
                            }
                            Vec3 n0 = (p[1] - p[0]).cross(p[2] - p[0]);
                            Vec3 n1 = (q[1] - q[0]).cross(q[2] - q[0]);
                            if (n1.norm() <= 0.0 || n0.dot(n1) <= 0.0) veto = true;
                        });
                    };
                    face_flips(from);
                    face_flips(into);
                }
                if (veto) continue;

                EulerCounts before = counts_of(mesh);
                bool boundary_edge = mesh.is_boundary_edge(e);
                VertexFlag merged_flag = (a_ext || b_ext) ? VertexFlag::ExternalEdge
                                                          : VertexFlag::Ordinary;
                double merged_target = 0.5 * (target[va] + target[vb]);
                mesh.collapse_edge(h, pos);
#ifndef NDEBUG
                mesh.check_integrity();
#endif
                expect_delta(before, counts_of(mesh), -1, boundary_edge ? -2 : -3,
                             boundary_edge ? -1 : -2, "collapse");
                mesh.set_flag(into, merged_flag);
                target[into] = merged_target;
                ++collapses;
                progressed = true;
            }
        }
        carried_deficit = budget - collapses;
        iter_stats.collapses = collapses;

        // --- (d) valence-improving flips -------------------------------------
        {
            auto target_valence = [&](int v) { return mesh.is_boundary_vertex(v) ? 4 : 6; };
            long flips = 0;
            for (int e = 0; e < mesh.halfedges_size() / 2; ++e) {
                if (mesh.edge_deleted(e) || mesh.is_boundary_edge(e)) continue;
                int va = mesh.to_vertex(2 * e), vb = mesh.to_vertex(2 * e + 1);
                if (mesh.flag(va) == VertexFlag::ExternalEdge &&
                    mesh.flag(vb) == VertexFlag::ExternalEdge) {
                    continue; // never cut across a crease
                }
                if (!mesh.is_flip_ok(e)) continue;

                int h = 2 * e;
                int vc = mesh.to_vertex(mesh.next(h));
                int vd = mesh.to_vertex(mesh.next(HalfEdgeMesh::twin(h)));

                auto dev2 = [&](int v, int delta) {
                    double d = static_cast<double>(mesh.valence(v) + delta - target_valence(v));
                    return d * d;
                };
                double before_dev = dev2(va, 0) + dev2(vb, 0) + dev2(vc, 0) + dev2(vd, 0);
                double after_dev = dev2(va, -1) + dev2(vb, -1) + dev2(vc, 1) + dev2(vd, 1);
                if (!(after_dev < before_dev)) continue;

                // obtuse veto on both post-flip triangles
                const Vec3 &pa = mesh.position(va), &pb = mesh.position(vb);
                const Vec3 &pc = mesh.position(vc), &pd = mesh.position(vd);
                auto max_angle = [](const Vec3& x, const Vec3& y, const Vec3& z) {
                    auto corner = [](const Vec3& at, const Vec3& p, const Vec3& q) {
                        Vec3 u = p - at, v = q - at;
                        double nu = u.norm(), nv = v.norm();
                        if (nu <= 0.0 || nv <= 0.0) return 180.0;
                        return std::acos(std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0)) * 180.0 /
                               M_PI;
                    };
                    return std::max({corner(x, y, z), corner(y, z, x), corner(z, x, y)});
                };
                if (max_angle(pc, pd, pa) >= 90.0 || max_angle(pd, pc, pb) >= 90.0) continue;

                EulerCounts before = counts_of(mesh);
                mesh.flip_edge(e);
#ifndef NDEBUG
                mesh.check_integrity();
#endif
                expect_delta(before, counts_of(mesh), 0, 0, 0, "flip");
                ++flips;
            }
            iter_stats.flips = flips;
        }

        // --- (e) tangential smoothing ----------------------------------------
        {
            std::vector<std::pair<int, Vec3>> moves;
            for (int v = 0; v < mesh.vertices_size(); ++v) {
                if (mesh.vertex_deleted(v) || mesh.is_isolated(v)) continue;
                if (mesh.flag(v) == VertexFlag::ExternalEdge) continue;
                if (mesh.is_boundary_vertex(v)) continue;

                Vec3 centroid = Vec3::Zero();
                int count = 0;
                mesh.for_each_outgoing(v, [&](int h) {
                    centroid += mesh.position(mesh.to_vertex(h));
                    ++count;
                });
                if (count == 0) continue;
                centroid /= static_cast<double>(count);

                Vec3 normal = mesh.vertex_normal(v);
                Vec3 d = centroid - mesh.position(v);
                Vec3 tangential = d - normal.dot(d) * normal;
                moves.emplace_back(v, mesh.position(v) + params.smoothing_lambda * tangential);
            }
            for (const auto& [v, p] : moves) mesh.set_position(v, p);
        }

        mesh.garbage_collect();
#ifdef NDEBUG
        mesh.check_integrity();
#endif
        iter_stats.q_avg = current_q_avg(mesh);
        stats.iterations.push_back(iter_stats);
    }
    stats.vertex_deficit = carried_deficit;
    return stats;
}

} // namespace voxmesh
