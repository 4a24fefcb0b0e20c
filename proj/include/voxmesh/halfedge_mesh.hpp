#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

/// Per-vertex feature class carried through the pipeline.
enum class VertexFlag : std::uint8_t {
    Ordinary = 0,
    ExternalEdge = 1,
};

struct MeshTopology {
    long vertices = 0; // live, non-isolated counted separately
    long edges = 0;
    long faces = 0;
    long isolated_vertices = 0;
    int components = 0;      // connected components (via edges)
    int boundary_loops = 0;  // total over components
    long euler_characteristic = 0;
    int genus_sum = 0; // sum over components of (2 - b_i - chi_i)/2
    bool closed = false;
};

/// Oriented 2-manifold-with-boundary triangle mesh.
///
/// Index-based half-edge structure: halfedges are stored in twin pairs
/// (twin(h) == h^1, edge(h) == h/2). Boundary halfedges carry face() == -1
/// and form linked boundary loops. Interior edges have exactly two incident
/// faces, boundary edges exactly one; construction enforces this and repairs
/// inconsistent winding by BFS flipping per connected component.
class HalfEdgeMesh {
public:
    static constexpr int kInvalid = -1;

    HalfEdgeMesh() = default;

    /// Builds connectivity from a triangle soup. Throws NonManifoldEdge when
    /// an undirected edge has more than two incident faces, OrientationError
    /// when no global flip assignment exists, DegenerateInput on faces with
    /// repeated vertex indices.
    static HalfEdgeMesh build(std::vector<Vec3> positions,
                              const std::vector<std::array<int, 3>>& faces);

    // --- counts -----------------------------------------------------------
    int n_vertices() const { return n_live_vertices_; }
    int n_edges() const { return n_live_edges_; }
    int n_faces() const { return n_live_faces_; }
    int vertices_size() const { return static_cast<int>(vpos_.size()); }
    int halfedges_size() const { return static_cast<int>(hnext_.size()); }
    int faces_size() const { return static_cast<int>(fhalf_.size()); }
    bool has_garbage() const { return has_garbage_; }

    // --- element access ----------------------------------------------------
    const Vec3& position(int v) const { return vpos_[v]; }
    void set_position(int v, const Vec3& p) { vpos_[v] = p; }
    VertexFlag flag(int v) const { return vflag_[v]; }
    void set_flag(int v, VertexFlag f) { vflag_[v] = f; }

    bool vertex_deleted(int v) const { return vdel_[v]; }
    bool edge_deleted(int e) const { return edel_[e]; }
    bool face_deleted(int f) const { return fdel_[f]; }

    // --- halfedge connectivity ---------------------------------------------
    static int twin(int h) { return h ^ 1; }
    static int edge_of(int h) { return h >> 1; }
    static int halfedge_of_edge(int e, int side = 0) { return (e << 1) | side; }
    int next(int h) const { return hnext_[h]; }
    int prev(int h) const { return hprev_[h]; }
    int to_vertex(int h) const { return hvert_[h]; }
    int from_vertex(int h) const { return hvert_[twin(h)]; }
    int face(int h) const { return hface_[h]; }
    int halfedge(int v) const { return vhalf_[v]; } // outgoing; boundary-preferred
    int face_halfedge(int f) const { return fhalf_[f]; }

    bool is_boundary_halfedge(int h) const { return hface_[h] == kInvalid; }
    bool is_boundary_edge(int e) const {
        return is_boundary_halfedge(2 * e) || is_boundary_halfedge(2 * e + 1);
    }
    bool is_boundary_vertex(int v) const;
    bool is_isolated(int v) const { return vhalf_[v] == kInvalid; }

    /// Halfedge from a to b, or kInvalid.
    int find_halfedge(int a, int b) const;

    int valence(int v) const;

    /// Visits each outgoing halfedge of v exactly once (full fan at disk and
    /// half-disk vertices).
    void for_each_outgoing(int v, const std::function<void(int)>& fn) const;

    std::array<int, 3> face_vertices(int f) const;

    double edge_length(int e) const {
        return (vpos_[hvert_[2 * e]] - vpos_[hvert_[2 * e + 1]]).norm();
    }
    Vec3 edge_midpoint(int e) const {
        return 0.5 * (vpos_[hvert_[2 * e]] + vpos_[hvert_[2 * e + 1]]);
    }

    Vec3 face_normal(int f) const;          // unit, zero for degenerate
    Vec3 vertex_normal(int v) const;        // area-weighted, unit
    double face_area(int f) const;

    // --- Euler-operation surgery (remesher building blocks) ----------------
    /// Topological feasibility of collapsing from(h) into to(h): link
    /// condition plus the boundary pinch rule.
    bool is_collapse_ok(int h) const;
    /// Collapses from(h) into to(h); to(h) is moved to `pos`.
    void collapse_edge(int h, const Vec3& pos);

    bool is_flip_ok(int e) const;
    void flip_edge(int e);

    /// Splits edge e at `pos`, subdividing each incident face. Returns the
    /// new vertex id.
    int split_edge(int e, const Vec3& pos);

    /// Compacts away deleted elements. Remapping is order-preserving, so
    /// results stay deterministic.
    void garbage_collect();

    // --- whole-mesh queries -------------------------------------------------
    /// (vertices, faces) extraction; includes isolated vertices, skips
    /// deleted elements. Round-trips through build().
    std::pair<std::vector<Vec3>, std::vector<std::array<int, 3>>> extract() const;
    std::vector<std::array<int, 3>> face_list() const;

    std::vector<std::vector<int>> boundary_loops() const; // halfedge ids per loop
    MeshTopology topology() const;

    /// Full structural audit; throws Error on any broken invariant.
    void check_integrity() const;

private:
    int new_vertex(const Vec3& p, VertexFlag flag);
    int new_edge(int va, int vb); // returns halfedge va->vb
    int new_face();
    void set_next(int h, int nxt) {
        hnext_[h] = nxt;
        hprev_[nxt] = h;
    }
    void adjust_outgoing(int v); // rotate vhalf_ to a boundary halfedge if any
    void remove_edge_merge(int h);  // collapse helper: drop edge of h, merge rings
    void remove_loop(int h);        // collapse helper: dissolve a 2-gon

    std::vector<Vec3> vpos_;
    std::vector<VertexFlag> vflag_;
    std::vector<int> vhalf_;
    std::vector<std::uint8_t> vdel_;

    std::vector<int> hnext_, hprev_, hvert_, hface_;
    std::vector<std::uint8_t> edel_;

    std::vector<int> fhalf_;
    std::vector<std::uint8_t> fdel_;

    int n_live_vertices_ = 0, n_live_edges_ = 0, n_live_faces_ = 0;
    bool has_garbage_ = false;
};

/// Spec-facing constructor name.
inline HalfEdgeMesh build_halfedge(std::vector<Vec3> vertices,
                                   const std::vector<std::array<int, 3>>& faces) {
    return HalfEdgeMesh::build(std::move(vertices), faces);
}

/// Repairs face winding by BFS over shared edges, flipping to match the
/// lowest-index face of each component. Throws NonManifoldEdge /
/// OrientationError / DegenerateInput; does not alter face order.
void orient_faces(std::size_t vertex_count, std::vector<std::array<int, 3>>& faces);

} // namespace voxmesh
