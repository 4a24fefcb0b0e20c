#include "voxmesh/halfedge_mesh.hpp"

#include <algorithm>
#include <queue>
#include <string>
#include <unordered_map>

namespace voxmesh {

namespace {

inline std::uint64_t undirected_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

} // namespace

void orient_faces(std::size_t vertex_count, std::vector<std::array<int, 3>>& faces) {
    const int nf = static_cast<int>(faces.size());
    for (int f = 0; f < nf; ++f) {
        const auto& t = faces[f];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= static_cast<int>(vertex_count)) {
                raise(ErrorCode::InvalidParam,
                      "face " + std::to_string(f) + " references vertex " + std::to_string(t[k]));
            }
        }
        if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0]) {
            raise(ErrorCode::DegenerateInput,
                  "face " + std::to_string(f) + " has repeated vertex indices");
        }
    }

    // undirected edge -> incident faces
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_faces;
    edge_faces.reserve(faces.size() * 2);
    for (int f = 0; f < nf; ++f) {
        for (int k = 0; k < 3; ++k) {
            std::uint64_t key = undirected_key(faces[f][k], faces[f][(k + 1) % 3]);
            auto [it, fresh] = edge_faces.try_emplace(key, std::array<int, 2>{f, -1});
            if (!fresh) {
                if (it->second[1] != -1) {
                    raise(ErrorCode::NonManifoldEdge,
                          "edge (" + std::to_string(static_cast<int>(key >> 32)) + "," +
                              std::to_string(static_cast<int>(key & 0xffffffffu)) +
                              ") has more than two incident faces");
                }
                it->second[1] = f;
            }
        }
    }

    // BFS winding repair per component, seeded at the lowest-index face.
    std::vector<std::uint8_t> visited(nf, 0);
    std::queue<int> queue;
    for (int seed = 0; seed < nf; ++seed) {
        if (visited[seed]) continue;
        visited[seed] = 1;
        queue.push(seed);
        while (!queue.empty()) {
            int f = queue.front();
            queue.pop();
            for (int k = 0; k < 3; ++k) {
                int a = faces[f][k], b = faces[f][(k + 1) % 3];
                auto& inc = edge_faces.at(undirected_key(a, b));
                int g = inc[0] == f ? inc[1] : inc[0];
                if (g < 0) continue;
                // g must traverse the shared edge as b->a
                bool g_same_direction = false;
                for (int j = 0; j < 3; ++j) {
                    if (faces[g][j] == a && faces[g][(j + 1) % 3] == b) g_same_direction = true;
                }
                if (g_same_direction) {
                    if (visited[g]) {
                        raise(ErrorCode::OrientationError,
                              "faces " + std::to_string(f) + " and " + std::to_string(g) +
                                  " cannot be consistently oriented");
                    }
                    std::swap(faces[g][1], faces[g][2]);
                }
                if (!visited[g]) {
                    visited[g] = 1;
                    queue.push(g);
                }
            }
        }
    }
}

HalfEdgeMesh HalfEdgeMesh::build(std::vector<Vec3> positions,
                                 const std::vector<std::array<int, 3>>& faces_in) {
    std::vector<std::array<int, 3>> faces = faces_in;
    orient_faces(positions.size(), faces);

    HalfEdgeMesh m;
    const int nv = static_cast<int>(positions.size());
    m.vpos_ = std::move(positions);
    m.vflag_.assign(nv, VertexFlag::Ordinary);
    m.vhalf_.assign(nv, kInvalid);
    m.vdel_.assign(nv, 0);
    m.n_live_vertices_ = nv;

    std::unordered_map<std::uint64_t, int> edge_ids;
    edge_ids.reserve(faces.size() * 2);

    auto halfedge_for = [&](int a, int b) {
        std::uint64_t key = undirected_key(a, b);
        auto it = edge_ids.find(key);
        if (it == edge_ids.end()) {
            int h = m.new_edge(a, b);
            edge_ids.emplace(key, edge_of(h));
            return h;
        }
        int e = it->second;
        // first-encounter direction decides which side is which
        return m.hvert_[2 * e] == b ? 2 * e : 2 * e + 1;
    };

    for (const auto& tri : faces) {
        int f = m.new_face();
        int h01 = halfedge_for(tri[0], tri[1]);
        int h12 = halfedge_for(tri[1], tri[2]);
        int h20 = halfedge_for(tri[2], tri[0]);
        for (int h : {h01, h12, h20}) {
            if (m.hface_[h] != kInvalid) {
                raise(ErrorCode::OrientationError, "directed edge claimed by two faces");
            }
            m.hface_[h] = f;
        }
        m.fhalf_[f] = h01;
        m.set_next(h01, h12);
        m.set_next(h12, h20);
        m.set_next(h20, h01);
        m.vhalf_[tri[0]] = h01;
        m.vhalf_[tri[1]] = h12;
        m.vhalf_[tri[2]] = h20;
    }

    // Link boundary loops: for each boundary halfedge, rotate around its
    // target vertex to the first outgoing boundary halfedge in the same gap.
    const int nh = m.halfedges_size();
    for (int h = 0; h < nh; ++h) {
        if (m.hface_[h] != kInvalid) continue;
        int v = m.hvert_[h];
        int g = twin(h);
        int guard = 0;
        while (m.hface_[g] != kInvalid) {
            g = twin(m.hprev_[g]);
            if (++guard > nh) {
                raise(ErrorCode::NonManifoldEdge,
                      "broken fan around vertex " + std::to_string(v));
            }
        }
        m.set_next(h, g);
    }

    for (int v = 0; v < nv; ++v) m.adjust_outgoing(v);
    return m;
}

int HalfEdgeMesh::new_vertex(const Vec3& p, VertexFlag flag) {
    vpos_.push_back(p);
    vflag_.push_back(flag);
    vhalf_.push_back(kInvalid);
    vdel_.push_back(0);
    ++n_live_vertices_;
    return static_cast<int>(vpos_.size()) - 1;
}

int HalfEdgeMesh::new_edge(int va, int vb) {
    int h = static_cast<int>(hnext_.size());
    hnext_.insert(hnext_.end(), {kInvalid, kInvalid});
    hprev_.insert(hprev_.end(), {kInvalid, kInvalid});
    hvert_.insert(hvert_.end(), {vb, va});
    hface_.insert(hface_.end(), {kInvalid, kInvalid});
    edel_.push_back(0);
    ++n_live_edges_;
    return h;
}

int HalfEdgeMesh::new_face() {
    fhalf_.push_back(kInvalid);
    fdel_.push_back(0);
    ++n_live_faces_;
    return static_cast<int>(fhalf_.size()) - 1;
}

void HalfEdgeMesh::adjust_outgoing(int v) {
    int start = vhalf_[v];
    if (start == kInvalid) return;
    int g = start;
    do {
        if (hface_[g] == kInvalid) {
            vhalf_[v] = g;
            return;
        }
        g = twin(hprev_[g]);
    } while (g != start);
}

bool HalfEdgeMesh::is_boundary_vertex(int v) const {
    int h = vhalf_[v];
    return h != kInvalid && hface_[h] == kInvalid;
}

int HalfEdgeMesh::find_halfedge(int a, int b) const {
    int start = vhalf_[a];
    if (start == kInvalid) return kInvalid;
    int g = start;
    do {
        if (hvert_[g] == b) return g;
        g = twin(hprev_[g]);
    } while (g != start);
    return kInvalid;
}

int HalfEdgeMesh::valence(int v) const {
    int count = 0;
    for_each_outgoing(v, [&](int) { ++count; });
    return count;
}

void HalfEdgeMesh::for_each_outgoing(int v, const std::function<void(int)>& fn) const {
    int start = vhalf_[v];
    if (start == kInvalid) return;
    int g = start;
    do {
        fn(g);
        g = twin(hprev_[g]);
    } while (g != start);
}

std::array<int, 3> HalfEdgeMesh::face_vertices(int f) const {
    int h = fhalf_[f];
    return {hvert_[hprev_[h]], hvert_[h], hvert_[hnext_[h]]};
}

Vec3 HalfEdgeMesh::face_normal(int f) const {
    auto [a, b, c] = face_vertices(f);
    Vec3 n = (vpos_[b] - vpos_[a]).cross(vpos_[c] - vpos_[a]);
    double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3(0, 0, 0);
}

double HalfEdgeMesh::face_area(int f) const {
    auto [a, b, c] = face_vertices(f);
    return 0.5 * (vpos_[b] - vpos_[a]).cross(vpos_[c] - vpos_[a]).norm();
}

Vec3 HalfEdgeMesh::vertex_normal(int v) const {
    Vec3 n(0, 0, 0);
    for_each_outgoing(v, [&](int h) {
        int f = hface_[h];
        if (f == kInvalid) return;
        auto [a, b, c] = face_vertices(f);
        n += (vpos_[b] - vpos_[a]).cross(vpos_[c] - vpos_[a]); // area-weighted
    });
    double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3(0, 0, 0);
}

// --- collapse ---------------------------------------------------------------

bool HalfEdgeMesh::is_collapse_ok(int h) const {
    const int o = twin(h);
    const int v0 = hvert_[o];
    const int v1 = hvert_[h];

    int vl = kInvalid, vr = kInvalid;

    if (hface_[h] != kInvalid) {
        int h1 = hnext_[h];
        int h2 = hnext_[h1];
        vl = hvert_[h1];
        // both wing edges on the h-side boundary: collapse would leave a
        // dangling triangle
        if (hface_[twin(h1)] == kInvalid && hface_[twin(h2)] == kInvalid) return false;
    }
    if (hface_[o] != kInvalid) {
        int h1 = hnext_[o];
        int h2 = hnext_[h1];
        vr = hvert_[h1];
        if (hface_[twin(h1)] == kInvalid && hface_[twin(h2)] == kInvalid) return false;
    }
    if (vl == vr) return false; // covers the no-face-at-all case too

    // interior edge joining two boundary vertices would pinch the surface
    if (is_boundary_vertex(v0) && is_boundary_vertex(v1) && hface_[h] != kInvalid &&
        hface_[o] != kInvalid) {
        return false;
    }

    // link condition: shared one-ring neighbors must be exactly {vl, vr}
    bool ok = true;
    for_each_outgoing(v0, [&](int g) {
        int vv = hvert_[g];
        if (vv != v1 && vv != vl && vv != vr && find_halfedge(vv, v1) != kInvalid) ok = false;
    });
    return ok;
}

void HalfEdgeMesh::remove_edge_merge(int h) {
    const int o = twin(h);
    const int hn = hnext_[h], hp = hprev_[h];
    const int on = hnext_[o], op = hprev_[o];
    const int fh = hface_[h], fo = hface_[o];
    const int v1 = hvert_[h], v0 = hvert_[o];

    // retarget every halfedge pointing at v0
    std::vector<int> incoming;
    for_each_outgoing(v0, [&](int g) { incoming.push_back(twin(g)); });
    for (int g : incoming) hvert_[g] = v1;

    set_next(hp, hn);
    set_next(op, on);

    if (fh != kInvalid) fhalf_[fh] = hn;
    if (fo != kInvalid) fhalf_[fo] = on;

    if (vhalf_[v1] == o) vhalf_[v1] = hn;
    adjust_outgoing(v1);
    vhalf_[v0] = kInvalid;

    vdel_[v0] = 1;
    --n_live_vertices_;
    edel_[edge_of(h)] = 1;
    --n_live_edges_;
    has_garbage_ = true;
}

void HalfEdgeMesh::remove_loop(int h) {
    // h belongs to a 2-gon (next(next(h)) == h); dissolve it by merging the
    // duplicate edge pair into one edge.
    const int h0 = h;
    const int h1 = hnext_[h0];
    const int o0 = twin(h0);
    const int o1 = twin(h1);
    const int v0 = hvert_[h0];
    const int v1 = hvert_[h1];
    const int fh = hface_[h0];
    const int fo = hface_[o0];

    set_next(h1, hnext_[o0]);
    set_next(hprev_[o0], h1);
    hface_[h1] = fo;

    vhalf_[v0] = h1;
    adjust_outgoing(v0);
    vhalf_[v1] = o1;
    adjust_outgoing(v1);

    if (fo != kInvalid && fhalf_[fo] == o0) fhalf_[fo] = h1;

    if (fh != kInvalid) {
        fdel_[fh] = 1;
        --n_live_faces_;
    }
    edel_[edge_of(h0)] = 1;
    --n_live_edges_;
    has_garbage_ = true;
}

void HalfEdgeMesh::collapse_edge(int h, const Vec3& pos) {
    const int h1 = hprev_[h];
    const int o0 = twin(h);
    const int o1 = hnext_[o0];
    const int v1 = hvert_[h];

    remove_edge_merge(h);
    if (hnext_[hnext_[h1]] == h1) remove_loop(h1);
    if (hnext_[hnext_[o1]] == o1) remove_loop(o1);

    vpos_[v1] = pos;
}

// --- flip --------------------------------------------------------------------

bool HalfEdgeMesh::is_flip_ok(int e) const {
    if (is_boundary_edge(e)) return false;
    const int a0 = 2 * e, b0 = 2 * e + 1;
    const int va1 = hvert_[hnext_[a0]];
    const int vb1 = hvert_[hnext_[b0]];
    if (va1 == vb1) return false;
    return find_halfedge(va1, vb1) == kInvalid;
}

void HalfEdgeMesh::flip_edge(int e) {
    const int a0 = 2 * e, b0 = 2 * e + 1;
    const int a1 = hnext_[a0], a2 = hnext_[a1];
    const int b1 = hnext_[b0], b2 = hnext_[b1];
    const int va0 = hvert_[a0], va1 = hvert_[a1];
    const int vb0 = hvert_[b0], vb1 = hvert_[b1];
    const int fa = hface_[a0], fb = hface_[b0];

    hvert_[a0] = va1;
    hvert_[b0] = vb1;

    set_next(a0, a2);
    set_next(a2, b1);
    set_next(b1, a0);

    set_next(b0, b2);
    set_next(b2, a1);
    set_next(a1, b0);

    hface_[a1] = fb;
    hface_[b1] = fa;

    fhalf_[fa] = a0;
    fhalf_[fb] = b0;

    if (vhalf_[va0] == b0) vhalf_[va0] = a1;
    if (vhalf_[vb0] == a0) vhalf_[vb0] = b1;
}

// --- split --------------------------------------------------------------------

int HalfEdgeMesh::split_edge(int e, const Vec3& pos) {
    const int h0 = 2 * e;  // A -> B
    const int o0 = 2 * e + 1; // B -> A
    const int f0 = hface_[h0];
    const int f3 = hface_[o0];
    const int vb = hvert_[h0];

    const int v = new_vertex(pos, VertexFlag::Ordinary);

    const int hvb = new_edge(v, vb); // v->B
    const int tvb = twin(hvb);       // B->v

    // capture ring info before rewiring
    const int h1 = hnext_[h0], h2 = hprev_[h0];
    const int o1 = hnext_[o0], o2 = hprev_[o0];

    hvert_[h0] = v; // edge (A,B) becomes (A,v)

    if (f0 != kInvalid) {
        const int vc = hvert_[h1];
        const int hvc = new_edge(v, vc); // v->C
        const int tcv = twin(hvc);       // C->v

        // face f0 -> (A, v, C)
        set_next(h0, hvc);
        set_next(hvc, h2);
        set_next(h2, h0);
        hface_[hvc] = f0;
        fhalf_[f0] = h0;

        // new face (v, B, C)
        const int fn = new_face();
        set_next(hvb, h1);
        set_next(h1, tcv);
        set_next(tcv, hvb);
        hface_[hvb] = fn;
        hface_[h1] = fn;
        hface_[tcv] = fn;
        fhalf_[fn] = hvb;
    } else {
        // boundary: splice v->B into the loop after h0
        set_next(h0, hvb);
        set_next(hvb, h1);
    }

    if (f3 != kInvalid) {
        const int vd = hvert_[o1];
        const int hvd = new_edge(v, vd); // v->D
        const int tdv = twin(hvd);       // D->v

        // face f3 -> (v, A, D)
        set_next(o0, o1);
        set_next(o1, tdv);
        set_next(tdv, o0);
        hface_[tdv] = f3;
        fhalf_[f3] = o0;

        // new face (B, v, D)
        const int fn = new_face();
        set_next(tvb, hvd);
        set_next(hvd, o2);
        set_next(o2, tvb);
        hface_[tvb] = fn;
        hface_[hvd] = fn;
        hface_[o2] = fn;
        fhalf_[fn] = tvb;
    } else {
        // boundary: splice B->v into the loop before o0
        set_next(o2, tvb);
        set_next(tvb, o0);
    }

    if (vhalf_[vb] == o0) vhalf_[vb] = tvb;
    vhalf_[v] = hvb;
    adjust_outgoing(v);
    adjust_outgoing(vb);
    return v;
}

// --- compaction ----------------------------------------------------------------

void HalfEdgeMesh::garbage_collect() {
    if (!has_garbage_) return;

    const int nv = vertices_size();
    const int ne = static_cast<int>(edel_.size());
    const int nf = faces_size();

    std::vector<int> vmap(nv, kInvalid), emap(ne, kInvalid), fmap(nf, kInvalid);
    int vc = 0, ec = 0, fc = 0;
    for (int v = 0; v < nv; ++v)
        if (!vdel_[v]) vmap[v] = vc++;
    for (int e = 0; e < ne; ++e)
        if (!edel_[e]) emap[e] = ec++;
    for (int f = 0; f < nf; ++f)
        if (!fdel_[f]) fmap[f] = fc++;

    auto hmap = [&](int h) {
        if (h == kInvalid) return kInvalid;
        int e = emap[h >> 1];
        return e == kInvalid ? kInvalid : (e << 1) | (h & 1);
    };

    std::vector<Vec3> vpos(vc);
    std::vector<VertexFlag> vflag(vc);
    std::vector<int> vhalf(vc);
    for (int v = 0; v < nv; ++v) {
        if (vdel_[v]) continue;
        vpos[vmap[v]] = vpos_[v];
        vflag[vmap[v]] = vflag_[v];
        vhalf[vmap[v]] = hmap(vhalf_[v]);
    }

    std::vector<int> hnext(2 * ec), hprev(2 * ec), hvert(2 * ec), hface(2 * ec);
    for (int e = 0; e < ne; ++e) {
        if (edel_[e]) continue;
        for (int side = 0; side < 2; ++side) {
            int h = 2 * e + side, nh = 2 * emap[e] + side;
            hnext[nh] = hmap(hnext_[h]);
            hprev[nh] = hmap(hprev_[h]);
            hvert[nh] = vmap[hvert_[h]];
            hface[nh] = hface_[h] == kInvalid ? kInvalid : fmap[hface_[h]];
        }
    }

    std::vector<int> fhalf(fc);
    for (int f = 0; f < nf; ++f)
        if (!fdel_[f]) fhalf[fmap[f]] = hmap(fhalf_[f]);

    vpos_ = std::move(vpos);
    vflag_ = std::move(vflag);
    vhalf_ = std::move(vhalf);
    vdel_.assign(vc, 0);
    hnext_ = std::move(hnext);
    hprev_ = std::move(hprev);
    hvert_ = std::move(hvert);
    hface_ = std::move(hface);
    edel_.assign(ec, 0);
    fhalf_ = std::move(fhalf);
    fdel_.assign(fc, 0);
    has_garbage_ = false;
}

// --- whole-mesh queries -----------------------------------------------------------

std::pair<std::vector<Vec3>, std::vector<std::array<int, 3>>> HalfEdgeMesh::extract() const {
    std::vector<int> vmap(vertices_size(), kInvalid);
    std::vector<Vec3> pos;
    pos.reserve(n_live_vertices_);
    for (int v = 0; v < vertices_size(); ++v) {
        if (vdel_[v]) continue;
        vmap[v] = static_cast<int>(pos.size());
        pos.push_back(vpos_[v]);
    }
    std::vector<std::array<int, 3>> faces;
    faces.reserve(n_live_faces_);
    for (int f = 0; f < faces_size(); ++f) {
        if (fdel_[f]) continue;
        auto [a, b, c] = face_vertices(f);
        faces.push_back({vmap[a], vmap[b], vmap[c]});
    }
    return {std::move(pos), std::move(faces)};
}

std::vector<std::array<int, 3>> HalfEdgeMesh::face_list() const {
    std::vector<std::array<int, 3>> faces;
    faces.reserve(n_live_faces_);
    for (int f = 0; f < faces_size(); ++f) {
        if (!fdel_[f]) faces.push_back(face_vertices(f));
    }
    return faces;
}

std::vector<std::vector<int>> HalfEdgeMesh::boundary_loops() const {
    std::vector<std::vector<int>> loops;
    std::vector<std::uint8_t> visited(halfedges_size(), 0);
    for (int h = 0; h < halfedges_size(); ++h) {
        if (edel_[h >> 1] || visited[h] || hface_[h] != kInvalid) continue;
        std::vector<int> loop;
        int g = h;
        do {
            visited[g] = 1;
            loop.push_back(g);
            g = hnext_[g];
        } while (g != h);
        loops.push_back(std::move(loop));
    }
    return loops;
}

MeshTopology HalfEdgeMesh::topology() const {
    MeshTopology info;

    const int nv = vertices_size();
    std::vector<int> parent(nv);
    for (int v = 0; v < nv; ++v) parent[v] = v;
    std::function<int(int)> find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };

    for (int e = 0; e < static_cast<int>(edel_.size()); ++e) {
        if (edel_[e]) continue;
        int a = find(hvert_[2 * e]), b = find(hvert_[2 * e + 1]);
        if (a != b) parent[a] = b;
    }

    std::unordered_map<int, std::array<long, 4>> comps; // root -> V,E,F,loops
    for (int v = 0; v < nv; ++v) {
        if (vdel_[v]) continue;
        if (vhalf_[v] == kInvalid) {
            ++info.isolated_vertices;
            continue;
        }
        ++comps[find(v)][0];
        ++info.vertices;
    }
    for (int e = 0; e < static_cast<int>(edel_.size()); ++e) {
        if (edel_[e]) continue;
        ++comps[find(hvert_[2 * e])][1];
        ++info.edges;
    }
    for (int f = 0; f < faces_size(); ++f) {
        if (fdel_[f]) continue;
        ++comps[find(face_vertices(f)[0])][2];
        ++info.faces;
    }
    for (const auto& loop : boundary_loops()) {
        ++comps[find(hvert_[loop.front()])][3];
        ++info.boundary_loops;
    }

    info.components = static_cast<int>(comps.size());
    info.euler_characteristic = info.vertices - info.edges + info.faces;
    for (const auto& [root, vef] : comps) {
        long chi = vef[0] - vef[1] + vef[2];
        info.genus_sum += static_cast<int>((2 - vef[3] - chi) / 2);
    }
    info.closed = info.boundary_loops == 0 && info.faces > 0;
    return info;
}

void HalfEdgeMesh::check_integrity() const {
    auto fail = [](const std::string& what) {
        raise(ErrorCode::NonManifoldInput, "integrity: " + what);
    };

    if (hnext_.size() != hprev_.size() || hnext_.size() != hvert_.size() ||
        hnext_.size() != hface_.size() || hnext_.size() != 2 * edel_.size()) {
        fail("array sizes inconsistent");
    }

    int live_v = 0, live_e = 0, live_f = 0;
    for (int v = 0; v < vertices_size(); ++v) {
        if (vdel_[v]) continue;
        ++live_v;
        int h = vhalf_[v];
        if (h == kInvalid) continue;
        if (edel_[h >> 1]) fail("vertex halfedge deleted");
        if (hvert_[twin(h)] != v) fail("vertex halfedge not outgoing");
        // boundary preference: if any outgoing is boundary, vhalf_ must be
        bool has_boundary = false;
        for_each_outgoing(v, [&](int g) { has_boundary |= hface_[g] == kInvalid; });
        if (has_boundary && hface_[h] != kInvalid) fail("vertex boundary halfedge not preferred");
    }
    for (int e = 0; e < static_cast<int>(edel_.size()); ++e) {
        if (edel_[e]) continue;
        ++live_e;
        for (int side = 0; side < 2; ++side) {
            int h = 2 * e + side;
            if (hnext_[h] == kInvalid || hprev_[h] == kInvalid) fail("unlinked halfedge");
            if (hnext_[hprev_[h]] != h || hprev_[hnext_[h]] != h) fail("next/prev mismatch");
            if (edel_[hnext_[h] >> 1] || edel_[hprev_[h] >> 1]) fail("link to deleted edge");
            int vto = hvert_[h];
            if (vto == kInvalid || vdel_[vto]) fail("halfedge targets dead vertex");
            if (hvert_[twin(hnext_[h])] != vto) fail("next does not continue at target");
            int f = hface_[h];
            if (f != kInvalid) {
                if (fdel_[f]) fail("halfedge in deleted face");
                if (hnext_[hnext_[hnext_[h]]] != h) fail("interior face not a triangle");
                if (hface_[hnext_[h]] != f) fail("face cycle crosses faces");
            }
        }
        if (hface_[2 * e] == kInvalid && hface_[2 * e + 1] == kInvalid) {
            fail("edge with no face on either side");
        }
    }
    for (int f = 0; f < faces_size(); ++f) {
        if (fdel_[f]) continue;
        ++live_f;
        int h = fhalf_[f];
        if (h == kInvalid || edel_[h >> 1] || hface_[h] != f) fail("face halfedge wrong");
        auto [a, b, c] = face_vertices(f);
        if (a == b || b == c || c == a) fail("degenerate face");
    }
    if (live_v != n_live_vertices_ || live_e != n_live_edges_ || live_f != n_live_faces_) {
        fail("live counters out of sync");
    }
}

} // namespace voxmesh
