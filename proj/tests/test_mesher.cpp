#include <doctest.h>

#include "support/synthetic.hpp"
#include "voxmesh/initial_mesh.hpp"
#include "voxmesh/resample.hpp"
#include "voxmesh/voxel_grid.hpp"

using namespace voxmesh;

TEST_CASE("normals: plane samples all align") {
    auto cloud = testing::plane_cloud(500, 3);
    VoxelGrid grid(cloud, default_scale(cloud));
    auto normals = estimate_normals(cloud, grid, 12);
    for (const auto& n : normals) {
        CHECK(std::abs(n.z()) == doctest::Approx(1.0).epsilon(1e-6));
    }
    // after propagation all signs agree
    for (const auto& n : normals) CHECK(n.z() * normals[0].z() > 0.0);
}

TEST_CASE("normals: sphere orientation is consistently outward") {
    auto cloud = testing::sphere_cloud(3000, 7);
    VoxelGrid grid(cloud, default_scale(cloud));
    auto normals = estimate_normals(cloud, grid, 16);
    int aligned = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (normals[i].dot(cloud.points[i].normalized()) > 0.95) ++aligned;
    }
    CHECK(aligned >= static_cast<int>(cloud.size() * 99) / 100);
}

TEST_CASE("mesher: square of four points gives two triangles, one loop") {
    PointCloud quad(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0),
                                      Vec3(0, 1, 0)});
    VoxelGrid grid(quad, 2.0);
    auto mesh = reconstruct_initial(quad, grid);
    mesh.check_integrity();
    CHECK(mesh.n_faces() == 2);
    CHECK(mesh.topology().boundary_loops == 1);
}

TEST_CASE("mesher: resampled sphere closes up") {
    auto cloud = testing::sphere_cloud(10000, 11);
    double scale = default_scale(cloud);
    VoxelGrid grid(cloud, scale);
    FeatureLabels labels(cloud.size(), 0);
    auto plan = plan_allocation(grid, labels, 2500, {1.0});
    auto sampled = resample(grid, plan, labels);
    REQUIRE(sampled.size() == 2500);

    VoxelGrid mesh_grid(sampled, grid);
    auto mesh = reconstruct_initial(sampled, mesh_grid);
    mesh.check_integrity();

    MeshTopology topo = mesh.topology();
    CHECK(topo.vertices + topo.isolated_vertices == 2500); // no vertex dropped
    CHECK(topo.components == 1);
    CHECK(topo.boundary_loops == 0);
    CHECK(topo.euler_characteristic == 2);

    // no face spans non-adjacent boxes
    for (int f = 0; f < mesh.faces_size(); ++f) {
        if (mesh.face_deleted(f)) continue;
        auto t = mesh.face_vertices(f);
        for (int a = 0; a < 3; ++a) {
            for (int b = a + 1; b < 3; ++b) {
                CHECK(adjacent(mesh_grid.box_of_position(mesh.position(t[a])),
                               mesh_grid.box_of_position(mesh.position(t[b]))));
            }
        }
    }
}

TEST_CASE("mesher: open plane keeps a boundary; closed sphere has few boundary edges") {
    auto plane = testing::plane_cloud(2000, 13);
    VoxelGrid pgrid(plane, default_scale(plane));
    FeatureLabels labels(plane.size(), 0);
    auto plan = plan_allocation(pgrid, labels, 800, {1.0});
    auto sampled = resample(pgrid, plan, labels);
    VoxelGrid sgrid(sampled, pgrid);
    auto mesh = reconstruct_initial(sampled, sgrid);
    mesh.check_integrity();
    CHECK(mesh.topology().boundary_loops >= 1);

    auto sphere = testing::sphere_cloud(6000, 17);
    VoxelGrid ggrid(sphere, default_scale(sphere));
    FeatureLabels slabels(sphere.size(), 0);
    auto splan = plan_allocation(ggrid, slabels, 1500, {1.0});
    auto ssampled = resample(ggrid, splan, slabels);
    VoxelGrid ssgrid(ssampled, ggrid);
    auto smesh = reconstruct_initial(ssampled, ssgrid);
    long boundary_edges = 0;
    for (int e = 0; e < smesh.halfedges_size() / 2; ++e) {
        if (!smesh.edge_deleted(e) && smesh.is_boundary_edge(e)) ++boundary_edges;
    }
    CHECK(boundary_edges * 100 <= smesh.n_edges());
}

TEST_CASE("mesher: degenerate input raises") {
    PointCloud line(std::vector<Vec3>{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
    VoxelGrid grid(line, 5.0);
    CHECK_THROWS_AS(reconstruct_initial(line, grid), Error);
}
