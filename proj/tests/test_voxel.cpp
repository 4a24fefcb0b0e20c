#include <doctest.h>

#include <cmath>

#include "support/synthetic.hpp"
#include "voxmesh/voxel_grid.hpp"

using namespace voxmesh;

TEST_CASE("default scale arithmetic") {
    {
        auto cloud = testing::plane_cloud(1000, 3);
        for (auto& p : cloud.points) p *= 10.0;
        CHECK(default_scale(cloud) == doctest::Approx(2.0 * bounding_box(cloud).longest_edge() /
                                                      std::cbrt(1000.0)));
    }
    {
        std::vector<Vec3> corners;
        for (int i = 0; i < 8; ++i) {
            corners.emplace_back(i & 1 ? 4.0 : 0.0, i & 2 ? 4.0 : 0.0, i & 4 ? 4.0 : 0.0);
        }
        CHECK(default_scale(PointCloud(corners)) == doctest::Approx(4.0));
    }
    {
        auto cloud = testing::sphere_cloud(50000, 5, 0.5); // longest border 1
        CHECK(default_scale(cloud) ==
              doctest::Approx(2.0 / std::cbrt(50000.0)).epsilon(1e-3));
        CHECK(default_scale(cloud) == doctest::Approx(0.05429).epsilon(1e-2));
    }
    CHECK_THROWS_AS(default_scale(PointCloud(std::vector<Vec3>{Vec3(1, 1, 1)})), Error);
}

TEST_CASE("grid membership") {
    {
        PointCloud one(std::vector<Vec3>{Vec3(5, 5, 5)});
        VoxelGrid grid(one, 1.0);
        CHECK(grid.occupied_count() == 1);
        CHECK(grid.members(grid.box_of_point(0)).size() == 1);
    }
    {
        PointCloud two(std::vector<Vec3>{Vec3(0.1, 0, 0), Vec3(1.1, 0, 0)});
        VoxelGrid grid(two, 1.0);
        CHECK(grid.box_of_point(0) == BoxIndex{0, 0, 0});
        CHECK(grid.box_of_point(1) == BoxIndex{1, 0, 0});
    }
    CHECK_THROWS_AS(VoxelGrid(testing::sphere_cloud(10, 1), 0.0), Error);
}

TEST_CASE("grid re-bucketing oracle on a random cloud") {
    auto cloud = testing::sphere_cloud(10000, 11);
    double scale = default_scale(cloud);
    VoxelGrid grid(cloud, scale);

    AABB box = bounding_box(cloud);
    std::size_t total = 0;
    for (const auto& [index, members] : grid.boxes()) {
        total += members.size();
        for (int p : members) {
            CHECK(grid.box_of_point(p) == index);
            // independent floor-division pass (max-face points clamp inward)
            Vec3 rel = (cloud.points[p] - box.min) / scale;
            BoxIndex want{static_cast<int>(std::floor(rel.x())),
                          static_cast<int>(std::floor(rel.y())),
                          static_cast<int>(std::floor(rel.z()))};
            BoxIndex got = grid.box_of_point(p);
            CHECK(got.i <= want.i);
            CHECK(got.j <= want.j);
            CHECK(got.k <= want.k);
            bool exact = want == got;
            bool clamped = (cloud.points[p].x() == box.max.x() && want.i == got.i + 1) ||
                           (cloud.points[p].y() == box.max.y() && want.j == got.j + 1) ||
                           (cloud.points[p].z() == box.max.z() && want.k == got.k + 1);
            CHECK((exact || clamped));
        }
    }
    CHECK(total == cloud.size());
}

TEST_CASE("adjacency truth table") {
    CHECK(adjacent(BoxIndex{0, 0, 0}, BoxIndex{1, 1, 1}));
    CHECK_FALSE(adjacent(BoxIndex{0, 0, 0}, BoxIndex{2, 0, 0}));
    CHECK(adjacent(BoxIndex{0, 0, 0}, BoxIndex{0, 0, 0}));
    CHECK(adjacent(BoxIndex{-1, 3, 2}, BoxIndex{0, 2, 1}));
    CHECK_FALSE(adjacent(BoxIndex{-1, 3, 2}, BoxIndex{1, 3, 2}));
}

TEST_CASE("round color parity table") {
    CHECK(round_color(BoxIndex{0, 0, 0}) == 0);
    CHECK(round_color(BoxIndex{3, 5, 2}) == 3);
    CHECK(round_color(BoxIndex{1, 0, 0}) == 1);
    CHECK(round_color(BoxIndex{0, 1, 0}) == 2);
    CHECK(round_color(BoxIndex{0, 0, 1}) == 4);
    CHECK(round_color(BoxIndex{-1, -1, -1}) == 7);

    // same-color boxes are never adjacent: exhaustive over a 6^3 block
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
            for (int k = 0; k < 6; ++k) {
                for (int i2 = 0; i2 < 6; ++i2) {
                    for (int j2 = 0; j2 < 6; ++j2) {
                        for (int k2 = 0; k2 < 6; ++k2) {
                            BoxIndex a{i, j, k}, b{i2, j2, k2};
                            if (a == b) continue;
                            if (round_color(a) == round_color(b)) {
                                CHECK_FALSE(adjacent(a, b));
                            }
                        }
                    }
                }
            }
        }
    }
}

TEST_CASE("intrinsic distance basics") {
    {
        PointCloud two(std::vector<Vec3>{Vec3(0.1, 0.1, 0), Vec3(0.4, 0.2, 0)});
        VoxelGrid grid(two, 1.0);
        auto d = grid.intrinsic_distance(0, 1);
        REQUIRE(d.has_value());
        CHECK(*d == doctest::Approx((two.points[0] - two.points[1]).norm()));
    }
    {
        // two occupied boxes three cells apart: unreachable
        PointCloud cloud(std::vector<Vec3>{Vec3(0.5, 0.5, 0.5), Vec3(3.5, 0.5, 0.5)});
        VoxelGrid grid(cloud, 1.0);
        CHECK_FALSE(grid.intrinsic_distance(0, 1).has_value());
    }
}

TEST_CASE("intrinsic distance tracks an S-curve arc length") {
    // planar S-curve (t, sin(2 pi t) / 4), densely sampled
    const int n = 4000;
    std::vector<Vec3> pts;
    pts.reserve(n);
    double arc = 0.0;
    Vec3 prev(0, 0, 0);
    for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / (n - 1);
        Vec3 p(t, std::sin(2.0 * M_PI * t) / 4.0, 0.0);
        if (i > 0) arc += (p - prev).norm();
        prev = p;
        pts.push_back(p);
    }
    PointCloud cloud(std::move(pts));
    VoxelGrid grid(cloud, 0.05); // well below the curve feature size

    auto d = grid.intrinsic_distance(0, n - 1);
    REQUIRE(d.has_value());
    double euclid = (cloud.points[0] - cloud.points[n - 1]).norm();
    CHECK(*d >= euclid);
    CHECK(*d == doctest::Approx(arc).epsilon(0.10));
}

TEST_CASE("intrinsic distance metric axioms on random small grids") {
    for (unsigned seed : {2u, 9u}) {
        auto cloud = testing::sphere_cloud(60, seed);
        VoxelGrid grid(cloud, 0.7);
        auto gen = testing::rng(seed + 100);
        std::uniform_int_distribution<int> pick(0, 59);
        for (int trial = 0; trial < 40; ++trial) {
            int a = pick(gen), b = pick(gen), c = pick(gen);
            auto ab = grid.intrinsic_distance(a, b);
            auto ba = grid.intrinsic_distance(b, a);
            REQUIRE(ab.has_value() == ba.has_value());
            if (!ab) continue;
            CHECK(*ab == doctest::Approx(*ba));
            CHECK(*ab >= (cloud.points[a] - cloud.points[b]).norm() - 1e-12);
            if (a == b) CHECK(*ab == doctest::Approx(0.0));
            auto ac = grid.intrinsic_distance(a, c);
            auto cb = grid.intrinsic_distance(c, b);
            if (ac && cb) CHECK(*ab <= *ac + *cb + 1e-9);
        }
    }
}
