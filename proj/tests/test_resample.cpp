#include <doctest.h>

#include <set>

#include "support/synthetic.hpp"
#include "voxmesh/neighbor_index.hpp"
#include "voxmesh/resample.hpp"

using namespace voxmesh;

TEST_CASE("edge classifier: plane is all ordinary") {
    auto cloud = testing::plane_cloud(600, 3);
    auto labels = classify_edge_points(cloud, 16, 0.05);
    for (int label : labels) CHECK(label == 0);
}

TEST_CASE("edge classifier: right-angle crease is detected near the fold") {
    // two half-planes meeting at the z-axis-aligned crease x = 0
    std::vector<Vec3> pts;
    auto gen = testing::rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 4000; ++i) {
        double a = uni(gen), b = uni(gen);
        if (i % 2 == 0) {
            pts.emplace_back(a, 0.0, b); // y = 0 plane
        } else {
            pts.emplace_back(0.0, a, b); // x = 0 plane
        }
    }
    PointCloud cloud(std::move(pts));
    auto labels = classify_edge_points(cloud, 16, 0.05);

    const double spacing = 1.0 / std::sqrt(2000.0);
    int false_far = 0, hits_near = 0, near_total = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        double crease_distance = std::max(cloud.points[i].x(), cloud.points[i].y());
        if (crease_distance <= spacing) {
            ++near_total;
            hits_near += labels[i];
        } else if (crease_distance > 8.0 * spacing) {
            false_far += labels[i];
        }
    }
    CHECK(near_total > 0);
    CHECK(hits_near * 10 > near_total * 6);                   // crease band flagged
    CHECK(false_far < static_cast<int>(cloud.size()) / 100); // flat region clean

    // labels flagged far from the crease stay rare overall
    int flagged = 0;
    double mean_crease_distance = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (labels[i]) {
            ++flagged;
            mean_crease_distance += std::max(cloud.points[i].x(), cloud.points[i].y());
        }
    }
    REQUIRE(flagged > 0);
    CHECK(mean_crease_distance / flagged <= 2.0 * spacing);
}

TEST_CASE("curvature classifier: plane collapses, sphere splits evenly") {
    auto plane = testing::plane_cloud(500, 7);
    auto labels = classify_by_curvature(plane, 16, 5);
    for (int label : labels) CHECK(label == 0);

    auto sphere = testing::sphere_cloud(1000, 13);
    labels = classify_by_curvature(sphere, 16, 5);
    std::array<int, 5> counts{};
    for (int label : labels) {
        REQUIRE(label >= 0);
        REQUIRE(label < 5);
        ++counts[label];
    }
    for (int c : counts) CHECK(std::abs(c - 200) <= 1);
}

TEST_CASE("curvature classifier: cylinder cap rim lands in the top class") {
    auto cloud = testing::capped_cylinder_cloud(6000, 19, 1.0, 2.0);
    auto labels = classify_by_curvature(cloud, 16, 5);
    int rim_top = 0, rim_total = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        double r = std::hypot(p.x(), p.y());
        bool on_rim = (std::abs(p.z()) < 0.05 || std::abs(p.z() - 2.0) < 0.05) &&
                      std::abs(r - 1.0) < 0.05;
        if (on_rim) {
            ++rim_total;
            if (labels[i] == 4) ++rim_top;
        }
    }
    REQUIRE(rim_total > 30);
    CHECK(rim_top > rim_total * 6 / 10);
}

TEST_CASE("allocation: single class proportional") {
    auto cloud = testing::sphere_cloud(1000, 3);
    VoxelGrid grid(cloud, default_scale(cloud));
    FeatureLabels labels(cloud.size(), 0);
    auto plan = plan_allocation(grid, labels, 100, {1.0});
    long total = 0;
    for (const auto& [key, quota] : plan.quotas) {
        total += quota;
        CHECK(quota <= static_cast<int>(grid.members(key.first).size()));
    }
    CHECK(total == 100);
}

TEST_CASE("allocation: the [3,3,4] target-5 largest-remainder fixture") {
    // three boxes along x, populations 3, 3, 4
    std::vector<Vec3> pts;
    for (int i = 0; i < 3; ++i) pts.emplace_back(0.5, 0.5 + 0.1 * i, 0.5);
    for (int i = 0; i < 3; ++i) pts.emplace_back(1.5, 0.5 + 0.1 * i, 0.5);
    for (int i = 0; i < 4; ++i) pts.emplace_back(2.5, 0.5 + 0.1 * i, 0.5);
    PointCloud cloud(std::move(pts));
    VoxelGrid grid(cloud, 1.0);
    REQUIRE(grid.occupied_count() == 3);

    FeatureLabels labels(cloud.size(), 0);
    auto plan = plan_allocation(grid, labels, 5, {1.0});
    // real quotas 1.5, 1.5, 2.0 -> floors 1,1,2 -> remainder to the first box
    std::vector<int> got;
    for (const auto& [key, quota] : plan.quotas) got.push_back(quota);
    REQUIRE(got.size() == 3);
    CHECK(got[0] == 2);
    CHECK(got[1] == 1);
    CHECK(got[2] == 2);
}

TEST_CASE("allocation: 7:3 rates send 70% to the edge class") {
    // equal populations of both classes in every box
    std::vector<Vec3> pts;
    std::vector<int> labels;
    auto gen = testing::rng(21);
    std::uniform_real_distribution<double> uni(0.0, 4.0);
    for (int i = 0; i < 2000; ++i) {
        pts.emplace_back(uni(gen), uni(gen), uni(gen));
        labels.push_back(i % 2);
    }
    PointCloud cloud(std::move(pts), labels);
    VoxelGrid grid(cloud, 1.0);
    auto plan = plan_allocation(grid, *cloud.labels, 600, {3.0, 7.0});

    long edge_total = 0, total = 0;
    for (const auto& [key, quota] : plan.quotas) {
        total += quota;
        if (key.second == 1) edge_total += quota;
    }
    CHECK(total == 600);
    CHECK(std::abs(edge_total - 420) <= 12); // 70% up to per-cell cap effects
}

TEST_CASE("allocation errors") {
    auto cloud = testing::sphere_cloud(50, 3);
    VoxelGrid grid(cloud, default_scale(cloud));
    FeatureLabels labels(cloud.size(), 0);
    CHECK_THROWS_AS(plan_allocation(grid, labels, 51, {1.0}), Error);
    CHECK_THROWS_AS(plan_allocation(grid, labels, 10, {0.0}), Error);
    CHECK_THROWS_AS(plan_allocation(grid, labels, 2, {1.0}), Error);
}

TEST_CASE("fps: collinear hand-traces") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 10; ++i) pts.emplace_back(static_cast<double>(i), 0, 0);
    PointCloud cloud(std::move(pts));
    std::vector<int> ids(10);
    std::iota(ids.begin(), ids.end(), 0);

    // no seeds: farthest-from-centroid tie breaks to index 0, then 9
    auto picks = fps_box(cloud, ids, {}, 2);
    REQUIRE(picks.size() == 2);
    CHECK(picks[0] == 0);
    CHECK(picks[1] == 9);

    // a seed at the origin pushes the first pick to the far end
    std::vector<Vec3> seeds{Vec3(0, 0, 0)};
    picks = fps_box(cloud, ids, seeds, 1);
    REQUIRE(picks.size() == 1);
    CHECK(picks[0] == 9);

    // m == population returns everything
    picks = fps_box(cloud, ids, {}, 10);
    CHECK(picks.size() == 10);

    CHECK_THROWS_AS(fps_box(cloud, ids, {}, 11), Error);
}

TEST_CASE("resample: single box degenerates to plain FPS") {
    auto cloud = testing::sphere_cloud(40, 3, 0.1);
    VoxelGrid grid(cloud, 10.0);
    REQUIRE(grid.occupied_count() == 1);
    FeatureLabels labels(cloud.size(), 0);
    auto plan = plan_allocation(grid, labels, 10, {1.0});
    auto out = resample(grid, plan, labels);
    CHECK(out.size() == 10);

    std::vector<int> ids(cloud.size());
    std::iota(ids.begin(), ids.end(), 0);
    auto direct = fps_box(cloud, ids, {}, 10);
    for (std::size_t i = 0; i < direct.size(); ++i) {
        CHECK((out.points[i] - cloud.points[direct[i]]).norm() == 0.0);
    }
}

TEST_CASE("resample: exact count over random cases") {
    for (unsigned seed = 0; seed < 10; ++seed) {
        auto gen = testing::rng(seed + 500);
        std::uniform_int_distribution<int> n_dist(200, 2000);
        int n = n_dist(gen);
        std::uniform_int_distribution<int> t_dist(10, n / 2);
        long target = t_dist(gen);
        auto cloud = testing::sphere_cloud(n, seed * 7 + 1);
        VoxelGrid grid(cloud, default_scale(cloud));
        FeatureLabels labels(cloud.size(), 0);
        auto plan = plan_allocation(grid, labels, target, {1.0});
        auto out = resample(grid, plan, labels);
        CHECK(static_cast<long>(out.size()) == target);
    }
}

TEST_CASE("resample: serial and parallel runs are identical") {
    auto cloud = testing::sphere_cloud(3000, 77);
    VoxelGrid grid(cloud, default_scale(cloud));
    FeatureLabels labels = classify_by_curvature(cloud, 12, 3);
    auto plan = plan_allocation(grid, labels, 700, {1.0, 2.0, 3.0});

    ResampleOptions serial;
    serial.threads = 1;
    ResampleOptions parallel;
    parallel.threads = 4;
    auto a = resample(grid, plan, labels, serial);
    auto b = resample(grid, plan, labels, parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a.points[i] - b.points[i]).norm() == 0.0);
        CHECK(a.label(i) == b.label(i));
    }
}

TEST_CASE("resample: every output point is an input point, labels carried") {
    auto cloud = testing::cube_surface_cloud(2000, 31);
    cloud.labels = classify_edge_points(cloud, 16, 0.05);
    VoxelGrid grid(cloud, default_scale(cloud));
    auto plan = plan_allocation(grid, *cloud.labels, 500, {3.0, 7.0});
    auto out = resample(grid, plan, *cloud.labels);
    REQUIRE(out.labels.has_value());

    std::map<std::array<long, 3>, int> input_labels;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        input_labels[{static_cast<long>(std::llround(p.x() * 1e12)),
                      static_cast<long>(std::llround(p.y() * 1e12)),
                      static_cast<long>(std::llround(p.z() * 1e12))}] = (*cloud.labels)[i];
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Vec3& p = out.points[i];
        auto it = input_labels.find({static_cast<long>(std::llround(p.x() * 1e12)),
                                     static_cast<long>(std::llround(p.y() * 1e12)),
                                     static_cast<long>(std::llround(p.z() * 1e12))});
        REQUIRE(it != input_labels.end());
        CHECK(it->second == (*out.labels)[i]);
    }
}

TEST_CASE("resample: FPS output spreads more evenly than random subsampling") {
    int fps_wins = 0;
    for (int trial = 0; trial < 10; ++trial) {
        auto cloud = testing::plane_cloud(2500, 900 + trial);
        VoxelGrid grid(cloud, default_scale(cloud));
        FeatureLabels labels(cloud.size(), 0);
        const long target = 400;
        auto plan = plan_allocation(grid, labels, target, {1.0});
        auto fps_out = resample(grid, plan, labels);

        auto gen = testing::rng(4000 + trial);
        std::vector<int> ids(cloud.size());
        std::iota(ids.begin(), ids.end(), 0);
        std::shuffle(ids.begin(), ids.end(), gen);
        std::vector<Vec3> random_pts;
        for (long i = 0; i < target; ++i) random_pts.push_back(cloud.points[ids[i]]);
        PointCloud random_out(std::move(random_pts));

        auto cv_nn = [](const PointCloud& c) {
            NeighborIndex index(c);
            std::vector<double> d(c.size());
            double mean = 0.0;
            for (int i = 0; i < static_cast<int>(c.size()); ++i) {
                d[i] = index.knn_point(i, 1).front().distance;
                mean += d[i];
            }
            mean /= static_cast<double>(c.size());
            double var = 0.0;
            for (double x : d) var += (x - mean) * (x - mean);
            return std::sqrt(var / static_cast<double>(c.size())) / mean;
        };
        if (cv_nn(fps_out) <= cv_nn(random_out)) ++fps_wins;
    }
    CHECK(fps_wins >= 9);
}
