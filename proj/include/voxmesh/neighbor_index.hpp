#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "voxmesh/point_cloud.hpp"

namespace voxmesh {

struct Neighbor {
    int index;
    double distance;
};

/// Spatial hash over a point-cloud snapshot for k-nearest queries.
///
/// Results are sorted by ascending distance with ties broken by ascending
/// point index, so queries are fully deterministic for a fixed input order.
class NeighborIndex {
public:
    explicit NeighborIndex(const PointCloud& cloud);

    /// k nearest cloud points to an arbitrary position (no exclusion).
    std::vector<Neighbor> knn(const Vec3& query, int k) const;

    /// k nearest neighbors of cloud point `i`. Excludes `i` itself unless
    /// `include_self` is set. Returns min(k, available) entries.
    std::vector<Neighbor> knn_point(int i, int k, bool include_self = false) const;

    std::size_t size() const { return points_.size(); }
    const Vec3& point(int i) const { return points_[i]; }

private:
    std::vector<Neighbor> search(const Vec3& query, int k, int exclude) const;

    struct CellKey {
        std::int64_t x, y, z;
        bool operator==(const CellKey&) const = default;
    };
    struct CellHash {
        std::size_t operator()(const CellKey& c) const {
            std::uint64_t h = 1469598103934665603ull;
            for (std::int64_t v : {c.x, c.y, c.z}) {
                h ^= static_cast<std::uint64_t>(v);
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };

    CellKey cell_of(const Vec3& p) const;

    std::vector<Vec3> points_;
    std::unordered_map<CellKey, std::vector<int>, CellHash> cells_;
    double cell_size_ = 1.0;
};

} // namespace voxmesh
