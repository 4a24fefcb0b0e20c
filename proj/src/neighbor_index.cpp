#include "voxmesh/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace voxmesh {

namespace {

// (distance², index) max-heap entry; the worst kept candidate sits on top.
struct HeapEntry {
    double d2;
    int index;
    bool operator<(const HeapEntry& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return index < o.index;
    }
};

} // namespace

NeighborIndex::NeighborIndex(const PointCloud& cloud) : points_(cloud.points) {
    if (points_.empty()) raise(ErrorCode::EmptyInput, "NeighborIndex over empty cloud");
    AABB box = bounding_box(cloud);
    // A few points per cell on uniform data keeps shell scans short.
    double longest = box.extent().maxCoeff();
    double n = static_cast<double>(points_.size());
    cell_size_ = longest > 0.0 ? 2.0 * longest / std::cbrt(n) : 1.0;
    if (!(cell_size_ > 0.0) || !std::isfinite(cell_size_)) cell_size_ = 1.0;
    cells_.reserve(points_.size());
    for (int i = 0; i < static_cast<int>(points_.size()); ++i) {
        cells_[cell_of(points_[i])].push_back(i);
    }
}

NeighborIndex::CellKey NeighborIndex::cell_of(const Vec3& p) const {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / cell_size_)),
                   static_cast<std::int64_t>(std::floor(p.y() / cell_size_)),
                   static_cast<std::int64_t>(std::floor(p.z() / cell_size_))};
}

std::vector<Neighbor> NeighborIndex::knn(const Vec3& query, int k) const {
    return search(query, k, -1);
}

std::vector<Neighbor> NeighborIndex::knn_point(int i, int k, bool include_self) const {
    if (i < 0 || i >= static_cast<int>(points_.size())) {
        raise(ErrorCode::InvalidParam, "knn_point index out of range");
    }
    return search(points_[i], k, include_self ? -1 : i);
}

std::vector<Neighbor> NeighborIndex::search(const Vec3& query, int k, int exclude) const {
    if (k < 1) raise(ErrorCode::InvalidParam, "knn requires k >= 1");
    const int total = static_cast<int>(points_.size()) - (exclude >= 0 ? 1 : 0);
    const int want = std::min(k, std::max(total, 0));

    std::priority_queue<HeapEntry> heap;
    const CellKey center = cell_of(query);
    int seen = 0;

    // Expanding Chebyshev shells. A cell in shell s >= r+1 lies entirely at
    // distance > (r)*cell - diag_of_one_cell... conservatively, any point in
    // an unvisited shell is at least (r - 1) * cell_size_ away, so the scan
    // stops once the kept worst candidate beats that bound.
    for (std::int64_t r = 0; seen < total; ++r) {
        if (static_cast<int>(heap.size()) == want && want > 0 && r >= 2) {
            double reach = static_cast<double>(r - 1) * cell_size_;
            if (reach * reach >= heap.top().d2) break;
        }
        for (std::int64_t dx = -r; dx <= r; ++dx) {
            for (std::int64_t dy = -r; dy <= r; ++dy) {
                for (std::int64_t dz = -r; dz <= r; ++dz) {
                    if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != r) continue;
                    auto it = cells_.find(CellKey{center.x + dx, center.y + dy, center.z + dz});
                    if (it == cells_.end()) continue;
                    for (int idx : it->second) {
                        if (idx == exclude) continue;
                        ++seen;
                        HeapEntry e{(points_[idx] - query).squaredNorm(), idx};
                        if (static_cast<int>(heap.size()) < want) {
                            heap.push(e);
                        } else if (want > 0 && e < heap.top()) {
                            heap.pop();
                            heap.push(e);
                        }
                    }
                }
            }
        }
    }

    std::vector<Neighbor> result(heap.size());
    for (std::size_t i = result.size(); i-- > 0;) {
        result[i] = Neighbor{heap.top().index, std::sqrt(heap.top().d2)};
        heap.pop();
    }
    return result;
}

} // namespace voxmesh
