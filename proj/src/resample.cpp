#include "voxmesh/resample.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "voxmesh/neighbor_index.hpp"
#include "voxmesh/parallel.hpp"

namespace voxmesh {

std::vector<double> surface_variation(const PointCloud& cloud, int k) {
    if (static_cast<int>(cloud.size()) <= k) {
        raise(ErrorCode::InsufficientPoints, "surface variation needs more than k points");
    }
    NeighborIndex index(cloud);
    std::vector<double> variation(cloud.size(), 0.0);
    parallel_for(cloud.size(), 0, [&](std::size_t i) {
        auto nn = index.knn_point(static_cast<int>(i), k);
        Vec3 mean = cloud.points[i];
        for (const Neighbor& n : nn) mean += cloud.points[n.index];
        mean /= static_cast<double>(nn.size() + 1);

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        Vec3 d = cloud.points[i] - mean;
        cov += d * d.transpose();
        for (const Neighbor& n : nn) {
            d = cloud.points[n.index] - mean;
            cov += d * d.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        double trace = solver.eigenvalues().sum();
        variation[i] = trace > 0.0 ? solver.eigenvalues()(0) / trace : 0.0;
    });
    return variation;
}

FeatureLabels classify_edge_points(const PointCloud& cloud, int k, double threshold) {
    auto variation = surface_variation(cloud, k);
    FeatureLabels labels(cloud.size(), 0);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (variation[i] > threshold) labels[i] = 1;
    }
    return labels;
}

FeatureLabels classify_by_curvature(const PointCloud& cloud, int k, int n_classes) {
    if (n_classes < 2) raise(ErrorCode::InvalidParam, "need at least 2 curvature classes");
    auto variation = surface_variation(cloud, k);

    const std::size_t n = variation.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return variation[a] < variation[b]; });

    // rank-based quantile split; runs of equal values collapse into the
    // class of the run's first element
    FeatureLabels labels(n, 0);
    std::size_t run_start = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        if (pos > 0 && variation[order[pos]] != variation[order[pos - 1]]) run_start = pos;
        labels[order[pos]] =
            static_cast<int>(run_start * static_cast<std::size_t>(n_classes) / n);
    }
    return labels;
}

SamplingPlan plan_allocation(const VoxelGrid& grid, const FeatureLabels& labels, long target,
                             const std::vector<double>& class_rates) {
    const long population = static_cast<long>(grid.cloud().size());
    if (target < 3) raise(ErrorCode::InvalidParam, "target must be at least 3");
    if (target > population) {
        raise(ErrorCode::TargetExceedsInput,
              "target " + std::to_string(target) + " exceeds input size " +
                  std::to_string(population) + " (up-sample first)");
    }
    if (labels.size() != grid.cloud().size()) {
        raise(ErrorCode::InvalidParam, "label array does not match cloud");
    }
    if (class_rates.empty() ||
        std::all_of(class_rates.begin(), class_rates.end(), [](double w) { return w <= 0.0; })) {
        raise(ErrorCode::InvalidParam, "class rates must contain a positive weight");
    }

    auto rate_of = [&](int cls) {
        return cls < static_cast<int>(class_rates.size()) ? class_rates[cls] : 0.0;
    };

    struct Cell {
        BoxIndex box;
        int cls;
        long population;
        double weight;
        long quota = 0;
        double ideal = 0.0;
    };
    std::vector<Cell> cells;
    for (const auto& [box, members] : grid.boxes()) {
        std::map<int, long> counts;
        for (int p : members) ++counts[labels[p]];
        for (const auto& [cls, count] : counts) {
            cells.push_back({box, cls, count, rate_of(cls) * static_cast<double>(count)});
        }
    }

    // Iterated capped largest remainder: proportional shares among unsaturated
    // cells, floors assigned, leftovers to the largest fractional parts; any
    // cell clipped at its population re-enters the next pass as saturated.
    long remaining = target;
    std::vector<std::size_t> open(cells.size());
    std::iota(open.begin(), open.end(), 0);
    while (remaining > 0) {
        double total_weight = 0.0;
        for (std::size_t c : open) total_weight += cells[c].weight;
        if (total_weight <= 0.0) {
            // weighted classes exhausted; spread the rest by population
            for (std::size_t c : open) cells[c].weight = static_cast<double>(cells[c].population);
            total_weight = 0.0;
            for (std::size_t c : open) total_weight += cells[c].weight;
            if (total_weight <= 0.0) {
                raise(ErrorCode::InvalidParam, "no capacity left for allocation");
            }
            continue;
        }

        long assigned = 0;
        for (std::size_t c : open) {
            Cell& cell = cells[c];
            cell.ideal = remaining * cell.weight / total_weight;
            long share = std::min(static_cast<long>(std::floor(cell.ideal)),
                                  cell.population - cell.quota);
            cell.quota += share;
            assigned += share;
        }
        long leftover = remaining - assigned;

        // largest remainder, ties by (box lexicographic, class id)
        std::vector<std::size_t> order = open;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            double ra = cells[a].ideal - std::floor(cells[a].ideal);
            double rb = cells[b].ideal - std::floor(cells[b].ideal);
            if (ra != rb) return ra > rb;
            if (cells[a].box != cells[b].box) return cells[a].box < cells[b].box;
            return cells[a].cls < cells[b].cls;
        });
        for (std::size_t c : order) {
            if (leftover == 0) break;
            if (cells[c].quota < cells[c].population) {
                ++cells[c].quota;
                --leftover;
            }
        }

        remaining = leftover;
        std::vector<std::size_t> still_open;
        for (std::size_t c : open) {
            if (cells[c].quota < cells[c].population) still_open.push_back(c);
        }
        open = std::move(still_open);
        if (remaining > 0 && open.empty()) {
            raise(ErrorCode::InvalidParam, "allocation could not be satisfied");
        }
    }

    SamplingPlan plan;
    plan.target_total = target;
    plan.class_rates = class_rates;
    for (const Cell& cell : cells) {
        if (cell.quota > 0) plan.quotas[{cell.box, cell.cls}] = static_cast<int>(cell.quota);
    }
    return plan;
}

std::vector<int> fps_box(const PointCloud& cloud, std::span<const int> candidates,
                         std::span<const Vec3> seeds, int m) {
    if (m > static_cast<int>(candidates.size())) {
        raise(ErrorCode::QuotaExceedsPopulation,
              "quota " + std::to_string(m) + " exceeds population " +
                  std::to_string(candidates.size()));
    }
    std::vector<int> chosen;
    if (m <= 0) return chosen;
    chosen.reserve(m);

    // min distance from each candidate to the seed set (or +inf when empty)
    std::vector<double> min_d2(candidates.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Vec3& p = cloud.points[candidates[i]];
        for (const Vec3& s : seeds) {
            min_d2[i] = std::min(min_d2[i], (p - s).squaredNorm());
        }
    }

    std::vector<char> taken(candidates.size(), 0);
    std::size_t first = 0;
    if (seeds.empty()) {
        Vec3 centroid = Vec3::Zero();
        for (int id : candidates) centroid += cloud.points[id];
        centroid /= static_cast<double>(candidates.size());
        double best = -1.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            double d2 = (cloud.points[candidates[i]] - centroid).squaredNorm();
            if (d2 > best) {
                best = d2;
                first = i;
            }
        }
    } else {
        double best = -1.0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (min_d2[i] > best) {
                best = min_d2[i];
                first = i;
            }
        }
    }

    auto take = [&](std::size_t i) {
        taken[i] = 1;
        chosen.push_back(candidates[i]);
        const Vec3& q = cloud.points[candidates[i]];
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (taken[j]) continue;
            min_d2[j] = std::min(min_d2[j], (cloud.points[candidates[j]] - q).squaredNorm());
        }
    };
    take(first);

    while (static_cast<int>(chosen.size()) < m) {
        double best = -1.0;
        std::size_t pick = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (!taken[i]) {
                if (min_d2[i] > best) {
                    best = min_d2[i];
                    pick = i;
                }
            }
        }
        take(pick);
    }
    return chosen;
}

PointCloud resample(const VoxelGrid& grid, const SamplingPlan& plan, const FeatureLabels& labels,
                    const ResampleOptions& options) {
    const PointCloud& cloud = grid.cloud();
    if (labels.size() != cloud.size()) {
        raise(ErrorCode::InvalidParam, "label array does not match cloud");
    }

    // per-box worklist: classes in ascending order
    struct BoxTask {
        BoxIndex box;
        std::vector<std::pair<int, int>> class_quotas; // (class, quota)
    };
    std::map<BoxIndex, BoxTask> tasks;
    for (const auto& [key, quota] : plan.quotas) {
        auto& task = tasks[key.first];
        task.box = key.first;
        task.class_quotas.emplace_back(key.second, quota);
    }

    std::map<BoxIndex, std::vector<int>> results; // chosen ids per box
    for (auto& [box, task] : tasks) results[box]; // preallocate slots

    std::vector<const BoxTask*> round_tasks;
    for (int round = 0; round < 8; ++round) {
        round_tasks.clear();
        for (auto& [box, task] : tasks) {
            if (round_color(box) == round) round_tasks.push_back(&task);
        }
        parallel_for(round_tasks.size(), options.threads, [&](std::size_t t) {
            const BoxTask& task = *round_tasks[t];
            // seeds: samples already chosen in 26-adjacent boxes (earlier
            // rounds only, by the parity schedule)
            std::vector<Vec3> seeds;
            for (int di = -1; di <= 1; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    for (int dk = -1; dk <= 1; ++dk) {
                        if (di == 0 && dj == 0 && dk == 0) continue;
                        auto it = results.find(
                            BoxIndex{task.box.i + di, task.box.j + dj, task.box.k + dk});
                        if (it == results.end()) continue;
                        for (int id : it->second) seeds.push_back(cloud.points[id]);
                    }
                }
            }

            const std::vector<int>& members = grid.members(task.box);
            std::vector<int>& out = results[task.box];
            for (const auto& [cls, quota] : task.class_quotas) {
                std::vector<int> candidates;
                for (int id : members) {
                    if (labels[id] == cls) candidates.push_back(id);
                }
                auto picks = fps_box(cloud, candidates, seeds, quota);
                for (int id : picks) {
                    out.push_back(id);
                    seeds.push_back(cloud.points[id]);
                }
            }
        });
    }

    PointCloud out;
    out.points.reserve(plan.target_total);
    bool carry = cloud.labels.has_value() ||
                 std::any_of(labels.begin(), labels.end(), [](int c) { return c != 0; });
    if (carry) out.labels.emplace();

    // deterministic assembly: rounds in order, boxes lexicographic within
    for (int round = 0; round < 8; ++round) {
        for (const auto& [box, ids] : results) {
            if (round_color(box) != round) continue;
            for (int id : ids) {
                out.points.push_back(cloud.points[id]);
                if (carry) {
                    out.labels->push_back(cloud.labels ? (*cloud.labels)[id] : labels[id]);
                }
            }
        }
    }
    return out;
}

} // namespace voxmesh
