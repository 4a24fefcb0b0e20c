#include "voxmesh/pipeline.hpp"

#include <chrono>
#include <sstream>

#include <json.hpp>

#include "voxmesh/initial_mesh.hpp"
#include "voxmesh/metrics.hpp"
#include "voxmesh/preprocess.hpp"
#include "voxmesh/remesh.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace voxmesh {

namespace {

using json = nlohmann::ordered_json;

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            rates.push_back(std::stod(item));
        } catch (const std::exception&) {
            raise(ErrorCode::InvalidParam, "bad rates string '" + text + "'");
        }
    }
    return rates;
}

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
    template <typename Fn>
    auto run(const std::string& stage, Fn&& fn) {
        auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            sink_[stage] = elapsed_ms(start);
        } else {
            auto result = fn();
            sink_[stage] = elapsed_ms(start);
            return result;
        }
    }

private:
    static double elapsed_ms(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
    std::map<std::string, double>& sink_;
};

} // namespace

std::string PipelineConfig::to_json() const {
    json doc;
    json pre;
    pre["k"] = preprocess_k;
    pre["passes"] = preprocess_passes;
    pre["octree_scale"] = octree_scale;
    pre["smooth"] = smooth;
    pre["uniform"] = uniform;
    pre["upsample_s"] = upsample_s;
    doc["preprocess"] = pre;
    json grid;
    grid["v_scale"] = v_scale;
    doc["grid"] = grid;
    json res;
    res["points"] = points;
    res["mode"] = mode;
    res["rates"] = rates;
    res["edge_threshold"] = edge_threshold;
    res["classify_k"] = classify_k;
    res["curvature_classes"] = curvature_classes;
    res["seed"] = seed;
    doc["resample"] = res;
    json mesh;
    mesh["k"] = mesh_k;
    mesh["hole_fill_max"] = hole_fill_max;
    doc["mesh"] = mesh;
    json rem;
    rem["iterations"] = iterations;
    rem["preserve_edges"] = effective_preserve_edges();
    rem["adaptive"] = adaptive;
    rem["keep_internal_edges"] = keep_internal_edges;
    rem["crease_guard_min_neighbors"] = crease_guard_min_neighbors;
    doc["remesh"] = rem;
    json met;
    met["mls_k"] = mls_k;
    met["with_mls"] = with_mls;
    doc["metrics"] = met;
    return doc.dump();
}

void PipelineConfig::apply_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const std::exception& e) {
        raise(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    auto get = [&](const char* section, const char* key, auto& slot) {
        if (doc.contains(section) && doc[section].contains(key)) {
            using T = std::decay_t<decltype(slot)>;
            slot = doc[section][key].template get<T>();
        }
    };
    get("preprocess", "k", preprocess_k);
    get("preprocess", "passes", preprocess_passes);
    get("preprocess", "octree_scale", octree_scale);
    get("preprocess", "smooth", smooth);
    get("preprocess", "uniform", uniform);
    get("preprocess", "upsample_s", upsample_s);
    get("grid", "v_scale", v_scale);
    get("resample", "points", points);
    get("resample", "mode", mode);
    get("resample", "rates", rates);
    get("resample", "edge_threshold", edge_threshold);
    get("resample", "classify_k", classify_k);
    get("resample", "curvature_classes", curvature_classes);
    get("resample", "seed", seed);
    get("mesh", "k", mesh_k);
    get("mesh", "hole_fill_max", hole_fill_max);
    get("remesh", "iterations", iterations);
    if (doc.contains("remesh") && doc["remesh"].contains("preserve_edges")) {
        preserve_edges = doc["remesh"]["preserve_edges"].get<bool>();
    }
    get("remesh", "adaptive", adaptive);
    get("remesh", "keep_internal_edges", keep_internal_edges);
    get("remesh", "crease_guard_min_neighbors", crease_guard_min_neighbors);
    get("metrics", "mls_k", mls_k);
    get("metrics", "with_mls", with_mls);
}

std::string PipelineConfig::hash() const {
    std::string text = to_json();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<double> PipelineConfig::class_rates_for_mode() const {
    if (mode == "none") return {1.0};
    if (mode == "edges") {
        // "a:b" reads edge:ordinary, the paper's 7:3 convention
        std::vector<double> pair = parse_rates(rates.empty() ? "7:3" : rates);
        if (pair.size() != 2) raise(ErrorCode::InvalidParam, "edges mode expects two rates");
        return {pair[1], pair[0]}; // class 0 = ordinary, class 1 = edge
    }
    if (mode == "curvature") {
        std::vector<double> list = parse_rates(rates.empty() ? "2:3:4:5:6" : rates);
        if (static_cast<int>(list.size()) != curvature_classes) {
            raise(ErrorCode::InvalidParam, "curvature mode expects one rate per class");
        }
        return list;
    }
    raise(ErrorCode::InvalidParam, "unknown mode '" + mode + "'");
}

PointCloud run_preprocess(const PointCloud& input, const PipelineConfig& config) {
    PointCloud cloud = input;
    if (config.smooth && static_cast<int>(cloud.size()) > config.preprocess_k) {
        SmoothingParams params;
        params.k = config.preprocess_k;
        params.threads = config.threads;
        for (int pass = 0; pass < config.preprocess_passes; ++pass) {
            cloud = mls_smooth(cloud, params);
        }
    }
    if (config.uniform && cloud.size() > 1) {
        std::optional<double> scale;
        if (config.octree_scale > 0.0) scale = config.octree_scale;
        cloud = octree_uniform(cloud, scale);
    }
    // up-sample until the user target fits (sparse input case)
    if (config.points > 0) {
        int guard = 0;
        while (static_cast<long>(cloud.size()) < config.points && guard++ < 6) {
            cloud = upsample_delaunay(cloud, config.upsample_s);
        }
        if (static_cast<long>(cloud.size()) < config.points) {
            raise(ErrorCode::TargetExceedsInput, "up-sampling could not reach the target count");
        }
    }
    return cloud;
}

namespace {

FeatureLabels classify_for_mode(const PointCloud& cloud, const PipelineConfig& config) {
    if (config.mode == "none") return FeatureLabels(cloud.size(), 0);
    if (cloud.labels) return *cloud.labels; // externally supplied labels win
    if (config.mode == "edges") {
        return classify_edge_points(cloud, config.classify_k, config.edge_threshold);
    }
    return classify_by_curvature(cloud, config.classify_k, config.curvature_classes);
}

} // namespace

PointCloud run_resample_stage(const PointCloud& preprocessed, const PipelineConfig& config) {
    if (config.points <= 0) return preprocessed;
    double scale = config.v_scale > 0.0 ? config.v_scale : default_scale(preprocessed);
    VoxelGrid grid(preprocessed, scale);
    FeatureLabels labels = classify_for_mode(preprocessed, config);
    SamplingPlan plan =
        plan_allocation(grid, labels, config.points, config.class_rates_for_mode());
    ResampleOptions options;
    options.threads = config.threads;
    return resample(grid, plan, labels, options);
}

PipelineResult run_reconstruct(const PointCloud& input, const PipelineConfig& config,
                               const std::string& input_name) {
    PipelineResult result;
    ReportDocument& report = result.report;
    report.input_path = input_name;
    report.target_points = config.points;
    report.config_hash = config.hash();
    report.seed = config.seed;
    report.effective_config_json = config.to_json();
    StageTimer timer(report.timings_ms);

    PointCloud cloud =
        timer.run("preprocess", [&] { return run_preprocess(input, config); });
    result.preprocessed = cloud;

    const double scale = config.v_scale > 0.0 ? config.v_scale : default_scale(cloud);
    auto grid = timer.run("grid", [&] { return VoxelGrid(cloud, scale); });

    FeatureLabels labels =
        timer.run("classify", [&] { return classify_for_mode(cloud, config); });

    PointCloud sampled = cloud;
    if (config.points > 0) {
        SamplingPlan plan = timer.run("plan", [&] {
            return plan_allocation(grid, labels, config.points, config.class_rates_for_mode());
        });
        sampled = timer.run("resample", [&] {
            PointCloud working = cloud;
            working.labels = labels; // carried onto the chosen points
            VoxelGrid working_grid(working, grid);
            ResampleOptions options;
            options.threads = config.threads;
            return resample(working_grid, plan, labels, options);
        });
    } else if (!sampled.labels) {
        sampled.labels = labels;
    }

    // the sampled cloud keeps the box identities of the original structure
    VoxelGrid mesh_grid(sampled, grid);
    MesherParams mesher;
    mesher.k = config.mesh_k;
    mesher.hole_fill_max = config.hole_fill_max;
    mesher.threads = config.threads;
    HalfEdgeMesh mesh = timer.run(
        "triangulate", [&] { return reconstruct_initial(sampled, mesh_grid, mesher); });

    // external-edge flags drive remeshing guards in edges mode
    if (config.mode == "edges" && sampled.labels) {
        for (std::size_t v = 0; v < sampled.size(); ++v) {
            if ((*sampled.labels)[v] == 1) {
                mesh.set_flag(static_cast<int>(v), VertexFlag::ExternalEdge);
            }
        }
    }

    if (config.keep_internal_edges) {
        mesh = timer.run("rebuild_internal_edges",
                         [&] { return rebuild_internal_edges(mesh, mesh_grid); });
    }

    if (config.iterations > 0) {
        RemeshParams params;
        params.iterations = config.iterations;
        params.preserve_edges = config.effective_preserve_edges();
        params.adaptive = config.adaptive;
        params.crease_guard_min_neighbors = config.crease_guard_min_neighbors;
        RemeshStats stats = timer.run("remesh", [&] { return isotropic_remesh(mesh, params); });
        for (const auto& it : stats.iterations) {
            report.remesh_splits += it.splits;
            report.remesh_collapses += it.collapses;
            report.q_avg_per_iteration.push_back(it.q_avg);
        }
        report.remesh_deficit = stats.vertex_deficit;
        report.q_avg_initial = stats.q_avg_initial;
    }

    timer.run("metrics", [&] {
        ReportParams params;
        params.mls_k = config.mls_k;
        params.with_mls = config.with_mls;
        report.quality = mesh_report(mesh, result.preprocessed, params);
    });

    MeshTopology topo = mesh.topology();
    report.vertex_count = topo.vertices + topo.isolated_vertices;
    report.boundary_loop_count = topo.boundary_loops;
    report.component_count = topo.components;
    report.euler_characteristic = topo.euler_characteristic;
    report.closed = topo.closed;

    result.mesh = std::move(mesh);
    return result;
}

} // namespace voxmesh
