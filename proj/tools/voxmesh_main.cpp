#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "voxmesh/initial_mesh.hpp"
#include "voxmesh/metrics.hpp"
#include "voxmesh/pipeline.hpp"
#include "voxmesh/preprocess.hpp"
#include "voxmesh/remesh.hpp"
#include "voxmesh/voxel_grid.hpp"

namespace {

using namespace voxmesh;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitPipeline = 4;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonFlags {
    std::string config_path;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--threads", flags.threads, "worker cap (0 = hardware)");
}

PipelineConfig make_config(const CommonFlags& flags) {
    PipelineConfig config;
    if (!flags.config_path.empty()) config.apply_json(read_file(flags.config_path));
    if (flags.threads > 0) config.threads = flags.threads;
    return config;
}

int classify_exit(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::IoError:
        case ErrorCode::EmptyInput: return kExitParse;
        default: return kExitPipeline;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"voxel-structure mesh reconstruction toolkit"};
    app.require_subcommand(1);

    // ---- reconstruct ------------------------------------------------------
    auto* rec = app.add_subcommand("reconstruct", "full point-cloud-to-mesh pipeline");
    std::string rec_input, rec_output, rec_report, rec_histogram, rec_colormap;
    CommonFlags rec_common;
    long rec_points = 0;
    std::string rec_mode, rec_rates;
    int rec_iterations = -1;
    bool rec_keep_internal = false, rec_adaptive = false, rec_no_mls = false;
    bool rec_ascii = false;
    rec->add_option("input", rec_input, "point cloud (ply/obj/xyz)")->required();
    rec->add_option("-o,--output", rec_output, "output mesh (default <input>_mesh.ply)");
    rec->add_option("--points", rec_points, "target vertex count");
    rec->add_option("--mode", rec_mode, "none | edges | curvature");
    rec->add_option("--rates", rec_rates, "resampling rates, e.g. 7:3");
    rec->add_option("--iterations", rec_iterations, "remeshing iterations (default 5)");
    rec->add_flag("--keep-internal-edges", rec_keep_internal,
                  "delete illegal triangles to rebuild internal edges");
    rec->add_flag("--adaptive", rec_adaptive, "curvature-adaptive remeshing targets");
    rec->add_flag("--no-mls", rec_no_mls, "skip the MLS error in the report");
    rec->add_flag("--ascii", rec_ascii, "write ascii PLY instead of binary");
    rec->add_option("--report", rec_report, "JSON report path (default <input>_report.json)");
    rec->add_option("--histogram", rec_histogram, "CSV histogram path");
    rec->add_option("--colormap", rec_colormap, "per-vertex min-angle color PLY");
    add_common(rec, rec_common);

    // ---- metrics ----------------------------------------------------------
    auto* met = app.add_subcommand("metrics", "quality report for a mesh against a cloud");
    std::string met_mesh, met_cloud, met_report, met_histogram, met_colormap;
    CommonFlags met_common;
    met->add_option("mesh", met_mesh, "mesh file (ply/obj)")->required();
    met->add_option("cloud", met_cloud, "reference point cloud")->required();
    met->add_option("--report", met_report, "JSON report path (default <mesh>_report.json)");
    met->add_option("--histogram", met_histogram, "CSV histogram path");
    met->add_option("--colormap", met_colormap, "per-vertex min-angle color PLY");
    add_common(met, met_common);

    // ---- preprocess -------------------------------------------------------
    auto* pre = app.add_subcommand("preprocess", "denoise / uniformize / up-sample a cloud");
    std::string pre_input, pre_output;
    CommonFlags pre_common;
    int pre_k = -1, pre_passes = -1;
    double pre_scale = -1.0;
    bool pre_no_smooth = false, pre_no_uniform = false;
    long pre_points = 0;
    pre->add_option("input", pre_input)->required();
    pre->add_option("-o,--output", pre_output, "output cloud (default <input>_pre.ply)");
    pre->add_option("--k", pre_k, "smoothing neighborhood size");
    pre->add_option("--passes", pre_passes, "smoothing passes");
    pre->add_option("--octree-scale", pre_scale, "uniformization cube edge (default auto)");
    pre->add_flag("--no-smooth", pre_no_smooth);
    pre->add_flag("--no-uniform", pre_no_uniform);
    pre->add_option("--points", pre_points, "up-sample until this count is reachable");
    add_common(pre, pre_common);

    // ---- resample ---------------------------------------------------------
    auto* res = app.add_subcommand("resample", "voxel-scheduled farthest point sampling");
    std::string res_input, res_output, res_mode, res_rates;
    CommonFlags res_common;
    long res_points = 0;
    res->add_option("input", res_input)->required();
    res->add_option("-o,--output", res_output, "output cloud (default <input>_rs.ply)");
    res->add_option("--points", res_points, "target count")->required();
    res->add_option("--mode", res_mode, "none | edges | curvature");
    res->add_option("--rates", res_rates, "resampling rates");
    add_common(res, res_common);

    // ---- remesh -----------------------------------------------------------
    auto* rem = app.add_subcommand("remesh", "isotropic remeshing of an existing mesh");
    std::string rem_input, rem_output, rem_report;
    CommonFlags rem_common;
    int rem_iterations = -1;
    bool rem_preserve = false, rem_adaptive = false;
    rem->add_option("input", rem_input, "mesh file (ply/obj)")->required();
    rem->add_option("-o,--output", rem_output, "output mesh (default <input>_rm.ply)");
    rem->add_option("--iterations", rem_iterations, "iterations (default 5)");
    rem->add_flag("--preserve-edges", rem_preserve, "guard flagged and boundary vertices");
    rem->add_flag("--adaptive", rem_adaptive);
    rem->add_option("--report", rem_report, "JSON report path");
    add_common(rem, rem_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (rec->parsed()) {
            PipelineConfig config = make_config(rec_common);
            if (rec_points > 0) config.points = rec_points;
            if (!rec_mode.empty()) config.mode = rec_mode;
            if (!rec_rates.empty()) config.rates = rec_rates;
            if (rec_iterations >= 0) config.iterations = rec_iterations;
            if (rec_keep_internal) config.keep_internal_edges = true;
            if (rec_adaptive) config.adaptive = true;
            if (rec_no_mls) config.with_mls = false;

            PointCloud input = load_point_cloud(rec_input);
            PipelineResult result = run_reconstruct(input, config, rec_input);

            std::string stem = rec_input.substr(0, rec_input.find_last_of('.'));
            std::string mesh_path = rec_output.empty() ? stem + "_mesh.ply" : rec_output;
            std::string report_path = rec_report.empty() ? stem + "_report.json" : rec_report;
            std::string histogram_path =
                rec_histogram.empty() ? stem + "_histogram.csv" : rec_histogram;

            save_mesh(result.mesh, mesh_path, nullptr,
                      rec_ascii ? PlyEncoding::Ascii : PlyEncoding::BinaryLittleEndian);
            save_report(result.report, report_path);
            save_histogram_csv(result.report, histogram_path);
            if (!rec_colormap.empty()) {
                auto colors = angle_color_map(result.report.quality);
                save_mesh(result.mesh, rec_colormap, &colors, PlyEncoding::Ascii);
            }
            std::cout << "mesh: " << mesh_path << "\nreport: " << report_path << "\n";
            return kExitOk;
        }

        if (met->parsed()) {
            PipelineConfig config = make_config(met_common);
            LoadedMesh loaded = load_mesh(met_mesh);
            HalfEdgeMesh mesh = build_halfedge(loaded.vertices, loaded.faces);
            if (loaded.labels) {
                for (std::size_t v = 0; v < loaded.labels->size(); ++v) {
                    if ((*loaded.labels)[v] == 1) {
                        mesh.set_flag(static_cast<int>(v), VertexFlag::ExternalEdge);
                    }
                }
            }
            PointCloud cloud = load_point_cloud(met_cloud);

            ReportParams params;
            params.mls_k = config.mls_k;
            params.with_mls = config.with_mls;
            ReportDocument report;
            report.input_path = met_mesh;
            report.config_hash = config.hash();
            report.quality = mesh_report(mesh, cloud, params);
            MeshTopology topo = mesh.topology();
            report.vertex_count = topo.vertices + topo.isolated_vertices;
            report.boundary_loop_count = topo.boundary_loops;
            report.component_count = topo.components;
            report.euler_characteristic = topo.euler_characteristic;
            report.closed = topo.closed;
            // standalone metrics reports stay byte-reproducible: no timings

            std::string stem = met_mesh.substr(0, met_mesh.find_last_of('.'));
            std::string report_path = met_report.empty() ? stem + "_report.json" : met_report;
            save_report(report, report_path);
            if (!met_histogram.empty()) save_histogram_csv(report, met_histogram);
            if (!met_colormap.empty()) {
                auto colors = angle_color_map(report.quality);
                save_mesh(mesh, met_colormap, &colors, PlyEncoding::Ascii);
            }
            std::cout << "report: " << report_path << "\n";
            return kExitOk;
        }

        if (pre->parsed()) {
            PipelineConfig config = make_config(pre_common);
            if (pre_k > 0) config.preprocess_k = pre_k;
            if (pre_passes >= 0) config.preprocess_passes = pre_passes;
            if (pre_scale > 0.0) config.octree_scale = pre_scale;
            if (pre_no_smooth) config.smooth = false;
            if (pre_no_uniform) config.uniform = false;
            if (pre_points > 0) config.points = pre_points;

            PointCloud input = load_point_cloud(pre_input);
            PointCloud out = run_preprocess(input, config);
            std::string stem = pre_input.substr(0, pre_input.find_last_of('.'));
            std::string out_path = pre_output.empty() ? stem + "_pre.ply" : pre_output;
            save_point_cloud(out, out_path);
            std::cout << out_path << ": " << out.size() << " points\n";
            return kExitOk;
        }

        if (res->parsed()) {
            PipelineConfig config = make_config(res_common);
            config.points = res_points;
            if (!res_mode.empty()) config.mode = res_mode;
            if (!res_rates.empty()) config.rates = res_rates;

            PointCloud input = load_point_cloud(res_input);
            PointCloud out = run_resample_stage(input, config);
            std::string stem = res_input.substr(0, res_input.find_last_of('.'));
            std::string out_path = res_output.empty() ? stem + "_rs.ply" : res_output;
            save_point_cloud(out, out_path);
            std::cout << out_path << ": " << out.size() << " points\n";
            return kExitOk;
        }

        if (rem->parsed()) {
            PipelineConfig config = make_config(rem_common);
            if (rem_iterations >= 0) config.iterations = rem_iterations;

            LoadedMesh loaded = load_mesh(rem_input);
            HalfEdgeMesh mesh = build_halfedge(loaded.vertices, loaded.faces);
            bool any_flag = false;
            if (loaded.labels) {
                for (std::size_t v = 0; v < loaded.labels->size(); ++v) {
                    if ((*loaded.labels)[v] == 1) {
                        mesh.set_flag(static_cast<int>(v), VertexFlag::ExternalEdge);
                        any_flag = true;
                    }
                }
            }

            double q_before = 0.0;
            RemeshStats stats;
            RemeshParams params;
            params.iterations = config.iterations > 0 ? config.iterations : 5;
            params.preserve_edges = rem_preserve || any_flag;
            params.adaptive = rem_adaptive || config.adaptive;
            params.crease_guard_min_neighbors = config.crease_guard_min_neighbors;
            stats = isotropic_remesh(mesh, params);
            q_before = stats.q_avg_initial;

            std::string stem = rem_input.substr(0, rem_input.find_last_of('.'));
            std::string out_path = rem_output.empty() ? stem + "_rm.ply" : rem_output;
            save_mesh(mesh, out_path);
            if (!rem_report.empty()) {
                ReportDocument report;
                report.input_path = rem_input;
                report.config_hash = config.hash();
                ReportParams rp;
                rp.with_mls = false;
                report.quality = mesh_report(mesh, PointCloud{}, rp);
                report.q_avg_initial = q_before;
                for (const auto& it : stats.iterations) {
                    report.remesh_splits += it.splits;
                    report.remesh_collapses += it.collapses;
                    report.q_avg_per_iteration.push_back(it.q_avg);
                }
                report.remesh_deficit = stats.vertex_deficit;
                MeshTopology topo = mesh.topology();
                report.vertex_count = topo.vertices + topo.isolated_vertices;
                report.boundary_loop_count = topo.boundary_loops;
                report.component_count = topo.components;
                report.euler_characteristic = topo.euler_characteristic;
                report.closed = topo.closed;
                save_report(report, rem_report);
            }
            std::cout << out_path << ": q_avg " << q_before << " -> "
                      << (stats.iterations.empty() ? q_before : stats.iterations.back().q_avg)
                      << "\n";
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return classify_exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPipeline;
    }
    return kExitUsage;
}
