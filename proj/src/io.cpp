#include "voxmesh/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace voxmesh {

namespace {

using json = nlohmann::ordered_json;

std::string lower_ext(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
    raise(ErrorCode::ParseError,
          path.string() + ":" + std::to_string(line) + ": " + what);
}

// --- PLY ----------------------------------------------------------------------

enum class PlyType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::size_t ply_type_size(PlyType t) {
    switch (t) {
        case PlyType::Int8:
        case PlyType::UInt8: return 1;
        case PlyType::Int16:
        case PlyType::UInt16: return 2;
        case PlyType::Int32:
        case PlyType::UInt32:
        case PlyType::Float32: return 4;
        case PlyType::Float64: return 8;
    }
    return 0;
}

std::optional<PlyType> ply_type_of(const std::string& name) {
    if (name == "char" || name == "int8") return PlyType::Int8;
    if (name == "uchar" || name == "uint8") return PlyType::UInt8;
    if (name == "short" || name == "int16") return PlyType::Int16;
    if (name == "ushort" || name == "uint16") return PlyType::UInt16;
    if (name == "int" || name == "int32") return PlyType::Int32;
    if (name == "uint" || name == "uint32") return PlyType::UInt32;
    if (name == "float" || name == "float32") return PlyType::Float32;
    if (name == "double" || name == "float64") return PlyType::Float64;
    return std::nullopt;
}

double read_binary_scalar(std::istream& in, PlyType t) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(ply_type_size(t)));
    switch (t) {
        case PlyType::Int8: return static_cast<double>(static_cast<std::int8_t>(buf[0]));
        case PlyType::UInt8: return static_cast<double>(buf[0]);
        case PlyType::Int16: {
            std::int16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::UInt16: {
            std::uint16_t v;
            std::memcpy(&v, buf, 2);
            return v;
        }
        case PlyType::Int32: {
            std::int32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::UInt32: {
            std::uint32_t v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::Float32: {
            float v;
            std::memcpy(&v, buf, 4);
            return v;
        }
        case PlyType::Float64: {
            double v;
            std::memcpy(&v, buf, 8);
            return v;
        }
    }
    return 0.0;
}

struct PlyProperty {
    std::string name;
    PlyType type = PlyType::Float32;
    bool is_list = false;
    PlyType count_type = PlyType::UInt8;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> properties;
};

struct PlyData {
    std::vector<Vec3> positions;
    std::optional<std::vector<int>> labels;
    std::vector<std::array<int, 3>> faces;
};

PlyData load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&]() {
        if (!std::getline(in, line)) parse_fail(path, line_no, "unexpected end of header");
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
    };

    next_line();
    if (line != "ply") parse_fail(path, line_no, "missing ply magic");

    bool binary = false;
    std::vector<PlyElement> elements;
    while (true) {
        next_line();
        std::istringstream ss(line);
        std::string keyword;
        ss >> keyword;
        if (keyword == "end_header") break;
        if (keyword == "comment" || keyword == "obj_info" || keyword.empty()) continue;
        if (keyword == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "ascii") {
                binary = false;
            } else if (fmt == "binary_little_endian") {
                binary = true;
            } else {
                parse_fail(path, line_no, "unsupported format " + fmt);
            }
        } else if (keyword == "element") {
            PlyElement element;
            ss >> element.name >> element.count;
            if (ss.fail()) parse_fail(path, line_no, "bad element line");
            elements.push_back(element);
        } else if (keyword == "property") {
            if (elements.empty()) parse_fail(path, line_no, "property before element");
            PlyProperty prop;
            std::string type_name;
            ss >> type_name;
            if (type_name == "list") {
                prop.is_list = true;
                std::string count_name, value_name;
                ss >> count_name >> value_name >> prop.name;
                auto ct = ply_type_of(count_name), vt = ply_type_of(value_name);
                if (!ct || !vt) parse_fail(path, line_no, "unknown list types");
                prop.count_type = *ct;
                prop.type = *vt;
            } else {
                ss >> prop.name;
                auto t = ply_type_of(type_name);
                if (!t) parse_fail(path, line_no, "unknown property type " + type_name);
                prop.type = *t;
            }
            if (ss.fail()) parse_fail(path, line_no, "bad property line");
            elements.back().properties.push_back(prop);
        } else {
            parse_fail(path, line_no, "unknown header keyword " + keyword);
        }
    }

    PlyData data;
    std::istringstream ascii_row;
    auto ascii_next_row = [&]() {
        next_line();
        ascii_row.clear();
        ascii_row.str(line);
    };
    auto read_scalar = [&](PlyType t) {
        if (binary) return read_binary_scalar(in, t);
        double v;
        ascii_row >> v;
        if (ascii_row.fail()) parse_fail(path, line_no, "bad numeric record");
        return v;
    };

    for (const PlyElement& element : elements) {
        if (element.name == "vertex") {
            int ix = -1, iy = -1, iz = -1, iclass = -1;
            for (std::size_t p = 0; p < element.properties.size(); ++p) {
                const std::string& name = element.properties[p].name;
                if (name == "x") ix = static_cast<int>(p);
                if (name == "y") iy = static_cast<int>(p);
                if (name == "z") iz = static_cast<int>(p);
                if (name == "class") iclass = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0) parse_fail(path, line_no, "vertex lacks x/y/z");
            if (iclass >= 0) data.labels.emplace();
            data.positions.reserve(element.count);
            for (std::size_t i = 0; i < element.count; ++i) {
                if (!binary) ascii_next_row();
                Vec3 pos;
                for (std::size_t p = 0; p < element.properties.size(); ++p) {
                    const PlyProperty& prop = element.properties[p];
                    if (prop.is_list) parse_fail(path, line_no, "list property on vertex");
                    double v = read_scalar(prop.type);
                    if (static_cast<int>(p) == ix) pos.x() = v;
                    if (static_cast<int>(p) == iy) pos.y() = v;
                    if (static_cast<int>(p) == iz) pos.z() = v;
                    if (static_cast<int>(p) == iclass) {
                        data.labels->push_back(static_cast<int>(v));
                    }
                }
                data.positions.push_back(pos);
            }
        } else {
            // face (or any foreign element: parsed to keep the stream aligned)
            bool is_face = element.name == "face";
            for (std::size_t i = 0; i < element.count; ++i) {
                if (!binary) ascii_next_row();
                for (const PlyProperty& prop : element.properties) {
                    if (prop.is_list) {
                        int count = static_cast<int>(read_scalar(prop.count_type));
                        std::vector<int> poly(count);
                        for (int j = 0; j < count; ++j) {
                            poly[j] = static_cast<int>(read_scalar(prop.type));
                        }
                        if (is_face &&
                            (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
                            if (count < 3) parse_fail(path, line_no, "face with < 3 vertices");
                            for (int j = 1; j + 1 < count; ++j) {
                                data.faces.push_back({poly[0], poly[j], poly[j + 1]});
                            }
                        }
                    } else {
                        read_scalar(prop.type);
                    }
                }
            }
        }
        if (binary && !in) parse_fail(path, line_no, "truncated binary payload");
    }
    if (data.labels && data.labels->size() != data.positions.size()) {
        parse_fail(path, line_no, "class property incomplete");
    }
    return data;
}

// --- OBJ / XYZ -------------------------------------------------------------------

PlyData load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    PlyData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x() >> p.y() >> p.z();
            if (ss.fail()) parse_fail(path, line_no, "bad vertex record");
            data.positions.push_back(p);
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string token;
            while (ss >> token) {
                // "i", "i/t", "i/t/n", "i//n" all start with the index
                int idx = 0;
                auto res = std::from_chars(token.data(), token.data() + token.size(), idx);
                if (res.ec != std::errc() || idx == 0) {
                    parse_fail(path, line_no, "bad face index '" + token + "'");
                }
                if (idx < 0) idx = static_cast<int>(data.positions.size()) + idx + 1;
                poly.push_back(idx - 1);
            }
            if (poly.size() < 3) parse_fail(path, line_no, "face with < 3 vertices");
            for (std::size_t j = 1; j + 1 < poly.size(); ++j) {
                data.faces.push_back({poly[0], static_cast<int>(poly[j]),
                                      static_cast<int>(poly[j + 1])});
            }
        }
    }
    return data;
}

PlyData load_xyz(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path.string());
    PlyData data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec3 p;
        ss >> p.x() >> p.y() >> p.z();
        if (ss.fail()) {
            std::string probe;
            std::istringstream(line) >> probe;
            if (probe.empty()) continue; // whitespace-only line
            parse_fail(path, line_no, "bad xyz record");
        }
        data.positions.push_back(p); // extra columns (normals etc.) ignored
    }
    return data;
}

} // namespace

CloudFormat cloud_format_of(const std::filesystem::path& path) {
    std::string ext = lower_ext(path);
    if (ext == ".ply") return CloudFormat::Ply;
    if (ext == ".obj") return CloudFormat::Obj;
    return CloudFormat::Xyz;
}

MeshFormat mesh_format_of(const std::filesystem::path& path) {
    return lower_ext(path) == ".obj" ? MeshFormat::Obj : MeshFormat::Ply;
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
    return load_point_cloud(path, cloud_format_of(path));
}

PointCloud load_point_cloud(const std::filesystem::path& path, CloudFormat format) {
    PlyData data;
    switch (format) {
        case CloudFormat::Ply: data = load_ply(path); break;
        case CloudFormat::Obj: data = load_obj(path); break;
        case CloudFormat::Xyz: data = load_xyz(path); break;
    }
    if (data.positions.empty()) raise(ErrorCode::EmptyInput, "no points in " + path.string());
    PointCloud cloud;
    cloud.points = std::move(data.positions);
    cloud.labels = std::move(data.labels);
    cloud.validate();
    return cloud;
}

LoadedMesh load_mesh(const std::filesystem::path& path) {
    PlyData data = mesh_format_of(path) == MeshFormat::Obj ? load_obj(path) : load_ply(path);
    if (data.positions.empty()) raise(ErrorCode::EmptyInput, "no vertices in " + path.string());
    return {std::move(data.positions), std::move(data.faces), std::move(data.labels)};
}

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) raise(ErrorCode::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) raise(ErrorCode::IoError, "cannot rename into " + path.string());
}

namespace {

void append_float32_le(std::string& out, float v) {
    char buf[4];
    std::memcpy(buf, &v, 4);
    out.append(buf, 4);
}

std::string ply_header(std::size_t vertices, std::size_t faces, bool binary, bool with_class,
                       bool with_color, bool face_element) {
    std::string h = "ply\n";
    h += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
    h += "element vertex " + std::to_string(vertices) + "\n";
    h += "property float x\nproperty float y\nproperty float z\n";
    if (with_class) h += "property int class\n";
    if (with_color) h += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
    if (face_element) {
        h += "element face " + std::to_string(faces) + "\n";
        h += "property list uchar int vertex_indices\n";
    }
    h += "end_header\n";
    return h;
}

} // namespace

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyEncoding encoding) {
    if (cloud_format_of(path) == CloudFormat::Xyz) {
        std::string out;
        for (const Vec3& p : cloud.points) {
            out += format_double(p.x());
            out += ' ';
            out += format_double(p.y());
            out += ' ';
            out += format_double(p.z());
            out += '\n';
        }
        atomic_write(path, out);
        return;
    }

    const bool binary = encoding == PlyEncoding::BinaryLittleEndian;
    const bool with_class = cloud.labels.has_value();
    std::string out = ply_header(cloud.size(), 0, binary, with_class, false, false);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.points[i];
        if (binary) {
            append_float32_le(out, static_cast<float>(p.x()));
            append_float32_le(out, static_cast<float>(p.y()));
            append_float32_le(out, static_cast<float>(p.z()));
            if (with_class) {
                std::int32_t c = (*cloud.labels)[i];
                char buf[4];
                std::memcpy(buf, &c, 4);
                out.append(buf, 4);
            }
        } else {
            out += format_double(static_cast<double>(static_cast<float>(p.x())));
            out += ' ';
            out += format_double(static_cast<double>(static_cast<float>(p.y())));
            out += ' ';
            out += format_double(static_cast<double>(static_cast<float>(p.z())));
            if (with_class) {
                out += ' ';
                out += std::to_string((*cloud.labels)[i]);
            }
            out += '\n';
        }
    }
    atomic_write(path, out);
}

void save_mesh(const HalfEdgeMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::array<std::uint8_t, 3>>* vertex_colors,
               PlyEncoding encoding) {
    auto [positions, faces] = mesh.extract();

    // flags ride along as the "class" property when any vertex carries one
    std::vector<int> flags;
    bool with_class = false;
    {
        flags.reserve(positions.size());
        for (int v = 0; v < mesh.vertices_size(); ++v) {
            if (mesh.vertex_deleted(v)) continue;
            int f = static_cast<int>(mesh.flag(v));
            flags.push_back(f);
            with_class |= f != 0;
        }
    }

    if (mesh_format_of(path) == MeshFormat::Obj) {
        std::string out;
        for (const Vec3& p : positions) {
            out += "v ";
            out += format_double(p.x());
            out += ' ';
            out += format_double(p.y());
            out += ' ';
            out += format_double(p.z());
            out += '\n';
        }
        for (const auto& t : faces) {
            out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
                   std::to_string(t[2] + 1) + '\n';
        }
        atomic_write(path, out);
        return;
    }

    const bool binary = encoding == PlyEncoding::BinaryLittleEndian;
    const bool with_color = vertex_colors != nullptr;
    if (with_color && vertex_colors->size() != positions.size()) {
        raise(ErrorCode::InvalidParam, "color array does not match vertex count");
    }
    std::string out =
        ply_header(positions.size(), faces.size(), binary, with_class, with_color, true);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const Vec3& p = positions[i];
        if (binary) {
            append_float32_le(out, static_cast<float>(p.x()));
            append_float32_le(out, static_cast<float>(p.y()));
            append_float32_le(out, static_cast<float>(p.z()));
            if (with_class) {
                std::int32_t c = flags[i];
                char buf[4];
                std::memcpy(buf, &c, 4);
                out.append(buf, 4);
            }
            if (with_color) {
                out.append(reinterpret_cast<const char*>((*vertex_colors)[i].data()), 3);
            }
        } else {
            out += format_double(static_cast<double>(static_cast<float>(p.x())));
            out += ' ';
            out += format_double(static_cast<double>(static_cast<float>(p.y())));
            out += ' ';
            out += format_double(static_cast<double>(static_cast<float>(p.z())));
            if (with_class) out += ' ' + std::to_string(flags[i]);
            if (with_color) {
                const auto& c = (*vertex_colors)[i];
                out += ' ' + std::to_string(c[0]) + ' ' + std::to_string(c[1]) + ' ' +
                       std::to_string(c[2]);
            }
            out += '\n';
        }
    }
    for (const auto& t : faces) {
        if (binary) {
            out += static_cast<char>(3);
            for (int v : t) {
                std::int32_t idx = v;
                char buf[4];
                std::memcpy(buf, &idx, 4);
                out.append(buf, 4);
            }
        } else {
            out += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' +
                   std::to_string(t[2]) + '\n';
        }
    }
    atomic_write(path, out);
}

namespace {

json stat_or_null(const MaybeStat& stat) {
    if (stat.value) return *stat.value;
    return nullptr;
}

} // namespace

std::string report_to_json(const ReportDocument& report) {
    const QualityReport& q = report.quality;
    const bool empty = q.triangle_count == 0;

    json doc;
    doc["schema"] = "voxmesh-report-v1";
    doc["input"] = report.input_path;
    doc["target_points"] = report.target_points;
    doc["config_hash"] = report.config_hash;
    doc["seed"] = report.seed;

    json mesh;
    mesh["vertices"] = report.vertex_count;
    mesh["triangles"] = q.triangle_count;
    mesh["boundary_loops"] = report.boundary_loop_count;
    mesh["components"] = report.component_count;
    mesh["euler_characteristic"] = report.euler_characteristic;
    mesh["closed"] = report.closed;
    doc["mesh"] = mesh;

    json metrics;
    metrics["q_min"] = empty ? json(nullptr) : stat_or_null(q.q_min);
    if (!empty && !q.q_min.value) metrics["q_min_reason"] = q.q_min.nan_reason;
    metrics["q_avg"] = empty ? json(nullptr) : json(q.q_avg);
    metrics["theta_min_deg"] = empty ? json(nullptr) : stat_or_null(q.theta_min);
    if (!empty && !q.theta_min.value) metrics["theta_min_reason"] = q.theta_min.nan_reason;
    metrics["theta_avg_deg"] = empty ? json(nullptr) : json(q.theta_avg);
    if (q.mls_computed) {
        json mls;
        mls["max"] = q.mls_max;
        mls["avg"] = q.mls_avg;
        metrics["mls"] = mls;
    } else {
        metrics["mls"] = nullptr;
    }
    doc["metrics"] = metrics;

    json histogram;
    json edges = json::array();
    for (int b = 0; b <= kHistogramBins; ++b) {
        edges.push_back(60.0 * b / kHistogramBins);
    }
    json counts = json::array();
    for (int b = 0; b < kHistogramBins; ++b) {
        counts.push_back(empty || q.histogram.empty() ? 0 : q.histogram[b]);
    }
    histogram["bin_edges_deg"] = edges;
    histogram["counts"] = counts;
    doc["histogram"] = histogram;

    json remesh;
    remesh["splits"] = report.remesh_splits;
    remesh["collapses"] = report.remesh_collapses;
    remesh["vertex_deficit"] = report.remesh_deficit;
    remesh["q_avg_initial"] = report.q_avg_initial;
    remesh["q_avg_per_iteration"] = report.q_avg_per_iteration;
    doc["remesh"] = remesh;

    json timings;
    for (const auto& [stage, ms] : report.timings_ms) timings[stage] = ms;
    doc["timings_ms"] = timings;

    if (!report.effective_config_json.empty()) {
        doc["config"] = json::parse(report.effective_config_json);
    } else {
        doc["config"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

void save_report(const ReportDocument& report, const std::filesystem::path& path) {
    atomic_write(path, report_to_json(report));
}

void save_histogram_csv(const ReportDocument& report, const std::filesystem::path& path) {
    const QualityReport& q = report.quality;
    std::string out = "bin_start_deg,bin_end_deg,count\n";
    for (int b = 0; b < kHistogramBins; ++b) {
        long count = q.histogram.empty() ? 0 : q.histogram[b];
        out += format_double(60.0 * b / kHistogramBins);
        out += ',';
        out += format_double(60.0 * (b + 1) / kHistogramBins);
        out += ',';
        out += std::to_string(count);
        out += '\n';
    }
    atomic_write(path, out);
}

} // namespace voxmesh
