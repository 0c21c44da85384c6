#include "icet/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace icet {

namespace {

bool finite3(const Vec3& p) {
    return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
}

std::string quote_csv(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

LoadResult load_bin_xyzi(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open scan file: " + path.string());
    const std::streamsize bytes = in.tellg();
    if (bytes % 16 != 0) {
        throw FormatError("truncated bin_xyzi record in " + path.string() + ": " +
                          std::to_string(bytes) + " bytes is not a multiple of 16");
    }
    in.seekg(0);
    const std::size_t n = static_cast<std::size_t>(bytes) / 16;
    std::vector<float> raw(n * 4);
    if (n > 0 && !in.read(reinterpret_cast<char*>(raw.data()), bytes)) {
        throw IoError("short read on " + path.string());
    }

    LoadResult result;
    result.cloud.points.reserve(n);
    result.cloud.intensity.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 p(raw[4 * i], raw[4 * i + 1], raw[4 * i + 2]);
        if (!finite3(p)) {
            ++result.dropped_nonfinite;
            continue;
        }
        result.cloud.points.push_back(p);
        result.cloud.intensity.push_back(raw[4 * i + 3]);
    }
    return result;
}

void save_bin_xyzi(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write scan file: " + path.string());
    std::vector<float> raw(cloud.size() * 4);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        raw[4 * i] = static_cast<float>(cloud.points[i].x());
        raw[4 * i + 1] = static_cast<float>(cloud.points[i].y());
        raw[4 * i + 2] = static_cast<float>(cloud.points[i].z());
        raw[4 * i + 3] = cloud.has_intensity() ? cloud.intensity[i] : 0.0f;
    }
    if (!raw.empty() &&
        !out.write(reinterpret_cast<const char*>(raw.data()),
                   static_cast<std::streamsize>(raw.size() * sizeof(float)))) {
        throw IoError("short write on " + path.string());
    }
}

LoadResult load_ply_ascii(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scan file: " + path.string());

    std::string line;
    if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
        throw FormatError("malformed PLY header in " + path.string() + ": missing 'ply' magic");
    }

    std::size_t vertex_count = 0;
    bool seen_vertex_element = false;
    bool in_vertex_element = false;
    std::vector<std::string> vertex_props;
    bool header_done = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") continue;
        if (tok == "format") {
            std::string fmt;
            ls >> fmt;
            if (fmt != "ascii") throw FormatError("PLY is not ascii in " + path.string());
        } else if (tok == "element") {
            std::string name;
            ls >> name >> vertex_count;
            if (name != "vertex") {
                // Only vertex elements are supported; anything else would
                // desynchronize the row reader.
                throw FormatError("unsupported PLY element '" + name + "' in " + path.string());
            }
            seen_vertex_element = true;
            in_vertex_element = true;
        } else if (tok == "property") {
            if (!in_vertex_element) throw FormatError("PLY property before element in " + path.string());
            std::string type, name;
            ls >> type >> name;
            if (type != "float" && type != "float32" && type != "double" && type != "float64") {
                throw FormatError("unsupported PLY property type '" + type + "' in " + path.string());
            }
            vertex_props.push_back(name);
        } else if (tok == "end_header") {
            header_done = true;
            break;
        } else {
            throw FormatError("unexpected PLY header token '" + tok + "' in " + path.string());
        }
    }
    if (!header_done || !seen_vertex_element) {
        throw FormatError("malformed PLY header in " + path.string());
    }

    auto find_prop = [&](const char* name) -> int {
        for (std::size_t i = 0; i < vertex_props.size(); ++i) {
            if (vertex_props[i] == name) return static_cast<int>(i);
        }
        return -1;
    };
    const int ix = find_prop("x"), iy = find_prop("y"), iz = find_prop("z");
    const int ii = find_prop("intensity");
    if (ix < 0 || iy < 0 || iz < 0) {
        throw FormatError("PLY header lacks float x,y,z properties in " + path.string());
    }

    LoadResult result;
    result.cloud.points.reserve(vertex_count);
    std::vector<double> fields(vertex_props.size());
    for (std::size_t v = 0; v < vertex_count; ++v) {
        if (!std::getline(in, line)) {
            throw FormatError("PLY vertex list shorter than declared count in " + path.string());
        }
        std::istringstream ls(line);
        for (double& f : fields) {
            if (!(ls >> f)) throw FormatError("bad PLY vertex row in " + path.string());
        }
        const Vec3 p(fields[ix], fields[iy], fields[iz]);
        if (!finite3(p)) {
            ++result.dropped_nonfinite;
            continue;
        }
        result.cloud.points.push_back(p);
        if (ii >= 0) result.cloud.intensity.push_back(static_cast<float>(fields[ii]));
    }
    return result;
}

void save_ply_ascii(const PointCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write scan file: " + path.string());
    out << "ply\nformat ascii 1.0\n";
    out << "element vertex " << cloud.size() << "\n";
    out << "property float x\nproperty float y\nproperty float z\n";
    if (cloud.has_intensity()) out << "property float intensity\n";
    out << "end_header\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        out << format_double(cloud.points[i].x()) << ' ' << format_double(cloud.points[i].y())
            << ' ' << format_double(cloud.points[i].z());
        if (cloud.has_intensity()) out << ' ' << format_double(cloud.intensity[i]);
        out << '\n';
    }
    if (!out) throw IoError("short write on " + path.string());
}

}  // namespace

ScanFormat format_from_path(const std::filesystem::path& path) {
    return path.extension() == ".ply" ? ScanFormat::PlyAscii : ScanFormat::BinXYZI;
}

LoadResult load_scan(const std::filesystem::path& path, ScanFormat format) {
    switch (format) {
        case ScanFormat::BinXYZI:
            return load_bin_xyzi(path);
        case ScanFormat::PlyAscii:
            return load_ply_ascii(path);
    }
    throw std::logic_error("unreachable scan format");
}

void save_scan(const PointCloud& cloud, const std::filesystem::path& path, ScanFormat format) {
    switch (format) {
        case ScanFormat::BinXYZI:
            save_bin_xyzi(cloud, path);
            return;
        case ScanFormat::PlyAscii:
            save_ply_ascii(cloud, path);
            return;
    }
    throw std::logic_error("unreachable scan format");
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string CsvValue::to_string() const {
    struct Visitor {
        std::string operator()(double v) const { return format_double(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(bool v) const { return v ? "1" : "0"; }
        std::string operator()(const std::string& v) const { return quote_csv(v); }
    };
    return std::visit(Visitor{}, value);
}

void write_table(const std::vector<CsvRow>& rows, const std::filesystem::path& path) {
    std::vector<std::string> header;
    if (!rows.empty()) {
        header.reserve(rows.front().size());
        for (const auto& [name, _] : rows.front()) header.push_back(name);
    }
    write_table(header, rows, path);
}

void write_table(const std::vector<std::string>& header, const std::vector<CsvRow>& rows,
                 const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write table: " + path.string());

    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << quote_csv(header[i]);
    }
    out << '\n';

    for (const CsvRow& row : rows) {
        if (row.size() != header.size()) {
            throw std::invalid_argument("inconsistent CSV row width for " + path.string());
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (row[i].first != header[i]) {
                throw std::invalid_argument("inconsistent CSV field names for " + path.string());
            }
            out << (i ? "," : "") << row[i].second.to_string();
        }
        out << '\n';
    }
    if (!out) throw IoError("short write on " + path.string());
}

}  // namespace icet
