#include "icet/io.hpp"
#include "icet/rng.hpp"

#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace icet;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "icet_io_tests";
    fs::create_directories(dir);
    return dir;
}

void write_bytes(const fs::path& p, const std::vector<float>& floats) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(floats.data()),
              static_cast<std::streamsize>(floats.size() * sizeof(float)));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Minimal independent CSV parse for the round-trip oracle.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

TEST_CASE("bin_xyzi load of a two-point fixture") {
    const fs::path p = temp_dir() / "two.bin";
    write_bytes(p, {1.0f, 2.0f, 3.0f, 0.5f, -4.0f, -5.0f, -6.0f, 0.0f});
    const LoadResult r = load_scan(p, ScanFormat::BinXYZI);
    CHECK(r.cloud.size() == 2);
    CHECK(r.dropped_nonfinite == 0);
    CHECK(r.cloud.points[0] == Vec3(1, 2, 3));
    CHECK(r.cloud.intensity[0] == 0.5f);
}

TEST_CASE("bin_xyzi drops non-finite points and counts them") {
    const fs::path p = temp_dir() / "nan.bin";
    write_bytes(p, {1.0f, 2.0f, 3.0f, 0.0f, std::numeric_limits<float>::quiet_NaN(), 0.0f, 0.0f,
                    0.0f, 7.0f, 8.0f, 9.0f, 0.0f});
    const LoadResult r = load_scan(p, ScanFormat::BinXYZI);
    CHECK(r.cloud.size() == 2);
    CHECK(r.dropped_nonfinite == 1);
}

TEST_CASE("bin_xyzi round-trip is byte identical") {
    Rng rng(7);
    PointCloud cloud;
    for (int i = 0; i < 10000; ++i) {
        // float32-representable coordinates: the format stores float32.
        cloud.points.emplace_back(static_cast<float>(rng.gaussian(20.0)),
                                  static_cast<float>(rng.gaussian(20.0)),
                                  static_cast<float>(rng.gaussian(20.0)));
        cloud.intensity.push_back(static_cast<float>(rng.uniform01()));
    }
    const fs::path a = temp_dir() / "round_a.bin";
    const fs::path b = temp_dir() / "round_b.bin";
    save_scan(cloud, a, ScanFormat::BinXYZI);
    const LoadResult r = load_scan(a, ScanFormat::BinXYZI);
    save_scan(r.cloud, b, ScanFormat::BinXYZI);
    CHECK(read_file(a) == read_file(b));
    CHECK(r.cloud.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK(r.cloud.points[i] == cloud.points[i]);
    }
}

TEST_CASE("empty cloud saves to an empty bin_xyzi payload") {
    const fs::path p = temp_dir() / "empty.bin";
    save_scan(PointCloud{}, p, ScanFormat::BinXYZI);
    CHECK(fs::file_size(p) == 0);
    CHECK(load_scan(p, ScanFormat::BinXYZI).cloud.empty());
}

TEST_CASE("bin_xyzi rejects byte counts not divisible by 16") {
    const fs::path p = temp_dir() / "trunc.bin";
    write_bytes(p, {1.0f, 2.0f, 3.0f});
    CHECK_THROWS_AS(load_scan(p, ScanFormat::BinXYZI), FormatError);
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(load_scan(temp_dir() / "nope.bin", ScanFormat::BinXYZI), IoError);
}

TEST_CASE("ply header vertex count equals point count and round-trips within 1e-6") {
    PointCloud cloud;
    Rng rng(8);
    for (int i = 0; i < 500; ++i) {
        cloud.points.emplace_back(rng.gaussian(10.0), rng.gaussian(10.0), rng.gaussian(10.0));
    }
    const fs::path p = temp_dir() / "cloud.ply";
    save_scan(cloud, p, ScanFormat::PlyAscii);

    const std::string text = read_file(p);
    CHECK(text.find("element vertex 500") != std::string::npos);

    const LoadResult r = load_scan(p, ScanFormat::PlyAscii);
    REQUIRE(r.cloud.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((r.cloud.points[i] - cloud.points[i]).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("malformed ply header raises FormatError") {
    const fs::path p = temp_dir() / "bad.ply";
    std::ofstream(p) << "plyx\nnot a header\n";
    CHECK_THROWS_AS(load_scan(p, ScanFormat::PlyAscii), FormatError);
}

TEST_CASE("csv single record") {
    const fs::path p = temp_dir() / "ab.csv";
    write_table({{{"a", 1.0}, {"b", 2.0}}}, p);
    CHECK(read_file(p) == "a,b\n1,2\n");
}

TEST_CASE("csv header-only table") {
    const fs::path p = temp_dir() / "hdr.csv";
    write_table({"alpha", "beta"}, {}, p);
    CHECK(read_file(p) == "alpha,beta\n");
}

TEST_CASE("csv parses back with a generic reader") {
    const fs::path p = temp_dir() / "mc.csv";
    std::vector<CsvRow> rows;
    for (int t = 0; t < 3; ++t) {
        rows.push_back({{"trial", t}, {"rmse", 0.001 * (t + 1)}, {"converged", true}});
    }
    write_table(rows, p);
    const auto parsed = parse_csv(read_file(p));
    REQUIRE(parsed.size() == 4);
    CHECK(parsed[0] == std::vector<std::string>{"trial", "rmse", "converged"});
    CHECK(parsed[2][0] == "1");
    CHECK(std::stod(parsed[3][1]) == doctest::Approx(0.003));
}

TEST_CASE("csv floats print with nine significant digits") {
    const fs::path p = temp_dir() / "digits.csv";
    write_table({{{"v", 0.123456789123}}}, p);
    CHECK(read_file(p) == "v\n0.123456789\n");
}

TEST_CASE("csv writer is deterministic") {
    const fs::path a = temp_dir() / "det_a.csv";
    const fs::path b = temp_dir() / "det_b.csv";
    const std::vector<CsvRow> rows{{{"x", 1.2345}, {"y", -7}}};
    write_table(rows, a);
    write_table(rows, b);
    CHECK(read_file(a) == read_file(b));
}

TEST_CASE("inconsistent field names are rejected") {
    const fs::path p = temp_dir() / "bad.csv";
    const std::vector<CsvRow> rows{{{"a", 1.0}}, {{"b", 2.0}}};
    CHECK_THROWS_AS(write_table(rows, p), std::invalid_argument);
}
