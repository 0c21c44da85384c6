#pragma once

#include "icet/core.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace icet {

/// File could not be opened, read or written.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File opened but its contents do not match the declared format
/// (truncated record, malformed PLY header, ...).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ScanFormat {
    BinXYZI,   // packed little-endian float32 x,y,z,intensity (16 bytes/point)
    PlyAscii,  // ASCII PLY with float x,y,z (+ optional intensity) properties
};

/// Picks PlyAscii for a ".ply" extension, BinXYZI otherwise.
ScanFormat format_from_path(const std::filesystem::path& path);

struct LoadResult {
    PointCloud cloud;
    std::size_t dropped_nonfinite = 0;
};

/// Loads a scan, dropping (and counting) points with NaN/Inf coordinates.
LoadResult load_scan(const std::filesystem::path& path, ScanFormat format);

/// Inverse of load_scan for finite clouds. bin_xyzi stores float32, so
/// coordinates round-trip bit-exactly only at float32 precision; the PLY
/// writer prints 9 significant digits (round-trip within 1e-6).
void save_scan(const PointCloud& cloud, const std::filesystem::path& path, ScanFormat format);

/// One CSV cell. Doubles print with 9 significant digits, booleans as 0/1.
struct CsvValue {
    std::variant<double, std::int64_t, bool, std::string> value;

    CsvValue(double v) : value(v) {}
    CsvValue(int v) : value(static_cast<std::int64_t>(v)) {}
    CsvValue(std::size_t v) : value(static_cast<std::int64_t>(v)) {}
    CsvValue(std::int64_t v) : value(v) {}
    CsvValue(bool v) : value(v) {}
    CsvValue(std::string v) : value(std::move(v)) {}
    CsvValue(const char* v) : value(std::string(v)) {}

    std::string to_string() const;
};

using CsvRow = std::vector<std::pair<std::string, CsvValue>>;

/// RFC-4180-style CSV with a header row and '\n' line endings. Field names
/// must be identical across rows. Output is deterministic: identical rows
/// yield identical bytes.
void write_table(const std::vector<CsvRow>& rows, const std::filesystem::path& path);

/// Header-only variant for empty tables.
void write_table(const std::vector<std::string>& header, const std::vector<CsvRow>& rows,
                 const std::filesystem::path& path);

/// %.9g formatting shared by the CSV and table writers.
std::string format_double(double v);

}  // namespace icet
