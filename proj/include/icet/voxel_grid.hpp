#pragma once

#include "icet/core.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

namespace icet {

/// Reference scan produced no voxel with enough points: the scan is
/// unusable for registration.
struct EmptyGridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridConfig {
    double angular_resolution_deg = 4.0;  // per voxel, azimuth and elevation
    double elevation_min_deg = -25.0;
    double elevation_max_deg = 25.0;
    std::size_t min_points = 50;        // per voxel, both scans
    double radial_gap_threshold = 1.5;  // m, splits radial runs
    double min_range = 0.5;             // m
    double max_range = 80.0;            // m
};

struct VoxelKey {
    int az = 0;
    int el = 0;
    auto operator<=>(const VoxelKey&) const = default;
};

/// Spherical wedge: half-open angular intervals, closed radial interval.
struct WedgeBounds {
    double az_lo = 0, az_hi = 0;  // rad, within [-pi, pi)
    double el_lo = 0, el_hi = 0;  // rad
    double r_lo = 0, r_hi = 0;    // m

    bool contains(const Vec3& p) const;
};

struct Spherical {
    double az, el, r;
};
Spherical to_spherical(const Vec3& p);

struct VoxelStats {
    VoxelKey key;
    WedgeBounds bounds;
    std::size_t n = 0;
    Vec3 mean = Vec3::Zero();
    Mat3 Q = Mat3::Zero();  // population (1/N) covariance of point locations
    // Eigenstructure of Q: columns of eigvecs ordered by descending
    // eigenvalue, sign fixed so the largest-magnitude component is positive.
    Mat3 eigvecs = Mat3::Identity();
    Vec3 eigvals = Vec3::Zero();  // descending, clamped at zero
    std::array<bool, 3> axis_mask{true, true, true};  // true = axis retained
};

/// Mean and population covariance accumulated in one pass over a point
/// range, plus the eigendecomposition with the deterministic ordering/sign
/// convention above.
struct MomentAccumulator {
    std::size_t n = 0;
    Vec3 sum = Vec3::Zero();
    Mat3 outer = Mat3::Zero();

    void add(const Vec3& p) {
        ++n;
        sum += p;
        outer += p * p.transpose();
    }
    Vec3 mean() const { return sum / static_cast<double>(n); }
    Mat3 covariance() const {
        const Vec3 m = mean();
        Mat3 Q = outer / static_cast<double>(n) - m * m.transpose();
        return 0.5 * (Q + Q.transpose());
    }
};

/// Eigendecomposition sorted by descending eigenvalue with the
/// largest-|component|-positive sign convention; eigenvalues clamped at 0.
void sorted_eigen(const Mat3& Q, Mat3& eigvecs, Vec3& eigvals);

/// New-scan per-voxel statistics for one solver iteration.
struct NewScanStats {
    std::size_t n = 0;
    Vec3 mean_transformed = Vec3::Zero();  // mean of q = R p - t
    Vec3 mean_original = Vec3::Zero();     // mean of p (drives the Jacobian)
    Mat3 Q = Mat3::Zero();                 // population covariance of q
};

/// Spherical voxel grid over a reference scan: one voxel of adaptive radial
/// depth per (azimuth, elevation) column. Immutable after build; safe for
/// concurrent readers.
class SphericalGrid {
public:
    static SphericalGrid build(const PointCloud& reference, const GridConfig& cfg);

    const GridConfig& config() const { return cfg_; }
    int azimuth_columns() const { return n_az_; }
    int elevation_rows() const { return n_el_; }
    double realized_az_step() const { return az_step_; }   // rad
    double realized_el_step() const { return el_step_; }   // rad

    /// Voxels in ascending key order.
    const std::vector<VoxelStats>& voxels() const { return voxels_; }
    std::vector<VoxelStats>& mutable_voxels() { return voxels_; }
    const VoxelStats* find(VoxelKey key) const;

    /// Column containing a direction, ignoring radial bounds. nullopt when
    /// outside the elevation span or range gates.
    std::optional<VoxelKey> column_of(const Spherical& s) const;

    /// Per-voxel point index lists, parallel to voxels(). A point is
    /// assigned iff its column owns a voxel and its range lies within the
    /// voxel's radial bounds.
    std::vector<std::vector<std::uint32_t>> assign_points(const PointCloud& cloud) const;

    /// Per-voxel statistics of the transformed new scan; voxels with fewer
    /// than min_points assigned are nullopt for this iteration.
    std::vector<std::optional<NewScanStats>> new_scan_stats(
        const PointCloud& transformed, const PointCloud& original,
        const std::vector<std::vector<std::uint32_t>>& assignment) const;

    /// Debug dump: one row per voxel (key, bounds, N, mean, Q upper triangle).
    void dump_csv(const std::filesystem::path& path) const;

private:
    GridConfig cfg_;
    int n_az_ = 0, n_el_ = 0;
    double az_step_ = 0, el_step_ = 0;
    std::vector<VoxelStats> voxels_;
    std::vector<int> column_to_voxel_;  // n_az*n_el entries, -1 = no voxel

    int column_index(VoxelKey key) const { return key.el * n_az_ + key.az; }
};

}  // namespace icet
