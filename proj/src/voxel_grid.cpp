#include "icet/voxel_grid.hpp"

#include "icet/io.hpp"

#include <algorithm>
#include <cmath>

namespace icet {

Spherical to_spherical(const Vec3& p) {
    const double r = p.norm();
    double az = std::atan2(p.y(), p.x());
    if (az >= kPi) az -= 2.0 * kPi;  // fold the +pi boundary onto -pi
    const double el = std::atan2(p.z(), std::hypot(p.x(), p.y()));
    return {az, el, r};
}

bool WedgeBounds::contains(const Vec3& p) const {
    const Spherical s = to_spherical(p);
    return s.az >= az_lo && s.az < az_hi && s.el >= el_lo && s.el < el_hi && s.r >= r_lo &&
           s.r <= r_hi;
}

void sorted_eigen(const Mat3& Q, Mat3& eigvecs, Vec3& eigvals) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(Q);
    const Vec3 vals = es.eigenvalues();   // ascending
    const Mat3 vecs = es.eigenvectors();
    for (int k = 0; k < 3; ++k) {
        const int src = 2 - k;  // descending
        eigvals[k] = std::max(vals[src], 0.0);
        Vec3 v = vecs.col(src);
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        eigvecs.col(k) = v;
    }
}

std::optional<VoxelKey> SphericalGrid::column_of(const Spherical& s) const {
    if (!(s.r >= cfg_.min_range && s.r <= cfg_.max_range)) return std::nullopt;
    const double el_min = deg2rad(cfg_.elevation_min_deg);
    const int el_idx = static_cast<int>(std::floor((s.el - el_min) / el_step_));
    if (el_idx < 0 || el_idx >= n_el_) return std::nullopt;
    int az_idx = static_cast<int>(std::floor((s.az + kPi) / az_step_));
    if (az_idx == n_az_) az_idx = 0;  // az exactly at +pi
    if (az_idx < 0 || az_idx >= n_az_) return std::nullopt;
    return VoxelKey{az_idx, el_idx};
}

SphericalGrid SphericalGrid::build(const PointCloud& reference, const GridConfig& cfg) {
    SphericalGrid grid;
    grid.cfg_ = cfg;
    grid.n_az_ = std::max(1, static_cast<int>(std::lround(360.0 / cfg.angular_resolution_deg)));
    const double el_span = cfg.elevation_max_deg - cfg.elevation_min_deg;
    grid.n_el_ = std::max(1, static_cast<int>(std::lround(el_span / cfg.angular_resolution_deg)));
    grid.az_step_ = 2.0 * kPi / grid.n_az_;
    grid.el_step_ = deg2rad(el_span) / grid.n_el_;

    // Bucket points per column, keeping (range, index).
    std::vector<std::vector<std::pair<double, std::uint32_t>>> columns(
        static_cast<std::size_t>(grid.n_az_) * grid.n_el_);
    for (std::uint32_t i = 0; i < reference.size(); ++i) {
        const Spherical s = to_spherical(reference.points[i]);
        if (auto key = grid.column_of(s)) {
            columns[grid.column_index(*key)].emplace_back(s.r, i);
        }
    }

    const double el_min = deg2rad(cfg.elevation_min_deg);
    constexpr double kRadialPad = 0.01;  // m

    grid.column_to_voxel_.assign(columns.size(), -1);
    for (int el = 0; el < grid.n_el_; ++el) {
        for (int az = 0; az < grid.n_az_; ++az) {
            auto& col = columns[static_cast<std::size_t>(el) * grid.n_az_ + az];
            if (col.size() < cfg.min_points) continue;
            std::sort(col.begin(), col.end());

            // Adaptive radial binning: keep the nearest maximal run of
            // points whose consecutive range gaps stay within the gap
            // threshold. The voxel hugs the closest surface and sheds
            // shadowed background.
            std::size_t run_end = 1;
            while (run_end < col.size() &&
                   col[run_end].first - col[run_end - 1].first <= cfg.radial_gap_threshold) {
                ++run_end;
            }
            if (run_end < cfg.min_points) continue;

            VoxelStats vox;
            vox.key = {az, el};
            vox.bounds.az_lo = -kPi + az * grid.az_step_;
            vox.bounds.az_hi = -kPi + (az + 1) * grid.az_step_;
            vox.bounds.el_lo = el_min + el * grid.el_step_;
            vox.bounds.el_hi = el_min + (el + 1) * grid.el_step_;
            vox.bounds.r_lo = col.front().first - kRadialPad;
            vox.bounds.r_hi = col[run_end - 1].first + kRadialPad;

            // Accumulate in point-index order so statistics are bit-equal to
            // a new-scan pass over the same points.
            std::vector<std::uint32_t> run_indices;
            run_indices.reserve(run_end);
            for (std::size_t i = 0; i < run_end; ++i) run_indices.push_back(col[i].second);
            std::sort(run_indices.begin(), run_indices.end());

            MomentAccumulator acc;
            for (std::uint32_t i : run_indices) {
                acc.add(reference.points[i]);
            }
            vox.n = acc.n;
            vox.mean = acc.mean();
            vox.Q = acc.covariance();
            sorted_eigen(vox.Q, vox.eigvecs, vox.eigvals);

            grid.column_to_voxel_[grid.column_index(vox.key)] =
                static_cast<int>(grid.voxels_.size());
            grid.voxels_.push_back(std::move(vox));
        }
    }

    // Rebuild the column map in ascending-key order of voxels_.
    std::sort(grid.voxels_.begin(), grid.voxels_.end(),
              [](const VoxelStats& a, const VoxelStats& b) { return a.key < b.key; });
    std::fill(grid.column_to_voxel_.begin(), grid.column_to_voxel_.end(), -1);
    for (std::size_t i = 0; i < grid.voxels_.size(); ++i) {
        grid.column_to_voxel_[grid.column_index(grid.voxels_[i].key)] = static_cast<int>(i);
    }

    if (grid.voxels_.empty()) {
        throw EmptyGridError("no voxel met the minimum point count; reference scan unusable");
    }
    return grid;
}

const VoxelStats* SphericalGrid::find(VoxelKey key) const {
    if (key.az < 0 || key.az >= n_az_ || key.el < 0 || key.el >= n_el_) return nullptr;
    const int idx = column_to_voxel_[column_index(key)];
    return idx >= 0 ? &voxels_[idx] : nullptr;
}

std::vector<std::vector<std::uint32_t>> SphericalGrid::assign_points(
    const PointCloud& cloud) const {
    std::vector<std::vector<std::uint32_t>> assignment(voxels_.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
        const Spherical s = to_spherical(cloud.points[i]);
        const auto key = column_of(s);
        if (!key) continue;
        const int idx = column_to_voxel_[column_index(*key)];
        if (idx < 0) continue;
        const VoxelStats& vox = voxels_[idx];
        if (s.r >= vox.bounds.r_lo && s.r <= vox.bounds.r_hi) {
            assignment[idx].push_back(i);
        }
    }
    return assignment;
}

std::vector<std::optional<NewScanStats>> SphericalGrid::new_scan_stats(
    const PointCloud& transformed, const PointCloud& original,
    const std::vector<std::vector<std::uint32_t>>& assignment) const {
    std::vector<std::optional<NewScanStats>> stats(voxels_.size());
    for (std::size_t v = 0; v < assignment.size(); ++v) {
        const auto& idx = assignment[v];
        if (idx.size() < cfg_.min_points) continue;
        MomentAccumulator acc;
        Vec3 orig_sum = Vec3::Zero();
        for (std::uint32_t i : idx) {
            acc.add(transformed.points[i]);
            orig_sum += original.points[i];
        }
        NewScanStats s;
        s.n = acc.n;
        s.mean_transformed = acc.mean();
        s.mean_original = orig_sum / static_cast<double>(acc.n);
        s.Q = acc.covariance();
        stats[v] = s;
    }
    return stats;
}

void SphericalGrid::dump_csv(const std::filesystem::path& path) const {
    std::vector<CsvRow> rows;
    rows.reserve(voxels_.size());
    for (const VoxelStats& v : voxels_) {
        rows.push_back({{"az", v.key.az},
                        {"el", v.key.el},
                        {"r_lo", v.bounds.r_lo},
                        {"r_hi", v.bounds.r_hi},
                        {"n", v.n},
                        {"mean_x", v.mean.x()},
                        {"mean_y", v.mean.y()},
                        {"mean_z", v.mean.z()},
                        {"q_xx", v.Q(0, 0)},
                        {"q_xy", v.Q(0, 1)},
                        {"q_xz", v.Q(0, 2)},
                        {"q_yy", v.Q(1, 1)},
                        {"q_yz", v.Q(1, 2)},
                        {"q_zz", v.Q(2, 2)}});
    }
    write_table({"az", "el", "r_lo", "r_hi", "n", "mean_x", "mean_y", "mean_z", "q_xx", "q_xy",
                 "q_xz", "q_yy", "q_yz", "q_zz"},
                rows, path);
}

}  // namespace icet
