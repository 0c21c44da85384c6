#pragma once

#include "icet/voxel_grid.hpp"

#include <optional>

namespace icet {

/// Per-voxel selection of retained covariance eigenvector directions.
/// Conceptually the k x 3 selector L of the projected residual
/// L U^T (y0 - y); stored as the list of retained eigenvector indices.
struct AxisExclusion {
    VoxelKey key;
    int retained = 3;               // k
    std::array<int, 3> axes{0, 1, 2};  // first `retained` entries valid

    /// Rows of L U^T: the retained eigenvectors transposed (k x 3).
    Eigen::Matrix<double, Eigen::Dynamic, 3> projector(const Mat3& eigvecs) const {
        Eigen::Matrix<double, Eigen::Dynamic, 3> P(retained, 3);
        for (int i = 0; i < retained; ++i) P.row(i) = eigvecs.col(axes[i]).transpose();
        return P;
    }
};

/// Sigma-point test on the reference scan's voxel distribution: place test
/// points at mean +/- 2 sqrt(lambda_k) along each eigenvector and keep the
/// axis unless BOTH test points fall outside the voxel's spherical wedge.
/// Axes with a single point outside still carry localization information
/// and are retained.
std::array<bool, 3> sigma_point_test(const VoxelStats& stats);

AxisExclusion make_exclusion(VoxelKey key, const std::array<bool, 3>& mask);

struct ProjectedMeasurement {
    Eigen::VectorXd residual;    // k: L U^T (y0 - y)
    Eigen::MatrixXd covariance;  // k x k: L U^T (Q/N + Q0/N0) U L^T, conditioned
};

/// Projected residual and measurement covariance for one voxel. nullopt when
/// the conditioned covariance is still numerically singular, which drops the
/// voxel for this iteration.
std::optional<ProjectedMeasurement> project_residual(const VoxelStats& ref,
                                                     const NewScanStats& scan,
                                                     const AxisExclusion& exclusion);

// Numerical guards (documented constants).
inline constexpr double kEigenvalueFloor = 1e-4 * 1e-4;  // (0.1 mm)^2, sigma-point floor
inline constexpr double kCovarianceJitter = 1e-12;       // m^2 added to diag before inversion
inline constexpr double kCovarianceCondLimit = 1e12;     // drop voxel beyond this

}  // namespace icet
