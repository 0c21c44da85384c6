#include "icet/refinement.hpp"

#include <cmath>

namespace icet {

std::array<bool, 3> sigma_point_test(const VoxelStats& stats) {
    std::array<bool, 3> mask{};
    for (int k = 0; k < 3; ++k) {
        const double sigma = std::sqrt(std::max(stats.eigvals[k], kEigenvalueFloor));
        const Vec3 offset = 2.0 * sigma * stats.eigvecs.col(k);
        const bool plus_in = stats.bounds.contains(stats.mean + offset);
        const bool minus_in = stats.bounds.contains(stats.mean - offset);
        mask[k] = plus_in || minus_in;
    }
    return mask;
}

AxisExclusion make_exclusion(VoxelKey key, const std::array<bool, 3>& mask) {
    AxisExclusion e;
    e.key = key;
    e.retained = 0;
    for (int k = 0; k < 3; ++k) {
        if (mask[k]) e.axes[e.retained++] = k;
    }
    return e;
}

std::optional<ProjectedMeasurement> project_residual(const VoxelStats& ref,
                                                     const NewScanStats& scan,
                                                     const AxisExclusion& exclusion) {
    const int k = exclusion.retained;
    if (k < 1) return std::nullopt;

    const auto P = exclusion.projector(ref.eigvecs);  // k x 3

    // Covariance of the voxel-mean difference, independent samples within
    // each scan and between scans.
    const Mat3 mean_cov = scan.Q / static_cast<double>(scan.n) +
                          ref.Q / static_cast<double>(ref.n);

    ProjectedMeasurement m;
    m.residual = P * (ref.mean - scan.mean_transformed);
    m.covariance = P * mean_cov * P.transpose();
    m.covariance.diagonal().array() += kCovarianceJitter;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariance);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kCovarianceCondLimit) return std::nullopt;
    return m;
}

}  // namespace icet
