#pragma once

#include "icet/geometry.hpp"
#include "icet/refinement.hpp"
#include "icet/voxel_grid.hpp"

#include "json.hpp"

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace icet {

/// No voxel supplied a measurement: the pair cannot be registered.
struct UnregistrableScanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The condition screen removed all six solution directions.
struct FullyUnobservableError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VoxelMeasurement {
    VoxelKey key;
    Eigen::MatrixXd jacobian;    // k x 6: L U^T H
    Eigen::VectorXd residual;    // k:     L U^T (y0 - y)
    Eigen::MatrixXd covariance;  // k x k, symmetric positive definite
};

/// Unprojected per-voxel Jacobian H = [-I | dR/dphi yp, dR/dtheta yp,
/// dR/dpsi yp], where yp is the voxel's new-scan mean in its original
/// coordinates.
Eigen::Matrix<double, 3, 6> measurement_jacobian(const StateVector& state,
                                                 const Vec3& mean_original);

/// Per-iteration trace for instrumentation (dense/block equivalence checks,
/// debugging). Only populated when SolverConfig::iteration_observer is set.
struct IterationTrace {
    int iteration = 0;
    std::vector<VoxelMeasurement> measurements;
    Mat6 normal_matrix;
    Vec6 normal_rhs;
};

struct SolverConfig {
    int max_iterations = 30;
    double convergence_tol = 1e-8;   // on max-norm of the state correction
    double cond_threshold = 5e4;     // T_cond
    double moving_threshold = 0.05;  // T_mod [m]
    bool refinement_enabled = true;  // true = ICET, false = NDT baseline
    StateVector initial_guess{};
    std::function<void(const IterationTrace&)> iteration_observer;
};

struct SolutionReport {
    StateVector estimate;
    Mat6 P = Mat6::Zero();  // predicted solution-error covariance, m^2/rad^2
    std::array<bool, 6> dnu_flags{};
    std::vector<Vec6> removed_eigvecs;
    int iterations_used = 0;
    std::size_t voxels_used = 0;
    std::size_t voxels_rejected_moving = 0;
    std::size_t voxels_excluded_axes = 0;
    bool converged = false;
};

/// A = sum_j H~^T S~^-1 H~, b = sum_j H~^T S~^-1 dy~, accumulated in
/// ascending voxel-key order. Throws UnregistrableScanError on an empty
/// measurement set.
std::pair<Mat6, Vec6> accumulate_normal_equations(const std::vector<VoxelMeasurement>& ms);

/// Reduced eigenbasis of the normal matrix after the condition-number test:
/// eigenvectors are dropped smallest-eigenvalue-first until the retained
/// spectrum satisfies lambda_max/lambda_min <= threshold.
struct ConditionScreen {
    Mat6 eigvecs;  // ascending-eigenvalue order (columns)
    Vec6 eigvals;
    int removed = 0;  // leading (smallest) eigenvectors dropped
    std::array<bool, 6> dnu_flags{};
    std::vector<Vec6> removed_vecs;

    /// delta-x on the retained subspace; zero along removed directions.
    Vec6 solve(const Vec6& b) const;
    /// (reduced A)^-1 lifted to 6x6; singular along removed directions.
    Mat6 covariance() const;
};

ConditionScreen condition_screen(const Mat6& A, double cond_threshold);

/// Full registration per the iterative WLS pipeline: grid build with
/// sigma-point exclusions (when refinement is enabled), iterate
/// transform/assign/accumulate/screen/step to convergence, then one
/// moving-object rejection pass and re-solve.
SolutionReport register_scans(const PointCloud& reference, const PointCloud& new_scan,
                              const GridConfig& grid_cfg, const SolverConfig& solver_cfg);

/// sqrt of diag(P) per state; DNU states are nullopt.
std::array<std::optional<double>, 6> predicted_sigmas(const SolutionReport& report);

nlohmann::ordered_json report_to_json(const SolutionReport& report);

}  // namespace icet
