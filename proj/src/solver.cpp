#include "icet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>

namespace icet {

namespace {

bool debug_log_enabled() {
    static const bool enabled = [] {
        const char* v = std::getenv("ICET_LOG");
        return v != nullptr && std::string_view(v) == "debug";
    }();
    return enabled;
}

void attribute_dnu(const Vec6& removed_vec, std::array<bool, 6>& flags) {
    // A removed eigenvector is a mixed state direction; flag every state
    // whose component reaches half of the largest-magnitude component.
    const double max_comp = removed_vec.cwiseAbs().maxCoeff();
    if (max_comp <= 0.0) return;
    for (int i = 0; i < 6; ++i) {
        if (std::abs(removed_vec[i]) >= 0.5 * max_comp) flags[i] = true;
    }
}

}  // namespace

Eigen::Matrix<double, 3, 6> measurement_jacobian(const StateVector& state,
                                                 const Vec3& mean_original) {
    Eigen::Matrix<double, 3, 6> H;
    H.block<3, 3>(0, 0) = -Mat3::Identity();
    H.col(3) = rotation_derivative(state, EulerAxis::Phi) * mean_original;
    H.col(4) = rotation_derivative(state, EulerAxis::Theta) * mean_original;
    H.col(5) = rotation_derivative(state, EulerAxis::Psi) * mean_original;
    return H;
}

std::pair<Mat6, Vec6> accumulate_normal_equations(const std::vector<VoxelMeasurement>& ms) {
    if (ms.empty()) {
        throw UnregistrableScanError("no voxel supplied a measurement");
    }
    Mat6 A = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    // Ascending key order keeps the floating-point sum deterministic.
    for (std::size_t i = 1; i < ms.size(); ++i) {
        if (!(ms[i - 1].key < ms[i].key)) {
            throw std::invalid_argument("voxel measurements not in ascending key order");
        }
    }
    for (const VoxelMeasurement& m : ms) {
        const Eigen::MatrixXd W = m.covariance.inverse();
        const Eigen::MatrixXd HtW = m.jacobian.transpose() * W;
        A += HtW * m.jacobian;
        b += HtW * m.residual;
    }
    A = 0.5 * (A + A.transpose());
    return {A, b};
}

ConditionScreen condition_screen(const Mat6& A, double cond_threshold) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(A);
    ConditionScreen screen;
    screen.eigvals = es.eigenvalues();  // ascending
    screen.eigvecs = es.eigenvectors();

    const double lambda_max = screen.eigvals[5];
    while (screen.removed < 6) {
        const double lambda_min = screen.eigvals[screen.removed];
        if (lambda_min > 0.0 && lambda_max / lambda_min <= cond_threshold) break;
        Vec6 v = screen.eigvecs.col(screen.removed);
        int imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        screen.removed_vecs.push_back(v);
        attribute_dnu(v, screen.dnu_flags);
        ++screen.removed;
    }
    if (screen.removed == 6) {
        throw FullyUnobservableError("condition screen removed all six solution directions");
    }
    return screen;
}

Vec6 ConditionScreen::solve(const Vec6& b) const {
    Vec6 dx = Vec6::Zero();
    for (int i = removed; i < 6; ++i) {
        dx += eigvecs.col(i) * (eigvecs.col(i).dot(b) / eigvals[i]);
    }
    return dx;
}

Mat6 ConditionScreen::covariance() const {
    Mat6 P = Mat6::Zero();
    for (int i = removed; i < 6; ++i) {
        P += eigvecs.col(i) * eigvecs.col(i).transpose() / eigvals[i];
    }
    return P;
}

namespace {

struct IterationOutcome {
    ConditionScreen screen;
    std::size_t voxels_used = 0;
};

/// One pass of the WLS loop (Algorithm lines 8-18) over the active voxels.
/// Returns the final screen; updates state, iteration count and convergence.
IterationOutcome run_wls_loop(const PointCloud& new_scan, const SphericalGrid& grid,
                              const std::vector<AxisExclusion>& excl,
                              const std::vector<bool>& active, const SolverConfig& cfg,
                              StateVector& state, int& iterations_used, bool& converged) {
    if (cfg.max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be at least 1");
    }
    std::optional<IterationOutcome> last;
    converged = false;

    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const PointCloud transformed = transform_points(new_scan, state);
        const auto assignment = grid.assign_points(transformed);
        const auto stats = grid.new_scan_stats(transformed, new_scan, assignment);

        std::vector<VoxelMeasurement> measurements;
        measurements.reserve(grid.voxels().size());
        for (std::size_t v = 0; v < grid.voxels().size(); ++v) {
            if (!active[v] || !stats[v] || excl[v].retained == 0) continue;
            const VoxelStats& ref = grid.voxels()[v];
            const auto projected = project_residual(ref, *stats[v], excl[v]);
            if (!projected) continue;

            VoxelMeasurement m;
            m.key = ref.key;
            m.jacobian = excl[v].projector(ref.eigvecs) *
                         measurement_jacobian(state, stats[v]->mean_original);
            m.residual = projected->residual;
            m.covariance = projected->covariance;
            measurements.push_back(std::move(m));
        }

        auto [A, b] = accumulate_normal_equations(measurements);

        IterationOutcome out;
        out.screen = condition_screen(A, cfg.cond_threshold);
        out.voxels_used = measurements.size();

        if (cfg.iteration_observer) {
            IterationTrace trace;
            trace.iteration = iterations_used + 1;
            trace.measurements = measurements;
            trace.normal_matrix = A;
            trace.normal_rhs = b;
            cfg.iteration_observer(trace);
        }

        const Vec6 dx = out.screen.solve(b);
        state = StateVector::from_vector(state.vector() + dx);
        ++iterations_used;
        last = std::move(out);

        const double step = dx.cwiseAbs().maxCoeff();
        if (debug_log_enabled()) {
            std::cerr << "icet: iter " << iterations_used << " step " << step << " voxels "
                      << last->voxels_used << " removed " << last->screen.removed << "\n";
        }
        if (step < cfg.convergence_tol) {
            converged = true;
            break;
        }
    }
    return *last;
}

}  // namespace

SolutionReport register_scans(const PointCloud& reference, const PointCloud& new_scan,
                              const GridConfig& grid_cfg, const SolverConfig& solver_cfg) {
    SphericalGrid grid = SphericalGrid::build(reference, grid_cfg);

    std::vector<AxisExclusion> exclusions;
    exclusions.reserve(grid.voxels().size());
    std::size_t voxels_excluded_axes = 0;
    for (VoxelStats& vox : grid.mutable_voxels()) {
        vox.axis_mask = solver_cfg.refinement_enabled ? sigma_point_test(vox)
                                                      : std::array<bool, 3>{true, true, true};
        if (!(vox.axis_mask[0] && vox.axis_mask[1] && vox.axis_mask[2])) ++voxels_excluded_axes;
        exclusions.push_back(make_exclusion(vox.key, vox.axis_mask));
    }

    SolutionReport report;
    report.estimate = solver_cfg.initial_guess;
    report.voxels_excluded_axes = voxels_excluded_axes;

    std::vector<bool> active(grid.voxels().size(), true);
    IterationOutcome outcome =
        run_wls_loop(new_scan, grid, exclusions, active, solver_cfg, report.estimate,
                     report.iterations_used, report.converged);

    // Moving-object rejection: flag voxels whose residual distance exceeds
    // T_mod at the converged estimate, exclude them, and run the loop once
    // more. Skipped when the loop did not converge (the residuals would be
    // meaningless) or when nothing is flagged (the re-run would be a no-op).
    if (report.converged) {
        const PointCloud transformed = transform_points(new_scan, report.estimate);
        const auto assignment = grid.assign_points(transformed);
        const auto stats = grid.new_scan_stats(transformed, new_scan, assignment);
        std::size_t flagged = 0;
        for (std::size_t v = 0; v < grid.voxels().size(); ++v) {
            if (!active[v] || !stats[v]) continue;
            const double dist = (grid.voxels()[v].mean - stats[v]->mean_transformed).norm();
            if (dist > solver_cfg.moving_threshold) {
                active[v] = false;
                ++flagged;
            }
        }
        report.voxels_rejected_moving = flagged;
        if (flagged > 0) {
            outcome = run_wls_loop(new_scan, grid, exclusions, active, solver_cfg,
                                   report.estimate, report.iterations_used, report.converged);
        }
    }

    report.voxels_used = outcome.voxels_used;
    report.P = outcome.screen.covariance();
    report.dnu_flags = outcome.screen.dnu_flags;
    report.removed_eigvecs = outcome.screen.removed_vecs;
    return report;
}

std::array<std::optional<double>, 6> predicted_sigmas(const SolutionReport& report) {
    std::array<std::optional<double>, 6> sigmas;
    for (int i = 0; i < 6; ++i) {
        if (!report.dnu_flags[i]) sigmas[i] = std::sqrt(std::max(report.P(i, i), 0.0));
    }
    return sigmas;
}

nlohmann::ordered_json report_to_json(const SolutionReport& report) {
    nlohmann::ordered_json j;
    j["estimate"] = {{"x", report.estimate.x},     {"y", report.estimate.y},
                     {"z", report.estimate.z},     {"phi", report.estimate.phi},
                     {"theta", report.estimate.theta}, {"psi", report.estimate.psi}};

    auto matrix_rows = nlohmann::ordered_json::array();
    for (int r = 0; r < 6; ++r) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < 6; ++c) row.push_back(report.P(r, c));
        matrix_rows.push_back(row);
    }
    j["P"] = matrix_rows;

    j["dnu_flags"] = report.dnu_flags;

    const auto sigmas = predicted_sigmas(report);
    auto sigma_json = nlohmann::ordered_json::array();
    for (const auto& s : sigmas) {
        if (s) {
            sigma_json.push_back(*s);
        } else {
            sigma_json.push_back(nullptr);  // DNU state: sigma unset
        }
    }
    j["predicted_sigmas"] = sigma_json;

    auto removed = nlohmann::ordered_json::array();
    for (const Vec6& v : report.removed_eigvecs) {
        auto vec = nlohmann::ordered_json::array();
        for (int i = 0; i < 6; ++i) vec.push_back(v[i]);
        removed.push_back(vec);
    }
    j["removed_eigvecs"] = removed;

    j["iterations_used"] = report.iterations_used;
    j["voxels_used"] = report.voxels_used;
    j["voxels_rejected_moving"] = report.voxels_rejected_moving;
    j["voxels_excluded_axes"] = report.voxels_excluded_axes;
    j["converged"] = report.converged;
    return j;
}

}  // namespace icet
