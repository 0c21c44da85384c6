#pragma once

#include "icet/io.hpp"
#include "icet/scenes.hpp"
#include "icet/solver.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace icet {

/// One Monte Carlo trial: truth, initial guess, estimate and the solver's
/// own accuracy prediction. wall_ms is for logs only and never enters
/// deterministic artifacts.
struct TrialRecord {
    int trial = 0;
    StateVector truth;
    StateVector guess;
    StateVector estimate;
    std::array<std::optional<double>, 6> sigmas;
    std::array<bool, 6> dnu{};
    int iterations = 0;
    bool converged = false;
    bool failed = false;  // solver raised (unregistrable / fully unobservable)
    std::string failure;
    std::size_t voxels_used = 0;
    std::size_t voxels_rejected_moving = 0;
    std::size_t voxels_excluded_axes = 0;
    double wall_ms = 0.0;
};

/// Initial-guess draw: zero-mean gaussian offsets about the true transform,
/// 12.5 cm per translation axis and 1.7 deg per rotation axis.
struct GuessDistribution {
    double sigma_translation = 0.125;          // m
    double sigma_rotation = deg2rad(1.7);      // rad
};

struct MonteCarloConfig {
    SceneSpec scene;
    GridConfig grid;
    SolverConfig solver;  // initial_guess ignored; drawn per trial
    StateVector true_transform{0.01, 0.03, 0.02, 0.12, 0.10, 0.20};
    GuessDistribution guess;
    int trials = 100;
    int jobs = 1;
    std::uint64_t seed = 0;
};

struct StateSummary {
    int used_trials = 0;   // converged and not DNU for this state
    int dnu_count = 0;
    double rmse = 0.0;            // over used trials
    double mean_sigma = 0.0;      // mean predicted sigma over used trials
};

struct MonteCarloSummary {
    std::array<StateSummary, 6> per_state;
    int trials = 0;
    int converged_count = 0;
    int failed_count = 0;
    double mean_iterations = 0.0;  // over non-failed trials
};

struct MonteCarloResult {
    std::vector<TrialRecord> records;  // sorted by trial id
    MonteCarloSummary summary;
};

MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg);
MonteCarloSummary summarize(const std::vector<TrialRecord>& records);

std::vector<CsvRow> trial_rows(const std::vector<TrialRecord>& records);
nlohmann::ordered_json summary_to_json(const MonteCarloSummary& summary);

/// Voxel-resolution sweep over a fixed campaign: the same scene pairs and
/// guesses are registered once per resolution. The recorded error per trial
/// is the mean absolute translation error; a failed registration or a DNU
/// translation state falls back to the initial-guess error for that state
/// (the output is unusable, so the prior is what a consumer is left with).
struct SweepRow {
    double resolution_deg = 0.0;
    double mean_abs_translation_error = 0.0;  // m
    int failures = 0;
    int dnu_trials = 0;
    int trials = 0;
};

std::vector<SweepRow> run_resolution_sweep(const MonteCarloConfig& base,
                                           const std::vector<double>& resolutions_deg);

std::vector<CsvRow> sweep_rows(const std::vector<SweepRow>& rows);

/// Sequential pairwise registration: scan k is registered against scan k-1
/// and the transforms are composed into an absolute pose chain in frame 0.
struct OdometryFrame {
    int frame = 0;  // 1-based: transform from frame k to frame k-1
    StateVector delta;
    std::array<std::optional<double>, 6> sigmas;
    std::array<bool, 6> dnu{};
    int iterations = 0;
    bool converged = false;
    bool failed = false;  // identity fallback used in the chain
    std::string failure;
    std::size_t voxels_used = 0;
    std::size_t voxels_rejected_moving = 0;
};

struct OdometryResult {
    std::vector<OdometryFrame> frames;            // size = scans - 1
    std::vector<RigidTransform> poses_to_frame0;  // size = scans, [0] = identity
};

OdometryResult run_odometry(const std::vector<PointCloud>& scans, const GridConfig& grid_cfg,
                            const SolverConfig& solver_cfg);

std::vector<CsvRow> odometry_rows(const OdometryResult& result);

/// Every scan mapped into frame 0 and concatenated.
PointCloud stitch_map(const std::vector<PointCloud>& scans,
                      const std::vector<RigidTransform>& poses_to_frame0);

}  // namespace icet
