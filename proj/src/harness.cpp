#include "icet/harness.hpp"

#include "icet/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

namespace icet {

namespace {

constexpr std::array<const char*, 6> kStateNames{"x", "y", "z", "phi", "theta", "psi"};

StateVector draw_guess(const StateVector& truth, const GuessDistribution& dist, Rng& rng) {
    StateVector g = truth;
    g.x += rng.gaussian(dist.sigma_translation);
    g.y += rng.gaussian(dist.sigma_translation);
    g.z += rng.gaussian(dist.sigma_translation);
    g.phi += rng.gaussian(dist.sigma_rotation);
    g.theta += rng.gaussian(dist.sigma_rotation);
    g.psi += rng.gaussian(dist.sigma_rotation);
    return g;
}

TrialRecord run_trial(const MonteCarloConfig& cfg, int trial) {
    const std::uint64_t trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));

    TrialRecord rec;
    rec.trial = trial;
    rec.truth = cfg.true_transform;

    Rng guess_rng(derive_seed(trial_seed, 2));
    rec.guess = draw_guess(rec.truth, cfg.guess, guess_rng);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        const ScenePair pair =
            scene_pair(cfg.scene, rec.truth, derive_seed(trial_seed, 0), derive_seed(trial_seed, 1));
        SolverConfig solver = cfg.solver;
        solver.initial_guess = rec.guess;
        const SolutionReport report =
            register_scans(pair.reference, pair.new_scan, cfg.grid, solver);
        rec.estimate = report.estimate;
        rec.sigmas = predicted_sigmas(report);
        rec.dnu = report.dnu_flags;
        rec.iterations = report.iterations_used;
        rec.converged = report.converged;
        rec.voxels_used = report.voxels_used;
        rec.voxels_rejected_moving = report.voxels_rejected_moving;
        rec.voxels_excluded_axes = report.voxels_excluded_axes;
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.failure = e.what();
        rec.estimate = rec.guess;  // nothing better than the prior
    }
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

MonteCarloResult run_monte_carlo(const MonteCarloConfig& cfg) {
    MonteCarloResult result;
    result.records.resize(static_cast<std::size_t>(cfg.trials));

    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        for (int t = 0; t < cfg.trials; ++t) result.records[t] = run_trial(cfg, t);
    } else {
        std::atomic<int> next{0};
        auto worker = [&] {
            for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1)) {
                result.records[t] = run_trial(cfg, t);
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    result.summary = summarize(result.records);
    return result;
}

MonteCarloSummary summarize(const std::vector<TrialRecord>& records) {
    MonteCarloSummary s;
    s.trials = static_cast<int>(records.size());

    double iter_sum = 0.0;
    int iter_n = 0;
    for (const TrialRecord& r : records) {
        if (r.failed) {
            ++s.failed_count;
            continue;
        }
        if (r.converged) ++s.converged_count;
        iter_sum += r.iterations;
        ++iter_n;
    }
    s.mean_iterations = iter_n > 0 ? iter_sum / iter_n : 0.0;

    for (int i = 0; i < 6; ++i) {
        StateSummary& st = s.per_state[i];
        double sq_sum = 0.0, sigma_sum = 0.0;
        for (const TrialRecord& r : records) {
            if (r.failed) continue;
            if (r.dnu[i]) {
                ++st.dnu_count;
                continue;
            }
            if (!r.converged) continue;
            const double err = r.estimate.vector()[i] - r.truth.vector()[i];
            sq_sum += err * err;
            if (r.sigmas[i]) sigma_sum += *r.sigmas[i];
            ++st.used_trials;
        }
        if (st.used_trials > 0) {
            st.rmse = std::sqrt(sq_sum / st.used_trials);
            st.mean_sigma = sigma_sum / st.used_trials;
        }
    }
    return s;
}

std::vector<CsvRow> trial_rows(const std::vector<TrialRecord>& records) {
    std::vector<CsvRow> rows;
    rows.reserve(records.size());
    for (const TrialRecord& r : records) {
        CsvRow row;
        row.emplace_back("trial", r.trial);
        const Vec6 truth = r.truth.vector(), guess = r.guess.vector(), est = r.estimate.vector();
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("truth_") + kStateNames[i], truth[i]);
        }
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("guess_") + kStateNames[i], guess[i]);
        }
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("est_") + kStateNames[i], est[i]);
        }
        for (int i = 0; i < 6; ++i) {
            // Blank sigma marks a DNU state in the table.
            row.emplace_back(std::string("sigma_") + kStateNames[i],
                             r.sigmas[i] ? CsvValue(*r.sigmas[i]) : CsvValue(std::string()));
        }
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("dnu_") + kStateNames[i], r.dnu[i]);
        }
        row.emplace_back("iterations", r.iterations);
        row.emplace_back("converged", r.converged);
        row.emplace_back("failed", r.failed);
        row.emplace_back("voxels_used", r.voxels_used);
        row.emplace_back("voxels_rejected_moving", r.voxels_rejected_moving);
        row.emplace_back("voxels_excluded_axes", r.voxels_excluded_axes);
        rows.push_back(std::move(row));
    }
    return rows;
}

nlohmann::ordered_json summary_to_json(const MonteCarloSummary& summary) {
    nlohmann::ordered_json j;
    j["trials"] = summary.trials;
    j["converged"] = summary.converged_count;
    j["failed"] = summary.failed_count;
    j["mean_iterations"] = summary.mean_iterations;
    nlohmann::ordered_json states;
    for (int i = 0; i < 6; ++i) {
        const StateSummary& st = summary.per_state[i];
        nlohmann::ordered_json entry;
        entry["rmse"] = st.used_trials > 0 ? nlohmann::ordered_json(st.rmse)
                                           : nlohmann::ordered_json(nullptr);
        entry["predicted_sigma"] = st.used_trials > 0 ? nlohmann::ordered_json(st.mean_sigma)
                                                      : nlohmann::ordered_json(nullptr);
        entry["dnu_count"] = st.dnu_count;
        entry["used_trials"] = st.used_trials;
        states[kStateNames[i]] = entry;
    }
    j["states"] = states;
    return j;
}

std::vector<SweepRow> run_resolution_sweep(const MonteCarloConfig& base,
                                           const std::vector<double>& resolutions_deg) {
    for (double r : resolutions_deg) {
        if (!(r > 1.0 && r < 30.0)) {
            throw std::invalid_argument("sweep resolutions must lie in (1, 30) degrees");
        }
    }
    std::vector<SweepRow> rows;
    rows.reserve(resolutions_deg.size());
    for (double res : resolutions_deg) {
        MonteCarloConfig cfg = base;
        cfg.grid.angular_resolution_deg = res;
        const MonteCarloResult mc = run_monte_carlo(cfg);

        SweepRow row;
        row.resolution_deg = res;
        row.trials = static_cast<int>(mc.records.size());
        double err_sum = 0.0;
        std::size_t err_n = 0;
        for (const TrialRecord& r : mc.records) {
            bool counted_dnu = false;
            for (int i = 0; i < 3; ++i) {
                const bool unusable = r.failed || !r.converged || r.dnu[i];
                const double est =
                    unusable ? r.guess.vector()[i] : r.estimate.vector()[i];
                err_sum += std::abs(est - r.truth.vector()[i]);
                ++err_n;
                if (!r.failed && r.dnu[i]) counted_dnu = true;
            }
            if (r.failed) ++row.failures;
            if (counted_dnu) ++row.dnu_trials;
        }
        row.mean_abs_translation_error = err_n > 0 ? err_sum / err_n : 0.0;
        rows.push_back(row);
    }
    return rows;
}

std::vector<CsvRow> sweep_rows(const std::vector<SweepRow>& rows) {
    std::vector<CsvRow> out;
    out.reserve(rows.size());
    for (const SweepRow& r : rows) {
        out.push_back({{"resolution_deg", r.resolution_deg},
                       {"mean_abs_translation_error", r.mean_abs_translation_error},
                       {"failures", r.failures},
                       {"dnu_trials", r.dnu_trials},
                       {"trials", r.trials}});
    }
    return out;
}

OdometryResult run_odometry(const std::vector<PointCloud>& scans, const GridConfig& grid_cfg,
                            const SolverConfig& solver_cfg) {
    if (scans.size() < 2) {
        throw std::invalid_argument("odometry needs at least two scans");
    }
    OdometryResult result;
    result.poses_to_frame0.push_back(RigidTransform{});

    for (std::size_t k = 1; k < scans.size(); ++k) {
        OdometryFrame frame;
        frame.frame = static_cast<int>(k);
        RigidTransform delta;  // identity fallback
        try {
            const SolutionReport report =
                register_scans(scans[k - 1], scans[k], grid_cfg, solver_cfg);
            frame.delta = report.estimate;
            frame.sigmas = predicted_sigmas(report);
            frame.dnu = report.dnu_flags;
            frame.iterations = report.iterations_used;
            frame.converged = report.converged;
            frame.voxels_used = report.voxels_used;
            frame.voxels_rejected_moving = report.voxels_rejected_moving;
            delta = RigidTransform::from_state(report.estimate);
        } catch (const std::exception& e) {
            frame.failed = true;
            frame.failure = e.what();
        }
        result.poses_to_frame0.push_back(result.poses_to_frame0.back().compose(delta));
        result.frames.push_back(std::move(frame));
    }
    return result;
}

std::vector<CsvRow> odometry_rows(const OdometryResult& result) {
    std::vector<CsvRow> rows;
    rows.reserve(result.frames.size());
    for (const OdometryFrame& f : result.frames) {
        CsvRow row;
        row.emplace_back("frame", f.frame);
        const Vec6 d = f.delta.vector();
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("delta_") + kStateNames[i], d[i]);
        }
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("sigma_") + kStateNames[i],
                             f.sigmas[i] ? CsvValue(*f.sigmas[i]) : CsvValue(std::string()));
        }
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("dnu_") + kStateNames[i], f.dnu[i]);
        }
        const RigidTransform& pose = result.poses_to_frame0[static_cast<std::size_t>(f.frame)];
        const StateVector abs_state = state_from_transform(pose);
        const Vec6 a = abs_state.vector();
        for (int i = 0; i < 6; ++i) {
            row.emplace_back(std::string("abs_") + kStateNames[i], a[i]);
        }
        row.emplace_back("iterations", f.iterations);
        row.emplace_back("converged", f.converged);
        row.emplace_back("failed", f.failed);
        row.emplace_back("voxels_used", f.voxels_used);
        row.emplace_back("voxels_rejected_moving", f.voxels_rejected_moving);
        rows.push_back(std::move(row));
    }
    return rows;
}

PointCloud stitch_map(const std::vector<PointCloud>& scans,
                      const std::vector<RigidTransform>& poses_to_frame0) {
    if (scans.size() != poses_to_frame0.size()) {
        throw std::invalid_argument("pose chain length must match scan count");
    }
    PointCloud map;
    std::size_t total = 0;
    for (const PointCloud& s : scans) total += s.size();
    map.reserve(total);
    const bool carry_intensity = !scans.empty() && scans.front().has_intensity();
    for (std::size_t k = 0; k < scans.size(); ++k) {
        const RigidTransform& T = poses_to_frame0[k];
        for (std::size_t i = 0; i < scans[k].size(); ++i) {
            map.points.push_back(T.apply(scans[k].points[i]));
            if (carry_intensity && scans[k].has_intensity()) {
                map.intensity.push_back(scans[k].intensity[i]);
            }
        }
    }
    return map;
}

}  // namespace icet
