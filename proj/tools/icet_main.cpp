// Command-line front end for the ICET scan-matching library: single-pair
// matching, Monte Carlo campaigns, voxel-resolution sweeps, sequence
// odometry with map stitching, and synthetic scene generation.

#include "icet/harness.hpp"
#include "icet/io.hpp"
#include "icet/rng.hpp"
#include "icet/scenes.hpp"
#include "icet/solver.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::ordered_json;

// sysexits-style codes plus algorithm-outcome codes (documented in README).
constexpr int kExitOk = 0;
constexpr int kExitNoConverge = 2;
constexpr int kExitUnregistrable = 3;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 66;

struct GridFlags {
    icet::GridConfig cfg;
    bool max_range_set = false;
    bool min_range_set = false;

    void attach(CLI::App* app) {
        app->add_option("--grid-res-deg", cfg.angular_resolution_deg,
                        "Voxel angular resolution in azimuth and elevation [deg]")
            ->capture_default_str();
        app->add_option("--min-points", cfg.min_points, "Minimum points per voxel, both scans")
            ->capture_default_str();
        app->add_option("--el-min-deg", cfg.elevation_min_deg, "Elevation span lower edge [deg]")
            ->capture_default_str();
        app->add_option("--el-max-deg", cfg.elevation_max_deg, "Elevation span upper edge [deg]")
            ->capture_default_str();
        app->add_option("--gap-threshold", cfg.radial_gap_threshold,
                        "Radial gap splitting adjacent surfaces [m]")
            ->capture_default_str();
        app->add_option("--min-range", cfg.min_range, "Range gate lower edge [m]")
            ->capture_default_str()
            ->each([this](const std::string&) { min_range_set = true; });
        app->add_option("--max-range", cfg.max_range, "Range gate upper edge [m]")
            ->capture_default_str()
            ->each([this](const std::string&) { max_range_set = true; });
    }

    /// Scene subcommands default the range gates to the scene's scale.
    icet::GridConfig resolve(icet::SceneKind kind) const {
        icet::GridConfig out = icet::recommended_grid(kind);
        out.angular_resolution_deg = cfg.angular_resolution_deg;
        out.min_points = cfg.min_points;
        out.elevation_min_deg = cfg.elevation_min_deg;
        out.elevation_max_deg = cfg.elevation_max_deg;
        out.radial_gap_threshold = cfg.radial_gap_threshold;
        if (min_range_set) out.min_range = cfg.min_range;
        if (max_range_set) out.max_range = cfg.max_range;
        return out;
    }
};

struct SolverFlags {
    icet::SolverConfig cfg;
    std::string algo = "icet";

    void attach(CLI::App* app) {
        app->add_option("--t-cond", cfg.cond_threshold, "Condition-number threshold T_cond")
            ->capture_default_str();
        app->add_option("--t-mod", cfg.moving_threshold, "Moving-object residual threshold [m]")
            ->capture_default_str();
        app->add_option("--max-iters", cfg.max_iterations, "Iteration cap per solve loop")
            ->capture_default_str();
        app->add_option("--tol", cfg.convergence_tol, "Convergence tolerance on max|dx|")
            ->capture_default_str();
        app->add_option("--algo", algo, "icet (sigma-point refinement) or ndt (baseline)")
            ->check(CLI::IsMember({"icet", "ndt"}))
            ->capture_default_str();
    }

    icet::SolverConfig resolve() const {
        icet::SolverConfig out = cfg;
        out.refinement_enabled = (algo == "icet");
        return out;
    }
};

ordered_json grid_json(const icet::GridConfig& g) {
    return ordered_json{{"grid_res_deg", g.angular_resolution_deg},
                        {"el_min_deg", g.elevation_min_deg},
                        {"el_max_deg", g.elevation_max_deg},
                        {"min_points", g.min_points},
                        {"gap_threshold", g.radial_gap_threshold},
                        {"min_range", g.min_range},
                        {"max_range", g.max_range}};
}

ordered_json solver_json(const icet::SolverConfig& s, const std::string& algo) {
    return ordered_json{{"algo", algo},
                        {"max_iterations", s.max_iterations},
                        {"tol", s.convergence_tol},
                        {"t_cond", s.cond_threshold},
                        {"t_mod", s.moving_threshold}};
}

ordered_json scene_json(const icet::SceneSpec& s) {
    return ordered_json{{"kind", icet::to_string(s.kind)},
                        {"noise_sigma", s.noise_sigma},
                        {"az_step_deg", s.az_step_deg},
                        {"el_step_deg", s.el_step_deg},
                        {"el_min_deg", s.el_min_deg},
                        {"el_max_deg", s.el_max_deg}};
}

ordered_json state_json(const icet::StateVector& s) {
    return ordered_json{{"x", s.x},     {"y", s.y},         {"z", s.z},
                        {"phi", s.phi}, {"theta", s.theta}, {"psi", s.psi}};
}

void write_json(const ordered_json& j, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw icet::IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

icet::StateVector parse_state(const std::string& csv) {
    std::istringstream in(csv);
    std::array<double, 6> v{};
    char comma = 0;
    for (int i = 0; i < 6; ++i) {
        if (i > 0 && !(in >> comma && comma == ',')) {
            throw CLI::ValidationError("state", "expected 6 comma-separated values");
        }
        if (!(in >> v[i])) {
            throw CLI::ValidationError("state", "expected 6 comma-separated values");
        }
    }
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

int cmd_match(const std::string& ref_path, const std::string& new_path, const GridFlags& grid,
              const SolverFlags& solver, const std::string& guess_csv) {
    const auto ref = icet::load_scan(ref_path, icet::format_from_path(ref_path));
    const auto scan = icet::load_scan(new_path, icet::format_from_path(new_path));
    if (ref.dropped_nonfinite > 0 || scan.dropped_nonfinite > 0) {
        std::cerr << "icet: dropped " << ref.dropped_nonfinite << " + " << scan.dropped_nonfinite
                  << " non-finite points\n";
    }

    icet::SolverConfig scfg = solver.resolve();
    if (!guess_csv.empty()) scfg.initial_guess = parse_state(guess_csv);

    try {
        const icet::SolutionReport report =
            icet::register_scans(ref.cloud, scan.cloud, grid.cfg, scfg);
        ordered_json j = icet::report_to_json(report);
        ordered_json dnu_states = ordered_json::array();
        static constexpr std::array<const char*, 6> names{"x", "y", "z", "phi", "theta", "psi"};
        for (int i = 0; i < 6; ++i) {
            if (report.dnu_flags[i]) dnu_states.push_back(names[i]);
        }
        j["dnu_states"] = dnu_states;
        std::cout << j.dump(2) << "\n";
        return report.converged ? kExitOk : kExitNoConverge;
    } catch (const icet::UnregistrableScanError& e) {
        std::cerr << "icet: unregistrable input: " << e.what() << "\n";
        return kExitUnregistrable;
    } catch (const icet::EmptyGridError& e) {
        std::cerr << "icet: unregistrable input: " << e.what() << "\n";
        return kExitUnregistrable;
    } catch (const icet::FullyUnobservableError& e) {
        std::cerr << "icet: unregistrable input: " << e.what() << "\n";
        return kExitUnregistrable;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ICET voxel-based LIDAR scan matcher with predicted solution covariance"};
    app.require_subcommand(1);

    // ---- match ----
    auto* match = app.add_subcommand("match", "Register one scan pair; report JSON on stdout");
    std::string match_ref, match_new, match_guess;
    GridFlags match_grid;
    SolverFlags match_solver;
    match->add_option("reference", match_ref, "Reference scan (.bin = bin_xyzi, .ply = ASCII PLY)")
        ->required();
    match->add_option("scan", match_new, "New scan to align")->required();
    match->add_option("--guess", match_guess, "Initial guess x,y,z,phi,theta,psi [m,rad]");
    match_grid.attach(match);
    match_solver.attach(match);

    // ---- scene-gen ----
    auto* scenegen = app.add_subcommand("scene-gen", "Generate synthetic corner-case scans");
    std::string sg_kind = "t_intersection", sg_out = ".", sg_truth;
    icet::SceneSpec sg_spec;
    std::uint64_t sg_seed = 0;
    bool sg_pair = false;
    scenegen->add_option("kind", sg_kind, "t_intersection | tunnel | open_field")->required();
    scenegen->add_option("--out", sg_out, "Output directory")->capture_default_str();
    scenegen->add_option("--seed", sg_seed, "Noise seed")->capture_default_str();
    scenegen->add_flag("--pair", sg_pair, "Emit a reference + displaced pair");
    scenegen->add_option("--truth", sg_truth, "Pair transform x,y,z,phi,theta,psi [m,rad]");
    scenegen->add_option("--noise", sg_spec.noise_sigma, "Per-axis noise sigma [m]")
        ->capture_default_str();
    scenegen->add_option("--az-step-deg", sg_spec.az_step_deg, "Ray lattice azimuth step [deg]")
        ->capture_default_str();
    scenegen->add_option("--el-step-deg", sg_spec.el_step_deg, "Ray lattice elevation step [deg]")
        ->capture_default_str();

    // ---- montecarlo ----
    auto* mc = app.add_subcommand("montecarlo", "Monte Carlo registration campaign");
    std::string mc_kind = "t_intersection", mc_out = ".", mc_truth;
    GridFlags mc_grid;
    SolverFlags mc_solver;
    icet::MonteCarloConfig mc_cfg;
    mc->add_option("kind", mc_kind, "t_intersection | tunnel | open_field")->required();
    mc->add_option("--trials", mc_cfg.trials, "Trial count")->capture_default_str();
    mc->add_option("--seed", mc_cfg.seed, "Master seed")->capture_default_str();
    mc->add_option("--jobs", mc_cfg.jobs, "Worker threads (output independent of this)")
        ->capture_default_str();
    mc->add_option("--out", mc_out, "Output directory")->capture_default_str();
    mc->add_option("--truth", mc_truth, "True transform x,y,z,phi,theta,psi [m,rad]");
    mc->add_option("--noise", mc_cfg.scene.noise_sigma, "Per-axis noise sigma [m]")
        ->capture_default_str();
    mc->add_option("--az-step-deg", mc_cfg.scene.az_step_deg, "Ray lattice azimuth step [deg]")
        ->capture_default_str();
    mc->add_option("--el-step-deg", mc_cfg.scene.el_step_deg, "Ray lattice elevation step [deg]")
        ->capture_default_str();
    mc_grid.attach(mc);
    mc_solver.attach(mc);

    // ---- sweep ----
    auto* sweep = app.add_subcommand("sweep", "Voxel-resolution sweep over a fixed campaign");
    std::string sw_kind = "t_intersection", sw_out = ".", sw_truth;
    std::vector<double> sw_resolutions;
    GridFlags sw_grid;
    SolverFlags sw_solver;
    icet::MonteCarloConfig sw_cfg;
    sweep->add_option("kind", sw_kind, "t_intersection | tunnel | open_field")->required();
    sweep
        ->add_option("--resolutions", sw_resolutions,
                     "Voxel angular resolutions to sweep [deg]")
        ->required()
        ->delimiter(',');
    sweep->add_option("--trials", sw_cfg.trials, "Trials per resolution")->capture_default_str();
    sweep->add_option("--seed", sw_cfg.seed, "Master seed")->capture_default_str();
    sweep->add_option("--jobs", sw_cfg.jobs, "Worker threads")->capture_default_str();
    sweep->add_option("--out", sw_out, "Output directory")->capture_default_str();
    sweep->add_option("--truth", sw_truth, "True transform x,y,z,phi,theta,psi [m,rad]");
    sweep->add_option("--az-step-deg", sw_cfg.scene.az_step_deg, "Ray lattice azimuth step [deg]")
        ->capture_default_str();
    sweep->add_option("--el-step-deg", sw_cfg.scene.el_step_deg, "Ray lattice elevation step [deg]")
        ->capture_default_str();
    sw_grid.attach(sweep);
    sw_solver.attach(sweep);

    // ---- odometry ----
    auto* odo = app.add_subcommand("odometry", "Sequential pairwise registration over scan files");
    std::vector<std::string> odo_files;
    std::string odo_out = ".", odo_map;
    GridFlags odo_grid;
    SolverFlags odo_solver;
    odo->add_option("scans", odo_files, "Ordered scan files (>= 2)")->required()->expected(-2);
    odo->add_option("--out", odo_out, "Output directory")->capture_default_str();
    odo->add_option("--map", odo_map, "Also write the stitched HD map to this scan file");
    odo_grid.attach(odo);
    odo_solver.attach(odo);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*match) {
            return cmd_match(match_ref, match_new, match_grid, match_solver, match_guess);
        }

        if (*scenegen) {
            sg_spec.kind = icet::scene_kind_from_string(sg_kind);
            std::filesystem::create_directories(sg_out);
            const std::filesystem::path dir(sg_out);
            ordered_json manifest{{"command", "scene-gen"},
                                  {"scene", scene_json(sg_spec)},
                                  {"seed", sg_seed},
                                  {"pair", sg_pair}};
            if (sg_pair) {
                const icet::StateVector truth =
                    sg_truth.empty() ? icet::MonteCarloConfig{}.true_transform
                                     : parse_state(sg_truth);
                const icet::ScenePair pair = icet::scene_pair(
                    sg_spec, truth, icet::derive_seed(sg_seed, 0), icet::derive_seed(sg_seed, 1));
                icet::save_scan(pair.reference, dir / "reference.bin", icet::ScanFormat::BinXYZI);
                icet::save_scan(pair.new_scan, dir / "new.bin", icet::ScanFormat::BinXYZI);
                manifest["truth"] = state_json(truth);
                manifest["outputs"] = {"reference.bin", "new.bin"};
            } else {
                const icet::PointCloud cloud = icet::sample_scene(
                    sg_spec, icet::reference_pose(sg_spec.kind), icet::derive_seed(sg_seed, 0));
                icet::save_scan(cloud, dir / "scan.bin", icet::ScanFormat::BinXYZI);
                manifest["outputs"] = {"scan.bin"};
            }
            write_json(manifest, dir / "manifest.json");
            return kExitOk;
        }

        if (*mc) {
            mc_cfg.scene.kind = icet::scene_kind_from_string(mc_kind);
            mc_cfg.grid = mc_grid.resolve(mc_cfg.scene.kind);
            mc_cfg.solver = mc_solver.resolve();
            if (!mc_truth.empty()) mc_cfg.true_transform = parse_state(mc_truth);
            std::filesystem::create_directories(mc_out);
            const std::filesystem::path dir(mc_out);

            const icet::MonteCarloResult result = icet::run_monte_carlo(mc_cfg);
            icet::write_table(icet::trial_rows(result.records), dir / "trials.csv");
            write_json(icet::summary_to_json(result.summary), dir / "summary.json");
            write_json(ordered_json{{"command", "montecarlo"},
                                    {"scene", scene_json(mc_cfg.scene)},
                                    {"grid", grid_json(mc_cfg.grid)},
                                    {"solver", solver_json(mc_cfg.solver, mc_solver.algo)},
                                    {"truth", state_json(mc_cfg.true_transform)},
                                    {"guess_sigma_translation", mc_cfg.guess.sigma_translation},
                                    {"guess_sigma_rotation", mc_cfg.guess.sigma_rotation},
                                    {"trials", mc_cfg.trials},
                                    {"seed", mc_cfg.seed},
                                    {"outputs", {"trials.csv", "summary.json"}}},
                       dir / "manifest.json");
            return kExitOk;
        }

        if (*sweep) {
            sw_cfg.scene.kind = icet::scene_kind_from_string(sw_kind);
            sw_cfg.grid = sw_grid.resolve(sw_cfg.scene.kind);
            sw_cfg.solver = sw_solver.resolve();
            if (!sw_truth.empty()) sw_cfg.true_transform = parse_state(sw_truth);
            std::filesystem::create_directories(sw_out);
            const std::filesystem::path dir(sw_out);

            const auto rows = icet::run_resolution_sweep(sw_cfg, sw_resolutions);
            icet::write_table(icet::sweep_rows(rows), dir / "sweep.csv");
            write_json(ordered_json{{"command", "sweep"},
                                    {"scene", scene_json(sw_cfg.scene)},
                                    {"grid", grid_json(sw_cfg.grid)},
                                    {"solver", solver_json(sw_cfg.solver, sw_solver.algo)},
                                    {"truth", state_json(sw_cfg.true_transform)},
                                    {"resolutions", sw_resolutions},
                                    {"trials", sw_cfg.trials},
                                    {"seed", sw_cfg.seed},
                                    {"outputs", {"sweep.csv"}}},
                       dir / "manifest.json");
            return kExitOk;
        }

        if (*odo) {
            std::vector<icet::PointCloud> scans;
            scans.reserve(odo_files.size());
            std::size_t dropped = 0;
            for (const std::string& f : odo_files) {
                auto loaded = icet::load_scan(f, icet::format_from_path(f));
                dropped += loaded.dropped_nonfinite;
                scans.push_back(std::move(loaded.cloud));
            }
            if (dropped > 0) std::cerr << "icet: dropped " << dropped << " non-finite points\n";
            std::filesystem::create_directories(odo_out);
            const std::filesystem::path dir(odo_out);

            const icet::OdometryResult result =
                icet::run_odometry(scans, odo_grid.cfg, odo_solver.resolve());
            icet::write_table(icet::odometry_rows(result), dir / "trajectory.csv");
            ordered_json manifest{{"command", "odometry"},
                                  {"grid", grid_json(odo_grid.cfg)},
                                  {"solver", solver_json(odo_solver.cfg, odo_solver.algo)},
                                  {"inputs", odo_files},
                                  {"outputs", {"trajectory.csv"}}};
            if (!odo_map.empty()) {
                const icet::PointCloud map = icet::stitch_map(scans, result.poses_to_frame0);
                icet::save_scan(map, odo_map, icet::format_from_path(odo_map));
                manifest["map"] = odo_map;
            }
            write_json(manifest, dir / "manifest.json");
            return kExitOk;
        }
    } catch (const icet::IoError& e) {
        std::cerr << "icet: I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const icet::FormatError& e) {
        std::cerr << "icet: I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const icet::EmptyGridError& e) {
        std::cerr << "icet: unregistrable input: " << e.what() << "\n";
        return kExitUnregistrable;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "icet: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "icet: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
