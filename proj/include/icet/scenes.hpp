#pragma once

#include "icet/geometry.hpp"
#include "icet/voxel_grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace icet {

enum class SceneKind { TIntersection, Tunnel, OpenField };

SceneKind scene_kind_from_string(const std::string& name);
std::string to_string(SceneKind kind);

/// Abstracted corner-case scene sampled by a regular az/el ray lattice with
/// per-axis Gaussian noise. Surfaces are exact planes; noiseless samples lie
/// on a plane to 1e-12.
struct SceneSpec {
    SceneKind kind = SceneKind::TIntersection;
    double noise_sigma = 0.002;  // m per axis
    double az_step_deg = 0.2;    // ray lattice spacing (sets surface density)
    double el_step_deg = 0.2;
    double el_min_deg = -25.0;  // lattice elevation span
    double el_max_deg = 25.0;
    std::uint64_t seed = 0;
};

/// Finite plane patch: origin + s*e1 + t*e2 for s,t in [0,1].
struct PlaneRect {
    Vec3 origin;
    Vec3 e1;
    Vec3 e2;
};

/// The scene's surfaces. Dimensions are fixed per kind and sized so sampled
/// scans sit well away from the domain boundaries.
std::vector<PlaneRect> scene_rectangles(SceneKind kind);

/// Canonical reference sensor pose for a scene (origin at the drivable
/// centerline, per-scene sensor height, axes aligned with the world).
StateVector reference_pose(SceneKind kind);

/// Grid settings that match each scene's scale (range gates chosen so that
/// grazing wedges stay well-formed). Resolution and min_points keep the
/// 4 deg / 50 point defaults.
GridConfig recommended_grid(SceneKind kind);

struct PoseOutsideSceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Casts the ray lattice from a sensor pose against the scene planes and
/// returns first hits in the sensor frame with independent per-axis noise.
/// Pose convention: sensor axes are the columns of R(pose angles), position
/// is the pose translation. Deterministic given the seed; the lattice itself
/// is canonical (seed only drives noise), so two samplings with equal poses
/// differ only by noise.
PointCloud sample_scene(const SceneSpec& spec, const StateVector& sensor_pose,
                        std::uint64_t seed);

struct ScenePair {
    PointCloud reference;
    PointCloud new_scan;
};

/// Reference sampled at the canonical pose, new scan sampled at the pose
/// displaced so that registering new against reference recovers exactly
/// `true_transform`. Independent noise seeds.
ScenePair scene_pair(const SceneSpec& spec, const StateVector& true_transform,
                     std::uint64_t seed_reference, std::uint64_t seed_new);

/// Sensor pose (position + orientation matrix) displaced from `base` by a
/// registration transform: registering a scan from the returned pose against
/// a scan from `base` recovers `transform`.
struct SensorPose {
    Vec3 position = Vec3::Zero();
    Mat3 orientation = Mat3::Identity();  // sensor -> world
};
SensorPose displaced_pose(const SensorPose& base, const StateVector& transform);

PointCloud sample_scene_at(const SceneSpec& spec, const SensorPose& pose, std::uint64_t seed);

}  // namespace icet
