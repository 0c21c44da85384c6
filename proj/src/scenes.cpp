#include "icet/scenes.hpp"

#include "icet/rng.hpp"

#include <cmath>
#include <limits>

namespace icet {

namespace {

// Scene dimensions. These are abstracted corner-case geometries: what
// matters is the observability structure they induce (which states the
// surfaces constrain), not any particular real-world scale.
struct TIntersectionDims {
    // The sensor drives the main road close to the building line on the
    // junction side: the near wall is at +3 m, the far side of the road is
    // beyond the range gate. The crossing road opens a gap in the near wall
    // right where the wall would otherwise be seen at normal incidence.
    double near_wall_x = 3.0;
    double far_wall_x = -9.0;
    double wall_height = 3.0;
    double wall_extent = 40.0;     // walls and end walls at +/- this y
    double mouth_half_span = 6.0;  // gap in the near wall
    double recess = 0.8;           // setback of the wall behind each mouth panel
    double panel_length = 2.0;
    double panel_tilt_rad = deg2rad(6.0);  // mouth reveal panels, tilt off the y axis
    double sensor_height = 1.5;
};

struct TunnelDims {
    double half_width = 4.0;
    double height = 6.0;
    double half_length = 100.0;
    double sensor_height = 1.7;
};

struct OpenFieldDims {
    double half_extent = 150.0;
    double sensor_height = 2.0;
};

constexpr TIntersectionDims kTee{};
constexpr TunnelDims kTunnel{};
constexpr OpenFieldDims kField{};

constexpr double kRayMin = 0.2;   // m, self-return guard
constexpr double kRayCap = 60.0;  // m, beyond every recommended max_range

PlaneRect make_rect(const Vec3& origin, const Vec3& e1, const Vec3& e2) {
    return {origin, e1, e2};
}

std::vector<PlaneRect> t_intersection_rects() {
    const auto& d = kTee;
    std::vector<PlaneRect> rects;
    const Vec3 up(0, 0, d.wall_height);
    // Far side of the main road (beyond the recommended range gate).
    rects.push_back(make_rect({d.far_wall_x, -d.wall_extent, 0}, {0, 2 * d.wall_extent, 0}, up));
    // Near wall, split by the crossing-road mouth; the segments behind the
    // reveal panels are set back so panel columns keep clean radial runs.
    rects.push_back(make_rect({d.near_wall_x, -d.wall_extent, 0},
                              {0, d.wall_extent - d.mouth_half_span - d.recess, 0}, up));
    rects.push_back(make_rect({d.near_wall_x, d.mouth_half_span + d.recess, 0},
                              {0, d.wall_extent - d.mouth_half_span - d.recess, 0}, up));
    // Mouth reveal panels: attached at the gap edges and angled into the
    // corridor so the sensor sees them unoccluded. The small tilt gives
    // their (noise-limited) normals a y component, which is what makes the
    // along-track state observable at the junction.
    const double s = std::sin(d.panel_tilt_rad), c = std::cos(d.panel_tilt_rad);
    rects.push_back(make_rect({d.near_wall_x, d.mouth_half_span, 0},
                              {-d.panel_length * s, -d.panel_length * c, 0}, up));
    rects.push_back(make_rect({d.near_wall_x, -d.mouth_half_span, 0},
                              {-d.panel_length * s, d.panel_length * c, 0}, up));
    // End walls (present in the geometry; beyond the recommended range gate).
    rects.push_back(
        make_rect({d.far_wall_x, d.wall_extent, 0}, {d.near_wall_x - d.far_wall_x, 0, 0}, up));
    rects.push_back(
        make_rect({d.far_wall_x, -d.wall_extent, 0}, {d.near_wall_x - d.far_wall_x, 0, 0}, up));
    // Far wall of the crossing road.
    rects.push_back(make_rect({20.0, -20.0, 0}, {0, 40.0, 0}, up));
    // Ground.
    rects.push_back(make_rect({-30.0, -45.0, 0}, {60.0, 0, 0}, {0, 90.0, 0}));
    return rects;
}

std::vector<PlaneRect> tunnel_rects() {
    const auto& d = kTunnel;
    std::vector<PlaneRect> rects;
    const Vec3 along(0, 2 * d.half_length, 0);
    const Vec3 up(0, 0, d.height);
    rects.push_back(make_rect({-d.half_width, -d.half_length, 0}, along, up));
    rects.push_back(make_rect({d.half_width, -d.half_length, 0}, along, up));
    rects.push_back(
        make_rect({-d.half_width, -d.half_length, 0}, {2 * d.half_width, 0, 0}, along));
    rects.push_back(
        make_rect({-d.half_width, -d.half_length, d.height}, {2 * d.half_width, 0, 0}, along));
    return rects;
}

std::vector<PlaneRect> open_field_rects() {
    const auto& d = kField;
    return {make_rect({-d.half_extent, -d.half_extent, 0}, {2 * d.half_extent, 0, 0},
                      {0, 2 * d.half_extent, 0})};
}

bool pose_inside(SceneKind kind, const Vec3& p) {
    switch (kind) {
        case SceneKind::TIntersection:
            return p.x() > kTee.far_wall_x + 0.4 && p.x() < 2.0 &&
                   std::abs(p.y()) < kTee.wall_extent - 5.0 && p.z() > 0.2 &&
                   p.z() < kTee.wall_height - 0.2;
        case SceneKind::Tunnel:
            return std::abs(p.x()) < kTunnel.half_width - 0.4 &&
                   std::abs(p.y()) < kTunnel.half_length - 20.0 && p.z() > 0.2 &&
                   p.z() < kTunnel.height - 0.2;
        case SceneKind::OpenField:
            return std::abs(p.x()) < kField.half_extent - 20.0 &&
                   std::abs(p.y()) < kField.half_extent - 20.0 && p.z() > 0.2 && p.z() < 10.0;
    }
    return false;
}

}  // namespace

SceneKind scene_kind_from_string(const std::string& name) {
    if (name == "t_intersection") return SceneKind::TIntersection;
    if (name == "tunnel") return SceneKind::Tunnel;
    if (name == "open_field") return SceneKind::OpenField;
    throw std::invalid_argument("unknown scene kind: " + name);
}

std::string to_string(SceneKind kind) {
    switch (kind) {
        case SceneKind::TIntersection:
            return "t_intersection";
        case SceneKind::Tunnel:
            return "tunnel";
        case SceneKind::OpenField:
            return "open_field";
    }
    return "?";
}

std::vector<PlaneRect> scene_rectangles(SceneKind kind) {
    switch (kind) {
        case SceneKind::TIntersection:
            return t_intersection_rects();
        case SceneKind::Tunnel:
            return tunnel_rects();
        case SceneKind::OpenField:
            return open_field_rects();
    }
    return {};
}

StateVector reference_pose(SceneKind kind) {
    StateVector pose;
    switch (kind) {
        case SceneKind::TIntersection:
            pose.z = kTee.sensor_height;
            break;
        case SceneKind::Tunnel:
            pose.z = kTunnel.sensor_height;
            break;
        case SceneKind::OpenField:
            pose.z = kField.sensor_height;
            break;
    }
    return pose;
}

GridConfig recommended_grid(SceneKind kind) {
    GridConfig cfg;
    cfg.min_range = 1.0;
    switch (kind) {
        case SceneKind::TIntersection:
            cfg.max_range = 7.5;
            break;
        case SceneKind::Tunnel:
            cfg.max_range = 10.0;
            break;
        case SceneKind::OpenField:
            cfg.max_range = 10.0;
            break;
    }
    return cfg;
}

SensorPose displaced_pose(const SensorPose& base, const StateVector& transform) {
    const Mat3 R = rotation_from_state(transform);
    SensorPose out;
    out.orientation = base.orientation * R;
    out.position = base.position - base.orientation * transform.translation();
    return out;
}

PointCloud sample_scene_at(const SceneSpec& spec, const SensorPose& pose, std::uint64_t seed) {
    if (!pose_inside(spec.kind, pose.position)) {
        throw PoseOutsideSceneError("sensor pose outside the drivable region of " +
                                    to_string(spec.kind));
    }
    const auto rects = scene_rectangles(spec.kind);

    struct PreparedRect {
        Vec3 origin, n, u1, u2;
        double len1, len2;
    };
    std::vector<PreparedRect> prepared;
    prepared.reserve(rects.size());
    for (const PlaneRect& r : rects) {
        PreparedRect p;
        p.origin = r.origin;
        p.len1 = r.e1.norm();
        p.len2 = r.e2.norm();
        p.u1 = r.e1 / p.len1;
        p.u2 = r.e2 / p.len2;
        p.n = p.u1.cross(p.u2);
        prepared.push_back(p);
    }

    const int n_az = std::max(1, static_cast<int>(std::lround(360.0 / spec.az_step_deg)));
    const double el_span = spec.el_max_deg - spec.el_min_deg;
    const int n_el = std::max(1, static_cast<int>(std::lround(el_span / spec.el_step_deg)));
    const double az_step = 2.0 * kPi / n_az;
    const double el_step = deg2rad(el_span) / n_el;
    const double el_min = deg2rad(spec.el_min_deg);

    Rng rng(seed);
    PointCloud cloud;
    cloud.reserve(static_cast<std::size_t>(n_az) * n_el);

    for (int i = 0; i < n_az; ++i) {
        const double az = -kPi + (i + 0.5) * az_step;
        const double caz = std::cos(az), saz = std::sin(az);
        for (int j = 0; j < n_el; ++j) {
            const double el = el_min + (j + 0.5) * el_step;
            const double cel = std::cos(el);
            const Vec3 dir_sensor(cel * caz, cel * saz, std::sin(el));
            const Vec3 d = pose.orientation * dir_sensor;

            double best = std::numeric_limits<double>::infinity();
            for (const PreparedRect& r : prepared) {
                const double denom = r.n.dot(d);
                if (std::abs(denom) < 1e-12) continue;
                const double t = r.n.dot(r.origin - pose.position) / denom;
                if (t < kRayMin || t > kRayCap || t >= best) continue;
                const Vec3 h = pose.position + t * d - r.origin;
                const double s1 = h.dot(r.u1);
                const double s2 = h.dot(r.u2);
                if (s1 < 0.0 || s1 > r.len1 || s2 < 0.0 || s2 > r.len2) continue;
                best = t;
            }
            if (!std::isfinite(best)) continue;

            const Vec3 hit_world = pose.position + best * d;
            Vec3 p = pose.orientation.transpose() * (hit_world - pose.position);
            // Noise deviates are always drawn so a noiseless sampling with
            // the same seed is the exact clean twin of a noisy one.
            p.x() += rng.gaussian(spec.noise_sigma);
            p.y() += rng.gaussian(spec.noise_sigma);
            p.z() += rng.gaussian(spec.noise_sigma);
            cloud.points.push_back(p);
        }
    }
    return cloud;
}

PointCloud sample_scene(const SceneSpec& spec, const StateVector& sensor_pose,
                        std::uint64_t seed) {
    SensorPose pose;
    pose.position = sensor_pose.translation();
    pose.orientation = rotation_from_state(
        StateVector{0, 0, 0, sensor_pose.phi, sensor_pose.theta, sensor_pose.psi});
    return sample_scene_at(spec, pose, seed);
}

ScenePair scene_pair(const SceneSpec& spec, const StateVector& true_transform,
                     std::uint64_t seed_reference, std::uint64_t seed_new) {
    SensorPose ref_pose;
    ref_pose.position = reference_pose(spec.kind).translation();

    ScenePair pair;
    pair.reference = sample_scene_at(spec, ref_pose, seed_reference);
    pair.new_scan = sample_scene_at(spec, displaced_pose(ref_pose, true_transform), seed_new);
    return pair;
}

}  // namespace icet
