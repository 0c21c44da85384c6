#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace icet {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Rigid-body registration solution: Cartesian translation in meters and
/// body-fixed XYZ Euler angles (roll, pitch, yaw) in radians. Angles are
/// stored unwrapped; nothing normalizes them into (-pi, pi].
///
/// Gimbal lock at theta = +/-pi/2 is not guarded; scan-to-scan increments
/// are far below that regime.
struct StateVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double phi = 0.0;    // roll  [rad]
    double theta = 0.0;  // pitch [rad]
    double psi = 0.0;    // yaw   [rad]

    Vec3 translation() const { return {x, y, z}; }

    Vec6 vector() const {
        Vec6 v;
        v << x, y, z, phi, theta, psi;
        return v;
    }

    static StateVector from_vector(const Vec6& v) {
        return {v[0], v[1], v[2], v[3], v[4], v[5]};
    }

    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z) &&
               std::isfinite(phi) && std::isfinite(theta) && std::isfinite(psi);
    }
};

/// Ordered list of 3D points in meters, with optional per-point intensity.
/// Intensity is carried through I/O but never used by the registration math.
struct PointCloud {
    std::vector<Vec3> points;
    std::vector<float> intensity;  // empty, or one entry per point

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    bool has_intensity() const { return !intensity.empty(); }

    void reserve(std::size_t n) {
        points.reserve(n);
    }
};

constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace icet
