#pragma once

#include "icet/core.hpp"

namespace icet {

enum class EulerAxis { Phi, Theta, Psi };

/// Rotation matrix for a state, laid out so that transform_points computes
/// q = R p - t. Orthonormal with det +1 (to 1e-12) for any finite input.
Mat3 rotation_from_state(const StateVector& s);

/// Analytic derivative of rotation_from_state with respect to one Euler
/// angle. Consistent with central finite differences of
/// rotation_from_state to better than 1e-6 (validated in the test suite).
Mat3 rotation_derivative(const StateVector& s, EulerAxis axis);

/// q_i = R p_i - t for every point. Ordering and intensity preserved.
PointCloud transform_points(const PointCloud& cloud, const StateVector& s);

inline Vec3 transform_point(const Vec3& p, const Mat3& R, const Vec3& t) {
    return R * p - t;
}

/// Rotation + translation pair applying q = R p - t, with composition and
/// inversion helpers for chaining frame-to-frame registrations.
struct RigidTransform {
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return R * p - t; }

    /// this ∘ other: first apply other, then this.
    RigidTransform compose(const RigidTransform& other) const {
        return {R * other.R, R * other.t + t};
    }

    RigidTransform inverse() const { return {R.transpose(), -R.transpose() * t}; }

    static RigidTransform from_state(const StateVector& s) {
        return {rotation_from_state(s), s.translation()};
    }
};

/// Euler angles and translation recovered from a transform with the same
/// q = R p - t convention. Valid away from theta = +/-pi/2.
StateVector state_from_transform(const RigidTransform& T);

/// State whose transform exactly undoes s.
StateVector invert_state(const StateVector& s);

}  // namespace icet
