#include "icet/geometry.hpp"

#include <cmath>

namespace icet {

Mat3 rotation_from_state(const StateVector& s) {
    const double cphi = std::cos(s.phi), sphi = std::sin(s.phi);
    const double cth = std::cos(s.theta), sth = std::sin(s.theta);
    const double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);

    Mat3 R;
    R << cth * cpsi, spsi * cphi + sphi * sth * cpsi, sphi * spsi - sth * cphi * cpsi,
        -spsi * cth, cphi * cpsi - sphi * sth * spsi, sphi * cpsi + sth * spsi * cphi,
        sth, -sphi * cth, cphi * cth;
    return R;
}

Mat3 rotation_derivative(const StateVector& s, EulerAxis axis) {
    const double cphi = std::cos(s.phi), sphi = std::sin(s.phi);
    const double cth = std::cos(s.theta), sth = std::sin(s.theta);
    const double cpsi = std::cos(s.psi), spsi = std::sin(s.psi);

    Mat3 D;
    switch (axis) {
        case EulerAxis::Phi:
            // First column identically zero: roll does not touch the
            // phi-free entries of column one.
            D << 0.0, -spsi * sphi + cphi * sth * cpsi, cphi * spsi + sth * sphi * cpsi,
                0.0, -sphi * cpsi - cphi * sth * spsi, cphi * cpsi - sth * spsi * sphi,
                0.0, -cphi * cth, -sphi * cth;
            break;
        case EulerAxis::Theta:
            D << -sth * cpsi, cth * sphi * cpsi, -cth * cphi * cpsi,
                spsi * sth, -cth * sphi * spsi, cth * spsi * cphi,
                cth, sphi * sth, -sth * cphi;
            break;
        case EulerAxis::Psi:
            // Bottom row identically zero: yaw leaves row three unchanged.
            D << -cth * spsi, cpsi * cphi - sphi * sth * spsi, cpsi * sphi + sth * cphi * spsi,
                -cpsi * cth, -spsi * cphi - sphi * sth * cpsi, sth * cpsi * cphi - sphi * spsi,
                0.0, 0.0, 0.0;
            break;
    }
    return D;
}

PointCloud transform_points(const PointCloud& cloud, const StateVector& s) {
    const Mat3 R = rotation_from_state(s);
    const Vec3 t = s.translation();

    PointCloud out;
    out.points.resize(cloud.points.size());
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        out.points[i] = R * cloud.points[i] - t;
    }
    out.intensity = cloud.intensity;
    return out;
}

StateVector state_from_transform(const RigidTransform& T) {
    StateVector s;
    s.x = T.t.x();
    s.y = T.t.y();
    s.z = T.t.z();
    // Layout of rotation_from_state: R(2,0) = sin(theta),
    // R(2,1) = -sin(phi)cos(theta), R(1,0) = -sin(psi)cos(theta).
    s.theta = std::asin(std::clamp(T.R(2, 0), -1.0, 1.0));
    s.phi = std::atan2(-T.R(2, 1), T.R(2, 2));
    s.psi = std::atan2(-T.R(1, 0), T.R(0, 0));
    return s;
}

StateVector invert_state(const StateVector& s) {
    return state_from_transform(RigidTransform::from_state(s).inverse());
}

}  // namespace icet
