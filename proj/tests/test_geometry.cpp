#include "icet/geometry.hpp"
#include "icet/rng.hpp"

#include "doctest.h"

using namespace icet;

namespace {

Mat3 elementary_x(double a) {
    Mat3 R;
    R << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return R;
}
Mat3 elementary_y(double a) {
    Mat3 R;
    R << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return R;
}
Mat3 elementary_z(double a) {
    Mat3 R;
    R << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return R;
}

StateVector random_state(Rng& rng) {
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); };
    return {u(-10, 10), u(-10, 10), u(-10, 10), u(-1.2, 1.2), u(-1.2, 1.2), u(-1.2, 1.2)};
}

Mat3 finite_difference(const StateVector& s, EulerAxis axis, double h) {
    StateVector plus = s, minus = s;
    double* pp = nullptr;
    double* pm = nullptr;
    switch (axis) {
        case EulerAxis::Phi:
            pp = &plus.phi;
            pm = &minus.phi;
            break;
        case EulerAxis::Theta:
            pp = &plus.theta;
            pm = &minus.theta;
            break;
        case EulerAxis::Psi:
            pp = &plus.psi;
            pm = &minus.psi;
            break;
    }
    *pp += h;
    *pm -= h;
    return (rotation_from_state(plus) - rotation_from_state(minus)) / (2.0 * h);
}

}  // namespace

TEST_CASE("rotation of the zero state is the identity") {
    CHECK((rotation_from_state({}) - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rotation at phi = pi/2 permutes the y and z axes") {
    const Mat3 R = rotation_from_state({0, 0, 0, kPi / 2, 0, 0});
    Mat3 expected;
    expected << 1, 0, 0, 0, 0, 1, 0, -1, 0;
    CHECK((R - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("rotation matches the transposed product of elementary body-fixed XYZ rotations") {
    const StateVector s{0, 0, 0, 0.12, 0.10, 0.20};
    const Mat3 oracle =
        (elementary_x(s.phi) * elementary_y(s.theta) * elementary_z(s.psi)).transpose();
    CHECK((rotation_from_state(s) - oracle).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rotation is orthonormal with unit determinant") {
    Rng rng(11);
    for (int i = 0; i < 300; ++i) {
        const Mat3 R = rotation_from_state(random_state(rng));
        CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
    }
}

TEST_CASE("derivative structure: psi zeroes the bottom row, phi the first column") {
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        const StateVector s = random_state(rng);
        CHECK(rotation_derivative(s, EulerAxis::Psi).row(2).cwiseAbs().maxCoeff() == 0.0);
        CHECK(rotation_derivative(s, EulerAxis::Phi).col(0).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("analytic derivatives agree with central finite differences") {
    Rng rng(13);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const StateVector s = random_state(rng);
        for (EulerAxis axis : {EulerAxis::Phi, EulerAxis::Theta, EulerAxis::Psi}) {
            const Mat3 diff = rotation_derivative(s, axis) - finite_difference(s, axis, 1e-6);
            worst = std::max(worst, diff.cwiseAbs().maxCoeff());
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("transforming with the zero state is the identity") {
    Rng rng(14);
    PointCloud cloud;
    for (int i = 0; i < 50; ++i) {
        cloud.points.emplace_back(rng.gaussian(), rng.gaussian(), rng.gaussian());
    }
    const PointCloud out = transform_points(cloud, {});
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((out.points[i] - cloud.points[i]).norm() == 0.0);
    }
}

TEST_CASE("pure translation subtracts the offset") {
    PointCloud cloud;
    cloud.points.emplace_back(1, 0, 0);
    const PointCloud out = transform_points(cloud, {1, 0, 0, 0, 0, 0});
    CHECK(out.points[0].norm() < 1e-15);
}

TEST_CASE("transform composed with its analytic inverse is the identity") {
    Rng rng(15);
    const StateVector s = random_state(rng);
    const StateVector inv = invert_state(s);
    PointCloud cloud;
    for (int i = 0; i < 100; ++i) {
        cloud.points.emplace_back(10 * rng.uniform01(), 10 * rng.uniform01(),
                                  10 * rng.uniform01());
    }
    const PointCloud back = transform_points(transform_points(cloud, s), inv);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        CHECK((back.points[i] - cloud.points[i]).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("pure rotations preserve pairwise distances") {
    Rng rng(16);
    StateVector s = random_state(rng);
    s.x = s.y = s.z = 0.0;
    PointCloud cloud;
    for (int i = 0; i < 40; ++i) {
        cloud.points.emplace_back(rng.gaussian(3.0), rng.gaussian(3.0), rng.gaussian(3.0));
    }
    const PointCloud out = transform_points(cloud, s);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t j = i + 1; j < cloud.size(); ++j) {
            const double before = (cloud.points[i] - cloud.points[j]).norm();
            const double after = (out.points[i] - out.points[j]).norm();
            CHECK(std::abs(before - after) < 1e-10);
        }
    }
}

TEST_CASE("euler extraction round-trips the transform") {
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const StateVector s = random_state(rng);
        const StateVector back = state_from_transform(RigidTransform::from_state(s));
        CHECK((back.vector() - s.vector()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("intensity and ordering survive transforms") {
    PointCloud cloud;
    cloud.points.emplace_back(1, 2, 3);
    cloud.points.emplace_back(4, 5, 6);
    cloud.intensity = {0.5f, 0.25f};
    const PointCloud out = transform_points(cloud, {0.1, 0, 0, 0, 0, 0.3});
    REQUIRE(out.intensity.size() == 2);
    CHECK(out.intensity[0] == 0.5f);
    CHECK(out.intensity[1] == 0.25f);
}
