#include "facesynth/geometry/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace facesynth::geometry {

double degrees_to_radians(double degrees) noexcept
{
    return degrees * std::numbers::pi / 180.0;
}

double radians_to_degrees(double radians) noexcept
{
    return radians * 180.0 / std::numbers::pi;
}

Eigen::Matrix3d yaw_rotation(double degrees)
{
    const double a = degrees_to_radians(degrees);
    const double c = std::cos(a);
    const double s = std::sin(a);
    Eigen::Matrix3d r;
    r << c, 0, s,
         0, 1, 0,
        -s, 0, c;
    return r;
}

Eigen::Matrix3d pitch_rotation(double degrees)
{
    const double a = degrees_to_radians(degrees);
    const double c = std::cos(a);
    const double s = std::sin(a);
    Eigen::Matrix3d r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

Eigen::Matrix3d roll_rotation(double degrees)
{
    const double a = degrees_to_radians(degrees);
    const double c = std::cos(a);
    const double s = std::sin(a);
    Eigen::Matrix3d r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

Eigen::Matrix3d compose_rotation(double yaw, double pitch, double roll)
{
    return yaw_rotation(yaw) * pitch_rotation(pitch) * roll_rotation(roll);
}

EulerAngles decompose_rotation(const Eigen::Matrix3d& r)
{
    // Column 2 of Ry Rx Rz is (sy cp, -sp, cy cp); row 1 is (cp sr, cp cr, -sp).
    EulerAngles e;
    const double sp = std::clamp(-r(1, 2), -1.0, 1.0);
    e.pitch = radians_to_degrees(std::asin(sp));
    e.yaw = radians_to_degrees(std::atan2(r(0, 2), r(2, 2)));
    e.roll = radians_to_degrees(std::atan2(r(1, 0), r(1, 1)));
    e.reliable = std::abs(e.pitch) <= 80.0;
    return e;
}

YawEstimate decompose_yaw(const Pose& pose)
{
    const auto e = decompose_rotation(pose.rotation);
    return {e.yaw, e.reliable};
}

} // namespace facesynth::geometry
