#pragma once

#include "facesynth/geometry/camera.hpp"

#include <Eigen/Core>

namespace facesynth::geometry {

/**
 * Euler convention used throughout: R = Ry(yaw) * Rx(pitch) * Rz(roll), i.e.
 * intrinsic yaw (vertical model axis), then pitch, then roll. Angles are in
 * degrees. With y pointing down, yaw_rotation(90) maps +x to -z: the model's
 * +x side turns toward the camera.
 */
Eigen::Matrix3d yaw_rotation(double degrees);
Eigen::Matrix3d pitch_rotation(double degrees);
Eigen::Matrix3d roll_rotation(double degrees);
Eigen::Matrix3d compose_rotation(double yaw, double pitch, double roll);

struct EulerAngles
{
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    /// False when |pitch| > 80 degrees, where yaw and roll become entangled.
    bool reliable = true;
};

EulerAngles decompose_rotation(const Eigen::Matrix3d& rotation);

struct YawEstimate
{
    double degrees = 0.0;
    bool reliable = true;
};

YawEstimate decompose_yaw(const Pose& pose);

double degrees_to_radians(double degrees) noexcept;
double radians_to_degrees(double radians) noexcept;

} // namespace facesynth::geometry
