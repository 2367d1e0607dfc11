#pragma once

#include <Eigen/Dense>

namespace g2lab {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec8 = Eigen::Matrix<double, 8, 1>;

}  // namespace g2lab
