#include "facesynth/geometry/similarity.hpp"

#include "facesynth/error.hpp"
#include "facesynth/geometry/rotation.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace facesynth::geometry {

Similarity2D Similarity2D::inverse() const
{
    Similarity2D inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.scale * (inv.rotation * translation);
    return inv;
}

double Similarity2D::angle() const
{
    return radians_to_degrees(std::atan2(rotation(1, 0), rotation(0, 0)));
}

SimilarityFit estimate_similarity_2d(std::span<const Eigen::Vector2d> src, std::span<const Eigen::Vector2d> dst)
{
    if (src.size() != dst.size()) {
        throw Error(ErrorCode::invalid_input, "point lists differ in length");
    }
    if (src.size() < 2) {
        throw Error(ErrorCode::invalid_input, "a similarity needs at least two point pairs");
    }
    const auto n = static_cast<Eigen::Index>(src.size());
    Eigen::Matrix2Xd a(2, n);
    Eigen::Matrix2Xd b(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a.col(i) = src[i];
        b.col(i) = dst[i];
    }
    const Eigen::Vector2d mean = a.rowwise().mean();
    const double spread = (a.colwise() - mean).squaredNorm();
    if (!(spread > 1e-18 * (1.0 + mean.squaredNorm()))) {
        throw Error(ErrorCode::degenerate_configuration, "source points coincide");
    }
    const Eigen::Matrix3d h = Eigen::umeyama(a, b, true);

    SimilarityFit fit;
    const Eigen::Matrix2d sr = h.topLeftCorner<2, 2>();
    fit.transform.scale = std::sqrt(std::abs(sr.determinant()));
    fit.transform.rotation = sr / fit.transform.scale;
    fit.transform.translation = h.topRightCorner<2, 1>();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        sum += (fit.transform.apply(src[i]) - dst[i]).squaredNorm();
    }
    fit.residual = std::sqrt(sum / static_cast<double>(n));
    return fit;
}

} // namespace facesynth::geometry
