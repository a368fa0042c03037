#pragma once

#include <Eigen/Core>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace facesynth::eval {

struct RocPoint
{
    double threshold = 0.0;
    /// Fraction of impostor scores >= threshold.
    double far = 0.0;
    /// Fraction of genuine scores >= threshold.
    double tar = 0.0;
};

/// Sweep over the distinct scores of both classes in ascending order, plus a
/// final +inf threshold at which nothing is accepted.
struct RocCurve
{
    std::vector<RocPoint> points;
};

/// Throws empty_input when either class is empty.
RocCurve roc(std::span<const double> genuine, std::span<const double> impostor);

/// TAR at the smallest sweep threshold whose FAR does not exceed `far`.
double tar_at_far(const RocCurve& curve, double far);

struct CmcResult
{
    /// 1-based rank of the correct gallery template per probe.
    std::vector<int> ranks;
    /// Hit rate at each requested rank.
    std::map<int, double> rates;
};

/**
 * Closed-set identification. The correct score of a probe is its best score
 * over gallery entries of the same subject; its rank is one plus the number of
 * other-subject gallery entries scoring at least as high (ties count against
 * the probe). Throws protocol_error when a probe's subject is not in the gallery.
 */
CmcResult cmc(const Eigen::MatrixXd& scores, std::span<const std::string> probe_subjects,
              std::span<const std::string> gallery_subjects, std::span<const int> ks = std::span<const int>());

inline constexpr int default_cmc_ranks[] = {1, 5, 10};

struct EerResult
{
    double eer = 0.0;
    double threshold = 0.0;
};

/// Crossing of FAR and FRR over the ROC sweep, linearly interpolated between
/// the bracketing sweep points.
EerResult equal_error_rate(std::span<const double> genuine, std::span<const double> impostor);

struct LabelledScore
{
    double score = 0.0;
    bool genuine = false;
    int fold = 0;
};

/// Mean over folds of the accuracy on each fold at the threshold that
/// maximises accuracy on the remaining folds (ties go to the lowest threshold).
/// Throws invalid_input with fewer than two folds and protocol_error for a
/// fold holding only one class.
double fold_accuracy(std::span<const LabelledScore> scores);

struct EerAccuracy
{
    double eer = 0.0;
    double eer_complement = 0.0;
    double threshold = 0.0;
    double accuracy = 0.0;
};

EerAccuracy eer_and_accuracy(std::span<const LabelledScore> scores);

} // namespace facesynth::eval
