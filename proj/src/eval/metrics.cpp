#include "facesynth/eval/metrics.hpp"

#include "facesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace facesynth::eval {

namespace {

// Number of values >= t in an ascending-sorted vector.
std::size_t count_at_least(const std::vector<double>& sorted, double t)
{
    return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

std::vector<double> sorted_copy(std::span<const double> v)
{
    std::vector<double> s(v.begin(), v.end());
    for (double x : s) {
        if (!std::isfinite(x)) {
            throw Error(ErrorCode::invalid_input, "non-finite score");
        }
    }
    std::sort(s.begin(), s.end());
    return s;
}

std::vector<double> thresholds(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> t;
    t.reserve(a.size() + b.size() + 1);
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(t));
    t.erase(std::unique(t.begin(), t.end()), t.end());
    t.push_back(std::numeric_limits<double>::infinity());
    return t;
}

} // namespace

RocCurve roc(std::span<const double> genuine, std::span<const double> impostor)
{
    if (genuine.empty() || impostor.empty()) {
        throw Error(ErrorCode::empty_input, "ROC needs genuine and impostor scores");
    }
    const auto g = sorted_copy(genuine);
    const auto i = sorted_copy(impostor);
    RocCurve curve;
    for (double t : thresholds(g, i)) {
        RocPoint p;
        p.threshold = t;
        p.far = static_cast<double>(count_at_least(i, t)) / static_cast<double>(i.size());
        p.tar = static_cast<double>(count_at_least(g, t)) / static_cast<double>(g.size());
        curve.points.push_back(p);
    }
    return curve;
}

double tar_at_far(const RocCurve& curve, double far)
{
    for (const auto& p : curve.points) {
        if (p.far <= far) {
            return p.tar;
        }
    }
    throw Error(ErrorCode::invalid_input, "ROC curve has no point with FAR <= target");
}

CmcResult cmc(const Eigen::MatrixXd& scores, std::span<const std::string> probe_subjects,
              std::span<const std::string> gallery_subjects, std::span<const int> ks)
{
    if (static_cast<Eigen::Index>(probe_subjects.size()) != scores.rows() ||
        static_cast<Eigen::Index>(gallery_subjects.size()) != scores.cols()) {
        throw Error(ErrorCode::dimension_mismatch, "CMC labels do not match the score matrix");
    }
    if (scores.rows() == 0) {
        throw Error(ErrorCode::empty_input, "no probes");
    }
    if (ks.empty()) {
        ks = default_cmc_ranks;
    }
    CmcResult out;
    for (Eigen::Index p = 0; p < scores.rows(); ++p) {
        double best = -std::numeric_limits<double>::infinity();
        bool found = false;
        for (Eigen::Index g = 0; g < scores.cols(); ++g) {
            if (gallery_subjects[static_cast<std::size_t>(g)] == probe_subjects[static_cast<std::size_t>(p)]) {
                best = std::max(best, scores(p, g));
                found = true;
            }
        }
        if (!found) {
            throw Error(ErrorCode::protocol_error,
                        "probe subject '" + probe_subjects[static_cast<std::size_t>(p)] + "' is not in the gallery");
        }
        int rank = 1;
        for (Eigen::Index g = 0; g < scores.cols(); ++g) {
            if (gallery_subjects[static_cast<std::size_t>(g)] != probe_subjects[static_cast<std::size_t>(p)] &&
                scores(p, g) >= best) {
                ++rank;
            }
        }
        out.ranks.push_back(rank);
    }
    for (int k : ks) {
        const auto hits = std::count_if(out.ranks.begin(), out.ranks.end(), [k](int r) { return r <= k; });
        out.rates[k] = static_cast<double>(hits) / static_cast<double>(out.ranks.size());
    }
    return out;
}

EerResult equal_error_rate(std::span<const double> genuine, std::span<const double> impostor)
{
    const RocCurve curve = roc(genuine, impostor);
    EerResult out;
    double prev_far = 0.0;
    double prev_frr = 0.0;
    double prev_t = 0.0;
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const auto& p = curve.points[k];
        const double frr = 1.0 - p.tar;
        const double d = p.far - frr;
        if (d <= 0.0) {
            if (k == 0 || d == 0.0) {
                out.eer = k == 0 ? 0.5 * (p.far + frr) : p.far;
                out.threshold = p.threshold;
                return out;
            }
            const double d_prev = prev_far - prev_frr;
            const double alpha = d_prev / (d_prev - d);
            out.eer = prev_far + alpha * (p.far - prev_far);
            out.threshold = std::isfinite(p.threshold) ? prev_t + alpha * (p.threshold - prev_t) : prev_t;
            return out;
        }
        prev_far = p.far;
        prev_frr = frr;
        prev_t = p.threshold;
    }
    // Unreachable: the +inf point has FAR 0 and FRR 1.
    throw Error(ErrorCode::invalid_input, "EER sweep did not cross");
}

double fold_accuracy(std::span<const LabelledScore> scores)
{
    std::set<int> folds;
    for (const auto& s : scores) {
        folds.insert(s.fold);
    }
    if (folds.size() < 2) {
        throw Error(ErrorCode::invalid_input, "fold accuracy needs at least two folds");
    }
    for (int f : folds) {
        bool pos = false;
        bool neg = false;
        for (const auto& s : scores) {
            if (s.fold == f) {
                (s.genuine ? pos : neg) = true;
            }
        }
        if (!pos || !neg) {
            throw Error(ErrorCode::protocol_error, "fold " + std::to_string(f) + " holds a single class");
        }
    }
    double total = 0.0;
    for (int f : folds) {
        std::vector<double> gen;
        std::vector<double> imp;
        for (const auto& s : scores) {
            if (s.fold != f) {
                (s.genuine ? gen : imp).push_back(s.score);
            }
        }
        std::sort(gen.begin(), gen.end());
        std::sort(imp.begin(), imp.end());
        double best_t = 0.0;
        std::size_t best_correct = 0;
        bool first = true;
        for (double t : thresholds(gen, imp)) {
            const std::size_t correct = count_at_least(gen, t) + (imp.size() - count_at_least(imp, t));
            if (first || correct > best_correct) {
                best_correct = correct;
                best_t = t;
                first = false;
            }
        }
        std::size_t correct = 0;
        std::size_t n = 0;
        for (const auto& s : scores) {
            if (s.fold == f) {
                ++n;
                correct += ((s.score >= best_t) == s.genuine) ? 1 : 0;
            }
        }
        total += static_cast<double>(correct) / static_cast<double>(n);
    }
    return total / static_cast<double>(folds.size());
}

EerAccuracy eer_and_accuracy(std::span<const LabelledScore> scores)
{
    std::vector<double> gen;
    std::vector<double> imp;
    for (const auto& s : scores) {
        (s.genuine ? gen : imp).push_back(s.score);
    }
    const auto e = equal_error_rate(gen, imp);
    EerAccuracy out;
    out.eer = e.eer;
    out.eer_complement = 1.0 - e.eer;
    out.threshold = e.threshold;
    out.accuracy = fold_accuracy(scores);
    return out;
}

} // namespace facesynth::eval
