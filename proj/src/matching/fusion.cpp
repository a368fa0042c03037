#include "facesynth/matching/fusion.hpp"

#include "facesynth/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace facesynth::matching {

namespace {

void check_scores(std::span<const double> scores)
{
    if (scores.empty()) {
        throw Error(ErrorCode::empty_input, "no scores to pool");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw Error(ErrorCode::invalid_input, "non-finite score");
        }
    }
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

} // namespace

double ncc(std::span<const double> x, std::span<const double> y, bool* degenerate)
{
    if (x.size() != y.size()) {
        throw Error(ErrorCode::dimension_mismatch,
                    "NCC of vectors with " + std::to_string(x.size()) + " and " + std::to_string(y.size()) + " values");
    }
    if (x.empty()) {
        throw Error(ErrorCode::empty_input, "NCC of empty vectors");
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = x[i] - mx;
        const double b = y[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        if (degenerate) {
            *degenerate = true;
        }
        return 0.0;
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double softmax_pool(std::span<const double> scores, double beta)
{
    check_scores(scores);
    const double top = *std::max_element(scores.begin(), scores.end());
    double num = 0.0;
    double den = 0.0;
    for (double s : scores) {
        const double w = std::exp(beta * (s - top));
        num += s * w;
        den += w;
    }
    return num / den;
}

double fuse_scores(std::span<const double> scores, int beta_min, int beta_max)
{
    if (beta_min < 0) {
        throw Error(ErrorCode::invalid_input, "beta must be non-negative");
    }
    if (beta_max < beta_min) {
        throw Error(ErrorCode::invalid_input, "empty beta range");
    }
    double sum = 0.0;
    for (int b = beta_min; b <= beta_max; ++b) {
        sum += softmax_pool(scores, b);
    }
    return sum / static_cast<double>(beta_max - beta_min + 1);
}

const char* to_string(Strategy s) noexcept
{
    switch (s) {
    case Strategy::min:
        return "min";
    case Strategy::max:
        return "max";
    case Strategy::mean:
        return "mean";
    case Strategy::softmax:
        return "softmax";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name)
{
    for (Strategy s : {Strategy::min, Strategy::max, Strategy::mean, Strategy::softmax}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    throw Error(ErrorCode::invalid_input, "unknown fusion strategy '" + std::string(name) + "'");
}

double baseline_pool(std::span<const double> scores, Strategy strategy)
{
    check_scores(scores);
    switch (strategy) {
    case Strategy::min:
        return *std::min_element(scores.begin(), scores.end());
    case Strategy::max:
        return *std::max_element(scores.begin(), scores.end());
    case Strategy::mean:
        return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
    case Strategy::softmax:
        break;
    }
    throw Error(ErrorCode::invalid_input, "softmax is not a baseline strategy");
}

void FusionConfig::validate() const
{
    if (beta_min < 0) {
        throw Error(ErrorCode::invalid_input, "beta must be non-negative");
    }
    if (beta_max < beta_min) {
        throw Error(ErrorCode::invalid_input, "empty beta range");
    }
}

double pool(std::span<const double> scores, const FusionConfig& config)
{
    if (config.strategy == Strategy::softmax) {
        return fuse_scores(scores, config.beta_min, config.beta_max);
    }
    return baseline_pool(scores, config.strategy);
}

int select_mutual_view(double yaw_p, double yaw_q, double near_frontal, double near_profile)
{
    const double a = std::abs(yaw_p);
    const double b = std::abs(yaw_q);
    if (a <= near_frontal && b <= near_frontal) {
        return 0;
    }
    if (a >= near_profile && b >= near_profile) {
        return 75;
    }
    return 40;
}

int mutual_view_key(double yaw_p, double yaw_q, double near_frontal, double near_profile)
{
    const int v = select_mutual_view(yaw_p, yaw_q, near_frontal, near_profile);
    return yaw_p + yaw_q < 0.0 ? -v : v;
}

bool TemplateFeatures::has_in_plane() const noexcept
{
    return std::any_of(items.begin(), items.end(), [](const ItemFeatures& i) { return i.in_plane.has_value(); });
}

bool TemplateFeatures::has_rendered() const noexcept
{
    return std::any_of(items.begin(), items.end(), [](const ItemFeatures& i) { return !i.rendered.empty(); });
}

Eigen::MatrixXd in_plane_scores(const TemplateFeatures& p, const TemplateFeatures& q, bool* degenerate)
{
    std::vector<const features::FeatureVector*> rows;
    std::vector<const features::FeatureVector*> cols;
    for (const auto& i : p.items) {
        if (i.in_plane) {
            rows.push_back(&*i.in_plane);
        }
    }
    for (const auto& i : q.items) {
        if (i.in_plane) {
            cols.push_back(&*i.in_plane);
        }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                ncc(rows[r]->values, cols[c]->values, degenerate);
        }
    }
    return m;
}

std::vector<double> rendered_scores(const TemplateFeatures& p, const TemplateFeatures& q,
                                    const TemplateMatchConfig& config, bool* degenerate)
{
    std::vector<double> scores;
    for (const auto& a : p.items) {
        for (const auto& b : q.items) {
            const int key = mutual_view_key(a.yaw, b.yaw, config.near_frontal, config.near_profile);
            const auto fa = a.rendered.find(key);
            const auto fb = b.rendered.find(key);
            if (fa != a.rendered.end() && fb != b.rendered.end()) {
                scores.push_back(ncc(fa->second.values, fb->second.values, degenerate));
            }
        }
    }
    return scores;
}

SimilarityResult template_similarity(const TemplateFeatures& p, const TemplateFeatures& q,
                                     const TemplateMatchConfig& config)
{
    config.fusion.validate();
    SimilarityResult out;
    if (config.use_in_plane) {
        const Eigen::MatrixXd m = in_plane_scores(p, q, &out.degenerate);
        if (m.size() > 0) {
            out.in_plane = pool(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())), config.fusion);
        }
    }
    if (config.use_rendered) {
        const auto r = rendered_scores(p, q, config, &out.degenerate);
        if (!r.empty()) {
            out.rendered = pool(r, config.fusion);
        }
    }
    if (out.in_plane && out.rendered) {
        out.score = 0.5 * (*out.in_plane + *out.rendered);
    } else if (out.in_plane || out.rendered) {
        out.score = out.in_plane ? *out.in_plane : *out.rendered;
        out.single_variant = true;
    } else {
        throw Error(ErrorCode::empty_input,
                    "templates '" + p.template_id + "' and '" + q.template_id + "' share no comparable features");
    }
    return out;
}

std::string score_matrix_csv(const Eigen::MatrixXd& scores, std::span<const std::string> row_ids,
                             std::span<const std::string> column_ids)
{
    if (static_cast<Eigen::Index>(row_ids.size()) != scores.rows() ||
        static_cast<Eigen::Index>(column_ids.size()) != scores.cols()) {
        throw Error(ErrorCode::dimension_mismatch, "score matrix ids do not match its shape");
    }
    std::string out = "id";
    for (const auto& c : column_ids) {
        out += ',' + csv_field(c);
    }
    out += '\n';
    char buf[40];
    for (Eigen::Index r = 0; r < scores.rows(); ++r) {
        out += csv_field(row_ids[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < scores.cols(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.17g", scores(r, c));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace facesynth::matching
