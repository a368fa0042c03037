#include "facesynth/features/conditioning.hpp"

#include "facesynth/error.hpp"
#include "facesynth/util/hash.hpp"

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace facesynth::features {

namespace {

void write_doubles(std::ostream& out, const double* p, std::size_t n)
{
    out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* p, std::size_t n, const std::string& path)
{
    if (!in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)))) {
        throw Error(ErrorCode::invalid_input, "truncated PCA file " + path);
    }
}

} // namespace

const char* to_string(MediaType t) noexcept
{
    return t == MediaType::video ? "video" : "image";
}

std::vector<TaggedFeature> video_pool(std::span<const TaggedFeature> items, std::vector<std::string>* warnings)
{
    std::vector<TaggedFeature> out;
    std::map<std::string, std::size_t> slot; // video media id -> output index
    std::map<std::string, int> frames;
    for (const auto& item : items) {
        if (item.feature.values.empty()) {
            if (warnings) {
                warnings->push_back("empty feature '" + item.feature.source_id + "' in media '" + item.media_id +
                                    "' skipped");
            }
            continue;
        }
        if (item.type == MediaType::image) {
            out.push_back(item);
            continue;
        }
        const auto it = slot.find(item.media_id);
        if (it == slot.end()) {
            slot.emplace(item.media_id, out.size());
            frames[item.media_id] = 1;
            TaggedFeature pooled = item;
            pooled.feature.source_id = item.media_id;
            out.push_back(std::move(pooled));
            continue;
        }
        auto& acc = out[it->second].feature;
        if (acc.values.size() != item.feature.values.size()) {
            throw Error(ErrorCode::dimension_mismatch, "frames of video '" + item.media_id + "' differ in length");
        }
        for (std::size_t d = 0; d < acc.values.size(); ++d) {
            acc.values[d] += item.feature.values[d];
        }
        acc.degenerate = acc.degenerate || item.feature.degenerate;
        ++frames[item.media_id];
    }
    for (const auto& [id, index] : slot) {
        const double n = frames[id];
        if (n > 1) {
            for (double& v : out[index].feature.values) {
                v /= n;
            }
        }
    }
    return out;
}

PCAModel pca_fit(std::span<const FeatureVector> samples)
{
    if (samples.size() < 2) {
        throw Error(ErrorCode::empty_input, "PCA needs at least two samples");
    }
    const std::size_t d = samples.front().values.size();
    if (d == 0) {
        throw Error(ErrorCode::empty_input, "PCA samples are empty");
    }
    const auto n = static_cast<Eigen::Index>(samples.size());
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = samples[static_cast<std::size_t>(i)].values;
        if (v.size() != d) {
            throw Error(ErrorCode::dimension_mismatch, "PCA samples differ in dimension");
        }
        x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(d));
    }
    bool identical = true;
    for (Eigen::Index i = 1; i < n && identical; ++i) {
        identical = x.row(i) == x.row(0);
    }
    if (identical) {
        throw Error(ErrorCode::zero_variance, "all PCA training samples are identical");
    }

    PCAModel model;
    model.mean = x.colwise().mean().transpose();
    x.rowwise() -= model.mean.transpose();
    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw Error(ErrorCode::zero_variance, "PCA eigen-decomposition failed");
    }
    const auto dd = static_cast<Eigen::Index>(d);
    model.components.resize(dd, dd);
    model.variances.resize(dd);
    for (Eigen::Index k = 0; k < dd; ++k) {
        // Eigen returns ascending eigenvalues.
        Eigen::VectorXd c = eig.eigenvectors().col(dd - 1 - k);
        Eigen::Index arg = 0;
        c.cwiseAbs().maxCoeff(&arg);
        if (c[arg] < 0.0) {
            c = -c;
        }
        model.components.col(k) = c;
        model.variances[k] = std::max(0.0, eig.eigenvalues()[dd - 1 - k]);
    }
    return model;
}

FeatureVector pca_apply(const PCAModel& model, const FeatureVector& x)
{
    if (static_cast<Eigen::Index>(x.values.size()) != model.mean.size()) {
        throw Error(ErrorCode::dimension_mismatch, "feature of dimension " + std::to_string(x.values.size()) +
                                                       " does not match PCA dimension " +
                                                       std::to_string(model.mean.size()));
    }
    const Eigen::Map<const Eigen::VectorXd> v(x.values.data(), model.mean.size());
    const Eigen::VectorXd p = model.components.transpose() * (v - model.mean);
    FeatureVector out;
    out.source_id = x.source_id;
    out.degenerate = x.degenerate;
    out.values.assign(p.data(), p.data() + p.size());
    return out;
}

FeatureVector root_normalize(const FeatureVector& x, double c)
{
    if (!(c > 0.0 && c <= 1.0)) {
        throw Error(ErrorCode::invalid_input, "root exponent must lie in (0, 1]");
    }
    FeatureVector out = x;
    for (double& v : out.values) {
        v = std::copysign(std::pow(std::abs(v), c), v);
    }
    return out;
}

FeatureVector condition(const PCAModel& model, const FeatureVector& x, double c)
{
    return root_normalize(pca_apply(model, x), c);
}

PCAModel read_pca(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    char magic[4];
    std::uint32_t d = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, "PCA1", 4) != 0 ||
        !in.read(reinterpret_cast<char*>(&d), sizeof d)) {
        throw Error(ErrorCode::invalid_input, path + " is not a PCA1 file");
    }
    PCAModel m;
    const auto n = static_cast<Eigen::Index>(d);
    m.mean.resize(n);
    m.variances.resize(n);
    read_doubles(in, m.mean.data(), d, path);
    read_doubles(in, m.variances.data(), d, path);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c(n, n);
    read_doubles(in, c.data(), static_cast<std::size_t>(d) * d, path);
    m.components = c;
    return m;
}

namespace {

void serialize_pca(std::ostream& out, const PCAModel& model)
{
    const auto d = static_cast<std::uint32_t>(model.mean.size());
    out.write("PCA1", 4);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    write_doubles(out, model.mean.data(), d);
    write_doubles(out, model.variances.data(), d);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = model.components;
    write_doubles(out, c.data(), static_cast<std::size_t>(d) * d);
}

} // namespace

std::uint64_t pca_hash(const PCAModel& model)
{
    std::ostringstream ss;
    serialize_pca(ss, model);
    return util::fnv1a64(std::string_view(ss.str()));
}

void write_pca(const std::string& path, const PCAModel& model)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write " + path);
    }
    serialize_pca(out, model);
    if (!out) {
        throw Error(ErrorCode::io_error, "failed writing " + path);
    }
}

} // namespace facesynth::features
