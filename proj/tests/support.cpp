#include "support.hpp"

#include "facesynth/geometry/landmarks.hpp"
#include "facesynth/render/png_io.hpp"
#include "facesynth/synth/generic_head.hpp"
#include "facesynth/synth/synthetic_faces.hpp"
#include "facesynth/util/hash.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <random>
#include <unistd.h>

namespace facesynth::test {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag)
{
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("facesynth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

const geometry::Mesh& generic_head()
{
    static const geometry::Mesh mesh = synth::make_generic_head();
    return mesh;
}

const synth::ShapeSet& shape_set()
{
    static const synth::ShapeSet set = synth::make_shape_set();
    return set;
}

const synth::BlendshapeBasis& blendshapes()
{
    static const synth::BlendshapeBasis basis = synth::make_blendshape_basis(shape_set().at(0));
    return basis;
}

void write_face_dataset(const fs::path& root, int subjects, int per_subject, std::uint64_t seed, double max_yaw)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int s = 0; s < subjects; ++s) {
        char subject[16];
        std::snprintf(subject, sizeof subject, "s%02d", s);
        fs::create_directories(root / subject);
        const auto identity = synth::random_identity(util::mix64(seed + static_cast<std::uint64_t>(s)));
        const auto mesh = synth::make_generic_head(identity.shape);
        for (int k = 0; k < per_subject; ++k) {
            synth::SyntheticCamera cam;
            cam.yaw = max_yaw * u(rng);
            cam.pitch = 8.0 * u(rng);
            cam.roll = 6.0 * u(rng);
            auto face = synth::render_synthetic_face(mesh, generic_head(), identity.appearance, cam);
            char stem[16];
            std::snprintf(stem, sizeof stem, "img%02d", k);
            const fs::path base = root / subject / stem;
            render::write_png(base.string() + ".png", face.image);
            geometry::write_landmarks(base.string() + ".pts", face.landmarks);
        }
    }
}

std::vector<std::uint8_t> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot_tree(const fs::path& root)
{
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out.emplace_back(fs::relative(e.path(), root).generic_string(), read_bytes(e.path()));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace oracle {

std::vector<RocRow> roc(std::span<const double> genuine, std::span<const double> impostor)
{
    std::vector<double> ts(genuine.begin(), genuine.end());
    ts.insert(ts.end(), impostor.begin(), impostor.end());
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    ts.push_back(std::numeric_limits<double>::infinity());
    std::vector<RocRow> rows;
    for (double t : ts) {
        std::size_t a = 0;
        std::size_t f = 0;
        for (double g : genuine) {
            a += g >= t;
        }
        for (double i : impostor) {
            f += i >= t;
        }
        rows.push_back({t, double(f) / double(impostor.size()), double(a) / double(genuine.size())});
    }
    return rows;
}

double tar_at_far(std::span<const double> genuine, std::span<const double> impostor, double far)
{
    // Smallest threshold whose impostor acceptance rate is within the target.
    double best_t = std::numeric_limits<double>::infinity();
    std::vector<double> ts(genuine.begin(), genuine.end());
    ts.insert(ts.end(), impostor.begin(), impostor.end());
    for (double t : ts) {
        std::size_t f = 0;
        for (double i : impostor) {
            f += i >= t;
        }
        if (double(f) / double(impostor.size()) <= far) {
            best_t = std::min(best_t, t);
        }
    }
    std::size_t a = 0;
    for (double g : genuine) {
        a += g >= best_t;
    }
    return double(a) / double(genuine.size());
}

std::vector<int> cmc_ranks(const Eigen::MatrixXd& scores, std::span<const std::string> probes,
                           std::span<const std::string> gallery)
{
    std::vector<int> ranks;
    for (Eigen::Index p = 0; p < scores.rows(); ++p) {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(scores.cols()));
        std::iota(order.begin(), order.end(), 0);
        auto genuine = [&](Eigen::Index g) { return gallery[std::size_t(g)] == probes[std::size_t(p)]; };
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (scores(p, a) != scores(p, b)) {
                return scores(p, a) > scores(p, b);
            }
            return !genuine(a) && genuine(b);
        });
        const auto hit = std::find_if(order.begin(), order.end(), genuine);
        ranks.push_back(int(hit - order.begin()) + 1);
    }
    return ranks;
}

double eer(std::span<const double> genuine, std::span<const double> impostor)
{
    const auto rows = roc(genuine, impostor);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double frr = 1.0 - rows[k].tar;
        if (rows[k].far <= frr) {
            if (k == 0) {
                return 0.5 * (rows[k].far + frr);
            }
            if (rows[k].far == frr) {
                return rows[k].far;
            }
            // FAR - FRR changes sign between k-1 and k; intersect the two straight lines.
            const double d0 = rows[k - 1].far - (1.0 - rows[k - 1].tar);
            const double d1 = rows[k].far - frr;
            const double alpha = d0 / (d0 - d1);
            return rows[k - 1].far + alpha * (rows[k].far - rows[k - 1].far);
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

long double softmax(std::span<const double> scores, int beta)
{
    long double num = 0.0L;
    long double den = 0.0L;
    for (double s : scores) {
        const long double w = std::exp(static_cast<long double>(beta) * s);
        num += s * w;
        den += w;
    }
    return num / den;
}

long double fused(std::span<const double> scores, int beta_min, int beta_max)
{
    long double sum = 0.0L;
    for (int b = beta_min; b <= beta_max; ++b) {
        sum += softmax(scores, b);
    }
    return sum / (beta_max - beta_min + 1);
}

} // namespace oracle

} // namespace facesynth::test
