#pragma once

#include "facesynth/geometry/mesh.hpp"
#include "facesynth/synth/assets.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace facesynth::test {

// Removes itself on destruction.
class TempDir
{
public:
    explicit TempDir(const std::string& tag = "t");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

private:
    std::filesystem::path path_;
};

const geometry::Mesh& generic_head();
const synth::ShapeSet& shape_set();
const synth::BlendshapeBasis& blendshapes();

// subjects x per_subject failure-free faces as <root>/sNN/imgNN.png + .pts, yaw in [-max_yaw, max_yaw].
void write_face_dataset(const std::filesystem::path& root, int subjects, int per_subject, std::uint64_t seed,
                        double max_yaw = 60.0);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
// Relative path -> bytes of every regular file under root.
std::vector<std::pair<std::string, std::vector<std::uint8_t>>> snapshot_tree(const std::filesystem::path& root);

namespace oracle {

struct RocRow
{
    double threshold;
    double far;
    double tar;
};

// O(n^2) threshold enumeration over the union of scores plus +inf.
std::vector<RocRow> roc(std::span<const double> genuine, std::span<const double> impostor);
double tar_at_far(std::span<const double> genuine, std::span<const double> impostor, double far);
// Rank of the best genuine after a full descending sort where genuine entries lose ties.
std::vector<int> cmc_ranks(const Eigen::MatrixXd& scores, std::span<const std::string> probes,
                           std::span<const std::string> gallery);
double eer(std::span<const double> genuine, std::span<const double> impostor);
long double softmax(std::span<const double> scores, int beta);
long double fused(std::span<const double> scores, int beta_min = 0, int beta_max = 20);

} // namespace oracle

} // namespace facesynth::test
