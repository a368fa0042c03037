#pragma once

#include <Eigen/Core>

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace facesynth::geometry {

/**
 * Landmark schemas. Only the 68-point iBUG layout is built in:
 *   0-16 jaw contour (image-left to image-right), 17-21 / 22-26 brows,
 *   27-30 nose bridge down to the tip, 31-35 nostril base,
 *   36-41 image-left eye, 42-47 image-right eye, 48-59 outer lip, 60-67 inner lip.
 */
namespace ibug68 {
inline constexpr std::string_view name = "ibug68";
inline constexpr int count = 68;

inline constexpr int nose_tip = 30;
inline constexpr std::array<int, 6> left_eye{36, 37, 38, 39, 40, 41};  // image-left, model -x side
inline constexpr std::array<int, 6> right_eye{42, 43, 44, 45, 46, 47}; // image-right, model +x side

/// Nine slots of the ideal frontal template: four eye corners, nose tip,
/// both nostril wings, both mouth corners.
inline constexpr std::array<int, 9> frontal9{36, 39, 42, 45, 30, 31, 35, 48, 54};

/// Outer and inner lip points used by expression fitting.
std::vector<int> mouth_slots();

/// Slots that do not move with mouth or jaw expressions: upper jaw contour,
/// brows, nose, and eyes.
std::vector<int> rigid_slots();
} // namespace ibug68

/// Number of slots for a named schema; throws invalid_input for unknown names.
int schema_size(std::string_view schema);

struct LandmarkSet2D
{
    std::string schema{ibug68::name};
    std::vector<Eigen::Vector2d> points;
    std::vector<bool> visible;

    /// Builds an all-visible set. Throws on count mismatch.
    static LandmarkSet2D all_visible(std::vector<Eigen::Vector2d> points, std::string schema = std::string(ibug68::name));

    std::size_t size() const noexcept { return points.size(); }
    int visible_count() const noexcept;

    /// Throws invalid_input when the point count does not match the schema,
    /// the flags are missing, or a coordinate is not finite.
    void validate() const;
};

/**
 * Landmark text file: a header line "schema=<name>" followed by one
 * "index u v visible" row per slot, whitespace separated. Blank lines and
 * lines starting with '#' are ignored. Slots missing from the file are
 * marked invisible.
 */
LandmarkSet2D read_landmarks(const std::string& path);
LandmarkSet2D parse_landmarks(std::string_view text);
void write_landmarks(const std::string& path, const LandmarkSet2D& landmarks);
std::string format_landmarks(const LandmarkSet2D& landmarks);

} // namespace facesynth::geometry
