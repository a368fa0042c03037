#include "facesynth/geometry/landmarks.hpp"

#include "facesynth/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace facesynth::geometry {

namespace ibug68 {
std::vector<int> mouth_slots()
{
    std::vector<int> slots;
    for (int i = 48; i < 68; ++i) {
        slots.push_back(i);
    }
    return slots;
}

std::vector<int> rigid_slots()
{
    std::vector<int> slots{0, 1, 2, 3, 13, 14, 15, 16};
    for (int i = 17; i < 48; ++i) {
        slots.push_back(i);
    }
    return slots;
}
} // namespace ibug68

int schema_size(std::string_view schema)
{
    if (schema == ibug68::name) {
        return ibug68::count;
    }
    throw Error(ErrorCode::invalid_input, "unknown landmark schema '" + std::string(schema) + "'");
}

LandmarkSet2D LandmarkSet2D::all_visible(std::vector<Eigen::Vector2d> points, std::string schema)
{
    LandmarkSet2D set;
    set.schema = std::move(schema);
    set.visible.assign(points.size(), true);
    set.points = std::move(points);
    set.validate();
    return set;
}

int LandmarkSet2D::visible_count() const noexcept
{
    int n = 0;
    for (bool v : visible) {
        n += v ? 1 : 0;
    }
    return n;
}

void LandmarkSet2D::validate() const
{
    const auto expected = static_cast<std::size_t>(schema_size(schema));
    if (points.size() != expected || visible.size() != expected) {
        throw Error(ErrorCode::invalid_input, "schema " + schema + " expects " + std::to_string(expected) +
                                                  " landmarks, got " + std::to_string(points.size()));
    }
    for (const auto& p : points) {
        if (!std::isfinite(p.x()) || !std::isfinite(p.y())) {
            throw Error(ErrorCode::invalid_input, "non-finite landmark coordinate");
        }
    }
}

LandmarkSet2D parse_landmarks(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    LandmarkSet2D set;
    bool have_header = false;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        if (!have_header) {
            const std::string header = line.substr(first);
            if (header.rfind("schema=", 0) != 0) {
                throw Error(ErrorCode::invalid_input, "landmark file must start with 'schema=<name>'");
            }
            set.schema = header.substr(7);
            while (!set.schema.empty() && (set.schema.back() == ' ' || set.schema.back() == '\t')) {
                set.schema.pop_back();
            }
            const int n = schema_size(set.schema);
            set.points.assign(n, Eigen::Vector2d::Zero());
            set.visible.assign(n, false);
            have_header = true;
            continue;
        }
        std::istringstream row(line);
        int index = -1;
        double u = 0.0;
        double v = 0.0;
        int visible = 0;
        if (!(row >> index >> u >> v >> visible)) {
            throw Error(ErrorCode::invalid_input, "malformed landmark row at line " + std::to_string(line_number));
        }
        if (index < 0 || index >= static_cast<int>(set.points.size())) {
            throw Error(ErrorCode::invalid_input, "landmark index out of range at line " + std::to_string(line_number));
        }
        set.points[index] = {u, v};
        set.visible[index] = visible != 0;
    }
    if (!have_header) {
        throw Error(ErrorCode::invalid_input, "empty landmark file");
    }
    set.validate();
    return set;
}

LandmarkSet2D read_landmarks(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open landmark file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_landmarks(buffer.str());
}

std::string format_landmarks(const LandmarkSet2D& landmarks)
{
    std::string out = "schema=" + landmarks.schema + "\n";
    char row[96];
    for (std::size_t i = 0; i < landmarks.points.size(); ++i) {
        std::snprintf(row, sizeof row, "%zu %.6f %.6f %d\n", i, landmarks.points[i].x(), landmarks.points[i].y(),
                      landmarks.visible[i] ? 1 : 0);
        out += row;
    }
    return out;
}

void write_landmarks(const std::string& path, const LandmarkSet2D& landmarks)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorCode::io_error, "cannot write landmark file " + path);
    }
    out << format_landmarks(landmarks);
}

} // namespace facesynth::geometry
