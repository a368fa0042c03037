#include "facesynth/eval/protocol.hpp"

#include "facesynth/error.hpp"
#include "facesynth/util/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>

namespace facesynth::eval {

namespace fs = std::filesystem;

namespace {

using util::CsvRow;

std::string trim(std::string s)
{
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

/// Rows after the header, with the named columns extracted in order.
std::vector<CsvRow> columns(const std::string& path, const std::vector<std::string>& names)
{
    const auto rows = util::read_csv(path);
    if (rows.empty()) {
        throw Error(ErrorCode::protocol_error, path + " has no header");
    }
    std::vector<std::size_t> index;
    for (const auto& n : names) {
        const auto& header = rows.front();
        const auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return trim(h) == n; });
        if (it == header.end()) {
            throw Error(ErrorCode::protocol_error, path + " lacks column '" + n + "'");
        }
        index.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    std::vector<CsvRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        CsvRow row;
        for (std::size_t i : index) {
            if (i >= rows[r].size()) {
                throw Error(ErrorCode::protocol_error, path + " row " + std::to_string(r + 1) + " is too short");
            }
            row.push_back(trim(rows[r][i]));
        }
        out.push_back(std::move(row));
    }
    return out;
}

bool parse_label(const std::string& s, const std::string& path)
{
    std::string l = s;
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (l == "1" || l == "true" || l == "same") {
        return true;
    }
    if (l == "0" || l == "false" || l == "different" || l == "diff") {
        return false;
    }
    throw Error(ErrorCode::protocol_error, path + ": bad pair label '" + s + "'");
}

template <typename T>
T parse_number(const std::string& s, const std::string& what)
{
    T v{};
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw Error(ErrorCode::protocol_error, "bad " + what + " '" + s + "'");
    }
    return v;
}

std::vector<ProtocolTemplate> parse_templates(const std::string& path)
{
    std::vector<ProtocolTemplate> out;
    std::map<std::string, std::size_t> index;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : columns(path, {"template_id", "subject_id", "media_id", "media_type", "item_id"})) {
        if (r[0].empty() || r[1].empty() || r[2].empty() || r[4].empty()) {
            throw Error(ErrorCode::protocol_error, path + ": empty field in template '" + r[0] + "'");
        }
        MediaItem item;
        item.media_id = r[2];
        if (r[3] == "image") {
            item.type = features::MediaType::image;
        } else if (r[3] == "video") {
            item.type = features::MediaType::video;
        } else {
            throw Error(ErrorCode::protocol_error, path + ": unknown media type '" + r[3] + "'");
        }
        item.item_id = r[4];
        auto [it, fresh] = index.emplace(r[0], out.size());
        if (fresh) {
            out.push_back({r[0], r[1], {}});
        } else if (out[it->second].subject_id != r[1]) {
            throw Error(ErrorCode::protocol_error, "duplicate template id '" + r[0] + "' with conflicting subjects");
        }
        if (!seen.emplace(r[0], item.item_id).second) {
            throw Error(ErrorCode::protocol_error,
                        "template '" + r[0] + "' lists item '" + item.item_id + "' more than once");
        }
        out[it->second].items.push_back(std::move(item));
    }
    return out;
}

std::vector<VerificationPair> parse_pairs(const std::string& path)
{
    std::vector<VerificationPair> out;
    for (const auto& r : columns(path, {"template_a", "template_b", "label", "fold"})) {
        out.push_back({r[0], r[1], parse_label(r[2], path), parse_number<int>(r[3], "fold")});
    }
    return out;
}

std::vector<std::string> single_column(const std::string& path, const std::string& name)
{
    std::vector<std::string> out;
    for (const auto& r : columns(path, {name})) {
        out.push_back(r[0]);
    }
    return out;
}

void check(const Protocol& p)
{
    std::set<std::string> ids;
    for (const auto& t : p.templates) {
        ids.insert(t.template_id);
    }
    auto require = [&](const std::string& id) {
        if (!ids.count(id)) {
            throw Error(ErrorCode::protocol_error, "unknown template id '" + id + "'");
        }
    };
    bool genuine = false;
    bool impostor = false;
    for (const auto& pair : p.pairs) {
        require(pair.template_a);
        require(pair.template_b);
        (pair.same_subject ? genuine : impostor) = true;
    }
    if (!p.pairs.empty() && !(genuine && impostor)) {
        throw Error(ErrorCode::protocol_error, "verification pairs need at least one genuine and one impostor pair");
    }
    for (const auto& id : p.gallery) {
        require(id);
    }
    for (const auto& id : p.probes) {
        require(id);
    }
    if (p.gallery.empty() != p.probes.empty()) {
        throw Error(ErrorCode::protocol_error, "gallery and probes must be given together");
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw Error(ErrorCode::io_error, "cannot write " + path.string());
    }
}

} // namespace

const ProtocolTemplate& Protocol::find(const std::string& template_id) const
{
    for (const auto& t : templates) {
        if (t.template_id == template_id) {
            return t;
        }
    }
    throw Error(ErrorCode::protocol_error, "unknown template id '" + template_id + "'");
}

Protocol load_protocol(const std::string& templates_csv, const std::string& pairs_csv)
{
    Protocol p;
    p.templates = parse_templates(templates_csv);
    p.pairs = parse_pairs(pairs_csv);
    check(p);
    return p;
}

ProtocolTemplate load_template_file(const std::string& path)
{
    auto templates = parse_templates(path);
    if (templates.empty()) {
        throw Error(ErrorCode::protocol_error, path + ": no template");
    }
    return std::move(templates.front());
}

Protocol load_protocol_dir(const fs::path& directory)
{
    Protocol p;
    p.templates = parse_templates((directory / "templates.csv").string());
    if (fs::exists(directory / "pairs.csv")) {
        p.pairs = parse_pairs((directory / "pairs.csv").string());
    }
    if (fs::exists(directory / "gallery.csv")) {
        p.gallery = single_column((directory / "gallery.csv").string(), "template_id");
    }
    if (fs::exists(directory / "probes.csv")) {
        p.probes = single_column((directory / "probes.csv").string(), "template_id");
    }
    if (fs::exists(directory / "train.csv")) {
        p.train_items = single_column((directory / "train.csv").string(), "item_id");
    }
    if (fs::exists(directory / "yaws.csv")) {
        for (const auto& r : columns((directory / "yaws.csv").string(), {"item_id", "yaw"})) {
            p.yaws[r[0]] = parse_number<double>(r[1], "yaw");
        }
    }
    if (p.pairs.empty() && p.gallery.empty()) {
        throw Error(ErrorCode::protocol_error, "protocol " + directory.string() + " has neither pairs nor a gallery");
    }
    check(p);
    return p;
}

void write_protocol_dir(const fs::path& directory, const Protocol& p)
{
    fs::create_directories(directory);
    std::string t = "template_id,subject_id,media_id,media_type,item_id\n";
    for (const auto& tpl : p.templates) {
        for (const auto& item : tpl.items) {
            t += util::format_csv_row({tpl.template_id, tpl.subject_id, item.media_id, features::to_string(item.type),
                                       item.item_id}) +
                 '\n';
        }
    }
    write_text(directory / "templates.csv", t);
    if (!p.pairs.empty()) {
        std::string s = "template_a,template_b,label,fold\n";
        for (const auto& pair : p.pairs) {
            s += util::format_csv_row({pair.template_a, pair.template_b, pair.same_subject ? "1" : "0",
                                       std::to_string(pair.fold)}) +
                 '\n';
        }
        write_text(directory / "pairs.csv", s);
    }
    auto list = [&](const char* file, const char* header, const std::vector<std::string>& ids) {
        if (ids.empty()) {
            return;
        }
        std::string s = std::string(header) + '\n';
        for (const auto& id : ids) {
            s += util::format_csv_row({id}) + '\n';
        }
        write_text(directory / file, s);
    };
    list("gallery.csv", "template_id", p.gallery);
    list("probes.csv", "template_id", p.probes);
    list("train.csv", "item_id", p.train_items);
    if (!p.yaws.empty()) {
        std::string s = "item_id,yaw\n";
        char buf[40];
        for (const auto& [id, yaw] : p.yaws) {
            std::snprintf(buf, sizeof buf, "%.17g", yaw);
            s += util::format_csv_row({id, buf}) + '\n';
        }
        write_text(directory / "yaws.csv", s);
    }
}

} // namespace facesynth::eval
