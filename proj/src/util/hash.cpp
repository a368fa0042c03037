#include "facesynth/util/hash.hpp"

#include "facesynth/error.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

namespace facesynth::util {

std::string to_hex(std::uint64_t value)
{
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

std::uint64_t hash_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io_error, "cannot open " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

} // namespace facesynth::util
