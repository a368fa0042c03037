#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace facesynth::util {

/// 64-bit FNV-1a. Stable across platforms and compilers, unlike std::hash.
constexpr std::uint64_t fnv1a64(std::span<const unsigned char> bytes,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept
{
    std::uint64_t h = seed;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view text, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept
{
    return fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(text.data()), text.size()),
                   seed);
}

/// splitmix64 finaliser; good avalanche for seeding and hashing integers.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value);

/// FNV-1a of a whole file's bytes. Throws io_error if unreadable.
std::uint64_t hash_file(const std::string& path);

} // namespace facesynth::util
