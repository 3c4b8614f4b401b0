#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ripple {

// Strict UTF-8 decoding; throws ValidationError on malformed input.
std::u32string utf8_decode(std::string_view bytes);

std::string utf8_encode(char32_t c);
std::string utf8_encode(std::u32string_view text);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

// 64-bit FNV-1a, used for manifests and file checksums.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t v);

}  // namespace ripple
