#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace y00 {

/// One bit per element, each 0 or 1. Text form is written most-significant first.
using BitString = std::vector<std::uint8_t>;

BitString bits_from_string(std::string_view text);
std::string bits_to_string(const BitString& bits);

/// Interprets `bits` as an unsigned integer, first element most significant.
std::uint64_t bits_to_uint(const BitString& bits);
BitString bits_from_uint(std::uint64_t value, int width);

/// Elementwise XOR; throws LengthError on size mismatch.
BitString bits_xor(const BitString& a, const BitString& b);

}  // namespace y00
