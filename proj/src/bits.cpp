#include "y00/bits.hpp"

#include "y00/errors.hpp"

namespace y00 {

BitString bits_from_string(std::string_view text) {
    BitString out;
    out.reserve(text.size());
    for (char ch : text) {
        if (ch == '0' || ch == '1') {
            out.push_back(static_cast<std::uint8_t>(ch - '0'));
        } else if (ch != ' ' && ch != '_') {
            throw RangeError("bit string contains '" + std::string(1, ch) + "'");
        }
    }
    return out;
}

std::string bits_to_string(const BitString& bits) {
    std::string out;
    out.reserve(bits.size());
    for (auto b : bits) out.push_back(b ? '1' : '0');
    return out;
}

std::uint64_t bits_to_uint(const BitString& bits) {
    if (bits.size() > 64) throw LengthError("bit string longer than 64 bits");
    std::uint64_t v = 0;
    for (auto b : bits) v = (v << 1) | (b & 1u);
    return v;
}

BitString bits_from_uint(std::uint64_t value, int width) {
    if (width < 0 || width > 64) throw RangeError("width must be in [0, 64]");
    BitString out(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) out[static_cast<std::size_t>(width - 1 - i)] = (value >> i) & 1u;
    return out;
}

BitString bits_xor(const BitString& a, const BitString& b) {
    if (a.size() != b.size()) throw LengthError("XOR of bit strings with different lengths");
    BitString out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] ^ b[i]) & 1u;
    return out;
}

}  // namespace y00
