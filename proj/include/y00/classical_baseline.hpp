#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "y00/bits.hpp"
#include "y00/keystream.hpp"

namespace y00::classical {

/// Enumerable toy cipher: finite plaintext and key spaces with priors and a
/// deterministic encryption map.
struct ToyCipherSystem {
    std::vector<std::pair<BitString, double>> plaintext_space;
    std::vector<std::pair<BitString, double>> key_space;
    std::function<BitString(const BitString&, const BitString&)> encrypt;

    void validate() const;

    /// All width-bit strings, uniform key prior, encrypt = XOR.
    static ToyCipherSystem one_time_pad(int width, std::vector<double> plaintext_priors);
    /// Single all-zero key: ciphertext equals plaintext.
    static ToyCipherSystem constant_key(int width, std::vector<double> plaintext_priors);
};

struct GuessingSecrecy {
    double average = 0.0;
    double worst_case = 0.0;
    double prior_max = 0.0;
};

inline constexpr std::size_t kMaxEnumeratedPairs = std::size_t{1} << 16;

BitString otp_encrypt(const BitString& x, const BitString& k);

std::map<BitString, double> posterior_distribution(const ToyCipherSystem& sys, const BitString& c);

GuessingSecrecy guessing_secrecy(const ToyCipherSystem& sys);

/// Known-plaintext key recovery against a plain LFSR stream cipher by
/// exhaustive key table. Throws InconsistentObservation when no key fits and
/// AmbiguousKey (carrying every fit) when the window is too short.
BitString stream_kpa_recover(const keystream::LfsrSpec& spec, const BitString& c, const BitString& x);

}  // namespace y00::classical
