#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "y00/bits.hpp"

namespace y00::keystream {

/// Fibonacci LFSR. Tap t stands for the x^t term of the feedback polynomial
/// 1 + sum x^t, so {4, 3} is x^4 + x^3 + 1. The width tap must be present.
struct LfsrSpec {
    int width = 0;
    std::vector<int> taps;

    void validate() const;
    std::uint64_t state_mask() const;
};

/// Shared secrets (k, dk): initial states of the basis PRNG and the OSK PRNG.
struct KeyPair {
    BitString k;
    BitString dk;
};

/// Fixed keyed projection from log2(M)-bit chunks to basis indices.
struct MappingTable {
    int M = 2;
    std::vector<int> perm;
    std::optional<std::uint64_t> seed;  // nullopt: identity or explicit table

    static MappingTable identity(int M);
    static MappingTable seeded(int M, std::uint64_t seed);
    static MappingTable from_perm(std::vector<int> perm);

    void validate() const;
    int bits_per_slot() const;
};

struct KeystreamPair {
    std::vector<int> basis_seq;
    BitString dx_seq;
    std::uint64_t slot_period_s = 0;
    std::uint64_t slot_period_dx = 0;
    std::uint64_t t_lcm = 0;
};

/// Output bits of the register started from `key` (MSB-first bit string of
/// spec.width bits). Throws DegenerateKey for the all-zero state.
BitString expand(const LfsrSpec& spec, const BitString& key, std::size_t n_bits);

/// Same register, addressed by integer state. Zero is allowed here and yields
/// the constant zero stream; hypothesis enumeration relies on that.
BitString expand_state(const LfsrSpec& spec, std::uint64_t state, std::size_t n_bits);

/// Cycle length of the register from `state`. Stepped exactly for width <= 24,
/// otherwise assumes a primitive polynomial (2^width - 1).
std::uint64_t cycle_length(const LfsrSpec& spec, std::uint64_t state);

std::vector<int> chop(const BitString& sbits, const MappingTable& mapping);

KeystreamPair keystreams(const KeyPair& keys, const LfsrSpec& spec_s, const LfsrSpec& spec_dx,
                         const MappingTable& mapping, std::size_t n_slots);

/// Keystreams addressed by integer states (zero allowed, see expand_state).
KeystreamPair keystreams_from_states(std::uint64_t k_state, std::uint64_t dk_state,
                                     const LfsrSpec& spec_s, const LfsrSpec& spec_dx,
                                     const MappingTable& mapping, std::size_t n_slots);

/// Smallest P in [1, n/2] with seq[t] == seq[t + P] for all valid t; 0 if none.
template <typename T>
std::size_t detect_period(const std::vector<T>& seq) {
    const std::size_t n = seq.size();
    for (std::size_t p = 1; 2 * p <= n; ++p) {
        bool ok = true;
        for (std::size_t t = 0; t + p < n && ok; ++t) ok = seq[t] == seq[t + p];
        if (ok) return p;
    }
    return 0;
}

std::uint64_t checked_lcm(std::uint64_t a, std::uint64_t b);

}  // namespace y00::keystream
