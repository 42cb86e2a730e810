#include "y00/keystream.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "y00/errors.hpp"

namespace y00::keystream {

void LfsrSpec::validate() const {
    if (width < 1 || width > 64) throw RangeError("LFSR width must be in [1, 64], got " + std::to_string(width));
    if (taps.empty()) throw RangeError("LFSR needs at least one tap");
    for (int t : taps)
        if (t < 1 || t > width) throw RangeError("LFSR tap " + std::to_string(t) + " outside [1, width]");
    if (std::find(taps.begin(), taps.end(), width) == taps.end())
        throw RangeError("LFSR taps must include the width term (non-singular register)");
}

std::uint64_t LfsrSpec::state_mask() const {
    return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

namespace {

std::uint64_t feedback_mask(const LfsrSpec& spec) {
    std::uint64_t m = 0;
    for (int t : spec.taps) m ^= std::uint64_t{1} << (spec.width - t);
    return m;
}

inline std::uint64_t step(std::uint64_t state, std::uint64_t fb_mask, int width) {
    const std::uint64_t fb = static_cast<std::uint64_t>(std::popcount(state & fb_mask) & 1);
    return (state >> 1) | (fb << (width - 1));
}

bool is_power_of_two(int v) { return v >= 2 && (v & (v - 1)) == 0; }

}  // namespace

BitString expand_state(const LfsrSpec& spec, std::uint64_t state, std::size_t n_bits) {
    spec.validate();
    if ((state & ~spec.state_mask()) != 0) throw RangeError("LFSR state wider than the register");
    const std::uint64_t fb = feedback_mask(spec);
    BitString out(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i) {
        out[i] = static_cast<std::uint8_t>(state & 1u);
        state = step(state, fb, spec.width);
    }
    return out;
}

BitString expand(const LfsrSpec& spec, const BitString& key, std::size_t n_bits) {
    spec.validate();
    if (key.size() != static_cast<std::size_t>(spec.width))
        throw LengthError("key has " + std::to_string(key.size()) + " bits, register has " +
                          std::to_string(spec.width));
    const std::uint64_t state = bits_to_uint(key);
    if (state == 0) throw DegenerateKey("all-zero LFSR key");
    return expand_state(spec, state, n_bits);
}

std::uint64_t cycle_length(const LfsrSpec& spec, std::uint64_t state) {
    spec.validate();
    if (state == 0) return 1;
    if (spec.width > 24) return spec.state_mask();
    const std::uint64_t fb = feedback_mask(spec);
    std::uint64_t s = step(state, fb, spec.width);
    std::uint64_t n = 1;
    while (s != state) {
        s = step(s, fb, spec.width);
        ++n;
    }
    return n;
}

std::uint64_t checked_lcm(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    const unsigned __int128 l = static_cast<unsigned __int128>(a / std::gcd(a, b)) * b;
    if (l > std::numeric_limits<std::uint64_t>::max()) throw RangeError("period LCM exceeds 64 bits");
    return static_cast<std::uint64_t>(l);
}

MappingTable MappingTable::identity(int M) {
    MappingTable t;
    t.M = M;
    t.perm.resize(static_cast<std::size_t>(std::max(M, 0)));
    std::iota(t.perm.begin(), t.perm.end(), 0);
    t.validate();
    return t;
}

MappingTable MappingTable::seeded(int M, std::uint64_t seed) {
    MappingTable t = identity(M);
    t.seed = seed;
    // Fisher-Yates with an unbiased bounded draw; std::shuffle is not portable across libraries.
    std::mt19937_64 rng(seed);
    for (std::size_t i = t.perm.size(); i > 1; --i) {
        const std::uint64_t bound = i;
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do r = rng();
        while (r >= limit);
        std::swap(t.perm[i - 1], t.perm[static_cast<std::size_t>(r % bound)]);
    }
    return t;
}

MappingTable MappingTable::from_perm(std::vector<int> perm) {
    MappingTable t;
    t.M = static_cast<int>(perm.size());
    t.perm = std::move(perm);
    t.validate();
    return t;
}

void MappingTable::validate() const {
    if (!is_power_of_two(M)) throw RangeError("M must be a power of two >= 2, got " + std::to_string(M));
    if (perm.size() != static_cast<std::size_t>(M)) throw ShapeError("mapping table size differs from M");
    std::vector<bool> seen(perm.size(), false);
    for (int v : perm) {
        if (v < 0 || v >= M || seen[static_cast<std::size_t>(v)])
            throw RangeError("mapping table is not a permutation of 0..M-1");
        seen[static_cast<std::size_t>(v)] = true;
    }
}

int MappingTable::bits_per_slot() const { return std::countr_zero(static_cast<unsigned>(M)); }

std::vector<int> chop(const BitString& sbits, const MappingTable& mapping) {
    mapping.validate();
    const auto L = static_cast<std::size_t>(mapping.bits_per_slot());
    if (sbits.size() % L != 0)
        throw LengthError("keystream length " + std::to_string(sbits.size()) + " not divisible by log2(M)=" +
                          std::to_string(L));
    std::vector<int> out(sbits.size() / L);
    for (std::size_t t = 0; t < out.size(); ++t) {
        unsigned v = 0;
        for (std::size_t b = 0; b < L; ++b) v = (v << 1) | sbits[t * L + b];
        out[t] = mapping.perm[v];
    }
    return out;
}

KeystreamPair keystreams_from_states(std::uint64_t k_state, std::uint64_t dk_state, const LfsrSpec& spec_s,
                                     const LfsrSpec& spec_dx, const MappingTable& mapping, std::size_t n_slots) {
    if (n_slots < 1) throw RangeError("need at least one slot");
    mapping.validate();
    const auto L = static_cast<std::uint64_t>(mapping.bits_per_slot());

    KeystreamPair out;
    out.basis_seq = chop(expand_state(spec_s, k_state, n_slots * L), mapping);
    out.dx_seq = expand_state(spec_dx, dk_state, n_slots);

    const std::uint64_t bit_period_s = cycle_length(spec_s, k_state);
    out.slot_period_s = checked_lcm(bit_period_s, L) / L;
    out.slot_period_dx = cycle_length(spec_dx, dk_state);
    out.t_lcm = checked_lcm(out.slot_period_s, out.slot_period_dx);

    if (out.t_lcm <= n_slots / 2) {
        const auto window = static_cast<std::ptrdiff_t>(2 * out.t_lcm);
        const std::vector<int> bs(out.basis_seq.begin(), out.basis_seq.begin() + window);
        const BitString ds(out.dx_seq.begin(), out.dx_seq.begin() + window);
        out.slot_period_s = detect_period(bs);
        out.slot_period_dx = detect_period(ds);
        out.t_lcm = checked_lcm(out.slot_period_s, out.slot_period_dx);
    }
    return out;
}

KeystreamPair keystreams(const KeyPair& keys, const LfsrSpec& spec_s, const LfsrSpec& spec_dx,
                         const MappingTable& mapping, std::size_t n_slots) {
    spec_s.validate();
    spec_dx.validate();
    if (keys.k.size() != static_cast<std::size_t>(spec_s.width) ||
        keys.dk.size() != static_cast<std::size_t>(spec_dx.width))
        throw LengthError("key lengths do not match register widths");
    const std::uint64_t k = bits_to_uint(keys.k);
    const std::uint64_t dk = bits_to_uint(keys.dk);
    if (k == 0 || dk == 0) throw DegenerateKey("all-zero key in key pair");
    return keystreams_from_states(k, dk, spec_s, spec_dx, mapping, n_slots);
}

}  // namespace y00::keystream
