#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "y00/bits.hpp"
#include "y00/keystream.hpp"

namespace y00::modem {

using Complex = std::complex<double>;

struct Y00Config {
    int M = 16;
    double alpha0 = 3.0;     // transmitter amplitude
    double eta = 1.0;        // Eve's tap amplitude ratio
    double het_sigma = 1.0;  // per-quadrature heterodyne noise std
    keystream::LfsrSpec spec_s;
    keystream::LfsrSpec spec_dx;
    keystream::MappingTable mapping;

    void validate() const;
};

struct SignalFrame {
    std::vector<int> basis;
    BitString dx;
    BitString plaintext;
    std::vector<int> levels;
    std::vector<Complex> tx_amplitudes;
    std::vector<Complex> eve_amplitudes;

    std::size_t size() const { return levels.size(); }
};

/// m = basis + M * ((basis + x + dx) mod 2).
int encode_level(int basis, int x, int dx, int M);

/// g * alpha0 * exp(i pi m / M) with g = eta on the tapped branch, else 1.
Complex level_to_amplitude(int m, const Y00Config& cfg, bool tapped);

SignalFrame transmit(const keystream::KeyPair& keys, const BitString& plaintext, const Y00Config& cfg);

/// Frame for keystreams given directly (used by hypothesis enumeration).
SignalFrame encode_frame(const std::vector<int>& basis, const BitString& dx, const BitString& plaintext,
                         const Y00Config& cfg);

/// amplitude + circular Gaussian noise, per-quadrature std sigma, keyed by (seed, index).
Complex heterodyne_sample(Complex amplitude, double sigma, std::uint64_t seed, std::uint64_t index);

/// Bob's keyed antipodal decision. An outcome on the threshold counts as coset 0.
int bob_decode(Complex outcome, int basis, int dx, const Y00Config& cfg);

/// Eve's nearest-level decision over all 2M tapped constellation points; ties
/// resolve to the smallest level.
int eve_level_id(Complex outcome, const Y00Config& cfg);

/// Levels within kappa * het_sigma of a reference point at Eve's amplitude,
/// the reference itself included.
int masking_size(const Y00Config& cfg, double kappa = 1.0);

/// Noisy run of a frame: Bob and Eve each heterodyne their branch.
struct LinkRun {
    std::vector<Complex> bob_outcomes;
    std::vector<Complex> eve_outcomes;
    BitString decoded;
    std::vector<int> eve_levels;
    std::size_t bob_errors = 0;
    std::size_t eve_errors = 0;
};

/// Bob draws noise keyed by `seed`, Eve by eve_noise_seed(seed); both indexed by slot.
LinkRun run_link(const SignalFrame& frame, const Y00Config& cfg, std::uint64_t seed);

/// Q(alpha0 / sigma): Bob's analytic bit error rate.
double bob_ber_theory(const Y00Config& cfg);

std::uint64_t eve_noise_seed(std::uint64_t seed);

}  // namespace y00::modem
