#include "y00/y00_modem.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "y00/counter_rng.hpp"
#include "y00/errors.hpp"

namespace y00::modem {

void Y00Config::validate() const {
    if (M < 2 || (M & (M - 1)) != 0) throw RangeError("M must be a power of two >= 2");
    if (!(alpha0 >= 0.0) || !std::isfinite(alpha0)) throw RangeError("alpha0 must be finite and >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw RangeError("eta must be in (0, 1]");
    if (!(het_sigma > 0.0) || !std::isfinite(het_sigma)) throw RangeError("het_sigma must be > 0");
    spec_s.validate();
    spec_dx.validate();
    mapping.validate();
    if (mapping.M != M) throw ShapeError("mapping table M differs from configured M");
}

int encode_level(int basis, int x, int dx, int M) {
    if (basis < 0 || basis >= M) throw RangeError("basis " + std::to_string(basis) + " outside [0, M)");
    return basis + M * ((basis + x + dx) & 1);
}

Complex level_to_amplitude(int m, const Y00Config& cfg, bool tapped) {
    const double g = tapped ? cfg.eta : 1.0;
    return std::polar(g * cfg.alpha0, std::numbers::pi * m / cfg.M);
}

SignalFrame encode_frame(const std::vector<int>& basis, const BitString& dx, const BitString& plaintext,
                         const Y00Config& cfg) {
    const std::size_t n = plaintext.size();
    if (basis.size() < n || dx.size() < n) throw LengthError("keystream shorter than plaintext");
    SignalFrame f;
    f.basis.assign(basis.begin(), basis.begin() + static_cast<std::ptrdiff_t>(n));
    f.dx.assign(dx.begin(), dx.begin() + static_cast<std::ptrdiff_t>(n));
    f.plaintext = plaintext;
    f.levels.resize(n);
    f.tx_amplitudes.resize(n);
    f.eve_amplitudes.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const int m = encode_level(f.basis[t], plaintext[t], f.dx[t], cfg.M);
        f.levels[t] = m;
        f.tx_amplitudes[t] = level_to_amplitude(m, cfg, false);
        f.eve_amplitudes[t] = level_to_amplitude(m, cfg, true);
    }
    return f;
}

SignalFrame transmit(const keystream::KeyPair& keys, const BitString& plaintext, const Y00Config& cfg) {
    cfg.validate();
    if (plaintext.empty()) throw LengthError("empty plaintext");
    const auto ks = keystream::keystreams(keys, cfg.spec_s, cfg.spec_dx, cfg.mapping, plaintext.size());
    return encode_frame(ks.basis_seq, ks.dx_seq, plaintext, cfg);
}

Complex heterodyne_sample(Complex amplitude, double sigma, std::uint64_t seed, std::uint64_t index) {
    const auto [g1, g2] = CounterStream(seed).normal_pair(index);
    return amplitude + Complex(sigma * g1, sigma * g2);
}

int bob_decode(Complex outcome, int basis, int dx, const Y00Config& cfg) {
    if (basis < 0 || basis >= cfg.M) throw RangeError("basis outside [0, M)");
    const Complex axis = std::polar(1.0, std::numbers::pi * basis / cfg.M);
    const double proj = (outcome * std::conj(axis)).real();
    const int coset = proj < 0.0 ? 1 : 0;
    return (coset + basis + dx) & 1;
}

int eve_level_id(Complex outcome, const Y00Config& cfg) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int m = 0; m < 2 * cfg.M; ++m) {
        const double d = std::norm(outcome - level_to_amplitude(m, cfg, true));
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

int masking_size(const Y00Config& cfg, double kappa) {
    if (!(kappa > 0.0)) throw RangeError("kappa must be > 0");
    const double radius = kappa * cfg.het_sigma;
    const Complex ref = level_to_amplitude(0, cfg, true);
    int count = 0;
    for (int m = 0; m < 2 * cfg.M; ++m)
        if (std::abs(level_to_amplitude(m, cfg, true) - ref) <= radius) ++count;
    return count;
}

std::uint64_t eve_noise_seed(std::uint64_t seed) { return mix64(seed ^ 0x45564531ULL); }

LinkRun run_link(const SignalFrame& frame, const Y00Config& cfg, std::uint64_t seed) {
    const std::size_t n = frame.size();
    const std::uint64_t eve_seed = eve_noise_seed(seed);
    LinkRun run;
    run.bob_outcomes.resize(n);
    run.eve_outcomes.resize(n);
    run.decoded.resize(n);
    run.eve_levels.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        run.bob_outcomes[t] = heterodyne_sample(frame.tx_amplitudes[t], cfg.het_sigma, seed, t);
        run.eve_outcomes[t] = heterodyne_sample(frame.eve_amplitudes[t], cfg.het_sigma, eve_seed, t);
        run.decoded[t] = static_cast<std::uint8_t>(bob_decode(run.bob_outcomes[t], frame.basis[t], frame.dx[t], cfg));
        run.eve_levels[t] = eve_level_id(run.eve_outcomes[t], cfg);
        if (run.decoded[t] != frame.plaintext[t]) ++run.bob_errors;
        if (run.eve_levels[t] != frame.levels[t]) ++run.eve_errors;
    }
    return run;
}

double bob_ber_theory(const Y00Config& cfg) {
    return 0.5 * std::erfc(cfg.alpha0 / (cfg.het_sigma * std::numbers::sqrt2));
}

}  // namespace y00::modem
