#include "y00/classical_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "y00/errors.hpp"

namespace y00::classical {

namespace {

constexpr double kPriorTolerance = 1e-12;

void check_prior(const std::vector<std::pair<BitString, double>>& space, const char* what) {
    if (space.empty()) throw ShapeError(std::string(what) + " space is empty");
    double total = 0.0;
    const std::size_t len = space.front().first.size();
    for (const auto& [bits, p] : space) {
        if (!(p >= 0.0)) throw RangeError(std::string(what) + " prior has a negative entry");
        if (bits.size() != len) throw LengthError(std::string(what) + " strings differ in length");
        total += p;
    }
    if (std::abs(total - 1.0) > kPriorTolerance) throw RangeError(std::string(what) + " prior does not sum to 1");
}

void check_size(const ToyCipherSystem& sys) {
    if (sys.plaintext_space.size() * sys.key_space.size() > kMaxEnumeratedPairs)
        throw TooLarge("toy cipher exceeds 2^16 (plaintext, key) pairs");
}

std::vector<std::pair<BitString, double>> all_strings(int width, const std::vector<double>& priors) {
    const std::size_t n = std::size_t{1} << width;
    if (priors.size() != n) throw ShapeError("need one prior per " + std::to_string(width) + "-bit string");
    std::vector<std::pair<BitString, double>> out;
    out.reserve(n);
    for (std::size_t v = 0; v < n; ++v) out.emplace_back(bits_from_uint(v, width), priors[v]);
    return out;
}

}  // namespace

void ToyCipherSystem::validate() const {
    check_prior(plaintext_space, "plaintext");
    check_prior(key_space, "key");
    if (!encrypt) throw ShapeError("toy cipher has no encryption map");
    check_size(*this);
    std::size_t c_len = 0;
    bool first = true;
    for (const auto& [x, px] : plaintext_space) {
        for (const auto& [k, pk] : key_space) {
            const std::size_t len = encrypt(x, k).size();
            if (first) c_len = len;
            else if (len != c_len) throw LengthError("ciphertexts differ in length");
            first = false;
        }
    }
}

ToyCipherSystem ToyCipherSystem::one_time_pad(int width, std::vector<double> plaintext_priors) {
    if (width < 1 || width > 8) throw RangeError("one-time-pad demo width must be in [1, 8]");
    ToyCipherSystem sys;
    sys.plaintext_space = all_strings(width, plaintext_priors);
    const std::size_t n = std::size_t{1} << width;
    sys.key_space = all_strings(width, std::vector<double>(n, 1.0 / static_cast<double>(n)));
    sys.encrypt = otp_encrypt;
    return sys;
}

ToyCipherSystem ToyCipherSystem::constant_key(int width, std::vector<double> plaintext_priors) {
    if (width < 1 || width > 8) throw RangeError("constant-key demo width must be in [1, 8]");
    ToyCipherSystem sys;
    sys.plaintext_space = all_strings(width, plaintext_priors);
    sys.key_space = {{BitString(static_cast<std::size_t>(width), 0), 1.0}};
    sys.encrypt = otp_encrypt;
    return sys;
}

BitString otp_encrypt(const BitString& x, const BitString& k) { return bits_xor(x, k); }

std::map<BitString, double> posterior_distribution(const ToyCipherSystem& sys, const BitString& c) {
    sys.validate();
    std::map<BitString, double> joint;
    double pc = 0.0;
    for (const auto& [x, px] : sys.plaintext_space) {
        double acc = 0.0;
        for (const auto& [k, pk] : sys.key_space)
            if (sys.encrypt(x, k) == c) acc += px * pk;
        joint[x] += acc;
        pc += acc;
    }
    if (!(pc > 0.0)) throw UnreachableCiphertext("ciphertext " + bits_to_string(c) + " has zero probability");
    for (auto& [x, p] : joint) p /= pc;
    return joint;
}

GuessingSecrecy guessing_secrecy(const ToyCipherSystem& sys) {
    sys.validate();
    const std::size_t nx = sys.plaintext_space.size();
    // ciphertext -> joint probability Pr(x, c) per plaintext index
    std::map<BitString, std::vector<double>> joint;
    for (std::size_t i = 0; i < nx; ++i) {
        const auto& [x, px] = sys.plaintext_space[i];
        for (const auto& [k, pk] : sys.key_space) {
            auto& row = joint[sys.encrypt(x, k)];
            if (row.empty()) row.assign(nx, 0.0);
            row[i] += px * pk;
        }
    }

    GuessingSecrecy out;
    for (const auto& [c, row] : joint) {
        double pc = 0.0;
        for (double v : row) pc += v;
        if (!(pc > 0.0)) continue;
        const double best = *std::max_element(row.begin(), row.end());
        out.average += best;
        out.worst_case = std::max(out.worst_case, best / pc);
    }
    for (const auto& [x, px] : sys.plaintext_space) out.prior_max = std::max(out.prior_max, px);
    return out;
}

BitString stream_kpa_recover(const keystream::LfsrSpec& spec, const BitString& c, const BitString& x) {
    spec.validate();
    if (c.size() != x.size()) throw LengthError("ciphertext and plaintext lengths differ");
    if (spec.width > 24) throw TooLarge("exhaustive key table limited to 24-bit registers");

    const BitString s = bits_xor(c, x);
    std::vector<BitString> hits;
    for (std::uint64_t state = 1; state <= spec.state_mask(); ++state) {
        if (keystream::expand_state(spec, state, s.size()) == s) hits.push_back(bits_from_uint(state, spec.width));
    }
    if (hits.empty()) throw InconsistentObservation("no key reproduces the observed keystream");
    if (hits.size() > 1)
        throw AmbiguousKey(std::to_string(hits.size()) + " keys reproduce the observed keystream", std::move(hits));
    return hits.front();
}

}  // namespace y00::classical
