#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "y00/errors.hpp"
#include "y00/y00_modem.hpp"

using namespace y00;
using namespace y00::modem;

namespace {

Y00Config make_cfg(int M, double alpha0, double eta = 1.0, double sigma = 1.0) {
    Y00Config cfg;
    cfg.M = M;
    cfg.alpha0 = alpha0;
    cfg.eta = eta;
    cfg.het_sigma = sigma;
    cfg.spec_s = {7, {7, 6}};
    cfg.spec_dx = {5, {5, 3}};
    cfg.mapping = keystream::MappingTable::identity(M);
    return cfg;
}

const keystream::KeyPair kKeys{bits_from_string("1011001"), bits_from_string("10011")};

BitString random_bits(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    BitString b(n);
    for (auto& v : b) v = rng() & 1u;
    return b;
}

}  // namespace

TEST_CASE("encode_level examples") {
    CHECK(encode_level(2, 1, 0, 16) == 18);
    CHECK(encode_level(3, 1, 0, 16) == 3);
    for (int M : {2, 4, 64}) CHECK(encode_level(0, 0, 0, M) == 0);
    CHECK_THROWS_AS(encode_level(16, 0, 0, 16), RangeError);
    CHECK_THROWS_AS(encode_level(-1, 0, 0, 16), RangeError);
}

TEST_CASE("property: coset identity holds for every basis, bit and dx") {
    for (int M : {2, 4, 16, 64}) {
        for (int b = 0; b < M; ++b) {
            for (int x = 0; x < 2; ++x) {
                for (int dx = 0; dx < 2; ++dx) {
                    const int m = encode_level(b, x, dx, M);
                    CHECK(m >= 0);
                    CHECK(m < 2 * M);
                    CHECK(m % M == b);
                    CHECK(m / M == (b + x + dx) % 2);
                }
            }
        }
    }
}

TEST_CASE("level_to_amplitude examples") {
    auto cfg = make_cfg(16, 3.0);
    CHECK(level_to_amplitude(0, cfg, false) == Complex(3.0, 0.0));
    const Complex anti = level_to_amplitude(16, cfg, false);
    CHECK(std::abs(anti - Complex(-3.0, 0.0)) < 1e-15);
    auto c2 = make_cfg(16, 2.0, 0.5);
    const Complex q = level_to_amplitude(8, c2, true);
    CHECK(std::abs(q - Complex(0.0, 1.0)) < 1e-15);
    for (int m = 0; m < 16; ++m)
        CHECK(std::abs(level_to_amplitude(m, cfg, false) + level_to_amplitude(m + 16, cfg, false)) < 1e-14);
}

TEST_CASE("Y00Config validation") {
    CHECK_NOTHROW(make_cfg(16, 3.0).validate());
    CHECK_THROWS_AS(make_cfg(16, -1.0).validate(), RangeError);
    CHECK_THROWS_AS(make_cfg(16, 3.0, 0.0).validate(), RangeError);
    CHECK_THROWS_AS(make_cfg(16, 3.0, 1.5).validate(), RangeError);
    CHECK_THROWS_AS(make_cfg(16, 3.0, 1.0, 0.0).validate(), RangeError);
    auto cfg = make_cfg(16, 3.0);
    cfg.mapping = keystream::MappingTable::identity(8);
    CHECK_THROWS_AS(cfg.validate(), ShapeError);
    cfg = make_cfg(16, 3.0);
    cfg.M = 12;
    CHECK_THROWS_AS(cfg.validate(), RangeError);
}

TEST_CASE("transmit") {
    const auto cfg = make_cfg(16, 3.0, 0.7);
    const BitString x = random_bits(300, 1);
    const auto f = transmit(kKeys, x, cfg);
    CHECK(f.size() == 300);
    for (std::size_t t = 0; t < f.size(); ++t) {
        CHECK(f.levels[t] % cfg.M == f.basis[t]);
        CHECK(std::abs(std::abs(f.eve_amplitudes[t]) - cfg.eta * std::abs(f.tx_amplitudes[t])) < 1e-14);
    }
    const auto g = transmit(kKeys, x, cfg);
    CHECK(g.levels == f.levels);
    CHECK(g.tx_amplitudes == f.tx_amplitudes);
    CHECK(g.eve_amplitudes == f.eve_amplitudes);

    const auto full = transmit(kKeys, x, make_cfg(16, 3.0, 1.0));
    CHECK(full.eve_amplitudes == full.tx_amplitudes);

    CHECK_THROWS_AS(transmit(kKeys, BitString{}, cfg), LengthError);
    CHECK_THROWS_AS(transmit({bits_from_string("0000000"), bits_from_string("10011")}, x, cfg), DegenerateKey);
}

TEST_CASE("encode_frame: zero plaintext and zero dx leave levels set by basis parity") {
    const auto cfg = make_cfg(16, 3.0);
    const auto basis = keystream::keystreams(kKeys, cfg.spec_s, cfg.spec_dx, cfg.mapping, 64).basis_seq;
    const auto f = encode_frame(basis, BitString(64, 0), BitString(64, 0), cfg);
    for (std::size_t t = 0; t < 64; ++t) CHECK(f.levels[t] == basis[t] + 16 * (basis[t] % 2));
}

TEST_CASE("heterodyne_sample statistics") {
    const double sigma = 1.3;
    const std::size_t n = 100000;
    double sr = 0, si = 0, sr2 = 0, si2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex z = heterodyne_sample(0.0, sigma, 42, i);
        sr += z.real();
        si += z.imag();
        sr2 += z.real() * z.real();
        si2 += z.imag() * z.imag();
    }
    const double mr = sr / n, mi = si / n;
    CHECK(std::abs(Complex(mr, mi)) < 5 * sigma / std::sqrt(double(n)));
    CHECK(std::abs((sr2 / n - mr * mr) / (sigma * sigma) - 1.0) < 0.05);
    CHECK(std::abs((si2 / n - mi * mi) / (sigma * sigma) - 1.0) < 0.05);
    CHECK(heterodyne_sample({1.0, 2.0}, sigma, 7, 123) == heterodyne_sample({1.0, 2.0}, sigma, 7, 123));
    CHECK(heterodyne_sample({1.0, 2.0}, sigma, 7, 123) != heterodyne_sample({1.0, 2.0}, sigma, 7, 124));
}

TEST_CASE("bob_decode") {
    SUBCASE("noiseless round trip, exhaustive") {
        const auto cfg = make_cfg(16, 3.0);
        for (int b = 0; b < 16; ++b)
            for (int x = 0; x < 2; ++x)
                for (int dx = 0; dx < 2; ++dx)
                    CHECK(bob_decode(level_to_amplitude(encode_level(b, x, dx, 16), cfg, false), b, dx, cfg) == x);
    }
    SUBCASE("zero outcome counts as coset 0") {
        const auto cfg = make_cfg(16, 3.0);
        for (int b = 0; b < 16; ++b)
            for (int dx = 0; dx < 2; ++dx) CHECK(bob_decode(Complex(0.0, 0.0), b, dx, cfg) == (b + dx) % 2);
    }
    SUBCASE("bad basis") { CHECK_THROWS_AS(bob_decode(1.0, 16, 0, make_cfg(16, 3.0)), RangeError); }
}

TEST_CASE("property: sigma -> 0 round trip is bit exact") {
    std::uint64_t seed = 1;
    for (int M : {2, 4, 8, 16, 32, 64}) {
        for (int mapping = 0; mapping < 2; ++mapping) {
            auto cfg = make_cfg(M, 3.0, 1.0, 1e-9);
            if (mapping == 1) cfg.mapping = keystream::MappingTable::seeded(M, 1000 + M);
            for (std::uint64_t k : {1u, 37u, 101u}) {
                const keystream::KeyPair keys{bits_from_uint(k, 7), bits_from_uint(k % 31 + 1, 5)};
                const BitString x = random_bits(2000, ++seed);
                const auto run = run_link(transmit(keys, x, cfg), cfg, seed);
                CHECK(run.decoded == x);
                CHECK(run.bob_errors == 0);
            }
        }
    }
}

TEST_CASE("Bob BER matches the Gaussian tail") {
    const auto cfg = make_cfg(16, 3.0);
    const std::size_t n = 1000000;
    const auto run = run_link(transmit(kKeys, random_bits(n, 9), cfg), cfg, 2024);
    const double q = bob_ber_theory(cfg);
    CHECK(q == doctest::Approx(0.0013498980316300945).epsilon(1e-14));
    const double ber = double(run.bob_errors) / n;
    CHECK(std::abs(ber - q) <= 3.0 * std::sqrt(q * (1 - q) / n));
}

TEST_CASE("property: Bob BER does not depend on plaintext content") {
    const auto cfg = make_cfg(16, 1.5);
    const std::size_t n = 200000;
    const auto a = run_link(transmit(kKeys, random_bits(n, 1), cfg), cfg, 77);
    const auto b = run_link(transmit(kKeys, random_bits(n, 2), cfg), cfg, 77);
    const double pa = double(a.bob_errors) / n, pb = double(b.bob_errors) / n;
    const double q = bob_ber_theory(cfg);
    CHECK(std::abs(pa - pb) <= 3.0 * std::sqrt(2.0 * q * (1 - q) / n));
}

TEST_CASE("eve_level_id") {
    SUBCASE("exact constellation points") {
        const auto cfg = make_cfg(16, 3.0, 0.6);
        for (int m = 0; m < 32; ++m) CHECK(eve_level_id(level_to_amplitude(m, cfg, true), cfg) == m);
    }
    SUBCASE("degenerate constellation ties to level 0") {
        const auto cfg = make_cfg(16, 0.0);
        CHECK(eve_level_id({0.3, -0.2}, cfg) == 0);
    }
    SUBCASE("M=2 is a quadrant rule") {
        const auto cfg = make_cfg(2, 1.0);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd;
        for (int i = 0; i < 2000; ++i) {
            const Complex z(nd(rng), nd(rng));
            // quadrant of z rotated by pi/4 picks the nearest 4-PSK point
            double ang = std::arg(z * std::polar(1.0, std::numbers::pi / 4));
            if (ang < 0) ang += 2 * std::numbers::pi;
            const int quad = static_cast<int>(ang / (std::numbers::pi / 2)) % 4;
            CHECK(eve_level_id(z, cfg) == quad);
        }
    }
    SUBCASE("faint signal approaches the uniform-guess error rate") {
        const auto cfg = make_cfg(64, 0.05);
        const std::size_t n = 100000;
        const auto run = run_link(transmit(kKeys, random_bits(n, 3), cfg), cfg, 5);
        const double rate = double(run.eve_errors) / n;
        CHECK(std::abs(rate - (1.0 - 1.0 / 128)) < 2e-3);
    }
}

TEST_CASE("property: Eve's error rate is nonincreasing in eta*alpha0") {
    const std::size_t n = 20000;
    const BitString x = random_bits(n, 8);
    double prev = 1.0;
    for (double a : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto cfg = make_cfg(4, a);
        const auto run = run_link(transmit(kKeys, x, cfg), cfg, 31);
        const double rate = double(run.eve_errors) / n;
        CHECK(rate <= prev);
        prev = rate;
    }
    CHECK(prev == 0.0);
}

TEST_CASE("masking_size") {
    CHECK(masking_size(make_cfg(16, 0.0)) == 32);
    CHECK(masking_size(make_cfg(4, 10.0)) == 1);
    CHECK(masking_size(make_cfg(512, 10.0)) == 2 * static_cast<int>(std::floor(std::asin(0.05) * 1024 / std::numbers::pi)) + 1);
    CHECK(masking_size(make_cfg(512, 10.0)) == 33);
    CHECK(masking_size(make_cfg(512, 20.0, 0.5)) == 33);
    CHECK_THROWS_AS(masking_size(make_cfg(16, 1.0), 0.0), RangeError);
}
