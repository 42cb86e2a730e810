#include "y00/oracle/binomial_oracle.hpp"

#include <boost/multiprecision/mpfr.hpp>

namespace y00::oracle {

namespace mp = boost::multiprecision;
using Real = mp::mpfr_float;

namespace {

struct PrecisionScope {
    explicit PrecisionScope(unsigned digits10) : saved(Real::default_precision()) {
        Real::default_precision(digits10);
    }
    ~PrecisionScope() { Real::default_precision(saved); }
    unsigned saved;
};

unsigned digits_for(int keyspace_bits) {
    // pf sits near 2^-bits, so 1 - pf needs more than `bits` binary digits.
    return static_cast<unsigned>((keyspace_bits + 256) * 0.30103) + 10;
}

}  // namespace

ReferencePoint repetition_reference(double p, int keyspace_bits, std::int64_t N) {
    PrecisionScope scope(digits_for(keyspace_bits));

    const Real one = 1;
    const Real ps = p;
    const Real pf = (one - ps) / (mp::pow(Real(2), keyspace_bits) - one);
    const Real n = static_cast<double>(N);

    const Real n_th = n * mp::log2((one - pf) / (one - ps)) / mp::log2(ps * (one - pf) / pf / (one - ps));
    const Real fl = mp::floor(n_th);

    ReferencePoint out;
    out.n_th = n_th.convert_to<double>();
    out.n_th_floor = fl.convert_to<std::int64_t>();

    const std::int64_t k = out.n_th_floor;
    Real fail = 0;
    if (k >= N) {
        fail = 1;
    } else if (k >= 0) {
        Real term = mp::pow(one - ps, n);
        fail = term;
        const Real ratio = ps / (one - ps);
        for (std::int64_t i = 0; i < k; ++i) {
            term *= Real(static_cast<double>(N - i)) / Real(static_cast<double>(i + 1)) * ratio;
            fail += term;
        }
    }
    out.p_fail = fail.convert_to<double>();
    out.p_success = Real(one - fail).convert_to<double>();
    return out;
}

double all_miss_complement(double p, std::int64_t N) {
    PrecisionScope scope(200);
    const Real one = 1;
    return Real(one - mp::pow(one - Real(p), Real(static_cast<double>(N)))).convert_to<double>();
}

}  // namespace y00::oracle
