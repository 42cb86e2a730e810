#pragma once

#include <cstdint>

namespace y00::oracle {

/// Reference evaluation of the repetition-attack success probability in
/// multiple precision: the confusion model, the threshold and its floor, and a
/// direct binomial CDF sum. Shares no code with the double-precision path.
struct ReferencePoint {
    double n_th = 0.0;
    std::int64_t n_th_floor = 0;
    double p_fail = 0.0;
    double p_success = 0.0;
};

ReferencePoint repetition_reference(double p, int keyspace_bits, std::int64_t N);

/// 1 - (1 - p)^N in multiple precision.
double all_miss_complement(double p, std::int64_t N);

}  // namespace y00::oracle
