#include "y00/counter_rng.hpp"

#include <cmath>
#include <numbers>

namespace y00 {

std::pair<double, double> CounterStream::normal_pair(std::uint64_t index) const noexcept {
    const double u1 = 1.0 - uniform(2 * index);  // (0, 1]
    const double u2 = uniform(2 * index + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace y00
