#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "y00/quantum_detection.hpp"

namespace y00::kpa {

/// Per-period confusion of Eve's measurement: correct identification with
/// probability ps, each specific wrong hypothesis with probability pf.
/// pf is carried as log2 as well since it leaves double range for large key spaces.
struct ConfusionModel {
    double ps = 0.0;
    double pf = 0.0;
    double log2_pf = 0.0;
    int keyspace_bits = 0;
    std::vector<double> priors;  // empty: uniform 2^-keyspace_bits

    /// |ps + (2^bits - 1) pf - 1| evaluated in log domain.
    double normalization_error() const;
};

ConfusionModel symmetric_confusion(double p, int keyspace_bits);

/// Bayes boundary count n_Th between the true hypothesis and one wrong one.
/// prior_ratio_log2 = log2(Pr(wrong) / Pr(true)); zero for uniform priors.
double decision_threshold(std::int64_t N, const ConfusionModel& cm, double prior_ratio_log2 = 0.0);

/// Maximum of decision_threshold over every wrong hypothesis under cm.priors
/// (uniform priors collapse this to a single value).
double max_decision_threshold(std::int64_t N, const ConfusionModel& cm, std::size_t true_index);

/// floor(n_th) clamped to [-1, N]. A threshold within relative 1e-10 of an
/// integer is taken as that integer, so exact ties stay on the failure side.
std::int64_t threshold_floor(double n_th, std::int64_t N);

struct TailProbabilities {
    double fail = 0.0;
    double success = 0.0;
};

/// Binomial CDF at n_th_floor and its complement. The smaller side is summed
/// in log domain and the other side is taken as its complement.
TailProbabilities tail_probabilities(std::int64_t N, double ps, std::int64_t n_th_floor);

double failure_probability(std::int64_t N, double ps, std::int64_t n_th_floor);

struct CurvePoint {
    std::int64_t N = 0;
    double n_th = 0.0;
    std::int64_t n_th_floor = 0;
    double p_fail = 0.0;
    double p_success = 0.0;
};

struct AttackCurve {
    double p = 0.0;
    double p_log2 = 0.0;
    int keyspace_bits = 0;
    std::vector<CurvePoint> points;
};

AttackCurve success_curve(double p, int keyspace_bits, std::span<const std::int64_t> n_grid);

/// floor(10^(log10(min) + i * step)) for count points; a point that collides
/// with its predecessor moves up by one, so the grid is strictly increasing and
/// has min(count, max - min + 1) points ending at max.
std::vector<std::int64_t> log_spaced_grid(std::int64_t min, std::int64_t max, int count);

struct RepetitionOutcome {
    std::vector<std::int64_t> counts;
    std::size_t decision = 0;
};

/// Simulates N independent per-period measurements of hypothesis true_index
/// through ms.cond_prob, then picks the maximum-posterior hypothesis from the
/// counts (ties to the smallest index). Empty priors mean uniform.
RepetitionOutcome empirical_repetition(const qd::MeasurementSet& ms, std::span<const double> priors,
                                       std::size_t true_index, std::int64_t N, std::uint64_t seed);

/// Symmetric model matching a measured ensemble: ps from the diagonal entry of
/// true_index, off-diagonal mass averaged into pf. dim must be a power of two.
ConfusionModel fold_to_symmetric(const qd::MeasurementSet& ms, std::size_t true_index);

/// Pr(new key) = sum_h prior(h) channel(h, new key).
std::vector<double> fresh_key_posterior(std::span<const double> prior,
                                        const std::vector<std::vector<double>>& channel);

}  // namespace y00::kpa
