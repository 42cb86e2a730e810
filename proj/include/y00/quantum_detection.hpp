#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "y00/bits.hpp"
#include "y00/y00_modem.hpp"

namespace y00::qd {

using Complex = std::complex<double>;

/// <a|b> for coherent states |a>, |b>.
Complex coherent_overlap(Complex a, Complex b);

/// Product of per-slot overlaps kept as log-magnitude plus phase (wrapped to
/// (-pi, pi]) so that long sequences do not underflow.
struct LogOverlap {
    double log_magnitude = 0.0;
    double phase = 0.0;

    Complex value() const;
};

LogOverlap sequence_log_overlap(std::span<const Complex> a, std::span<const Complex> b);
Complex sequence_overlap(std::span<const Complex> a, std::span<const Complex> b);

/// Pure-state hypotheses |psi_i> (tensor products of coherent states) with
/// priors and their Gram matrix gram(i, j) = <psi_i|psi_j>.
struct HypothesisEnsemble {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;  // (k, dk) register states
    std::vector<std::vector<Complex>> amplitude_seqs;
    std::vector<double> priors;
    Eigen::MatrixXcd gram;
    std::vector<std::pair<std::size_t, std::size_t>> duplicates;  // i < j with identical sequences

    std::size_t dim() const { return amplitude_seqs.size(); }

    /// Builds the Gram matrix from explicit sequences. Empty priors mean uniform.
    static HypothesisEnsemble from_sequences(std::vector<std::vector<Complex>> seqs,
                                             std::vector<double> priors = {});

    /// Checks priors, shapes and the Hermitian unit-diagonal structure.
    void validate() const;
};

inline constexpr int kMaxEnsembleBits = 16;
inline constexpr int kDefaultEnsembleBits = 10;

/// Enumerates all 2^(|K|+|dK|) register state pairs (zero states included),
/// encodes the known plaintext under each and collects Eve's tapped amplitudes.
/// Throws TooLarge when |K|+|dK| exceeds max_bits (itself capped at 16).
HypothesisEnsemble build_ensemble(const modem::Y00Config& cfg, const BitString& known_plaintext,
                                  std::vector<double> priors = {}, int max_bits = kDefaultEnsembleBits);

struct MeasurementSet {
    Eigen::MatrixXd cond_prob;          // (i, j) = Pr(decide j | true i)
    Eigen::MatrixXcd measurement_gram;  // (i, j) = <psi_i|mu_j>
};

/// Square-root measurement for the prior-weighted ensemble.
MeasurementSet srm(const HypothesisEnsemble& ens);

double success_probability(const HypothesisEnsemble& ens, const MeasurementSet& ms);

/// sum |<psi_i|mu_i>|^4 / sum |<psi_i|mu_i>|^2.
double overlap_bound(const MeasurementSet& ms);

struct OptimalityResiduals {
    double pairwise_residual = 0.0;       // stationarity gap, max over pairs
    double psd_deficit = 0.0;             // max(0, -min eigenvalue of W_i - Gamma)
    double induced_prior_distance = 0.0;  // total variation to the prior-matching weights
};

/// Optimality diagnostics for a rank-one measurement, evaluated with the
/// prior-matching weights q_i proportional to |<psi_i|mu_i>|^2.
OptimalityResiduals optimality_residuals(const HypothesisEnsemble& ens, const MeasurementSet& ms);

/// Minimum error probability for two pure states with priors q0, q1 and
/// squared overlap overlap_sq.
double helstrom_binary(double q0, double q1, double overlap_sq);

/// (min, max) of the off-diagonal |gram(i, j)|; (0, 0) for a single hypothesis.
std::pair<double, double> offdiag_overlap_range(const HypothesisEnsemble& ens);

}  // namespace y00::qd
