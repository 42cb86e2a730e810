#include "y00/quantum_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "y00/errors.hpp"
#include "y00/keystream.hpp"

namespace y00::qd {

Complex coherent_overlap(Complex a, Complex b) {
    return std::exp(-0.5 * (std::norm(a) + std::norm(b)) + std::conj(a) * b);
}

Complex LogOverlap::value() const { return std::polar(std::exp(log_magnitude), phase); }

LogOverlap sequence_log_overlap(std::span<const Complex> a, std::span<const Complex> b) {
    if (a.size() != b.size()) throw LengthError("overlap of sequences with different lengths");
    // Re of the exponent is -|a - b|^2 / 2, Im is Im(conj(a) b).
    double log_mag = 0.0;
    double phase = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        log_mag -= 0.5 * std::norm(a[t] - b[t]);
        phase += (std::conj(a[t]) * b[t]).imag();
        if ((t & 1023u) == 1023u) phase = std::remainder(phase, 2.0 * std::numbers::pi);
    }
    return {log_mag, std::remainder(phase, 2.0 * std::numbers::pi)};
}

Complex sequence_overlap(std::span<const Complex> a, std::span<const Complex> b) {
    return sequence_log_overlap(a, b).value();
}

HypothesisEnsemble HypothesisEnsemble::from_sequences(std::vector<std::vector<Complex>> seqs,
                                                      std::vector<double> priors) {
    const std::size_t d = seqs.size();
    if (d == 0) throw ShapeError("ensemble needs at least one hypothesis");
    if (priors.empty()) priors.assign(d, 1.0 / static_cast<double>(d));
    if (priors.size() != d) throw ShapeError("one prior per hypothesis required");
    for (const auto& s : seqs)
        if (s.size() != seqs.front().size()) throw LengthError("amplitude sequences differ in length");

    HypothesisEnsemble ens;
    ens.amplitude_seqs = std::move(seqs);
    ens.priors = std::move(priors);
    ens.gram.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        ens.gram(ii, ii) = 1.0;
        for (std::size_t j = i + 1; j < d; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            const Complex g = sequence_overlap(ens.amplitude_seqs[i], ens.amplitude_seqs[j]);
            ens.gram(ii, jj) = g;
            ens.gram(jj, ii) = std::conj(g);
            if (ens.amplitude_seqs[i] == ens.amplitude_seqs[j]) ens.duplicates.emplace_back(i, j);
        }
    }
    ens.validate();
    return ens;
}

void HypothesisEnsemble::validate() const {
    const std::size_t d = dim();
    if (d == 0) throw ShapeError("empty ensemble");
    if (priors.size() != d) throw ShapeError("one prior per hypothesis required");
    if (gram.rows() != static_cast<Eigen::Index>(d) || gram.cols() != static_cast<Eigen::Index>(d))
        throw ShapeError("Gram matrix shape differs from ensemble size");
    double total = 0.0;
    for (double q : priors) {
        if (!(q > 0.0)) throw RangeError("priors must be strictly positive");
        total += q;
    }
    if (std::abs(total - 1.0) > 1e-12) throw RangeError("priors do not sum to 1");
    for (Eigen::Index i = 0; i < gram.rows(); ++i) {
        if (std::abs(gram(i, i) - Complex(1.0)) > 1e-12) throw NumericalError("Gram diagonal is not 1");
        for (Eigen::Index j = i + 1; j < gram.cols(); ++j)
            if (std::abs(gram(i, j) - std::conj(gram(j, i))) > 1e-12) throw NumericalError("Gram is not Hermitian");
    }
}

HypothesisEnsemble build_ensemble(const modem::Y00Config& cfg, const BitString& known_plaintext,
                                  std::vector<double> priors, int max_bits) {
    cfg.validate();
    if (known_plaintext.empty()) throw LengthError("known plaintext is empty");
    const int bits = cfg.spec_s.width + cfg.spec_dx.width;
    const int cap = std::min(max_bits, kMaxEnsembleBits);
    if (bits > cap)
        throw TooLarge("key space of " + std::to_string(bits) + " bits exceeds the ensemble cap of " +
                       std::to_string(cap) + " bits");

    const std::size_t n_slots = known_plaintext.size();
    const auto L = static_cast<std::size_t>(cfg.mapping.bits_per_slot());
    const std::uint64_t nk = std::uint64_t{1} << cfg.spec_s.width;
    const std::uint64_t ndk = std::uint64_t{1} << cfg.spec_dx.width;

    std::vector<std::vector<Complex>> seqs;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;
    seqs.reserve(nk * ndk);
    for (std::uint64_t k = 0; k < nk; ++k) {
        const auto basis = keystream::chop(keystream::expand_state(cfg.spec_s, k, n_slots * L), cfg.mapping);
        for (std::uint64_t dk = 0; dk < ndk; ++dk) {
            const auto dx = keystream::expand_state(cfg.spec_dx, dk, n_slots);
            seqs.push_back(modem::encode_frame(basis, dx, known_plaintext, cfg).eve_amplitudes);
            keys.emplace_back(k, dk);
        }
    }
    auto ens = HypothesisEnsemble::from_sequences(std::move(seqs), std::move(priors));
    ens.keys = std::move(keys);
    return ens;
}

MeasurementSet srm(const HypothesisEnsemble& ens) {
    ens.validate();
    const auto d = static_cast<Eigen::Index>(ens.dim());
    Eigen::VectorXd sq(d);
    for (Eigen::Index i = 0; i < d; ++i) sq(i) = std::sqrt(ens.priors[static_cast<std::size_t>(i)]);

    const Eigen::MatrixXcd weighted = sq.asDiagonal() * ens.gram * sq.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(weighted);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the weighted Gram failed");

    Eigen::VectorXd lam = eig.eigenvalues();
    if (lam.minCoeff() < -1e-8)
        throw NumericalError("weighted Gram has eigenvalue " + std::to_string(lam.minCoeff()) + " (not PSD)");
    // Eigenvalues at rounding level are zero; their square roots would
    // otherwise leak ~1e-8 into the measurement.
    const double floor = static_cast<double>(d) * std::numeric_limits<double>::epsilon() *
                         std::max(lam.maxCoeff(), 0.0);
    lam = lam.unaryExpr([floor](double v) { return v > floor ? std::sqrt(v) : 0.0; });
    const Eigen::MatrixXcd& V = eig.eigenvectors();
    const Eigen::MatrixXcd root = V * lam.asDiagonal() * V.adjoint();

    MeasurementSet ms;
    ms.cond_prob.resize(d, d);
    ms.measurement_gram.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            ms.measurement_gram(i, j) = root(i, j) / sq(i);
            ms.cond_prob(i, j) = std::norm(root(i, j)) / (sq(i) * sq(i));
        }
    }
    return ms;
}

double success_probability(const HypothesisEnsemble& ens, const MeasurementSet& ms) {
    const auto d = static_cast<Eigen::Index>(ens.dim());
    if (ms.cond_prob.rows() != d || ms.cond_prob.cols() != d) throw ShapeError("measurement and ensemble differ in size");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) acc += ens.priors[static_cast<std::size_t>(i)] * ms.cond_prob(i, i);
    return acc;
}

double overlap_bound(const MeasurementSet& ms) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index i = 0; i < ms.measurement_gram.rows(); ++i) {
        const double w = std::norm(ms.measurement_gram(i, i));
        num += w * w;
        den += w;
    }
    if (!(den > 0.0)) throw DegenerateMeasurement("all measurement vectors are orthogonal to their states");
    return num / den;
}

namespace {

// Smallest eigenvalue of diag(beta) - rho z z^H (rho >= 0) from the secular
// equation 1 = rho * sum |z_k|^2 / (beta_k - lambda); the root below beta_min.
double min_eig_rank_one_downdate(const Eigen::VectorXd& beta, const Eigen::VectorXcd& z, double rho) {
    const double beta_min = beta.minCoeff();
    const double weight = rho * z.squaredNorm();
    if (!(weight > 0.0)) return beta_min;
    double lo = beta_min - weight - 1e-300;
    double hi = beta_min;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(mid < hi)) break;
        double s = 0.0;
        for (Eigen::Index k = 0; k < beta.size(); ++k) s += std::norm(z(k)) / (beta(k) - mid);
        if (1.0 - rho * s > 0.0) lo = mid;
        else hi = mid;
    }
    return std::min(0.5 * (lo + hi), beta_min);
}

}  // namespace

OptimalityResiduals optimality_residuals(const HypothesisEnsemble& ens, const MeasurementSet& ms) {
    const auto d = static_cast<Eigen::Index>(ens.dim());
    const Eigen::MatrixXcd& mg = ms.measurement_gram;
    if (mg.rows() != d || mg.cols() != d) throw ShapeError("measurement and ensemble differ in size");

    // Prior-matching weights q_i ~ |<psi_i|mu_i>|^2.
    Eigen::VectorXd q(d);
    for (Eigen::Index i = 0; i < d; ++i) q(i) = std::norm(mg(i, i));
    const double total = q.sum();
    if (total > 0.0) q /= total;
    else q.setConstant(1.0 / static_cast<double>(d));

    OptimalityResiduals out;
    for (Eigen::Index i = 0; i < d; ++i)
        out.induced_prior_distance += 0.5 * std::abs(q(i) - ens.priors[static_cast<std::size_t>(i)]);

    // <mu_i|(W_j - W_i)|mu_j> = 0 with W_k = -q_k |psi_k><psi_k|.
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (i == j) continue;
            const Complex lhs = q(j) * std::conj(mg(j, i)) * mg(j, j);
            const Complex rhs = q(i) * std::conj(mg(i, i)) * mg(i, j);
            out.pairwise_residual = std::max(out.pairwise_residual, std::abs(lhs - rhs));
        }
    }

    // Orthonormal coordinates on the span of the states: psi_i -> c_i, mu_j -> m_j.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> geig(ens.gram);
    if (geig.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Gram failed");
    const Eigen::VectorXd& lam = geig.eigenvalues();
    const double cut = 1e-10 * static_cast<double>(d) * std::max(1.0, lam.maxCoeff());
    std::vector<Eigen::Index> kept;
    for (Eigen::Index k = 0; k < d; ++k)
        if (lam(k) > cut) kept.push_back(k);
    const auto r = static_cast<Eigen::Index>(kept.size());

    Eigen::MatrixXcd vr(d, r);
    Eigen::VectorXd lr(r);
    for (Eigen::Index k = 0; k < r; ++k) {
        vr.col(k) = geig.eigenvectors().col(kept[static_cast<std::size_t>(k)]);
        lr(k) = lam(kept[static_cast<std::size_t>(k)]);
    }
    const Eigen::MatrixXcd coords = lr.cwiseSqrt().asDiagonal() * vr.adjoint();          // r x d
    const Eigen::MatrixXcd mcoords = lr.cwiseSqrt().cwiseInverse().asDiagonal() * vr.adjoint() * mg;

    // Gamma = sum_j E_j W_j = -sum_j q_j <mu_j|psi_j> |mu_j><psi_j|.
    Eigen::VectorXcd w(d);
    for (Eigen::Index j = 0; j < d; ++j) w(j) = q(j) * std::conj(mg(j, j));
    const Eigen::MatrixXcd gamma = -(mcoords * w.asDiagonal() * coords.adjoint());
    const Eigen::MatrixXcd base = -0.5 * (gamma + gamma.adjoint());

    // W_i - Gamma = base - q_i c_i c_i^H.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> beig(base);
    if (beig.info() != Eigen::Success) throw NumericalError("eigendecomposition of Gamma failed");
    const Eigen::MatrixXcd z = beig.eigenvectors().adjoint() * coords;
    double min_eig = beig.eigenvalues().minCoeff();
    for (Eigen::Index i = 0; i < d; ++i)
        min_eig = std::min(min_eig, min_eig_rank_one_downdate(beig.eigenvalues(), z.col(i), q(i)));
    out.psd_deficit = std::max(0.0, -min_eig);
    return out;
}

double helstrom_binary(double q0, double q1, double overlap_sq) {
    if (!(q0 >= 0.0 && q1 >= 0.0) || std::abs(q0 + q1 - 1.0) > 1e-12)
        throw RangeError("helstrom_binary: priors must be nonnegative and sum to 1");
    if (!(overlap_sq >= 0.0 && overlap_sq <= 1.0 + 1e-12))
        throw RangeError("helstrom_binary: squared overlap must be in [0, 1]");
    const double x = 4.0 * q0 * q1 * std::min(overlap_sq, 1.0);
    // (1 - sqrt(1 - x)) / 2 without cancellation at small x.
    return 0.5 * x / (1.0 + std::sqrt(std::max(0.0, 1.0 - x)));
}

std::pair<double, double> offdiag_overlap_range(const HypothesisEnsemble& ens) {
    const Eigen::Index d = ens.gram.rows();
    if (d < 2) return {0.0, 0.0};
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = i + 1; j < d; ++j) {
            const double a = std::abs(ens.gram(i, j));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
    return {lo, hi};
}

}  // namespace y00::qd
