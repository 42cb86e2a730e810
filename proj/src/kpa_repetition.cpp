#include "y00/kpa_repetition.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "y00/counter_rng.hpp"
#include "y00/errors.hpp"
#include "y00/log_math.hpp"

namespace y00::kpa {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// log2(2^bits - 1)
double log2_mersenne(int bits) { return bits + std::log1p(-std::exp2(-bits)) / kLn2; }

}  // namespace

double ConfusionModel::normalization_error() const {
    const double log2_wrong_mass = log2_pf + log2_mersenne(keyspace_bits);
    return std::abs(ps + std::exp2(log2_wrong_mass) - 1.0);
}

ConfusionModel symmetric_confusion(double p, int keyspace_bits) {
    if (!(p > 0.0 && p < 1.0)) throw RangeError("per-period success probability must be in (0, 1)");
    if (keyspace_bits < 1 || keyspace_bits > 1024) throw RangeError("keyspace_bits must be in [1, 1024]");
    ConfusionModel cm;
    cm.ps = p;
    cm.keyspace_bits = keyspace_bits;
    cm.log2_pf = std::log1p(-p) / kLn2 - log2_mersenne(keyspace_bits);
    cm.pf = std::exp2(cm.log2_pf);
    return cm;
}

double decision_threshold(std::int64_t N, const ConfusionModel& cm, double prior_ratio_log2) {
    if (N < 1) throw RangeError("N must be >= 1");
    const double log2_ps = std::log2(cm.ps);
    if (log2_ps == cm.log2_pf) throw DegenerateModel("ps equals pf; the Bayes boundary is undefined");
    const double log1m_ps = std::log1p(-cm.ps);
    const double log1m_pf = std::log1p(-cm.pf);
    const double per_period = (log1m_pf - log1m_ps) / kLn2;  // log2((1 - pf) / (1 - ps))
    const double denom = log2_ps - cm.log2_pf + per_period;  // log2(ps (1 - pf) / (pf (1 - ps)))
    if (denom == 0.0 || !std::isfinite(denom)) throw DegenerateModel("threshold denominator is zero or infinite");
    return (static_cast<double>(N) * per_period + prior_ratio_log2) / denom;
}

double max_decision_threshold(std::int64_t N, const ConfusionModel& cm, std::size_t true_index) {
    if (cm.priors.empty()) return decision_threshold(N, cm, 0.0);
    if (cm.keyspace_bits > 30 || cm.priors.size() != (std::size_t{1} << cm.keyspace_bits))
        throw ShapeError("explicit priors must list every hypothesis");
    if (true_index >= cm.priors.size()) throw RangeError("true_index outside the hypothesis set");
    const double log2_true = std::log2(cm.priors[true_index]);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cm.priors.size(); ++j) {
        if (j == true_index) continue;
        best = std::max(best, decision_threshold(N, cm, std::log2(cm.priors[j]) - log2_true));
    }
    return best;
}

std::int64_t threshold_floor(double n_th, std::int64_t N) {
    const double nearest = std::round(n_th);
    double fl = std::abs(n_th - nearest) <= 1e-10 * std::max(1.0, std::abs(n_th)) ? nearest : std::floor(n_th);
    if (std::isnan(fl)) throw NumericalError("threshold is NaN");
    return fl < -1.0 ? -1 : (fl > static_cast<double>(N) ? N : static_cast<std::int64_t>(fl));
}

TailProbabilities tail_probabilities(std::int64_t N, double ps, std::int64_t n_th_floor) {
    if (N < 1) throw RangeError("N must be >= 1");
    if (!(ps >= 0.0 && ps <= 1.0)) throw RangeError("ps must be a probability");
    const std::int64_t k = n_th_floor;
    if (k < 0) return {0.0, 1.0};
    if (k >= N) return {1.0, 0.0};
    if (ps == 0.0) return {1.0, 0.0};
    if (ps == 1.0) return {0.0, 1.0};

    const double lp = std::log(ps);
    const double lq = std::log1p(-ps);
    const auto log_term = [&](std::int64_t n) {
        return log_binomial(N, n) + static_cast<double>(n) * lp + static_cast<double>(N - n) * lq;
    };

    if (k == 0) {
        const double all_miss = static_cast<double>(N) * lq;
        return {std::exp(all_miss), -std::expm1(all_miss)};
    }

    if (static_cast<double>(k + 1) > static_cast<double>(N) * ps) {
        // Upper tail is the small side; its terms decrease from k + 1 on.
        double acc = kNegInf;
        for (std::int64_t n = k + 1; n <= N; ++n) {
            const double t = log_term(n);
            acc = log_add(acc, t);
            if (t < acc - 60.0) break;
        }
        const double success = std::exp(acc);
        return {1.0 - success, success};
    }

    double acc = kNegInf;
    for (std::int64_t n = k; n >= 0; --n) {
        const double t = log_term(n);
        acc = log_add(acc, t);
        if (t < acc - 60.0) break;  // terms keep decreasing below k < mean
    }
    const double fail = std::exp(acc);
    return {fail, 1.0 - fail};
}

double failure_probability(std::int64_t N, double ps, std::int64_t n_th_floor) {
    return tail_probabilities(N, ps, n_th_floor).fail;
}

AttackCurve success_curve(double p, int keyspace_bits, std::span<const std::int64_t> n_grid) {
    if (n_grid.empty()) throw RangeError("N grid is empty");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw RangeError("N grid must be strictly increasing");

    const ConfusionModel cm = symmetric_confusion(p, keyspace_bits);
    AttackCurve curve;
    curve.p = p;
    curve.p_log2 = std::log2(p);
    curve.keyspace_bits = keyspace_bits;
    curve.points.reserve(n_grid.size());
    for (std::int64_t N : n_grid) {
        CurvePoint pt;
        pt.N = N;
        pt.n_th = decision_threshold(N, cm);
        pt.n_th_floor = threshold_floor(pt.n_th, N);
        const auto tail = tail_probabilities(N, cm.ps, pt.n_th_floor);
        pt.p_fail = tail.fail;
        pt.p_success = tail.success;
        curve.points.push_back(pt);
    }
    return curve;
}

std::vector<std::int64_t> log_spaced_grid(std::int64_t min, std::int64_t max, int count) {
    if (min < 1 || max < min || count < 1) throw RangeError("log grid needs 1 <= min <= max and count >= 1");
    std::vector<std::int64_t> out;
    const double lo = std::log10(static_cast<double>(min));
    const double hi = std::log10(static_cast<double>(max));
    for (int i = 0; i < count; ++i) {
        const double e = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
        const double v = std::pow(10.0, e);
        auto n = static_cast<std::int64_t>(std::floor(v * (1.0 + 1e-12)));
        n = std::clamp(n, min, max);
        if (!out.empty()) n = std::max(n, out.back() + 1);  // small N: floors collide
        if (n > max) break;
        out.push_back(n);
    }
    if (out.back() != max) out.back() = max;
    return out;
}

RepetitionOutcome empirical_repetition(const qd::MeasurementSet& ms, std::span<const double> priors,
                                       std::size_t true_index, std::int64_t N, std::uint64_t seed) {
    const auto d = static_cast<std::size_t>(ms.cond_prob.rows());
    if (d == 0 || ms.cond_prob.cols() != ms.cond_prob.rows()) throw ShapeError("cond_prob must be square");
    if (d > 1024) throw TooLarge("empirical repetition limited to 2^10 hypotheses");
    if (N < 0 || N > 1'000'000) throw TooLarge("empirical repetition limited to N <= 10^6");
    if (true_index >= d) throw RangeError("true_index outside the hypothesis set");
    if (!priors.empty() && priors.size() != d) throw ShapeError("one prior per hypothesis required");

    std::vector<double> cdf(d);
    double run = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        run += ms.cond_prob(static_cast<Eigen::Index>(true_index), static_cast<Eigen::Index>(j));
        cdf[j] = run;
    }

    RepetitionOutcome out;
    out.counts.assign(d, 0);
    const CounterStream rng(seed, true_index);
    for (std::int64_t n = 0; n < N; ++n) {
        const double u = rng.uniform(static_cast<std::uint64_t>(n)) * run;
        auto j = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        ++out.counts[std::min(j, d - 1)];
    }

    std::vector<std::size_t> seen;
    for (std::size_t j = 0; j < d; ++j)
        if (out.counts[j] > 0) seen.push_back(j);

    double best = kNegInf;
    for (std::size_t h = 0; h < d; ++h) {
        double score = priors.empty() ? 0.0 : std::log(priors[h]);
        for (std::size_t j : seen) {
            const double c = ms.cond_prob(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(j));
            score += c > 0.0 ? static_cast<double>(out.counts[j]) * std::log(c) : kNegInf;
        }
        if (score > best) {
            best = score;
            out.decision = h;
        }
    }
    return out;
}

ConfusionModel fold_to_symmetric(const qd::MeasurementSet& ms, std::size_t true_index) {
    const auto d = static_cast<std::size_t>(ms.cond_prob.rows());
    if (d < 2 || !std::has_single_bit(d)) throw ShapeError("folding needs a power-of-two hypothesis count");
    if (true_index >= d) throw RangeError("true_index outside the hypothesis set");
    const auto t = static_cast<Eigen::Index>(true_index);
    ConfusionModel cm;
    cm.keyspace_bits = std::countr_zero(d);
    cm.ps = ms.cond_prob(t, t);
    const double off = ms.cond_prob.row(t).sum() - cm.ps;
    cm.pf = std::max(0.0, off) / static_cast<double>(d - 1);
    cm.log2_pf = std::log2(cm.pf);
    return cm;
}

std::vector<double> fresh_key_posterior(std::span<const double> prior,
                                        const std::vector<std::vector<double>>& channel) {
    if (prior.empty() || channel.size() != prior.size()) throw ShapeError("channel needs one row per prior entry");
    const std::size_t width = channel.front().size();
    if (width == 0) throw ShapeError("channel rows are empty");
    double total = 0.0;
    for (double v : prior) {
        if (!(v >= 0.0)) throw RangeError("prior has a negative entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-12) throw RangeError("prior does not sum to 1");

    std::vector<double> out(width, 0.0);
    for (std::size_t h = 0; h < prior.size(); ++h) {
        const auto& row = channel[h];
        if (row.size() != width) throw ShapeError("channel rows differ in length");
        double rs = 0.0;
        for (double v : row) rs += v;
        if (std::abs(rs - 1.0) > 1e-12) throw RangeError("channel row " + std::to_string(h) + " does not sum to 1");
        for (std::size_t k = 0; k < width; ++k) out[k] += prior[h] * row[k];
    }
    return out;
}

}  // namespace y00::kpa
