#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <unistd.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "y00/classical_baseline.hpp"
#include "y00/cli.hpp"
#include "y00/counter_rng.hpp"
#include "y00/errors.hpp"
#include "y00/kpa_repetition.hpp"
#include "y00/oracle/binomial_oracle.hpp"
#include "y00/quantum_detection.hpp"

namespace y00::cli {

using nlohmann::json;

namespace {

// Round-trip text for doubles, identical on every run.
std::string num(double v) { return fmt::format("{:.17g}", v); }

// Independent draw streams derived from the master seed.
enum Stream : std::uint64_t { kPlaintext = 1, kDetectPlaintext = 2, kKpaPlaintext = 3 };

BitString seeded_bits(std::uint64_t master, Stream stream, std::size_t n) {
    const CounterStream rng(master, stream);
    BitString b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = static_cast<std::uint8_t>(rng.bits(i) & 1u);
    return b;
}

// Wilson score interval at 95%.
std::pair<double, double> wilson(std::size_t hits, std::size_t n) {
    const double z = 1.959963984540054;
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    const double nn = static_cast<double>(n);
    const double den = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / den;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / den;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::string taps_text(const keystream::LfsrSpec& s) {
    std::string out;
    for (std::size_t i = 0; i < s.taps.size(); ++i) out += (i ? " " : "") + std::to_string(s.taps[i]);
    return out;
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += "\n";
    }
    return out;
}

// Linearly decreasing prior over width-bit strings.
std::vector<double> skewed_prior(int width) {
    const std::size_t n = std::size_t{1} << width;
    std::vector<double> p(n);
    const double norm = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
    for (std::size_t x = 0; x < n; ++x) p[x] = static_cast<double>(n - x) / norm;
    return p;
}

}  // namespace

CommandOutput cmd_secrecy(const RunConfig& cfg) {
    struct Row {
        std::string system;
        int width;
        std::string prior;
        classical::GuessingSecrecy g;
    };
    std::vector<Row> rows;
    for (int w = 1; w <= 3; ++w) {
        const std::vector<double> uni(std::size_t{1} << w, 1.0 / static_cast<double>(std::size_t{1} << w));
        rows.push_back({"one_time_pad", w, "uniform", classical::guessing_secrecy(classical::ToyCipherSystem::one_time_pad(w, uni))});
        rows.push_back({"one_time_pad", w, "skewed",
                        classical::guessing_secrecy(classical::ToyCipherSystem::one_time_pad(w, skewed_prior(w)))});
        rows.push_back({"constant_key", w, "uniform", classical::guessing_secrecy(classical::ToyCipherSystem::constant_key(w, uni))});
    }

    // Known-plaintext recovery for every nonzero key of the sweep register.
    const auto& spec = cfg.secrecy_lfsr;
    if (spec.width > 12) throw TooLarge("secrecy key sweep limited to 12-bit registers");
    const std::uint64_t mask = spec.state_mask();
    const std::size_t window = static_cast<std::size_t>(mask);
    const BitString x = seeded_bits(cfg.master_seed, kKpaPlaintext, window);
    std::uint64_t recovered = 0;
    for (std::uint64_t key = 1; key <= mask; ++key) {
        const BitString k = bits_from_uint(key, spec.width);
        const BitString c = bits_xor(x, keystream::expand(spec, k, window));
        try {
            if (classical::stream_kpa_recover(spec, c, x) == k) ++recovered;
        } catch (const AmbiguousKey&) {
            // counted as not recovered
        }
    }
    const double rec_prob = static_cast<double>(recovered) / static_cast<double>(mask);

    CommandOutput out;
    std::string& r = out.report;
    r += fmt::format("{:<14} {:>5} {:<8} {:>10} {:>10} {:>10}\n", "system", "width", "prior", "average", "worst", "prior_max");
    for (const auto& row : rows)
        r += fmt::format("{:<14} {:>5} {:<8} {:>10.6f} {:>10.6f} {:>10.6f}\n", row.system, row.width, row.prior,
                         row.g.average, row.g.worst_case, row.g.prior_max);
    r += fmt::format("lfsr known-plaintext sweep: width {} taps [{}], {} of {} keys recovered, probability {}\n",
                     spec.width, taps_text(spec), recovered, mask, num(rec_prob));

    if (cfg.format == "csv") {
        std::vector<std::vector<std::string>> body;
        for (const auto& row : rows)
            body.push_back({row.system, std::to_string(row.width), row.prior, num(row.g.average), num(row.g.worst_case),
                            num(row.g.prior_max)});
        out.files.emplace_back("secrecy.csv",
                               csv({"system", "width", "prior", "average", "worst_case", "prior_max"}, body));
        out.files.emplace_back("kpa_baseline.csv",
                               csv({"width", "taps", "keys_tested", "keys_recovered", "recovery_probability"},
                                   {{std::to_string(spec.width), taps_text(spec), std::to_string(mask),
                                     std::to_string(recovered), num(rec_prob)}}));
    } else {
        json j;
        for (const auto& row : rows)
            j["secrecy"].push_back({{"system", row.system},
                                    {"width", row.width},
                                    {"prior", row.prior},
                                    {"average", row.g.average},
                                    {"worst_case", row.g.worst_case},
                                    {"prior_max", row.g.prior_max}});
        j["kpa_baseline"] = {{"width", spec.width},       {"taps", spec.taps},
                             {"keys_tested", mask},       {"keys_recovered", recovered},
                             {"recovery_probability", rec_prob}};
        out.files.emplace_back("secrecy.json", j.dump(2) + "\n");
    }
    return out;
}

CommandOutput cmd_transmit(const RunConfig& cfg) {
    if (cfg.slots > kMaxSlots) throw TooLarge("transmit limited to " + std::to_string(kMaxSlots) + " slots");
    const BitString x = seeded_bits(cfg.master_seed, kPlaintext, cfg.slots);
    const auto ks = keystream::keystreams(cfg.keys, cfg.y00.spec_s, cfg.y00.spec_dx, cfg.y00.mapping, cfg.slots);
    const auto frame = modem::encode_frame(ks.basis_seq, ks.dx_seq, x, cfg.y00);
    const auto run = modem::run_link(frame, cfg.y00, cfg.master_seed);

    const std::size_t n = frame.size();
    const double ber = static_cast<double>(run.bob_errors) / static_cast<double>(n);
    const double eve = static_cast<double>(run.eve_errors) / static_cast<double>(n);
    const auto [blo, bhi] = wilson(run.bob_errors, n);
    const auto [elo, ehi] = wilson(run.eve_errors, n);
    const double theory = modem::bob_ber_theory(cfg.y00);
    const double se = std::sqrt(theory * (1 - theory) / static_cast<double>(n));
    const double z = se > 0.0 ? (ber - theory) / se : 0.0;
    const int masking = modem::masking_size(cfg.y00);

    CommandOutput out;
    out.report = fmt::format(
        "slots {}  M {}  alpha0 {}  eta {}  sigma {}\n"
        "keystream periods: basis {} slots, dx {} slots, joint {} slots\n"
        "Bob BER {} (95% CI [{}, {}]), Gaussian tail {} (z = {:.3f})\n"
        "Eve level-ID error rate {} (95% CI [{}, {}]), uniform guess {}\n"
        "masking size {} of {} levels\n",
        n, cfg.y00.M, num(cfg.y00.alpha0), num(cfg.y00.eta), num(cfg.y00.het_sigma), ks.slot_period_s,
        ks.slot_period_dx, ks.t_lcm, num(ber), num(blo), num(bhi), num(theory), z, num(eve), num(elo), num(ehi),
        num(1.0 - 1.0 / (2.0 * cfg.y00.M)), masking, 2 * cfg.y00.M);

    const std::vector<std::pair<std::string, std::string>> summary = {
        {"slots", std::to_string(n)},
        {"slot_period_s", std::to_string(ks.slot_period_s)},
        {"slot_period_dx", std::to_string(ks.slot_period_dx)},
        {"t_lcm", std::to_string(ks.t_lcm)},
        {"bob_errors", std::to_string(run.bob_errors)},
        {"bob_ber", num(ber)},
        {"bob_ber_ci_low", num(blo)},
        {"bob_ber_ci_high", num(bhi)},
        {"bob_ber_theory", num(theory)},
        {"eve_errors", std::to_string(run.eve_errors)},
        {"eve_error_rate", num(eve)},
        {"eve_error_ci_low", num(elo)},
        {"eve_error_ci_high", num(ehi)},
        {"masking_size", std::to_string(masking)},
    };

    if (cfg.format == "csv") {
        std::string f = "t,basis,dx,x,m,re(tx),im(tx),re(eve_outcome),im(eve_outcome)\n";
        f.reserve(n * 96);
        for (std::size_t t = 0; t < n; ++t) {
            f += fmt::format("{},{},{},{},{},{},{},{},{}\n", t, frame.basis[t], frame.dx[t], frame.plaintext[t],
                             frame.levels[t], num(frame.tx_amplitudes[t].real()), num(frame.tx_amplitudes[t].imag()),
                             num(run.eve_outcomes[t].real()), num(run.eve_outcomes[t].imag()));
        }
        out.files.emplace_back("frame.csv", std::move(f));
        std::vector<std::string> head, vals;
        for (const auto& [k, v] : summary) {
            head.push_back(k);
            vals.push_back(v);
        }
        out.files.emplace_back("transmit_summary.csv", csv(head, {vals}));
    } else {
        json j;
        for (const auto& [k, v] : summary) j["summary"][k] = json::parse(v);
        json& fr = j["frame"];
        fr["columns"] = {"t", "basis", "dx", "x", "m", "re(tx)", "im(tx)", "re(eve_outcome)", "im(eve_outcome)"};
        fr["rows"] = json::array();
        for (std::size_t t = 0; t < n; ++t)
            fr["rows"].push_back({t, frame.basis[t], frame.dx[t], frame.plaintext[t], frame.levels[t],
                                  frame.tx_amplitudes[t].real(), frame.tx_amplitudes[t].imag(),
                                  run.eve_outcomes[t].real(), run.eve_outcomes[t].imag()});
        out.files.emplace_back("transmit.json", j.dump() + "\n");
    }
    return out;
}

CommandOutput cmd_detect(const RunConfig& cfg) {
    modem::Y00Config ycfg = cfg.y00;
    ycfg.spec_s = cfg.detect.lfsr_s;
    ycfg.spec_dx = cfg.detect.lfsr_dx;
    if (cfg.detect.alpha0) ycfg.alpha0 = *cfg.detect.alpha0;
    const BitString x = seeded_bits(cfg.master_seed, kDetectPlaintext, cfg.detect.plaintext_slots);

    const auto ens = qd::build_ensemble(ycfg, x, {}, cfg.detect.max_keyspace_bits);
    const auto ms = qd::srm(ens);
    const auto d = static_cast<double>(ens.dim());
    const double success = qd::success_probability(ens, ms);
    const double bound = qd::overlap_bound(ms);
    const auto res = qd::optimality_residuals(ens, ms);
    const auto [omin, omax] = qd::offdiag_overlap_range(ens);
    const double binary_bound = 2.0 / d * qd::helstrom_binary(0.5, 0.5, std::min(1.0, omax * omax));
    double worst_row = 0.0;
    for (Eigen::Index i = 0; i < ms.cond_prob.rows(); ++i)
        worst_row = std::max(worst_row, std::abs(ms.cond_prob.row(i).sum() - 1.0));

    const std::vector<std::pair<std::string, std::string>> fields = {
        {"dimension", std::to_string(ens.dim())},
        {"keyspace_bits", std::to_string(ycfg.spec_s.width + ycfg.spec_dx.width)},
        {"plaintext_slots", std::to_string(x.size())},
        {"alpha0", num(ycfg.alpha0)},
        {"eta", num(ycfg.eta)},
        {"success_probability", num(success)},
        {"guessing_floor", num(1.0 / d)},
        {"floor_margin", num(success - 1.0 / d)},
        {"overlap_bound", num(bound)},
        {"pairwise_residual", num(res.pairwise_residual)},
        {"psd_deficit", num(res.psd_deficit)},
        {"induced_prior_distance", num(res.induced_prior_distance)},
        {"min_overlap", num(omin)},
        {"max_overlap", num(omax)},
        {"duplicate_pairs", std::to_string(ens.duplicates.size())},
        {"fail_probability", num(1.0 - success)},
        {"binary_fail_bound", num(binary_bound)},
        {"completeness_error", num(worst_row)},
    };

    CommandOutput out;
    for (const auto& [k, v] : fields) out.report += fmt::format("{:<24} {}\n", k, v);
    if (cfg.format == "csv") {
        std::vector<std::string> head, vals;
        for (const auto& [k, v] : fields) {
            head.push_back(k);
            vals.push_back(v);
        }
        out.files.emplace_back("detect.csv", csv(head, {vals}));
    } else {
        json j;
        for (const auto& [k, v] : fields) j[k] = json::parse(v);
        out.files.emplace_back("detect.json", j.dump(2) + "\n");
    }
    return out;
}

CommandOutput cmd_kpa_curve(const RunConfig& cfg, bool check) {
    const auto grid = kpa::log_spaced_grid(cfg.attack.n_min, cfg.attack.n_max, cfg.attack.n_count);
    const int kb = cfg.attack.keyspace_bits;
    const std::vector<std::string> header{"p_log2", "keyspace_bits", "N", "n_th", "n_th_floor", "p_fail", "p_success"};

    auto row_of = [&](const kpa::AttackCurve& c, const kpa::CurvePoint& pt) {
        return std::vector<std::string>{num(c.p_log2), std::to_string(kb), std::to_string(pt.N), num(pt.n_th),
                                        std::to_string(pt.n_th_floor), num(pt.p_fail), num(pt.p_success)};
    };
    auto json_of = [&](const kpa::AttackCurve& c, const kpa::CurvePoint& pt) {
        return json{{"p_log2", c.p_log2}, {"keyspace_bits", kb},        {"N", pt.N},
                    {"n_th", pt.n_th},    {"n_th_floor", pt.n_th_floor}, {"p_fail", pt.p_fail},
                    {"p_success", pt.p_success}};
    };

    double max_dev = 0.0;
    std::size_t floor_mismatch = 0;
    std::size_t checked = 0;
    auto compare = [&](double p, const kpa::CurvePoint& pt) {
        const auto ref = oracle::repetition_reference(p, kb, pt.N);
        auto dev = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), DBL_MIN); };
        max_dev = std::max({max_dev, dev(pt.p_success, ref.p_success), dev(pt.p_fail, ref.p_fail)});
        if (ref.n_th_floor != pt.n_th_floor) ++floor_mismatch;
        ++checked;
    };

    CommandOutput out;
    std::string& r = out.report;
    for (int e : cfg.attack.p_exponents) {
        const double p = std::exp2(-e);
        const auto curve = kpa::success_curve(p, kb, grid);
        std::vector<std::vector<std::string>> rows;
        json pts = json::array();
        for (const auto& pt : curve.points) {
            rows.push_back(row_of(curve, pt));
            pts.push_back(json_of(curve, pt));
            if (check) compare(p, pt);
        }
        const auto& last = curve.points.back();
        r += fmt::format("p = 2^-{}: {} points, N {}..{}, Pr(Success) at N = {}: {}\n", e, curve.points.size(),
                         grid.front(), grid.back(), last.N, num(last.p_success));
        if (cfg.format == "csv") out.files.emplace_back(fmt::format("kpa_curve_p{}.csv", e), csv(header, rows));
        else out.files.emplace_back(fmt::format("kpa_curve_p{}.json", e), pts.dump(2) + "\n");
    }

    std::vector<std::vector<std::string>> spot_rows;
    json spot_json = json::array();
    for (const auto& [e, n] : cfg.attack.spot_points) {
        const double p = std::exp2(-e);
        const std::vector<std::int64_t> g{n};
        const auto c = kpa::success_curve(p, kb, g);
        const auto& pt = c.points.front();
        spot_rows.push_back(row_of(c, pt));
        spot_json.push_back(json_of(c, pt));
        if (check) compare(p, pt);
        r += fmt::format("spot p = 2^-{}, N = {}: n_th {}, floor {}, Pr(Success) {}\n", e, n, num(pt.n_th),
                         pt.n_th_floor, num(pt.p_success));
    }
    if (!spot_rows.empty()) {
        if (cfg.format == "csv") out.files.emplace_back("kpa_spot.csv", csv(header, spot_rows));
        else out.files.emplace_back("kpa_spot.json", spot_json.dump(2) + "\n");
    }

    // p = 2^-16 at N = 10^4 is often quoted as near-certain recovery; the
    // threshold model says otherwise.
    {
        const double p = std::exp2(-16);
        const std::vector<std::int64_t> g{10'000};
        const auto c = kpa::success_curve(p, kb, g);
        const auto need = static_cast<std::int64_t>(std::ceil(std::log(0.01) / std::log1p(-p)));
        const std::vector<std::int64_t> g99{need};
        const auto c99 = kpa::success_curve(p, kb, g99);
        r += fmt::format(
            "note: p = 2^-16, N = 10^4 gives Pr(Success) = {:.5f} (floor {}), not near 1; Pr(Success) reaches 0.99 "
            "only at N = {} (floor {}, Pr(Success) = {:.5f}). Claims of near-certain recovery at N = 10^4 do not "
            "follow from this model.\n",
            c.points[0].p_success, c.points[0].n_th_floor, need, c99.points[0].n_th_floor, c99.points[0].p_success);
    }

    if (check) {
        const bool ok = max_dev <= 1e-6 && floor_mismatch == 0;
        r += fmt::format("check: {} points against the multiple-precision oracle, max relative deviation {:.3e}, "
                         "floor mismatches {} -> {}\n",
                         checked, max_dev, floor_mismatch, ok ? "PASS" : "FAIL");
        out.ok = ok;
    }
    return out;
}

void write_outputs(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::pair<fs::path, fs::path>> staged;
    auto cleanup = [&] {
        std::error_code ec;
        for (const auto& [tmp, dst] : staged) fs::remove(tmp, ec);
    };
    try {
        for (const auto& [name, body] : files) {
            const fs::path dst = dir / name;
            const fs::path tmp = dir / fmt::format(".{}.tmp.{}", name, ::getpid());
            staged.emplace_back(tmp, dst);
            std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
            f.write(body.data(), static_cast<std::streamsize>(body.size()));
            f.close();
            if (!f) throw std::runtime_error("failed to write " + tmp.string());
        }
        for (const auto& [tmp, dst] : staged) fs::rename(tmp, dst);
    } catch (...) {
        cleanup();
        throw;
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Y00 quantum stream cipher simulator and security evaluator"};
    app.require_subcommand(1);
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string format;
    bool check = false;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed override");
    app.add_option("--out", out_dir, "output directory override");
    app.add_option("--format", format, "output format override")->check(CLI::IsMember({"csv", "json"}));

    auto* secrecy = app.add_subcommand("secrecy", "guessing secrecy of toy ciphers and LFSR known-plaintext sweep");
    auto* transmit = app.add_subcommand("transmit", "simulate a noisy link and dump the frame");
    auto* detect = app.add_subcommand("detect", "collective-measurement analysis of a toy key space");
    auto* curve = app.add_subcommand("kpa-curve", "repetition-attack success curves");
    auto* show = app.add_subcommand("show-config", "print the effective configuration");
    curve->add_flag("--check", check, "compare against the multiple-precision oracle");
    for (auto* sub : {secrecy, transmit, detect, curve, show}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
        if (seed) cfg.master_seed = *seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (!format.empty()) cfg.format = format;
        cfg.validate();

        if (show->parsed()) {
            std::cout << dump_config(cfg);
            return 0;
        }
        CommandOutput result;
        if (secrecy->parsed()) result = cmd_secrecy(cfg);
        else if (transmit->parsed()) result = cmd_transmit(cfg);
        else if (detect->parsed()) result = cmd_detect(cfg);
        else result = cmd_kpa_curve(cfg, check);

        std::cout << result.report;
        if (!result.ok) return 1;
        write_outputs(cfg.out_dir, result.files);
        for (const auto& [name, body] : result.files)
            std::cout << "wrote " << (std::filesystem::path(cfg.out_dir) / name).string() << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const TooLarge& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace y00::cli
