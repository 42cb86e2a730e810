#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "y00/keystream.hpp"
#include "y00/y00_modem.hpp"

namespace y00::cli {

struct DetectSettings {
    std::optional<double> alpha0;  // falls back to y00.alpha0
    keystream::LfsrSpec lfsr_s{3, {3, 2}};
    keystream::LfsrSpec lfsr_dx{3, {3, 2}};
    std::size_t plaintext_slots = 8;
    int max_keyspace_bits = 10;
};

struct AttackSettings {
    std::vector<int> p_exponents{8, 16, 32, 64};
    int keyspace_bits = 256;
    std::int64_t n_min = 1;
    std::int64_t n_max = 1'000'000;
    int n_count = 60;
    std::vector<std::pair<int, std::int64_t>> spot_points{{16, 10'000}, {64, 10'000'000}};
};

struct RunConfig {
    modem::Y00Config y00;
    keystream::KeyPair keys;
    std::size_t slots = 100'000;
    keystream::LfsrSpec secrecy_lfsr{8, {8, 6, 5, 4}};  // register swept by the secrecy command
    DetectSettings detect;
    AttackSettings attack;
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
    std::string format = "csv";

    void validate() const;
};

inline constexpr std::size_t kMaxSlots = 10'000'000;

RunConfig default_config();

/// Overlays a JSON document on the defaults. Throws ConfigError on unknown
/// keys, wrong types or values that fail module validation.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form of a config (what `parse_config` accepts).
std::string dump_config(const RunConfig& cfg);

struct CommandOutput {
    std::string report;                                      // printed to stdout
    std::vector<std::pair<std::string, std::string>> files;  // name, contents
    bool ok = true;                                          // false: report only, no files
};

CommandOutput cmd_secrecy(const RunConfig& cfg);
CommandOutput cmd_transmit(const RunConfig& cfg);
CommandOutput cmd_detect(const RunConfig& cfg);
CommandOutput cmd_kpa_curve(const RunConfig& cfg, bool check);

/// Writes every file to a temporary name inside `dir`, then renames them into
/// place. Nothing is left behind if any write fails.
void write_outputs(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files);

/// Entry point of the y00sim tool; returns the process exit code
/// (0 ok, 1 failed check or internal error, 2 config error, 3 resource cap).
int run(int argc, char** argv);

}  // namespace y00::cli
