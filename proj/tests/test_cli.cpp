#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "y00/cli.hpp"
#include "y00/errors.hpp"

using namespace y00;
using namespace y00::cli;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> file_map(const CommandOutput& out) {
    return {out.files.begin(), out.files.end()};
}

// Rows of a CSV body, split on commas.
std::vector<std::vector<std::string>> parse_csv(const std::string& body) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(body);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string column(const std::string& body, const std::string& name, std::size_t row = 1) {
    const auto rows = parse_csv(body);
    for (std::size_t i = 0; i < rows[0].size(); ++i)
        if (rows[0][i] == name) return rows.at(row).at(i);
    FAIL("no column " << name);
    return {};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("y00cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

int run_tool(const std::string& args, const fs::path& cwd) {
    const std::string exe = Y00SIM_PATH;
    const std::string cmd = "cd '" + cwd.string() + "' && '" + exe + "' " + args + " >stdout.txt 2>stderr.txt";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig d = default_config();
    CHECK_NOTHROW(d.validate());
    CHECK(parse_config("{}").y00.M == 16);
    CHECK(dump_config(parse_config(dump_config(d))) == dump_config(d));

    const auto c = parse_config(R"({"y00": {"M": 8, "alpha0": 2.5, "slots": 1e3},
                                    "mapping": {"seed": 7},
                                    "attack": {"p_exponents": [16], "n_grid": {"min": 10, "max": 1000, "count": 5}},
                                    "seeds": {"master": 99}, "output": {"format": "json"}})");
    CHECK(c.y00.M == 8);
    CHECK(c.y00.alpha0 == 2.5);
    CHECK(c.slots == 1000);
    CHECK(c.y00.mapping.seed == std::optional<std::uint64_t>{7});
    CHECK(c.y00.mapping.M == 8);
    CHECK(c.attack.p_exponents == std::vector<int>{16});
    CHECK(c.master_seed == 99);
    CHECK(c.format == "json");
    CHECK(dump_config(parse_config(dump_config(c))) == dump_config(c));

    const auto p = parse_config(R"({"y00": {"M": 4}, "mapping": {"perm": [2, 0, 3, 1]}})");
    CHECK(p.y00.mapping.perm == std::vector<int>{2, 0, 3, 1});

    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"M": "16"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"M": 12}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"eta": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"slots": 0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"keys": {"k": "101"}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"keys": {"k": "00000000000000000"}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"y00": {"keys": {"k": "1012"}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"lfsr_s": {"width": 17, "taps": [3]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mapping": "random"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mapping": {"perm": [0, 0, 1, 2]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mapping": {"seed": 1, "perm": [0, 1]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"attack": {"p_exponents": [0]}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"attack": {"n_grid": {"min": 10, "max": 5}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"output": {"format": "xml"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"seeds": {"master": -1}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("cmd_secrecy") {
    const auto out = cmd_secrecy(default_config());
    const auto files = file_map(out);
    const auto rows = parse_csv(files.at("secrecy.csv"));
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] != "one_time_pad") continue;
        CHECK(std::abs(std::stod(rows[i][3]) - std::stod(rows[i][5])) <= 1e-12);
        CHECK(std::abs(std::stod(rows[i][4]) - std::stod(rows[i][5])) <= 1e-12);
        if (rows[i][2] == "uniform") CHECK(rows[i][3] == rows[i][5]);
    }
    CHECK(column(files.at("kpa_baseline.csv"), "recovery_probability") == "1");
    CHECK(column(files.at("kpa_baseline.csv"), "keys_tested") == "255");

    auto big = default_config();
    big.secrecy_lfsr = {13, {13, 4, 3, 1}};
    CHECK_THROWS_AS(cmd_secrecy(big), TooLarge);
}

TEST_CASE("cmd_transmit") {
    SUBCASE("noiseless link") {
        auto cfg = default_config();
        cfg.y00.het_sigma = 1e-9;
        const auto files = file_map(cmd_transmit(cfg));
        CHECK(column(files.at("transmit_summary.csv"), "bob_errors") == "0");
        CHECK(column(files.at("transmit_summary.csv"), "slots") == "100000");
        const auto frame = parse_csv(files.at("frame.csv"));
        CHECK(frame.size() == 100001);
        CHECK(frame[0] == std::vector<std::string>{"t", "basis", "dx", "x", "m", "re(tx)", "im(tx)",
                                                   "re(eve_outcome)", "im(eve_outcome)"});
    }
    SUBCASE("default amplitude follows the Gaussian tail") {
        const auto files = file_map(cmd_transmit(default_config()));
        const double ber = std::stod(column(files.at("transmit_summary.csv"), "bob_ber"));
        const double q = 0.5 * std::erfc(3.0 / std::sqrt(2.0));
        CHECK(std::abs(ber - q) <= 3.0 * std::sqrt(q * (1 - q) / 1e5));
    }
    SUBCASE("deterministic") {
        auto cfg = default_config();
        cfg.slots = 5000;
        CHECK(cmd_transmit(cfg).files == cmd_transmit(cfg).files);
        auto other = cfg;
        other.master_seed = 2;
        CHECK(cmd_transmit(cfg).files != cmd_transmit(other).files);
    }
    SUBCASE("cap") {
        auto cfg = default_config();
        cfg.slots = kMaxSlots + 1;
        CHECK_THROWS_AS(cmd_transmit(cfg), TooLarge);
    }
}

TEST_CASE("cmd_detect") {
    SUBCASE("well separated constellation") {
        auto cfg = default_config();
        cfg.detect.alpha0 = 30.0;
        const auto files = file_map(cmd_detect(cfg));
        const auto& body = files.at("detect.csv");
        CHECK(column(body, "dimension") == "64");
        CHECK(column(body, "duplicate_pairs") == "0");
        CHECK(std::abs(std::stod(column(body, "success_probability")) - 1.0) < 1e-12);
    }
    SUBCASE("zero amplitude") {
        auto cfg = default_config();
        cfg.detect.alpha0 = 0.0;
        const auto files = file_map(cmd_detect(cfg));
        CHECK(std::abs(std::stod(column(files.at("detect.csv"), "success_probability")) - 1.0 / 64) < 1e-10);
    }
    SUBCASE("key space above the cap") {
        auto cfg = default_config();
        cfg.detect.lfsr_s = {10, {10, 7}};
        cfg.detect.lfsr_dx = {10, {10, 7}};
        cfg.detect.max_keyspace_bits = 16;
        CHECK_THROWS_AS(cmd_detect(cfg), TooLarge);
    }
}

TEST_CASE("cmd_kpa_curve") {
    const auto out = cmd_kpa_curve(default_config(), true);
    CHECK(out.ok);
    CHECK(out.report.find("PASS") != std::string::npos);
    CHECK(out.report.find("0.14152") != std::string::npos);
    const auto files = file_map(out);
    for (int e : {8, 16, 32, 64}) {
        const auto rows = parse_csv(files.at("kpa_curve_p" + std::to_string(e) + ".csv"));
        CHECK(rows.size() == 61);
        CHECK(rows[0] == std::vector<std::string>{"p_log2", "keyspace_bits", "N", "n_th", "n_th_floor", "p_fail",
                                                  "p_success"});
        for (std::size_t i = 2; i < rows.size(); ++i) {
            CHECK(std::stoll(rows[i][2]) > std::stoll(rows[i - 1][2]));
            if (rows[i][4] == rows[i - 1][4]) CHECK(std::stod(rows[i][6]) >= std::stod(rows[i - 1][6]));
        }
    }
    const auto spot = parse_csv(files.at("kpa_spot.csv"));
    REQUIRE(spot.size() == 3);
    CHECK(spot[2][0] == "-64");
    CHECK(spot[2][2] == "10000000");
    CHECK(std::abs(std::stod(spot[2][6]) / 5.4210108624260528e-13 - 1.0) < 1e-9);
}

TEST_CASE("write_outputs leaves only the final files") {
    TempDir td;
    write_outputs(td.path / "nested", {{"a.csv", "x\n"}, {"b.csv", "y\n"}});
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(td.path / "nested")) names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    CHECK(names == std::vector<std::string>{"a.csv", "b.csv"});
    CHECK(slurp(td.path / "nested" / "a.csv") == "x\n");
}

TEST_CASE("tool: exit codes and no partial output") {
    TempDir td;
    CHECK(run_tool("kpa-curve --out ok", td.path) == 0);
    CHECK(fs::exists(td.path / "ok" / "kpa_curve_p64.csv"));
    CHECK(slurp(td.path / "stdout.txt").find("not near 1") != std::string::npos);

    write_text(td.path / "bad.json", "{ \"y00\": { \"M\": ");
    CHECK(run_tool("secrecy --config bad.json --out bad", td.path) == 2);
    CHECK(!fs::exists(td.path / "bad"));

    write_text(td.path / "unknown.json", R"({"y00": {"colour": 1}})");
    CHECK(run_tool("transmit --config unknown.json --out unk", td.path) == 2);
    CHECK(!fs::exists(td.path / "unk"));

    CHECK(run_tool("detect --config missing.json --out miss", td.path) == 2);
    CHECK(run_tool("no-such-command", td.path) == 2);
    CHECK(run_tool("", td.path) == 2);

    write_text(td.path / "big.json",
               R"({"detect": {"lfsr_s": {"width": 10, "taps": [10, 7]}, "lfsr_dx": {"width": 10, "taps": [10, 7]},
                   "max_keyspace_bits": 16}})");
    CHECK(run_tool("detect --config big.json --out big", td.path) == 3);
    CHECK(!fs::exists(td.path / "big"));
    CHECK(slurp(td.path / "stderr.txt").find("resource cap") != std::string::npos);

    CHECK(run_tool("--help", td.path) == 0);
    CHECK(run_tool("show-config", td.path) == 0);
    CHECK(parse_config(slurp(td.path / "stdout.txt")).y00.M == 16);
}

TEST_CASE("tool: reruns are byte-identical") {
    TempDir td;
    write_text(td.path / "cfg.json", R"({"y00": {"slots": 20000}, "seeds": {"master": 5}})");
    for (const char* cmd : {"secrecy", "transmit", "detect", "kpa-curve"}) {
        const std::string c = cmd;
        REQUIRE(run_tool(c + " --config cfg.json --out r1", td.path) == 0);
        REQUIRE(run_tool(c + " --config cfg.json --out r2", td.path) == 0);
        REQUIRE(run_tool(c + " --config cfg.json --out j --format json", td.path) == 0);
    }
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(td.path / "r1")) {
        CHECK(slurp(e.path()) == slurp(td.path / "r2" / e.path().filename()));
        ++compared;
    }
    CHECK(compared == 10);
    CHECK(fs::exists(td.path / "j" / "transmit.json"));
    CHECK(fs::exists(td.path / "j" / "detect.json"));

    REQUIRE(run_tool("transmit --config cfg.json --seed 6 --out r3", td.path) == 0);
    CHECK(slurp(td.path / "r1" / "frame.csv") != slurp(td.path / "r3" / "frame.csv"));
}
