#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "y00/cli.hpp"
#include "y00/errors.hpp"

namespace y00::cli {

using nlohmann::json;

namespace {

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

std::int64_t as_int(const json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9.0e18) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(where + " must be an integer");
}

std::uint64_t as_u64(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const std::int64_t i = as_int(v, where);
    if (i < 0) throw ConfigError(where + " must be nonnegative");
    return static_cast<std::uint64_t>(i);
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

keystream::LfsrSpec as_lfsr(const json& v, const std::string& where) {
    allow_keys(v, where, {"width", "taps"});
    if (!v.contains("width") || !v.contains("taps")) throw ConfigError(where + " needs width and taps");
    keystream::LfsrSpec spec;
    spec.width = static_cast<int>(as_int(v["width"], where + ".width"));
    if (!v["taps"].is_array()) throw ConfigError(where + ".taps must be an array");
    for (const auto& t : v["taps"]) spec.taps.push_back(static_cast<int>(as_int(t, where + ".taps")));
    return spec;
}

BitString as_bits(const json& v, const std::string& where) {
    try {
        return bits_from_string(as_string(v, where));
    } catch (const RangeError& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

json lfsr_json(const keystream::LfsrSpec& s) { return {{"width", s.width}, {"taps", s.taps}}; }

}  // namespace

RunConfig default_config() {
    RunConfig c;
    c.y00.M = 16;
    c.y00.alpha0 = 3.0;
    c.y00.eta = 1.0;
    c.y00.het_sigma = 1.0;
    c.y00.spec_s = {17, {17, 14}};
    c.y00.spec_dx = {13, {13, 4, 3, 1}};
    c.y00.mapping = keystream::MappingTable::identity(16);
    c.keys.k = bits_from_string("10110011100011110");
    c.keys.dk = bits_from_string("1001101011101");
    return c;
}

void RunConfig::validate() const {
    try {
        y00.validate();
        if (keys.k.size() != static_cast<std::size_t>(y00.spec_s.width) ||
            keys.dk.size() != static_cast<std::size_t>(y00.spec_dx.width))
            throw ConfigError("key lengths must equal the register widths");
        auto nonzero = [](const BitString& b) {
            for (auto v : b)
                if (v) return true;
            return false;
        };
        if (!nonzero(keys.k) || !nonzero(keys.dk)) throw ConfigError("keys must not be all zero");
        if (slots < 1) throw ConfigError("y00.slots must be >= 1");
        secrecy_lfsr.validate();
        detect.lfsr_s.validate();
        detect.lfsr_dx.validate();
        if (detect.alpha0 && !(*detect.alpha0 >= 0.0 && std::isfinite(*detect.alpha0)))
            throw ConfigError("detect.alpha0 must be finite and >= 0");
        if (detect.plaintext_slots < 1) throw ConfigError("detect.plaintext_slots must be >= 1");
        if (detect.max_keyspace_bits < 1) throw ConfigError("detect.max_keyspace_bits must be >= 1");
        if (attack.p_exponents.empty()) throw ConfigError("attack.p_exponents is empty");
        for (int e : attack.p_exponents)
            if (e < 1 || e > 1074) throw ConfigError("attack.p_exponents entries must be in [1, 1074]");
        if (attack.keyspace_bits < 1 || attack.keyspace_bits > 1024)
            throw ConfigError("attack.keyspace_bits must be in [1, 1024]");
        if (attack.n_min < 1 || attack.n_max < attack.n_min || attack.n_count < 1)
            throw ConfigError("attack.n_grid needs 1 <= min <= max and count >= 1");
        for (const auto& [e, n] : attack.spot_points)
            if (e < 1 || e > 1074 || n < 1) throw ConfigError("attack.spot_points entries must be [exponent, N]");
        if (format != "csv" && format != "json") throw ConfigError("output.format must be csv or json");
        if (out_dir.empty()) throw ConfigError("output.dir is empty");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

RunConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig c = default_config();
    allow_keys(doc, "config", {"y00", "lfsr_s", "lfsr_dx", "mapping", "secrecy", "detect", "attack", "seeds", "output"});

    if (doc.contains("y00")) {
        const auto& y = doc["y00"];
        allow_keys(y, "y00", {"M", "alpha0", "eta", "het_sigma", "slots", "keys"});
        if (y.contains("M")) c.y00.M = static_cast<int>(as_int(y["M"], "y00.M"));
        if (y.contains("alpha0")) c.y00.alpha0 = as_double(y["alpha0"], "y00.alpha0");
        if (y.contains("eta")) c.y00.eta = as_double(y["eta"], "y00.eta");
        if (y.contains("het_sigma")) c.y00.het_sigma = as_double(y["het_sigma"], "y00.het_sigma");
        if (y.contains("slots")) {
            const std::int64_t s = as_int(y["slots"], "y00.slots");
            if (s < 1) throw ConfigError("y00.slots must be >= 1");
            c.slots = static_cast<std::size_t>(s);
        }
        if (y.contains("keys")) {
            allow_keys(y["keys"], "y00.keys", {"k", "dk"});
            if (y["keys"].contains("k")) c.keys.k = as_bits(y["keys"]["k"], "y00.keys.k");
            if (y["keys"].contains("dk")) c.keys.dk = as_bits(y["keys"]["dk"], "y00.keys.dk");
        }
    }
    if (doc.contains("lfsr_s")) c.y00.spec_s = as_lfsr(doc["lfsr_s"], "lfsr_s");
    if (doc.contains("lfsr_dx")) c.y00.spec_dx = as_lfsr(doc["lfsr_dx"], "lfsr_dx");

    c.y00.mapping = keystream::MappingTable::identity(c.y00.M >= 2 && (c.y00.M & (c.y00.M - 1)) == 0 ? c.y00.M : 2);
    if (doc.contains("mapping")) {
        const auto& m = doc["mapping"];
        try {
            if (m.is_string()) {
                if (m.get<std::string>() != "identity") throw ConfigError("mapping string must be \"identity\"");
            } else {
                allow_keys(m, "mapping", {"seed", "perm"});
                if (m.contains("seed") == m.contains("perm"))
                    throw ConfigError("mapping needs exactly one of seed or perm");
                if (m.contains("seed")) {
                    c.y00.mapping = keystream::MappingTable::seeded(c.y00.M, as_u64(m["seed"], "mapping.seed"));
                } else {
                    if (!m["perm"].is_array()) throw ConfigError("mapping.perm must be an array");
                    std::vector<int> perm;
                    for (const auto& v : m["perm"]) perm.push_back(static_cast<int>(as_int(v, "mapping.perm")));
                    c.y00.mapping = keystream::MappingTable::from_perm(std::move(perm));
                }
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(std::string("mapping: ") + e.what());
        }
    }

    if (doc.contains("secrecy")) {
        const auto& s = doc["secrecy"];
        allow_keys(s, "secrecy", {"lfsr"});
        if (s.contains("lfsr")) c.secrecy_lfsr = as_lfsr(s["lfsr"], "secrecy.lfsr");
    }

    if (doc.contains("detect")) {
        const auto& d = doc["detect"];
        allow_keys(d, "detect", {"alpha0", "lfsr_s", "lfsr_dx", "plaintext_slots", "max_keyspace_bits"});
        if (d.contains("alpha0")) c.detect.alpha0 = as_double(d["alpha0"], "detect.alpha0");
        if (d.contains("lfsr_s")) c.detect.lfsr_s = as_lfsr(d["lfsr_s"], "detect.lfsr_s");
        if (d.contains("lfsr_dx")) c.detect.lfsr_dx = as_lfsr(d["lfsr_dx"], "detect.lfsr_dx");
        if (d.contains("plaintext_slots")) {
            const std::int64_t n = as_int(d["plaintext_slots"], "detect.plaintext_slots");
            if (n < 1) throw ConfigError("detect.plaintext_slots must be >= 1");
            c.detect.plaintext_slots = static_cast<std::size_t>(n);
        }
        if (d.contains("max_keyspace_bits"))
            c.detect.max_keyspace_bits = static_cast<int>(as_int(d["max_keyspace_bits"], "detect.max_keyspace_bits"));
    }

    if (doc.contains("attack")) {
        const auto& a = doc["attack"];
        allow_keys(a, "attack", {"p_exponents", "keyspace_bits", "n_grid", "spot_points"});
        if (a.contains("p_exponents")) {
            if (!a["p_exponents"].is_array()) throw ConfigError("attack.p_exponents must be an array");
            c.attack.p_exponents.clear();
            for (const auto& v : a["p_exponents"])
                c.attack.p_exponents.push_back(static_cast<int>(as_int(v, "attack.p_exponents")));
        }
        if (a.contains("keyspace_bits"))
            c.attack.keyspace_bits = static_cast<int>(as_int(a["keyspace_bits"], "attack.keyspace_bits"));
        if (a.contains("n_grid")) {
            const auto& g = a["n_grid"];
            allow_keys(g, "attack.n_grid", {"min", "max", "count"});
            if (g.contains("min")) c.attack.n_min = as_int(g["min"], "attack.n_grid.min");
            if (g.contains("max")) c.attack.n_max = as_int(g["max"], "attack.n_grid.max");
            if (g.contains("count")) c.attack.n_count = static_cast<int>(as_int(g["count"], "attack.n_grid.count"));
        }
        if (a.contains("spot_points")) {
            if (!a["spot_points"].is_array()) throw ConfigError("attack.spot_points must be an array");
            c.attack.spot_points.clear();
            for (const auto& v : a["spot_points"]) {
                if (!v.is_array() || v.size() != 2) throw ConfigError("attack.spot_points entries must be [exponent, N]");
                c.attack.spot_points.emplace_back(static_cast<int>(as_int(v[0], "attack.spot_points")),
                                                  as_int(v[1], "attack.spot_points"));
            }
        }
    }

    if (doc.contains("seeds")) {
        allow_keys(doc["seeds"], "seeds", {"master"});
        if (doc["seeds"].contains("master")) c.master_seed = as_u64(doc["seeds"]["master"], "seeds.master");
    }
    if (doc.contains("output")) {
        allow_keys(doc["output"], "output", {"dir", "format"});
        if (doc["output"].contains("dir")) c.out_dir = as_string(doc["output"]["dir"], "output.dir");
        if (doc["output"].contains("format")) c.format = as_string(doc["output"]["format"], "output.format");
    }

    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
    json mapping;
    if (c.y00.mapping.seed) mapping = {{"seed", *c.y00.mapping.seed}};
    else if (c.y00.mapping.perm == keystream::MappingTable::identity(c.y00.mapping.M).perm) mapping = "identity";
    else mapping = {{"perm", c.y00.mapping.perm}};

    json detect = {{"lfsr_s", lfsr_json(c.detect.lfsr_s)},
                   {"lfsr_dx", lfsr_json(c.detect.lfsr_dx)},
                   {"plaintext_slots", c.detect.plaintext_slots},
                   {"max_keyspace_bits", c.detect.max_keyspace_bits}};
    if (c.detect.alpha0) detect["alpha0"] = *c.detect.alpha0;

    json spots = json::array();
    for (const auto& [e, n] : c.attack.spot_points) spots.push_back({e, n});

    const json doc = {
        {"y00",
         {{"M", c.y00.M},
          {"alpha0", c.y00.alpha0},
          {"eta", c.y00.eta},
          {"het_sigma", c.y00.het_sigma},
          {"slots", c.slots},
          {"keys", {{"k", bits_to_string(c.keys.k)}, {"dk", bits_to_string(c.keys.dk)}}}}},
        {"lfsr_s", lfsr_json(c.y00.spec_s)},
        {"lfsr_dx", lfsr_json(c.y00.spec_dx)},
        {"mapping", mapping},
        {"secrecy", {{"lfsr", lfsr_json(c.secrecy_lfsr)}}},
        {"detect", detect},
        {"attack",
         {{"p_exponents", c.attack.p_exponents},
          {"keyspace_bits", c.attack.keyspace_bits},
          {"n_grid", {{"min", c.attack.n_min}, {"max", c.attack.n_max}, {"count", c.attack.n_count}}},
          {"spot_points", spots}}},
        {"seeds", {{"master", c.master_seed}}},
        {"output", {{"dir", c.out_dir}, {"format", c.format}}},
    };
    return doc.dump(2) + "\n";
}

}  // namespace y00::cli
