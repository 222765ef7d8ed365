#include "hammersim/config.hpp"

#include "hammersim/attack.hpp"
#include "hammersim/defense.hpp"
#include "hammersim/error.hpp"
#include "hammersim/trace_engine.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hammersim {

std::string trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(std::string_view text, std::string_view what)
{
    std::string t = trim(text);
    auto fail = [&] { return ConfigError(std::string(what) + ": cannot parse '" + t + "' as a number"); };
    if (t.empty()) throw fail();
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();

    double scale = 1.0;
    switch (t.back()) {
    case 'k': case 'K': scale = 1e3; break;
    case 'M': scale = 1e6; break;
    case 'G': scale = 1e9; break;
    default: break;
    }
    if (scale != 1.0) t.pop_back();

    double v = 0;
    const char* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw fail();
    return v * scale;
}

std::uint64_t parse_uint(std::string_view text, std::string_view what)
{
    const double v = parse_double(text, what);
    if (!(v >= 0) || v != std::floor(v) || v > 1.8e19)
        throw ConfigError(std::string(what) + ": expected a non-negative integer, got '" +
                          trim(text) + "'");
    return static_cast<std::uint64_t>(v);
}

KeyValueConfig KeyValueConfig::parse(std::string_view text)
{
    KeyValueConfig kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (!kv.values_.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return kv;
}

KeyValueConfig KeyValueConfig::load(const std::string& path)
{
    try {
        return parse(read_file(path));
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const
{
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const
{
    return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const
{
    auto v = find(key);
    return v ? parse_double(*v, key) : fallback;
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const
{
    auto v = find(key);
    return v ? parse_uint(*v, key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const
{
    auto v = find(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + *v + "'");
}

void KeyValueConfig::require_known(std::initializer_list<std::string_view> known) const
{
    for (const auto& [key, _] : values_) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown key '" + key + "'");
    }
}

namespace {

std::uint32_t get_u32(const KeyValueConfig& kv, const std::string& key, std::uint32_t fallback)
{
    const auto v = kv.get_uint(key, fallback);
    if (v > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(key + ": value too large");
    return static_cast<std::uint32_t>(v);
}

} // namespace

AttackConfig attack_from_config(const KeyValueConfig& kv)
{
    kv.require_known({"model", "bank", "row", "S", "T", "aggressor_pattern", "victim_pattern",
                      "interleaving", "banks_per_chip", "rows_per_bank", "row_size_bits"});
    AttackConfig c;
    c.geometry.banks_per_chip = get_u32(kv, "banks_per_chip", c.geometry.banks_per_chip);
    c.geometry.rows_per_bank = get_u32(kv, "rows_per_bank", c.geometry.rows_per_bank);
    c.geometry.row_size_bits = get_u32(kv, "row_size_bits", c.geometry.row_size_bits);
    c.geometry.validate();
    c.target.bank = get_u32(kv, "bank", 0);
    c.target.row = get_u32(kv, "row", c.target.row);
    c.S = kv.get_uint("S", 0);
    c.T = kv.get_uint("T", 0);
    c.model = kv.has("model") ? parse_attack_model(*kv.find("model"))
                              : AttackConfig::model_for(c.S, c.T);
    if (auto p = kv.find("aggressor_pattern"))
        c.aggressor_pattern = RowData::from_hex(*p, c.geometry.row_size_bits);
    if (auto p = kv.find("victim_pattern"))
        c.victim_pattern = RowData::from_hex(*p, c.geometry.row_size_bits);
    if (auto p = kv.find("interleaving")) c.interleaving = parse_interleaving(*p);
    c.apply_default_patterns();
    c.validate();
    return c;
}

TimingParams timing_from_config(const KeyValueConfig& kv)
{
    kv.require_known({"tck_ns", "tras_ck", "trp_ck", "sleep_ck", "trefw_ms", "refresh_enabled"});
    TimingParams t;
    t.tck_ns = kv.get_double("tck_ns", t.tck_ns);
    t.tras_ck = get_u32(kv, "tras_ck", t.tras_ck);
    t.trp_ck = get_u32(kv, "trp_ck", t.trp_ck);
    t.sleep_ck = get_u32(kv, "sleep_ck", t.sleep_ck);
    t.trefw_ms = kv.get_double("trefw_ms", t.trefw_ms);
    t.refresh_enabled = kv.get_bool("refresh_enabled", t.refresh_enabled);
    t.validate();
    return t;
}

DefenseConfig defense_from_config(const KeyValueConfig& kv)
{
    kv.require_known({"kind", "t_mac", "group_size", "num_counters", "reset_on_nrr", "name"});
    DefenseConfig d;
    d.kind = parse_tracker_kind(kv.get_string("kind", "PerRowCounter"));
    d.policy = parse_mac_policy(kv.get_string("t_mac", "unlimited"));
    d.group_size = get_u32(kv, "group_size", d.group_size);
    d.num_counters = get_u32(kv, "num_counters", d.num_counters);
    d.reset_on_nrr = kv.get_bool("reset_on_nrr", d.reset_on_nrr);
    d.name = kv.get_string("name", "");
    d.validate();
    return d;
}

} // namespace hammersim
