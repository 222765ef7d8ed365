#pragma once

#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hammersim {

struct AttackConfig;
struct TimingParams;
struct DefenseConfig;

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string read_file(const std::string& path);

/// Parses a number, accepting "inf" and SI suffixes k/M/G ("1.6M" = 1.6e6).
/// Throws ConfigError naming `what` on malformed input.
double parse_double(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);

/// "key = value" lines; '#' starts a comment. Keys are case-sensitive and may
/// appear once.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> find(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws ConfigError for any key outside `known`.
    void require_known(std::initializer_list<std::string_view> known) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Loaders for the text config files used by the CLI. Unknown keys are errors.

/// Keys: model, bank, row, S, T, aggressor_pattern, victim_pattern,
/// interleaving, banks_per_chip, rows_per_bank, row_size_bits. model defaults
/// to the one implied by S and T.
AttackConfig attack_from_config(const KeyValueConfig& kv);

/// Keys: tck_ns, tras_ck, trp_ck, sleep_ck, trefw_ms, refresh_enabled.
TimingParams timing_from_config(const KeyValueConfig& kv);

/// Keys: kind, t_mac (count, "unlimited" or "untested"), group_size,
/// num_counters, reset_on_nrr, name.
DefenseConfig defense_from_config(const KeyValueConfig& kv);

} // namespace hammersim
