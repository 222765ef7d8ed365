#include "hammersim/dram_model.hpp"

#include "hammersim/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hammersim {

void DramGeometry::validate() const
{
    if (banks_per_chip < 1) throw ConfigError("geometry: banks_per_chip must be >= 1");
    if (rows_per_bank < 5)
        throw ConfigError("geometry: rows_per_bank must be >= 5 to fit an X+-2 layout");
    if (row_size_bits < 8 || row_size_bits % 8 != 0)
        throw ConfigError("geometry: row_size_bits must be a positive multiple of 8");
}

// ---------------------------------------------------------------------------
// RowData

RowData::RowData(std::size_t bits, bool fill)
    : words_((bits + 63) / 64, fill ? ~std::uint64_t{0} : 0), bits_(bits)
{
    if (fill && bits % 64 != 0) words_.back() &= (std::uint64_t{1} << (bits % 64)) - 1;
}

RowData RowData::from_hex(std::string_view hex, std::size_t bits)
{
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    std::string digits;
    for (char c : hex) {
        if (c == '_' || c == '\'') continue;
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw ConfigError("row pattern: invalid hex digit '" + std::string(1, c) + "'");
        digits.push_back(c);
    }
    if (digits.empty() || digits.size() % 2 != 0)
        throw ConfigError("row pattern: need a whole number of hex bytes");

    std::vector<std::uint8_t> bytes;
    for (std::size_t i = 0; i < digits.size(); i += 2)
        bytes.push_back(static_cast<std::uint8_t>(std::stoul(digits.substr(i, 2), nullptr, 16)));

    RowData row(bits);
    for (std::size_t b = 0; b < bits; ++b) {
        const std::uint8_t byte = bytes[(b / 8) % bytes.size()];
        if ((byte >> (b % 8)) & 1u) row.set(b, true);
    }
    return row;
}

bool RowData::get(std::size_t bit) const
{
    if (bit >= bits_) throw std::out_of_range("RowData::get: bit out of range");
    return (words_[bit / 64] >> (bit % 64)) & 1u;
}

void RowData::set(std::size_t bit, bool value)
{
    if (bit >= bits_) throw std::out_of_range("RowData::set: bit out of range");
    const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
    if (value)
        words_[bit / 64] |= mask;
    else
        words_[bit / 64] &= ~mask;
}

void RowData::flip(std::size_t bit)
{
    if (bit >= bits_) throw std::out_of_range("RowData::flip: bit out of range");
    words_[bit / 64] ^= std::uint64_t{1} << (bit % 64);
}

std::size_t RowData::popcount() const noexcept
{
    std::size_t n = 0;
    for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::size_t count_bitflips(const RowData& before, const RowData& after)
{
    if (before.size() != after.size())
        throw std::invalid_argument("count_bitflips: rows differ in length");
    auto a = before.words();
    auto b = after.words();
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
    return n;
}

// ---------------------------------------------------------------------------
// PhysicalMap

PhysicalMap PhysicalMap::identity(std::uint32_t rows)
{
    PhysicalMap m;
    m.to_phys_.resize(rows);
    for (std::uint32_t i = 0; i < rows; ++i) m.to_phys_[i] = i;
    m.to_log_ = m.to_phys_;
    return m;
}

PhysicalMap PhysicalMap::from_pairs(std::uint32_t rows,
                                    std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs)
{
    PhysicalMap m = identity(rows);
    std::vector<bool> seen_log(rows, false);
    for (auto [logical, physical] : pairs) {
        if (logical >= rows || physical >= rows)
            throw ConfigError("physical map: row index out of range");
        if (seen_log[logical])
            throw ConfigError("physical map: logical row " + std::to_string(logical) +
                              " listed twice");
        seen_log[logical] = true;
        m.to_phys_[logical] = physical;
    }
    std::vector<bool> hit(rows, false);
    for (std::uint32_t l = 0; l < rows; ++l) {
        const auto p = m.to_phys_[l];
        if (hit[p]) throw ConfigError("physical map: not a bijection (physical row " +
                                      std::to_string(p) + " used twice)");
        hit[p] = true;
        m.to_log_[p] = l;
    }
    return m;
}

PhysicalMap PhysicalMap::load(const std::filesystem::path& path, std::uint32_t rows)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("physical map: cannot open " + path.string());
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long logical = 0, physical = 0;
        if (!(ls >> logical)) continue;
        std::string rest;
        if (!(ls >> physical) || logical < 0 || physical < 0 || (ls >> rest))
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected 'logical physical'");
        pairs.emplace_back(static_cast<std::uint32_t>(logical), static_cast<std::uint32_t>(physical));
    }
    return from_pairs(rows, pairs);
}

std::uint32_t PhysicalMap::to_physical(std::uint32_t logical) const
{
    if (logical >= to_phys_.size()) throw std::out_of_range("PhysicalMap: logical row out of range");
    return to_phys_[logical];
}

std::uint32_t PhysicalMap::to_logical(std::uint32_t physical) const
{
    if (physical >= to_log_.size()) throw std::out_of_range("PhysicalMap: physical row out of range");
    return to_log_[physical];
}

std::vector<RowId> adjacent_rows(std::uint32_t rows_per_bank, RowId row, std::uint32_t distance)
{
    std::vector<RowId> out;
    if (distance == 0) return out;
    if (row.row >= distance) out.push_back({row.bank, row.row - distance});
    if (static_cast<std::uint64_t>(row.row) + distance < rows_per_bank)
        out.push_back({row.bank, row.row + distance});
    return out;
}

std::vector<RowId> physical_neighbors(const PhysicalMap& map, RowId row, std::uint32_t distance)
{
    const RowId phys{row.bank, map.to_physical(row.row)};
    std::vector<RowId> out;
    for (auto n : adjacent_rows(map.rows(), phys, distance))
        out.push_back({n.bank, map.to_logical(n.row)});
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// DramArrayState

DramArrayState init_attack_layout(const DramGeometry& geometry, RowId target,
                                  const RowData& aggressor_pattern, const RowData& victim_pattern)
{
    geometry.validate();
    if (target.bank >= geometry.banks_per_chip)
        throw LayoutError("layout: bank " + std::to_string(target.bank) + " out of range");
    if (target.row < 2 || static_cast<std::uint64_t>(target.row) + 2 >= geometry.rows_per_bank)
        throw LayoutError("layout: target row " + std::to_string(target.row) +
                          " leaves no room for X+-2 (need 2 <= X <= " +
                          std::to_string(geometry.rows_per_bank - 3) + ")");
    if (aggressor_pattern.size() != geometry.row_size_bits ||
        victim_pattern.size() != geometry.row_size_bits)
        throw LayoutError("layout: pattern length differs from row_size_bits");

    DramArrayState s;
    s.geometry_ = geometry;
    s.target_ = target;
    s.victim_pattern_ = victim_pattern;
    for (int d = -2; d <= 2; ++d) {
        const RowId r{target.bank, static_cast<std::uint32_t>(static_cast<int>(target.row) + d)};
        const bool aggressor = d != 0;
        const RowData& p = aggressor ? aggressor_pattern : victim_pattern;
        s.rows_[r] = {aggressor ? RowRole::Aggressor : RowRole::Victim, p, p};
    }
    return s;
}

const DramArrayState::Entry* DramArrayState::find(RowId row) const
{
    auto it = rows_.find(row);
    return it == rows_.end() ? nullptr : &it->second;
}

std::vector<RowId> DramArrayState::tracked_rows() const
{
    std::vector<RowId> out;
    out.reserve(rows_.size());
    for (const auto& [id, _] : rows_) out.push_back(id);
    return out;
}

bool DramArrayState::is_tracked(RowId row) const { return find(row) != nullptr; }

void DramArrayState::track(RowId row)
{
    if (row.bank >= geometry_.banks_per_chip || row.row >= geometry_.rows_per_bank)
        throw LayoutError("track: row out of range");
    rows_.try_emplace(row, Entry{RowRole::Victim, victim_pattern_, victim_pattern_});
}

RowRole DramArrayState::role(RowId row) const
{
    const Entry* e = find(row);
    return e ? e->role : RowRole::Victim;
}

const RowData& DramArrayState::initial(RowId row) const
{
    const Entry* e = find(row);
    return e ? e->initial : victim_pattern_;
}

const RowData& DramArrayState::current(RowId row) const
{
    const Entry* e = find(row);
    return e ? e->current : victim_pattern_;
}

std::optional<bool> DramArrayState::flip_target(RowId row, std::size_t bit) const
{
    const bool value = current(row).get(bit);
    int ones = 0, total = 0;
    for (auto n : adjacent_rows(geometry_.rows_per_bank, row, 1)) {
        if (role(n) != RowRole::Aggressor) continue;
        ++total;
        ones += current(n).get(bit) ? 1 : 0;
    }
    const int zeros = total - ones;
    if (ones == zeros) return !value;
    const bool majority = ones > zeros;
    if (majority == value) return std::nullopt;
    return majority;
}

std::size_t DramArrayState::disturb(RowId row, std::span<const std::uint32_t> bits)
{
    track(row);
    std::vector<std::uint32_t> to_flip;
    for (auto b : bits) {
        if (auto v = flip_target(row, b); v && *v != current(row).get(b)) to_flip.push_back(b);
    }
    RowData& cur = rows_.at(row).current;
    for (auto b : to_flip) cur.flip(b);
    return to_flip.size();
}

std::size_t DramArrayState::net_flips(RowId row) const
{
    const Entry* e = find(row);
    return e ? count_bitflips(e->initial, e->current) : 0;
}

} // namespace hammersim
