#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hammersim {

struct DramGeometry {
    std::uint32_t banks_per_chip = 1;
    std::uint32_t rows_per_bank = 1u << 16;
    std::uint32_t row_size_bits = 65536;

    /// Throws ConfigError unless all counts are >= 1, rows_per_bank >= 5 and
    /// row_size_bits is a multiple of 8.
    void validate() const;
};

struct RowId {
    std::uint32_t bank = 0;
    std::uint32_t row = 0;

    auto operator<=>(const RowId&) const = default;
};

/// Fixed-length bit vector holding the contents of one DRAM row.
class RowData {
public:
    RowData() = default;
    explicit RowData(std::size_t bits, bool fill = false);

    /// Builds a row by repeating a hex byte pattern ("0xFF", "a5", "0xDEADBEEF")
    /// until `bits` cells are filled. Byte order follows the string; within a
    /// byte the least significant bit lands in the lowest cell index.
    static RowData from_hex(std::string_view hex, std::size_t bits);

    std::size_t size() const noexcept { return bits_; }
    bool get(std::size_t bit) const;
    void set(std::size_t bit, bool value);
    void flip(std::size_t bit);
    std::size_t popcount() const noexcept;
    std::span<const std::uint64_t> words() const noexcept { return words_; }

    bool operator==(const RowData&) const = default;

private:
    std::vector<std::uint64_t> words_;
    std::size_t bits_ = 0;
};

/// Hamming distance between two rows. Throws std::invalid_argument on length mismatch.
std::size_t count_bitflips(const RowData& before, const RowData& after);

/// Bijection between logical row indices and physical row positions in a bank.
class PhysicalMap {
public:
    PhysicalMap() = default;
    static PhysicalMap identity(std::uint32_t rows);
    static PhysicalMap from_pairs(std::uint32_t rows,
                                  std::span<const std::pair<std::uint32_t, std::uint32_t>> pairs);
    /// Text file, one "logical physical" pair per line; '#' starts a comment.
    /// Rows not listed map to themselves. Throws ConfigError if the result is
    /// not a bijection.
    static PhysicalMap load(const std::filesystem::path& path, std::uint32_t rows);

    std::uint32_t rows() const noexcept { return static_cast<std::uint32_t>(to_phys_.size()); }
    std::uint32_t to_physical(std::uint32_t logical) const;
    std::uint32_t to_logical(std::uint32_t physical) const;

private:
    std::vector<std::uint32_t> to_phys_;
    std::vector<std::uint32_t> to_log_;
};

/// Logical rows whose physical position is exactly `distance` away from
/// `row`'s physical position. Edge rows yield fewer entries.
std::vector<RowId> physical_neighbors(const PhysicalMap& map, RowId row, std::uint32_t distance);

/// Same, for physical coordinates with no remapping.
std::vector<RowId> adjacent_rows(std::uint32_t rows_per_bank, RowId row, std::uint32_t distance);

enum class RowRole { Aggressor, Victim };

/// Contents of the rows an attack touches. Rows are stored sparsely; a row
/// that has never been tracked reads as the victim pattern.
class DramArrayState {
public:
    const DramGeometry& geometry() const noexcept { return geometry_; }
    RowId target() const noexcept { return target_; }

    /// X-2 .. X+2 plus any rows added with track().
    std::vector<RowId> tracked_rows() const;
    bool is_tracked(RowId row) const;
    void track(RowId row);

    RowRole role(RowId row) const;
    const RowData& initial(RowId row) const;
    const RowData& current(RowId row) const;

    /// The value a disturbed cell would take, or nullopt if the direction rule
    /// forbids flipping it. The rule looks at the same column in the
    /// distance-1 rows that hold the aggressor role: the cell can only move
    /// toward their majority value. A tie, or no aggressor neighbour, allows
    /// either direction.
    std::optional<bool> flip_target(RowId row, std::size_t bit) const;

    /// Applies disturbance to the given bit positions, honouring the direction
    /// rule. Returns how many cells changed.
    std::size_t disturb(RowId row, std::span<const std::uint32_t> bits);

    /// Hamming distance between the current and the initial contents.
    std::size_t net_flips(RowId row) const;

private:
    friend DramArrayState init_attack_layout(const DramGeometry&, RowId, const RowData&,
                                             const RowData&);

    struct Entry {
        RowRole role = RowRole::Victim;
        RowData initial;
        RowData current;
    };

    const Entry* find(RowId row) const;

    DramGeometry geometry_;
    RowId target_;
    RowData victim_pattern_;
    std::map<RowId, Entry> rows_;
};

/// Writes the attack layout: X+-1 and X+-2 get the aggressor pattern, X the
/// victim pattern. Throws LayoutError unless 2 <= X <= rows_per_bank-3.
DramArrayState init_attack_layout(const DramGeometry& geometry, RowId target,
                                  const RowData& aggressor_pattern, const RowData& victim_pattern);

} // namespace hammersim
