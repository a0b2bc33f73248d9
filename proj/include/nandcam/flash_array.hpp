/*
 * Copyright 2026 The nandcam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file flash_array.hpp
 * @brief Behavioral model of one NAND flash block with transposed ternary search.
 *
 * Cells are single-level. A logical 1 is a low-threshold (erased) cell, a logical 0 a
 * programmed high-threshold cell. In search mode every element occupies one bitline; element
 * bit i is held by the cell pair on rows (2i, 2i+1), row 2i carrying the bit and row 2i+1 its
 * complement. The last row of the block is the valid row: a conducting (erased) cell marks the
 * element valid, and deletion programs that single cell.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nandcam/bitvector.hpp"

namespace nandcam {

enum class CellState : std::uint8_t { LowVth, HighVth };

enum class BlockMode : std::uint8_t { Conventional, SearchSLC };

enum class Trit : std::uint8_t { Zero, One, DontCare };

/// Sequence of {0, 1, X}. Used both as a stored element (X forbidden) and as a search key.
class TernaryValue {
 public:
  TernaryValue() = default;
  explicit TernaryValue(std::vector<Trit> bits) : bits_(std::move(bits)) {}

  /// Parses "01X0"; '0', '1', 'X'/'x'/'*' are accepted. Position 0 is the first character.
  static TernaryValue parse(std::string_view text);
  /// `width` low bits of `value`, most significant first.
  static TernaryValue from_uint(std::uint64_t value, std::size_t width);
  static TernaryValue wildcard(std::size_t width) {
    return TernaryValue(std::vector<Trit>(width, Trit::DontCare));
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  Trit operator[](std::size_t i) const { return bits_[i]; }
  Trit& operator[](std::size_t i) { return bits_[i]; }
  std::span<const Trit> bits() const noexcept { return bits_; }

  bool is_binary() const noexcept;
  /// Pads with DontCare up to `width` (no-op if already that long).
  TernaryValue padded(std::size_t width) const;
  /// Sub-range [offset, offset+len), clipped; missing positions become DontCare.
  TernaryValue slice(std::size_t offset, std::size_t len) const;
  /// Concatenation, used for fused multi-column keys.
  TernaryValue operator+(const TernaryValue& rhs) const;
  /// Ternary match of this key against a binary element: every non-X position must agree.
  /// Positions beyond the element length count as matched.
  bool matches(const TernaryValue& element) const;

  std::string to_string() const;
  friend bool operator==(const TernaryValue&, const TernaryValue&) = default;

 private:
  std::vector<Trit> bits_;
};

using SearchKey = TernaryValue;

class FlashBlock {
 public:
  static constexpr std::size_t kDefaultRows = 196;
  static constexpr std::size_t kDefaultPageBytes = 16 * 1024;

  FlashBlock(std::size_t rows = kDefaultRows, std::size_t page_bytes = kDefaultPageBytes,
             BlockMode mode = BlockMode::Conventional, bool write_inversion = true);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t bitlines() const noexcept { return bitlines_; }
  std::size_t page_bytes() const noexcept { return bitlines_ / 8; }
  BlockMode mode() const noexcept { return mode_; }
  bool erased() const noexcept { return erased_; }
  bool write_inversion() const noexcept { return write_inversion_; }

  /// floor(rows / 2) - 1: one bit pair is given up for the valid row.
  std::size_t native_element_size() const noexcept;
  std::size_t valid_row() const noexcept { return rows_ - 1; }

  CellState cell(std::size_t row, std::size_t bitline) const;

  void erase();
  void program_page(std::size_t row, const BitVector& page_bits);
  BitVector read_page(std::size_t row) const;

  /// Programs elements along bitlines [start_bitline, start_bitline + elements.size()).
  void program_transposed(std::span<const TernaryValue> elements, std::size_t start_bitline);
  MatchVector srch(const SearchKey& key) const;
  void invalidate_matches(std::span<const std::size_t> bitlines);

  /// Occupied and not invalidated.
  BitVector valid_bitmap() const;
  const BitVector& occupied() const noexcept { return occupied_; }

  // Accounting.
  std::uint64_t search_count() const noexcept { return search_count_; }
  std::uint64_t fe_be_program_bytes() const noexcept { return fe_be_program_bytes_; }

 private:
  void check_row(std::size_t row) const;
  void require_search_mode() const;

  std::size_t rows_;
  std::size_t bitlines_;
  BlockMode mode_;
  bool write_inversion_;
  bool erased_ = true;
  // conducts_[r] bit k == 1 <=> cell (r, k) is LowVth.
  std::vector<BitVector> conducts_;
  std::vector<bool> row_programmed_;
  BitVector occupied_;
  mutable std::uint64_t search_count_ = 0;
  std::uint64_t fe_be_program_bytes_ = 0;
};

}  // namespace nandcam
