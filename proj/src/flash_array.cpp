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

#include "nandcam/flash_array.hpp"

#include <algorithm>

#include "nandcam/error.hpp"

namespace nandcam {

TernaryValue TernaryValue::parse(std::string_view text) {
  std::vector<Trit> bits;
  bits.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '0': bits.push_back(Trit::Zero); break;
      case '1': bits.push_back(Trit::One); break;
      case 'X':
      case 'x':
      case '*': bits.push_back(Trit::DontCare); break;
      default:
        throw Error(Errc::InvalidArgument, "bad ternary digit '" + std::string(1, c) + "'");
    }
  }
  return TernaryValue(std::move(bits));
}

TernaryValue TernaryValue::from_uint(std::uint64_t value, std::size_t width) {
  std::vector<Trit> bits(width, Trit::Zero);
  for (std::size_t i = 0; i < width && i < 64; ++i) {
    if ((value >> i) & 1U) bits[width - 1 - i] = Trit::One;
  }
  return TernaryValue(std::move(bits));
}

bool TernaryValue::is_binary() const noexcept {
  return std::none_of(bits_.begin(), bits_.end(), [](Trit t) { return t == Trit::DontCare; });
}

TernaryValue TernaryValue::padded(std::size_t width) const {
  TernaryValue r = *this;
  if (r.bits_.size() < width) r.bits_.resize(width, Trit::DontCare);
  return r;
}

TernaryValue TernaryValue::slice(std::size_t offset, std::size_t len) const {
  std::vector<Trit> out(len, Trit::DontCare);
  for (std::size_t i = 0; i < len && offset + i < bits_.size(); ++i) out[i] = bits_[offset + i];
  return TernaryValue(std::move(out));
}

TernaryValue TernaryValue::operator+(const TernaryValue& rhs) const {
  std::vector<Trit> out = bits_;
  out.insert(out.end(), rhs.bits_.begin(), rhs.bits_.end());
  return TernaryValue(std::move(out));
}

bool TernaryValue::matches(const TernaryValue& element) const {
  for (std::size_t p = 0; p < bits_.size() && p < element.size(); ++p) {
    if (bits_[p] == Trit::DontCare) continue;
    if (bits_[p] != element[p]) return false;
  }
  return true;
}

std::string TernaryValue::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (Trit t : bits_) s.push_back(t == Trit::Zero ? '0' : t == Trit::One ? '1' : 'X');
  return s;
}

FlashBlock::FlashBlock(std::size_t rows, std::size_t page_bytes, BlockMode mode,
                       bool write_inversion)
    : rows_(rows),
      bitlines_(page_bytes * 8),
      mode_(mode),
      write_inversion_(write_inversion),
      conducts_(rows, BitVector(page_bytes * 8, true)),
      row_programmed_(rows, false),
      occupied_(page_bytes * 8) {
  if (rows < 2 || page_bytes == 0) {
    throw Error(Errc::InvalidConfig, "a block needs at least 2 rows and a non-empty page");
  }
}

std::size_t FlashBlock::native_element_size() const noexcept { return rows_ / 2 - 1; }

void FlashBlock::check_row(std::size_t row) const {
  if (row >= rows_) {
    throw Error(Errc::RowOutOfRange,
                "row " + std::to_string(row) + " >= " + std::to_string(rows_));
  }
}

void FlashBlock::require_search_mode() const {
  if (mode_ != BlockMode::SearchSLC) throw Error(Errc::WrongMode, "block is not in search mode");
}

CellState FlashBlock::cell(std::size_t row, std::size_t bitline) const {
  check_row(row);
  if (bitline >= bitlines_) throw Error(Errc::PositionOutOfRange, "bitline out of range");
  return conducts_[row].test(bitline) ? CellState::LowVth : CellState::HighVth;
}

void FlashBlock::erase() {
  for (auto& row : conducts_) row.fill(true);
  std::fill(row_programmed_.begin(), row_programmed_.end(), false);
  occupied_.fill(false);
  erased_ = true;
}

void FlashBlock::program_page(std::size_t row, const BitVector& page_bits) {
  check_row(row);
  if (page_bits.size() != bitlines_) {
    throw Error(Errc::InvalidArgument, "page image must have one bit per bitline");
  }
  if (row_programmed_[row]) {
    throw Error(Errc::ProgramOnRowTwice, "row " + std::to_string(row) + " already programmed");
  }
  // Programming only raises Vth: a 0 bit turns the cell off, a 1 bit leaves it alone.
  conducts_[row] &= page_bits;
  row_programmed_[row] = true;
  erased_ = false;
}

BitVector FlashBlock::read_page(std::size_t row) const {
  check_row(row);
  return conducts_[row];
}

void FlashBlock::program_transposed(std::span<const TernaryValue> elements,
                                    std::size_t start_bitline) {
  require_search_mode();
  if (elements.empty()) return;

  const std::size_t native = native_element_size();
  std::size_t width = 0;
  for (const auto& e : elements) {
    if (e.size() > native) {
      throw Error(Errc::ElementTooLong, std::to_string(e.size()) + "-bit element exceeds " +
                                            std::to_string(native) + "-bit native size");
    }
    if (!e.is_binary()) throw Error(Errc::DontCareStored, "X values are searched, never stored");
    width = std::max(width, e.size());
  }
  if (start_bitline > bitlines_ || elements.size() > bitlines_ - start_bitline) {
    throw Error(Errc::RegionOverflow, "elements do not fit in the remaining bitlines");
  }
  for (std::size_t j = 0; j < elements.size(); ++j) {
    if (occupied_.test(start_bitline + j)) {
      throw Error(Errc::RegionOverflow,
                  "bitline " + std::to_string(start_bitline + j) + " already holds an element");
    }
  }
  for (std::size_t r = 0; r < 2 * width; ++r) {
    if (row_programmed_[r]) {
      throw Error(Errc::ProgramOnRowTwice,
                  "row " + std::to_string(r) + " holds a conventional page");
    }
  }

  for (std::size_t j = 0; j < elements.size(); ++j) {
    const std::size_t bl = start_bitline + j;
    const auto& e = elements[j];
    for (std::size_t i = 0; i < e.size(); ++i) {
      // Row 2i stores the bit, row 2i+1 its complement; the 0-valued cell of the pair is
      // the one that gets programmed.
      const std::size_t programmed_row = e[i] == Trit::One ? 2 * i + 1 : 2 * i;
      conducts_[programmed_row].reset(bl);
    }
    occupied_.set(bl);
  }
  erased_ = false;

  // Row images cross the FE-BE boundary once per pair when the chip derives the complement
  // row itself.
  const std::uint64_t rows_programmed = 2 * width;
  const std::uint64_t bytes = rows_programmed * page_bytes();
  fe_be_program_bytes_ += write_inversion_ ? bytes / 2 : bytes;
}

MatchVector FlashBlock::srch(const SearchKey& key) const {
  require_search_mode();
  if (key.size() > native_element_size()) {
    throw Error(Errc::KeyTooLong, std::to_string(key.size()) + "-bit key exceeds " +
                                      std::to_string(native_element_size()) + "-bit native size");
  }
  ++search_count_;
  // A bitline conducts only if every cell driven with V_read is erased; V_pass cells always
  // conduct. The valid row always sees V_read.
  MatchVector result = occupied_ & conducts_[valid_row()];
  for (std::size_t p = 0; p < key.size(); ++p) {
    switch (key[p]) {
      case Trit::One: result &= conducts_[2 * p]; break;
      case Trit::Zero: result &= conducts_[2 * p + 1]; break;
      case Trit::DontCare: break;
    }
  }
  return result;
}

void FlashBlock::invalidate_matches(std::span<const std::size_t> bitlines) {
  require_search_mode();
  for (std::size_t bl : bitlines) {
    if (bl >= bitlines_) {
      throw Error(Errc::PositionOutOfRange,
                  "bitline " + std::to_string(bl) + " >= " + std::to_string(bitlines_));
    }
  }
  // In-place 0 -> 1 Vth raise of a single cell per bitline; no erase needed.
  for (std::size_t bl : bitlines) conducts_[valid_row()].reset(bl);
}

BitVector FlashBlock::valid_bitmap() const { return occupied_ & conducts_[valid_row()]; }

}  // namespace nandcam
