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
 * @file ftl.hpp
 * @brief Firmware search manager: regions, link table, search planning, decode and updates.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "nandcam/backend.hpp"
#include "nandcam/flash_array.hpp"

namespace nandcam {

using RegionId = std::uint32_t;
using Entry = std::vector<std::uint8_t>;

inline constexpr std::uint32_t kLinkTableEntryBytes = 44;

/// Search slot s sits at superblock offset s / dies, channel s % channels, then die.
PhysicalAddress search_slot_address(const SsdConfig& cfg, std::uint64_t slot);
/// Data pages fill superblocks from the highest offset downward, striped channel first.
PhysicalAddress data_page_address(const SsdConfig& cfg, std::uint64_t page_index);

// ---------------------------------------------------------------------------------------------
// Early termination

struct TaggedBurst {
  std::uint64_t tag = 0;  // zero bursts discarded before this one
  std::vector<std::uint8_t> bytes;
};

struct DecodedMatches {
  std::vector<std::uint64_t> ordinals;
  std::vector<TaggedBurst> bursts;
  std::uint64_t zero_bursts = 0;
  std::uint64_t total_bursts = 0;
  std::uint32_t burst_bytes = 0;

  std::uint64_t buffered_bytes() const noexcept { return bursts.size() * burst_bytes; }
  std::uint64_t saved_bytes() const noexcept { return zero_bursts * burst_bytes; }
};

DecodedMatches decode_match_vector(const MatchVector& vector, std::uint32_t burst_bytes);
/// Rebuilds bitline positions from tagged bursts alone.
std::vector<std::uint64_t> reconstruct(const DecodedMatches& decoded);
/// Buffered bytes expected for a vector of `bitlines` where each bit is set with probability p.
double expected_buffered_bytes(std::uint64_t bitlines, std::uint32_t burst_bytes, double p);

// ---------------------------------------------------------------------------------------------
// Result compaction

std::uint64_t host_blocks_needed(std::uint64_t entries, std::uint64_t entry_bytes,
                                 std::uint64_t host_block_bytes) noexcept;
/// Packs entries back to back into host blocks; the last block may be partial.
std::vector<Entry> compact_results(std::span<const Entry> entries,
                                   std::uint32_t host_block_bytes);

// ---------------------------------------------------------------------------------------------
// Op emitters shared by the firmware and the workload models

FlashOp search_op(const SsdConfig& cfg, const PhysicalAddress& block, std::uint64_t decoded_bytes,
                  std::uint64_t group);
FlashOp read_op(const SsdConfig& cfg, const PhysicalAddress& page, std::uint64_t host_bytes,
                std::uint64_t group);

/// Splits `total` host bytes across `reads` in host-block units as the packed buffer fills.
class HostBlockStream {
 public:
  HostBlockStream(std::uint64_t entry_bytes_total, std::uint32_t host_block_bytes);
  /// Bytes released after `entry_bytes` more packed bytes arrive.
  std::uint64_t push(std::uint64_t entry_bytes) noexcept;
  /// Remaining partial block, padded to a full host block.
  std::uint64_t flush() noexcept;
  std::uint64_t total() const noexcept { return total_; }

 private:
  std::uint32_t block_;
  std::uint64_t packed_ = 0;
  std::uint64_t emitted_ = 0;
  std::uint64_t total_;
};

// ---------------------------------------------------------------------------------------------
// Regions

enum class Reduction : std::uint8_t { Single, And, Or };
enum class UpdateOp : std::uint8_t { Add, Sub, Set };

struct RegionOptions {
  bool numeric_entries = false;  // entries are little-endian signed integers of entry_bytes
};

struct LinkTableEntry {
  std::uint64_t group = 0;
  std::uint64_t data_base_address = 0;  // byte address in the data area
  std::uint32_t entry_bytes = 0;
  std::uint64_t update_buffer_handle = 0;
};

struct SearchRegionDescriptor {
  RegionId region_id = 0;
  std::uint32_t element_bits = 0;
  std::uint32_t entry_bytes = 0;
  std::uint32_t elements_per_block = 0;
  std::uint32_t blocks_per_element = 1;
  std::vector<PhysicalAddress> blocks;  // group-major, blocks_per_element per group
  std::uint64_t element_count = 0;
};

struct SearchRequest {
  std::vector<SearchKey> keys;  // one key for Single, sub-keys otherwise
  Reduction reduction = Reduction::Single;
  std::uint64_t max_results = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t resume_ordinal = 0;
  // Optional restriction to block groups [first_group, first_group + group_count).
  std::uint64_t first_group = 0;
  std::uint64_t group_count = std::numeric_limits<std::uint64_t>::max();
  bool fetch_entries = true;
};

struct SearchResult {
  std::vector<std::uint64_t> ordinals;
  std::vector<Entry> entries;
  std::uint64_t total_matches = 0;
  std::optional<std::uint64_t> continuation;  // next ordinal when truncated
  std::vector<std::uint64_t> remaining;       // decoded ordinals not yet returned
  std::uint64_t host_blocks = 0;
  std::uint64_t buffered_bytes = 0;
  std::uint64_t zero_bursts = 0;
  LatencyReport latency;
  MovementCounters movement;
};

struct MutationResult {
  std::uint64_t count = 0;
  LatencyReport latency;
  MovementCounters movement;
};

class SearchManager {
 public:
  explicit SearchManager(SsdConfig cfg);
  ~SearchManager();
  SearchManager(SearchManager&&) noexcept;
  SearchManager& operator=(SearchManager&&) noexcept;

  const SsdConfig& config() const noexcept { return cfg_; }

  /// With no initial data the region reserves `element_count` ordinals that never match.
  RegionId allocate_region(std::uint32_t element_bits, std::uint32_t entry_bytes,
                           std::uint64_t element_count,
                           std::span<const TernaryValue> elements = {},
                           std::span<const Entry> entries = {}, RegionOptions options = {},
                           LatencyReport* latency = nullptr);
  void deallocate_region(RegionId id);
  MutationResult append(RegionId id, std::span<const TernaryValue> elements,
                        std::span<const Entry> entries);
  /// Programs staged elements even when the buffer is not full.
  MutationResult flush(RegionId id);

  SearchResult execute_search(RegionId id, const SearchRequest& request);
  /// Reads and compacts the entries of the given ordinals, as the second half of a search.
  SearchResult fetch(RegionId id, std::span<const std::uint64_t> ordinals);
  MutationResult delete_matching(RegionId id, const SearchKey& key);
  MutationResult associative_update(RegionId id, const SearchKey& key, UpdateOp op,
                                    std::int64_t immediate);

  bool has_region(RegionId id) const noexcept;
  SearchRegionDescriptor descriptor(RegionId id) const;
  std::vector<LinkTableEntry> link_table(RegionId id) const;
  std::uint64_t version(RegionId id) const;
  std::uint64_t staged_count(RegionId id) const;
  std::uint64_t append_capacity(RegionId id) const;

  std::uint64_t search_blocks_in_use() const noexcept { return search_blocks_in_use_; }
  std::uint64_t data_pages_in_use() const noexcept { return data_pages_in_use_; }
  std::uint64_t link_table_bytes() const noexcept;
  const MovementCounters& counters() const noexcept { return counters_; }

 private:
  struct Group;
  struct Region;

  Region& region(RegionId id);
  const Region& region(RegionId id) const;
  Group& new_group(Region& r);
  FlashBlock& materialize(Region& r, Group& g, std::uint32_t b);
  void program_into(Region& r, std::span<const TernaryValue> elements,
                    std::span<const Entry> entries, std::span<const std::uint8_t> live,
                    Scheduler& sched, std::uint64_t& group_id);
  void flush_staged(Region& r, Scheduler& sched, std::uint64_t& group_id);

  struct Matches {
    std::vector<std::uint64_t> ordinals;
    std::uint64_t buffered_bytes = 0;
    std::uint64_t zero_bursts = 0;
  };
  Matches find(Region& r, const SearchRequest& request, Scheduler& sched, std::uint64_t group);
  std::vector<Entry> read_entries(Region& r, std::span<const std::uint64_t> ordinals,
                                  Scheduler& sched, std::uint64_t group, bool to_host,
                                  std::uint64_t* host_blocks);
  Entry stored_entry(const Region& r, std::uint64_t ordinal) const;
  std::optional<std::uint64_t> staged_index(const Region& r, std::uint64_t ordinal) const;

  SsdConfig cfg_;
  std::map<RegionId, std::unique_ptr<Region>> regions_;
  RegionId next_region_ = 1;
  std::set<std::uint64_t> free_slots_;
  std::uint64_t next_slot_ = 0;
  std::uint64_t next_data_page_ = 0;
  std::uint64_t search_blocks_in_use_ = 0;
  std::uint64_t data_pages_in_use_ = 0;
  MovementCounters counters_{};
};

}  // namespace nandcam
