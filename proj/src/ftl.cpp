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

#include "nandcam/ftl.hpp"

#include <algorithm>
#include <cmath>

#include "nandcam/error.hpp"

namespace nandcam {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::uint8_t byte_at(const BitVector& v, std::uint64_t b) {
  return static_cast<std::uint8_t>((v.words()[b / 8] >> (8 * (b % 8))) & 0xFFU);
}

Entry encode_int(std::int64_t value, std::uint32_t width) {
  Entry e(width, 0);
  for (std::uint32_t i = 0; i < width && i < 8; ++i) {
    e[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
  }
  return e;
}

std::int64_t decode_int(const Entry& e) {
  std::uint64_t v = 0;
  const std::size_t n = std::min<std::size_t>(e.size(), 8);
  for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t{e[i]} << (8 * i);
  if (n > 0 && n < 8 && (e[n - 1] & 0x80U)) v |= ~std::uint64_t{0} << (8 * n);
  return static_cast<std::int64_t>(v);
}

}  // namespace

PhysicalAddress search_slot_address(const SsdConfig& cfg, std::uint64_t slot) {
  const std::uint64_t dies = cfg.die_count();
  const std::uint64_t offset = slot / dies;
  if (offset >= cfg.superblock_offsets()) {
    throw Error(Errc::OffsetOutOfRange, "search slot " + std::to_string(slot) + " out of range");
  }
  const std::uint64_t r = slot % dies;
  return {static_cast<std::uint32_t>(r % cfg.channels),
          static_cast<std::uint32_t>(r / cfg.channels),
          static_cast<std::uint32_t>(offset / cfg.blocks_per_plane),
          static_cast<std::uint32_t>(offset % cfg.blocks_per_plane), 0};
}

PhysicalAddress data_page_address(const SsdConfig& cfg, std::uint64_t page_index) {
  const std::uint64_t per_superblock = std::uint64_t{cfg.die_count()} * cfg.pages_per_block;
  const std::uint64_t sb = page_index / per_superblock;
  if (sb >= cfg.superblock_offsets()) {
    throw Error(Errc::OffsetOutOfRange, "data page " + std::to_string(page_index) +
                                            " out of range");
  }
  const std::uint64_t offset = cfg.superblock_offsets() - 1 - sb;
  const std::uint64_t r = page_index % per_superblock;
  return {static_cast<std::uint32_t>(r % cfg.channels),
          static_cast<std::uint32_t>((r / cfg.channels) % cfg.dies_per_channel()),
          static_cast<std::uint32_t>(offset / cfg.blocks_per_plane),
          static_cast<std::uint32_t>(offset % cfg.blocks_per_plane),
          static_cast<std::uint32_t>(r / cfg.die_count())};
}

DecodedMatches decode_match_vector(const MatchVector& vector, std::uint32_t burst_bytes) {
  const std::uint64_t bytes = ceil_div(vector.size(), 8);
  if (burst_bytes == 0 || bytes % burst_bytes != 0) {
    throw Error(Errc::InvalidArgument, "burst size must divide the match vector length");
  }
  DecodedMatches d;
  d.burst_bytes = burst_bytes;
  d.total_bursts = bytes / burst_bytes;
  const auto words = vector.words();
  for (std::uint64_t i = 0; i < d.total_bursts; ++i) {
    const std::uint64_t b0 = i * burst_bytes;
    bool zero = true;
    if (burst_bytes % 8 == 0) {
      for (std::uint64_t w = b0 / 8; w < (b0 + burst_bytes) / 8 && zero; ++w) zero = words[w] == 0;
    } else {
      for (std::uint64_t b = b0; b < b0 + burst_bytes && zero; ++b) zero = byte_at(vector, b) == 0;
    }
    if (zero) {
      ++d.zero_bursts;
      continue;
    }
    TaggedBurst t;
    t.tag = d.zero_bursts;
    t.bytes.resize(burst_bytes);
    for (std::uint64_t b = 0; b < burst_bytes; ++b) t.bytes[b] = byte_at(vector, b0 + b);
    d.bursts.push_back(std::move(t));
  }
  d.ordinals = reconstruct(d);
  return d;
}

std::vector<std::uint64_t> reconstruct(const DecodedMatches& d) {
  std::vector<std::uint64_t> out;
  for (std::size_t j = 0; j < d.bursts.size(); ++j) {
    const std::uint64_t index = d.bursts[j].tag + j;
    const std::uint64_t base = index * d.burst_bytes * 8;
    const auto& bytes = d.bursts[j].bytes;
    for (std::size_t b = 0; b < bytes.size(); ++b) {
      for (unsigned bit = 0; bit < 8; ++bit) {
        if ((bytes[b] >> bit) & 1U) out.push_back(base + b * 8 + bit);
      }
    }
  }
  return out;
}

double expected_buffered_bytes(std::uint64_t bitlines, std::uint32_t burst_bytes, double p) {
  const double bits_per_burst = 8.0 * burst_bytes;
  const double bursts = static_cast<double>(bitlines) / bits_per_burst;
  const double nonzero = 1.0 - std::pow(1.0 - std::clamp(p, 0.0, 1.0), bits_per_burst);
  return bursts * nonzero * burst_bytes;
}

std::uint64_t host_blocks_needed(std::uint64_t entries, std::uint64_t entry_bytes,
                                 std::uint64_t host_block_bytes) noexcept {
  if (entries == 0 || host_block_bytes == 0) return 0;
  return ceil_div(entries * entry_bytes, host_block_bytes);
}

std::vector<Entry> compact_results(std::span<const Entry> entries,
                                   std::uint32_t host_block_bytes) {
  if (host_block_bytes == 0) throw Error(Errc::InvalidArgument, "host block size is zero");
  std::vector<Entry> blocks;
  for (const auto& e : entries) {
    std::size_t off = 0;
    while (off < e.size()) {
      if (blocks.empty() || blocks.back().size() == host_block_bytes) {
        blocks.emplace_back();
        blocks.back().reserve(host_block_bytes);
      }
      auto& blk = blocks.back();
      const std::size_t n = std::min<std::size_t>(host_block_bytes - blk.size(), e.size() - off);
      blk.insert(blk.end(), e.begin() + static_cast<std::ptrdiff_t>(off),
                 e.begin() + static_cast<std::ptrdiff_t>(off + n));
      off += n;
    }
  }
  return blocks;
}

FlashOp search_op(const SsdConfig& cfg, const PhysicalAddress& block, std::uint64_t decoded_bytes,
                  std::uint64_t group) {
  FlashOp op;
  op.kind = OpKind::Search;
  op.address = block;
  op.payload_bytes = cfg.page_size;
  op.decoded_bytes = decoded_bytes;
  op.parallel_group = group;
  return op;
}

FlashOp read_op(const SsdConfig& cfg, const PhysicalAddress& page, std::uint64_t host_bytes,
                std::uint64_t group) {
  FlashOp op;
  op.kind = OpKind::Read;
  op.address = page;
  op.payload_bytes = cfg.page_size;
  op.host_bytes = host_bytes;
  op.parallel_group = group;
  return op;
}

HostBlockStream::HostBlockStream(std::uint64_t entry_bytes_total, std::uint32_t host_block_bytes)
    : block_(host_block_bytes),
      total_(host_block_bytes ? ceil_div(entry_bytes_total, host_block_bytes) * host_block_bytes
                              : 0) {}

std::uint64_t HostBlockStream::push(std::uint64_t entry_bytes) noexcept {
  packed_ += entry_bytes;
  const std::uint64_t full = packed_ / block_ * block_;
  const std::uint64_t out = full - emitted_;
  emitted_ = full;
  return out;
}

std::uint64_t HostBlockStream::flush() noexcept {
  const std::uint64_t padded = ceil_div(packed_, block_) * block_;
  const std::uint64_t out = padded - emitted_;
  emitted_ = padded;
  return out;
}

// ---------------------------------------------------------------------------------------------

struct SearchManager::Group {
  std::vector<std::uint64_t> slots;
  std::vector<std::unique_ptr<FlashBlock>> blocks;
  std::uint32_t used = 0;
  std::uint64_t data_base_page = 0;
  std::vector<Entry> entries;  // by bitline; shorter than `used` for reserved ordinals
};

struct SearchManager::Region {
  RegionId id = 0;
  std::uint32_t element_bits = 0;
  std::uint32_t entry_bytes = 0;
  std::uint32_t epb = 0;
  std::uint32_t bpe = 1;
  std::uint64_t pages_per_group = 0;
  RegionOptions options;
  std::vector<Group> groups;
  std::uint64_t element_count = 0;
  std::vector<TernaryValue> staged;
  std::vector<Entry> staged_entries;
  std::vector<bool> staged_live;
  std::unordered_map<std::uint64_t, std::int64_t> update_buffer;
  std::uint64_t version = 0;

  std::uint32_t slice_width(std::uint32_t native, std::uint32_t b) const {
    const std::uint32_t lo = b * native;
    return std::min(native, element_bits - lo);
  }
};

SearchManager::SearchManager(SsdConfig cfg) : cfg_(cfg) { cfg_.validate(); }
SearchManager::~SearchManager() = default;
SearchManager::SearchManager(SearchManager&&) noexcept = default;
SearchManager& SearchManager::operator=(SearchManager&&) noexcept = default;

SearchManager::Region& SearchManager::region(RegionId id) {
  auto it = regions_.find(id);
  if (it == regions_.end()) throw Error(Errc::UnknownRegion, "region " + std::to_string(id));
  return *it->second;
}

const SearchManager::Region& SearchManager::region(RegionId id) const {
  auto it = regions_.find(id);
  if (it == regions_.end()) throw Error(Errc::UnknownRegion, "region " + std::to_string(id));
  return *it->second;
}

bool SearchManager::has_region(RegionId id) const noexcept { return regions_.count(id) != 0; }

SearchManager::Group& SearchManager::new_group(Region& r) {
  const std::uint64_t dies = cfg_.die_count();
  const std::uint64_t reuse = std::min<std::uint64_t>(r.bpe, free_slots_.size());
  const std::uint64_t slot_end = next_slot_ + (r.bpe - reuse);
  const std::uint64_t search_offsets = ceil_div(slot_end, dies);
  const std::uint64_t data_offsets =
      ceil_div(next_data_page_ + r.pages_per_group, dies * cfg_.pages_per_block);
  if (search_offsets + data_offsets > cfg_.superblock_offsets()) {
    throw Error(Errc::CapacityExhausted, "no room for another block group");
  }

  Group g;
  for (std::uint32_t b = 0; b < r.bpe; ++b) {
    if (!free_slots_.empty()) {
      g.slots.push_back(*free_slots_.begin());
      free_slots_.erase(free_slots_.begin());
    } else {
      g.slots.push_back(next_slot_++);
    }
  }
  g.blocks.resize(r.bpe);
  g.data_base_page = next_data_page_;
  next_data_page_ += r.pages_per_group;
  data_pages_in_use_ += r.pages_per_group;
  search_blocks_in_use_ += r.bpe;
  r.groups.push_back(std::move(g));
  return r.groups.back();
}

FlashBlock& SearchManager::materialize(Region&, Group& g, std::uint32_t b) {
  if (!g.blocks[b]) {
    g.blocks[b] = std::make_unique<FlashBlock>(cfg_.pages_per_block, cfg_.page_size,
                                               BlockMode::SearchSLC, cfg_.write_inversion);
  }
  return *g.blocks[b];
}

RegionId SearchManager::allocate_region(std::uint32_t element_bits, std::uint32_t entry_bytes,
                                        std::uint64_t element_count,
                                        std::span<const TernaryValue> elements,
                                        std::span<const Entry> entries, RegionOptions options,
                                        LatencyReport* latency) {
  if (element_bits == 0) throw Error(Errc::InvalidArgument, "element width must be positive");
  if (entry_bytes == 0) throw Error(Errc::InvalidArgument, "entry size must be positive");
  if (options.numeric_entries && entry_bytes > 8) {
    throw Error(Errc::InvalidArgument, "numeric entries are at most 8 bytes");
  }
  const std::uint32_t native = cfg_.native_element_size();
  const std::uint32_t bpe = static_cast<std::uint32_t>(ceil_div(element_bits, native));
  if (bpe > cfg_.max_blocks_per_element) {
    throw Error(Errc::ElementWiderThanSupported,
                std::to_string(element_bits) + "-bit elements need " + std::to_string(bpe) +
                    " blocks, limit " + std::to_string(cfg_.max_blocks_per_element));
  }
  if (!elements.empty() && elements.size() != element_count) {
    throw Error(Errc::InvalidArgument, "initial data size differs from element_count");
  }
  if (elements.size() != entries.size()) {
    throw Error(Errc::WidthMismatch, "element and entry counts differ");
  }
  for (const auto& e : elements) {
    if (e.size() != element_bits) throw Error(Errc::WidthMismatch, "element width differs");
  }

  auto r = std::make_unique<Region>();
  r->id = next_region_;
  r->element_bits = element_bits;
  r->entry_bytes = entry_bytes;
  r->epb = cfg_.bitlines();
  r->bpe = bpe;
  r->pages_per_group = ceil_div(std::uint64_t{r->epb} * entry_bytes, cfg_.page_size);
  r->options = options;

  // Capacity check up front so a failed allocation leaves no partial state.
  const std::uint64_t groups = ceil_div(element_count, r->epb);
  {
    const std::uint64_t dies = cfg_.die_count();
    const std::uint64_t slots = groups * bpe;
    const std::uint64_t reuse = std::min<std::uint64_t>(slots, free_slots_.size());
    const std::uint64_t search_offsets = ceil_div(next_slot_ + slots - reuse, dies);
    const std::uint64_t data_offsets = ceil_div(next_data_page_ + groups * r->pages_per_group,
                                                dies * cfg_.pages_per_block);
    if (search_offsets + data_offsets > cfg_.superblock_offsets()) {
      throw Error(Errc::CapacityExhausted,
                  std::to_string(element_count) + " elements need " + std::to_string(slots) +
                      " search blocks and do not fit");
    }
  }

  Region& reg = *r;
  regions_.emplace(reg.id, std::move(r));
  ++next_region_;

  if (elements.empty()) {
    std::uint64_t left = element_count;
    while (left > 0) {
      Group& g = new_group(reg);
      g.used = static_cast<std::uint32_t>(std::min<std::uint64_t>(left, reg.epb));
      left -= g.used;
      reg.element_count += g.used;
    }
  } else {
    Scheduler sched(cfg_, &counters_);
    std::uint64_t gid = 0;
    const std::vector<std::uint8_t> live(elements.size(), 1);
    program_into(reg, elements, entries, live, sched, gid);
    if (latency) *latency = sched.report();
  }
  return reg.id;
}

void SearchManager::program_into(Region& r, std::span<const TernaryValue> elements,
                                 std::span<const Entry> entries, std::span<const std::uint8_t> live,
                                 Scheduler& sched, std::uint64_t& group_id) {
  const std::uint32_t native = cfg_.native_element_size();
  std::size_t pos = 0;
  while (pos < elements.size()) {
    if (r.groups.empty() || r.groups.back().used >= r.epb) new_group(r);
    Group& g = r.groups.back();
    const std::size_t n = std::min<std::size_t>(elements.size() - pos, r.epb - g.used);
    const std::uint32_t start = g.used;

    for (std::uint32_t b = 0; b < r.bpe; ++b) {
      const std::uint32_t width = r.slice_width(native, b);
      std::vector<TernaryValue> slice;
      slice.reserve(n);
      for (std::size_t j = 0; j < n; ++j) slice.push_back(elements[pos + j].slice(b * native, width));
      FlashBlock& fb = materialize(r, g, b);
      const std::uint64_t before = fb.fe_be_program_bytes();
      fb.program_transposed(slice, start);
      FlashOp op;
      op.kind = OpKind::Program;
      op.address = search_slot_address(cfg_, g.slots[b]);
      op.payload_bytes = fb.fe_be_program_bytes() - before;
      op.units = 2 * width;
      op.parallel_group = group_id;
      sched.submit(op);
    }

    if (g.entries.size() < start + n) g.entries.resize(start + n);
    for (std::size_t j = 0; j < n; ++j) {
      Entry e = entries[pos + j];
      e.resize(r.entry_bytes, 0);
      g.entries[start + j] = std::move(e);
    }
    const std::uint64_t first_page = (std::uint64_t{start} * r.entry_bytes) / cfg_.page_size;
    const std::uint64_t last_page =
        (std::uint64_t{start + static_cast<std::uint32_t>(n)} * r.entry_bytes - 1) /
        cfg_.page_size;
    for (std::uint64_t p = first_page; p <= last_page; ++p) {
      FlashOp op;
      op.kind = OpKind::Program;
      op.address = data_page_address(cfg_, g.data_base_page + p);
      op.payload_bytes = cfg_.page_size;
      op.parallel_group = group_id;
      sched.submit(op);
    }

    std::vector<std::size_t> dead;
    for (std::size_t j = 0; j < n; ++j) {
      if (!live[pos + j]) dead.push_back(start + j);
    }
    if (!dead.empty()) {
      for (auto& blk : g.blocks) blk->invalidate_matches(dead);
    }

    g.used = start + static_cast<std::uint32_t>(n);
    r.element_count += n;
    pos += n;
  }
  ++group_id;
}

void SearchManager::deallocate_region(RegionId id) {
  Region& r = region(id);
  for (auto& g : r.groups) {
    for (auto s : g.slots) free_slots_.insert(s);
    search_blocks_in_use_ -= g.slots.size();
    data_pages_in_use_ -= r.pages_per_group;
  }
  regions_.erase(id);
}

std::uint64_t SearchManager::append_capacity(RegionId id) const {
  const Region& r = region(id);
  if (!r.groups.empty() && r.groups.back().used < r.epb) return r.epb - r.groups.back().used;
  return r.epb;
}

std::uint64_t SearchManager::staged_count(RegionId id) const { return region(id).staged.size(); }

void SearchManager::flush_staged(Region& r, Scheduler& sched, std::uint64_t& group_id) {
  if (r.staged.empty()) return;
  const std::size_t cap = static_cast<std::size_t>(append_capacity(r.id));
  const std::size_t n = std::min(cap, r.staged.size());
  const std::vector<std::uint8_t> live(r.staged_live.begin(),
                                       r.staged_live.begin() + static_cast<std::ptrdiff_t>(n));
  program_into(r, std::span(r.staged).first(n), std::span(r.staged_entries).first(n), live,
               sched, group_id);
  r.staged.erase(r.staged.begin(), r.staged.begin() + static_cast<std::ptrdiff_t>(n));
  r.staged_entries.erase(r.staged_entries.begin(),
                         r.staged_entries.begin() + static_cast<std::ptrdiff_t>(n));
  r.staged_live.erase(r.staged_live.begin(), r.staged_live.begin() + static_cast<std::ptrdiff_t>(n));
}

MutationResult SearchManager::append(RegionId id, std::span<const TernaryValue> elements,
                                     std::span<const Entry> entries) {
  Region& r = region(id);
  if (elements.size() != entries.size()) {
    throw Error(Errc::WidthMismatch, "element and entry counts differ");
  }
  for (const auto& e : elements) {
    if (e.size() != r.element_bits) {
      throw Error(Errc::WidthMismatch, std::to_string(e.size()) + "-bit element in a " +
                                           std::to_string(r.element_bits) + "-bit region");
    }
    if (!e.is_binary()) throw Error(Errc::DontCareStored, "X values are searched, never stored");
  }
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  std::uint64_t gid = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    r.staged.push_back(elements[i]);
    Entry e = entries[i];
    e.resize(r.entry_bytes, 0);
    r.staged_entries.push_back(std::move(e));
    r.staged_live.push_back(true);
    if (r.staged.size() >= append_capacity(id)) flush_staged(r, sched, gid);
  }
  ++r.version;
  MutationResult out;
  out.count = elements.size();
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

MutationResult SearchManager::flush(RegionId id) {
  Region& r = region(id);
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  std::uint64_t gid = 0;
  MutationResult out;
  out.count = r.staged.size();
  while (!r.staged.empty()) flush_staged(r, sched, gid);
  ++r.version;
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

SearchManager::Matches SearchManager::find(Region& r, const SearchRequest& req, Scheduler& sched,
                                           std::uint64_t group) {
  if (req.keys.empty()) throw Error(Errc::InvalidArgument, "search without a key");
  if (req.reduction == Reduction::Single && req.keys.size() != 1) {
    throw Error(Errc::InvalidArgument, "a single search takes exactly one key");
  }
  std::vector<SearchKey> keys;
  keys.reserve(req.keys.size());
  for (const auto& k : req.keys) {
    if (k.size() > r.element_bits) {
      throw Error(Errc::KeyTooWide, std::to_string(k.size()) + "-bit key on a " +
                                        std::to_string(r.element_bits) + "-bit region");
    }
    keys.push_back(k.padded(r.element_bits));
  }
  const std::uint32_t native = cfg_.native_element_size();
  const bool is_or = req.reduction == Reduction::Or;

  Matches m;
  const std::uint64_t g_begin = std::min<std::uint64_t>(req.first_group, r.groups.size());
  const std::uint64_t g_end = req.group_count >= r.groups.size() - g_begin
                                  ? r.groups.size()
                                  : g_begin + req.group_count;
  for (std::uint64_t gi = g_begin; gi < g_end; ++gi) {
    Group& g = r.groups[gi];
    std::optional<BitVector> combined;
    for (const auto& key : keys) {
      std::optional<BitVector> vec;
      bool empty = false;
      for (std::uint32_t b = 0; b < r.bpe; ++b) {
        const PhysicalAddress addr = search_slot_address(cfg_, g.slots[b]);
        if (!g.blocks[b]) {
          sched.submit(search_op(cfg_, addr, 0, group));
          empty = true;
          continue;
        }
        const BitVector v = g.blocks[b]->srch(key.slice(b * native, r.slice_width(native, b)));
        const DecodedMatches d = decode_match_vector(v, cfg_.burst_bytes);
        m.buffered_bytes += d.buffered_bytes();
        m.zero_bursts += d.zero_bursts;
        sched.submit(search_op(cfg_, addr, d.buffered_bytes(), group));
        if (!vec) {
          vec = v;
        } else {
          *vec &= v;
        }
      }
      if (empty) vec.reset();
      if (!combined) {
        combined = vec ? *vec : BitVector(r.epb);
      } else if (is_or) {
        if (vec) *combined |= *vec;
      } else {
        if (vec) {
          *combined &= *vec;
        } else {
          combined->fill(false);
        }
      }
    }
    if (combined) {
      combined->for_each_set([&](std::size_t bl) {
        if (bl < g.used) m.ordinals.push_back(gi * r.epb + bl);
      });
    }
  }

  if (g_end == r.groups.size() && !r.staged.empty()) {
    FlashOp probe;
    probe.kind = OpKind::HostProbe;
    probe.units = static_cast<std::uint32_t>(
        ceil_div(r.staged.size() * ceil_div(r.element_bits, 8), 64));
    probe.parallel_group = group;
    sched.submit(probe);
    for (std::size_t i = 0; i < r.staged.size(); ++i) {
      if (!r.staged_live[i]) continue;
      bool hit = !is_or;
      for (const auto& key : keys) {
        const bool k = key.matches(r.staged[i]);
        hit = is_or ? (hit || k) : (hit && k);
      }
      if (hit) m.ordinals.push_back(r.element_count + i);
    }
  }
  return m;
}

std::optional<std::uint64_t> SearchManager::staged_index(const Region& r,
                                                         std::uint64_t ordinal) const {
  if (ordinal >= r.element_count && ordinal < r.element_count + r.staged.size()) {
    return ordinal - r.element_count;
  }
  return std::nullopt;
}

Entry SearchManager::stored_entry(const Region& r, std::uint64_t ordinal) const {
  if (auto s = staged_index(r, ordinal)) return r.staged_entries[*s];
  const Group& g = r.groups[ordinal / r.epb];
  const std::uint64_t bl = ordinal % r.epb;
  if (bl < g.entries.size() && !g.entries[bl].empty()) return g.entries[bl];
  return Entry(r.entry_bytes, 0);
}

std::vector<Entry> SearchManager::read_entries(Region& r, std::span<const std::uint64_t> ordinals,
                                               Scheduler& sched, std::uint64_t group,
                                               bool to_host, std::uint64_t* host_blocks) {
  std::vector<Entry> out;
  out.reserve(ordinals.size());
  std::vector<std::uint64_t> pages;  // data-area page indices, first-touch order
  std::vector<std::uint64_t> page_bytes;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::uint64_t dram_bytes = 0;

  for (std::uint64_t o : ordinals) {
    const auto ub = r.update_buffer.find(o);
    if (ub != r.update_buffer.end()) {
      out.push_back(encode_int(ub->second, r.entry_bytes));
      dram_bytes += r.entry_bytes;
      continue;
    }
    out.push_back(stored_entry(r, o));
    if (staged_index(r, o)) {
      dram_bytes += r.entry_bytes;
      continue;
    }
    const Group& g = r.groups[o / r.epb];
    const std::uint64_t addr = (o % r.epb) * r.entry_bytes;
    const std::uint64_t p0 = g.data_base_page + addr / cfg_.page_size;
    const std::uint64_t p1 = g.data_base_page + (addr + r.entry_bytes - 1) / cfg_.page_size;
    for (std::uint64_t p = p0; p <= p1; ++p) {
      const auto [it, fresh] = seen.emplace(p, pages.size());
      if (fresh) {
        pages.push_back(p);
        page_bytes.push_back(0);
      }
      if (p == p0) page_bytes[it->second] += r.entry_bytes;
    }
  }

  const std::uint64_t total_bytes = std::uint64_t{r.entry_bytes} * ordinals.size();
  HostBlockStream hs(total_bytes, cfg_.host_block_bytes);
  if (host_blocks) *host_blocks = to_host ? host_blocks_needed(ordinals.size(), r.entry_bytes,
                                                               cfg_.host_block_bytes)
                                          : 0;
  if (to_host && dram_bytes > 0) {
    const std::uint64_t now = hs.push(dram_bytes);
    if (now > 0) {
      FlashOp op;
      op.kind = OpKind::HostTransfer;
      op.payload_bytes = now;
      op.parallel_group = group;
      sched.submit(op);
    }
  }
  for (std::size_t i = 0; i < pages.size(); ++i) {
    std::uint64_t host = 0;
    if (to_host) {
      host = hs.push(page_bytes[i]);
      if (i + 1 == pages.size()) host += hs.flush();
    }
    sched.submit(read_op(cfg_, data_page_address(cfg_, pages[i]), host, group));
  }
  if (to_host && pages.empty()) {
    const std::uint64_t rest = hs.flush();
    if (rest > 0) {
      FlashOp op;
      op.kind = OpKind::HostTransfer;
      op.payload_bytes = rest;
      op.parallel_group = group;
      sched.submit(op);
    }
  }
  return out;
}

SearchResult SearchManager::execute_search(RegionId id, const SearchRequest& request) {
  Region& r = region(id);
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  Matches m = find(r, request, sched, 0);

  SearchResult out;
  auto first = std::lower_bound(m.ordinals.begin(), m.ordinals.end(), request.resume_ordinal);
  const std::uint64_t available = static_cast<std::uint64_t>(m.ordinals.end() - first);
  const std::uint64_t take = std::min(available, request.max_results);
  out.ordinals.assign(first, first + static_cast<std::ptrdiff_t>(take));
  out.total_matches = m.ordinals.size();
  if (take < available) {
    out.continuation = *(first + static_cast<std::ptrdiff_t>(take));
    out.remaining.assign(first + static_cast<std::ptrdiff_t>(take), m.ordinals.end());
  }
  out.buffered_bytes = m.buffered_bytes;
  out.zero_bursts = m.zero_bursts;
  if (request.fetch_entries && !out.ordinals.empty()) {
    out.entries = read_entries(r, out.ordinals, sched, 1, true, &out.host_blocks);
  }
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

SearchResult SearchManager::fetch(RegionId id, std::span<const std::uint64_t> ordinals) {
  Region& r = region(id);
  const std::uint64_t limit = r.element_count + r.staged.size();
  for (auto o : ordinals) {
    if (o >= limit) throw Error(Errc::InvalidArgument, "ordinal " + std::to_string(o));
  }
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  SearchResult out;
  out.ordinals.assign(ordinals.begin(), ordinals.end());
  out.total_matches = ordinals.size();
  if (!ordinals.empty()) out.entries = read_entries(r, ordinals, sched, 0, true, &out.host_blocks);
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

MutationResult SearchManager::delete_matching(RegionId id, const SearchKey& key) {
  Region& r = region(id);
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  SearchRequest req;
  req.keys = {key};
  Matches m = find(r, req, sched, 0);

  std::map<std::uint64_t, std::vector<std::size_t>> per_group;
  for (std::uint64_t o : m.ordinals) {
    r.update_buffer.erase(o);
    if (auto s = staged_index(r, o)) {
      r.staged_live[*s] = false;
    } else {
      per_group[o / r.epb].push_back(static_cast<std::size_t>(o % r.epb));
    }
  }
  for (auto& [gi, bls] : per_group) {
    Group& g = r.groups[gi];
    for (std::uint32_t b = 0; b < r.bpe; ++b) {
      if (!g.blocks[b]) continue;
      g.blocks[b]->invalidate_matches(bls);
      FlashOp op;
      op.kind = OpKind::Program;
      op.address = search_slot_address(cfg_, g.slots[b]);
      op.address.page = cfg_.pages_per_block - 1;
      op.payload_bytes = cfg_.page_size;
      op.parallel_group = 1;
      sched.submit(op);
    }
  }
  ++r.version;
  MutationResult out;
  out.count = m.ordinals.size();
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

MutationResult SearchManager::associative_update(RegionId id, const SearchKey& key, UpdateOp op,
                                                 std::int64_t immediate) {
  Region& r = region(id);
  if (!r.options.numeric_entries) {
    throw Error(Errc::NonNumericEntries, "region " + std::to_string(id) +
                                             " was not declared with integer entries");
  }
  const MovementCounters before = counters_;
  Scheduler sched(cfg_, &counters_);
  SearchRequest req;
  req.keys = {key};
  Matches m = find(r, req, sched, 0);
  std::vector<Entry> current;
  if (!m.ordinals.empty()) current = read_entries(r, m.ordinals, sched, 1, false, nullptr);

  for (std::size_t i = 0; i < m.ordinals.size(); ++i) {
    const std::int64_t v = decode_int(current[i]);
    std::int64_t nv = v;
    switch (op) {
      case UpdateOp::Add: nv = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) +
                                                         static_cast<std::uint64_t>(immediate));
        break;
      case UpdateOp::Sub: nv = static_cast<std::int64_t>(static_cast<std::uint64_t>(v) -
                                                         static_cast<std::uint64_t>(immediate));
        break;
      case UpdateOp::Set: nv = immediate; break;
    }
    nv = decode_int(encode_int(nv, r.entry_bytes));
    if (auto s = staged_index(r, m.ordinals[i])) {
      r.staged_entries[*s] = encode_int(nv, r.entry_bytes);
    } else {
      r.update_buffer[m.ordinals[i]] = nv;
    }
  }
  ++r.version;
  MutationResult out;
  out.count = m.ordinals.size();
  out.latency = sched.report();
  out.movement = counters_ - before;
  return out;
}

SearchRegionDescriptor SearchManager::descriptor(RegionId id) const {
  const Region& r = region(id);
  SearchRegionDescriptor d;
  d.region_id = r.id;
  d.element_bits = r.element_bits;
  d.entry_bytes = r.entry_bytes;
  d.elements_per_block = r.epb;
  d.blocks_per_element = r.bpe;
  for (const auto& g : r.groups) {
    for (auto s : g.slots) d.blocks.push_back(search_slot_address(cfg_, s));
  }
  d.element_count = r.element_count + r.staged.size();
  return d;
}

std::vector<LinkTableEntry> SearchManager::link_table(RegionId id) const {
  const Region& r = region(id);
  std::vector<LinkTableEntry> out;
  for (std::size_t gi = 0; gi < r.groups.size(); ++gi) {
    out.push_back({gi, r.groups[gi].data_base_page * cfg_.page_size, r.entry_bytes, r.id});
  }
  return out;
}

std::uint64_t SearchManager::version(RegionId id) const { return region(id).version; }

std::uint64_t SearchManager::link_table_bytes() const noexcept {
  std::uint64_t groups = 0;
  for (const auto& [id, r] : regions_) groups += r->groups.size();
  return groups * kLinkTableEntryBytes;
}

}  // namespace nandcam
