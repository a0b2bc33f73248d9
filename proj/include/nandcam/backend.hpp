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
 * @file backend.hpp
 * @brief SSD geometry, timing parameters and the resource-occupancy latency model.
 */

#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nandcam {

using Micros = std::chrono::duration<double, std::micro>;

struct SsdConfig {
  std::uint32_t channels = 8;
  std::uint32_t packages_per_channel = 1;
  std::uint32_t dies_per_package = 8;
  std::uint32_t planes_per_die = 2;
  std::uint32_t blocks_per_plane = 2048;
  std::uint32_t pages_per_block = 196;
  std::uint32_t page_size = 16 * 1024;

  Micros t_read{22.5};
  Micros t_search{25.0};
  Micros t_write_slc{200.0};
  Micros t_write_mlc{500.0};
  Micros t_write_tlc{700.0};
  Micros t_nvme_init{4.0};
  Micros dram_access{0.015};    // per 64 B line
  Micros dram_row_miss{0.050};

  double channel_bandwidth = 1.2e9;  // bytes/s
  double host_bandwidth = 3.5e9;
  double decode_rate = 1.6e9;

  std::uint32_t burst_bytes = 64;
  std::uint32_t host_block_bytes = 4096;
  bool write_inversion = true;
  std::uint32_t max_blocks_per_element = 4;

  std::uint32_t dies_per_channel() const noexcept {
    return packages_per_channel * dies_per_package;
  }
  std::uint32_t die_count() const noexcept { return channels * dies_per_channel(); }
  std::uint32_t bitlines() const noexcept { return page_size * 8; }
  std::uint32_t native_element_size() const noexcept { return pages_per_block / 2 - 1; }
  std::uint32_t superblock_offsets() const noexcept { return planes_per_die * blocks_per_plane; }

  /// Throws InvalidConfig on non-positive latencies, bandwidths or geometry.
  void validate() const;
};

/// Flat `key = value` text; '#' starts a comment. Times in microseconds except dram_access and
/// dram_row_miss (nanoseconds); bandwidths in bytes per second. Unknown keys are rejected.
SsdConfig parse_config(std::string_view text);
SsdConfig load_config(const std::string& path);
std::string format_config(const SsdConfig& cfg);

std::uint64_t total_blocks(const SsdConfig& cfg) noexcept;

struct PhysicalAddress {
  std::uint32_t channel = 0;
  std::uint32_t die = 0;  // within the channel, across packages
  std::uint32_t plane = 0;
  std::uint32_t block = 0;
  std::uint32_t page = 0;

  friend bool operator==(const PhysicalAddress&, const PhysicalAddress&) = default;
  friend auto operator<=>(const PhysicalAddress&, const PhysicalAddress&) = default;
};

void check_address(const SsdConfig& cfg, const PhysicalAddress& addr);

/// One block per (channel, die) at the same plane/block offset, channel-major within a die row.
std::vector<PhysicalAddress> superblock_of(const SsdConfig& cfg, std::uint32_t block_offset);

struct MovementCounters {
  std::uint64_t cpu_fe_bytes = 0;
  std::uint64_t fe_be_bytes = 0;
  std::uint64_t srch_count = 0;
  std::uint64_t read_count = 0;
  std::uint64_t program_count = 0;

  MovementCounters& operator+=(const MovementCounters& o) noexcept;
  friend MovementCounters operator-(MovementCounters a, const MovementCounters& b) noexcept;
  friend bool operator==(const MovementCounters&, const MovementCounters&) = default;
};

enum class Component : std::uint8_t {
  Nvme,
  Translation,
  FlashArray,
  FeBeTransfer,
  Decode,
  CpuFeTransfer,
};
inline constexpr std::size_t kComponentCount = 6;
std::string_view component_name(Component c) noexcept;

struct LatencyReport {
  Micros total{0};
  std::array<Micros, kComponentCount> components{};

  Micros& operator[](Component c) noexcept { return components[static_cast<std::size_t>(c)]; }
  Micros operator[](Component c) const noexcept {
    return components[static_cast<std::size_t>(c)];
  }
  Micros component_sum() const noexcept;
  Micros max_component() const noexcept;
  std::vector<std::pair<std::string, Micros>> labeled() const;

  /// Appends `o` serially after this report.
  LatencyReport& operator+=(const LatencyReport& o) noexcept;
};

enum class OpKind : std::uint8_t {
  Read,          // die -> channel -> optional host link
  Search,        // die -> channel (match vector) -> decoder
  Program,       // channel -> die
  HostTransfer,  // host link only
  HostProbe,     // firmware DRAM accesses
  Nvme,          // command initialization
};

struct FlashOp {
  OpKind kind = OpKind::Read;
  PhysicalAddress address{};
  std::uint64_t payload_bytes = 0;  // channel payload, or host payload for HostTransfer
  std::uint64_t host_bytes = 0;     // Read: bytes forwarded over the host link afterwards
  std::uint64_t decoded_bytes = 0;  // Search: bytes buffered by early termination
  std::uint32_t units = 1;          // Program: rows programmed; HostProbe: DRAM accesses
  bool row_miss = false;            // HostProbe: cost each access as a DRAM row miss
  std::uint64_t parallel_group = 0;
};

/**
 * Greedy list-order scheduler. Each die, channel bus, the host link, the firmware core and the
 * match-vector decoder are FIFO resources. An op walks its stages in order and every stage
 * starts when both the previous stage and its resource are free. A change of parallel_group is
 * a barrier: the next group starts after every op of the current group has finished.
 */
class Scheduler {
 public:
  explicit Scheduler(const SsdConfig& cfg, MovementCounters* sink = nullptr);

  void submit(const FlashOp& op);
  /// Forces a barrier without changing the group id.
  void barrier();
  /// Closes the open group and returns the report so far.
  LatencyReport report();
  Micros now() const noexcept { return Micros(horizon_); }
  const MovementCounters& counters() const noexcept { return local_; }

 private:
  struct Interval {
    double start;
    double end;
  };
  enum Resource : std::uint32_t { Firmware = 0, Host = 1, Decoder = 2, kFixed = 3 };

  double stage(std::uint32_t resource, Component label, double ready, double duration);
  void close_group();
  void compact(std::size_t label);
  std::uint32_t die_resource(const PhysicalAddress& a) const noexcept;
  std::uint32_t bus_resource(const PhysicalAddress& a) const noexcept;

  const SsdConfig& cfg_;
  MovementCounters* sink_;
  MovementCounters local_{};
  std::vector<double> free_;
  // Last interval appended by each resource, for coalescing back-to-back stages.
  std::vector<std::pair<std::int32_t, std::size_t>> last_;
  std::array<std::vector<Interval>, kComponentCount> pending_;
  std::array<double, kComponentCount> closed_{};
  double group_start_ = 0;
  double horizon_ = 0;
  std::uint64_t group_ = 0;
  bool any_ = false;
};

LatencyReport schedule(const SsdConfig& cfg, std::span<const FlashOp> ops,
                       MovementCounters& counters);

}  // namespace nandcam
