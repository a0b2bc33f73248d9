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
 * @file olap.hpp
 * @brief Full-table scan versus in-storage filtering, with selectivity and locality sweeps.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "nandcam/backend.hpp"

namespace nandcam::olap {

struct QuerySpec {
  std::uint64_t row_count = 600'037'902;
  std::uint32_t row_bytes = 133;
  double selectivity = 0.0004;
  double locality = 0.0;
  std::uint32_t sub_key_count = 1;
  std::uint32_t element_bits = 97;
};

/// Exact counts; no timing involved.
struct Counts {
  std::uint64_t baseline_pages = 0;
  std::uint64_t search_blocks = 0;
  std::uint64_t srch_count = 0;
  std::uint64_t vector_bytes = 0;
  std::uint64_t matches = 0;
  std::uint64_t read_count = 0;
  std::uint64_t baseline_bytes = 0;
  std::uint64_t tcam_cpu_fe_bytes = 0;
  std::uint64_t tcam_fe_be_bytes = 0;
  std::uint64_t link_table_bytes = 0;
};
Counts count(const SsdConfig& cfg, const QuerySpec& spec);

/// round(matches + (ceil(matches * row_bytes / page) - matches) * locality).
std::uint64_t read_count(std::uint64_t matches, std::uint32_t row_bytes, std::uint32_t page_size,
                         double locality);

enum class Mode { BaselineScan, Tcam };

struct RunResult {
  LatencyReport latency;
  MovementCounters counters;
  std::uint64_t srch_count = 0;
  std::uint64_t read_count = 0;
  std::uint64_t search_blocks = 0;
  double time_us() const noexcept { return latency.total.count(); }
};
RunResult run(const SsdConfig& cfg, const QuerySpec& spec, Mode mode);

struct SweepResult {
  std::vector<double> selectivities;
  std::vector<double> localities;
  double baseline_us = 0;
  std::vector<std::vector<double>> tcam_us;  // [selectivity][locality]
  std::vector<std::vector<double>> speedup;
};
SweepResult sweep(const SsdConfig& cfg, const QuerySpec& spec,
                  const std::vector<double>& selectivities, const std::vector<double>& localities);

}  // namespace nandcam::olap
