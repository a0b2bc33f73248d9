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
 * @file oltp.hpp
 * @brief Point-query trace replay against a hash-index baseline and per-warehouse regions.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nandcam/backend.hpp"
#include "nandcam/ftl.hpp"

namespace nandcam::oltp {

struct Query {
  std::uint64_t query_id = 0;
  std::string index;
  std::string key;
  std::uint32_t baseline_pages = 1;
};
using Trace = std::vector<Query>;

/// CSV `query_id,index,key,baseline_pages`; a header row is optional.
Trace read_trace(std::istream& in);
Trace load_trace(const std::string& path);
void write_trace(std::ostream& out, const Trace& trace);

struct GenParams {
  std::uint64_t queries = 100000;
  std::uint32_t max_pages = 16;
  std::uint32_t threshold_pages = 3;
  double fraction_above = 0.735;  // share of queries fetching more than threshold_pages
  std::uint64_t seed = 1;
};

/// Exponent s of P(k) ~ k^-s over 1..max_pages with P(k > threshold) = fraction_above.
double solve_zipf_exponent(std::uint32_t max_pages, std::uint32_t threshold, double fraction_above);
Trace generate_trace(const GenParams& params);

struct Setup {
  std::uint32_t warehouses = 23;
  std::uint64_t total_rows = 3'000'000;
  std::uint32_t key_bits = 64;
  std::uint32_t entry_bytes = 512;
  std::uint32_t matches_per_query = 1;
};

/// Per-warehouse regions reserved on a fresh search manager.
struct Database {
  SearchManager ftl;
  std::vector<RegionId> regions;
};
Database build_database(const SsdConfig& cfg, const Setup& setup);

enum class Mode { Baseline, Tcam };

/// Baseline: command, one hash-index probe, then the bucket chain's pages from one channel.
LatencyReport baseline_query(const SsdConfig& cfg, std::uint32_t pages, std::uint32_t channel,
                             MovementCounters& counters);
/// TCAM: command, one block SRCH, then the matched entries read and compacted.
LatencyReport tcam_query(const Database& db, const Query& q, const Setup& setup,
                         MovementCounters& counters);

struct ReplayResult {
  std::vector<double> latencies_us;
  LatencyReport breakdown;  // component sums over all queries
  MovementCounters counters;
  std::uint64_t search_blocks = 0;
  double total_us() const noexcept;
};
ReplayResult replay(const SsdConfig& cfg, const Trace& trace, Mode mode, const Setup& setup = {});

/// Largest page count (up to max_pages) at which the baseline is no slower than the TCAM query.
std::uint32_t crossover_pages(const SsdConfig& cfg, const Setup& setup,
                              std::uint32_t max_pages = 64);

/// Fraction of queries fetching at most k pages, for k = 1..max.
std::vector<std::pair<std::uint32_t, double>> page_cdf(const Trace& trace);
/// Sorted latencies with their cumulative fraction.
std::vector<std::pair<double, double>> latency_cdf(std::vector<double> latencies_us);

}  // namespace nandcam::oltp
