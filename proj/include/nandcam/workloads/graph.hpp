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
 * @file graph.hpp
 * @brief Compressed graph index over search regions and vertex-access trace replay.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "nandcam/backend.hpp"
#include "nandcam/ftl.hpp"

namespace nandcam::graph {

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
};

/// Whitespace-separated `src dst` lines; '#' and '%' start comments.
std::vector<Edge> read_edge_list(std::istream& in);
std::vector<Edge> load_edge_list(const std::string& path);
void write_edge_list(std::ostream& out, const std::vector<Edge>& edges);
/// One vertex id per line.
std::vector<std::uint32_t> read_access_trace(std::istream& in);
std::vector<std::uint32_t> load_access_trace(const std::string& path);
void write_access_trace(std::ostream& out, const std::vector<std::uint32_t>& trace);

/// Out-edges grouped by source with a counting sort.
struct Csr {
  std::uint32_t vertex_count = 0;
  std::vector<std::uint64_t> offsets;  // vertex_count + 1
  std::vector<std::uint32_t> targets;

  std::uint64_t degree(std::uint32_t v) const { return offsets[v + 1] - offsets[v]; }
  std::uint64_t edge_count() const noexcept { return targets.size(); }
};
Csr build_csr(const std::vector<Edge>& edges, std::uint32_t vertex_count = 0);

/// R-MAT generator over 2^scale vertices.
std::vector<Edge> generate_rmat(std::uint32_t scale, std::uint64_t edge_count, std::uint64_t seed,
                                double a = 0.57, double b = 0.19, double c = 0.19);
/// Breadth-first visit order from the highest-degree vertex, restarting at unvisited vertices;
/// only vertices with outgoing edges appear.
std::vector<std::uint32_t> bfs_trace(const Csr& g);

inline constexpr std::uint64_t kNoThreshold = std::numeric_limits<std::uint64_t>::max();

struct GraphConfig {
  std::uint64_t big_vertex_threshold = 256;
  std::uint32_t region_capacity_tuples = 256;
  std::uint32_t baseline_index_bytes_per_vertex = 8;
  std::uint32_t tcam_index_entry_bytes = 12;
  std::uint32_t vertex_id_bits = 32;
  std::uint32_t edge_entry_bytes = 8;

  static GraphConfig no_partition() {
    GraphConfig c;
    c.big_vertex_threshold = kNoThreshold;
    return c;
  }
};

struct IndexEntry {
  std::uint32_t max_id = 0;
  std::uint64_t edge_count = 0;  // 0 marks a search-region entry
  std::uint64_t handle = 0;      // region index, or edge-list byte address
};

struct TupleRegion {
  std::uint32_t first_vertex = 0;
  std::uint32_t last_vertex = 0;
  std::uint64_t first_ordinal = 0;  // position in the tuple store
  std::uint64_t tuple_count = 0;
};

struct CompressedGraphIndex {
  GraphConfig config;
  std::uint32_t vertex_count = 0;
  std::uint32_t bitlines = 0;
  std::vector<IndexEntry> entries;
  std::vector<TupleRegion> regions;
  std::uint64_t tuple_slots = 0;  // including block-boundary padding
  std::uint64_t tuples = 0;

  std::uint64_t tuple_blocks() const noexcept;
  /// Binary search over max_id.
  std::size_t lookup(std::uint32_t vertex) const;
  std::uint32_t probe_count() const noexcept;
};

CompressedGraphIndex build_graph_index(const Csr& g, const GraphConfig& cfg,
                                       std::uint32_t bitlines);

struct Footprint {
  std::uint64_t baseline_bytes = 0;
  std::uint64_t entry_bytes = 0;
  std::uint64_t link_table_bytes = 0;
  std::uint64_t search_blocks = 0;
  std::uint64_t total_bytes() const noexcept { return entry_bytes + link_table_bytes; }
  double reduction() const noexcept {
    return baseline_bytes ? 1.0 - static_cast<double>(total_bytes()) / baseline_bytes : 0.0;
  }
};
Footprint footprint(const CompressedGraphIndex& index);

/// Regions never straddle a block; with regions of at most C tuples the expected padding is
/// (C - 1) / 2 slots per block.
std::uint64_t estimate_region_blocks(std::uint64_t edges, std::uint32_t bitlines,
                                     std::uint32_t region_capacity);

/// Programs the tuple store into a search region and returns its id; padding slots hold a
/// source id that no vertex uses.
RegionId materialize(SearchManager& ftl, const Csr& g, const CompressedGraphIndex& index);
/// Functional lookup of a vertex's targets through the search manager.
std::vector<std::uint32_t> search_targets(SearchManager& ftl, RegionId region,
                                          const CompressedGraphIndex& index, std::uint32_t v);

enum class Mode { IM, OOM, TcamNP, TcamT };
const char* mode_name(Mode m) noexcept;

struct TraverseResult {
  LatencyReport latency;  // serial sum over accesses
  MovementCounters counters;
  std::vector<double> per_access_us;
  double time_us() const noexcept { return latency.total.count(); }
};

/// Cost of one vertex access.
LatencyReport access_cost(const SsdConfig& cfg, const Csr& g, const CompressedGraphIndex* index,
                          std::uint32_t v, Mode mode, MovementCounters& counters);
TraverseResult traverse(const SsdConfig& cfg, const Csr& g, const CompressedGraphIndex* index,
                        const std::vector<std::uint32_t>& trace, Mode mode);

}  // namespace nandcam::graph
