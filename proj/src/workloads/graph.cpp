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

#include "nandcam/workloads/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <deque>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include "nandcam/error.hpp"

namespace nandcam::graph {

namespace {

constexpr std::uint64_t kMaxVertexId = 0xFFFFFFFEULL;  // all-ones marks padding tuples

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

std::string_view strip_comment(std::string_view line) {
  const auto c = line.find_first_of("#%");
  return c == std::string_view::npos ? line : line.substr(0, c);
}

// Parses whitespace-separated unsigned integers; returns false on junk.
bool parse_ids(std::string_view text, std::vector<std::uint64_t>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r' ||
                               text[i] == ',')) {
      ++i;
    }
    if (i >= text.size()) break;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    if (ec != std::errc{}) return false;
    const std::size_t next = static_cast<std::size_t>(p - text.data());
    if (next < text.size() && text[next] != ' ' && text[next] != '\t' && text[next] != '\r' &&
        text[next] != ',') {
      return false;
    }
    out.push_back(v);
    i = next;
  }
  return true;
}

}  // namespace

std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::vector<std::uint64_t> ids;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = strip_comment(line);
    if (!parse_ids(body, ids)) {
      throw Error(Errc::MalformedTrace, "edge list line " + std::to_string(line_no) +
                                            ": expected 'src dst'");
    }
    if (ids.empty()) continue;
    if (ids.size() != 2) {
      throw Error(Errc::MalformedTrace, "edge list line " + std::to_string(line_no) +
                                            ": expected 2 ids, got " + std::to_string(ids.size()));
    }
    if (ids[0] > kMaxVertexId || ids[1] > kMaxVertexId) {
      throw Error(Errc::VertexIdOverflow, "edge list line " + std::to_string(line_no) +
                                              ": vertex id does not fit 32 bits");
    }
    edges.push_back({static_cast<std::uint32_t>(ids[0]), static_cast<std::uint32_t>(ids[1])});
  }
  return edges;
}

std::vector<Edge> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(std::ostream& out, const std::vector<Edge>& edges) {
  for (const auto& e : edges) out << e.src << ' ' << e.dst << '\n';
}

std::vector<std::uint32_t> read_access_trace(std::istream& in) {
  std::vector<std::uint32_t> trace;
  std::string line;
  std::vector<std::uint64_t> ids;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = strip_comment(line);
    if (!parse_ids(body, ids) || ids.size() > 1) {
      throw Error(Errc::MalformedTrace, "access trace line " + std::to_string(line_no) +
                                            ": expected one vertex id");
    }
    if (ids.empty()) continue;
    if (ids[0] > kMaxVertexId) {
      throw Error(Errc::VertexIdOverflow, "access trace line " + std::to_string(line_no));
    }
    trace.push_back(static_cast<std::uint32_t>(ids[0]));
  }
  return trace;
}

std::vector<std::uint32_t> load_access_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open access trace '" + path + "'");
  return read_access_trace(in);
}

void write_access_trace(std::ostream& out, const std::vector<std::uint32_t>& trace) {
  for (auto v : trace) out << v << '\n';
}

Csr build_csr(const std::vector<Edge>& edges, std::uint32_t vertex_count) {
  std::uint64_t n = vertex_count;
  for (const auto& e : edges) n = std::max<std::uint64_t>(n, std::max(e.src, e.dst) + 1ULL);
  if (n > kMaxVertexId + 1) throw Error(Errc::VertexIdOverflow, "too many vertices");
  Csr g;
  g.vertex_count = static_cast<std::uint32_t>(n);
  g.offsets.assign(n + 1, 0);
  for (const auto& e : edges) ++g.offsets[e.src + 1];
  for (std::uint64_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];
  g.targets.resize(edges.size());
  std::vector<std::uint64_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
  for (const auto& e : edges) g.targets[cursor[e.src]++] = e.dst;
  return g;
}

std::vector<Edge> generate_rmat(std::uint32_t scale, std::uint64_t edge_count, std::uint64_t seed,
                                double a, double b, double c) {
  if (scale == 0 || scale > 31) throw Error(Errc::InvalidArgument, "R-MAT scale must be 1..31");
  if (a < 0 || b < 0 || c < 0 || a + b + c > 1) {
    throw Error(Errc::InvalidArgument, "R-MAT quadrant probabilities must sum to at most 1");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  edges.reserve(edge_count);
  for (std::uint64_t i = 0; i < edge_count; ++i) {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    for (std::uint32_t level = 0; level < scale; ++level) {
      const double r = u(rng);
      const std::uint32_t sb = r >= a + b ? 1U : 0U;
      const std::uint32_t db = (r >= a && r < a + b) || r >= a + b + c ? 1U : 0U;
      src = (src << 1) | sb;
      dst = (dst << 1) | db;
    }
    edges.push_back({src, dst});
  }
  return edges;
}

std::vector<std::uint32_t> bfs_trace(const Csr& g) {
  std::vector<std::uint32_t> trace;
  if (g.vertex_count == 0) return trace;
  std::vector<bool> seen(g.vertex_count, false);
  std::uint32_t root = 0;
  for (std::uint32_t v = 1; v < g.vertex_count; ++v) {
    if (g.degree(v) > g.degree(root)) root = v;
  }
  std::deque<std::uint32_t> q;
  auto run = [&](std::uint32_t start) {
    seen[start] = true;
    q.push_back(start);
    while (!q.empty()) {
      const std::uint32_t v = q.front();
      q.pop_front();
      if (g.degree(v) == 0) continue;
      trace.push_back(v);
      for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) {
        const std::uint32_t w = g.targets[i];
        if (!seen[w]) {
          seen[w] = true;
          q.push_back(w);
        }
      }
    }
  };
  run(root);
  for (std::uint32_t v = 0; v < g.vertex_count; ++v) {
    if (!seen[v] && g.degree(v) > 0) run(v);
  }
  return trace;
}

std::uint64_t CompressedGraphIndex::tuple_blocks() const noexcept {
  return bitlines ? ceil_div(tuple_slots, bitlines) : 0;
}

std::size_t CompressedGraphIndex::lookup(std::uint32_t vertex) const {
  if (vertex >= vertex_count) {
    throw Error(Errc::UnknownVertex, "vertex " + std::to_string(vertex) + " >= " +
                                         std::to_string(vertex_count));
  }
  const auto it = std::lower_bound(entries.begin(), entries.end(), vertex,
                                   [](const IndexEntry& e, std::uint32_t v) { return e.max_id < v; });
  return static_cast<std::size_t>(it - entries.begin());
}

std::uint32_t CompressedGraphIndex::probe_count() const noexcept {
  if (entries.size() <= 1) return 0;
  return static_cast<std::uint32_t>(std::bit_width(entries.size() - 1));
}

CompressedGraphIndex build_graph_index(const Csr& g, const GraphConfig& cfg,
                                       std::uint32_t bitlines) {
  if (cfg.big_vertex_threshold == 0) {
    throw Error(Errc::InvalidArgument, "big_vertex_threshold must be at least 1");
  }
  if (cfg.region_capacity_tuples == 0 || bitlines == 0) {
    throw Error(Errc::InvalidArgument, "region capacity and bitlines must be positive");
  }
  // The all-ones id is reserved for padding tuples.
  if (cfg.vertex_id_bits == 0 || cfg.vertex_id_bits > 32 ||
      std::uint64_t{g.vertex_count} >= (std::uint64_t{1} << cfg.vertex_id_bits)) {
    throw Error(Errc::VertexIdOverflow, std::to_string(g.vertex_count) +
                                            " vertices do not fit " +
                                            std::to_string(cfg.vertex_id_bits) + "-bit ids");
  }

  CompressedGraphIndex idx;
  idx.config = cfg;
  idx.vertex_count = g.vertex_count;
  idx.bitlines = bitlines;

  bool open = false;
  std::uint32_t run_first = 0;
  std::uint32_t run_last = 0;
  std::uint64_t run_tuples = 0;
  auto close = [&] {
    if (!open) return;
    open = false;
    TupleRegion r;
    r.first_vertex = run_first;
    r.last_vertex = run_last;
    r.tuple_count = run_tuples;
    if (run_tuples > 0) {
      const std::uint64_t pos = idx.tuple_slots % bitlines;
      const bool crosses = pos + run_tuples > bitlines;
      if (pos != 0 && (crosses || run_tuples > bitlines)) idx.tuple_slots += bitlines - pos;
      r.first_ordinal = idx.tuple_slots;
      idx.tuple_slots += run_tuples;
      if (run_tuples > bitlines) idx.tuple_slots = ceil_div(idx.tuple_slots, bitlines) * bitlines;
      idx.tuples += run_tuples;
    } else {
      r.first_ordinal = idx.tuple_slots;
    }
    idx.entries.push_back({run_last, 0, idx.regions.size()});
    idx.regions.push_back(r);
  };

  for (std::uint32_t v = 0; v < g.vertex_count; ++v) {
    const std::uint64_t d = g.degree(v);
    if (d > cfg.big_vertex_threshold) {
      close();
      idx.entries.push_back({v, d, g.offsets[v] * cfg.edge_entry_bytes});
      continue;
    }
    if (open && run_tuples + d > cfg.region_capacity_tuples) close();
    if (!open) {
      open = true;
      run_first = v;
      run_tuples = 0;
    }
    run_last = v;
    run_tuples += d;
  }
  close();
  return idx;
}

Footprint footprint(const CompressedGraphIndex& index) {
  Footprint f;
  f.baseline_bytes =
      std::uint64_t{index.vertex_count} * index.config.baseline_index_bytes_per_vertex;
  f.entry_bytes = index.entries.size() * std::uint64_t{index.config.tcam_index_entry_bytes};
  f.search_blocks = index.tuple_blocks();
  f.link_table_bytes = f.search_blocks * kLinkTableEntryBytes;
  return f;
}

std::uint64_t estimate_region_blocks(std::uint64_t edges, std::uint32_t bitlines,
                                     std::uint32_t region_capacity) {
  const std::uint64_t denom = 2ULL * bitlines - (region_capacity - 1ULL);
  return ceil_div(2 * edges, denom);
}

RegionId materialize(SearchManager& ftl, const Csr& g, const CompressedGraphIndex& index) {
  const std::uint32_t w = index.config.vertex_id_bits;
  const std::uint64_t pad_src = (std::uint64_t{1} << w) - 1;
  std::vector<TernaryValue> elements;
  std::vector<Entry> entries;
  elements.reserve(index.tuple_slots);
  entries.reserve(index.tuple_slots);
  auto push = [&](std::uint64_t src, std::uint32_t dst) {
    elements.push_back(TernaryValue::from_uint(src, w) + TernaryValue::from_uint(dst, w));
    Entry e(index.config.edge_entry_bytes, 0);
    for (std::size_t i = 0; i < 4 && i < e.size(); ++i) e[i] = static_cast<std::uint8_t>(dst >> (8 * i));
    entries.push_back(std::move(e));
  };
  for (const auto& r : index.regions) {
    if (r.tuple_count == 0) continue;
    while (elements.size() < r.first_ordinal) push(pad_src, 0);
    for (std::uint32_t v = r.first_vertex; v <= r.last_vertex; ++v) {
      for (std::uint64_t i = g.offsets[v]; i < g.offsets[v + 1]; ++i) push(v, g.targets[i]);
    }
  }
  return ftl.allocate_region(2 * w, index.config.edge_entry_bytes, elements.size(), elements,
                             entries);
}

std::vector<std::uint32_t> search_targets(SearchManager& ftl, RegionId region,
                                          const CompressedGraphIndex& index, std::uint32_t v) {
  const IndexEntry& e = index.entries[index.lookup(v)];
  if (e.edge_count != 0) {
    throw Error(Errc::InvalidArgument, "vertex " + std::to_string(v) +
                                           " keeps a direct edge list, not a search region");
  }
  const TupleRegion& r = index.regions[e.handle];
  std::vector<std::uint32_t> out;
  if (r.tuple_count == 0) return out;
  SearchRequest req;
  req.keys = {TernaryValue::from_uint(v, index.config.vertex_id_bits) +
              TernaryValue::wildcard(index.config.vertex_id_bits)};
  req.first_group = r.first_ordinal / index.bitlines;
  req.group_count = ceil_div(r.first_ordinal + r.tuple_count, index.bitlines) - req.first_group;
  const SearchResult res = ftl.execute_search(region, req);
  for (const auto& entry : res.entries) {
    std::uint32_t dst = 0;
    for (std::size_t i = 0; i < 4 && i < entry.size(); ++i) dst |= std::uint32_t{entry[i]} << (8 * i);
    out.push_back(dst);
  }
  return out;
}

const char* mode_name(Mode m) noexcept {
  switch (m) {
    case Mode::IM: return "IM";
    case Mode::OOM: return "OOM";
    case Mode::TcamNP: return "TCAM_NP";
    case Mode::TcamT: return "TCAM_T";
  }
  return "unknown";
}

namespace {

void edge_list_reads(const SsdConfig& cfg, Scheduler& s, std::uint64_t byte_offset,
                     std::uint64_t bytes, std::uint64_t group) {
  if (bytes == 0) return;
  const std::uint64_t p0 = byte_offset / cfg.page_size;
  const std::uint64_t p1 = (byte_offset + bytes - 1) / cfg.page_size;
  for (std::uint64_t p = p0; p <= p1; ++p) {
    s.submit(read_op(cfg, data_page_address(cfg, p), cfg.page_size, group));
  }
}

}  // namespace

LatencyReport access_cost(const SsdConfig& cfg, const Csr& g, const CompressedGraphIndex* index,
                          std::uint32_t v, Mode mode, MovementCounters& counters) {
  if (v >= g.vertex_count) {
    throw Error(Errc::UnknownVertex, "vertex " + std::to_string(v) + " >= " +
                                         std::to_string(g.vertex_count));
  }
  const std::uint64_t edge_bytes = 8;  // baseline adjacency entries
  const std::uint64_t edge_pages = ceil_div(g.edge_count() * edge_bytes, cfg.page_size);
  const std::uint64_t index_pages = ceil_div(std::uint64_t{g.vertex_count} * 8, cfg.page_size);

  Scheduler s(cfg, &counters);
  FlashOp nvme;
  nvme.kind = OpKind::Nvme;
  s.submit(nvme);
  const std::uint64_t d = g.degree(v);

  switch (mode) {
    case Mode::IM: {
      FlashOp probe;
      probe.kind = OpKind::HostProbe;
      probe.parallel_group = 1;
      s.submit(probe);
      edge_list_reads(cfg, s, g.offsets[v] * edge_bytes, d * edge_bytes, 2);
      break;
    }
    case Mode::OOM: {
      const std::uint64_t p = edge_pages + std::uint64_t{v} * 8 / cfg.page_size;
      s.submit(read_op(cfg, data_page_address(cfg, p), cfg.page_size, 1));
      FlashOp again = nvme;
      again.parallel_group = 2;
      s.submit(again);
      edge_list_reads(cfg, s, g.offsets[v] * edge_bytes, d * edge_bytes, 3);
      break;
    }
    case Mode::TcamNP:
    case Mode::TcamT: {
      if (!index) throw Error(Errc::InvalidArgument, "TCAM modes need a compressed index");
      if (index->vertex_count != g.vertex_count) {
        throw Error(Errc::InvalidArgument, "index was built for another graph");
      }
      if (const std::uint32_t probes = index->probe_count(); probes > 0) {
        FlashOp probe;
        probe.kind = OpKind::HostProbe;
        probe.units = probes;
        probe.row_miss = true;
        probe.parallel_group = 1;
        s.submit(probe);
      }
      const IndexEntry& e = index->entries[index->lookup(v)];
      if (e.edge_count != 0) {
        edge_list_reads(cfg, s, e.handle, e.edge_count * index->config.edge_entry_bytes, 2);
        break;
      }
      const TupleRegion& r = index->regions[e.handle];
      if (r.tuple_count == 0) break;
      const std::uint64_t B = index->bitlines;
      const std::uint64_t first_block = r.first_ordinal / B;
      const std::uint64_t end_block = ceil_div(r.first_ordinal + r.tuple_count, B);
      const std::uint64_t vo = r.first_ordinal + (g.offsets[v] - g.offsets[r.first_vertex]);
      const std::uint64_t bits_per_burst = 8ULL * cfg.burst_bytes;
      for (std::uint64_t blk = first_block; blk < end_block; ++blk) {
        const std::uint64_t lo = std::max(vo, blk * B);
        const std::uint64_t hi = std::min(vo + d, (blk + 1) * B);
        std::uint64_t bursts = 0;
        if (lo < hi) bursts = (hi - 1 - blk * B) / bits_per_burst - (lo - blk * B) / bits_per_burst + 1;
        s.submit(search_op(cfg, search_slot_address(cfg, blk), bursts * cfg.burst_bytes, 2));
      }
      // No locality: every matched tuple is fetched from its own page.
      const std::uint64_t tuple_base = edge_pages + index_pages;
      HostBlockStream hs(d * index->config.edge_entry_bytes, cfg.host_block_bytes);
      for (std::uint64_t i = 0; i < d; ++i) {
        std::uint64_t host = hs.push(index->config.edge_entry_bytes);
        if (i + 1 == d) host += hs.flush();
        s.submit(read_op(cfg, data_page_address(cfg, tuple_base + vo + i), host, 3));
      }
      break;
    }
  }
  return s.report();
}

TraverseResult traverse(const SsdConfig& cfg, const Csr& g, const CompressedGraphIndex* index,
                        const std::vector<std::uint32_t>& trace, Mode mode) {
  TraverseResult out;
  out.per_access_us.reserve(trace.size());
  for (std::uint32_t v : trace) {
    const LatencyReport r = access_cost(cfg, g, index, v, mode, out.counters);
    out.per_access_us.push_back(r.total.count());
    out.latency += r;
  }
  return out;
}

}  // namespace nandcam::graph
