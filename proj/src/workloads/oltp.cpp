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

#include "nandcam/workloads/oltp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "nandcam/error.hpp"

namespace nandcam::oltp {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<double> zipf_weights(std::uint32_t max_pages, double s) {
  std::vector<double> w(max_pages);
  for (std::uint32_t k = 1; k <= max_pages; ++k) w[k - 1] = std::pow(k, -s);
  return w;
}

double fraction_above(std::uint32_t max_pages, std::uint32_t threshold, double s) {
  const auto w = zipf_weights(max_pages, s);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const double above = std::accumulate(w.begin() + std::min(threshold, max_pages), w.end(), 0.0);
  return above / total;
}

}  // namespace

Trace read_trace(std::istream& in) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (line_no == 1 && !f.empty() && f[0] == "query_id") continue;
    if (f.size() != 4) {
      throw Error(Errc::MalformedTrace,
                  "line " + std::to_string(line_no) + ": expected 4 fields, got " +
                      std::to_string(f.size()));
    }
    Query q;
    try {
      std::size_t used = 0;
      q.query_id = std::stoull(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument("id");
      const long long pages = std::stoll(f[3], &used);
      if (used != f[3].size() || pages < 1) throw std::invalid_argument("pages");
      q.baseline_pages = static_cast<std::uint32_t>(pages);
    } catch (const std::exception&) {
      throw Error(Errc::MalformedTrace, "line " + std::to_string(line_no) +
                                            ": query_id and baseline_pages >= 1 must be integers");
    }
    q.index = f[1];
    q.key = f[2];
    trace.push_back(std::move(q));
  }
  return trace;
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open trace '" + path + "'");
  return read_trace(in);
}

void write_trace(std::ostream& out, const Trace& trace) {
  out << "query_id,index,key,baseline_pages\n";
  for (const auto& q : trace) {
    out << q.query_id << ',' << q.index << ',' << q.key << ',' << q.baseline_pages << '\n';
  }
}

double solve_zipf_exponent(std::uint32_t max_pages, std::uint32_t threshold,
                           double fraction) {
  if (max_pages <= threshold || fraction <= 0 || fraction >= 1) {
    throw Error(Errc::InvalidArgument, "no Zipf exponent reaches that fraction");
  }
  // fraction_above decreases as s grows.
  double lo = -8.0;
  double hi = 8.0;
  if (fraction_above(max_pages, threshold, lo) < fraction ||
      fraction_above(max_pages, threshold, hi) > fraction) {
    throw Error(Errc::InvalidArgument, "target fraction outside the reachable range");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (fraction_above(max_pages, threshold, mid) > fraction) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

Trace generate_trace(const GenParams& p) {
  const double s = solve_zipf_exponent(p.max_pages, p.threshold_pages, p.fraction_above);
  const auto w = zipf_weights(p.max_pages, s);
  std::mt19937_64 rng(p.seed);
  std::discrete_distribution<std::uint32_t> pages(w.begin(), w.end());
  std::uniform_int_distribution<std::uint64_t> keys(0, 2'999'999);
  static const char* kIndexes[] = {"customer", "stock", "item", "order", "district"};
  Trace trace;
  trace.reserve(p.queries);
  for (std::uint64_t i = 0; i < p.queries; ++i) {
    Query q;
    q.query_id = i;
    q.index = kIndexes[rng() % 5];
    q.key = std::to_string(keys(rng));
    q.baseline_pages = pages(rng) + 1;
    trace.push_back(std::move(q));
  }
  return trace;
}

Database build_database(const SsdConfig& cfg, const Setup& setup) {
  if (setup.warehouses == 0) throw Error(Errc::InvalidArgument, "no warehouses");
  Database db{SearchManager(cfg), {}};
  const std::uint64_t per = (setup.total_rows + setup.warehouses - 1) / setup.warehouses;
  std::uint64_t left = setup.total_rows;
  for (std::uint32_t w = 0; w < setup.warehouses; ++w) {
    const std::uint64_t n = std::min(per, left);
    left -= n;
    db.regions.push_back(db.ftl.allocate_region(setup.key_bits, setup.entry_bytes, n));
  }
  return db;
}

LatencyReport baseline_query(const SsdConfig& cfg, std::uint32_t pages, std::uint32_t channel,
                             MovementCounters& counters) {
  Scheduler s(cfg, &counters);
  FlashOp nvme;
  nvme.kind = OpKind::Nvme;
  s.submit(nvme);
  FlashOp probe;
  probe.kind = OpKind::HostProbe;
  probe.parallel_group = 1;
  s.submit(probe);
  for (std::uint32_t i = 0; i < pages; ++i) {
    PhysicalAddress a{channel % cfg.channels, i % cfg.dies_per_channel(), 0, 0, 0};
    a.block = cfg.blocks_per_plane - 1 - (i / cfg.dies_per_channel()) % cfg.blocks_per_plane;
    s.submit(read_op(cfg, a, cfg.page_size, 2));
  }
  return s.report();
}

LatencyReport tcam_query(const Database& db, const Query& q, const Setup& setup,
                         MovementCounters& counters) {
  const SsdConfig& cfg = db.ftl.config();
  const std::uint64_t h = fnv1a(q.index + ":" + q.key);
  const RegionId id = db.regions[h % db.regions.size()];
  const SearchRegionDescriptor d = db.ftl.descriptor(id);
  const auto links = db.ftl.link_table(id);
  if (d.element_count == 0) throw Error(Errc::InvalidArgument, "empty warehouse region");

  // Matching rows are consecutive ordinals starting at a key-derived position.
  const std::uint64_t m = std::max<std::uint32_t>(1, setup.matches_per_query);
  const std::uint64_t first = (h >> 8) % d.element_count;
  std::vector<std::uint64_t> ords;
  for (std::uint64_t i = 0; i < m; ++i) ords.push_back((first + i) % d.element_count);

  Scheduler s(cfg, &counters);
  FlashOp nvme;
  nvme.kind = OpKind::Nvme;
  s.submit(nvme);

  const std::uint64_t epb = d.elements_per_block;
  const std::uint64_t bits_per_burst = std::uint64_t{cfg.burst_bytes} * 8;
  std::set<std::uint64_t> groups;
  for (auto o : ords) groups.insert(o / epb);
  for (std::uint64_t g : groups) {
    std::set<std::uint64_t> bursts;
    for (auto o : ords) {
      if (o / epb == g) bursts.insert((o % epb) / bits_per_burst);
    }
    for (std::uint32_t b = 0; b < d.blocks_per_element; ++b) {
      s.submit(search_op(cfg, d.blocks[g * d.blocks_per_element + b],
                         bursts.size() * cfg.burst_bytes, 1));
    }
  }

  std::vector<std::uint64_t> pages;
  for (auto o : ords) {
    const std::uint64_t addr = links[o / epb].data_base_address + (o % epb) * d.entry_bytes;
    const std::uint64_t p = addr / cfg.page_size;
    if (std::find(pages.begin(), pages.end(), p) == pages.end()) pages.push_back(p);
  }
  HostBlockStream hs(m * d.entry_bytes, cfg.host_block_bytes);
  const std::uint64_t per_page = m * d.entry_bytes / pages.size();
  for (std::size_t i = 0; i < pages.size(); ++i) {
    std::uint64_t host = hs.push(i + 1 == pages.size() ? m * d.entry_bytes - per_page * i
                                                       : per_page);
    if (i + 1 == pages.size()) host += hs.flush();
    s.submit(read_op(cfg, data_page_address(cfg, pages[i]), host, 2));
  }
  return s.report();
}

double ReplayResult::total_us() const noexcept {
  return std::accumulate(latencies_us.begin(), latencies_us.end(), 0.0);
}

ReplayResult replay(const SsdConfig& cfg, const Trace& trace, Mode mode, const Setup& setup) {
  ReplayResult out;
  out.latencies_us.reserve(trace.size());
  std::optional<Database> db;
  if (mode == Mode::Tcam) {
    db.emplace(build_database(cfg, setup));
    out.search_blocks = db->ftl.search_blocks_in_use();
  }
  for (const auto& q : trace) {
    if (q.baseline_pages < 1) {
      throw Error(Errc::MalformedTrace, "query " + std::to_string(q.query_id) +
                                            " fetches no pages");
    }
    LatencyReport r;
    if (mode == Mode::Baseline) {
      const auto channel = static_cast<std::uint32_t>(fnv1a(q.index + ":" + q.key) %
                                                      cfg.channels);
      r = baseline_query(cfg, q.baseline_pages, channel, out.counters);
    } else {
      r = tcam_query(*db, q, setup, out.counters);
    }
    out.latencies_us.push_back(r.total.count());
    out.breakdown += r;
  }
  return out;
}

std::uint32_t crossover_pages(const SsdConfig& cfg, const Setup& setup,
                              std::uint32_t max_pages) {
  Database db = build_database(cfg, setup);
  MovementCounters sink;
  Query q;
  q.index = "probe";
  q.key = "0";
  const double tcam = tcam_query(db, q, setup, sink).total.count();
  std::uint32_t last_loss = 0;
  for (std::uint32_t k = 1; k <= max_pages; ++k) {
    if (tcam >= baseline_query(cfg, k, 0, sink).total.count()) last_loss = k;
  }
  return last_loss;
}

std::vector<std::pair<std::uint32_t, double>> page_cdf(const Trace& trace) {
  std::uint32_t max_k = 0;
  for (const auto& q : trace) max_k = std::max(max_k, q.baseline_pages);
  std::vector<std::uint64_t> hist(max_k + 1, 0);
  for (const auto& q : trace) ++hist[q.baseline_pages];
  std::vector<std::pair<std::uint32_t, double>> out;
  std::uint64_t cum = 0;
  for (std::uint32_t k = 1; k <= max_k; ++k) {
    cum += hist[k];
    out.emplace_back(k, static_cast<double>(cum) / static_cast<double>(trace.size()));
  }
  return out;
}

std::vector<std::pair<double, double>> latency_cdf(std::vector<double> lat) {
  std::sort(lat.begin(), lat.end());
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    if (i + 1 < lat.size() && lat[i + 1] == lat[i]) continue;
    out.emplace_back(lat[i], static_cast<double>(i + 1) / static_cast<double>(lat.size()));
  }
  return out;
}

}  // namespace nandcam::oltp
