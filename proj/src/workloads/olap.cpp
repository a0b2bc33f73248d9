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

#include "nandcam/workloads/olap.hpp"

#include <algorithm>
#include <cmath>

#include "nandcam/error.hpp"
#include "nandcam/ftl.hpp"

namespace nandcam::olap {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

void check(const QuerySpec& s) {
  if (s.row_bytes == 0) throw Error(Errc::InvalidArgument, "row_bytes must be positive");
  if (!(s.selectivity >= 0 && s.selectivity <= 1)) {
    throw Error(Errc::InvalidArgument, "selectivity must lie in [0, 1]");
  }
  if (!(s.locality >= 0 && s.locality <= 1)) {
    throw Error(Errc::InvalidArgument, "locality must lie in [0, 1]");
  }
  if (s.sub_key_count == 0) throw Error(Errc::InvalidArgument, "sub_key_count must be positive");
}

}  // namespace

std::uint64_t read_count(std::uint64_t matches, std::uint32_t row_bytes, std::uint32_t page_size,
                         double locality) {
  const double lo = static_cast<double>(matches);
  const double hi = static_cast<double>(ceil_div(matches * row_bytes, page_size));
  return static_cast<std::uint64_t>(std::llround(lo + (hi - lo) * locality));
}

Counts count(const SsdConfig& cfg, const QuerySpec& spec) {
  check(spec);
  Counts c;
  c.baseline_pages = ceil_div(spec.row_count * spec.row_bytes, cfg.page_size);
  const std::uint64_t bpe = ceil_div(spec.element_bits, cfg.native_element_size());
  c.search_blocks = ceil_div(spec.row_count, cfg.bitlines()) * bpe;
  c.srch_count = c.search_blocks * spec.sub_key_count;
  c.vector_bytes = c.srch_count * cfg.page_size;
  c.matches = static_cast<std::uint64_t>(
      std::llround(spec.selectivity * static_cast<double>(spec.row_count)));
  c.read_count = read_count(c.matches, spec.row_bytes, cfg.page_size, spec.locality);
  c.baseline_bytes = c.baseline_pages * cfg.page_size;
  c.tcam_cpu_fe_bytes = c.read_count * cfg.page_size;
  c.tcam_fe_be_bytes = c.vector_bytes + c.read_count * cfg.page_size;
  c.link_table_bytes = ceil_div(spec.row_count, cfg.bitlines()) * kLinkTableEntryBytes;
  return c;
}

RunResult run(const SsdConfig& cfg, const QuerySpec& spec, Mode mode) {
  const Counts c = count(cfg, spec);
  RunResult out;
  Scheduler s(cfg, &out.counters);
  FlashOp nvme;
  nvme.kind = OpKind::Nvme;
  s.submit(nvme);

  if (mode == Mode::BaselineScan) {
    for (std::uint64_t p = 0; p < c.baseline_pages; ++p) {
      s.submit(read_op(cfg, data_page_address(cfg, p), cfg.page_size, 1));
    }
  } else {
    SearchManager ftl(cfg);
    const RegionId id = ftl.allocate_region(spec.element_bits, spec.row_bytes, spec.row_count);
    const SearchRegionDescriptor d = ftl.descriptor(id);
    const auto links = ftl.link_table(id);
    out.search_blocks = d.blocks.size();

    // Each sub-key of an AND keeps an equal share of the filtering.
    const double density = spec.selectivity <= 0
                               ? 0.0
                               : std::pow(spec.selectivity, 1.0 / spec.sub_key_count);
    const std::uint64_t groups = d.blocks.size() / d.blocks_per_element;
    for (std::uint64_t g = 0; g < groups; ++g) {
      const std::uint64_t used =
          std::min<std::uint64_t>(d.elements_per_block, spec.row_count - g * d.elements_per_block);
      const std::uint64_t used_bits = ceil_div(used, 8 * cfg.burst_bytes) * 8 * cfg.burst_bytes;
      const auto decoded = static_cast<std::uint64_t>(
          std::llround(expected_buffered_bytes(used_bits, cfg.burst_bytes, density)));
      for (std::uint32_t k = 0; k < spec.sub_key_count; ++k) {
        for (std::uint32_t b = 0; b < d.blocks_per_element; ++b) {
          s.submit(search_op(cfg, d.blocks[g * d.blocks_per_element + b], decoded, 1));
        }
      }
    }

    // Matched pages spread evenly over the table's data pages.
    const std::uint64_t pages_per_group = ceil_div(
        std::uint64_t{d.elements_per_block} * spec.row_bytes, cfg.page_size);
    const std::uint64_t data_pages = pages_per_group * groups;
    for (std::uint64_t i = 0; i < c.read_count; ++i) {
      const std::uint64_t p = i * data_pages / std::max<std::uint64_t>(c.read_count, 1);
      const std::uint64_t base = links[p / pages_per_group].data_base_address / cfg.page_size;
      s.submit(read_op(cfg, data_page_address(cfg, base + p % pages_per_group), cfg.page_size,
                       2));
    }
  }
  out.latency = s.report();
  out.srch_count = out.counters.srch_count;
  out.read_count = out.counters.read_count;
  return out;
}

SweepResult sweep(const SsdConfig& cfg, const QuerySpec& spec,
                  const std::vector<double>& selectivities,
                  const std::vector<double>& localities) {
  SweepResult out;
  out.selectivities = selectivities;
  out.localities = localities;
  out.baseline_us = run(cfg, spec, Mode::BaselineScan).time_us();
  for (double sel : selectivities) {
    std::vector<double> times;
    std::vector<double> speed;
    for (double loc : localities) {
      QuerySpec q = spec;
      q.selectivity = sel;
      q.locality = loc;
      const double t = run(cfg, q, Mode::Tcam).time_us();
      times.push_back(t);
      speed.push_back(out.baseline_us / t);
    }
    out.tcam_us.push_back(std::move(times));
    out.speedup.push_back(std::move(speed));
  }
  return out;
}

}  // namespace nandcam::olap
