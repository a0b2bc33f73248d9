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

#include "nandcam/backend.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "nandcam/error.hpp"

namespace nandcam {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& value, std::size_t line) {
  double v = 0;
  std::size_t used = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != value.size() || !std::isfinite(v)) {
    throw Error(Errc::InvalidConfig, "line " + std::to_string(line) + ": '" + key +
                                         "' expects a number, got '" + value + "'");
  }
  return v;
}

struct Field {
  std::function<void(SsdConfig&, double)> set;
  std::function<double(const SsdConfig&)> get;
};

template <class T>
Field count_field(T SsdConfig::*m) {
  return {[m](SsdConfig& c, double v) {
            if (v < 0 || v != std::floor(v)) throw Error(Errc::InvalidConfig, "expected a count");
            c.*m = static_cast<T>(v);
          },
          [m](const SsdConfig& c) { return static_cast<double>(c.*m); }};
}

Field time_field(Micros SsdConfig::*m, double scale_to_us) {
  return {[m, scale_to_us](SsdConfig& c, double v) { c.*m = Micros(v * scale_to_us); },
          [m, scale_to_us](const SsdConfig& c) { return (c.*m).count() / scale_to_us; }};
}

Field rate_field(double SsdConfig::*m) {
  return {[m](SsdConfig& c, double v) { c.*m = v; }, [m](const SsdConfig& c) { return c.*m; }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"channels", count_field(&SsdConfig::channels)},
      {"packages_per_channel", count_field(&SsdConfig::packages_per_channel)},
      {"dies_per_package", count_field(&SsdConfig::dies_per_package)},
      {"planes_per_die", count_field(&SsdConfig::planes_per_die)},
      {"blocks_per_plane", count_field(&SsdConfig::blocks_per_plane)},
      {"pages_per_block", count_field(&SsdConfig::pages_per_block)},
      {"page_size", count_field(&SsdConfig::page_size)},
      {"t_read", time_field(&SsdConfig::t_read, 1.0)},
      {"t_search", time_field(&SsdConfig::t_search, 1.0)},
      {"t_write_slc", time_field(&SsdConfig::t_write_slc, 1.0)},
      {"t_write_mlc", time_field(&SsdConfig::t_write_mlc, 1.0)},
      {"t_write_tlc", time_field(&SsdConfig::t_write_tlc, 1.0)},
      {"t_nvme_init", time_field(&SsdConfig::t_nvme_init, 1.0)},
      {"dram_access", time_field(&SsdConfig::dram_access, 1e-3)},
      {"dram_row_miss", time_field(&SsdConfig::dram_row_miss, 1e-3)},
      {"channel_bandwidth", rate_field(&SsdConfig::channel_bandwidth)},
      {"host_bandwidth", rate_field(&SsdConfig::host_bandwidth)},
      {"decode_rate", rate_field(&SsdConfig::decode_rate)},
      {"burst_bytes", count_field(&SsdConfig::burst_bytes)},
      {"host_block_bytes", count_field(&SsdConfig::host_block_bytes)},
      {"write_inversion", count_field(&SsdConfig::write_inversion)},
      {"max_blocks_per_element", count_field(&SsdConfig::max_blocks_per_element)},
  };
  return table;
}

}  // namespace

void SsdConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw Error(Errc::InvalidConfig, what);
  };
  need(channels > 0 && packages_per_channel > 0 && dies_per_package > 0, "empty die geometry");
  need(planes_per_die > 0 && blocks_per_plane > 0, "empty block geometry");
  need(pages_per_block >= 2, "pages_per_block must be at least 2");
  need(page_size > 0, "page_size must be positive");
  need(t_read.count() > 0 && t_search.count() > 0, "flash latencies must be positive");
  need(t_write_slc.count() > 0 && t_write_mlc.count() > 0 && t_write_tlc.count() > 0,
       "program latencies must be positive");
  need(t_nvme_init.count() > 0, "t_nvme_init must be positive");
  need(dram_access.count() > 0 && dram_row_miss.count() > 0, "DRAM latencies must be positive");
  need(channel_bandwidth > 0 && host_bandwidth > 0 && decode_rate > 0,
       "bandwidths must be positive");
  need(burst_bytes > 0 && page_size % burst_bytes == 0, "burst_bytes must divide page_size");
  need(host_block_bytes > 0, "host_block_bytes must be positive");
  need(max_blocks_per_element > 0, "max_blocks_per_element must be positive");
}

SsdConfig parse_config(std::string_view text) {
  SsdConfig cfg;
  std::map<std::string, const Field*> by_name;
  for (const auto& [name, f] : fields()) by_name.emplace(name, &f);

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::InvalidConfig,
                  "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto it = by_name.find(key);
    if (it == by_name.end()) {
      throw Error(Errc::InvalidConfig,
                  "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    it->second->set(cfg, parse_number(key, value, line_no));
  }
  cfg.validate();
  return cfg;
}

SsdConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const SsdConfig& cfg) {
  std::ostringstream out;
  out.precision(12);
  for (const auto& [name, f] : fields()) out << name << " = " << f.get(cfg) << '\n';
  return out.str();
}

std::uint64_t total_blocks(const SsdConfig& cfg) noexcept {
  return std::uint64_t{cfg.channels} * cfg.packages_per_channel * cfg.dies_per_package *
         cfg.planes_per_die * cfg.blocks_per_plane;
}

void check_address(const SsdConfig& cfg, const PhysicalAddress& a) {
  if (a.channel >= cfg.channels || a.die >= cfg.dies_per_channel() ||
      a.plane >= cfg.planes_per_die || a.block >= cfg.blocks_per_plane ||
      a.page >= cfg.pages_per_block) {
    throw Error(Errc::AddressOutOfRange,
                "address (ch " + std::to_string(a.channel) + ", die " + std::to_string(a.die) +
                    ", plane " + std::to_string(a.plane) + ", block " + std::to_string(a.block) +
                    ", page " + std::to_string(a.page) + ") outside the configured geometry");
  }
}

std::vector<PhysicalAddress> superblock_of(const SsdConfig& cfg, std::uint32_t block_offset) {
  if (block_offset >= cfg.superblock_offsets()) {
    throw Error(Errc::OffsetOutOfRange, "superblock offset " + std::to_string(block_offset) +
                                            " >= " + std::to_string(cfg.superblock_offsets()));
  }
  std::vector<PhysicalAddress> out;
  out.reserve(cfg.die_count());
  for (std::uint32_t d = 0; d < cfg.dies_per_channel(); ++d) {
    for (std::uint32_t c = 0; c < cfg.channels; ++c) {
      out.push_back({c, d, block_offset / cfg.blocks_per_plane,
                     block_offset % cfg.blocks_per_plane, 0});
    }
  }
  return out;
}

MovementCounters& MovementCounters::operator+=(const MovementCounters& o) noexcept {
  cpu_fe_bytes += o.cpu_fe_bytes;
  fe_be_bytes += o.fe_be_bytes;
  srch_count += o.srch_count;
  read_count += o.read_count;
  program_count += o.program_count;
  return *this;
}

MovementCounters operator-(MovementCounters a, const MovementCounters& b) noexcept {
  a.cpu_fe_bytes -= b.cpu_fe_bytes;
  a.fe_be_bytes -= b.fe_be_bytes;
  a.srch_count -= b.srch_count;
  a.read_count -= b.read_count;
  a.program_count -= b.program_count;
  return a;
}

std::string_view component_name(Component c) noexcept {
  switch (c) {
    case Component::Nvme: return "nvme";
    case Component::Translation: return "translation";
    case Component::FlashArray: return "flash_array_time";
    case Component::FeBeTransfer: return "fe_be_transfer";
    case Component::Decode: return "decode";
    case Component::CpuFeTransfer: return "cpu_fe_transfer";
  }
  return "unknown";
}

Micros LatencyReport::component_sum() const noexcept {
  Micros s{0};
  for (auto c : components) s += c;
  return s;
}

Micros LatencyReport::max_component() const noexcept {
  return *std::max_element(components.begin(), components.end());
}

std::vector<std::pair<std::string, Micros>> LatencyReport::labeled() const {
  std::vector<std::pair<std::string, Micros>> out;
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    out.emplace_back(std::string(component_name(static_cast<Component>(i))), components[i]);
  }
  return out;
}

LatencyReport& LatencyReport::operator+=(const LatencyReport& o) noexcept {
  total += o.total;
  for (std::size_t i = 0; i < kComponentCount; ++i) components[i] += o.components[i];
  return *this;
}

Scheduler::Scheduler(const SsdConfig& cfg, MovementCounters* sink)
    : cfg_(cfg), sink_(sink) {
  const std::size_t n = kFixed + cfg.die_count() + cfg.channels;
  free_.assign(n, 0.0);
  last_.assign(n, {-1, 0});
}

std::uint32_t Scheduler::die_resource(const PhysicalAddress& a) const noexcept {
  return kFixed + a.channel * cfg_.dies_per_channel() + a.die;
}

std::uint32_t Scheduler::bus_resource(const PhysicalAddress& a) const noexcept {
  return kFixed + cfg_.die_count() + a.channel;
}

double Scheduler::stage(std::uint32_t resource, Component label, double ready, double duration) {
  if (duration <= 0) return ready;
  const double start = std::max({ready, free_[resource], group_start_});
  const double end = start + duration;
  free_[resource] = end;
  horizon_ = std::max(horizon_, end);

  const auto li = static_cast<std::size_t>(label);
  auto& list = pending_[li];
  auto& [last_label, last_idx] = last_[resource];
  if (last_label == static_cast<std::int32_t>(li) && last_idx < list.size() &&
      list[last_idx].end == start) {
    list[last_idx].end = end;
  } else {
    list.push_back({start, end});
    last_label = static_cast<std::int32_t>(li);
    last_idx = list.size() - 1;
    if (list.size() >= (std::size_t{1} << 22)) compact(li);
  }
  return end;
}

void Scheduler::compact(std::size_t label) {
  auto& list = pending_[label];
  std::sort(list.begin(), list.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::size_t w = 0;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (w > 0 && list[i].start <= list[w - 1].end) {
      list[w - 1].end = std::max(list[w - 1].end, list[i].end);
    } else {
      list[w++] = list[i];
    }
  }
  list.resize(w);
  for (auto& l : last_) {
    if (l.first == static_cast<std::int32_t>(label)) l.first = -1;
  }
}

void Scheduler::close_group() {
  for (std::size_t li = 0; li < kComponentCount; ++li) {
    compact(li);
    for (const auto& iv : pending_[li]) closed_[li] += iv.end - iv.start;
    pending_[li].clear();
  }
  for (auto& l : last_) l.first = -1;
  group_start_ = horizon_;
}

void Scheduler::barrier() { close_group(); }

void Scheduler::submit(const FlashOp& op) {
  if (any_ && op.parallel_group != group_) close_group();
  any_ = true;
  group_ = op.parallel_group;

  MovementCounters delta{};
  const double t0 = group_start_;
  const double cb = cfg_.channel_bandwidth / 1e6;  // bytes per microsecond
  const double hb = cfg_.host_bandwidth / 1e6;
  switch (op.kind) {
    case OpKind::Read: {
      check_address(cfg_, op.address);
      double t = stage(Firmware, Component::Translation, t0, cfg_.dram_access.count());
      t = stage(die_resource(op.address), Component::FlashArray, t, cfg_.t_read.count());
      t = stage(bus_resource(op.address), Component::FeBeTransfer, t, op.payload_bytes / cb);
      stage(Host, Component::CpuFeTransfer, t, op.host_bytes / hb);
      delta.fe_be_bytes = op.payload_bytes;
      delta.cpu_fe_bytes = op.host_bytes;
      delta.read_count = 1;
      break;
    }
    case OpKind::Search: {
      check_address(cfg_, op.address);
      double t = stage(Firmware, Component::Translation, t0, cfg_.dram_access.count());
      t = stage(die_resource(op.address), Component::FlashArray, t, cfg_.t_search.count());
      t = stage(bus_resource(op.address), Component::FeBeTransfer, t, op.payload_bytes / cb);
      stage(Decoder, Component::Decode, t, op.decoded_bytes / (cfg_.decode_rate / 1e6));
      delta.fe_be_bytes = op.payload_bytes;
      delta.srch_count = 1;
      break;
    }
    case OpKind::Program: {
      check_address(cfg_, op.address);
      double t = stage(Firmware, Component::Translation, t0, cfg_.dram_access.count());
      t = stage(bus_resource(op.address), Component::FeBeTransfer, t, op.payload_bytes / cb);
      stage(die_resource(op.address), Component::FlashArray, t,
            cfg_.t_write_slc.count() * op.units);
      delta.fe_be_bytes = op.payload_bytes;
      delta.program_count = 1;
      break;
    }
    case OpKind::HostTransfer:
      stage(Host, Component::CpuFeTransfer, t0, op.payload_bytes / hb);
      delta.cpu_fe_bytes = op.payload_bytes;
      break;
    case OpKind::HostProbe: {
      const double per = op.row_miss ? cfg_.dram_row_miss.count() : cfg_.dram_access.count();
      stage(Firmware, Component::Translation, t0, per * op.units);
      break;
    }
    case OpKind::Nvme:
      stage(Firmware, Component::Nvme, t0, cfg_.t_nvme_init.count());
      break;
  }
  local_ += delta;
  if (sink_) *sink_ += delta;
}

LatencyReport Scheduler::report() {
  close_group();
  LatencyReport r;
  r.total = Micros(horizon_);
  for (std::size_t i = 0; i < kComponentCount; ++i) r.components[i] = Micros(closed_[i]);
  return r;
}

LatencyReport schedule(const SsdConfig& cfg, std::span<const FlashOp> ops,
                       MovementCounters& counters) {
  std::vector<std::size_t> order(ops.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ops[a].parallel_group < ops[b].parallel_group;
  });
  Scheduler s(cfg, &counters);
  for (std::size_t i : order) s.submit(ops[i]);
  return s.report();
}

}  // namespace nandcam
