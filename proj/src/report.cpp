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

#include "nandcam/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nandcam/error.hpp"
#include "nandcam/ftl.hpp"
#include "nandcam/nvme.hpp"
#include "nandcam/workloads/graph.hpp"
#include "nandcam/workloads/oltp.hpp"

namespace nandcam::report {

namespace fs = std::filesystem;

const char* experiment_name(Experiment e) noexcept {
  switch (e) {
    case Experiment::Oltp: return "oltp";
    case Experiment::Olap: return "olap";
    case Experiment::OlapSweep: return "olap_sweep";
    case Experiment::Graph: return "graph";
    case Experiment::Microbench: return "microbench";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::Oltp, Experiment::Olap, Experiment::OlapSweep, Experiment::Graph,
                 Experiment::Microbench}) {
    if (name == experiment_name(e)) return e;
  }
  throw Error(Errc::InvalidArgument, "unknown experiment '" + name +
                                         "' (expected oltp, olap, olap_sweep, graph, microbench)");
}

std::string format_number(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, p) : std::string("nan");
}

namespace {

std::string num(std::uint64_t v) { return std::to_string(v); }

void require_readable(const std::string& path, const char* what) {
  if (path.empty()) return;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(Errc::Io, std::string(what) + " '" + path + "' is not a readable file");
  }
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, std::string("cannot open ") + what + " '" + path + "'");
}

bool in_unit_range(double v) { return v >= 0.0 && v <= 1.0; }

const std::vector<std::string>& modes_for(Experiment e) {
  static const std::vector<std::string> oltp{"all", "baseline", "tcam"};
  static const std::vector<std::string> olap{"all", "baseline", "tcam", "q1", "q2"};
  static const std::vector<std::string> graph{"all", "IM", "OOM", "TCAM_NP", "TCAM_T"};
  static const std::vector<std::string> none{"all"};
  switch (e) {
    case Experiment::Oltp: return oltp;
    case Experiment::Olap:
    case Experiment::OlapSweep: return olap;
    case Experiment::Graph: return graph;
    case Experiment::Microbench: return none;
  }
  return none;
}

bool wants(const ExperimentSpec& spec, const std::string& mode) {
  return spec.mode == "all" || spec.mode == mode;
}

SummaryRow summary_of(const std::string& label, const SsdConfig& cfg, double time_us,
                      const MovementCounters& c, std::uint64_t search_blocks) {
  SummaryRow s;
  s.label = label;
  s.time_us = time_us;
  s.counters = c;
  s.search_blocks = search_blocks;
  s.total_blocks = total_blocks(cfg);
  s.link_table_bytes = search_blocks * kLinkTableEntryBytes;
  return s;
}

// ---- oltp ----

void run_oltp(const ExperimentSpec& spec, const SsdConfig& cfg, Report& rep) {
  oltp::Trace trace;
  if (spec.trace_path.empty()) {
    oltp::GenParams gp;
    gp.queries = spec.queries;
    gp.seed = spec.seed;
    trace = oltp::generate_trace(gp);
  } else {
    trace = oltp::load_trace(spec.trace_path);
  }
  const oltp::Setup setup;

  Table cdf{"oltp_latency_cdf.csv", {"mode", "quantile", "latency_us"}, {}};
  auto add = [&](const char* label, oltp::Mode m) {
    oltp::ReplayResult r = oltp::replay(cfg, trace, m, setup);
    rep.breakdown.push_back({label, trace.size(), r.breakdown});
    rep.summary.push_back(summary_of(label, cfg, r.total_us(), r.counters, r.search_blocks));
    const auto points = oltp::latency_cdf(r.latencies_us);
    if (points.empty()) return;
    for (int q = 0; q <= 1000; ++q) {
      const double f = q / 1000.0;
      const auto it = std::lower_bound(points.begin(), points.end(), f,
                                       [](const auto& p, double x) { return p.second < x; });
      const double lat = it == points.end() ? points.back().first : it->first;
      cdf.rows.push_back({label, format_number(f), format_number(lat)});
    }
  };
  if (wants(spec, "baseline")) add("baseline", oltp::Mode::Baseline);
  if (wants(spec, "tcam")) add("tcam", oltp::Mode::Tcam);
  rep.tables.push_back(std::move(cdf));

  Table pages{"oltp_page_cdf.csv", {"baseline_pages", "fraction_at_most"}, {}};
  for (const auto& [k, f] : oltp::page_cdf(trace)) pages.rows.push_back({num(k), format_number(f)});
  rep.tables.push_back(std::move(pages));

  // Per-query latency against the number of pages the baseline fetches.
  Table cross{"oltp_crossover.csv", {"baseline_pages", "baseline_us", "tcam_us"}, {}};
  const oltp::Database db = oltp::build_database(cfg, setup);
  oltp::Query q;
  q.index = "0";
  q.key = "0";
  for (std::uint32_t k = 1; k <= 16; ++k) {
    MovementCounters sink;
    const double b = oltp::baseline_query(cfg, k, 0, sink).total.count();
    q.baseline_pages = k;
    const double t = oltp::tcam_query(db, q, setup, sink).total.count();
    cross.rows.push_back({num(k), format_number(b), format_number(t)});
  }
  rep.tables.push_back(std::move(cross));
}

// ---- olap ----

olap::QuerySpec query_variant(const ExperimentSpec& spec, const std::string& which) {
  olap::QuerySpec q = spec.query;
  if (which == "q2") q.sub_key_count = 4;
  if (which == "q1") q.sub_key_count = 1;
  return q;
}

void add_olap_counts(const SsdConfig& cfg, const olap::QuerySpec& q, const std::string& label,
                     Table& t) {
  const olap::Counts c = olap::count(cfg, q);
  const std::pair<const char*, std::uint64_t> fields[] = {
      {"baseline_pages", c.baseline_pages},   {"search_blocks", c.search_blocks},
      {"srch_count", c.srch_count},           {"vector_bytes", c.vector_bytes},
      {"matches", c.matches},                 {"read_count", c.read_count},
      {"baseline_bytes", c.baseline_bytes},   {"tcam_cpu_fe_bytes", c.tcam_cpu_fe_bytes},
      {"tcam_fe_be_bytes", c.tcam_fe_be_bytes}, {"link_table_bytes", c.link_table_bytes},
  };
  for (const auto& [name, v] : fields) t.rows.push_back({label, name, num(v)});
}

void run_olap(const ExperimentSpec& spec, const SsdConfig& cfg, Report& rep) {
  Table counts{"olap_counts.csv", {"query", "metric", "value"}, {}};
  std::vector<std::string> queries;
  if (spec.mode == "q1" || spec.mode == "q2") {
    queries = {spec.mode};
  } else {
    queries = {"query"};
  }
  if (spec.mode != "tcam") {
    const olap::RunResult b = olap::run(cfg, spec.query, olap::Mode::BaselineScan);
    rep.breakdown.push_back({"baseline_scan", b.read_count, b.latency});
    rep.summary.push_back(summary_of("baseline_scan", cfg, b.time_us(), b.counters, 0));
  }
  if (spec.mode != "baseline") {
    for (const auto& which : queries) {
      const olap::QuerySpec q = which == "query" ? spec.query : query_variant(spec, which);
      const std::string label = which == "query" ? "tcam" : "tcam_" + which;
      const olap::RunResult t = olap::run(cfg, q, olap::Mode::Tcam);
      rep.breakdown.push_back({label, t.srch_count + t.read_count, t.latency});
      rep.summary.push_back(summary_of(label, cfg, t.time_us(), t.counters, t.search_blocks));
      add_olap_counts(cfg, q, label, counts);
    }
  }
  rep.tables.push_back(std::move(counts));
}

void run_olap_sweep(const ExperimentSpec& spec, const SsdConfig& cfg, Report& rep) {
  Table t{"olap_sweep.csv",
          {"query", "selectivity", "locality", "baseline_us", "tcam_us", "speedup"},
          {}};
  std::vector<std::string> queries{"q1", "q2"};
  if (spec.mode == "q1" || spec.mode == "q2") queries = {spec.mode};
  bool baseline_done = false;
  for (const auto& which : queries) {
    const olap::QuerySpec q = query_variant(spec, which);
    const olap::SweepResult s = olap::sweep(cfg, q, spec.selectivities, spec.localities);
    if (!baseline_done) {
      const olap::RunResult b = olap::run(cfg, q, olap::Mode::BaselineScan);
      rep.breakdown.push_back({"baseline_scan", b.read_count, b.latency});
      rep.summary.push_back(summary_of("baseline_scan", cfg, b.time_us(), b.counters, 0));
      baseline_done = true;
    }
    for (std::size_t i = 0; i < s.selectivities.size(); ++i) {
      for (std::size_t j = 0; j < s.localities.size(); ++j) {
        t.rows.push_back({which, format_number(s.selectivities[i]),
                          format_number(s.localities[j]), format_number(s.baseline_us),
                          format_number(s.tcam_us[i][j]), format_number(s.speedup[i][j])});
      }
    }
  }
  rep.tables.push_back(std::move(t));
}

// ---- graph ----

void run_graph(const ExperimentSpec& spec, const SsdConfig& cfg, Report& rep) {
  const std::vector<graph::Edge> edges =
      spec.edges_path.empty()
          ? graph::generate_rmat(spec.graph_scale, spec.graph_edges, spec.seed)
          : graph::load_edge_list(spec.edges_path);
  const graph::Csr g = graph::build_csr(
      edges, spec.edges_path.empty() ? (std::uint32_t{1} << spec.graph_scale) : 0);
  const std::vector<std::uint32_t> trace = spec.graph_trace_path.empty()
                                               ? graph::bfs_trace(g)
                                               : graph::load_access_trace(spec.graph_trace_path);

  const graph::CompressedGraphIndex np =
      graph::build_graph_index(g, graph::GraphConfig::no_partition(), cfg.bitlines());
  const graph::CompressedGraphIndex t256 =
      graph::build_graph_index(g, graph::GraphConfig{}, cfg.bitlines());

  Table fp{"graph_footprint.csv",
           {"variant", "index_entries", "index_bytes", "entry_bytes", "link_table_bytes",
            "search_blocks", "normalized_to_baseline"},
           {}};
  const graph::Footprint fnp = graph::footprint(np);
  const graph::Footprint ft = graph::footprint(t256);
  const double base = static_cast<double>(fnp.baseline_bytes);
  fp.rows.push_back({"baseline", num(g.vertex_count), num(fnp.baseline_bytes),
                     num(fnp.baseline_bytes), "0", "0", "1"});
  fp.rows.push_back({"TCAM_NP", num(np.entries.size()), num(fnp.total_bytes()),
                     num(fnp.entry_bytes), num(fnp.link_table_bytes), num(fnp.search_blocks),
                     format_number(fnp.total_bytes() / base)});
  fp.rows.push_back({"TCAM_T", num(t256.entries.size()), num(ft.total_bytes()),
                     num(ft.entry_bytes), num(ft.link_table_bytes), num(ft.search_blocks),
                     format_number(ft.total_bytes() / base)});
  rep.tables.push_back(std::move(fp));

  Table bars{"graph_bars.csv", {"mode", "accesses", "time_us", "normalized_to_im"}, {}};
  double im_us = 0;
  for (graph::Mode m : {graph::Mode::IM, graph::Mode::OOM, graph::Mode::TcamNP,
                        graph::Mode::TcamT}) {
    const std::string name = graph::mode_name(m);
    if (!wants(spec, name) && m != graph::Mode::IM) continue;
    const graph::CompressedGraphIndex* idx =
        m == graph::Mode::TcamNP ? &np : m == graph::Mode::TcamT ? &t256 : nullptr;
    const graph::TraverseResult r = graph::traverse(cfg, g, idx, trace, m);
    if (m == graph::Mode::IM) im_us = r.time_us();
    if (!wants(spec, name)) continue;
    const std::uint64_t blocks = idx ? idx->tuple_blocks() : 0;
    rep.breakdown.push_back({name, trace.size(), r.latency});
    rep.summary.push_back(summary_of(name, cfg, r.time_us(), r.counters, blocks));
    bars.rows.push_back({name, num(trace.size()), format_number(r.time_us()),
                         format_number(im_us > 0 ? r.time_us() / im_us : 0.0)});
  }
  rep.tables.push_back(std::move(bars));
}

// ---- microbench ----

void run_microbench(const ExperimentSpec& spec, const SsdConfig& cfg, Report& rep) {
  auto single = [&](const char* label, FlashOp op) {
    MovementCounters c;
    Scheduler s(cfg, &c);
    FlashOp nvme;
    nvme.kind = OpKind::Nvme;
    s.submit(nvme);
    op.parallel_group = 1;
    s.submit(op);
    const LatencyReport r = s.report();
    rep.breakdown.push_back({label, 1, r});
    rep.summary.push_back(summary_of(label, cfg, r.total.count(), c, 0));
  };
  single("page_read", read_op(cfg, PhysicalAddress{}, cfg.page_size, 0));
  single("block_srch", search_op(cfg, PhysicalAddress{}, cfg.burst_bytes, 0));
  FlashOp prog;
  prog.kind = OpKind::Program;
  prog.payload_bytes = cfg.page_size;
  single("page_program_slc", prog);

  // Command-level costs on a one-block region of random 32-bit keys.
  Controller ctl(cfg);
  std::mt19937_64 rng(spec.seed);
  const std::uint64_t n = 4096;
  AllocateCmd alloc;
  alloc.element_bits = 32;
  alloc.entry_bytes = 8;
  alloc.element_count = n;
  alloc.numeric_entries = true;
  for (std::uint64_t i = 0; i < n; ++i) {
    alloc.elements.push_back(TernaryValue::from_uint(rng() & 0xFFFFFFFFULL, 32));
    alloc.entries.push_back(Entry(8, 0));
  }
  const SearchKey probe_key = alloc.elements.front();
  auto record = [&](const char* label, const CompletionEntry& ce) {
    if (!ce.ok()) throw Error(Errc::InvalidArgument, std::string(label) + ": " + ce.message);
    rep.breakdown.push_back({label, 1, ce.latency});
    rep.summary.push_back(summary_of(label, cfg, ce.latency.total.count(), ce.movement,
                                     ctl.ftl().search_blocks_in_use()));
  };
  const CompletionEntry a = ctl.submit(alloc);
  record("allocate", a);
  record("simple_search", ctl.submit(SimpleSearchCmd{a.region, probe_key, 64}));
  record("assoc_update", ctl.submit(AssocUpdateCmd{a.region, probe_key, UpdateOp::Add, 1}));
  record("delete", ctl.submit(DeleteCmd{a.region, probe_key}));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

double SummaryRow::search_block_pct() const noexcept {
  return total_blocks ? 100.0 * static_cast<double>(search_blocks) / total_blocks : 0.0;
}

void validate(const ExperimentSpec& spec) {
  const auto& modes = modes_for(spec.experiment);
  if (std::find(modes.begin(), modes.end(), spec.mode) == modes.end()) {
    std::string list;
    for (const auto& m : modes) list += (list.empty() ? "" : ", ") + m;
    throw Error(Errc::InvalidArgument, "mode '" + spec.mode + "' is not valid for " +
                                           experiment_name(spec.experiment) + " (" + list + ")");
  }
  require_readable(spec.config_path, "config");
  require_readable(spec.trace_path, "trace");
  require_readable(spec.edges_path, "edge list");
  require_readable(spec.graph_trace_path, "graph trace");
  std::error_code ec;
  if (spec.output_dir.empty() || !fs::is_directory(spec.output_dir, ec)) {
    throw Error(Errc::Io, "output directory '" + spec.output_dir + "' does not exist");
  }
  if (spec.queries == 0) throw Error(Errc::InvalidArgument, "queries must be positive");
  const olap::QuerySpec& q = spec.query;
  if (q.row_count == 0 || q.row_bytes == 0) {
    throw Error(Errc::InvalidArgument, "rows and row size must be positive");
  }
  if (!in_unit_range(q.selectivity) || !in_unit_range(q.locality)) {
    throw Error(Errc::InvalidArgument, "selectivity and locality must lie in [0, 1]");
  }
  if (q.sub_key_count == 0) throw Error(Errc::InvalidArgument, "sub-keys must be positive");
  for (double s : spec.selectivities) {
    if (!in_unit_range(s)) throw Error(Errc::InvalidArgument, "sweep selectivity outside [0, 1]");
  }
  for (double l : spec.localities) {
    if (!in_unit_range(l)) throw Error(Errc::InvalidArgument, "sweep locality outside [0, 1]");
  }
  if (spec.graph_scale == 0 || spec.graph_scale > 31) {
    throw Error(Errc::InvalidArgument, "graph scale must be 1..31");
  }
}

SsdConfig resolve_config(const ExperimentSpec& spec) {
  SsdConfig cfg = spec.config_path.empty() ? SsdConfig{} : load_config(spec.config_path);
  cfg.validate();
  return cfg;
}

Report run_experiment(const ExperimentSpec& spec, const SsdConfig& cfg) {
  Report rep;
  switch (spec.experiment) {
    case Experiment::Oltp: run_oltp(spec, cfg, rep); break;
    case Experiment::Olap: run_olap(spec, cfg, rep); break;
    case Experiment::OlapSweep: run_olap_sweep(spec, cfg, rep); break;
    case Experiment::Graph: run_graph(spec, cfg, rep); break;
    case Experiment::Microbench: run_microbench(spec, cfg, rep); break;
  }
  return rep;
}

std::string breakdown_csv(const std::vector<BreakdownRow>& rows) {
  std::ostringstream out;
  out << "label,ops,total_us";
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    out << ',' << component_name(static_cast<Component>(i)) << "_us";
  }
  out << ",component_sum_us\n";
  for (const auto& r : rows) {
    out << csv_field(r.label) << ',' << r.ops << ',' << format_number(r.latency.total.count());
    for (const auto& c : r.latency.components) out << ',' << format_number(c.count());
    out << ',' << format_number(r.latency.component_sum().count()) << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "label,time_us,cpu_fe_bytes,fe_be_bytes,srch_count,read_count,program_count,"
         "search_blocks,total_blocks,search_block_pct,link_table_bytes\n";
  for (const auto& r : rows) {
    out << csv_field(r.label) << ',' << format_number(r.time_us) << ',' << r.counters.cpu_fe_bytes
        << ',' << r.counters.fe_be_bytes << ',' << r.counters.srch_count << ','
        << r.counters.read_count << ',' << r.counters.program_count << ',' << r.search_blocks
        << ',' << r.total_blocks << ',' << format_number(r.search_block_pct()) << ','
        << r.link_table_bytes << '\n';
  }
  return out.str();
}

std::string table_csv(const Table& table) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << csv_field(table.header[i]);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> write_report(const Report& report, const std::string& dir) {
  std::vector<std::pair<std::string, std::string>> files{
      {"breakdown.csv", breakdown_csv(report.breakdown)},
      {"summary.csv", summary_csv(report.summary)},
  };
  for (const auto& t : report.tables) files.emplace_back(t.file_name, table_csv(t));
  std::vector<std::string> written;
  for (const auto& [name, body] : files) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write '" + path + "'");
    out << body;
    if (!out) throw Error(Errc::Io, "write failed for '" + path + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace nandcam::report
