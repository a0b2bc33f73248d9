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


#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <sstream>

#include "nandcam/backend.hpp"
#include "nandcam/error.hpp"
#include "nandcam/flash_array.hpp"
#include "nandcam/ftl.hpp"
#include "nandcam/nvme.hpp"
#include "nandcam/report.hpp"
#include "nandcam/workloads/graph.hpp"
#include "nandcam/workloads/olap.hpp"
#include "nandcam/workloads/oltp.hpp"

namespace py = pybind11;
using namespace nandcam;

namespace {

Entry to_entry(const py::bytes& b) {
  const std::string s = b;
  return Entry(s.begin(), s.end());
}

std::vector<Entry> to_entries(const std::vector<py::bytes>& in) {
  std::vector<Entry> out;
  out.reserve(in.size());
  for (const auto& b : in) out.push_back(to_entry(b));
  return out;
}

py::list to_py(const std::vector<Entry>& entries) {
  py::list out;
  for (const auto& e : entries) {
    out.append(py::bytes(reinterpret_cast<const char*>(e.data()), e.size()));
  }
  return out;
}

std::vector<TernaryValue> to_values(const std::vector<std::string>& text) {
  std::vector<TernaryValue> out;
  out.reserve(text.size());
  for (const auto& t : text) out.push_back(TernaryValue::parse(t));
  return out;
}

py::dict latency_dict(const LatencyReport& r) {
  py::dict d;
  d["total_us"] = r.total.count();
  for (const auto& [name, value] : r.labeled()) d[py::str(name + "_us")] = value.count();
  return d;
}

py::dict counters_dict(const MovementCounters& c) {
  py::dict d;
  d["cpu_fe_bytes"] = c.cpu_fe_bytes;
  d["fe_be_bytes"] = c.fe_be_bytes;
  d["srch_count"] = c.srch_count;
  d["read_count"] = c.read_count;
  d["program_count"] = c.program_count;
  return d;
}

py::dict search_dict(const SearchResult& r) {
  py::dict d;
  d["ordinals"] = r.ordinals;
  d["entries"] = to_py(r.entries);
  d["total_matches"] = r.total_matches;
  d["continuation"] = r.continuation;
  d["latency"] = latency_dict(r.latency);
  d["movement"] = counters_dict(r.movement);
  return d;
}

py::dict mutation_dict(const MutationResult& r) {
  py::dict d;
  d["count"] = r.count;
  d["latency"] = latency_dict(r.latency);
  d["movement"] = counters_dict(r.movement);
  return d;
}

py::dict completion_dict(const CompletionEntry& ce) {
  py::dict d;
  d["status"] = std::string(status_name(ce.status));
  d["message"] = ce.message;
  d["region"] = ce.region;
  d["returned_entry_count"] = ce.returned_entry_count;
  d["buffer_exceeded"] = ce.buffer_exceeded;
  d["has_continuation"] = ce.continuation.has_value();
  d["ordinals"] = ce.ordinals;
  d["entries"] = to_py(ce.entries);
  d["affected"] = ce.affected;
  d["latency"] = latency_dict(ce.latency);
  d["movement"] = counters_dict(ce.movement);
  return d;
}

Reduction parse_reduction(const std::string& s) {
  if (s == "single") return Reduction::Single;
  if (s == "and") return Reduction::And;
  if (s == "or") return Reduction::Or;
  throw Error(Errc::InvalidArgument, "reduction must be single, and or or");
}

UpdateOp parse_update(const std::string& s) {
  if (s == "add") return UpdateOp::Add;
  if (s == "sub") return UpdateOp::Sub;
  if (s == "set") return UpdateOp::Set;
  throw Error(Errc::InvalidArgument, "update op must be add, sub or set");
}

graph::Mode parse_graph_mode(const std::string& s) {
  for (auto m : {graph::Mode::IM, graph::Mode::OOM, graph::Mode::TcamNP, graph::Mode::TcamT}) {
    if (s == graph::mode_name(m)) return m;
  }
  throw Error(Errc::InvalidArgument, "graph mode must be IM, OOM, TCAM_NP or TCAM_T");
}

}  // namespace

PYBIND11_MODULE(_nandcam, m) {
  m.doc() = "NAND flash blocks used as ternary content-addressable memory";

  static py::exception<Error> error(m, "NandcamError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<TernaryValue>(m, "TernaryValue")
      .def(py::init(&TernaryValue::parse), py::arg("text"))
      .def_static("from_uint", &TernaryValue::from_uint, py::arg("value"), py::arg("width"))
      .def_static("wildcard", &TernaryValue::wildcard, py::arg("width"))
      .def("matches", &TernaryValue::matches, py::arg("element"))
      .def("is_binary", &TernaryValue::is_binary)
      .def("__len__", &TernaryValue::size)
      .def("__add__", &TernaryValue::operator+)
      .def("__str__", &TernaryValue::to_string)
      .def("__repr__", [](const TernaryValue& v) { return "TernaryValue('" + v.to_string() + "')"; })
      .def(py::self == py::self);

  py::enum_<BlockMode>(m, "BlockMode")
      .value("Conventional", BlockMode::Conventional)
      .value("SearchSLC", BlockMode::SearchSLC);

  py::class_<FlashBlock>(m, "FlashBlock")
      .def(py::init<std::size_t, std::size_t, BlockMode, bool>(),
           py::arg("rows") = FlashBlock::kDefaultRows,
           py::arg("page_bytes") = FlashBlock::kDefaultPageBytes,
           py::arg("mode") = BlockMode::SearchSLC, py::arg("write_inversion") = true)
      .def_property_readonly("rows", &FlashBlock::rows)
      .def_property_readonly("bitlines", &FlashBlock::bitlines)
      .def_property_readonly("native_element_size", &FlashBlock::native_element_size)
      .def_property_readonly("search_count", &FlashBlock::search_count)
      .def_property_readonly("fe_be_program_bytes", &FlashBlock::fe_be_program_bytes)
      .def("erase", &FlashBlock::erase)
      .def(
          "program_transposed",
          [](FlashBlock& b, const std::vector<std::string>& elements, std::size_t start) {
            const auto v = to_values(elements);
            b.program_transposed(v, start);
          },
          py::arg("elements"), py::arg("start_bitline") = 0)
      .def(
          "srch",
          [](const FlashBlock& b, const std::string& key) {
            return b.srch(TernaryValue::parse(key)).set_positions();
          },
          py::arg("key"))
      .def(
          "invalidate",
          [](FlashBlock& b, const std::vector<std::size_t>& bitlines) {
            b.invalidate_matches(bitlines);
          },
          py::arg("bitlines"))
      .def("valid_bitlines", [](const FlashBlock& b) { return b.valid_bitmap().set_positions(); });

  py::class_<SsdConfig>(m, "SsdConfig")
      .def(py::init<>())
      .def_readwrite("channels", &SsdConfig::channels)
      .def_readwrite("packages_per_channel", &SsdConfig::packages_per_channel)
      .def_readwrite("dies_per_package", &SsdConfig::dies_per_package)
      .def_readwrite("planes_per_die", &SsdConfig::planes_per_die)
      .def_readwrite("blocks_per_plane", &SsdConfig::blocks_per_plane)
      .def_readwrite("pages_per_block", &SsdConfig::pages_per_block)
      .def_readwrite("page_size", &SsdConfig::page_size)
      .def_readwrite("channel_bandwidth", &SsdConfig::channel_bandwidth)
      .def_readwrite("host_bandwidth", &SsdConfig::host_bandwidth)
      .def_readwrite("decode_rate", &SsdConfig::decode_rate)
      .def_readwrite("burst_bytes", &SsdConfig::burst_bytes)
      .def_readwrite("host_block_bytes", &SsdConfig::host_block_bytes)
      .def_readwrite("write_inversion", &SsdConfig::write_inversion)
      .def_readwrite("max_blocks_per_element", &SsdConfig::max_blocks_per_element)
      .def_property_readonly("bitlines", &SsdConfig::bitlines)
      .def_property_readonly("native_element_size", &SsdConfig::native_element_size)
      .def_property_readonly("total_blocks", [](const SsdConfig& c) { return total_blocks(c); })
      .def("validate", &SsdConfig::validate)
      .def("__str__", &format_config);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<SearchManager>(m, "SearchManager")
      .def(py::init<SsdConfig>(), py::arg("config") = SsdConfig{})
      .def(
          "allocate",
          [](SearchManager& s, std::uint32_t element_bits, std::uint32_t entry_bytes,
             std::uint64_t element_count, const std::vector<std::string>& elements,
             const std::vector<py::bytes>& entries, bool numeric) {
            const auto v = to_values(elements);
            const auto e = to_entries(entries);
            return s.allocate_region(element_bits, entry_bytes, element_count, v, e,
                                     RegionOptions{numeric});
          },
          py::arg("element_bits"), py::arg("entry_bytes"), py::arg("element_count"),
          py::arg("elements") = std::vector<std::string>{},
          py::arg("entries") = std::vector<py::bytes>{}, py::arg("numeric_entries") = false)
      .def("deallocate", &SearchManager::deallocate_region, py::arg("region"))
      .def(
          "append",
          [](SearchManager& s, RegionId id, const std::vector<std::string>& elements,
             const std::vector<py::bytes>& entries) {
            const auto v = to_values(elements);
            const auto e = to_entries(entries);
            return mutation_dict(s.append(id, v, e));
          },
          py::arg("region"), py::arg("elements"), py::arg("entries"))
      .def(
          "flush", [](SearchManager& s, RegionId id) { return mutation_dict(s.flush(id)); },
          py::arg("region"))
      .def(
          "search",
          [](SearchManager& s, RegionId id, const std::vector<std::string>& keys,
             const std::string& reduction, std::optional<std::uint64_t> max_results) {
            SearchRequest req;
            req.keys = to_values(keys);
            req.reduction = parse_reduction(reduction);
            if (max_results) req.max_results = *max_results;
            return search_dict(s.execute_search(id, req));
          },
          py::arg("region"), py::arg("keys"), py::arg("reduction") = "single",
          py::arg("max_results") = py::none())
      .def(
          "delete",
          [](SearchManager& s, RegionId id, const std::string& key) {
            return mutation_dict(s.delete_matching(id, TernaryValue::parse(key)));
          },
          py::arg("region"), py::arg("key"))
      .def(
          "update",
          [](SearchManager& s, RegionId id, const std::string& key, const std::string& op,
             std::int64_t immediate) {
            return mutation_dict(
                s.associative_update(id, TernaryValue::parse(key), parse_update(op), immediate));
          },
          py::arg("region"), py::arg("key"), py::arg("op"), py::arg("immediate"))
      .def("has_region", &SearchManager::has_region, py::arg("region"))
      .def_property_readonly("search_blocks_in_use", &SearchManager::search_blocks_in_use);

  py::class_<Controller>(m, "Controller")
      .def(py::init<SsdConfig>(), py::arg("config") = SsdConfig{})
      .def(
          "allocate",
          [](Controller& c, std::uint32_t element_bits, std::uint32_t entry_bytes,
             std::uint64_t element_count, const std::vector<std::string>& elements,
             const std::vector<py::bytes>& entries, bool numeric) {
            AllocateCmd cmd{element_bits, entry_bytes, element_count, to_values(elements),
                            to_entries(entries), numeric};
            return completion_dict(c.submit(cmd));
          },
          py::arg("element_bits"), py::arg("entry_bytes"), py::arg("element_count"),
          py::arg("elements") = std::vector<std::string>{},
          py::arg("entries") = std::vector<py::bytes>{}, py::arg("numeric_entries") = false)
      .def(
          "simple_search",
          [](Controller& c, RegionId id, const std::string& key, std::uint64_t buffer) {
            return completion_dict(c.submit(SimpleSearchCmd{id, TernaryValue::parse(key), buffer}));
          },
          py::arg("region"), py::arg("key"), py::arg("buffer_entries"))
      .def(
          "delete",
          [](Controller& c, RegionId id, const std::string& key) {
            return completion_dict(c.submit(DeleteCmd{id, TernaryValue::parse(key)}));
          },
          py::arg("region"), py::arg("key"))
      .def(
          "update",
          [](Controller& c, RegionId id, const std::string& key, const std::string& op,
             std::int64_t immediate) {
            return completion_dict(
                c.submit(AssocUpdateCmd{id, TernaryValue::parse(key), parse_update(op), immediate}));
          },
          py::arg("region"), py::arg("key"), py::arg("op"), py::arg("immediate"))
      .def(
          "deallocate",
          [](Controller& c, RegionId id) { return completion_dict(c.submit(DeallocateCmd{id})); },
          py::arg("region"))
      .def_property_readonly("submitted", &Controller::submitted);

  m.def(
      "tcam_search",
      [](Controller& c, RegionId id, const std::string& key, std::uint64_t buffer) {
        return to_py(tcam_search(c, id, TernaryValue::parse(key), buffer));
      },
      py::arg("controller"), py::arg("region"), py::arg("key"), py::arg("buffer_entries"));

  auto olap_m = m.def_submodule("olap", "Selective scan over a wide table");
  py::class_<olap::QuerySpec>(olap_m, "QuerySpec")
      .def(py::init<>())
      .def_readwrite("row_count", &olap::QuerySpec::row_count)
      .def_readwrite("row_bytes", &olap::QuerySpec::row_bytes)
      .def_readwrite("selectivity", &olap::QuerySpec::selectivity)
      .def_readwrite("locality", &olap::QuerySpec::locality)
      .def_readwrite("sub_key_count", &olap::QuerySpec::sub_key_count)
      .def_readwrite("element_bits", &olap::QuerySpec::element_bits);
  olap_m.def(
      "count",
      [](const SsdConfig& cfg, const olap::QuerySpec& q) {
        const olap::Counts c = olap::count(cfg, q);
        py::dict d;
        d["baseline_pages"] = c.baseline_pages;
        d["search_blocks"] = c.search_blocks;
        d["srch_count"] = c.srch_count;
        d["vector_bytes"] = c.vector_bytes;
        d["matches"] = c.matches;
        d["read_count"] = c.read_count;
        d["baseline_bytes"] = c.baseline_bytes;
        d["tcam_cpu_fe_bytes"] = c.tcam_cpu_fe_bytes;
        d["tcam_fe_be_bytes"] = c.tcam_fe_be_bytes;
        d["link_table_bytes"] = c.link_table_bytes;
        return d;
      },
      py::arg("config"), py::arg("query"));
  olap_m.def(
      "run",
      [](const SsdConfig& cfg, const olap::QuerySpec& q, const std::string& mode) {
        if (mode != "baseline" && mode != "tcam") {
          throw Error(Errc::InvalidArgument, "mode must be baseline or tcam");
        }
        const auto r =
            olap::run(cfg, q, mode == "tcam" ? olap::Mode::Tcam : olap::Mode::BaselineScan);
        py::dict d;
        d["latency"] = latency_dict(r.latency);
        d["counters"] = counters_dict(r.counters);
        d["search_blocks"] = r.search_blocks;
        return d;
      },
      py::arg("config"), py::arg("query"), py::arg("mode"));

  auto oltp_m = m.def_submodule("oltp", "Index point lookups");
  oltp_m.def(
      "generate_trace",
      [](std::uint64_t queries, std::uint64_t seed) {
        oltp::GenParams p;
        p.queries = queries;
        p.seed = seed;
        std::ostringstream out;
        oltp::write_trace(out, oltp::generate_trace(p));
        return out.str();
      },
      py::arg("queries") = 100000, py::arg("seed") = 1,
      "Synthetic trace as CSV text.");
  oltp_m.def(
      "replay",
      [](const SsdConfig& cfg, const std::string& trace_csv, const std::string& mode) {
        if (mode != "baseline" && mode != "tcam") {
          throw Error(Errc::InvalidArgument, "mode must be baseline or tcam");
        }
        std::istringstream in(trace_csv);
        const auto r = oltp::replay(cfg, oltp::read_trace(in),
                                    mode == "tcam" ? oltp::Mode::Tcam : oltp::Mode::Baseline);
        py::dict d;
        d["total_us"] = r.total_us();
        d["latencies_us"] = r.latencies_us;
        d["breakdown"] = latency_dict(r.breakdown);
        d["counters"] = counters_dict(r.counters);
        d["search_blocks"] = r.search_blocks;
        return d;
      },
      py::arg("config"), py::arg("trace_csv"), py::arg("mode"));
  oltp_m.def(
      "crossover_pages",
      [](const SsdConfig& cfg) { return oltp::crossover_pages(cfg, oltp::Setup{}); },
      py::arg("config"));

  auto graph_m = m.def_submodule("graph", "Compressed adjacency index");
  py::class_<graph::Csr>(graph_m, "Csr")
      .def_property_readonly("vertex_count", [](const graph::Csr& g) { return g.vertex_count; })
      .def_property_readonly("edge_count", &graph::Csr::edge_count);
  py::class_<graph::GraphConfig>(graph_m, "GraphConfig")
      .def(py::init<>())
      .def_static("no_partition", &graph::GraphConfig::no_partition)
      .def_readwrite("big_vertex_threshold", &graph::GraphConfig::big_vertex_threshold)
      .def_readwrite("region_capacity_tuples", &graph::GraphConfig::region_capacity_tuples);
  py::class_<graph::CompressedGraphIndex>(graph_m, "CompressedGraphIndex")
      .def_property_readonly("entry_count",
                             [](const graph::CompressedGraphIndex& i) { return i.entries.size(); })
      .def_property_readonly("tuple_blocks", &graph::CompressedGraphIndex::tuple_blocks)
      .def_property_readonly("probe_count", &graph::CompressedGraphIndex::probe_count);
  graph_m.def(
      "generate_rmat",
      [](std::uint32_t scale, std::uint64_t edges, std::uint64_t seed) {
        const auto e = graph::generate_rmat(scale, edges, seed);
        return graph::build_csr(e, std::uint32_t{1} << scale);
      },
      py::arg("scale"), py::arg("edge_count"), py::arg("seed") = 1);
  graph_m.def(
      "from_edges",
      [](const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs, std::uint32_t n) {
        std::vector<graph::Edge> e;
        e.reserve(pairs.size());
        for (auto [s, d] : pairs) e.push_back({s, d});
        return graph::build_csr(e, n);
      },
      py::arg("edges"), py::arg("vertex_count") = 0);
  graph_m.def("bfs_trace", &graph::bfs_trace, py::arg("graph"));
  graph_m.def("build_index", &graph::build_graph_index, py::arg("graph"),
              py::arg("config") = graph::GraphConfig{}, py::arg("bitlines") = 131072);
  graph_m.def(
      "footprint",
      [](const graph::CompressedGraphIndex& i) {
        const auto f = graph::footprint(i);
        py::dict d;
        d["baseline_bytes"] = f.baseline_bytes;
        d["entry_bytes"] = f.entry_bytes;
        d["link_table_bytes"] = f.link_table_bytes;
        d["total_bytes"] = f.total_bytes();
        d["search_blocks"] = f.search_blocks;
        d["reduction"] = f.reduction();
        return d;
      },
      py::arg("index"));
  graph_m.def("estimate_region_blocks", &graph::estimate_region_blocks, py::arg("edges"),
              py::arg("bitlines"), py::arg("region_capacity"));
  graph_m.def(
      "neighbors",
      [](const graph::Csr& g, const graph::CompressedGraphIndex& i, std::uint32_t v,
         const SsdConfig& cfg) {
        SearchManager ftl(cfg);
        const RegionId id = graph::materialize(ftl, g, i);
        return graph::search_targets(ftl, id, i, v);
      },
      py::arg("graph"), py::arg("index"), py::arg("vertex"), py::arg("config") = SsdConfig{},
      "Targets of a vertex found by searching a freshly programmed tuple store.");
  graph_m.def(
      "traverse",
      [](const SsdConfig& cfg, const graph::Csr& g, const graph::CompressedGraphIndex* i,
         const std::vector<std::uint32_t>& trace, const std::string& mode) {
        const auto r = graph::traverse(cfg, g, i, trace, parse_graph_mode(mode));
        py::dict d;
        d["latency"] = latency_dict(r.latency);
        d["counters"] = counters_dict(r.counters);
        d["per_access_us"] = r.per_access_us;
        return d;
      },
      py::arg("config"), py::arg("graph"), py::arg("index"), py::arg("trace"), py::arg("mode"));

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& output_dir,
         const std::string& config_path, std::uint64_t seed, const std::string& mode,
         std::uint64_t queries, std::uint32_t graph_scale, std::uint64_t graph_edges) {
        report::ExperimentSpec spec;
        spec.experiment = report::parse_experiment(experiment);
        spec.output_dir = output_dir;
        spec.config_path = config_path;
        spec.seed = seed;
        spec.mode = mode;
        spec.queries = queries;
        spec.graph_scale = graph_scale;
        spec.graph_edges = graph_edges;
        report::validate(spec);
        const auto rep = report::run_experiment(spec, report::resolve_config(spec));
        return report::write_report(rep, spec.output_dir);
      },
      py::arg("experiment"), py::arg("output_dir") = ".", py::arg("config_path") = "",
      py::arg("seed") = 1, py::arg("mode") = "all", py::arg("queries") = 100000,
      py::arg("graph_scale") = 18, py::arg("graph_edges") = std::uint64_t{1} << 21,
      "Runs an experiment and writes its CSV files; returns the written paths.");
}
