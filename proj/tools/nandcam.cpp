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

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "nandcam/error.hpp"
#include "nandcam/report.hpp"
#include "nandcam/workloads/graph.hpp"
#include "nandcam/workloads/oltp.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

bool is_validation(nandcam::Errc code) {
  using nandcam::Errc;
  switch (code) {
    case Errc::InvalidArgument:
    case Errc::InvalidConfig:
    case Errc::MalformedTrace:
    case Errc::VertexIdOverflow:
    case Errc::Io:
      return true;
    default:
      return false;
  }
}

void add_spec_options(CLI::App* cmd, nandcam::report::ExperimentSpec& spec, std::string& name) {
  cmd->add_option("experiment", name, "oltp, olap, olap_sweep, graph or microbench")->required();
  cmd->add_option("--config", spec.config_path, "SSD config file (key = value)");
  cmd->add_option("--out", spec.output_dir, "directory receiving the CSV reports");
  cmd->add_option("--seed", spec.seed, "seed for every synthetic input");
  cmd->add_option("--mode", spec.mode, "mode selector (all, baseline, tcam, q1, q2, IM, ...)");
  cmd->add_option("--trace", spec.trace_path, "OLTP trace CSV");
  cmd->add_option("--queries", spec.queries, "synthetic OLTP trace length");
  cmd->add_option("--rows", spec.query.row_count, "OLAP table rows");
  cmd->add_option("--row-bytes", spec.query.row_bytes, "OLAP row size in bytes");
  cmd->add_option("--selectivity", spec.query.selectivity, "OLAP match fraction");
  cmd->add_option("--locality", spec.query.locality, "OLAP match locality in [0, 1]");
  cmd->add_option("--sub-keys", spec.query.sub_key_count, "OLAP sub-keys per query");
  cmd->add_option("--edges", spec.edges_path, "graph edge list ('src dst' per line)");
  cmd->add_option("--graph-trace", spec.graph_trace_path, "vertex access trace");
  cmd->add_option("--scale", spec.graph_scale, "R-MAT scale of the synthetic graph");
  cmd->add_option("--edge-count", spec.graph_edges, "R-MAT edge count");
}

}  // namespace

int main(int argc, char** argv) {
  namespace rp = nandcam::report;
  CLI::App app{"nandcam: TCAM-in-flash SSD simulator"};
  app.require_subcommand(1);

  rp::ExperimentSpec spec;
  std::string experiment;
  auto* run = app.add_subcommand("run", "run an experiment and write CSV reports");
  add_spec_options(run, spec, experiment);
  auto* validate = app.add_subcommand("validate", "check a config and experiment inputs");
  add_spec_options(validate, spec, experiment);

  auto* gen = app.add_subcommand("gen", "generate synthetic inputs");
  gen->require_subcommand(1);
  std::string gen_out;
  std::uint64_t gen_seed = 1;
  std::uint64_t gen_queries = 100000;
  std::uint32_t gen_scale = 18;
  std::uint64_t gen_edges = std::uint64_t{1} << 21;
  std::string gen_edges_in;
  auto* gen_trace = gen->add_subcommand("oltp-trace", "synthetic OLTP query trace");
  gen_trace->add_option("--out", gen_out, "output file")->required();
  gen_trace->add_option("--seed", gen_seed);
  gen_trace->add_option("--queries", gen_queries);
  auto* gen_graph = gen->add_subcommand("graph", "R-MAT edge list");
  gen_graph->add_option("--out", gen_out, "output file")->required();
  gen_graph->add_option("--seed", gen_seed);
  gen_graph->add_option("--scale", gen_scale);
  gen_graph->add_option("--edge-count", gen_edges);
  auto* gen_gtrace = gen->add_subcommand("graph-trace", "BFS vertex access trace of a graph");
  gen_gtrace->add_option("--edges", gen_edges_in, "edge list input")->required();
  gen_gtrace->add_option("--out", gen_out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (run->parsed() || validate->parsed()) {
      spec.experiment = rp::parse_experiment(experiment);
      rp::validate(spec);
      const nandcam::SsdConfig cfg = rp::resolve_config(spec);
      if (validate->parsed()) {
        std::cout << "ok: " << rp::experiment_name(spec.experiment) << '\n';
        return 0;
      }
      const rp::Report rep = rp::run_experiment(spec, cfg);
      for (const auto& path : rp::write_report(rep, spec.output_dir)) std::cout << path << '\n';
      return 0;
    }

    std::ofstream out(gen_out, std::ios::binary | std::ios::trunc);
    if (!out) throw nandcam::Error(nandcam::Errc::Io, "cannot write '" + gen_out + "'");
    if (gen_trace->parsed()) {
      nandcam::oltp::GenParams p;
      p.queries = gen_queries;
      p.seed = gen_seed;
      nandcam::oltp::write_trace(out, nandcam::oltp::generate_trace(p));
    } else if (gen_graph->parsed()) {
      nandcam::graph::write_edge_list(out, nandcam::graph::generate_rmat(gen_scale, gen_edges,
                                                                         gen_seed));
    } else {
      const auto g = nandcam::graph::build_csr(nandcam::graph::load_edge_list(gen_edges_in));
      nandcam::graph::write_access_trace(out, nandcam::graph::bfs_trace(g));
    }
    if (!out) throw nandcam::Error(nandcam::Errc::Io, "write failed for '" + gen_out + "'");
    return 0;
  } catch (const nandcam::Error& e) {
    std::cerr << "nandcam: " << e.what() << '\n';
    return is_validation(e.code()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "nandcam: " << e.what() << '\n';
    return kExitRuntime;
  }
}
