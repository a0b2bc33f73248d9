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
 * @file report.hpp
 * @brief Experiment runner and CSV report writers used by the command-line tool.
 */

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nandcam/backend.hpp"
#include "nandcam/workloads/olap.hpp"

namespace nandcam::report {

enum class Experiment { Oltp, Olap, OlapSweep, Graph, Microbench };

const char* experiment_name(Experiment e) noexcept;
/// Throws InvalidArgument for unknown names.
Experiment parse_experiment(const std::string& name);

struct ExperimentSpec {
  Experiment experiment = Experiment::Microbench;
  std::string config_path;  // empty: built-in defaults
  std::string output_dir = ".";
  std::uint64_t seed = 1;
  std::string mode = "all";

  // oltp
  std::string trace_path;  // empty: synthetic trace from `seed`
  std::uint64_t queries = 100000;

  // olap, olap_sweep
  olap::QuerySpec query;
  std::vector<double> selectivities{0.01, 0.001, 0.0004, 0.0001};
  std::vector<double> localities{0.0, 0.25, 0.5, 0.75, 1.0};

  // graph
  std::string edges_path;  // empty: R-MAT graph from `seed`
  std::string graph_trace_path;
  std::uint32_t graph_scale = 18;
  std::uint64_t graph_edges = std::uint64_t{1} << 21;
};

/// Checks ranges, mode names and that every input path is readable and the output directory
/// exists. Throws InvalidArgument or Io.
void validate(const ExperimentSpec& spec);

/// Resolves the spec's config file, or the defaults when none is given.
SsdConfig resolve_config(const ExperimentSpec& spec);

struct BreakdownRow {
  std::string label;
  std::uint64_t ops = 0;
  LatencyReport latency;
};

struct SummaryRow {
  std::string label;
  double time_us = 0;
  MovementCounters counters;
  std::uint64_t search_blocks = 0;
  std::uint64_t total_blocks = 0;
  std::uint64_t link_table_bytes = 0;
  double search_block_pct() const noexcept;
};

/// A named CSV file beyond the two common ones.
struct Table {
  std::string file_name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::vector<BreakdownRow> breakdown;
  std::vector<SummaryRow> summary;
  std::vector<Table> tables;
};

Report run_experiment(const ExperimentSpec& spec, const SsdConfig& cfg);

std::string breakdown_csv(const std::vector<BreakdownRow>& rows);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string table_csv(const Table& table);

/// Writes breakdown.csv, summary.csv and every table into `dir`; returns the paths written.
std::vector<std::string> write_report(const Report& report, const std::string& dir);

/// Shortest round-trip decimal text for a double.
std::string format_number(double v);

}  // namespace nandcam::report
