// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "flowplan/cluster.hpp"
#include "flowplan/comm.hpp"
#include "flowplan/floorplan.hpp"
#include "flowplan/graph.hpp"
#include "flowplan/inter_partition.hpp"
#include "flowplan/pipeliner.hpp"
#include "flowplan/simulator.hpp"

namespace flowplan {

struct PipelineOptions {
  double time_limit_seconds = 60.0;
  int stages_per_crossing = 1;
  int streams_per_port = 16;
  int ports_per_channel = 1;
  std::int64_t packet_bytes = 64;
  double frequency_hz = 300e6;
  int floorplan_depth = 3;
  bool parallel = true;
  bool simulate = true;
};

// Everything the seven-step flow produces, kept in memory so stages can be
// rerun or written out individually.
struct Bundle {
  TaskGraph input;
  ClusterSpec cluster;           // as given
  ClusterSpec effective_cluster; // network overhead applied
  InterAssignment assignment;
  CommInsertion comm;
  SlotAssignment slots;
  PipelinedDesign design;
  SimReport report;
  bool simulated = false;
};

// partition -> comm-insert -> floorplan -> hbm-bind -> pipeline -> simulate.
Bundle run_pipeline(const TaskGraph& g, const ClusterSpec& cluster,
                    const PipelineOptions& opt);

// Canonical JSON renderings; the per-stage CLI subcommands and write_bundle
// share these, which is what makes staged runs byte-identical to `run`.
std::string assignment_json(const InterAssignment& a);
std::string links_json(const std::vector<NetLink>& links);
std::string floorplan_json(const SlotAssignment& s);
std::string hbm_json(const std::map<std::pair<std::string, int>, int>& binding);
std::string latency_json(const PipelinedDesign& d);
std::string report_json(const SimReport& r);

InterAssignment parse_assignment(std::string_view text);
std::vector<NetLink> parse_links(std::string_view text);
SlotAssignment parse_floorplan(std::string_view text);
std::map<std::pair<std::string, int>, int> parse_hbm(std::string_view text);
void parse_latency(std::string_view text, PipelinedDesign& d);

// Writes assignment.json, graph.net.json, links.json, floorplan.json,
// hbm.json, latency.json, report.json and design.dot under dir.
void write_bundle(const Bundle& b, const std::filesystem::path& dir);

}  // namespace flowplan
