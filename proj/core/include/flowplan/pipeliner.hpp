// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowplan/cluster.hpp"
#include "flowplan/comm.hpp"
#include "flowplan/floorplan.hpp"
#include "flowplan/graph.hpp"

namespace flowplan {

// A fully placed design with pipeline latencies and balancing depths, ready
// for simulation.
struct PipelinedDesign {
  TaskGraph graph;             // post comm-insertion
  InterAssignment placement;   // vertex -> device
  SlotAssignment slots;        // vertex -> slot
  std::vector<NetLink> links;  // sidecar table for net edges
  std::map<std::string, std::int64_t> edge_latency;     // added stages, cycles
  std::map<std::string, std::int64_t> balancing_fifos;  // extra depth tokens
  // (vertex, port) -> device-local HBM channel; the simulator falls back to
  // a sequential per-device binding for ports missing here.
  std::map<std::pair<std::string, int>, int> hbm_channel;
  int stages_per_crossing = 1;
};

// Conservative pipelining: every edge crossing a slot boundary gains
// k x (|dRow| + |dCol|) register stages; device-crossing (net) edges take
// their latency from the link model instead (converted at `frequency_hz`);
// same-slot edges stay at zero.
std::map<std::string, std::int64_t> insert_crossing_registers(
    const SlotAssignment& s, const TaskGraph& g, const std::vector<NetLink>& links,
    int stages_per_crossing = 1, double frequency_hz = 300e6);

// Cut-set balancing on the acyclic condensation: every fork/join pair gets
// extra FIFO depth on its shorter paths so the added latency slack is
// absorbed. Intra-SCC edges are left alone, but a cycle whose added latency
// exceeds its total FIFO depth raises DeadlockError naming a vertex on it.
std::map<std::string, std::int64_t> balance_reconvergent(
    const TaskGraph& g, const std::map<std::string, std::int64_t>& edge_latency);

// Convenience composition of the two steps above.
PipelinedDesign pipeline_design(const TaskGraph& g, const InterAssignment& a,
                                const SlotAssignment& s,
                                const std::vector<NetLink>& links,
                                int stages_per_crossing = 1,
                                double frequency_hz = 300e6);

}  // namespace flowplan
