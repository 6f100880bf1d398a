// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowplan/cluster.hpp"
#include "flowplan/graph.hpp"
#include "flowplan/inter_partition.hpp"

namespace flowplan {

// Two-level placement: vertex -> (device, row, col).
struct SlotAssignment {
  struct Placement {
    int device = 0;
    int row = 0;
    int col = 0;
  };
  std::map<std::string, Placement> mapping;
  std::map<int, std::map<std::pair<int, int>, ResourceVec>> per_slot_area;
  std::map<int, std::int64_t> objective;  // exact manhattan cost per device
  std::map<int, bool> certified;          // every split solved to optimality
  std::map<int, std::int64_t> oracle_gap; // vs flat oracle; -1 when not computed
};

// Recursive two-way partitioning of one device's vertex set into its slot
// grid: split the current region along its longer axis, solve the two-way
// assignment exactly (width x Manhattan cost with terminal propagation for
// already-fixed vertices, the sibling region's center, or the network-port
// slot for off-device edges), and recurse until single slots. Throws
// CapacityError naming the failing region and resource class when a region
// cannot satisfy the threshold.
SlotAssignment floorplan_device(const TaskGraph& g, const InterAssignment& a,
                                const ClusterSpec& cluster, int device,
                                int max_depth = 3);

// Floorplans every device; devices are independent, so they may run in
// parallel. The merged result is identical either way.
SlotAssignment floorplan_all(const TaskGraph& g, const InterAssignment& a,
                             const ClusterSpec& cluster, int max_depth = 3,
                             bool parallel = true);

// Exact re-evaluation of the per-device objective over intra-device edges.
std::int64_t manhattan_cost(const SlotAssignment& s, const TaskGraph& g, int device);

// Exhaustive slot assignment used as the oracle for small instances
// (slots^|V| enumeration with the same cost terms). Throws SizeError when
// the instance is too large to enumerate.
SlotAssignment flat_floorplan_oracle(const TaskGraph& g, const InterAssignment& a,
                                     const ClusterSpec& cluster, int device);

// Port-to-channel binding for one device's HBM traffic.
struct HbmBinding {
  std::map<std::pair<std::string, int>, int> channel_of;  // (vertex, port) -> ch
  std::int64_t cost = 0;
  bool exact = false;  // true when found by exhaustive enumeration
};

// Minimizes sum over ports of alpha x (Manhattan distance from the vertex's
// slot to the channel's column band on the HBM row) + beta x contention,
// where contention counts the other ports sharing the channel. Exhaustive
// for small instances, greedy in descending volume order plus pairwise-swap
// refinement otherwise. beta < 0 selects the mean edge width of the graph.
HbmBinding bind_hbm_channels(const TaskGraph& g, const SlotAssignment& s,
                             const DeviceSpec& d, int device,
                             std::int64_t alpha = 1, std::int64_t beta = -1,
                             int ports_per_channel = 1);

}  // namespace flowplan
