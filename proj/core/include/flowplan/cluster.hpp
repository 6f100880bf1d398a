// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowplan/graph.hpp"
#include "flowplan/resource.hpp"

namespace flowplan {

// One FPGA card. The slot grid abstracts the die/SLR layout: per-slot
// capacity is a uniform division of the whole-device capacity unless an
// explicit per-slot override table is given.
struct DeviceSpec {
  int id = 0;
  ResourceVec capacity;
  int slot_rows = 3;
  int slot_cols = 2;
  int hbm_channels = 32;
  int hbm_row = 0;  // row adjacent to the HBM stacks (bottom die)
  int qsfp_ports = 2;
  std::int64_t threshold_ppm = 700000;  // utilization threshold T
  // Row-major (row * slot_cols + col) per-slot capacities, when the uniform
  // division is not faithful enough.
  std::optional<std::vector<ResourceVec>> slot_capacity_override;

  int num_slots() const { return slot_rows * slot_cols; }
  ResourceVec slot_capacity() const { return capacity.divided(num_slots()); }
  ResourceVec slot_capacity_at(int row, int col) const;
  ResourceVec thresholded_capacity() const { return capacity.scaled_ppm(threshold_ppm); }
};

enum class TopologyKind { kChain, kRing, kStar, kMesh, kHypercube, kCustom };

// Inter-device wiring. Chain/ring/star distances are closed-form; mesh,
// hypercube and custom all go through a precomputed shortest-path hop table.
// `node_group[i]` names the server node hosting device i; crossing groups
// means host-staged transfers.
struct Topology {
  TopologyKind kind = TopologyKind::kChain;
  int device_count = 1;
  std::vector<std::vector<int>> custom_hops;  // symmetric, zero diagonal
  std::vector<int> node_group;                // defaults to all in group 0

  int dist(int i, int j) const;
  bool same_node(int i, int j) const;
  // Builds the hop table for mesh/hypercube/custom and checks invariants.
  void finalize();

 private:
  std::vector<std::vector<int>> hops_;
};

struct LinkProtocol {
  std::string name;
  std::int64_t lambda_tenths = 10;       // cost multiplier, in tenths
  std::int64_t one_way_latency_ns = 500;
  std::int64_t line_rate_bps = 100'000'000'000;
};

// Presets: "ethernet-100g", "pcie-gen3x16", "host-mpi-10g". Throws
// ParseError for anything else.
LinkProtocol protocol_preset(std::string_view name);

struct ClusterSpec {
  std::vector<DeviceSpec> devices;
  Topology topology;
  LinkProtocol inter_fpga = protocol_preset("ethernet-100g");
  LinkProtocol inter_node = protocol_preset("host-mpi-10g");
  LinkProtocol host_dma = protocol_preset("pcie-gen3x16");
  std::int64_t onchip_bw_bps = 280'000'000'000'000;    // 35 TBps in bits
  std::int64_t hbm_total_bw_bps = 3'680'000'000'000;   // 460 GBps in bits

  std::int64_t hbm_bw_per_channel_bps(const DeviceSpec& d) const {
    return hbm_total_bw_bps / d.hbm_channels;
  }
  const DeviceSpec& device(int id) const;
};

// Hop count between two devices; dist(i,i) == 0 on every topology.
inline int dist(const Topology& t, int i, int j) { return t.dist(i, j); }

// Cost of carrying edge `e` between devices i and j: width x hops x lambda,
// in tenths so the PCIe 12.5 factor stays exact in integer arithmetic.
// Hops within a server node use the inter-FPGA protocol, hops across nodes
// the inter-node one.
std::int64_t comm_cost_tenths(const FifoEdge& e, int i, int j,
                              const ClusterSpec& cluster);

// Capacity left after charging the per-port networking IP overhead:
// LUT 2.04%, FF 2.94%, BRAM 2.06% of original capacity per port, DSP and
// URAM untouched. Throws CapacityError if ports_used exceeds the card.
DeviceSpec apply_network_overhead(const DeviceSpec& d, int ports_used);

// Ports the topology requires per device (2 for ring, 1 for chain ends...).
int ports_required(const Topology& t, int device);

ClusterSpec parse_cluster(std::string_view text);
std::string serialize_cluster(const ClusterSpec& c);

// Alveo U55C card preset wired into the given topology.
ClusterSpec make_u55c_cluster(int device_count, TopologyKind kind,
                              std::int64_t threshold_ppm = 700000,
                              int node_size = 0);

TopologyKind topology_kind_from_name(std::string_view name);
const char* topology_kind_name(TopologyKind k);

}  // namespace flowplan
