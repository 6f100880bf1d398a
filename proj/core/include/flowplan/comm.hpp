// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowplan/cluster.hpp"
#include "flowplan/graph.hpp"
#include "flowplan/inter_partition.hpp"

namespace flowplan {

// One materialized inter-FPGA (or inter-node) connection, carrying a cut
// FIFO. Streams sharing a QSFP port serialize in the simulator.
struct NetLink {
  std::string edge_id;  // the original cut edge
  int src_device = 0;
  int dst_device = 0;
  int hops = 1;
  bool inter_node = false;
  std::int64_t packet_bytes = 64;   // minimum transfer unit
  std::int64_t volume_bits = 0;     // total per run
  int src_port = 0;                 // QSFP port on the sending device
  int stream = 0;                   // stream slot within that port
  double effective_rate_bps = 0.0;  // at packet_bytes, with port aggregation
  double latency_ns = 0.0;          // volume-free component
};

// Throughput-vs-packet-size model. Anchors are measured completion times for
// a bulk transfer at a given packet size; the effective rate is linear in
// log2(packet size) between anchors and clamped to the aggregated port
// ceiling above the saturation size.
struct LinkModel {
  struct CalibrationPoint {
    std::int64_t packet_bytes = 64;
    std::int64_t volume_bytes = 64'000'000;
    double seconds = 0.0;  // one-hop completion time for volume_bytes
  };
  std::vector<CalibrationPoint> points;
  int aggregated_ports = 2;  // both QSFP28 ports of the card

  // Measured bulk-transfer times on the 100G Ethernet link: 64 MB in
  // 6.53 ms at 64-byte packets and in 3.96 ms at 128-byte packets.
  static LinkModel defaults();

  // Monotone non-decreasing in packet size; throws ParseError below 64 B.
  double effective_rate_bps(const LinkProtocol& proto,
                            std::int64_t packet_bytes) const;
};

struct CommInsertion {
  TaskGraph graph;            // with net_send / net_recv vertices spliced in
  InterAssignment placement;  // original mapping plus the new vertices
  std::vector<NetLink> links;
};

// Splits every cut edge into src -> SEND -> (net) -> RECV -> dst. SEND/RECV
// carry zero area: the per-port overhead was already deducted from device
// capacity by apply_network_overhead, and charging it again here would
// double count. Throws CapacityError when a device needs more streams than
// ports x streams_per_port.
CommInsertion insert_network_vertices(const TaskGraph& g, const InterAssignment& a,
                                      const ClusterSpec& cluster,
                                      int streams_per_port = 16,
                                      std::int64_t packet_bytes = 64,
                                      const LinkModel& model = LinkModel::defaults());

// hops x one-way latency + volume / effective rate, in nanoseconds.
// Inter-node links pay the three-step host staging instead: device-to-host
// DMA, the 10G host link, and host-to-device DMA.
double link_transfer_time_ns(const NetLink& link);

}  // namespace flowplan
