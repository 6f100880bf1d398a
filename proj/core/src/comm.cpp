// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/comm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowplan/errors.hpp"

namespace flowplan {

LinkModel LinkModel::defaults() {
  LinkModel m;
  m.points = {{64, 64'000'000, 6.53e-3}, {128, 64'000'000, 3.96e-3}};
  m.aggregated_ports = 2;
  return m;
}

double LinkModel::effective_rate_bps(const LinkProtocol& proto,
                                     std::int64_t packet_bytes) const {
  if (packet_bytes < 64)
    throw ParseError("unsupported packet size: " + std::to_string(packet_bytes) +
                     " bytes (minimum transfer unit is 64)");
  const double ceiling =
      static_cast<double>(aggregated_ports) * static_cast<double>(proto.line_rate_bps);
  if (points.empty()) return ceiling;

  // Anchor rates are measured on the 100G baseline; other protocols scale
  // proportionally with their line rate.
  const double proto_scale = static_cast<double>(proto.line_rate_bps) / 100e9;
  std::vector<std::pair<double, double>> anchors;  // (log2 packet, rate)
  for (const auto& pt : points) {
    double latency = 500e-9;  // one-way baseline latency
    double rate = static_cast<double>(pt.volume_bytes) * 8.0 /
                  (pt.seconds - latency) * proto_scale;
    anchors.push_back({std::log2(static_cast<double>(pt.packet_bytes)), rate});
  }
  std::sort(anchors.begin(), anchors.end());
  for (std::size_t i = 1; i < anchors.size(); ++i)  // keep the curve monotone
    anchors[i].second = std::max(anchors[i].second, anchors[i - 1].second);

  const double x = std::log2(static_cast<double>(packet_bytes));
  double rate;
  if (x <= anchors.front().first) {
    rate = anchors.front().second;
  } else if (x >= anchors.back().first) {
    if (anchors.size() >= 2) {
      const auto& a = anchors[anchors.size() - 2];
      const auto& b = anchors.back();
      double slope = (b.second - a.second) / (b.first - a.first);
      rate = b.second + slope * (x - b.first);
    } else {
      rate = anchors.back().second;
    }
  } else {
    rate = anchors.back().second;
    for (std::size_t i = 1; i < anchors.size(); ++i) {
      if (x <= anchors[i].first) {
        const auto& a = anchors[i - 1];
        const auto& b = anchors[i];
        double t = (x - a.first) / (b.first - a.first);
        rate = a.second + t * (b.second - a.second);
        break;
      }
    }
  }
  return std::min(rate, ceiling);
}

double link_transfer_time_ns(const NetLink& link) {
  double rate = link.effective_rate_bps;
  double transfer_ns =
      rate > 0 ? static_cast<double>(link.volume_bits) / rate * 1e9 : 0.0;
  return link.latency_ns + transfer_ns;
}

CommInsertion insert_network_vertices(const TaskGraph& g, const InterAssignment& a,
                                      const ClusterSpec& cluster,
                                      int streams_per_port,
                                      std::int64_t packet_bytes,
                                      const LinkModel& model) {
  if (!a.feasible)
    throw InfeasibleError("cannot insert network logic for an infeasible assignment");

  CommInsertion out;
  out.placement = a;
  out.graph.set_name(g.name());
  for (const auto& v : g.vertices()) out.graph.add_vertex(v);

  // Streams are dealt per sending device in edge order: fill the available
  // ports round-robin so both QSFPs share the load.
  std::map<int, int> streams_dealt;

  for (const auto& e : g.edges()) {
    int sd = a.mapping.at(e.src);
    int dd = a.mapping.at(e.dst);
    if (sd == dd) {
      out.graph.add_edge(e);
      continue;
    }
    const DeviceSpec& src_dev = cluster.device(sd);
    int ports = std::max(1, std::min(src_dev.qsfp_ports,
                                     ports_required(cluster.topology, sd)));
    int slot = streams_dealt[sd]++;
    if (slot >= ports * streams_per_port)
      throw CapacityError("device " + std::to_string(sd) + " exhausted " +
                          std::to_string(ports) + " port(s) x " +
                          std::to_string(streams_per_port) +
                          " streams; cut edge " + e.id + " has no stream slot");

    NetLink link;
    link.edge_id = e.id;
    link.src_device = sd;
    link.dst_device = dd;
    link.hops = cluster.topology.dist(sd, dd);
    link.inter_node = !cluster.topology.same_node(sd, dd);
    link.packet_bytes = packet_bytes;
    link.volume_bits = e.tokens_per_run * e.width_bits;
    link.src_port = slot % ports;
    link.stream = slot / ports;
    if (link.inter_node) {
      // Host staging: device -> host DMA, host -> host over the 10G link,
      // host -> device DMA. The pipe runs at the harmonic combination.
      const auto& dma = cluster.host_dma;
      const auto& mpi = cluster.inter_node;
      double dma_rate = static_cast<double>(dma.line_rate_bps);
      double mpi_rate = model.effective_rate_bps(mpi, packet_bytes);
      link.effective_rate_bps = 1.0 / (2.0 / dma_rate + 1.0 / mpi_rate);
      link.latency_ns = 2.0 * static_cast<double>(dma.one_way_latency_ns) +
                        static_cast<double>(mpi.one_way_latency_ns);
    } else {
      link.effective_rate_bps =
          model.effective_rate_bps(cluster.inter_fpga, packet_bytes);
      link.latency_ns = static_cast<double>(link.hops) *
                        static_cast<double>(cluster.inter_fpga.one_way_latency_ns);
    }

    TaskVertex send;
    send.id = e.id + ".send";
    send.kind = TaskVertex::Kind::kNetSend;
    TaskVertex recv;
    recv.id = e.id + ".recv";
    recv.kind = TaskVertex::Kind::kNetRecv;
    out.graph.add_vertex(send);
    out.graph.add_vertex(recv);
    out.placement.mapping[send.id] = sd;
    out.placement.mapping[recv.id] = dd;

    FifoEdge in = e;
    in.id = e.id + ".in";
    in.dst = send.id;
    FifoEdge net = e;
    net.id = e.id + ".net";
    net.src = send.id;
    net.dst = recv.id;
    FifoEdge outg = e;
    outg.id = e.id + ".out";
    outg.src = recv.id;
    out.graph.add_edge(in);
    out.graph.add_edge(net);
    out.graph.add_edge(outg);
    out.links.push_back(link);
  }
  return out;
}

}  // namespace flowplan
