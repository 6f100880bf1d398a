// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <nlohmann/json.hpp>

#include "flowplan/errors.hpp"

namespace flowplan {

using json = nlohmann::json;

ResourceVec DeviceSpec::slot_capacity_at(int row, int col) const {
  if (row < 0 || row >= slot_rows || col < 0 || col >= slot_cols)
    throw ReferenceError("slot (" + std::to_string(row) + "," +
                         std::to_string(col) + ") outside device grid");
  if (slot_capacity_override)
    return (*slot_capacity_override)[static_cast<std::size_t>(row * slot_cols + col)];
  return slot_capacity();
}

namespace {

struct MeshShape {
  int rows, cols;
};

MeshShape mesh_shape(int n) {
  int rows = static_cast<int>(std::sqrt(static_cast<double>(n)));
  if (rows < 1) rows = 1;
  int cols = (n + rows - 1) / rows;
  return {rows, cols};
}

std::vector<std::vector<int>> bfs_all_pairs(
    int n, const std::vector<std::vector<int>>& adj) {
  std::vector<std::vector<int>> hops(
      static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
  for (int s = 0; s < n; ++s) {
    auto& row = hops[static_cast<std::size_t>(s)];
    row[static_cast<std::size_t>(s)] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (row[static_cast<std::size_t>(v)] < 0) {
          row[static_cast<std::size_t>(v)] = row[static_cast<std::size_t>(u)] + 1;
          q.push_back(v);
        }
      }
    }
    for (int v : row)
      if (v < 0) throw ParseError("topology is not connected");
  }
  return hops;
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void Topology::finalize() {
  if (device_count < 1) throw ParseError("topology.count must be >= 1");
  if (node_group.empty()) node_group.assign(static_cast<std::size_t>(device_count), 0);
  if (static_cast<int>(node_group.size()) != device_count)
    throw ParseError("topology.groups must cover every device exactly once");

  const auto n = static_cast<std::size_t>(device_count);
  switch (kind) {
    case TopologyKind::kChain:
    case TopologyKind::kRing:
    case TopologyKind::kStar:
      hops_.clear();  // closed form
      return;
    case TopologyKind::kMesh: {
      auto [rows, cols] = mesh_shape(device_count);
      std::vector<std::vector<int>> adj(n);
      for (int d = 0; d < device_count; ++d) {
        int r = d / cols, c = d % cols;
        auto link = [&](int rr, int cc) {
          int o = rr * cols + cc;
          if (rr >= 0 && rr < rows && cc >= 0 && cc < cols && o < device_count)
            adj[static_cast<std::size_t>(d)].push_back(o);
        };
        link(r - 1, c);
        link(r + 1, c);
        link(r, c - 1);
        link(r, c + 1);
      }
      hops_ = bfs_all_pairs(device_count, adj);
      return;
    }
    case TopologyKind::kHypercube: {
      if (!is_power_of_two(device_count))
        throw ParseError("hypercube topology needs a power-of-two device count");
      std::vector<std::vector<int>> adj(n);
      for (int d = 0; d < device_count; ++d)
        for (int b = 1; b < device_count; b <<= 1)
          adj[static_cast<std::size_t>(d)].push_back(d ^ b);
      hops_ = bfs_all_pairs(device_count, adj);
      return;
    }
    case TopologyKind::kCustom: {
      if (static_cast<int>(custom_hops.size()) != device_count)
        throw ParseError("custom_hops must be a device_count x device_count matrix");
      for (std::size_t i = 0; i < n; ++i) {
        if (custom_hops[i].size() != n)
          throw ParseError("custom_hops must be square");
        if (custom_hops[i][i] != 0)
          throw ParseError("custom_hops diagonal must be zero");
        for (std::size_t j = 0; j < n; ++j) {
          if (custom_hops[i][j] != custom_hops[j][i])
            throw ParseError("custom_hops must be symmetric");
          if (custom_hops[i][j] < 0)
            throw ParseError("custom_hops must be non-negative");
        }
      }
      // Close the matrix under shortest paths so an edge-list style input
      // still yields a metric.
      hops_ = custom_hops;
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j)
            hops_[i][j] = std::min(hops_[i][j], hops_[i][k] + hops_[k][j]);
      return;
    }
  }
}

int Topology::dist(int i, int j) const {
  if (i < 0 || j < 0 || i >= device_count || j >= device_count)
    throw ReferenceError("device index out of range: " + std::to_string(std::max(i, j)));
  if (i == j) return 0;
  switch (kind) {
    case TopologyKind::kChain:
      return std::abs(i - j);
    case TopologyKind::kRing: {
      int d = std::abs(i - j);
      return std::min(d, device_count - d);
    }
    case TopologyKind::kStar:
      // Device 0 is the hub; two leaves talk through it.
      return (i == 0 || j == 0) ? 1 : 2;
    default:
      return hops_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
}

bool Topology::same_node(int i, int j) const {
  return node_group[static_cast<std::size_t>(i)] ==
         node_group[static_cast<std::size_t>(j)];
}

LinkProtocol protocol_preset(std::string_view name) {
  if (name == "ethernet-100g")
    return {"ethernet-100g", 10, 500, 100'000'000'000};
  if (name == "pcie-gen3x16")
    // lambda 12.5 relative to the 100G baseline; 1250 ns round trip.
    return {"pcie-gen3x16", 125, 625, 8'000'000'000};
  if (name == "host-mpi-10g")
    return {"host-mpi-10g", 100, 5000, 10'000'000'000};
  throw ParseError("unknown link protocol: " + std::string(name));
}

const DeviceSpec& ClusterSpec::device(int id) const {
  for (const auto& d : devices)
    if (d.id == id) return d;
  throw ReferenceError("unknown device: " + std::to_string(id));
}

std::int64_t comm_cost_tenths(const FifoEdge& e, int i, int j,
                              const ClusterSpec& cluster) {
  int hops = cluster.topology.dist(i, j);
  if (hops == 0) return 0;
  const auto& proto =
      cluster.topology.same_node(i, j) ? cluster.inter_fpga : cluster.inter_node;
  return static_cast<std::int64_t>(e.width_bits) * hops * proto.lambda_tenths;
}

namespace {

// Networking IP overhead per QSFP28 port, in ppm of original capacity.
constexpr std::int64_t kPortOverheadPpm[ResourceVec::kClasses] = {
    20400,  // lut
    29400,  // ff
    20600,  // bram
    0,      // dsp
    0,      // uram
};

}  // namespace

DeviceSpec apply_network_overhead(const DeviceSpec& d, int ports_used) {
  if (ports_used < 0 || ports_used > d.qsfp_ports)
    throw CapacityError("device " + std::to_string(d.id) + " has " +
                        std::to_string(d.qsfp_ports) + " QSFP ports, needs " +
                        std::to_string(ports_used));
  DeviceSpec out = d;
  for (int i = 0; i < ResourceVec::kClasses; ++i) {
    std::int64_t ded =
        d.capacity.component(i) * kPortOverheadPpm[i] * ports_used / 1000000;
    out.capacity.set_component(i, d.capacity.component(i) - ded);
  }
  return out;
}

int ports_required(const Topology& t, int device) {
  int n = t.device_count;
  if (n <= 1) return 0;
  switch (t.kind) {
    case TopologyKind::kChain:
      return (device == 0 || device == n - 1) ? 1 : 2;
    case TopologyKind::kRing:
      return n == 2 ? 1 : 2;
    case TopologyKind::kStar:
      return device == 0 ? n - 1 : 1;
    default: {
      int ports = 0;
      for (int j = 0; j < n; ++j)
        if (j != device && t.dist(device, j) == 1) ++ports;
      return ports;
    }
  }
}

namespace {

const char* kTopologyNames[] = {"chain", "ring", "star", "mesh", "hypercube",
                                "custom"};

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  for (const auto& [key, _] : obj.items())
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ParseError(path + ": unknown key '" + key + "'");
}

std::int64_t get_int(const json& obj, const char* key, const std::string& path,
                     std::optional<std::int64_t> fallback = std::nullopt) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ParseError(path + ": missing key '" + key + "'");
  }
  if (!obj.at(key).is_number_integer())
    throw ParseError(path + "." + key + ": expected integer");
  return obj.at(key).get<std::int64_t>();
}

ResourceVec get_capacity(const json& obj, const std::string& path) {
  reject_unknown(obj, {"lut", "ff", "bram", "dsp", "uram"}, path);
  ResourceVec c;
  c.lut = get_int(obj, "lut", path, 0);
  c.ff = get_int(obj, "ff", path, 0);
  c.bram = get_int(obj, "bram", path, 0);
  c.dsp = get_int(obj, "dsp", path, 0);
  c.uram = get_int(obj, "uram", path, 0);
  return c;
}

json capacity_json(const ResourceVec& c) {
  return json{{"bram", c.bram}, {"dsp", c.dsp}, {"ff", c.ff},
              {"lut", c.lut},   {"uram", c.uram}};
}

}  // namespace

TopologyKind topology_kind_from_name(std::string_view name) {
  for (int i = 0; i < 6; ++i)
    if (name == kTopologyNames[i]) return static_cast<TopologyKind>(i);
  throw ParseError("unknown topology kind: " + std::string(name));
}

const char* topology_kind_name(TopologyKind k) {
  return kTopologyNames[static_cast<int>(k)];
}

ClusterSpec parse_cluster(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("cluster spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("$: expected top-level object");
  reject_unknown(doc, {"devices", "topology", "protocols"}, "$");
  if (!doc.contains("devices") || !doc.at("devices").is_array() ||
      doc.at("devices").empty())
    throw ParseError("$.devices: expected non-empty array");
  if (!doc.contains("topology") || !doc.at("topology").is_object())
    throw ParseError("$.topology: expected object");

  ClusterSpec c;
  std::size_t di = 0;
  for (const auto& jd : doc.at("devices")) {
    std::string path = "$.devices[" + std::to_string(di++) + "]";
    if (!jd.is_object()) throw ParseError(path + ": expected object");
    reject_unknown(jd,
                   {"id", "capacity", "slot_rows", "slot_cols", "hbm_channels",
                    "hbm_row", "qsfp_ports", "threshold", "slot_capacities"},
                   path);
    DeviceSpec d;
    d.id = static_cast<int>(get_int(jd, "id", path));
    if (!jd.contains("capacity"))
      throw ParseError(path + ": missing key 'capacity'");
    d.capacity = get_capacity(jd.at("capacity"), path + ".capacity");
    d.slot_rows = static_cast<int>(get_int(jd, "slot_rows", path, 3));
    d.slot_cols = static_cast<int>(get_int(jd, "slot_cols", path, 2));
    d.hbm_channels = static_cast<int>(get_int(jd, "hbm_channels", path, 32));
    d.hbm_row = static_cast<int>(get_int(jd, "hbm_row", path, 0));
    d.qsfp_ports = static_cast<int>(get_int(jd, "qsfp_ports", path, 2));
    if (jd.contains("threshold")) {
      if (!jd.at("threshold").is_number())
        throw ParseError(path + ".threshold: expected number");
      double t = jd.at("threshold").get<double>();
      if (t <= 0.0 || t > 1.0)
        throw ParseError(path + ".threshold: must be in (0,1]");
      d.threshold_ppm = std::llround(t * 1e6);
    }
    if (d.slot_rows * d.slot_cols < 1)
      throw ParseError(path + ": slot grid must contain at least one slot");
    if (d.hbm_row < 0 || d.hbm_row >= d.slot_rows)
      throw ParseError(path + ".hbm_row: outside slot grid");
    if (jd.contains("slot_capacities")) {
      if (!jd.at("slot_capacities").is_array() ||
          static_cast<int>(jd.at("slot_capacities").size()) != d.num_slots())
        throw ParseError(path + ".slot_capacities: expected one entry per slot");
      std::vector<ResourceVec> slots;
      for (const auto& js : jd.at("slot_capacities"))
        slots.push_back(get_capacity(js, path + ".slot_capacities"));
      d.slot_capacity_override = std::move(slots);
    }
    c.devices.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < c.devices.size(); ++i)
    if (c.devices[i].id != static_cast<int>(i))
      throw ParseError("$.devices: ids must be 0-based and consecutive");

  const auto& jt = doc.at("topology");
  reject_unknown(jt, {"kind", "count", "groups", "custom_hops"}, "$.topology");
  c.topology.kind = topology_kind_from_name(
      jt.contains("kind") ? jt.at("kind").get<std::string>() : "chain");
  c.topology.device_count =
      static_cast<int>(get_int(jt, "count", "$.topology",
                               static_cast<std::int64_t>(c.devices.size())));
  if (c.topology.device_count != static_cast<int>(c.devices.size()))
    throw ParseError("$.topology.count: must match the device list");
  if (jt.contains("groups")) {
    if (!jt.at("groups").is_array())
      throw ParseError("$.topology.groups: expected array of device-id arrays");
    c.topology.node_group.assign(c.devices.size(), -1);
    int gid = 0;
    for (const auto& jg : jt.at("groups")) {
      if (!jg.is_array()) throw ParseError("$.topology.groups: expected arrays");
      for (const auto& jd : jg) {
        int d = jd.get<int>();
        if (d < 0 || d >= static_cast<int>(c.devices.size()) ||
            c.topology.node_group[static_cast<std::size_t>(d)] != -1)
          throw ParseError("$.topology.groups: must partition the device ids");
        c.topology.node_group[static_cast<std::size_t>(d)] = gid;
      }
      ++gid;
    }
    for (int g : c.topology.node_group)
      if (g < 0) throw ParseError("$.topology.groups: must cover every device");
  }
  if (jt.contains("custom_hops")) {
    for (const auto& row : jt.at("custom_hops"))
      c.topology.custom_hops.push_back(row.get<std::vector<int>>());
  }
  c.topology.finalize();

  if (doc.contains("protocols")) {
    const auto& jp = doc.at("protocols");
    reject_unknown(jp, {"inter_fpga", "inter_node"}, "$.protocols");
    if (jp.contains("inter_fpga"))
      c.inter_fpga = protocol_preset(jp.at("inter_fpga").get<std::string>());
    if (jp.contains("inter_node"))
      c.inter_node = protocol_preset(jp.at("inter_node").get<std::string>());
  }
  return c;
}

std::string serialize_cluster(const ClusterSpec& c) {
  json doc;
  doc["devices"] = json::array();
  for (const auto& d : c.devices) {
    json jd;
    jd["capacity"] = capacity_json(d.capacity);
    jd["hbm_channels"] = d.hbm_channels;
    jd["hbm_row"] = d.hbm_row;
    jd["id"] = d.id;
    jd["qsfp_ports"] = d.qsfp_ports;
    jd["slot_cols"] = d.slot_cols;
    jd["slot_rows"] = d.slot_rows;
    jd["threshold"] = static_cast<double>(d.threshold_ppm) / 1e6;
    if (d.slot_capacity_override) {
      jd["slot_capacities"] = json::array();
      for (const auto& s : *d.slot_capacity_override)
        jd["slot_capacities"].push_back(capacity_json(s));
    }
    doc["devices"].push_back(jd);
  }
  json jt;
  jt["count"] = c.topology.device_count;
  jt["kind"] = topology_kind_name(c.topology.kind);
  if (!c.topology.custom_hops.empty()) jt["custom_hops"] = c.topology.custom_hops;
  int groups = 1;
  for (int g : c.topology.node_group) groups = std::max(groups, g + 1);
  if (groups > 1) {
    json jg = json::array();
    for (int g = 0; g < groups; ++g) {
      json members = json::array();
      for (std::size_t d = 0; d < c.topology.node_group.size(); ++d)
        if (c.topology.node_group[d] == g) members.push_back(d);
      jg.push_back(members);
    }
    jt["groups"] = jg;
  }
  doc["topology"] = jt;
  doc["protocols"] = json{{"inter_fpga", c.inter_fpga.name},
                          {"inter_node", c.inter_node.name}};
  return doc.dump(2) + "\n";
}

ClusterSpec make_u55c_cluster(int device_count, TopologyKind kind,
                              std::int64_t threshold_ppm, int node_size) {
  ClusterSpec c;
  for (int i = 0; i < device_count; ++i) {
    DeviceSpec d;
    d.id = i;
    d.capacity = ResourceVec{1146240, 2292480, 1776, 8376, 960};
    d.slot_rows = 3;
    d.slot_cols = 2;
    d.hbm_channels = 32;
    d.hbm_row = 0;
    d.qsfp_ports = 2;
    d.threshold_ppm = threshold_ppm;
    c.devices.push_back(d);
  }
  c.topology.kind = kind;
  c.topology.device_count = device_count;
  if (node_size > 0) {
    c.topology.node_group.resize(static_cast<std::size_t>(device_count));
    for (int i = 0; i < device_count; ++i)
      c.topology.node_group[static_cast<std::size_t>(i)] = i / node_size;
  }
  c.topology.finalize();
  return c;
}

}  // namespace flowplan
