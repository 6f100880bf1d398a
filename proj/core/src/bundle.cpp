// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/bundle.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "flowplan/dot.hpp"
#include "flowplan/errors.hpp"

namespace flowplan {

using json = nlohmann::json;

Bundle run_pipeline(const TaskGraph& g, const ClusterSpec& cluster,
                    const PipelineOptions& opt) {
  auto diags = validate_graph(g);
  if (!diags.empty())
    throw ParseError("task graph invalid: " + diags.front().path + ": " +
                     diags.front().message);

  Bundle b;
  b.input = g;
  b.cluster = cluster;
  b.effective_cluster = with_network_overhead(cluster);

  IlpProblem problem = formulate(g, b.effective_cluster);
  b.assignment = solve(problem, opt.time_limit_seconds);

  b.comm = insert_network_vertices(g, b.assignment, b.effective_cluster,
                                   opt.streams_per_port, opt.packet_bytes);
  b.slots = floorplan_all(b.comm.graph, b.comm.placement, b.effective_cluster,
                          opt.floorplan_depth, opt.parallel);
  b.design = pipeline_design(b.comm.graph, b.comm.placement, b.slots,
                             b.comm.links, opt.stages_per_crossing,
                             opt.frequency_hz);
  for (const auto& dev : b.effective_cluster.devices) {
    HbmBinding binding = bind_hbm_channels(b.comm.graph, b.slots, dev, dev.id,
                                           1, -1, opt.ports_per_channel);
    for (const auto& [key, ch] : binding.channel_of) b.design.hbm_channel[key] = ch;
  }
  if (opt.simulate) {
    SimConfig cfg;
    cfg.frequency_hz = opt.frequency_hz;
    cfg.port_streams = opt.streams_per_port;
    b.report = simulate(b.design, b.effective_cluster, cfg);
    b.simulated = true;
  }
  return b;
}

std::string assignment_json(const InterAssignment& a) {
  json doc;
  doc["mapping"] = json::object();
  for (const auto& [v, d] : a.mapping) doc["mapping"][v] = d;
  json rep;
  rep["certified"] = a.certified;
  rep["feasible"] = a.feasible;
  rep["objective"] = static_cast<double>(a.objective_tenths) / 10.0;
  rep["per_device"] = json::object();
  for (const auto& [d, area] : a.per_device_area) {
    rep["per_device"][std::to_string(d)] =
        json{{"bram", area.bram}, {"dsp", area.dsp}, {"ff", area.ff},
             {"lut", area.lut},   {"uram", area.uram}};
  }
  doc["report"] = rep;
  return doc.dump(2) + "\n";
}

InterAssignment parse_assignment(std::string_view text) {
  json doc = json::parse(text);
  InterAssignment a;
  for (const auto& [v, d] : doc.at("mapping").items()) a.mapping[v] = d.get<int>();
  a.certified = doc.at("report").at("certified").get<bool>();
  a.feasible = doc.at("report").at("feasible").get<bool>();
  a.objective_tenths = static_cast<std::int64_t>(
      doc.at("report").at("objective").get<double>() * 10.0 + 0.5);
  for (const auto& [d, area] : doc.at("report").at("per_device").items()) {
    ResourceVec r{area.at("lut").get<std::int64_t>(), area.at("ff").get<std::int64_t>(),
                  area.at("bram").get<std::int64_t>(), area.at("dsp").get<std::int64_t>(),
                  area.at("uram").get<std::int64_t>()};
    a.per_device_area[std::stoi(d)] = r;
  }
  return a;
}

std::string links_json(const std::vector<NetLink>& links) {
  json arr = json::array();
  for (const auto& l : links) {
    json j;
    j["edge"] = l.edge_id;
    j["effective_rate_bps"] = l.effective_rate_bps;
    j["hops"] = l.hops;
    j["inter_node"] = l.inter_node;
    j["latency_ns"] = l.latency_ns;
    j["packet_bytes"] = l.packet_bytes;
    j["src_device"] = l.src_device;
    j["dst_device"] = l.dst_device;
    j["src_port"] = l.src_port;
    j["stream"] = l.stream;
    j["volume_bits"] = l.volume_bits;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<NetLink> parse_links(std::string_view text) {
  json arr = json::parse(text);
  std::vector<NetLink> links;
  for (const auto& j : arr) {
    NetLink l;
    l.edge_id = j.at("edge").get<std::string>();
    l.effective_rate_bps = j.at("effective_rate_bps").get<double>();
    l.hops = j.at("hops").get<int>();
    l.inter_node = j.at("inter_node").get<bool>();
    l.latency_ns = j.at("latency_ns").get<double>();
    l.packet_bytes = j.at("packet_bytes").get<std::int64_t>();
    l.src_device = j.at("src_device").get<int>();
    l.dst_device = j.at("dst_device").get<int>();
    l.src_port = j.at("src_port").get<int>();
    l.stream = j.at("stream").get<int>();
    l.volume_bits = j.at("volume_bits").get<std::int64_t>();
    links.push_back(l);
  }
  return links;
}

std::string floorplan_json(const SlotAssignment& s) {
  json doc;
  json devs = json::object();
  for (const auto& [id, p] : s.mapping) {
    std::string key = std::to_string(p.device);
    if (!devs.contains(key)) devs[key] = json::object();
    devs[key][id] = json{{"col", p.col}, {"row", p.row}};
  }
  doc["devices"] = devs;
  json report = json::object();
  for (const auto& [d, obj] : s.objective) {
    json jd;
    jd["certified"] = s.certified.count(d) ? s.certified.at(d) : true;
    jd["objective"] = obj;
    jd["oracle_gap"] = s.oracle_gap.count(d) ? s.oracle_gap.at(d) : -1;
    report[std::to_string(d)] = jd;
  }
  doc["report"] = report;
  return doc.dump(2) + "\n";
}

SlotAssignment parse_floorplan(std::string_view text) {
  json doc = json::parse(text);
  SlotAssignment s;
  for (const auto& [dev, verts] : doc.at("devices").items()) {
    int d = std::stoi(dev);
    for (const auto& [id, rc] : verts.items())
      s.mapping[id] = {d, rc.at("row").get<int>(), rc.at("col").get<int>()};
  }
  for (const auto& [dev, rep] : doc.at("report").items()) {
    int d = std::stoi(dev);
    s.objective[d] = rep.at("objective").get<std::int64_t>();
    s.certified[d] = rep.at("certified").get<bool>();
    s.oracle_gap[d] = rep.at("oracle_gap").get<std::int64_t>();
  }
  return s;
}

std::string hbm_json(const std::map<std::pair<std::string, int>, int>& binding) {
  json doc = json::object();
  for (const auto& [key, ch] : binding)
    doc[key.first + "#" + std::to_string(key.second)] = ch;
  return doc.dump(2) + "\n";
}

std::map<std::pair<std::string, int>, int> parse_hbm(std::string_view text) {
  json doc = json::parse(text);
  std::map<std::pair<std::string, int>, int> binding;
  for (const auto& [key, ch] : doc.items()) {
    auto hash = key.rfind('#');
    binding[{key.substr(0, hash), std::stoi(key.substr(hash + 1))}] = ch.get<int>();
  }
  return binding;
}

std::string latency_json(const PipelinedDesign& d) {
  json doc;
  doc["balancing_fifos"] = json::object();
  for (const auto& [e, v] : d.balancing_fifos) doc["balancing_fifos"][e] = v;
  doc["edge_latency"] = json::object();
  for (const auto& [e, v] : d.edge_latency) doc["edge_latency"][e] = v;
  doc["stages_per_crossing"] = d.stages_per_crossing;
  return doc.dump(2) + "\n";
}

void parse_latency(std::string_view text, PipelinedDesign& d) {
  json doc = json::parse(text);
  for (const auto& [e, v] : doc.at("edge_latency").items())
    d.edge_latency[e] = v.get<std::int64_t>();
  for (const auto& [e, v] : doc.at("balancing_fifos").items())
    d.balancing_fifos[e] = v.get<std::int64_t>();
  d.stages_per_crossing = doc.at("stages_per_crossing").get<int>();
}

std::string report_json(const SimReport& r) {
  json doc;
  doc["total_cycles"] = r.total_cycles;
  doc["total_seconds"] = r.total_seconds;
  doc["output_digest"] = r.output_digest;
  doc["lower_bound_cycles"] = r.lower_bound_cycles;
  doc["hbm_contention_events"] = r.hbm_contention_events;
  doc["port_contention_events"] = r.port_contention_events;
  doc["compute_busy_cycles"] = r.compute_busy_cycles;
  doc["link_busy_cycles"] = r.link_busy_cycles;
  json verts = json::object();
  for (const auto& [id, v] : r.per_vertex)
    verts[id] = json{{"busy", v.busy_cycles}, {"firings", v.firings},
                     {"idle", v.idle_cycles}};
  doc["vertices"] = verts;
  json links = json::object();
  for (const auto& [id, l] : r.per_link)
    links[id] = json{{"achieved_bps", l.achieved_bps},
                     {"busy_cycles", l.busy_cycles},
                     {"volume_bits", l.volume_bits}};
  doc["links"] = links;
  json sinks = json::object();
  for (const auto& [id, t] : r.sink_tokens) sinks[id] = t;
  doc["sink_tokens"] = sinks;
  return doc.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

void write_bundle(const Bundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "assignment.json", assignment_json(b.assignment));
  write_file(dir / "graph.net.json", serialize_task_graph(b.comm.graph));
  write_file(dir / "links.json", links_json(b.comm.links));
  write_file(dir / "floorplan.json", floorplan_json(b.slots));
  write_file(dir / "hbm.json", hbm_json(b.design.hbm_channel));
  write_file(dir / "latency.json", latency_json(b.design));
  if (b.simulated) write_file(dir / "report.json", report_json(b.report));
  write_file(dir / "design.dot", export_dot(b.design));
}

}  // namespace flowplan
