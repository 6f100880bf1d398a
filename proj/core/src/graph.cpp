// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <nlohmann/json.hpp>

#include "flowplan/errors.hpp"

namespace flowplan {

// Plain (map-backed) json keeps object keys sorted, which is what makes the
// emitted artifacts canonical and diffable.
using json = nlohmann::json;

void TaskGraph::add_vertex(TaskVertex v) {
  if (index_.count(v.id))
    throw ReferenceError("duplicate vertex id: " + v.id);
  index_.emplace(v.id, vertices_.size());
  out_.try_emplace(v.id);
  in_.try_emplace(v.id);
  vertices_.push_back(std::move(v));
}

void TaskGraph::add_edge(FifoEdge e) {
  for (const auto& other : edges_)
    if (other.id == e.id) throw ReferenceError("duplicate edge id: " + e.id);
  if (!has_vertex(e.src))
    throw ReferenceError("edge " + e.id + " references unknown vertex: " + e.src);
  if (!has_vertex(e.dst))
    throw ReferenceError("edge " + e.id + " references unknown vertex: " + e.dst);
  out_[e.src].push_back(edges_.size());
  in_[e.dst].push_back(edges_.size());
  edges_.push_back(std::move(e));
}

bool TaskGraph::has_vertex(std::string_view id) const {
  return index_.count(std::string(id)) != 0;
}

const TaskVertex& TaskGraph::vertex(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    throw ReferenceError("unknown vertex: " + std::string(id));
  return vertices_[it->second];
}

std::size_t TaskGraph::vertex_index(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end())
    throw ReferenceError("unknown vertex: " + std::string(id));
  return it->second;
}

const std::vector<std::size_t>& TaskGraph::out_edges(std::string_view id) const {
  auto it = out_.find(std::string(id));
  if (it == out_.end()) throw ReferenceError("unknown vertex: " + std::string(id));
  return it->second;
}

const std::vector<std::size_t>& TaskGraph::in_edges(std::string_view id) const {
  auto it = in_.find(std::string(id));
  if (it == in_.end()) throw ReferenceError("unknown vertex: " + std::string(id));
  return it->second;
}

namespace {

constexpr int kLegalPortWidths[] = {32, 64, 128, 256, 512};

bool legal_port_width(int w) {
  return std::find(std::begin(kLegalPortWidths), std::end(kLegalPortWidths), w) !=
         std::end(kLegalPortWidths);
}

}  // namespace

std::vector<Diagnostic> validate_graph(const TaskGraph& g) {
  std::vector<Diagnostic> diags;
  for (const auto& v : g.vertices()) {
    if (!v.area.all_non_negative())
      diags.push_back({v.id, "negative resource component"});
    if (v.work < 0) diags.push_back({v.id, "negative work"});
    for (std::size_t p = 0; p < v.hbm_ports.size(); ++p) {
      if (!legal_port_width(v.hbm_ports[p].width_bits))
        diags.push_back({v.id, "hbm port " + std::to_string(p) +
                                   " has illegal width " +
                                   std::to_string(v.hbm_ports[p].width_bits)});
      if (v.hbm_ports[p].volume_bytes < 0)
        diags.push_back({v.id, "hbm port " + std::to_string(p) +
                                   " has negative volume"});
    }
  }
  for (const auto& e : g.edges()) {
    if (e.src == e.dst)
      diags.push_back({e.id, "self loop on vertex " + e.src});
    if (e.width_bits <= 0) diags.push_back({e.id, "edge width must be > 0"});
    if (e.depth_tokens < 1) diags.push_back({e.id, "edge depth must be >= 1"});
    if (e.tokens_per_run < 0) diags.push_back({e.id, "negative token count"});
    if (!g.has_vertex(e.src))
      diags.push_back({e.id, "dangling src: " + e.src});
    if (!g.has_vertex(e.dst))
      diags.push_back({e.id, "dangling dst: " + e.dst});
  }

  // Reachability: BFS from every source must reach at least one sink.
  if (!g.vertices().empty()) {
    std::set<std::string> sources, sinks;
    for (const auto& v : g.vertices()) {
      if (v.kind == TaskVertex::Kind::kSource || g.in_edges(v.id).empty())
        sources.insert(v.id);
      if (v.kind == TaskVertex::Kind::kSink || g.out_edges(v.id).empty())
        sinks.insert(v.id);
    }
    std::deque<std::string> frontier(sources.begin(), sources.end());
    std::set<std::string> seen(sources.begin(), sources.end());
    bool sink_reached = false;
    while (!frontier.empty() && !sink_reached) {
      std::string u = frontier.front();
      frontier.pop_front();
      if (sinks.count(u)) sink_reached = true;
      for (std::size_t ei : g.out_edges(u)) {
        const auto& dst = g.edges()[ei].dst;
        if (seen.insert(dst).second) frontier.push_back(dst);
      }
    }
    if (!sink_reached)
      diags.push_back({g.name(), "no sink is reachable from any source"});
  }
  return diags;
}

ResourceVec total_area(const TaskGraph& g, const std::vector<std::string>& subset) {
  ResourceVec sum;
  for (const auto& id : subset) sum += g.vertex(id).area;
  return sum;
}

namespace {

const char* kKindNames[] = {"compute", "source", "sink",
                            "net_send", "net_recv", "merge_any"};

TaskVertex::Kind parse_kind(const std::string& s, const std::string& path) {
  for (int i = 0; i < 6; ++i)
    if (s == kKindNames[i]) return static_cast<TaskVertex::Kind>(i);
  throw ParseError(path + ": unknown vertex kind '" + s + "'");
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end())
      throw ParseError(path + ": unknown key '" + key + "'");
  }
}

std::int64_t require_int(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_number_integer())
    throw ParseError(path + "." + key + ": expected integer");
  return v.get<std::int64_t>();
}

std::string require_str(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ParseError(path + ": missing key '" + key + "'");
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ParseError(path + "." + key + ": expected string");
  return v.get<std::string>();
}

ResourceVec parse_area(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path + ": expected object");
  reject_unknown_keys(obj, {"lut", "ff", "bram", "dsp", "uram"}, path);
  ResourceVec a;
  a.lut = obj.contains("lut") ? require_int(obj, "lut", path) : 0;
  a.ff = obj.contains("ff") ? require_int(obj, "ff", path) : 0;
  a.bram = obj.contains("bram") ? require_int(obj, "bram", path) : 0;
  a.dsp = obj.contains("dsp") ? require_int(obj, "dsp", path) : 0;
  a.uram = obj.contains("uram") ? require_int(obj, "uram", path) : 0;
  return a;
}

json area_to_json(const ResourceVec& a) {
  json j = json::object();
  j["bram"] = a.bram;
  j["dsp"] = a.dsp;
  j["ff"] = a.ff;
  j["lut"] = a.lut;
  j["uram"] = a.uram;
  return j;
}

}  // namespace

const char* vertex_kind_name(TaskVertex::Kind k) {
  return kKindNames[static_cast<int>(k)];
}

TaskGraph parse_task_graph(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("task graph is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("$: expected top-level object");
  reject_unknown_keys(doc, {"name", "vertices", "edges"}, "$");

  TaskGraph g(doc.contains("name") ? require_str(doc, "name", "$") : "");
  if (!doc.contains("vertices") || !doc.at("vertices").is_array())
    throw ParseError("$.vertices: expected array");
  if (!doc.contains("edges") || !doc.at("edges").is_array())
    throw ParseError("$.edges: expected array");

  std::size_t vi = 0;
  for (const auto& jv : doc.at("vertices")) {
    std::string path = "$.vertices[" + std::to_string(vi++) + "]";
    if (!jv.is_object()) throw ParseError(path + ": expected object");
    reject_unknown_keys(jv, {"id", "area", "work", "kind", "hbm_ports"}, path);
    TaskVertex v;
    v.id = require_str(jv, "id", path);
    if (jv.contains("area")) v.area = parse_area(jv.at("area"), path + ".area");
    v.work = jv.contains("work") ? require_int(jv, "work", path) : 0;
    if (v.work < 0) throw ParseError(path + ".work: must be non-negative");
    v.kind = jv.contains("kind")
                 ? parse_kind(require_str(jv, "kind", path), path + ".kind")
                 : TaskVertex::Kind::kCompute;
    if (jv.contains("hbm_ports")) {
      if (!jv.at("hbm_ports").is_array())
        throw ParseError(path + ".hbm_ports: expected array");
      std::size_t pi = 0;
      for (const auto& jp : jv.at("hbm_ports")) {
        std::string ppath = path + ".hbm_ports[" + std::to_string(pi++) + "]";
        if (!jp.is_object()) throw ParseError(ppath + ": expected object");
        reject_unknown_keys(jp, {"dir", "width", "volume"}, ppath);
        HbmPort p;
        std::string dir = require_str(jp, "dir", ppath);
        if (dir == "read")
          p.dir = HbmPort::Dir::kRead;
        else if (dir == "write")
          p.dir = HbmPort::Dir::kWrite;
        else
          throw ParseError(ppath + ".dir: expected 'read' or 'write'");
        p.width_bits = static_cast<int>(require_int(jp, "width", ppath));
        if (!legal_port_width(p.width_bits))
          throw ParseError(ppath + ".width: expected one of 32,64,128,256,512");
        p.volume_bytes = jp.contains("volume") ? require_int(jp, "volume", ppath) : 0;
        v.hbm_ports.push_back(p);
      }
    }
    try {
      g.add_vertex(std::move(v));
    } catch (const ReferenceError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }

  std::size_t ei = 0;
  for (const auto& je : doc.at("edges")) {
    std::string path = "$.edges[" + std::to_string(ei++) + "]";
    if (!je.is_object()) throw ParseError(path + ": expected object");
    reject_unknown_keys(je, {"id", "src", "dst", "width", "depth", "tokens"}, path);
    FifoEdge e;
    e.id = require_str(je, "id", path);
    e.src = require_str(je, "src", path);
    e.dst = require_str(je, "dst", path);
    e.width_bits = static_cast<int>(require_int(je, "width", path));
    e.depth_tokens = je.contains("depth") ? require_int(je, "depth", path) : 2;
    e.tokens_per_run = je.contains("tokens") ? require_int(je, "tokens", path) : 1;
    g.add_edge(std::move(e));  // ReferenceError propagates with the bad id
  }
  return g;
}

std::string serialize_task_graph(const TaskGraph& g) {
  json doc = json::object();
  doc["edges"] = json::array();
  doc["name"] = g.name();
  doc["vertices"] = json::array();
  for (const auto& v : g.vertices()) {
    json jv = json::object();
    jv["area"] = area_to_json(v.area);
    jv["hbm_ports"] = json::array();
    for (const auto& p : v.hbm_ports) {
      json jp = json::object();
      jp["dir"] = p.dir == HbmPort::Dir::kRead ? "read" : "write";
      jp["volume"] = p.volume_bytes;
      jp["width"] = p.width_bits;
      jv["hbm_ports"].push_back(jp);
    }
    jv["id"] = v.id;
    jv["kind"] = vertex_kind_name(v.kind);
    jv["work"] = v.work;
    doc["vertices"].push_back(jv);
  }
  for (const auto& e : g.edges()) {
    json je = json::object();
    je["depth"] = e.depth_tokens;
    je["dst"] = e.dst;
    je["id"] = e.id;
    je["src"] = e.src;
    je["tokens"] = e.tokens_per_run;
    je["width"] = e.width_bits;
    doc["edges"].push_back(je);
  }
  return doc.dump(2) + "\n";
}

}  // namespace flowplan
