// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/dot.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace flowplan {

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string export_dot(const PipelinedDesign& d) {
  std::ostringstream dot;
  dot << "digraph " << quote(d.graph.name().empty() ? "design" : d.graph.name())
      << " {\n  rankdir=LR;\n  node [shape=box];\n";

  // device -> slot -> vertices
  std::map<int, std::map<std::pair<int, int>, std::vector<std::string>>> layout;
  for (const auto& v : d.graph.vertices()) {
    auto it = d.slots.mapping.find(v.id);
    if (it != d.slots.mapping.end())
      layout[it->second.device][{it->second.row, it->second.col}].push_back(v.id);
    else
      layout[d.placement.mapping.at(v.id)][{0, 0}].push_back(v.id);
  }
  for (const auto& [dev, slots] : layout) {
    dot << "  subgraph cluster_dev" << dev << " {\n    label=" << quote("FPGA " + std::to_string(dev))
        << ";\n";
    for (const auto& [rc, ids] : slots) {
      dot << "    subgraph cluster_dev" << dev << "_r" << rc.first << "c"
          << rc.second << " {\n      label=" << quote("slot r" + std::to_string(rc.first) +
                                                      "c" + std::to_string(rc.second))
          << ";\n";
      for (const auto& id : ids) {
        const auto& v = d.graph.vertex(id);
        const char* shape = v.hbm_ports.empty() ? "box" : "hexagon";
        dot << "      " << quote(id) << " [shape=" << shape << "];\n";
      }
      dot << "    }\n";
    }
    dot << "  }\n";
  }

  std::set<std::string> net_edges;
  for (const auto& l : d.links) net_edges.insert(l.edge_id + ".net");
  for (const auto& e : d.graph.edges()) {
    std::vector<std::string> attrs;
    if (net_edges.count(e.id)) attrs.push_back("style=dashed");
    std::int64_t lat = 0, depth = 0;
    if (auto it = d.edge_latency.find(e.id); it != d.edge_latency.end())
      lat = it->second;
    if (auto it = d.balancing_fifos.find(e.id); it != d.balancing_fifos.end())
      depth = it->second;
    if (lat > 0 || depth > 0) {
      attrs.push_back("color=red");
      attrs.push_back("label=" + quote("+" + std::to_string(lat) + " cyc / +" +
                                       std::to_string(depth) + " depth"));
    }
    dot << "  " << quote(e.src) << " -> " << quote(e.dst);
    if (!attrs.empty()) {
      dot << " [";
      for (std::size_t i = 0; i < attrs.size(); ++i)
        dot << (i ? ", " : "") << attrs[i];
      dot << "]";
    }
    dot << ";\n";
  }
  dot << "}\n";
  return dot.str();
}

std::string check_dot_syntax(const std::string& text) {
  // Tokenize enough of the DOT grammar to catch structural damage: balanced
  // braces/brackets, quoted strings closed, edges between declared nodes.
  std::set<std::string> declared;
  std::vector<char> stack;
  std::size_t i = 0;
  auto read_token = [&]() -> std::string {
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) != 0))
      ++i;
    if (i >= text.size()) return "";
    char c = text[i];
    if (c == '"') {
      std::string tok;
      ++i;
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\') ++i;
        if (i < text.size()) tok += text[i++];
      }
      if (i >= text.size()) return "\x01unterminated";
      ++i;
      return "\"" + tok;
    }
    if (c == '{' || c == '}' || c == '[' || c == ']' || c == ';' || c == ',' ||
        c == '=') {
      ++i;
      return std::string(1, c);
    }
    if (c == '-' && i + 1 < text.size() && (text[i + 1] == '>' || text[i + 1] == '-')) {
      i += 2;
      return "->";
    }
    std::string tok;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
           std::string("{}[];,=\"").find(text[i]) == std::string::npos &&
           !(text[i] == '-' && i + 1 < text.size() && text[i + 1] == '>'))
      tok += text[i++];
    return tok;
  };

  std::string prev;
  bool in_attr = false;
  while (true) {
    std::string tok = read_token();
    if (tok.empty()) break;
    if (tok == "\x01unterminated") return "unterminated string literal";
    if (tok == "{" || tok == "[") {
      stack.push_back(tok[0]);
      if (tok == "[") in_attr = true;
      prev.clear();
      continue;
    }
    if (tok == "}" || tok == "]") {
      char want = tok == "}" ? '{' : '[';
      if (stack.empty() || stack.back() != want) return "unbalanced " + tok;
      stack.pop_back();
      if (tok == "]") in_attr = false;
      prev.clear();
      continue;
    }
    if (tok == "->") {
      if (prev.empty() || prev[0] != '"') return "edge without a source node";
      std::string dst = read_token();
      if (dst.empty() || dst[0] != '"') return "edge without a target node";
      if (!declared.count(prev.substr(1))) return "edge from undeclared node " + prev.substr(1);
      if (!declared.count(dst.substr(1))) return "edge to undeclared node " + dst.substr(1);
      prev = dst;
      continue;
    }
    if (!in_attr && tok[0] == '"') declared.insert(tok.substr(1));
    prev = tok;
  }
  if (!stack.empty()) return "unclosed brace or bracket";
  if (declared.empty()) return "no nodes declared";
  return "";
}

}  // namespace flowplan
