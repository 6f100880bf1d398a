// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/pipeliner.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

std::int64_t ns_to_cycles(double ns, double frequency_hz) {
  return static_cast<std::int64_t>(std::ceil(ns * frequency_hz / 1e9));
}

// Tarjan strongly-connected components; returns component id per vertex
// index, ids in reverse topological order.
std::vector<int> scc_of(const TaskGraph& g) {
  const int n = static_cast<int>(g.vertices().size());
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  for (const auto& e : g.edges())
    succ[g.vertex_index(e.src)].push_back(static_cast<int>(g.vertex_index(e.dst)));
  std::vector<int> comp(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n)),
      num(static_cast<std::size_t>(n), -1), stack;
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  int counter = 0, comps = 0;
  std::function<void(int)> dfs = [&](int u) {
    num[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = counter++;
    stack.push_back(u);
    on_stack[static_cast<std::size_t>(u)] = true;
    for (int v : succ[static_cast<std::size_t>(u)]) {
      if (num[static_cast<std::size_t>(v)] < 0) {
        dfs(v);
        low[static_cast<std::size_t>(u)] =
            std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
      } else if (on_stack[static_cast<std::size_t>(v)]) {
        low[static_cast<std::size_t>(u)] =
            std::min(low[static_cast<std::size_t>(u)], num[static_cast<std::size_t>(v)]);
      }
    }
    if (low[static_cast<std::size_t>(u)] == num[static_cast<std::size_t>(u)]) {
      while (true) {
        int v = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(v)] = false;
        comp[static_cast<std::size_t>(v)] = comps;
        if (v == u) break;
      }
      ++comps;
    }
  };
  for (int u = 0; u < n; ++u)
    if (num[static_cast<std::size_t>(u)] < 0) dfs(u);
  return comp;
}

}  // namespace

std::map<std::string, std::int64_t> insert_crossing_registers(
    const SlotAssignment& s, const TaskGraph& g, const std::vector<NetLink>& links,
    int stages_per_crossing, double frequency_hz) {
  std::map<std::string, const NetLink*> link_of;  // keyed by net edge id
  for (const auto& l : links) link_of[l.edge_id + ".net"] = &l;

  std::map<std::string, std::int64_t> latency;
  for (const auto& e : g.edges()) {
    auto it = link_of.find(e.id);
    if (it != link_of.end()) {
      latency[e.id] = ns_to_cycles(it->second->latency_ns, frequency_hz);
      continue;
    }
    const auto& pu = s.mapping.at(e.src);
    const auto& pv = s.mapping.at(e.dst);
    if (pu.device != pv.device) {
      // A device crossing outside the link table: keep it conservative.
      latency[e.id] = stages_per_crossing;
      continue;
    }
    int crossings = std::abs(pu.row - pv.row) + std::abs(pu.col - pv.col);
    latency[e.id] = static_cast<std::int64_t>(stages_per_crossing) * crossings;
  }
  return latency;
}

std::map<std::string, std::int64_t> balance_reconvergent(
    const TaskGraph& g, const std::map<std::string, std::int64_t>& edge_latency) {
  const int n = static_cast<int>(g.vertices().size());
  std::vector<int> comp = scc_of(g);
  int comps = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;

  auto lat_of = [&](const FifoEdge& e) -> std::int64_t {
    auto it = edge_latency.find(e.id);
    return it == edge_latency.end() ? 0 : it->second;
  };

  // Deadlock screen: inside each non-trivial component, a cycle whose added
  // latency exceeds its FIFO depth can stall forever. Positive-cycle
  // detection on weight (latency - depth) finds exactly those.
  std::vector<std::vector<std::size_t>> comp_edges(static_cast<std::size_t>(comps));
  std::vector<int> comp_size(static_cast<std::size_t>(comps), 0);
  for (int v = 0; v < n; ++v) ++comp_size[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])];
  for (std::size_t ei = 0; ei < g.edges().size(); ++ei) {
    const auto& e = g.edges()[ei];
    int cu = comp[g.vertex_index(e.src)];
    int cv = comp[g.vertex_index(e.dst)];
    if (cu == cv) comp_edges[static_cast<std::size_t>(cu)].push_back(ei);
  }
  for (int c = 0; c < comps; ++c) {
    if (comp_size[static_cast<std::size_t>(c)] < 2) continue;
    // Bellman-Ford style longest-path relaxation; a relaxation that still
    // succeeds after |V_c| rounds witnesses a positive cycle.
    std::map<int, std::int64_t> dist;
    for (int v = 0; v < n; ++v)
      if (comp[static_cast<std::size_t>(v)] == c) dist[v] = 0;
    bool relaxed = true;
    for (int round = 0; round <= comp_size[static_cast<std::size_t>(c)] && relaxed; ++round) {
      relaxed = false;
      for (std::size_t ei : comp_edges[static_cast<std::size_t>(c)]) {
        const auto& e = g.edges()[ei];
        std::int64_t w = lat_of(e) - e.depth_tokens;
        int u = static_cast<int>(g.vertex_index(e.src));
        int v = static_cast<int>(g.vertex_index(e.dst));
        if (dist[u] + w > dist[v]) {
          dist[v] = dist[u] + w;
          relaxed = true;
        }
      }
    }
    if (relaxed) {
      std::string witness;
      for (int v = 0; v < n && witness.size() < 96; ++v)
        if (comp[static_cast<std::size_t>(v)] == c)
          witness += (witness.empty() ? "" : ", ") + g.vertices()[static_cast<std::size_t>(v)].id;
      throw DeadlockError(
          "cycle through {" + witness +
          "} adds more pipeline latency than its total FIFO depth");
    }
  }

  // Longest arrival time per component over the condensation, then slack per
  // cross-component edge. Components are emitted by Tarjan in reverse
  // topological order, so iterating comps-1 .. 0 visits sources first.
  std::vector<std::int64_t> level(static_cast<std::size_t>(comps), 0);
  std::vector<std::vector<std::size_t>> in_cross(static_cast<std::size_t>(comps));
  for (std::size_t ei = 0; ei < g.edges().size(); ++ei) {
    const auto& e = g.edges()[ei];
    int cu = comp[g.vertex_index(e.src)];
    int cv = comp[g.vertex_index(e.dst)];
    if (cu != cv) in_cross[static_cast<std::size_t>(cv)].push_back(ei);
  }
  for (int c = comps - 1; c >= 0; --c)
    for (std::size_t ei : in_cross[static_cast<std::size_t>(c)]) {
      const auto& e = g.edges()[ei];
      int cu = comp[g.vertex_index(e.src)];
      level[static_cast<std::size_t>(c)] = std::max(
          level[static_cast<std::size_t>(c)], level[static_cast<std::size_t>(cu)] + lat_of(e));
    }

  std::map<std::string, std::int64_t> extra;
  for (const auto& e : g.edges()) {
    int cu = comp[g.vertex_index(e.src)];
    int cv = comp[g.vertex_index(e.dst)];
    if (cu == cv) {
      extra[e.id] = 0;
      continue;
    }
    extra[e.id] = level[static_cast<std::size_t>(cv)] -
                  (level[static_cast<std::size_t>(cu)] + lat_of(e));
  }
  return extra;
}

PipelinedDesign pipeline_design(const TaskGraph& g, const InterAssignment& a,
                                const SlotAssignment& s,
                                const std::vector<NetLink>& links,
                                int stages_per_crossing, double frequency_hz) {
  PipelinedDesign d;
  d.graph = g;
  d.placement = a;
  d.slots = s;
  d.links = links;
  d.stages_per_crossing = stages_per_crossing;
  d.edge_latency =
      insert_crossing_registers(s, g, links, stages_per_crossing, frequency_hz);
  d.balancing_fifos = balance_reconvergent(g, d.edge_latency);
  return d;
}

}  // namespace flowplan
