// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/inter_partition.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

bool devices_homogeneous(const std::vector<ResourceVec>& limits) {
  for (std::size_t i = 1; i < limits.size(); ++i)
    if (!(limits[i] == limits[0])) return false;
  return true;
}

}  // namespace

std::size_t IlpProblem::num_x_vars() const {
  return vertex_ids.size() * static_cast<std::size_t>(device_count);
}

std::size_t IlpProblem::num_y_vars() const {
  std::size_t pairs = 0;
  for (int a = 0; a < device_count; ++a)
    for (int b = 0; b < device_count; ++b)
      if (pair_cost_tenths[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] > 0)
        ++pairs;
  return edge_terms.size() * pairs;
}

std::size_t IlpProblem::capacity_rows() const {
  return static_cast<std::size_t>(device_count) * ResourceVec::kClasses;
}

std::string IlpProblem::to_lp_format() const {
  std::ostringstream lp;
  lp << "Minimize\n obj:";
  bool first = true;
  for (std::size_t e = 0; e < edge_terms.size(); ++e) {
    for (int a = 0; a < device_count; ++a)
      for (int b = 0; b < device_count; ++b) {
        std::int64_t c = pair_cost_tenths[static_cast<std::size_t>(a)]
                                         [static_cast<std::size_t>(b)];
        if (c <= 0) continue;
        std::int64_t coeff = edge_terms[e].width * c;  // tenths
        char buf[64];
        std::snprintf(buf, sizeof buf, " %s%lld.%lld y_e%zu_%d_%d",
                      first ? "" : "+ ",
                      static_cast<long long>(coeff / 10),
                      static_cast<long long>(coeff % 10), e, a, b);
        lp << buf;
        first = false;
      }
  }
  if (first) lp << " 0 x_v0_d0";
  lp << "\nSubject To\n";
  for (std::size_t v = 0; v < vertex_ids.size(); ++v) {
    lp << " assign_v" << v << ":";
    for (int d = 0; d < device_count; ++d)
      lp << (d ? " + " : " ") << "x_v" << v << "_d" << d;
    lp << " = 1\n";
  }
  for (int d = 0; d < device_count; ++d)
    for (int r = 0; r < ResourceVec::kClasses; ++r) {
      lp << " cap_d" << d << "_" << resource_class_name(r) << ":";
      bool any = false;
      for (std::size_t v = 0; v < vertex_ids.size(); ++v) {
        std::int64_t a = areas[v].component(r);
        if (a == 0) continue;
        lp << (any ? " + " : " ") << a << " x_v" << v << "_d" << d;
        any = true;
      }
      if (!any) lp << " 0 x_v0_d" << d;
      lp << " <= " << device_limits[static_cast<std::size_t>(d)].component(r) << "\n";
    }
  for (std::size_t e = 0; e < edge_terms.size(); ++e)
    for (int a = 0; a < device_count; ++a)
      for (int b = 0; b < device_count; ++b) {
        if (pair_cost_tenths[static_cast<std::size_t>(a)]
                            [static_cast<std::size_t>(b)] <= 0)
          continue;
        lp << " lin_e" << e << "_" << a << "_" << b << ": y_e" << e << "_" << a
           << "_" << b << " - x_v" << edge_terms[e].u << "_d" << a << " - x_v"
           << edge_terms[e].v << "_d" << b << " >= -1\n";
      }
  if (pin_first_vertex && !vertex_ids.empty())
    lp << " pin: x_v0_d0 = 1\n";
  lp << "Binary\n";
  for (std::size_t v = 0; v < vertex_ids.size(); ++v)
    for (int d = 0; d < device_count; ++d) lp << " x_v" << v << "_d" << d << "\n";
  for (std::size_t e = 0; e < edge_terms.size(); ++e)
    for (int a = 0; a < device_count; ++a)
      for (int b = 0; b < device_count; ++b)
        if (pair_cost_tenths[static_cast<std::size_t>(a)]
                            [static_cast<std::size_t>(b)] > 0)
          lp << " y_e" << e << "_" << a << "_" << b << "\n";
  lp << "End\n";
  return lp.str();
}

ClusterSpec with_network_overhead(const ClusterSpec& cluster) {
  ClusterSpec out = cluster;
  for (auto& d : out.devices)
    d = apply_network_overhead(d, ports_required(cluster.topology, d.id));
  return out;
}

IlpProblem formulate(const TaskGraph& g, const ClusterSpec& cluster) {
  IlpProblem p;
  p.device_count = static_cast<int>(cluster.devices.size());
  for (const auto& v : g.vertices()) p.vertex_ids.push_back(v.id);
  std::sort(p.vertex_ids.begin(), p.vertex_ids.end());
  p.areas.reserve(p.vertex_ids.size());
  for (const auto& id : p.vertex_ids) p.areas.push_back(g.vertex(id).area);
  for (const auto& d : cluster.devices)
    p.device_limits.push_back(d.thresholded_capacity());

  std::map<std::string, int> rank;
  for (std::size_t i = 0; i < p.vertex_ids.size(); ++i)
    rank[p.vertex_ids[i]] = static_cast<int>(i);
  for (const auto& e : g.edges())
    p.edge_terms.push_back({rank[e.src], rank[e.dst], e.width_bits});

  const auto D = static_cast<std::size_t>(p.device_count);
  p.pair_cost_tenths.assign(D, std::vector<std::int64_t>(D, 0));
  FifoEdge unit;
  unit.width_bits = 1;
  for (int a = 0; a < p.device_count; ++a)
    for (int b = 0; b < p.device_count; ++b)
      p.pair_cost_tenths[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          comm_cost_tenths(unit, a, b, cluster);

  // A vertex that fits nowhere can never be assigned.
  for (std::size_t v = 0; v < p.vertex_ids.size(); ++v) {
    bool fits = false;
    for (const auto& lim : p.device_limits)
      if (p.areas[v].fits_within(lim)) {
        fits = true;
        break;
      }
    if (!fits)
      throw InfeasibleError("vertex " + p.vertex_ids[v] +
                            " exceeds every device's thresholded capacity");
  }

  p.pin_first_vertex = (cluster.topology.kind == TopologyKind::kRing ||
                        cluster.topology.kind == TopologyKind::kHypercube) &&
                       devices_homogeneous(p.device_limits);
  return p;
}

namespace {

struct Adjacency {
  // Per vertex rank: (neighbor rank, width) with parallel edges merged.
  std::vector<std::vector<std::pair<int, std::int64_t>>> nbr;

  explicit Adjacency(const IlpProblem& p) {
    nbr.resize(p.vertex_ids.size());
    std::map<std::pair<int, int>, std::int64_t> acc;
    for (const auto& e : p.edge_terms) {
      if (e.u == e.v) continue;
      auto key = std::minmax(e.u, e.v);
      acc[{key.first, key.second}] += e.width;
    }
    for (const auto& [k, w] : acc) {
      nbr[static_cast<std::size_t>(k.first)].push_back({k.second, w});
      nbr[static_cast<std::size_t>(k.second)].push_back({k.first, w});
    }
  }
};

// Connectivity-first search order: breadth-first from the vertex with the
// heaviest incident width, so every expanded vertex (after a component root)
// touches the assigned region and mismatches charge the bound immediately.
std::vector<int> search_order(const IlpProblem& p, const Adjacency& adj) {
  const int n = static_cast<int>(p.vertex_ids.size());
  std::vector<std::int64_t> incident(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    for (auto [w, width] : adj.nbr[static_cast<std::size_t>(v)]) incident[static_cast<std::size_t>(v)] += width;
  std::vector<int> order;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  while (static_cast<int>(order.size()) < n) {
    int root = -1;
    for (int v = 0; v < n; ++v)
      if (!seen[static_cast<std::size_t>(v)] &&
          (root < 0 || incident[static_cast<std::size_t>(v)] >
                           incident[static_cast<std::size_t>(root)]))
        root = v;
    std::deque<int> q{root};
    seen[static_cast<std::size_t>(root)] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      order.push_back(u);
      std::vector<std::pair<std::int64_t, int>> next;
      for (auto [w, width] : adj.nbr[static_cast<std::size_t>(u)])
        if (!seen[static_cast<std::size_t>(w)]) next.push_back({-width, w});
      std::sort(next.begin(), next.end());
      for (auto [negw, w] : next) {
        seen[static_cast<std::size_t>(w)] = true;
        q.push_back(w);
      }
    }
  }
  return order;
}

struct SearchNode {
  std::int64_t bound = 0;
  std::int64_t committed = 0;
  int depth = 0;  // vertices assigned, in search order
  std::vector<std::int8_t> assign;
  std::vector<ResourceVec> used;
  ResourceVec remaining_area;  // area of still-unassigned vertices
};

struct NodeOrder {
  bool operator()(const SearchNode& a, const SearchNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;       // min bound first
    if (a.depth != b.depth) return a.depth < b.depth;       // deeper first
    return a.assign > b.assign;                             // lexicographic
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const IlpProblem& p, double time_limit)
      : p_(p),
        adj_(p),
        order_(search_order(p, adj_)),
        n_(static_cast<int>(p.vertex_ids.size())),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(time_limit))) {
    total_area_ = ResourceVec{};
    for (const auto& a : p.areas) total_area_ += a;
    total_limit_ = ResourceVec{};
    for (const auto& l : p.device_limits) total_limit_ += l;
  }

  InterAssignment run() {
    seed_incumbent();
    std::priority_queue<SearchNode, std::vector<SearchNode>, NodeOrder> open;
    open.push(root());
    bool timed_out = false;
    std::size_t ticks = 0;
    while (!open.empty()) {
      if ((++ticks & 0x3ff) == 0 &&
          std::chrono::steady_clock::now() > deadline_) {
        timed_out = true;
        break;
      }
      SearchNode node = open.top();
      open.pop();
      if (has_incumbent_ && node.bound > best_cost_) continue;
      if (node.depth == n_) {
        offer(node.assign, node.committed);
        continue;
      }
      expand(node, open);
    }
    if (!has_incumbent_) {
      if (timed_out)
        throw Error("time limit reached before any feasible assignment was found");
      throw InfeasibleError(infeasibility_witness());
    }
    return package(!timed_out);
  }

 private:
  SearchNode root() {
    SearchNode r;
    r.assign.assign(static_cast<std::size_t>(n_), -1);
    r.used.assign(static_cast<std::size_t>(p_.device_count), ResourceVec{});
    r.remaining_area = total_area_;
    r.bound = 0;
    return r;
  }

  // Greedy warm start: cheapest feasible device per vertex in search order.
  void seed_incumbent() {
    SearchNode node = root();
    for (int k = 0; k < n_; ++k) {
      int u = order_[static_cast<std::size_t>(k)];
      int best_d = -1;
      std::int64_t best_delta = kInf;
      for (int d = 0; d < device_options(u); ++d) {
        if (!fits(node, u, d)) continue;
        std::int64_t delta = attach_cost(node, u, d);
        if (delta < best_delta) {
          best_delta = delta;
          best_d = d;
        }
      }
      if (best_d < 0) return;  // greedy failed; search still runs
      apply(node, u, best_d);
    }
    offer(node.assign, node.committed);
  }

  int device_options(int u) const {
    return (p_.pin_first_vertex && u == 0) ? 1 : p_.device_count;
  }

  bool fits(const SearchNode& node, int u, int d) const {
    ResourceVec next = node.used[static_cast<std::size_t>(d)] +
                       p_.areas[static_cast<std::size_t>(u)];
    return next.fits_within(p_.device_limits[static_cast<std::size_t>(d)]);
  }

  std::int64_t attach_cost(const SearchNode& node, int u, int d) const {
    std::int64_t delta = 0;
    for (auto [w, width] : adj_.nbr[static_cast<std::size_t>(u)]) {
      int wd = node.assign[static_cast<std::size_t>(w)];
      if (wd >= 0)
        delta += width * p_.pair_cost_tenths[static_cast<std::size_t>(d)]
                                            [static_cast<std::size_t>(wd)];
    }
    return delta;
  }

  void apply(SearchNode& node, int u, int d) const {
    node.committed += attach_cost(node, u, d);
    node.assign[static_cast<std::size_t>(u)] = static_cast<std::int8_t>(d);
    node.used[static_cast<std::size_t>(d)] += p_.areas[static_cast<std::size_t>(u)];
    node.remaining_area -= p_.areas[static_cast<std::size_t>(u)];
    ++node.depth;
  }

  // committed cost + sum over frontier vertices of the cheapest way to join
  // the assigned region, with devices that cannot take the vertex excluded.
  // Also rejects nodes whose leftover area cannot fit in leftover capacity.
  std::int64_t lower_bound(const SearchNode& node) const {
    ResourceVec remaining_cap;
    for (int d = 0; d < p_.device_count; ++d)
      remaining_cap += p_.device_limits[static_cast<std::size_t>(d)] -
                       node.used[static_cast<std::size_t>(d)];
    if (!node.remaining_area.fits_within(remaining_cap)) return kInf;

    std::int64_t relax = 0;
    for (int k = node.depth; k < n_; ++k) {
      int v = order_[static_cast<std::size_t>(k)];
      bool touches = false;
      for (auto [w, width] : adj_.nbr[static_cast<std::size_t>(v)])
        if (node.assign[static_cast<std::size_t>(w)] >= 0) {
          touches = true;
          break;
        }
      std::int64_t best = touches ? kInf : 0;
      if (touches) {
        for (int d = 0; d < device_options(v); ++d) {
          if (!fits(node, v, d)) continue;
          best = std::min(best, attach_cost(node, v, d));
          if (best == 0) break;
        }
        if (best == kInf) return kInf;  // vertex fits nowhere anymore
      }
      relax += best;
    }
    return node.committed + relax;
  }

  void expand(const SearchNode& node,
              std::priority_queue<SearchNode, std::vector<SearchNode>, NodeOrder>& open) {
    int u = order_[static_cast<std::size_t>(node.depth)];
    for (int d = 0; d < device_options(u); ++d) {
      if (!fits(node, u, d)) continue;
      SearchNode child = node;
      apply(child, u, d);
      child.bound = lower_bound(child);
      if (child.bound >= kInf) continue;
      if (has_incumbent_ && child.bound > best_cost_) continue;
      if (child.depth == n_) {
        offer(child.assign, child.committed);
        continue;
      }
      open.push(std::move(child));
    }
  }

  void offer(const std::vector<std::int8_t>& assign, std::int64_t cost) {
    if (!has_incumbent_ || cost < best_cost_ ||
        (cost == best_cost_ && assign < best_assign_)) {
      has_incumbent_ = true;
      best_cost_ = cost;
      best_assign_ = assign;
    }
  }

  std::string infeasibility_witness() const {
    // Name the tightest capacity row: the resource class whose total demand
    // overshoots the cluster-wide budget the most, else the first vertex
    // that cannot be packed.
    for (int r = 0; r < ResourceVec::kClasses; ++r)
      if (total_area_.component(r) > total_limit_.component(r))
        return std::string("infeasible: total ") + resource_class_name(r) +
               " demand " + std::to_string(total_area_.component(r)) +
               " exceeds cluster budget " +
               std::to_string(total_limit_.component(r));
    return "infeasible: no assignment satisfies the per-device capacity rows";
  }

  InterAssignment package(bool certified) const {
    InterAssignment a;
    a.feasible = true;
    a.certified = certified;
    a.objective_tenths = best_cost_;
    for (int v = 0; v < n_; ++v) {
      int d = best_assign_[static_cast<std::size_t>(v)];
      a.mapping[p_.vertex_ids[static_cast<std::size_t>(v)]] = d;
      a.per_device_area[d] += p_.areas[static_cast<std::size_t>(v)];
    }
    for (int d = 0; d < p_.device_count; ++d) a.per_device_area.try_emplace(d);
    return a;
  }

  const IlpProblem& p_;
  Adjacency adj_;
  std::vector<int> order_;
  int n_;
  std::chrono::steady_clock::time_point deadline_;
  ResourceVec total_area_, total_limit_;
  bool has_incumbent_ = false;
  std::int64_t best_cost_ = kInf;
  std::vector<std::int8_t> best_assign_;
};

}  // namespace

InterAssignment solve(const IlpProblem& p, double time_limit_seconds) {
  if (p.vertex_ids.empty()) {
    InterAssignment a;
    a.feasible = true;
    a.certified = true;
    return a;
  }
  return BranchAndBound(p, time_limit_seconds).run();
}

InterAssignment brute_force_oracle(const TaskGraph& g, const ClusterSpec& cluster) {
  const int n = static_cast<int>(g.vertices().size());
  const int D = static_cast<int>(cluster.devices.size());
  if (n > 14 || D > 4)
    throw SizeError("oracle instance too large: |V|=" + std::to_string(n) +
                    ", devices=" + std::to_string(D));

  std::vector<std::string> ids;
  for (const auto& v : g.vertices()) ids.push_back(v.id);
  std::sort(ids.begin(), ids.end());
  std::vector<ResourceVec> areas;
  for (const auto& id : ids) areas.push_back(g.vertex(id).area);
  std::vector<ResourceVec> limits;
  for (const auto& d : cluster.devices) limits.push_back(d.thresholded_capacity());

  std::map<std::string, int> rank;
  for (std::size_t i = 0; i < ids.size(); ++i) rank[ids[i]] = static_cast<int>(i);
  // Edges grouped by the later-ranked endpoint so cost accrues incrementally.
  std::vector<std::vector<std::pair<int, std::int64_t>>> attached(
      static_cast<std::size_t>(n));
  FifoEdge unit;
  unit.width_bits = 1;
  std::vector<std::vector<std::int64_t>> pc(
      static_cast<std::size_t>(D), std::vector<std::int64_t>(static_cast<std::size_t>(D)));
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      pc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          comm_cost_tenths(unit, a, b, cluster);
  for (const auto& e : g.edges()) {
    int u = rank[e.src], v = rank[e.dst];
    if (u == v) continue;
    attached[static_cast<std::size_t>(std::max(u, v))].push_back(
        {std::min(u, v), e.width_bits});
  }

  std::vector<std::int8_t> assign(static_cast<std::size_t>(n), -1);
  std::vector<ResourceVec> used(static_cast<std::size_t>(D));
  std::vector<std::int8_t> best;
  std::int64_t best_cost = kInf;

  // Depth-first enumeration in rank-major, device-minor order: the first
  // strictly-better assignment found is the lexicographically-least optimum.
  auto recurse = [&](auto&& self, int k, std::int64_t cost) -> void {
    if (k == n) {
      if (cost < best_cost) {
        best_cost = cost;
        best = assign;
      }
      return;
    }
    for (int d = 0; d < D; ++d) {
      ResourceVec next = used[static_cast<std::size_t>(d)] + areas[static_cast<std::size_t>(k)];
      if (!next.fits_within(limits[static_cast<std::size_t>(d)])) continue;
      std::int64_t add = 0;
      for (auto [w, width] : attached[static_cast<std::size_t>(k)])
        add += width * pc[static_cast<std::size_t>(d)]
                         [static_cast<std::size_t>(assign[static_cast<std::size_t>(w)])];
      if (cost + add >= best_cost) continue;  // cannot strictly improve
      assign[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(d);
      used[static_cast<std::size_t>(d)] = next;
      self(self, k + 1, cost + add);
      used[static_cast<std::size_t>(d)] -= areas[static_cast<std::size_t>(k)];
      assign[static_cast<std::size_t>(k)] = -1;
    }
  };
  recurse(recurse, 0, 0);

  if (best.empty() && n > 0)
    throw InfeasibleError("infeasible: no assignment satisfies the capacity rows");
  InterAssignment a;
  a.feasible = true;
  a.certified = true;
  a.objective_tenths = n == 0 ? 0 : best_cost;
  for (int v = 0; v < n; ++v) {
    int d = best[static_cast<std::size_t>(v)];
    a.mapping[ids[static_cast<std::size_t>(v)]] = d;
    a.per_device_area[d] += areas[static_cast<std::size_t>(v)];
  }
  for (int d = 0; d < D; ++d) a.per_device_area.try_emplace(d);
  return a;
}

bool verify_assignment(const TaskGraph& g, const ClusterSpec& cluster,
                       const std::map<std::string, int>& mapping,
                       std::string* violation) {
  std::map<int, ResourceVec> used;
  for (const auto& v : g.vertices()) {
    auto it = mapping.find(v.id);
    if (it == mapping.end()) {
      if (violation) *violation = "vertex " + v.id + " is unassigned";
      return false;
    }
    used[it->second] += v.area;
  }
  for (const auto& [d, area] : used) {
    if (d < 0 || d >= static_cast<int>(cluster.devices.size())) {
      if (violation) *violation = "device index out of range";
      return false;
    }
    ResourceVec limit = cluster.devices[static_cast<std::size_t>(d)].thresholded_capacity();
    for (int r = 0; r < ResourceVec::kClasses; ++r)
      if (area.component(r) > limit.component(r)) {
        if (violation)
          *violation = "device " + std::to_string(d) + " over " +
                       resource_class_name(r) + ": " +
                       std::to_string(area.component(r)) + " > " +
                       std::to_string(limit.component(r));
        return false;
      }
  }
  return true;
}

std::int64_t assignment_cost_tenths(const TaskGraph& g, const ClusterSpec& cluster,
                                    const std::map<std::string, int>& mapping) {
  std::int64_t cost = 0;
  for (const auto& e : g.edges())
    cost += comm_cost_tenths(e, mapping.at(e.src), mapping.at(e.dst), cluster);
  return cost;
}

}  // namespace flowplan
