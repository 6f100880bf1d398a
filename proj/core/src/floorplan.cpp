// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/floorplan.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <queue>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

struct Region {
  int r0, r1, c0, c1;  // inclusive slot ranges
  int rows() const { return r1 - r0 + 1; }
  int cols() const { return c1 - c0 + 1; }
  int slots() const { return rows() * cols(); }
  std::pair<int, int> center() const { return {(r0 + r1) / 2, (c0 + c1) / 2}; }
  std::string to_string() const {
    return "rows " + std::to_string(r0) + ".." + std::to_string(r1) + " cols " +
           std::to_string(c0) + ".." + std::to_string(c1);
  }
};

int manhattan(std::pair<int, int> a, std::pair<int, int> b) {
  return std::abs(a.first - b.first) + std::abs(a.second - b.second);
}

// Slot vertices gravitate to when their counterpart sits on another device:
// the corner opposite the HBM row, column 0, where the network ports come up.
std::pair<int, int> port_slot(const DeviceSpec& d) {
  return {d.hbm_row == 0 ? d.slot_rows - 1 : 0, 0};
}

ResourceVec region_limit(const DeviceSpec& d, const Region& r) {
  ResourceVec sum;
  for (int rr = r.r0; rr <= r.r1; ++rr)
    for (int cc = r.c0; cc <= r.c1; ++cc)
      sum += d.slot_capacity_at(rr, cc).scaled_ppm(d.threshold_ppm);
  return sum;
}

// Everything floorplan_device needs about one device's slice of the graph.
struct DeviceView {
  std::vector<std::string> ids;  // sorted
  std::vector<ResourceVec> areas;
  std::vector<std::vector<std::pair<int, std::int64_t>>> nbr;  // local adjacency
  // Static pull toward the network-port slot: total width of edges whose
  // other endpoint lives on a different device.
  std::vector<std::int64_t> offdev_width;

  DeviceView(const TaskGraph& g, const InterAssignment& a, int device) {
    for (const auto& v : g.vertices())
      if (a.mapping.at(v.id) == device) ids.push_back(v.id);
    std::sort(ids.begin(), ids.end());
    std::map<std::string, int> local;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      local[ids[i]] = static_cast<int>(i);
      areas.push_back(g.vertex(ids[i]).area);
    }
    nbr.resize(ids.size());
    offdev_width.assign(ids.size(), 0);
    std::map<std::pair<int, int>, std::int64_t> acc;
    for (const auto& e : g.edges()) {
      auto su = local.find(e.src);
      auto sv = local.find(e.dst);
      if (su != local.end() && sv != local.end()) {
        if (su->second == sv->second) continue;
        auto key = std::minmax(su->second, sv->second);
        acc[{key.first, key.second}] += e.width_bits;
      } else if (su != local.end()) {
        offdev_width[static_cast<std::size_t>(su->second)] += e.width_bits;
      } else if (sv != local.end()) {
        offdev_width[static_cast<std::size_t>(sv->second)] += e.width_bits;
      }
    }
    for (const auto& [k, w] : acc) {
      nbr[static_cast<std::size_t>(k.first)].push_back({k.second, w});
      nbr[static_cast<std::size_t>(k.second)].push_back({k.first, w});
    }
  }
};

// Width-first search order inside a region, mirroring the inter-device
// solver: every expanded vertex touches the already-assigned set.
std::vector<int> split_order(const std::vector<int>& verts, const DeviceView& view) {
  std::vector<std::int64_t> incident(verts.size(), 0);
  std::map<int, int> pos;
  for (std::size_t i = 0; i < verts.size(); ++i) pos[verts[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < verts.size(); ++i)
    for (auto [w, width] : view.nbr[static_cast<std::size_t>(verts[i])])
      if (pos.count(w)) incident[i] += width;
  std::vector<int> order;
  std::vector<bool> seen(verts.size(), false);
  while (order.size() < verts.size()) {
    int root = -1;
    for (std::size_t i = 0; i < verts.size(); ++i)
      if (!seen[i] && (root < 0 || incident[i] > incident[static_cast<std::size_t>(root)]))
        root = static_cast<int>(i);
    std::deque<int> q{root};
    seen[static_cast<std::size_t>(root)] = true;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      order.push_back(u);
      std::vector<std::pair<std::int64_t, int>> next;
      for (auto [w, width] : view.nbr[static_cast<std::size_t>(verts[static_cast<std::size_t>(u)])]) {
        auto it = pos.find(w);
        if (it != pos.end() && !seen[static_cast<std::size_t>(it->second)])
          next.push_back({-width, it->second});
      }
      std::sort(next.begin(), next.end());
      for (auto [negw, i] : next) {
        seen[static_cast<std::size_t>(i)] = true;
        q.push_back(i);
      }
    }
  }
  return order;
}

// Exact two-way split of `verts` between the halves A and B. `ext` carries
// the terminal-propagation cost of each vertex on each side. Returns the
// side per local position in `verts`, or empty when infeasible.
struct SplitResult {
  std::vector<std::int8_t> side;
  bool certified = true;
  bool feasible = false;
};

SplitResult two_way_split(const std::vector<int>& verts, const DeviceView& view,
                          const std::vector<std::array<std::int64_t, 2>>& ext,
                          std::int64_t cut_unit, const ResourceVec lim[2],
                          std::size_t node_budget = 2'000'000) {
  const int n = static_cast<int>(verts.size());
  std::map<int, int> pos;
  for (int i = 0; i < n; ++i) pos[verts[static_cast<std::size_t>(i)]] = i;
  // local adjacency restricted to the region
  std::vector<std::vector<std::pair<int, std::int64_t>>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (auto [w, width] : view.nbr[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])]) {
      auto it = pos.find(w);
      if (it != pos.end()) adj[static_cast<std::size_t>(i)].push_back({it->second, width});
    }
  std::vector<int> order = split_order(verts, view);

  struct Node {
    std::int64_t bound = 0, committed = 0;
    int depth = 0;
    std::vector<std::int8_t> side;
    ResourceVec used[2];
    ResourceVec remaining;
  };
  ResourceVec total;
  for (int v : verts) total += view.areas[static_cast<std::size_t>(v)];

  auto attach = [&](const Node& nd, int i, int s) {
    std::int64_t c = ext[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
    for (auto [j, width] : adj[static_cast<std::size_t>(i)]) {
      int js = nd.side[static_cast<std::size_t>(j)];
      if (js >= 0 && js != s) c += width * cut_unit;
    }
    return c;
  };
  auto fits = [&](const Node& nd, int i, int s) {
    ResourceVec next = nd.used[s] + view.areas[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])];
    return next.fits_within(lim[s]);
  };
  auto bound_of = [&](const Node& nd) -> std::int64_t {
    ResourceVec room = (lim[0] - nd.used[0]) + (lim[1] - nd.used[1]);
    if (!nd.remaining.fits_within(room)) return kInf;
    std::int64_t relax = 0;
    for (int k = nd.depth; k < n; ++k) {
      int i = order[static_cast<std::size_t>(k)];
      std::int64_t best = kInf;
      for (int s = 0; s < 2; ++s) {
        if (!fits(nd, i, s)) continue;
        best = std::min(best, attach(nd, i, s));
      }
      if (best == kInf) return kInf;
      relax += best;
    }
    return nd.committed + relax;
  };
  auto apply = [&](Node& nd, int i, int s) {
    nd.committed += attach(nd, i, s);
    nd.side[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(s);
    nd.used[s] += view.areas[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])];
    nd.remaining -= view.areas[static_cast<std::size_t>(verts[static_cast<std::size_t>(i)])];
    ++nd.depth;
  };

  Node root;
  root.side.assign(static_cast<std::size_t>(n), -1);
  root.remaining = total;

  SplitResult result;
  std::int64_t best_cost = kInf;
  std::vector<std::int8_t> best;
  auto offer = [&](const std::vector<std::int8_t>& side, std::int64_t cost) {
    if (cost < best_cost || (cost == best_cost && side < best)) {
      best_cost = cost;
      best = side;
      result.feasible = true;
    }
  };

  // Greedy warm start.
  {
    Node nd = root;
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      int i = order[static_cast<std::size_t>(k)];
      int pick = -1;
      std::int64_t pick_cost = kInf;
      for (int s = 0; s < 2; ++s) {
        if (!fits(nd, i, s)) continue;
        std::int64_t c = attach(nd, i, s);
        if (c < pick_cost) {
          pick_cost = c;
          pick = s;
        }
      }
      if (pick < 0)
        ok = false;
      else
        apply(nd, i, pick);
    }
    if (ok) offer(nd.side, nd.committed);
  }

  struct Cmp {
    bool operator()(const Node& a, const Node& b) const {
      if (a.bound != b.bound) return a.bound > b.bound;
      if (a.depth != b.depth) return a.depth < b.depth;
      return a.side > b.side;
    }
  };
  std::priority_queue<Node, std::vector<Node>, Cmp> open;
  open.push(root);
  std::size_t expanded = 0;
  while (!open.empty()) {
    if (++expanded > node_budget) {
      result.certified = false;
      break;
    }
    Node nd = open.top();
    open.pop();
    if (result.feasible && nd.bound > best_cost) continue;
    if (nd.depth == n) {
      offer(nd.side, nd.committed);
      continue;
    }
    int i = order[static_cast<std::size_t>(nd.depth)];
    for (int s = 0; s < 2; ++s) {
      if (!fits(nd, i, s)) continue;
      Node child = nd;
      apply(child, i, s);
      child.bound = bound_of(child);
      if (child.bound >= kInf) continue;
      if (result.feasible && child.bound > best_cost) continue;
      if (child.depth == n)
        offer(child.side, child.committed);
      else
        open.push(std::move(child));
    }
  }
  result.side = best;
  return result;
}

struct PlanState {
  std::vector<std::optional<std::pair<int, int>>> fixed;  // local -> slot
  std::vector<Region> region_of;                          // local -> region
  bool certified = true;
};

std::pair<int, int> position_of(const PlanState& st, int local) {
  if (st.fixed[static_cast<std::size_t>(local)])
    return *st.fixed[static_cast<std::size_t>(local)];
  return st.region_of[static_cast<std::size_t>(local)].center();
}

void recurse_region(const DeviceView& view, const DeviceSpec& dev,
                    const Region& region, const std::vector<int>& verts,
                    int depth_left, PlanState& st) {
  if (verts.empty()) return;
  const bool leaf = region.slots() == 1 || depth_left == 0;
  if (leaf) {
    // Past the configured depth a multi-slot region pins everything to its
    // low corner; with the default grids recursion always reaches singles.
    ResourceVec sum;
    for (int v : verts) sum += view.areas[static_cast<std::size_t>(v)];
    ResourceVec lim = region_limit(dev, region);
    for (int r = 0; r < ResourceVec::kClasses; ++r)
      if (sum.component(r) > lim.component(r))
        throw CapacityError("floorplan region " + region.to_string() +
                            " infeasible at threshold: " +
                            resource_class_name(r) + " needs " +
                            std::to_string(sum.component(r)) + " of " +
                            std::to_string(lim.component(r)));
    for (int v : verts) st.fixed[static_cast<std::size_t>(v)] = {region.r0, region.c0};
    return;
  }

  Region a = region, b = region;
  if (region.rows() >= region.cols()) {
    int ha = (region.rows() + 1) / 2;
    a.r1 = region.r0 + ha - 1;
    b.r0 = a.r1 + 1;
  } else {
    int wa = (region.cols() + 1) / 2;
    a.c1 = region.c0 + wa - 1;
    b.c0 = a.c1 + 1;
  }

  const std::pair<int, int> centers[2] = {a.center(), b.center()};
  const std::int64_t cut_unit = manhattan(centers[0], centers[1]);
  const auto port = port_slot(dev);
  std::vector<std::array<std::int64_t, 2>> ext(verts.size(), {0, 0});
  std::map<int, int> inside;
  for (std::size_t i = 0; i < verts.size(); ++i) inside[verts[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    int v = verts[i];
    for (int s = 0; s < 2; ++s)
      ext[i][static_cast<std::size_t>(s)] +=
          view.offdev_width[static_cast<std::size_t>(v)] * manhattan(centers[s], port);
    for (auto [w, width] : view.nbr[static_cast<std::size_t>(v)]) {
      if (inside.count(w)) continue;  // handled pairwise by the split
      auto pw = position_of(st, w);
      for (int s = 0; s < 2; ++s)
        ext[i][static_cast<std::size_t>(s)] += width * manhattan(centers[s], pw);
    }
  }

  ResourceVec lim[2] = {region_limit(dev, a), region_limit(dev, b)};
  SplitResult split = two_way_split(verts, view, ext, cut_unit, lim);
  if (!split.feasible) {
    // Name the scarcest class in this region to make the escalation useful.
    ResourceVec sum;
    for (int v : verts) sum += view.areas[static_cast<std::size_t>(v)];
    ResourceVec both = lim[0] + lim[1];
    int worst = 0;
    double worst_ratio = 0;
    for (int r = 0; r < ResourceVec::kClasses; ++r) {
      if (both.component(r) == 0) continue;
      double ratio = static_cast<double>(sum.component(r)) /
                     static_cast<double>(both.component(r));
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = r;
      }
    }
    throw CapacityError("floorplan region " + region.to_string() +
                        " infeasible at threshold: no two-way split fits (" +
                        resource_class_name(worst) + " is the tightest class)");
  }
  if (!split.certified) st.certified = false;

  std::vector<int> va, vb;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (split.side[i] == 0) {
      va.push_back(verts[i]);
      st.region_of[static_cast<std::size_t>(verts[i])] = a;
    } else {
      vb.push_back(verts[i]);
      st.region_of[static_cast<std::size_t>(verts[i])] = b;
    }
  }
  recurse_region(view, dev, a, va, depth_left - 1, st);
  recurse_region(view, dev, b, vb, depth_left - 1, st);
}

// Total objective used for oracle comparisons: intra-device manhattan cost
// plus the same terminal terms the recursion optimizes (off-device edges to
// the port slot). Fixed placements only.
std::int64_t placed_cost(const DeviceView& view, const DeviceSpec& dev,
                         const std::vector<std::pair<int, int>>& slot) {
  std::int64_t cost = 0;
  const auto port = port_slot(dev);
  for (std::size_t v = 0; v < view.ids.size(); ++v) {
    cost += view.offdev_width[v] * manhattan(slot[v], port);
    for (auto [w, width] : view.nbr[v])
      if (static_cast<int>(v) < w)
        cost += width * manhattan(slot[v], slot[static_cast<std::size_t>(w)]);
  }
  return cost;
}

}  // namespace

SlotAssignment floorplan_device(const TaskGraph& g, const InterAssignment& a,
                                const ClusterSpec& cluster, int device,
                                int max_depth) {
  const DeviceSpec& dev = cluster.device(device);
  DeviceView view(g, a, device);
  SlotAssignment out;
  out.objective[device] = 0;
  out.certified[device] = true;
  out.oracle_gap[device] = -1;
  out.per_slot_area[device];
  if (view.ids.empty()) return out;

  PlanState st;
  st.fixed.resize(view.ids.size());
  Region whole{0, dev.slot_rows - 1, 0, dev.slot_cols - 1};
  st.region_of.assign(view.ids.size(), whole);
  std::vector<int> all(view.ids.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  recurse_region(view, dev, whole, all, max_depth, st);

  std::vector<std::pair<int, int>> slot(view.ids.size());
  for (std::size_t i = 0; i < view.ids.size(); ++i) {
    slot[i] = *st.fixed[i];
    out.mapping[view.ids[i]] = {device, slot[i].first, slot[i].second};
    out.per_slot_area[device][slot[i]] += view.areas[i];
  }
  out.certified[device] = st.certified;
  out.objective[device] = manhattan_cost(out, g, device);

  // Flat-oracle gap, reported whenever the instance is small enough to
  // enumerate. Recursive bipartitioning is not globally optimal; the gap is
  // surfaced rather than hidden.
  if (view.ids.size() <= 8 && dev.num_slots() <= 6) {
    SlotAssignment oracle = flat_floorplan_oracle(g, a, cluster, device);
    std::vector<std::pair<int, int>> oslot(view.ids.size());
    for (std::size_t i = 0; i < view.ids.size(); ++i) {
      const auto& p = oracle.mapping.at(view.ids[i]);
      oslot[i] = {p.row, p.col};
    }
    out.oracle_gap[device] =
        placed_cost(view, dev, slot) - placed_cost(view, dev, oslot);
  }
  return out;
}

SlotAssignment floorplan_all(const TaskGraph& g, const InterAssignment& a,
                             const ClusterSpec& cluster, int max_depth,
                             bool parallel) {
  std::vector<int> devices;
  for (const auto& d : cluster.devices) devices.push_back(d.id);
  std::vector<SlotAssignment> parts(devices.size());
  if (parallel) {
    std::vector<std::future<SlotAssignment>> futs;
    for (int d : devices)
      futs.push_back(std::async(std::launch::async, [&, d] {
        return floorplan_device(g, a, cluster, d, max_depth);
      }));
    for (std::size_t i = 0; i < futs.size(); ++i) parts[i] = futs[i].get();
  } else {
    for (std::size_t i = 0; i < devices.size(); ++i)
      parts[i] = floorplan_device(g, a, cluster, devices[i], max_depth);
  }
  SlotAssignment merged;
  for (const auto& p : parts) {
    merged.mapping.insert(p.mapping.begin(), p.mapping.end());
    for (const auto& [d, m] : p.per_slot_area) merged.per_slot_area[d] = m;
    for (const auto& [d, o] : p.objective) merged.objective[d] = o;
    for (const auto& [d, c] : p.certified) merged.certified[d] = c;
    for (const auto& [d, gap] : p.oracle_gap) merged.oracle_gap[d] = gap;
  }
  return merged;
}

std::int64_t manhattan_cost(const SlotAssignment& s, const TaskGraph& g, int device) {
  std::int64_t cost = 0;
  for (const auto& e : g.edges()) {
    auto su = s.mapping.find(e.src);
    auto sv = s.mapping.find(e.dst);
    if (su == s.mapping.end() || sv == s.mapping.end()) continue;
    if (su->second.device != device || sv->second.device != device) continue;
    cost += static_cast<std::int64_t>(e.width_bits) *
            (std::abs(su->second.row - sv->second.row) +
             std::abs(su->second.col - sv->second.col));
  }
  return cost;
}

SlotAssignment flat_floorplan_oracle(const TaskGraph& g, const InterAssignment& a,
                                     const ClusterSpec& cluster, int device) {
  const DeviceSpec& dev = cluster.device(device);
  DeviceView view(g, a, device);
  const int n = static_cast<int>(view.ids.size());
  const int slots = dev.num_slots();
  double work = std::pow(static_cast<double>(slots), n);
  if (n > 10 || work > 2.5e8)
    throw SizeError("flat floorplan oracle instance too large");

  std::vector<ResourceVec> limits;
  std::vector<std::pair<int, int>> coords;
  for (int r = 0; r < dev.slot_rows; ++r)
    for (int c = 0; c < dev.slot_cols; ++c) {
      limits.push_back(dev.slot_capacity_at(r, c).scaled_ppm(dev.threshold_ppm));
      coords.push_back({r, c});
    }

  std::vector<int> pick(static_cast<std::size_t>(n), -1);
  std::vector<ResourceVec> used(static_cast<std::size_t>(slots));
  std::vector<int> best;
  std::int64_t best_cost = kInf;
  const auto port = port_slot(dev);

  auto recurse = [&](auto&& self, int k, std::int64_t cost) -> void {
    if (cost >= best_cost) return;
    if (k == n) {
      best_cost = cost;
      best = pick;
      return;
    }
    for (int s = 0; s < slots; ++s) {
      ResourceVec next = used[static_cast<std::size_t>(s)] + view.areas[static_cast<std::size_t>(k)];
      if (!next.fits_within(limits[static_cast<std::size_t>(s)])) continue;
      std::int64_t add =
          view.offdev_width[static_cast<std::size_t>(k)] *
          manhattan(coords[static_cast<std::size_t>(s)], port);
      for (auto [w, width] : view.nbr[static_cast<std::size_t>(k)])
        if (w < k)
          add += width * manhattan(coords[static_cast<std::size_t>(s)],
                                   coords[static_cast<std::size_t>(pick[static_cast<std::size_t>(w)])]);
      used[static_cast<std::size_t>(s)] = next;
      pick[static_cast<std::size_t>(k)] = s;
      self(self, k + 1, cost + add);
      pick[static_cast<std::size_t>(k)] = -1;
      used[static_cast<std::size_t>(s)] -= view.areas[static_cast<std::size_t>(k)];
    }
  };
  recurse(recurse, 0, 0);
  if (best.empty() && n > 0)
    throw CapacityError("flat floorplan oracle: no feasible slot assignment");

  SlotAssignment out;
  out.objective[device] = 0;
  out.certified[device] = true;
  out.oracle_gap[device] = 0;
  out.per_slot_area[device];
  for (int i = 0; i < n; ++i) {
    auto [r, c] = coords[static_cast<std::size_t>(best[static_cast<std::size_t>(i)])];
    out.mapping[view.ids[static_cast<std::size_t>(i)]] = {device, r, c};
    out.per_slot_area[device][{r, c}] += view.areas[static_cast<std::size_t>(i)];
  }
  out.objective[device] = manhattan_cost(out, g, device);
  return out;
}

HbmBinding bind_hbm_channels(const TaskGraph& g, const SlotAssignment& s,
                             const DeviceSpec& d, int device, std::int64_t alpha,
                             std::int64_t beta, int ports_per_channel) {
  struct PortRef {
    std::string vertex;
    int port;
    std::int64_t volume;
    int row, col;
  };
  std::vector<PortRef> ports;
  for (const auto& [id, place] : s.mapping) {
    if (place.device != device) continue;
    const auto& v = g.vertex(id);
    for (std::size_t p = 0; p < v.hbm_ports.size(); ++p)
      ports.push_back({id, static_cast<int>(p), v.hbm_ports[p].volume_bytes,
                       place.row, place.col});
  }
  std::sort(ports.begin(), ports.end(), [](const PortRef& a, const PortRef& b) {
    if (a.volume != b.volume) return a.volume > b.volume;
    if (a.vertex != b.vertex) return a.vertex < b.vertex;
    return a.port < b.port;
  });

  const int channels = d.hbm_channels;
  if (static_cast<int>(ports.size()) > channels * ports_per_channel)
    throw CapacityError("device " + std::to_string(device) + " needs " +
                        std::to_string(ports.size()) + " HBM ports but offers " +
                        std::to_string(channels) + " channels x " +
                        std::to_string(ports_per_channel));

  if (beta < 0) {
    std::int64_t total = 0;
    for (const auto& e : g.edges()) total += e.width_bits;
    beta = g.edges().empty()
               ? 1
               : std::max<std::int64_t>(1, total / static_cast<std::int64_t>(
                                                       g.edges().size()));
  }

  auto band_col = [&](int ch) { return ch * d.slot_cols / channels; };
  auto port_dist = [&](const PortRef& p, int ch) {
    return std::abs(p.row - d.hbm_row) + std::abs(p.col - band_col(ch));
  };

  HbmBinding out;
  const int n = static_cast<int>(ports.size());
  if (n == 0) return out;

  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  double exact_work = std::pow(static_cast<double>(channels), n);
  if (n <= 8 && exact_work <= 2.0e7) {
    // Exhaustive: lexicographic channel enumeration keeps ties deterministic.
    std::vector<int> cnt(static_cast<std::size_t>(channels), 0);
    std::vector<int> best;
    std::int64_t best_cost = kInf;
    auto recurse = [&](auto&& self, int k, std::int64_t cost) -> void {
      if (cost >= best_cost) return;
      if (k == n) {
        best_cost = cost;
        best = assign;
        return;
      }
      for (int ch = 0; ch < channels; ++ch) {
        if (cnt[static_cast<std::size_t>(ch)] >= ports_per_channel) continue;
        std::int64_t add = alpha * port_dist(ports[static_cast<std::size_t>(k)], ch) +
                           beta * 2 * cnt[static_cast<std::size_t>(ch)];
        ++cnt[static_cast<std::size_t>(ch)];
        assign[static_cast<std::size_t>(k)] = ch;
        self(self, k + 1, cost + add);
        assign[static_cast<std::size_t>(k)] = -1;
        --cnt[static_cast<std::size_t>(ch)];
      }
    };
    recurse(recurse, 0, 0);
    assign = best;
    out.cost = best_cost;
    out.exact = true;
  } else {
    // Greedy in descending volume, then pairwise-swap refinement to a local
    // optimum.
    std::vector<int> cnt(static_cast<std::size_t>(channels), 0);
    std::int64_t cost = 0;
    for (int k = 0; k < n; ++k) {
      int pick = -1;
      std::int64_t pick_cost = kInf;
      for (int ch = 0; ch < channels; ++ch) {
        if (cnt[static_cast<std::size_t>(ch)] >= ports_per_channel) continue;
        std::int64_t add = alpha * port_dist(ports[static_cast<std::size_t>(k)], ch) +
                           beta * 2 * cnt[static_cast<std::size_t>(ch)];
        if (add < pick_cost) {
          pick_cost = add;
          pick = ch;
        }
      }
      assign[static_cast<std::size_t>(k)] = pick;
      ++cnt[static_cast<std::size_t>(pick)];
      cost += pick_cost;
    }
    auto total_cost = [&](const std::vector<int>& as) {
      std::vector<int> c(static_cast<std::size_t>(channels), 0);
      std::int64_t t = 0;
      for (int k = 0; k < n; ++k) {
        t += alpha * port_dist(ports[static_cast<std::size_t>(k)], as[static_cast<std::size_t>(k)]);
        ++c[static_cast<std::size_t>(as[static_cast<std::size_t>(k)])];
      }
      for (int ch = 0; ch < channels; ++ch)
        t += beta * static_cast<std::int64_t>(c[static_cast<std::size_t>(ch)]) *
             (c[static_cast<std::size_t>(ch)] - 1);
      return t;
    };
    cost = total_cost(assign);
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 0; i < n && !improved; ++i)
        for (int j = i + 1; j < n && !improved; ++j) {
          if (assign[static_cast<std::size_t>(i)] == assign[static_cast<std::size_t>(j)]) continue;
          std::swap(assign[static_cast<std::size_t>(i)], assign[static_cast<std::size_t>(j)]);
          std::int64_t t = total_cost(assign);
          if (t < cost) {
            cost = t;
            improved = true;
          } else {
            std::swap(assign[static_cast<std::size_t>(i)], assign[static_cast<std::size_t>(j)]);
          }
        }
    }
    out.cost = cost;
    out.exact = false;
  }

  for (int k = 0; k < n; ++k)
    out.channel_of[{ports[static_cast<std::size_t>(k)].vertex,
                    ports[static_cast<std::size_t>(k)].port}] =
        assign[static_cast<std::size_t>(k)];
  return out;
}

}  // namespace flowplan
