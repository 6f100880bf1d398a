// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <future>
#include <limits>
#include <ostream>
#include <queue>

#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

// cycles to move `bits` at `rate_bps` under clock `hz`
std::uint64_t bits_to_cycles(std::int64_t bits, double rate_bps, std::int64_t hz) {
  if (bits <= 0 || rate_bps <= 0) return 0;
  double cycles = static_cast<double>(bits) * static_cast<double>(hz) / rate_bps;
  return static_cast<std::uint64_t>(std::ceil(cycles));
}

struct SimEdge {
  int producer = -1, consumer = -1;
  std::int64_t tokens = 0;
  std::int64_t capacity = 2;
  std::uint64_t latency = 0;
  int width_bits = 32;
  std::string id;
  const NetLink* link = nullptr;  // set on ".net" edges

  std::int64_t produced = 0;   // reserved at fire time
  std::int64_t arrived = 0;    // visible at the consumer
  std::int64_t consumed = 0;
  std::deque<std::pair<std::uint64_t, std::int64_t>> in_flight;
  bool consumer_waiting = false;
  bool producer_waiting = false;
};

struct SimVertex {
  const TaskVertex* task = nullptr;
  int device = 0;
  std::int64_t firings_total = 1;
  std::int64_t cycles_per_firing = 0;
  std::vector<int> ins, outs;  // edge indices
  std::vector<int> hbm_channel_key;  // global channel key per port

  std::int64_t firings = 0;
  std::uint64_t busy_until = 0;
  std::uint64_t busy_cycles = 0;
  std::uint64_t sched_at = kNever;
  std::vector<std::int8_t> merge_choices;  // for kMergeAny digesting
};

// cumulative token count after k firings, spread evenly across the run
std::int64_t bresenham(std::int64_t total, std::int64_t k, std::int64_t firings) {
  return static_cast<std::int64_t>(
      static_cast<__int128>(total) * k / firings);
}

struct Event {
  std::uint64_t time;
  int kind;  // 0 = arrival commit, 1 = vertex attempt
  int index;
  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    return index > o.index;
  }
};

class Engine {
 public:
  Engine(const PipelinedDesign& d, const ClusterSpec& cluster, const SimConfig& cfg)
      : design_(d), cluster_(cluster), cfg_(cfg) {
    hz_ = static_cast<std::int64_t>(std::llround(cfg.frequency_hz));
    if (hz_ <= 0) throw ParseError("design frequency must be positive");
    build();
  }

  SimReport run() {
    for (int v = 0; v < static_cast<int>(vertices_.size()); ++v)
      schedule_vertex(static_cast<std::uint64_t>(0), v);
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = std::max(now_, ev.time);
      if (ev.kind == 0)
        commit_arrivals(ev.index, ev.time);
      else
        attempt(ev.index, ev.time);
    }
    return finish();
  }

 private:
  void build() {
    // Rank vertices by id so ties always break the same way.
    std::vector<std::string> ids;
    for (const auto& v : design_.graph.vertices()) ids.push_back(v.id);
    std::sort(ids.begin(), ids.end());
    for (std::size_t r = 0; r < ids.size(); ++r) rank_[ids[r]] = static_cast<int>(r);

    vertices_.resize(ids.size());
    std::map<std::string, const NetLink*> net_edges;
    for (const auto& l : design_.links) net_edges[l.edge_id + ".net"] = &l;

    edges_.resize(design_.graph.edges().size());
    for (std::size_t ei = 0; ei < design_.graph.edges().size(); ++ei) {
      const auto& e = design_.graph.edges()[ei];
      SimEdge& se = edges_[ei];
      se.id = e.id;
      se.producer = rank_.at(e.src);
      se.consumer = rank_.at(e.dst);
      se.tokens = e.tokens_per_run;
      se.width_bits = e.width_bits;
      std::int64_t balance = 0;
      if (auto it = design_.balancing_fifos.find(e.id);
          it != design_.balancing_fifos.end())
        balance = it->second;
      se.capacity = e.depth_tokens + balance;
      if (auto it = design_.edge_latency.find(e.id); it != design_.edge_latency.end())
        se.latency = static_cast<std::uint64_t>(std::max<std::int64_t>(0, it->second));
      if (auto it = net_edges.find(e.id); it != net_edges.end()) se.link = it->second;
    }

    std::map<int, int> auto_channel;  // fallback binding cursor per device
    for (std::size_t r = 0; r < ids.size(); ++r) {
      SimVertex& sv = vertices_[r];
      sv.task = &design_.graph.vertex(ids[r]);
      sv.device = design_.placement.mapping.at(ids[r]);
      for (std::size_t ei = 0; ei < edges_.size(); ++ei) {
        if (edges_[ei].producer == static_cast<int>(r)) sv.outs.push_back(static_cast<int>(ei));
        if (edges_[ei].consumer == static_cast<int>(r)) sv.ins.push_back(static_cast<int>(ei));
      }
      std::int64_t f = 1;
      for (int ei : sv.ins) f = std::max(f, edges_[static_cast<std::size_t>(ei)].tokens);
      for (int ei : sv.outs) f = std::max(f, edges_[static_cast<std::size_t>(ei)].tokens);
      if (sv.task->kind == TaskVertex::Kind::kMergeAny) {
        f = 0;
        for (int ei : sv.ins) f += edges_[static_cast<std::size_t>(ei)].tokens;
        f = std::max<std::int64_t>(f, 1);
      }
      sv.firings_total = f;
      sv.cycles_per_firing = sv.task->work > 0 ? ceil_div(sv.task->work, f) : 0;
      const DeviceSpec& dev = cluster_.device(sv.device);
      for (std::size_t p = 0; p < sv.task->hbm_ports.size(); ++p) {
        int ch;
        auto it = design_.hbm_channel.find({ids[r], static_cast<int>(p)});
        if (it != design_.hbm_channel.end())
          ch = it->second;
        else
          ch = auto_channel[sv.device]++ % dev.hbm_channels;
        sv.hbm_channel_key.push_back(sv.device * 4096 + ch);
      }
    }
  }

  void schedule_vertex(std::uint64_t t, int v) {
    SimVertex& sv = vertices_[static_cast<std::size_t>(v)];
    if (sv.sched_at <= t) return;
    sv.sched_at = t;
    queue_.push({t, 1, v});
  }

  void commit_arrivals(int ei, std::uint64_t t) {
    SimEdge& e = edges_[static_cast<std::size_t>(ei)];
    bool any = false;
    while (!e.in_flight.empty() && e.in_flight.front().first <= t) {
      e.arrived += e.in_flight.front().second;
      e.in_flight.pop_front();
      any = true;
    }
    if (any && e.consumer_waiting) {
      e.consumer_waiting = false;
      schedule_vertex(t, e.consumer);
    }
  }

  void attempt(int v, std::uint64_t t) {
    SimVertex& sv = vertices_[static_cast<std::size_t>(v)];
    if (sv.sched_at == t) sv.sched_at = kNever;
    if (sv.busy_until > t) {
      schedule_vertex(sv.busy_until, v);
      return;
    }
    // Zero-cost vertices may fire repeatedly within one instant.
    while (sv.firings < sv.firings_total) {
      if (!try_fire(v, t)) return;
      if (vertices_[static_cast<std::size_t>(v)].busy_until > t) {
        schedule_vertex(vertices_[static_cast<std::size_t>(v)].busy_until, v);
        return;
      }
    }
  }

  // One firing of vertex v at time t; returns false when blocked (waiters
  // registered on the blocking edges).
  bool try_fire(int v, std::uint64_t t) {
    SimVertex& sv = vertices_[static_cast<std::size_t>(v)];
    const std::int64_t k = sv.firings + 1;
    const bool merge = sv.task->kind == TaskVertex::Kind::kMergeAny;

    int merge_pick = -1;
    if (merge) {
      for (std::size_t i = 0; i < sv.ins.size(); ++i) {
        const SimEdge& e = edges_[static_cast<std::size_t>(sv.ins[i])];
        if (e.arrived - e.consumed >= 1) {
          merge_pick = static_cast<int>(i);
          break;
        }
      }
      if (merge_pick < 0) {
        for (int ei : sv.ins) edges_[static_cast<std::size_t>(ei)].consumer_waiting = true;
        return false;
      }
    } else {
      for (int ei : sv.ins) {
        SimEdge& e = edges_[static_cast<std::size_t>(ei)];
        std::int64_t need = bresenham(e.tokens, k, sv.firings_total) -
                            bresenham(e.tokens, k - 1, sv.firings_total);
        if (e.arrived - e.consumed < need) {
          e.consumer_waiting = true;
          return false;
        }
      }
    }
    for (int ei : sv.outs) {
      SimEdge& e = edges_[static_cast<std::size_t>(ei)];
      std::int64_t emit = bresenham(e.tokens, k, sv.firings_total) -
                          bresenham(e.tokens, k - 1, sv.firings_total);
      if (e.produced - e.consumed + emit > e.capacity) {
        e.producer_waiting = true;
        return false;
      }
    }

    // Consume inputs now; this frees space upstream.
    if (merge) {
      SimEdge& e = edges_[static_cast<std::size_t>(sv.ins[static_cast<std::size_t>(merge_pick)])];
      e.consumed += 1;
      sv.merge_choices.push_back(static_cast<std::int8_t>(merge_pick));
      if (e.producer_waiting) {
        e.producer_waiting = false;
        schedule_vertex(t, e.producer);
      }
    } else {
      for (int ei : sv.ins) {
        SimEdge& e = edges_[static_cast<std::size_t>(ei)];
        std::int64_t need = bresenham(e.tokens, k, sv.firings_total) -
                            bresenham(e.tokens, k - 1, sv.firings_total);
        if (need == 0) continue;
        e.consumed += need;
        if (e.producer_waiting) {
          e.producer_waiting = false;
          schedule_vertex(t, e.producer);
        }
      }
    }

    std::uint64_t completion = t + static_cast<std::uint64_t>(sv.cycles_per_firing);

    // HBM accesses serialize per channel; each port moves its share of the
    // declared volume at min(port width x clock, channel bandwidth).
    const DeviceSpec& dev = cluster_.device(sv.device);
    double ch_bw = static_cast<double>(cluster_.hbm_bw_per_channel_bps(dev));
    for (std::size_t p = 0; p < sv.task->hbm_ports.size(); ++p) {
      const HbmPort& port = sv.task->hbm_ports[p];
      std::int64_t bytes = bresenham(port.volume_bytes, k, sv.firings_total) -
                           bresenham(port.volume_bytes, k - 1, sv.firings_total);
      if (bytes <= 0) continue;
      double port_rate = std::min(
          ch_bw, static_cast<double>(port.width_bits) * static_cast<double>(hz_));
      std::uint64_t dur = std::max<std::uint64_t>(1, bits_to_cycles(bytes * 8, port_rate, hz_));
      auto& busy = channel_busy_[sv.hbm_channel_key[p]];
      std::uint64_t grant = std::max(busy, t);
      if (busy > t) ++hbm_contention_;
      busy = grant + dur;
      completion = std::max(completion, grant + dur);
      trace(t, "hbm", sv.task->id);
    }

    // Net sends serialize on their QSFP port at the link's effective rate.
    if (sv.task->kind == TaskVertex::Kind::kNetSend && !sv.outs.empty()) {
      SimEdge& e = edges_[static_cast<std::size_t>(sv.outs[0])];
      if (e.link != nullptr) {
        std::int64_t emit = bresenham(e.tokens, k, sv.firings_total) -
                            bresenham(e.tokens, k - 1, sv.firings_total);
        if (emit > 0) {
          std::int64_t bits = emit * e.width_bits;
          std::uint64_t dur = std::max<std::uint64_t>(
              1, bits_to_cycles(bits, e.link->effective_rate_bps, hz_));
          int key = e.link->src_device * 64 + e.link->src_port;
          auto& busy = port_busy_[key];
          std::uint64_t grant = std::max(busy, t);
          if (busy > t) ++port_contention_;
          busy = grant + dur;
          completion = std::max(completion, grant + dur);
          auto& ls = link_stats_[e.link->edge_id];
          ls.volume_bits += bits;
          ls.busy_cycles += dur;
          trace(t, "link", e.link->edge_id);
        }
      }
    }

    // Produce outputs; they become visible after the edge latency.
    for (int ei : sv.outs) {
      SimEdge& e = edges_[static_cast<std::size_t>(ei)];
      std::int64_t emit = bresenham(e.tokens, k, sv.firings_total) -
                          bresenham(e.tokens, k - 1, sv.firings_total);
      if (emit == 0) continue;
      e.produced += emit;
      std::uint64_t arrival = completion + e.latency;
      e.in_flight.push_back({arrival, emit});
      queue_.push({arrival, 0, ei});
    }

    sv.firings += 1;
    sv.busy_cycles += completion - t;
    sv.busy_until = completion;
    last_time_ = std::max(last_time_, completion);
    trace(t, "fire", sv.task->id);
    return true;
  }

  std::uint64_t digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto fold = [&h](std::uint64_t x) { h = mix64(h ^ x); };
    for (std::size_t r = 0; r < vertices_.size(); ++r) {
      const SimVertex& sv = vertices_[r];
      bool is_sink = sv.task->kind == TaskVertex::Kind::kSink || sv.outs.empty();
      if (!is_sink) continue;
      // In-edge streams hashed independently: their relative interleaving is
      // timing-dependent, the per-edge sequences are not.
      std::vector<int> ins = sv.ins;
      std::sort(ins.begin(), ins.end(), [this](int a, int b) {
        return edges_[static_cast<std::size_t>(a)].id < edges_[static_cast<std::size_t>(b)].id;
      });
      for (int ei : ins) {
        const SimEdge& e = edges_[static_cast<std::size_t>(ei)];
        fold(mix64(std::hash<std::string>{}(e.id)));
        fold(static_cast<std::uint64_t>(e.consumed));
        const SimVertex& prod = vertices_[static_cast<std::size_t>(e.producer)];
        for (std::int64_t j = 0; j < e.consumed; ++j) {
          std::uint64_t val;
          if (prod.task->kind == TaskVertex::Kind::kMergeAny) {
            std::int64_t pick =
                j < static_cast<std::int64_t>(prod.merge_choices.size())
                    ? prod.merge_choices[static_cast<std::size_t>(j)]
                    : -1;
            val = mix64((static_cast<std::uint64_t>(e.producer) << 32) ^
                        static_cast<std::uint64_t>(j)) ^
                  static_cast<std::uint64_t>(pick + 1);
          } else {
            val = mix64((static_cast<std::uint64_t>(e.producer) << 32) ^
                        static_cast<std::uint64_t>(j));
          }
          fold(val);
        }
      }
    }
    return h;
  }

  std::uint64_t lower_bound() const {
    std::uint64_t lb = 0;
    for (const auto& sv : vertices_)
      lb = std::max(lb, static_cast<std::uint64_t>(sv.firings_total) *
                            static_cast<std::uint64_t>(sv.cycles_per_firing));
    for (const auto& [id, ls] : link_stats_) (void)id;
    for (const auto& l : design_.links)
      lb = std::max(lb, bits_to_cycles(l.volume_bits, l.effective_rate_bps, hz_));
    return lb;
  }

  SimReport finish() {
    bool all_sinks_done = true;
    std::string witness;
    for (const auto& sv : vertices_) {
      if (sv.firings >= sv.firings_total) continue;
      bool is_sink = sv.task->kind == TaskVertex::Kind::kSink || sv.outs.empty();
      if (is_sink) all_sinks_done = false;
      if (witness.size() < 256) {
        witness += witness.empty() ? "" : "; ";
        witness += sv.task->id + " stalled at firing " + std::to_string(sv.firings) +
                   "/" + std::to_string(sv.firings_total);
      }
    }
    if (!all_sinks_done)
      throw DeadlockError("no event can progress: " + witness);

    SimReport rep;
    rep.total_cycles = last_time_;
    rep.total_seconds = static_cast<double>(last_time_) / static_cast<double>(hz_);
    rep.output_digest = digest();
    rep.hbm_contention_events = hbm_contention_;
    rep.port_contention_events = port_contention_;
    for (const auto& sv : vertices_) {
      VertexStats vs;
      vs.firings = static_cast<std::uint64_t>(sv.firings);
      vs.busy_cycles = sv.busy_cycles;
      vs.idle_cycles = last_time_ - std::min(last_time_, sv.busy_cycles);
      rep.per_vertex[sv.task->id] = vs;
      rep.compute_busy_cycles += sv.busy_cycles;
      bool is_sink = sv.task->kind == TaskVertex::Kind::kSink || sv.outs.empty();
      if (is_sink) {
        std::int64_t got = 0;
        for (int ei : sv.ins) got += edges_[static_cast<std::size_t>(ei)].consumed;
        rep.sink_tokens[sv.task->id] = got;
      }
    }
    for (auto& [id, ls] : link_stats_) {
      ls.achieved_bps = ls.busy_cycles > 0
                            ? static_cast<double>(ls.volume_bits) *
                                  static_cast<double>(hz_) /
                                  static_cast<double>(ls.busy_cycles)
                            : 0.0;
      rep.per_link[id] = ls;
      rep.link_busy_cycles += ls.busy_cycles;
    }
    rep.lower_bound_cycles = lower_bound();
    // Token conservation is structural; check it anyway so a future engine
    // bug cannot pass silently.
    for (const auto& e : edges_)
      if (e.consumed != e.tokens || e.produced != e.tokens)
        throw Error("token contract violated on edge " + e.id + ": produced " +
                    std::to_string(e.produced) + ", consumed " +
                    std::to_string(e.consumed) + " of " + std::to_string(e.tokens));
    return rep;
  }

  void trace(std::uint64_t t, const char* what, const std::string& who) {
    if (!cfg_.trace || cfg_.trace_out == nullptr) return;
    (*cfg_.trace_out) << "{\"t\":" << t << ",\"event\":\"" << what << "\",\"id\":\""
                      << who << "\"}\n";
  }

  const PipelinedDesign& design_;
  const ClusterSpec& cluster_;
  const SimConfig& cfg_;
  std::int64_t hz_ = 300'000'000;
  std::map<std::string, int> rank_;
  std::vector<SimVertex> vertices_;
  std::vector<SimEdge> edges_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::map<int, std::uint64_t> channel_busy_;
  std::map<int, std::uint64_t> port_busy_;
  std::map<std::string, LinkStats> link_stats_;
  std::uint64_t hbm_contention_ = 0, port_contention_ = 0;
  std::uint64_t now_ = 0, last_time_ = 0;
};

bool design_is_cyclic(const TaskGraph& g) {
  // Kahn peeling; anything left sits on a cycle.
  std::map<std::string, int> indeg;
  for (const auto& v : g.vertices()) indeg[v.id] = 0;
  for (const auto& e : g.edges()) ++indeg[e.dst];
  std::deque<std::string> q;
  for (const auto& [id, d] : indeg)
    if (d == 0) q.push_back(id);
  std::size_t seen = 0;
  while (!q.empty()) {
    std::string u = q.front();
    q.pop_front();
    ++seen;
    for (std::size_t ei : g.out_edges(u))
      if (--indeg[g.edges()[ei].dst] == 0) q.push_back(g.edges()[ei].dst);
  }
  return seen != g.vertices().size();
}

}  // namespace

SimReport simulate(const PipelinedDesign& d, const ClusterSpec& cluster,
                   const SimConfig& cfg) {
  return Engine(d, cluster, cfg).run();
}

InsensitivityVerdict check_latency_insensitivity(const PipelinedDesign& d,
                                                 const ClusterSpec& cluster,
                                                 const SimConfig& cfg, int trials) {
  InsensitivityVerdict verdict;
  if (design_is_cyclic(d.graph)) {
    simulate(d, cluster, cfg);  // throws on deadlock
    verdict.ok = true;
    return verdict;
  }

  std::vector<std::string> edge_ids;
  for (const auto& e : d.graph.edges()) edge_ids.push_back(e.id);

  auto perturbation = [&](int trial) {
    std::vector<std::int64_t> extra(edge_ids.size(), 0);
    if (trial == 0) return extra;  // baseline
    for (std::size_t i = 0; i < edge_ids.size(); ++i)
      extra[i] = static_cast<std::int64_t>(
          mix64(0x9e3779b97f4a7c15ULL * (i + 1) ^
                0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(trial)) %
          9);
    return extra;
  };

  // Trials are independent; run them in parallel and collect by index.
  std::vector<std::future<std::uint64_t>> futs;
  for (int trial = 0; trial < trials; ++trial)
    futs.push_back(std::async(std::launch::async, [&, trial] {
      PipelinedDesign pd = d;
      auto extra = perturbation(trial);
      for (std::size_t i = 0; i < edge_ids.size(); ++i)
        pd.edge_latency[edge_ids[i]] += extra[i];
      return simulate(pd, cluster, cfg).output_digest;
    }));
  std::vector<std::uint64_t> digests;
  for (auto& f : futs) digests.push_back(f.get());

  for (int trial = 1; trial < trials; ++trial)
    if (digests[static_cast<std::size_t>(trial)] != digests[0]) {
      verdict.ok = false;
      verdict.failing_trial = trial;
      verdict.perturbation = perturbation(trial);
      return verdict;
    }
  verdict.ok = true;
  return verdict;
}

Speedup compare(const SimReport& a, const SimReport& b) {
  std::int64_t qa = 0, qb = 0;
  for (const auto& [id, t] : a.sink_tokens) qa += t;
  for (const auto& [id, t] : b.sink_tokens) qb += t;
  if (qa != qb)
    throw Error("workload mismatch: sink token quotas differ (" +
                std::to_string(qa) + " vs " + std::to_string(qb) + ")");
  Speedup s;
  s.speedup = b.total_seconds > 0 ? a.total_seconds / b.total_seconds : 0.0;
  auto shares = [](const SimReport& r, double& compute, double& link) {
    double total = static_cast<double>(r.compute_busy_cycles + r.link_busy_cycles);
    compute = total > 0 ? static_cast<double>(r.compute_busy_cycles) / total : 0.0;
    link = total > 0 ? static_cast<double>(r.link_busy_cycles) / total : 0.0;
  };
  shares(a, s.compute_share_a, s.link_share_a);
  shares(b, s.compute_share_b, s.link_share_b);
  return s;
}

}  // namespace flowplan
