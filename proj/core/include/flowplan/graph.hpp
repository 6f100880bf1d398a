// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flowplan/resource.hpp"

namespace flowplan {

// External-memory access point declared by a task. Hexagon nodes of the
// topology diagrams; the binder later maps each port to an HBM channel.
struct HbmPort {
  enum class Dir { kRead, kWrite };
  Dir dir = Dir::kRead;
  int width_bits = 512;             // must be one of {32,64,128,256,512}
  std::int64_t volume_bytes = 0;    // estimated bytes moved per run
};

struct TaskVertex {
  // `kCompute`/`kSource`/`kSink` come from the input; `kNetSend`/`kNetRecv`
  // are introduced by communication insertion. `kMergeAny` is a
  // non-deterministic merge used as a negative control in simulator tests;
  // it consumes from whichever input has data first and is never produced
  // by the generators.
  enum class Kind { kCompute, kSource, kSink, kNetSend, kNetRecv, kMergeAny };

  std::string id;
  ResourceVec area;
  std::vector<HbmPort> hbm_ports;
  std::int64_t work = 0;  // abstract compute cycles per run
  Kind kind = Kind::kCompute;
};

struct FifoEdge {
  std::string id;
  std::string src;
  std::string dst;
  int width_bits = 32;
  std::int64_t depth_tokens = 2;     // minimum depth for full pipelining
  std::int64_t tokens_per_run = 1;   // total tokens in one end-to-end run
};

// Directed multigraph of tasks connected by FIFO channels. Immutable once
// validated; construction is single-threaded, sharing afterwards is safe.
class TaskGraph {
 public:
  TaskGraph() = default;
  explicit TaskGraph(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  // Throws ReferenceError on duplicate ids / dangling endpoints.
  void add_vertex(TaskVertex v);
  void add_edge(FifoEdge e);

  bool has_vertex(std::string_view id) const;
  const TaskVertex& vertex(std::string_view id) const;
  std::size_t vertex_index(std::string_view id) const;

  const std::vector<TaskVertex>& vertices() const { return vertices_; }
  const std::vector<FifoEdge>& edges() const { return edges_; }

  // Edge indices incident to a vertex, in insertion order.
  const std::vector<std::size_t>& out_edges(std::string_view id) const;
  const std::vector<std::size_t>& in_edges(std::string_view id) const;

  bool operator==(const TaskGraph& o) const {
    return name_ == o.name_ && vertices_ == o.vertices_ && edges_ == o.edges_;
  }

 private:
  std::string name_;
  std::vector<TaskVertex> vertices_;
  std::vector<FifoEdge> edges_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::size_t>> out_;
  std::unordered_map<std::string, std::vector<std::size_t>> in_;
};

inline bool operator==(const HbmPort& a, const HbmPort& b) {
  return a.dir == b.dir && a.width_bits == b.width_bits &&
         a.volume_bytes == b.volume_bytes;
}
inline bool operator==(const TaskVertex& a, const TaskVertex& b) {
  return a.id == b.id && a.area == b.area && a.hbm_ports == b.hbm_ports &&
         a.work == b.work && a.kind == b.kind;
}
inline bool operator==(const FifoEdge& a, const FifoEdge& b) {
  return a.id == b.id && a.src == b.src && a.dst == b.dst &&
         a.width_bits == b.width_bits && a.depth_tokens == b.depth_tokens &&
         a.tokens_per_run == b.tokens_per_run;
}

struct Diagnostic {
  std::string path;     // offending vertex/edge id or json path
  std::string message;
};

// Empty list iff every TaskGraph invariant holds: positive widths and
// depths, legal HBM port widths, no self loops, endpoints resolve, and at
// least one sink is reachable from a source.
std::vector<Diagnostic> validate_graph(const TaskGraph& g);

// Component-wise sum of `area` over `subset`. Throws ReferenceError for
// unknown ids.
ResourceVec total_area(const TaskGraph& g, const std::vector<std::string>& subset);

// Canonical-JSON round trip. `parse_task_graph` rejects unknown keys and
// names the offending path; `serialize_task_graph` emits sorted keys and a
// trailing newline so bundles are diffable.
TaskGraph parse_task_graph(std::string_view text);
std::string serialize_task_graph(const TaskGraph& g);

const char* vertex_kind_name(TaskVertex::Kind k);

}  // namespace flowplan
