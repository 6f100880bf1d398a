// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowplan/cluster.hpp"
#include "flowplan/graph.hpp"

namespace flowplan {

// Vertex-to-device placement plus the bookkeeping the reports need.
// `objective_tenths` is the topology-weighted communication cost in tenths
// (the PCIe scaling factor is 12.5, so tenths keep the objective integral).
struct InterAssignment {
  std::map<std::string, int> mapping;
  std::int64_t objective_tenths = 0;
  std::map<int, ResourceVec> per_device_area;
  bool feasible = false;
  bool certified = false;  // best bound == incumbent when true
};

// The binary assignment formulation. Variable x[v][d] says vertex v sits on
// device d; products x[src][di] * x[dst][dj] are linearized through binary
// y[e][di][dj] >= x[src][di] + x[dst][dj] - 1 rows, one per pair with a
// non-zero hop cost. The semantic tables below are what the in-repo solver
// walks; `to_lp_format` renders the same rows for an external MILP backend.
struct IlpProblem {
  std::vector<std::string> vertex_ids;      // sorted; defines variable order
  std::vector<ResourceVec> areas;           // by vertex rank
  std::vector<ResourceVec> device_limits;   // thresholded capacities
  int device_count = 0;

  struct EdgeTerm {
    int u = 0, v = 0;  // vertex ranks
    std::int64_t width = 0;
  };
  std::vector<EdgeTerm> edge_terms;
  // Cost per unit width for placing an edge across (di, dj).
  std::vector<std::vector<std::int64_t>> pair_cost_tenths;
  // Symmetry breaking on vertex-transitive topologies: rank-0 vertex goes to
  // device 0. Disabled for chain/star/custom.
  bool pin_first_vertex = false;

  std::size_t num_x_vars() const;
  std::size_t num_y_vars() const;
  std::size_t assignment_rows() const { return vertex_ids.size(); }
  std::size_t capacity_rows() const;
  std::size_t linearization_rows() const { return num_y_vars(); }
  std::size_t total_rows() const {
    return assignment_rows() + capacity_rows() + linearization_rows();
  }
  std::string to_lp_format() const;
};

// Builds the ILP. Precondition: the graph validates and the device
// capacities were already reduced by apply_network_overhead for the ports
// the topology requires (see with_network_overhead). Throws InfeasibleError
// naming any vertex that exceeds every device's thresholded capacity.
IlpProblem formulate(const TaskGraph& g, const ClusterSpec& cluster);

// Every device's capacity reduced by the ports the topology requires of it.
ClusterSpec with_network_overhead(const ClusterSpec& cluster);

// Exact branch and bound over the binary formulation: best-bound node
// selection, LP-free lower bound (committed cost plus per-vertex minima over
// the edges into the assigned region), lexicographic tie-breaks. The result
// is deterministic for identical inputs and `certified` unless the time
// limit expired first. Throws InfeasibleError when no assignment satisfies
// the capacity rows.
InterAssignment solve(const IlpProblem& p, double time_limit_seconds = 60.0);

// Exhaustive reference: enumerates device^|V| assignments in vertex-id-major
// lexicographic order, so ties resolve exactly as in `solve`. Guarded to
// |V| <= 14 and <= 4 devices (SizeError beyond).
InterAssignment brute_force_oracle(const TaskGraph& g, const ClusterSpec& cluster);

// Post-hoc Eq-style feasibility check, independent of solver internals.
bool verify_assignment(const TaskGraph& g, const ClusterSpec& cluster,
                       const std::map<std::string, int>& mapping,
                       std::string* violation = nullptr);

// Objective of an arbitrary mapping under the cluster's cost model.
std::int64_t assignment_cost_tenths(const TaskGraph& g, const ClusterSpec& cluster,
                                    const std::map<std::string, int>& mapping);

}  // namespace flowplan
