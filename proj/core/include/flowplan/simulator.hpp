// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "flowplan/cluster.hpp"
#include "flowplan/pipeliner.hpp"

namespace flowplan {

struct SimConfig {
  double frequency_hz = 300e6;  // design frequency; U55C tops out at 300 MHz
  int port_streams = 16;
  bool trace = false;
  std::ostream* trace_out = nullptr;
};

struct VertexStats {
  std::uint64_t firings = 0;
  std::uint64_t busy_cycles = 0;
  std::uint64_t idle_cycles = 0;
};

struct LinkStats {
  std::int64_t volume_bits = 0;
  std::uint64_t busy_cycles = 0;
  double achieved_bps = 0.0;
};

struct SimReport {
  std::uint64_t total_cycles = 0;
  double total_seconds = 0.0;
  std::uint64_t output_digest = 0;
  std::map<std::string, VertexStats> per_vertex;
  std::map<std::string, LinkStats> per_link;   // keyed by original edge id
  std::uint64_t hbm_contention_events = 0;     // grants that had to wait
  std::uint64_t port_contention_events = 0;    // stream serialization stalls
  std::uint64_t lower_bound_cycles = 0;
  std::uint64_t compute_busy_cycles = 0;
  std::uint64_t link_busy_cycles = 0;
  std::map<std::string, std::int64_t> sink_tokens;
};

// Deterministic discrete-event execution: a vertex fires when every input
// FIFO has its tokens and every output FIFO has room, taking its amortized
// work cycles per firing; HBM accesses serialize per channel at the channel
// bandwidth (capped by port width x frequency); net transfers serialize per
// QSFP port at the link's effective rate. Ties break on lower vertex id.
// Throws DeadlockError with a wait witness if no event can progress before
// the sinks finish.
SimReport simulate(const PipelinedDesign& d, const ClusterSpec& cluster,
                   const SimConfig& cfg);

struct InsensitivityVerdict {
  bool ok = false;
  int failing_trial = -1;
  std::vector<std::int64_t> perturbation;  // per-edge added latency
};

// Replays the design under `trials` deterministic per-edge latency
// perturbations (a fixed enumeration schedule, no RNG) and checks that every
// run produces the same output digest. Cyclic designs are only checked for
// deadlock freedom.
InsensitivityVerdict check_latency_insensitivity(const PipelinedDesign& d,
                                                 const ClusterSpec& cluster,
                                                 const SimConfig& cfg, int trials);

struct Speedup {
  double speedup = 1.0;       // a.total over b.total: how much faster b is
  double compute_share_a = 0.0, link_share_a = 0.0;
  double compute_share_b = 0.0, link_share_b = 0.0;
};

// a is the reference (e.g. the 1-device run), b the candidate. Throws Error
// when the two runs do not move the same logical workload.
Speedup compare(const SimReport& a, const SimReport& b);

}  // namespace flowplan
