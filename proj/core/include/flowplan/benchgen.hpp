// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowplan/graph.hpp"

namespace flowplan {

// Exact (unscaled) per-design transfer profiles; the generated graphs carry
// the same volumes divided by the documented simulation scales.
struct StencilProfile {
  double ops_per_byte = 0.0;
  std::int64_t volume_bytes = 0;  // total inter-stage transfer per run
};
StencilProfile stencil_profile(int iterations);

// Bytes crossing any single column boundary of an (rows x cols) grid.
std::int64_t cnn_cut_volume_bytes(int cols);

// Linear chain of PE stages between an HBM source and sink.
TaskGraph gen_stencil(int iterations, int pes, int hbm_width = 128);

struct PagerankDataset {
  std::string name;
  std::int64_t nodes = 0;
  std::int64_t edges = 0;
};
const std::vector<PagerankDataset>& pagerank_datasets();

// Star of PEs around a vertex router with a feedback cycle through the
// accumulator. Transfer volumes depend on the dataset only, never on `pes`.
TaskGraph gen_pagerank(int pes, const std::string& dataset = "cit-Patents");

// Distance modules (blue) -> top-K sorters (yellow) -> accumulator (green).
// hbm_width 0 picks 256-bit ports for the single-device reference size and
// 512-bit ports for scaled-out designs.
TaskGraph gen_knn(std::int64_t n, int d, int k, int dist_modules,
                  int hbm_width = 0);

// rows x cols PE grid with per-PE input relays and result drains, row
// loaders, and column collectors; 3*rows*cols + rows + cols vertices.
TaskGraph gen_systolic(int rows, int cols);

}  // namespace flowplan
