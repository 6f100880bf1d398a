// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0

#include "flowplan/benchgen.hpp"

#include <cstdio>

#include "flowplan/bench_constants.hpp"
#include "flowplan/errors.hpp"

namespace flowplan {

namespace {

using namespace benchconst;

std::string pad(const char* prefix, int i, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

// Even split of `total` over `parts`, remainder on the first few.
std::int64_t share(std::int64_t total, int parts, int idx) {
  std::int64_t base = total / parts;
  std::int64_t rem = total % parts;
  return base + (idx < rem ? 1 : 0);
}

TaskVertex make_vertex(std::string id, ResourceVec area, std::int64_t work,
                       TaskVertex::Kind kind) {
  TaskVertex v;
  v.id = std::move(id);
  v.area = area;
  v.work = work;
  v.kind = kind;
  return v;
}

FifoEdge make_edge(std::string id, std::string src, std::string dst, int width,
                   std::int64_t tokens, std::int64_t depth = 2) {
  FifoEdge e;
  e.id = std::move(id);
  e.src = std::move(src);
  e.dst = std::move(dst);
  e.width_bits = width;
  e.tokens_per_run = tokens;
  e.depth_tokens = depth;
  return e;
}

}  // namespace

StencilProfile stencil_profile(int iterations) {
  if (iterations < 1) throw ParseError("stencil iterations must be >= 1");
  StencilProfile p;
  p.ops_per_byte = kStencilOpsPerByteIter * iterations;
  p.volume_bytes = kStencilBytesPerIter * iterations;
  return p;
}

TaskGraph gen_stencil(int iterations, int pes, int hbm_width) {
  if (pes < 1) throw ParseError("stencil needs at least one PE");
  if (hbm_width != 32 && hbm_width != 64 && hbm_width != 128 &&
      hbm_width != 256 && hbm_width != 512)
    throw ParseError("unsupported stencil HBM width: " + std::to_string(hbm_width));
  if (iterations < 1) throw ParseError("stencil iterations must be >= 1");

  TaskGraph g("stencil-" + std::to_string(iterations) + "x" + std::to_string(pes));
  const std::int64_t tokens = 9LL * iterations;  // scaled inter-stage volume
  const std::int64_t frame = kStencilFrameBytes / kStencilSimScale;
  const std::int64_t iters_per_pe = (iterations + pes - 1) / pes;

  TaskVertex src = make_vertex("src", kStencilIoArea, tokens, TaskVertex::Kind::kSource);
  src.hbm_ports.push_back({HbmPort::Dir::kRead, hbm_width, frame});
  g.add_vertex(src);
  for (int i = 0; i < pes; ++i)
    g.add_vertex(make_vertex(pad("pe", i), kStencilPeArea,
                             tokens * kStencilCyclesPerIterToken * iters_per_pe,
                             TaskVertex::Kind::kCompute));
  TaskVertex sink = make_vertex("zzsink", kStencilIoArea, tokens, TaskVertex::Kind::kSink);
  sink.hbm_ports.push_back({HbmPort::Dir::kWrite, hbm_width, frame});
  g.add_vertex(sink);

  std::string prev = "src";
  for (int i = 0; i < pes; ++i) {
    g.add_edge(make_edge(pad("st", i), prev, pad("pe", i), 8, tokens));
    prev = pad("pe", i);
  }
  g.add_edge(make_edge(pad("st", pes), prev, "zzsink", 8, tokens));
  return g;
}

const std::vector<PagerankDataset>& pagerank_datasets() {
  static const std::vector<PagerankDataset> kSets = {
      {"web-BerkStan", 685'230, 7'600'595},
      {"soc-Slashdot0811", 77'360, 905'468},
      {"web-Google", 875'713, 5'105'039},
      {"cit-Patents", 3'774'768, 16'518'948},
      {"web-NotreDame", 325'729, 1'497'134},
  };
  return kSets;
}

TaskGraph gen_pagerank(int pes, const std::string& dataset) {
  if (pes < 1) throw ParseError("pagerank needs at least one PE");
  const PagerankDataset* ds = nullptr;
  for (const auto& d : pagerank_datasets())
    if (d.name == dataset) ds = &d;
  if (ds == nullptr) throw ParseError("unknown pagerank dataset: " + dataset);

  const std::int64_t edge_tokens = ds->edges / kPagerankGraphScale;
  const std::int64_t update_tokens = ds->nodes / kPagerankGraphScale;
  // Scaled-out variants retune the HBM ports to the saturating width.
  const int pe_width = pes <= 4 ? 256 : 512;

  TaskGraph g("pagerank-" + std::to_string(pes) + "-" + ds->name);
  TaskVertex router = make_vertex("router", kPagerankRouterArea, edge_tokens,
                                  TaskVertex::Kind::kSource);
  for (int p = 0; p < kPagerankRouterPorts; ++p)
    router.hbm_ports.push_back(
        {HbmPort::Dir::kRead, 512,
         share(edge_tokens * kPagerankBytesPerEdgeToken, kPagerankRouterPorts, p)});
  g.add_vertex(router);

  for (int i = 0; i < pes; ++i) {
    std::int64_t my_updates = share(update_tokens, pes, i);
    TaskVertex pe = make_vertex(pad("pe", i, 2), kPagerankPeArea,
                                share(edge_tokens, pes, i) * 4,
                                TaskVertex::Kind::kCompute);
    std::int64_t pe_bytes = my_updates * kPagerankBytesPerEdgeToken * kPagerankVertexReuse;
    for (int p = 0; p < kPagerankPePorts; ++p)
      pe.hbm_ports.push_back(
          {p % 2 == 0 ? HbmPort::Dir::kRead : HbmPort::Dir::kWrite, pe_width,
           share(pe_bytes, kPagerankPePorts, p)});
    g.add_vertex(pe);
  }

  TaskVertex acc = make_vertex("zacc", kPagerankAccArea, update_tokens,
                               TaskVertex::Kind::kSink);
  acc.hbm_ports.push_back({HbmPort::Dir::kWrite, 512,
                           update_tokens * kPagerankBytesPerEdgeToken});
  g.add_vertex(acc);

  for (int i = 0; i < pes; ++i) {
    // Deep FIFOs: these streams are DRAM-backed batches, not wire handshakes.
    g.add_edge(make_edge(pad("rt", i, 2), "router", pad("pe", i, 2), 512,
                         share(edge_tokens, pes, i), 64));
    g.add_edge(make_edge(pad("up", i, 2), pad("pe", i, 2), "zacc", 512,
                         share(update_tokens, pes, i), 64));
  }
  g.add_edge(make_edge("fb", "zacc", "router", 32, kPagerankRounds, 64));
  return g;
}

TaskGraph gen_knn(std::int64_t n, int d, int k, int dist_modules, int hbm_width) {
  if (dist_modules < 1) throw ParseError("knn needs at least one distance module");
  if (d < 1) throw ParseError("knn feature dimension must be >= 1");
  if (k >= n) throw ParseError("knn requires k < n");
  if (hbm_width == 0)
    hbm_width = dist_modules <= kKnnBaselineBlues ? 256 : 512;
  if (hbm_width != 256 && hbm_width != 512)
    throw ParseError("knn HBM width must be 256 or 512");

  const int sorters =
      std::max(1, dist_modules * kKnnBaselineSorters / kKnnBaselineBlues);
  const std::int64_t n_tokens = std::max<std::int64_t>(1, n / kKnnTokenScale);
  const std::int64_t k_tokens_total =
      static_cast<std::int64_t>(kKnnBaselineSorters) * k;

  TaskGraph g("knn-" + std::to_string(dist_modules));
  const ResourceVec blue_area = hbm_width == 256 ? kKnnBlueArea256 : kKnnBlueArea512;
  for (int b = 0; b < dist_modules; ++b) {
    std::int64_t my_tokens = share(n_tokens, dist_modules, b);
    TaskVertex blue = make_vertex(pad("blu", b, 2), blue_area,
                                  my_tokens * kKnnCyclesPerDim * d,
                                  TaskVertex::Kind::kSource);
    blue.hbm_ports.push_back(
        {HbmPort::Dir::kRead, hbm_width,
         share(n_tokens * 4 * d, dist_modules, b) * kKnnTokenScale / 64});
    g.add_vertex(blue);
  }
  for (int s = 0; s < sorters; ++s) {
    std::int64_t in_tokens = 0;
    for (int b = 0; b < dist_modules; ++b)
      if (b * sorters / dist_modules == s) in_tokens += share(n_tokens, dist_modules, b);
    g.add_vertex(make_vertex(pad("yel", s, 2), kKnnSorterArea,
                             in_tokens * kKnnSortCyclesPerToken,
                             TaskVertex::Kind::kCompute));
  }
  TaskVertex green =
      make_vertex("zgrn", kKnnGreenArea, k_tokens_total, TaskVertex::Kind::kSink);
  green.hbm_ports.push_back({HbmPort::Dir::kWrite, hbm_width, k_tokens_total * 64});
  g.add_vertex(green);

  for (int b = 0; b < dist_modules; ++b) {
    int s = b * sorters / dist_modules;
    g.add_edge(make_edge(pad("bd", b, 2), pad("blu", b, 2), pad("yel", s, 2), 512,
                         share(n_tokens, dist_modules, b)));
  }
  for (int s = 0; s < sorters; ++s)
    g.add_edge(make_edge(pad("tk", s, 2), pad("yel", s, 2), "zgrn", 64,
                         share(k_tokens_total, sorters, s)));
  return g;
}

std::int64_t cnn_cut_volume_bytes(int cols) {
  if (cols < 1) throw ParseError("cnn grid needs at least one column");
  return kCnnCutBytesPerCol * cols;
}

TaskGraph gen_systolic(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ParseError("cnn grid must be at least 1x1");
  TaskGraph g("cnn-" + std::to_string(rows) + "x" + std::to_string(cols));

  // Horizontal A-relay volume: one-byte tokens, 1/kCnnSimScale of physical.
  const std::int64_t cut_tokens = cnn_cut_volume_bytes(cols) / kCnnSimScale;

  auto relay_id = [](int r, int c) { return pad("ar", r, 2) + pad("x", c, 2); };
  auto pe_id = [](int r, int c) { return pad("pe", r, 2) + pad("x", c, 2); };
  auto drain_id = [](int r, int c) { return pad("dr", r, 2) + pad("x", c, 2); };

  for (int r = 0; r < rows; ++r) {
    std::int64_t row_tokens = share(cut_tokens, rows, r);
    TaskVertex loader = make_vertex(pad("ld", r, 2), kCnnLoaderArea, row_tokens,
                                    TaskVertex::Kind::kSource);
    loader.hbm_ports.push_back(
        {HbmPort::Dir::kRead, 512, row_tokens * kCnnSimScale});
    g.add_vertex(loader);
  }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::int64_t row_tokens = share(cut_tokens, rows, r);
      g.add_vertex(make_vertex(relay_id(r, c), kCnnRelayArea, row_tokens,
                               TaskVertex::Kind::kCompute));
      TaskVertex pe = make_vertex(pe_id(r, c), kCnnPeArea, row_tokens * 3,
                                  TaskVertex::Kind::kCompute);
      if (r == 0)  // weights stream in from the HBM at the top of each column
        pe.hbm_ports.push_back({HbmPort::Dir::kRead, 512, kCnnPsumTokens * 64});
      g.add_vertex(pe);
      g.add_vertex(make_vertex(drain_id(r, c), kCnnDrainArea,
                               kCnnDrainTokensPerPe * (r + 1),
                               TaskVertex::Kind::kCompute));
    }
  for (int c = 0; c < cols; ++c) {
    TaskVertex col = make_vertex(pad("zco", c, 2), kCnnCollectorArea,
                                 kCnnDrainTokensPerPe * rows,
                                 TaskVertex::Kind::kSink);
    col.hbm_ports.push_back(
        {HbmPort::Dir::kWrite, 512, kCnnDrainTokensPerPe * rows * 64});
    g.add_vertex(col);
  }

  for (int r = 0; r < rows; ++r) {
    std::int64_t row_tokens = share(cut_tokens, rows, r);
    g.add_edge(make_edge("eld" + pad("", r, 2), pad("ld", r, 2), relay_id(r, 0),
                         512, row_tokens));
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols)
        g.add_edge(make_edge("eaa" + pad("", r, 2) + pad("x", c, 2), relay_id(r, c),
                             relay_id(r, c + 1), 8, row_tokens));
      g.add_edge(make_edge("eap" + pad("", r, 2) + pad("x", c, 2), relay_id(r, c),
                           pe_id(r, c), 512, row_tokens));
      if (r + 1 < rows)
        g.add_edge(make_edge("epp" + pad("", r, 2) + pad("x", c, 2), pe_id(r, c),
                             pe_id(r + 1, c), 512, kCnnPsumTokens));
      g.add_edge(make_edge("epd" + pad("", r, 2) + pad("x", c, 2), pe_id(r, c),
                           drain_id(r, c), 512, kCnnDrainTokensPerPe));
      if (r + 1 < rows)
        g.add_edge(make_edge("edd" + pad("", r, 2) + pad("x", c, 2), drain_id(r, c),
                             drain_id(r + 1, c), 512,
                             kCnnDrainTokensPerPe * (r + 1)));
      else
        g.add_edge(make_edge("edc" + pad("", r, 2) + pad("x", c, 2), drain_id(r, c),
                             pad("zco", c, 2), 512, kCnnDrainTokensPerPe * rows));
    }
  }
  return g;
}

}  // namespace flowplan
