// Copyright 2026 Flowplan Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end for the multi-FPGA dataflow toolchain. Exit codes:
// 0 ok, 2 input error, 3 infeasible, 4 solver timeout (incumbent emitted),
// 5 deadlock.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "flowplan/benchgen.hpp"
#include "flowplan/bundle.hpp"
#include "flowplan/dot.hpp"
#include "flowplan/errors.hpp"

namespace fp = flowplan;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fp::ParseError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fp::Error("cannot write file: " + path);
  out << text;
}

struct ClusterArgs {
  std::string cluster_file;
  int devices = 1;
  std::string topology = "chain";
  double threshold = 0.7;
  int node_size = 0;

  fp::ClusterSpec resolve() const {
    if (!cluster_file.empty()) return fp::parse_cluster(slurp(cluster_file));
    return fp::make_u55c_cluster(devices, fp::topology_kind_from_name(topology),
                                 static_cast<std::int64_t>(threshold * 1e6 + 0.5),
                                 node_size);
  }
};

void add_cluster_flags(CLI::App* cmd, ClusterArgs& args) {
  cmd->add_option("--cluster", args.cluster_file, "cluster spec JSON file");
  cmd->add_option("--devices", args.devices, "number of U55C devices");
  cmd->add_option("--topology", args.topology,
                  "chain|ring|star|mesh|hypercube|custom");
  cmd->add_option("--threshold", args.threshold, "utilization threshold T");
  cmd->add_option("--node-size", args.node_size,
                  "devices per server node (0 = single node)");
}

int run_guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const fp::DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << "\n";
    return 5;
  } catch (const fp::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const fp::CapacityError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const fp::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fp::ReferenceError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fp::SizeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-FPGA dataflow partitioning, floorplanning and simulation"};
  app.require_subcommand(1);

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate a benchmark task graph");
  gen->require_subcommand(1);
  std::string gen_out = "-";

  auto* gst = gen->add_subcommand("stencil", "iterative stencil PE chain");
  int st_iters = 64, st_pes = 15, st_width = 128;
  gst->add_option("--iters", st_iters, "stencil iterations");
  gst->add_option("--pes", st_pes, "number of PEs");
  gst->add_option("--hbm-width", st_width, "HBM port width in bits");
  gst->add_option("-o,--out", gen_out, "output file (- for stdout)");

  auto* gpr = gen->add_subcommand("pagerank", "PE star with feedback cycle");
  int pr_pes = 4;
  std::string pr_dataset = "cit-Patents";
  gpr->add_option("--pes", pr_pes, "number of PEs");
  gpr->add_option("--dataset", pr_dataset, "network name from the dataset table");
  gpr->add_option("-o,--out", gen_out, "output file");

  auto* gkn = gen->add_subcommand("knn", "distance/top-k/accumulate pipeline");
  std::int64_t kn_n = 4'194'304;
  int kn_d = 2, kn_k = 10, kn_dist = 18, kn_width = 0;
  gkn->add_option("--n", kn_n, "dataset points");
  gkn->add_option("--d", kn_d, "feature dimensions");
  gkn->add_option("--k", kn_k, "neighbors to keep");
  gkn->add_option("--dist-modules", kn_dist, "distance (blue) module count");
  gkn->add_option("--hbm-width", kn_width, "0=auto, 256 or 512");
  gkn->add_option("-o,--out", gen_out, "output file");

  auto* gcn = gen->add_subcommand("cnn", "systolic array grid");
  int cn_rows = 13, cn_cols = 12;
  gcn->add_option("--rows", cn_rows, "PE rows");
  gcn->add_option("--cols", cn_cols, "PE columns");
  gcn->add_option("-o,--out", gen_out, "output file");

  // ---- validate ----
  auto* val = app.add_subcommand("validate", "check a task graph file");
  std::string val_graph;
  val->add_option("graph", val_graph, "task graph JSON")->required();

  // ---- partition ----
  auto* part = app.add_subcommand("partition", "vertex-to-device assignment");
  std::string part_graph, part_out = "assignment.json";
  double part_tl = 60.0;
  std::string part_solver = "internal";
  std::string part_lp_out;
  ClusterArgs part_cluster;
  part->add_option("-g,--graph", part_graph, "task graph JSON")->required();
  part->add_option("-o,--out", part_out, "assignment output");
  part->add_option("--time-limit", part_tl, "solver time limit in seconds");
  part->add_option("--solver", part_solver, "internal|external");
  part->add_option("--emit-lp", part_lp_out, "also write the LP-format model");
  add_cluster_flags(part, part_cluster);

  // ---- comm-insert ----
  auto* comm = app.add_subcommand("comm-insert", "materialize cut edges");
  std::string comm_graph, comm_assign, comm_graph_out = "graph.net.json",
              comm_links_out = "links.json", comm_assign_out;
  int comm_streams = 16;
  std::int64_t comm_packet = 64;
  ClusterArgs comm_cluster;
  comm->add_option("-g,--graph", comm_graph)->required();
  comm->add_option("-a,--assignment", comm_assign)->required();
  comm->add_option("--graph-out", comm_graph_out);
  comm->add_option("--links-out", comm_links_out);
  comm->add_option("--assignment-out", comm_assign_out,
                   "extended placement (send/recv vertices)");
  comm->add_option("--port-streams", comm_streams, "streams per QSFP port");
  comm->add_option("--packet-bytes", comm_packet, "minimum transfer unit");
  add_cluster_flags(comm, comm_cluster);

  // ---- floorplan ----
  auto* floor = app.add_subcommand("floorplan", "slot assignment per device");
  std::string fl_graph, fl_assign, fl_out = "floorplan.json";
  int fl_depth = 3;
  bool fl_serial = false;
  ClusterArgs fl_cluster;
  floor->add_option("-g,--graph", fl_graph)->required();
  floor->add_option("-a,--assignment", fl_assign)->required();
  floor->add_option("-o,--out", fl_out);
  floor->add_option("--depth", fl_depth, "recursive split levels");
  floor->add_flag("--serial", fl_serial, "disable per-device parallelism");
  add_cluster_flags(floor, fl_cluster);

  // ---- hbm-bind ----
  auto* hbm = app.add_subcommand("hbm-bind", "port-to-channel binding");
  std::string hb_graph, hb_floor, hb_out = "hbm.json";
  int hb_ppc = 1;
  ClusterArgs hb_cluster;
  hbm->add_option("-g,--graph", hb_graph)->required();
  hbm->add_option("-f,--floorplan", hb_floor)->required();
  hbm->add_option("-o,--out", hb_out);
  hbm->add_option("--ports-per-channel", hb_ppc);
  add_cluster_flags(hbm, hb_cluster);

  // ---- pipeline ----
  auto* pipe = app.add_subcommand("pipeline", "crossing registers + balancing");
  std::string pp_graph, pp_floor, pp_links, pp_out = "latency.json";
  int pp_stages = 1;
  double pp_freq = 300e6;
  ClusterArgs pp_cluster;
  pipe->add_option("-g,--graph", pp_graph)->required();
  pipe->add_option("-f,--floorplan", pp_floor)->required();
  pipe->add_option("-l,--links", pp_links)->required();
  pipe->add_option("-o,--out", pp_out);
  pipe->add_option("--stages-per-crossing", pp_stages);
  pipe->add_option("--freq", pp_freq, "design frequency in Hz");
  add_cluster_flags(pipe, pp_cluster);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "discrete-event execution");
  std::string sm_graph, sm_assign, sm_floor, sm_links, sm_latency, sm_hbm,
      sm_out = "report.json", sm_trace;
  double sm_freq = 300e6;
  int sm_streams = 16;
  ClusterArgs sm_cluster;
  sim->add_option("-g,--graph", sm_graph)->required();
  sim->add_option("-a,--assignment", sm_assign)->required();
  sim->add_option("-f,--floorplan", sm_floor)->required();
  sim->add_option("-l,--links", sm_links)->required();
  sim->add_option("--latency", sm_latency)->required();
  sim->add_option("--hbm", sm_hbm);
  sim->add_option("-o,--out", sm_out);
  sim->add_option("--trace", sm_trace, "event trace file");
  sim->add_option("--freq", sm_freq);
  sim->add_option("--port-streams", sm_streams);
  add_cluster_flags(sim, sm_cluster);

  // ---- run ----
  auto* run = app.add_subcommand("run", "full pipeline into a bundle directory");
  std::string run_graph, run_out = "bundle";
  double run_tl = 60.0, run_freq = 300e6;
  int run_stages = 1, run_streams = 16, run_ppc = 1, run_depth = 3;
  bool run_serial = false, run_no_sim = false;
  ClusterArgs run_cluster;
  run->add_option("-g,--graph", run_graph)->required();
  run->add_option("-o,--out", run_out, "bundle directory");
  run->add_option("--time-limit", run_tl);
  run->add_option("--stages-per-crossing", run_stages);
  run->add_option("--port-streams", run_streams);
  run->add_option("--ports-per-channel", run_ppc);
  run->add_option("--depth", run_depth);
  run->add_option("--freq", run_freq);
  run->add_flag("--serial", run_serial, "disable stage-level parallelism");
  run->add_flag("--no-simulate", run_no_sim);
  add_cluster_flags(run, run_cluster);

  // ---- export-dot ----
  auto* xdot = app.add_subcommand("export-dot", "render a bundle as DOT");
  std::string xd_bundle, xd_out = "-";
  xdot->add_option("bundle", xd_bundle, "bundle directory")->required();
  xdot->add_option("-o,--out", xd_out);

  CLI11_PARSE(app, argc, argv);

  return run_guarded([&] {
    if (gen->parsed()) {
      fp::TaskGraph g;
      if (gst->parsed()) g = fp::gen_stencil(st_iters, st_pes, st_width);
      if (gpr->parsed()) g = fp::gen_pagerank(pr_pes, pr_dataset);
      if (gkn->parsed()) g = fp::gen_knn(kn_n, kn_d, kn_k, kn_dist, kn_width);
      if (gcn->parsed()) g = fp::gen_systolic(cn_rows, cn_cols);
      spit(gen_out, fp::serialize_task_graph(g));
      return;
    }
    if (val->parsed()) {
      auto g = fp::parse_task_graph(slurp(val_graph));
      auto diags = fp::validate_graph(g);
      for (const auto& d : diags)
        std::cout << d.path << ": " << d.message << "\n";
      if (!diags.empty()) throw fp::ParseError("graph has diagnostics");
      std::cout << "ok: " << g.vertices().size() << " vertices, "
                << g.edges().size() << " edges\n";
      return;
    }
    if (part->parsed()) {
      auto g = fp::parse_task_graph(slurp(part_graph));
      auto cluster = fp::with_network_overhead(part_cluster.resolve());
      auto problem = fp::formulate(g, cluster);
      if (!part_lp_out.empty()) spit(part_lp_out, problem.to_lp_format());
      if (part_solver != "internal" && part_solver != "external")
        throw fp::ParseError("unknown solver backend: " + part_solver);
      if (part_solver == "external")
        throw fp::ParseError(
            "no external MILP solver is configured in this build; use "
            "--emit-lp to export the model and solve it out of band");
      auto a = fp::solve(problem, part_tl);
      spit(part_out, fp::assignment_json(a));
      if (!a.certified) {
        std::cerr << "time limit reached; best incumbent emitted uncertified\n";
        std::exit(4);
      }
      return;
    }
    if (comm->parsed()) {
      auto g = fp::parse_task_graph(slurp(comm_graph));
      auto cluster = fp::with_network_overhead(comm_cluster.resolve());
      auto a = fp::parse_assignment(slurp(comm_assign));
      auto ins = fp::insert_network_vertices(g, a, cluster, comm_streams, comm_packet);
      spit(comm_graph_out, fp::serialize_task_graph(ins.graph));
      spit(comm_links_out, fp::links_json(ins.links));
      if (!comm_assign_out.empty())
        spit(comm_assign_out, fp::assignment_json(ins.placement));
      return;
    }
    if (floor->parsed()) {
      auto g = fp::parse_task_graph(slurp(fl_graph));
      auto cluster = fp::with_network_overhead(fl_cluster.resolve());
      auto a = fp::parse_assignment(slurp(fl_assign));
      auto s = fp::floorplan_all(g, a, cluster, fl_depth, !fl_serial);
      spit(fl_out, fp::floorplan_json(s));
      return;
    }
    if (hbm->parsed()) {
      auto g = fp::parse_task_graph(slurp(hb_graph));
      auto cluster = fp::with_network_overhead(hb_cluster.resolve());
      auto s = fp::parse_floorplan(slurp(hb_floor));
      std::map<std::pair<std::string, int>, int> merged;
      for (const auto& dev : cluster.devices) {
        auto b = fp::bind_hbm_channels(g, s, dev, dev.id, 1, -1, hb_ppc);
        merged.insert(b.channel_of.begin(), b.channel_of.end());
      }
      spit(hb_out, fp::hbm_json(merged));
      return;
    }
    if (pipe->parsed()) {
      auto g = fp::parse_task_graph(slurp(pp_graph));
      auto s = fp::parse_floorplan(slurp(pp_floor));
      auto links = fp::parse_links(slurp(pp_links));
      fp::PipelinedDesign d;
      d.graph = g;
      d.stages_per_crossing = pp_stages;
      d.edge_latency =
          fp::insert_crossing_registers(s, g, links, pp_stages, pp_freq);
      d.balancing_fifos = fp::balance_reconvergent(g, d.edge_latency);
      spit(pp_out, fp::latency_json(d));
      return;
    }
    if (sim->parsed()) {
      fp::PipelinedDesign d;
      d.graph = fp::parse_task_graph(slurp(sm_graph));
      d.placement = fp::parse_assignment(slurp(sm_assign));
      d.slots = fp::parse_floorplan(slurp(sm_floor));
      d.links = fp::parse_links(slurp(sm_links));
      fp::parse_latency(slurp(sm_latency), d);
      if (!sm_hbm.empty()) d.hbm_channel = fp::parse_hbm(slurp(sm_hbm));
      auto cluster = fp::with_network_overhead(sm_cluster.resolve());
      fp::SimConfig cfg;
      cfg.frequency_hz = sm_freq;
      cfg.port_streams = sm_streams;
      std::ofstream trace_file;
      if (!sm_trace.empty()) {
        trace_file.open(sm_trace, std::ios::binary);
        cfg.trace = true;
        cfg.trace_out = &trace_file;
      }
      auto rep = fp::simulate(d, cluster, cfg);
      spit(sm_out, fp::report_json(rep));
      return;
    }
    if (run->parsed()) {
      auto g = fp::parse_task_graph(slurp(run_graph));
      auto cluster = run_cluster.resolve();
      fp::PipelineOptions opt;
      opt.time_limit_seconds = run_tl;
      opt.stages_per_crossing = run_stages;
      opt.streams_per_port = run_streams;
      opt.ports_per_channel = run_ppc;
      opt.floorplan_depth = run_depth;
      opt.frequency_hz = run_freq;
      opt.parallel = !run_serial;
      opt.simulate = !run_no_sim;
      std::filesystem::create_directories(run_out);
      try {
        auto bundle = fp::run_pipeline(g, cluster, opt);
        fp::write_bundle(bundle, run_out);
        std::filesystem::remove(std::filesystem::path(run_out) / "FAILED_AT");
        if (!bundle.assignment.certified) {
          std::cerr << "partition: time limit reached, incumbent bundle written\n";
          std::exit(4);
        }
      } catch (...) {
        // Record which stage died; the partial bundle (if any) stays behind.
        std::exception_ptr ep = std::current_exception();
        std::string stage = "pipeline";
        try {
          std::rethrow_exception(ep);
        } catch (const fp::DeadlockError&) {
          stage = "simulate";
        } catch (const fp::CapacityError&) {
          stage = "floorplan";
        } catch (const fp::InfeasibleError&) {
          stage = "partition";
        } catch (...) {
        }
        std::ofstream marker(std::filesystem::path(run_out) / "FAILED_AT");
        marker << stage << "\n";
        std::cerr << "failed at stage: " << stage << "\n";
        std::rethrow_exception(ep);
      }
      return;
    }
    if (xdot->parsed()) {
      fp::PipelinedDesign d;
      auto dir = std::filesystem::path(xd_bundle);
      if (!std::filesystem::exists(dir / "floorplan.json"))
        throw fp::ParseError("bundle incomplete: missing floorplan.json (run "
                             "the pipeline through the floorplan stage first)");
      d.graph = fp::parse_task_graph(slurp((dir / "graph.net.json").string()));
      d.placement = fp::parse_assignment(slurp((dir / "assignment.json").string()));
      d.slots = fp::parse_floorplan(slurp((dir / "floorplan.json").string()));
      d.links = fp::parse_links(slurp((dir / "links.json").string()));
      if (std::filesystem::exists(dir / "latency.json"))
        fp::parse_latency(slurp((dir / "latency.json").string()), d);
      spit(xd_out, fp::export_dot(d));
      return;
    }
  });
}
