// Command-line front end: builds the platform from a config file and runs
// one experiment.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "nvsim/harness/config.hpp"
#include "nvsim/harness/experiments.hpp"

namespace fs = std::filesystem;
using namespace nvsim;

namespace {

struct Common {
  std::string config;
  std::string network;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--network", c.network, "network description (overrides platform.network)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output CSV path (overrides platform.output)");
  cmd->add_option("--seed", c.seed, "host scheduling seed");
  cmd->add_option("--set", c.overrides, "parameter override, section.key=value");
}

harness::ExperimentConfig resolve(const Common& c) {
  harness::ExperimentConfig cfg = c.config.empty() ? harness::ExperimentConfig{} : harness::load_config(c.config);
  for (const std::string& o : c.overrides) harness::apply_override(cfg, o);
  if (!c.network.empty()) cfg.network = c.network;
  if (!c.out.empty()) cfg.output = c.out;
  if (c.seed) cfg.seed = *c.seed;
  if (cfg.network.empty()) throw std::invalid_argument("no network: pass --network or set platform.network");
  harness::validate(cfg);
  return cfg;
}

void write(const harness::ExperimentConfig& cfg, const std::string& experiment, const harness::CsvTable& t) {
  if (cfg.output.empty()) {
    harness::write_csv(t, std::cout);
    return;
  }
  if (cfg.output.has_parent_path()) fs::create_directories(cfg.output.parent_path());
  harness::emit_stats(t, cfg.output);
  harness::emit_meta(cfg, experiment, cfg.output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-memory accelerator platform simulator"};
  app.require_subcommand(0, 1);
  Common fps_o, sweep_o, intf_o, trace_o;
  auto* fps = app.add_subcommand("fps", "frame time and throughput of one network pass");
  auto* sweep = app.add_subcommand("llc-sweep", "accelerator speedup over LLC capacity and block size");
  auto* intf = app.add_subcommand("interference", "accelerator slowdown under BwWrite co-runners");
  auto* trace = app.add_subcommand("dump-trace", "accelerator memory transactions of one run");
  add_common(fps, fps_o);
  add_common(sweep, sweep_o);
  add_common(intf, intf_o);
  add_common(trace, trace_o);
  bool list_keys = false;
  app.add_flag("--list-keys", list_keys, "print every configurable parameter and exit");

  CLI11_PARSE(app, argc, argv);
  if (list_keys) {
    for (const std::string& k : harness::config_keys()) std::cout << k << "\n";
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*fps) {
      const auto cfg = resolve(fps_o);
      const auto net = workload::load_network(cfg.network);
      const harness::FpsReport r = harness::run_fps(cfg, net);
      harness::print_fps(r, std::cout);
      if (!cfg.output.empty()) write(cfg, "fps", harness::fps_layers_csv(r, net));
    } else if (*sweep) {
      const auto cfg = resolve(sweep_o);
      write(cfg, "llc-sweep", harness::run_llc_sweep(cfg, workload::load_network(cfg.network)));
    } else if (*intf) {
      const auto cfg = resolve(intf_o);
      write(cfg, "interference", harness::run_interference(cfg, workload::load_network(cfg.network)));
    } else if (*trace) {
      const auto cfg = resolve(trace_o);
      write(cfg, "dump-trace", harness::dump_trace(cfg, workload::load_network(cfg.network)));
    }
  } catch (const std::exception& e) {
    std::cerr << "nvsim: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
