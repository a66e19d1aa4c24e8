// meghasim: run, compare and sweep scheduler simulations; inspect and
// generate trace files.
//
// Exit codes: 0 success, 1 usage or config error, 2 invariant violation.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "meghasim/config.hpp"
#include "meghasim/runner.hpp"

using namespace meghasim;

namespace {

struct Overrides {
  std::string config;
  std::string scheduler;
  std::uint64_t seed = 0;
  std::uint64_t workers = 0;
  bool event_log = false;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_scheduler = true) {
  cmd->add_option("-c,--config", o.config, "JSON config file (defaults apply when omitted)");
  if (with_scheduler) cmd->add_option("-s,--scheduler", o.scheduler, "megha | sparrow | eagle | pigeon");
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("-w,--workers", o.workers, "override topology with a target worker count");
  cmd->add_flag("--event-log", o.event_log, "also write events.log");
}

// Flags win over the file, the file wins over built-in defaults.
RunConfig load_with(const Overrides& o, const std::string& config_path) {
  RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (!o.scheduler.empty()) {
    try {
      parse_scheduler(o.scheduler);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.scheduler = o.scheduler;
  }
  if (o.seed != 0) c.seed = o.seed;
  if (o.workers != 0) c.topology = TopologyConfig{0, 0, 0, o.workers};
  if (o.event_log) c.event_log = true;
  return c;
}

void print_summary(const RunResult& r) {
  const auto& s = r.metrics.summary;
  std::cout << s.scheduler << ": " << s.jobs << " jobs, " << s.tasks << " tasks on " << s.workers << " workers ("
            << r.topology.gm_count() << " GM x " << r.topology.lm_count() << " LM x "
            << r.topology.workers_per_partition() << ")\n"
            << "  load " << format_fixed(s.load, 4) << ", job delay median " << format_fixed(s.job_delay.median, 6)
            << " s, p95 " << format_fixed(s.job_delay.p95, 6) << " s, mean " << format_fixed(s.job_delay.mean, 6)
            << " s\n"
            << "  inconsistency ratio " << format_fixed(s.inconsistency_ratio, 6) << ", makespan "
            << format_seconds(s.makespan) << " s, wall " << format_fixed(r.wall_seconds, 3) << " s\n";
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator for Megha, Sparrow, Eagle and Pigeon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "meghasim 0.1.0");

  // run
  Overrides run_o;
  std::string run_out = "out";
  auto* run = app.add_subcommand("run", "simulate one config and write a report");
  add_overrides(run, run_o);
  run->add_option("-o,--out", run_out, "output directory")->capture_default_str();

  // compare
  Overrides cmp_o;
  std::vector<std::string> cmp_configs;
  std::string cmp_schedulers;
  std::string cmp_out = "out";
  unsigned cmp_threads = 1;
  auto* cmp = app.add_subcommand("compare", "run several schedulers on one shared workload");
  cmp->add_option("-c,--config", cmp_configs, "config files; all must share workload, seed and topology");
  cmp->add_option("--schedulers", cmp_schedulers, "comma list, each run with the single config given");
  cmp->add_option("--seed", cmp_o.seed, "override the seed of every config");
  cmp->add_option("-w,--workers", cmp_o.workers, "override topology with a target worker count");
  cmp->add_option("-o,--out", cmp_out, "output directory")->capture_default_str();
  cmp->add_option("-j,--threads", cmp_threads, "parallel runs")->capture_default_str();

  // sweep
  Overrides sw_o;
  std::vector<double> sw_loads;
  std::vector<std::uint64_t> sw_sizes;
  std::string sw_out = "out";
  unsigned sw_threads = 1;
  auto* sw = app.add_subcommand("sweep", "one run per (load, DC size) over a synthetic workload");
  add_overrides(sw, sw_o);
  sw->add_option("--loads", sw_loads, "loads in (0, 1]")->delimiter(',')->required();
  sw->add_option("--sizes", sw_sizes, "target worker counts")->delimiter(',')->required();
  sw->add_option("-o,--out", sw_out, "output directory")->capture_default_str();
  sw->add_option("-j,--threads", sw_threads, "parallel runs")->capture_default_str();

  // trace
  auto* trace = app.add_subcommand("trace", "trace file utilities");
  trace->require_subcommand(1);
  std::string stats_file;
  std::uint64_t stats_workers = 0;
  auto* stats = trace->add_subcommand("stats", "print workload statistics");
  stats->add_option("file", stats_file, "trace file")->required();
  stats->add_option("-w,--workers", stats_workers, "also report the load on a DC of this size");

  std::string synth_kind = "fixed", synth_file;
  std::uint32_t synth_jobs = 200, synth_tasks = 100;
  double synth_duration = 1.0, synth_load = 0.5, synth_poisson = 0.0;
  std::uint64_t synth_workers = 1000, synth_seed = 1;
  auto* synth = trace->add_subcommand("synth", "write a generated trace file");
  synth->add_option("--kind", synth_kind, "fixed | mixed")->check(CLI::IsMember({"fixed", "mixed"}))->capture_default_str();
  synth->add_option("--jobs", synth_jobs, "number of jobs")->capture_default_str();
  synth->add_option("--tasks-per-job", synth_tasks, "tasks per job (fixed)")->capture_default_str();
  synth->add_option("--duration", synth_duration, "task duration in seconds (fixed)")->capture_default_str();
  synth->add_option("--load", synth_load, "target load in (0, 1]")->capture_default_str();
  synth->add_option("--workers", synth_workers, "DC size the load refers to")->capture_default_str();
  synth->add_option("--poisson", synth_poisson, "replace arrivals with a Poisson process of this mean IAT (s)");
  synth->add_option("--seed", synth_seed, "RNG seed")->capture_default_str();
  synth->add_option("-o,--out", synth_file, "output trace file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      auto cfg = load_with(run_o, run_o.config);
      auto r = execute(cfg);
      write_report(run_out, r);
      print_summary(r);
      std::cout << "  report written to " << run_out << "\n";
    } else if (*cmp) {
      std::vector<RunConfig> configs;
      if (!cmp_schedulers.empty()) {
        if (cmp_configs.size() > 1) throw ConfigError("--schedulers takes at most one --config");
        for (const auto& s : split(cmp_schedulers)) {
          Overrides o = cmp_o;
          o.scheduler = s;
          configs.push_back(load_with(o, cmp_configs.empty() ? "" : cmp_configs.front()));
        }
      } else {
        if (cmp_configs.empty()) throw ConfigError("compare needs --config files or --schedulers");
        for (const auto& path : cmp_configs) configs.push_back(load_with(cmp_o, path));
      }
      auto rows = compare(configs, cmp_threads);
      std::filesystem::create_directories(cmp_out);
      std::map<std::string, int> seen;
      for (const auto& r : rows) {
        std::string name = r.metrics.summary.scheduler;
        if (int n = seen[name]++; n > 0) name += "_" + std::to_string(n + 1);
        write_report((std::filesystem::path(cmp_out) / name).string(), r);
        print_summary(r);
      }
      std::ofstream csv(std::filesystem::path(cmp_out) / "compare.csv", std::ios::binary);
      write_compare_csv(csv, rows);
      write_compare_csv(std::cout, rows);
    } else if (*sw) {
      auto cfg = load_with(sw_o, sw_o.config);
      auto rows = sweep(cfg, sw_loads, sw_sizes, sw_threads);
      std::filesystem::create_directories(sw_out);
      std::ofstream csv(std::filesystem::path(sw_out) / "sweep.csv", std::ios::binary);
      write_sweep_csv(csv, rows);
      std::ofstream echo(std::filesystem::path(sw_out) / "config.json", std::ios::binary);
      echo << to_json(cfg).dump(2) << '\n';
      write_sweep_csv(std::cout, rows);
    } else if (*stats) {
      Workload w;
      try {
        w = parse_trace_file(stats_file);
      } catch (const std::runtime_error& e) {
        throw ConfigError(e.what());
      }
      auto s = workload_stats(w);
      std::cout << "jobs            " << s.job_count << "\n"
                << "tasks           " << s.task_count << "\n"
                << "iat min/mean/max " << format_fixed(s.min_iat, 6) << " / " << format_fixed(s.mean_iat, 6)
                << " / " << format_fixed(s.max_iat, 6) << " s\n"
                << "resource-seconds " << format_fixed(s.resource_seconds, 3) << "\n";
      if (stats_workers) std::cout << "load            " << format_fixed(compute_load(w, stats_workers), 4) << "\n";
    } else if (*synth) {
      Workload w;
      try {
        if (synth_kind == "fixed") {
          w = generate_fixed_load(synth_jobs, synth_tasks, synth_duration, synth_load, synth_workers, synth_seed);
        } else {
          MixedWorkloadParams p;
          p.jobs = synth_jobs;
          p.load = synth_load;
          w = generate_mixed(p, synth_workers, synth_seed);
        }
        if (synth_poisson > 0.0) w = poissonize(w, synth_poisson, synth_seed);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::ofstream out(synth_file, std::ios::binary);
      if (!out) throw ConfigError("cannot write '" + synth_file + "'");
      serialize_trace(w, out);
      std::cout << "wrote " << w.size() << " jobs to " << synth_file << "\n";
    }
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const SimulationError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
