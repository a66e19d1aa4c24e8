#include "meghasim/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace meghasim {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` threads; rethrows the first
// failure by index so errors are reported deterministically.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned t = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void write_file(const std::filesystem::path& p, const std::string& what, auto&& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + what + " to '" + p.string() + "'");
  body(out);
  if (!out) throw std::runtime_error("error writing '" + p.string() + "'");
}

double factor(double v, double ref) {
  if (ref > 0.0) return v / ref;
  return v == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

std::string format_fixed(double v, int decimals) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

RunResult execute(const RunConfig& c, const Topology& topo, const Workload& w) {
  RunResult r{c, topo, {}, {}, {}, 0.0};
  auto params = to_params(c);
  auto kind = parse_scheduler(c.scheduler);
  auto t0 = std::chrono::steady_clock::now();
  RunRecord rec;
  try {
    rec = simulate(kind, params, topo, w);
  } catch (const SimulationError& e) {
    throw InvariantViolation(std::string(to_string(kind)) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(to_string(kind)) + ": " + e.what());
  }
  r.metrics = finalize(rec);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.metrics.summary.config_digest = config_digest(c);
  r.metrics.summary.load = compute_load(w, topo.total_workers());
  r.log = std::move(rec.log);
  r.wfq_sequences = std::move(rec.wfq_sequences);
  return r;
}

RunResult execute(const RunConfig& c) {
  Topology topo = c.topology.resolve();
  return execute(c, topo, build_workload(c, topo));
}

void write_report(const std::string& dir, const RunResult& r) {
  namespace fs = std::filesystem;
  fs::path d(dir);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
  write_file(d / "summary.json", "summary", [&](std::ostream& o) { write_summary(o, r.metrics.summary); });
  write_file(d / "jobs.csv", "job table", [&](std::ostream& o) { write_jobs_csv(o, r.metrics.jobs); });
  write_file(d / "config.json", "config echo", [&](std::ostream& o) { o << to_json(r.config).dump(2) << '\n'; });
  if (r.config.event_log)
    write_file(d / "events.log", "event log", [&](std::ostream& o) { write_events_log(o, r.log); });
}

std::vector<RunResult> compare(const std::vector<RunConfig>& configs, unsigned threads) {
  if (configs.empty()) throw ConfigError("compare needs at least one config");
  const auto& first = configs.front();
  Topology topo = first.topology.resolve();
  for (std::size_t k = 1; k < configs.size(); ++k) {
    const auto& c = configs[k];
    if (!(c.workload == first.workload))
      throw ConfigError("compare: config " + std::to_string(k + 1) + " uses a different workload");
    if (c.seed != first.seed) throw ConfigError("compare: config " + std::to_string(k + 1) + " uses a different seed");
    Topology t = c.topology.resolve();
    if (t.gm_count() != topo.gm_count() || t.lm_count() != topo.lm_count() ||
        t.workers_per_partition() != topo.workers_per_partition())
      throw ConfigError("compare: config " + std::to_string(k + 1) + " uses a different topology");
  }
  const Workload w = build_workload(first, topo);
  std::vector<RunResult> out(configs.size());
  parallel_for(configs.size(), threads, [&](std::size_t i) { out[i] = execute(configs[i], topo, w); });
  return out;
}

void write_compare_csv(std::ostream& out, const std::vector<RunResult>& rows) {
  std::size_t ref = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].metrics.summary.scheduler == "megha") {
      ref = k;
      break;
    }
  }
  out << "scheduler,workers,jobs,mean_delay,median_delay,p95_delay,short_median_delay,long_median_delay,"
         "inconsistency_ratio,mean_factor,median_factor,p95_factor\n";
  if (rows.empty()) return;
  const auto& r0 = rows[ref].metrics.summary.job_delay;
  for (const auto& r : rows) {
    const auto& s = r.metrics.summary;
    out << s.scheduler << ',' << s.workers << ',' << s.jobs << ',' << format_fixed(s.job_delay.mean, 9) << ','
        << format_fixed(s.job_delay.median, 9) << ',' << format_fixed(s.job_delay.p95, 9) << ','
        << format_fixed(s.short_delay.median, 9) << ',' << format_fixed(s.long_delay.median, 9) << ','
        << format_fixed(s.inconsistency_ratio, 6) << ',' << format_fixed(factor(s.job_delay.mean, r0.mean), 4)
        << ',' << format_fixed(factor(s.job_delay.median, r0.median), 4) << ','
        << format_fixed(factor(s.job_delay.p95, r0.p95), 4) << '\n';
  }
}

std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<double>& loads,
                            const std::vector<std::uint64_t>& sizes, unsigned threads) {
  if (loads.empty()) throw ConfigError("sweep: loads list is empty");
  if (sizes.empty()) throw ConfigError("sweep: sizes list is empty");
  if (base.workload.source != WorkloadConfig::Source::kSynthetic)
    throw ConfigError("sweep: the base config needs a synthetic workload block");
  for (double l : loads)
    if (!(l > 0.0) || l > 1.0) throw ConfigError("sweep: load " + format_fixed(l, 3) + " outside (0, 1]");
  for (auto s : sizes)
    if (s == 0) throw ConfigError("sweep: sizes must be positive");
  std::vector<SweepRow> rows(loads.size() * sizes.size());
  parallel_for(rows.size(), threads, [&](std::size_t i) {
    RunConfig c = base;
    c.workload.synthetic.load = loads[i % loads.size()];
    c.topology = TopologyConfig{0, 0, 0, sizes[i / loads.size()]};
    auto r = execute(c);
    const auto& s = r.metrics.summary;
    rows[i] = SweepRow{c.workload.synthetic.load, r.topology.total_workers(), s.job_delay.median,
                       s.job_delay.p95, s.job_delay.mean, s.inconsistency_ratio};
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "load,dc_size,median_delay,p95_delay,inconsistency_ratio\n";
  for (const auto& r : rows) {
    out << format_fixed(r.load, 4) << ',' << r.dc_size << ',' << format_fixed(r.median_delay, 9) << ','
        << format_fixed(r.p95_delay, 9) << ',' << format_fixed(r.inconsistency_ratio, 6) << '\n';
  }
}

}  // namespace meghasim
