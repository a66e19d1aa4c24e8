#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "meghasim/cluster.hpp"
#include "meghasim/config.hpp"
#include "meghasim/metrics.hpp"
#include "meghasim/scheduler.hpp"

namespace meghasim {

struct RunResult {
  RunConfig config;
  Topology topology{1, 1, 1};
  RunMetrics metrics;
  std::vector<EventLogLine> log;
  std::vector<std::string> wfq_sequences;
  double wall_seconds = 0.0;
};

// Simulates and finalizes. Simulation errors surface as InvariantViolation.
RunResult execute(const RunConfig& c, const Topology& topo, const Workload& w);
RunResult execute(const RunConfig& c);

// Writes summary.json, jobs.csv, config.json and, when enabled, events.log.
void write_report(const std::string& dir, const RunResult& r);

// All configs must agree on workload, seed and topology; the workload is
// generated once and shared by every run. Rows come back in input order.
std::vector<RunResult> compare(const std::vector<RunConfig>& configs, unsigned threads = 1);
// Factor columns are relative to the megha row, or the first row without one.
void write_compare_csv(std::ostream& out, const std::vector<RunResult>& rows);

struct SweepRow {
  double load = 0.0;
  std::uint64_t dc_size = 0;  // resolved worker count
  double median_delay = 0.0;
  double p95_delay = 0.0;
  double mean_delay = 0.0;
  double inconsistency_ratio = 0.0;
};

// One run per (load, size); sizes are target worker counts. Requires a
// synthetic workload in the base config.
std::vector<SweepRow> sweep(const RunConfig& base, const std::vector<double>& loads,
                            const std::vector<std::uint64_t>& sizes, unsigned threads = 1);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

std::string format_fixed(double v, int decimals);

}  // namespace meghasim
