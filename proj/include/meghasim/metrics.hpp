#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "meghasim/scheduler.hpp"
#include "meghasim/time.hpp"

namespace meghasim {

// A finished run broke a conservation or accounting rule.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Completion time on an infinite DC with no communication: the longest task.
double ideal_jct(const JobSpec& job);

// Nearest-rank percentile: the ceil(p*n)-th smallest value, p = 0 gives the
// minimum. Throws std::invalid_argument on empty input or p outside [0, 1].
double percentile(std::vector<double> values, double p);

struct JobMetrics {
  std::uint32_t job_id = 0;
  JobClass cls = JobClass::kShort;
  SimTime submit;
  SimTime finish;
  SimTime jct;
  SimTime ideal_jct;
  SimTime delay;
  std::uint32_t task_count = 0;
};

struct TaskMetrics {
  std::uint32_t job_id = 0;
  std::uint32_t index = 0;
  std::uint32_t worker = 0;
  SimTime tct;
  SimTime delay;
  SimTime queue_scheduler;
  SimTime comm;
  SimTime queue_worker;
};

struct DelayStats {
  std::size_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

DelayStats delay_stats(const std::vector<double>& delays);
DelayStats delay_stats(const std::vector<SimTime>& delays);

struct RunSummary {
  std::string scheduler;
  std::string config_digest;
  std::uint32_t workers = 0;
  std::size_t jobs = 0;
  std::size_t tasks = 0;
  DelayStats job_delay;
  DelayStats short_delay;
  DelayStats long_delay;
  std::uint64_t task_requests = 0;
  std::uint64_t inconsistencies = 0;
  double inconsistency_ratio = 0.0;
  SimTime makespan;
  double load = 0.0;
  // Mean per-task delay components, seconds.
  double mean_queue_scheduler = 0.0;
  double mean_comm = 0.0;
  double mean_queue_worker = 0.0;
  RunCounters counters;
};

struct RunMetrics {
  RunSummary summary;
  std::vector<JobMetrics> jobs;
  std::vector<TaskMetrics> tasks;
};

// Checks conservation (one launch, one completion per task), non-negative
// delays and exact component sums, then computes the per-job table and the
// summary. Throws InvariantViolation on any breach.
RunMetrics finalize(const RunRecord& run);

nlohmann::ordered_json summary_json(const RunSummary& s);
void write_summary(std::ostream& out, const RunSummary& s);
void write_jobs_csv(std::ostream& out, const std::vector<JobMetrics>& jobs);
void write_events_log(std::ostream& out, const std::vector<EventLogLine>& log);

}  // namespace meghasim
