#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace meghasim {

enum class JobClass { kShort, kLong };

const char* to_string(JobClass c);

struct TaskSpec {
  std::uint32_t job_id = 0;
  std::uint32_t index = 0;
  double duration = 0.0;  // seconds, > 0
};

struct JobSpec {
  std::uint32_t job_id = 0;
  double submit_time = 0.0;  // seconds
  std::vector<TaskSpec> tasks;

  double mean_duration() const;
  double max_duration() const;
  double total_duration() const;
};

using Workload = std::vector<JobSpec>;

struct WorkloadStats {
  std::size_t job_count = 0;
  std::size_t task_count = 0;
  double min_iat = 0.0;
  double max_iat = 0.0;
  double mean_iat = 0.0;
  double resource_seconds = 0.0;
};

class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Trace format, one job per line:
//   <submit_time> <num_tasks> <dur_1> ... <dur_num_tasks>
// Blank lines are skipped and '#' starts a comment.
Workload parse_trace(std::istream& in);
Workload parse_trace_file(const std::string& path);
void serialize_trace(const Workload& jobs, std::ostream& out);

// Constant inter-arrival time (tasks_per_job * duration) / (load * dc_size).
double fixed_load_iat(std::uint32_t tasks_per_job, double task_duration, double load,
                      std::uint64_t dc_size);

Workload generate_fixed_load(std::uint32_t num_jobs, std::uint32_t tasks_per_job,
                             double task_duration, double load, std::uint64_t dc_size,
                             std::uint64_t seed);

// Heterogeneous short/long mix with Poisson arrivals tuned to the target load.
struct MixedWorkloadParams {
  std::uint32_t jobs = 500;
  double short_fraction = 0.8;
  double short_duration_lo = 1.0, short_duration_hi = 10.0;
  double long_duration_lo = 91.0, long_duration_hi = 100.0;
  std::uint32_t short_tasks_lo = 1, short_tasks_hi = 40;
  std::uint32_t long_tasks_lo = 5, long_tasks_hi = 40;
  double load = 0.8;
};
Workload generate_mixed(const MixedWorkloadParams& p, std::uint64_t dc_size, std::uint64_t seed);

Workload poissonize(const Workload& jobs, double mean_iat, std::uint64_t seed);
Workload downsample(const Workload& jobs, std::uint32_t factor, std::uint64_t seed);

double compute_load(const Workload& jobs, std::uint64_t dc_size);
JobClass classify_job(const JobSpec& job, double threshold);
WorkloadStats workload_stats(const Workload& jobs);

// Renumbers job ids 0..n-1 and task ids to match; used after sampling.
void renumber(Workload& jobs);

}  // namespace meghasim
