#include "meghasim/workload.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "meghasim/random.hpp"

namespace meghasim {

const char* to_string(JobClass c) { return c == JobClass::kShort ? "short" : "long"; }

double JobSpec::mean_duration() const {
  return tasks.empty() ? 0.0 : total_duration() / static_cast<double>(tasks.size());
}

double JobSpec::max_duration() const {
  double m = 0.0;
  for (const auto& t : tasks) m = std::max(m, t.duration);
  return m;
}

double JobSpec::total_duration() const {
  double s = 0.0;
  for (const auto& t : tasks) s += t.duration;
  return s;
}

namespace {

bool parse_double(std::string_view tok, double& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size() && std::isfinite(out);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

void append_double(std::string& s, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  s.append(buf, ptr);
}

}  // namespace

Workload parse_trace(std::istream& in) {
  Workload jobs;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 2) throw TraceParseError(lineno, "expected <submit_time> <num_tasks> <durations...>");

    double submit = 0.0;
    if (!parse_double(toks[0], submit) || submit < 0.0)
      throw TraceParseError(lineno, "invalid submit time '" + std::string(toks[0]) + "'");
    std::uint64_t n = 0;
    auto [p, ec] = std::from_chars(toks[1].data(), toks[1].data() + toks[1].size(), n);
    if (ec != std::errc() || p != toks[1].data() + toks[1].size() || n == 0 || n > UINT32_MAX)
      throw TraceParseError(lineno, "invalid task count '" + std::string(toks[1]) + "'");
    if (toks.size() - 2 != n)
      throw TraceParseError(lineno, "expected " + std::to_string(n) + " durations, found " +
                                        std::to_string(toks.size() - 2));
    if (!jobs.empty() && submit < jobs.back().submit_time)
      throw TraceParseError(lineno, "submit times must be nondecreasing");

    JobSpec job;
    job.job_id = static_cast<std::uint32_t>(jobs.size());
    job.submit_time = submit;
    job.tasks.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      double d = 0.0;
      if (!parse_double(toks[2 + k], d))
        throw TraceParseError(lineno, "invalid duration '" + std::string(toks[2 + k]) + "'");
      if (d <= 0.0) throw TraceParseError(lineno, "task durations must be positive");
      job.tasks.push_back(TaskSpec{job.job_id, static_cast<std::uint32_t>(k), d});
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

Workload parse_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file '" + path + "'");
  try {
    return parse_trace(in);
  } catch (const TraceParseError& e) {
    throw std::runtime_error(path + ":" + e.what());
  }
}

void serialize_trace(const Workload& jobs, std::ostream& out) {
  std::string line;
  for (const auto& j : jobs) {
    line.clear();
    append_double(line, j.submit_time);
    line += ' ';
    line += std::to_string(j.tasks.size());
    for (const auto& t : j.tasks) {
      line += ' ';
      append_double(line, t.duration);
    }
    line += '\n';
    out << line;
  }
}

double fixed_load_iat(std::uint32_t tasks_per_job, double task_duration, double load,
                      std::uint64_t dc_size) {
  if (!(load > 0.0)) throw std::invalid_argument("load must be positive");
  if (load > 1.0) throw std::invalid_argument("load > 1 is not supported");
  if (tasks_per_job == 0 || dc_size == 0 || !(task_duration > 0.0))
    throw std::invalid_argument("tasks_per_job, task_duration and dc_size must be positive");
  return (static_cast<double>(tasks_per_job) * task_duration) / (load * static_cast<double>(dc_size));
}

Workload generate_fixed_load(std::uint32_t num_jobs, std::uint32_t tasks_per_job,
                             double task_duration, double load, std::uint64_t dc_size,
                             std::uint64_t /*seed*/) {
  if (num_jobs == 0) throw std::invalid_argument("num_jobs must be positive");
  double iat = fixed_load_iat(tasks_per_job, task_duration, load, dc_size);
  Workload jobs(num_jobs);
  for (std::uint32_t k = 0; k < num_jobs; ++k) {
    auto& j = jobs[k];
    j.job_id = k;
    j.submit_time = static_cast<double>(k) * iat;
    j.tasks.resize(tasks_per_job);
    for (std::uint32_t t = 0; t < tasks_per_job; ++t) j.tasks[t] = TaskSpec{k, t, task_duration};
  }
  return jobs;
}

Workload generate_mixed(const MixedWorkloadParams& p, std::uint64_t dc_size, std::uint64_t seed) {
  if (p.jobs == 0 || dc_size == 0) throw std::invalid_argument("jobs and dc_size must be positive");
  if (!(p.load > 0.0) || p.load > 1.0) throw std::invalid_argument("load must be in (0, 1]");
  if (p.short_fraction < 0.0 || p.short_fraction > 1.0)
    throw std::invalid_argument("short_fraction must be in [0, 1]");
  if (!(p.short_duration_lo > 0.0) || p.short_duration_hi < p.short_duration_lo ||
      !(p.long_duration_lo > 0.0) || p.long_duration_hi < p.long_duration_lo ||
      p.short_tasks_lo == 0 || p.short_tasks_hi < p.short_tasks_lo || p.long_tasks_lo == 0 ||
      p.long_tasks_hi < p.long_tasks_lo)
    throw std::invalid_argument("invalid mixed workload ranges");

  Rng rng = Rng::derive(seed, 0x6d697865);
  Workload jobs(p.jobs);
  double demand = 0.0;
  for (std::uint32_t k = 0; k < p.jobs; ++k) {
    bool is_short = rng.uniform() < p.short_fraction;
    auto lo_n = is_short ? p.short_tasks_lo : p.long_tasks_lo;
    auto hi_n = is_short ? p.short_tasks_hi : p.long_tasks_hi;
    auto n = lo_n + static_cast<std::uint32_t>(rng.below(hi_n - lo_n + 1));
    double lo = is_short ? p.short_duration_lo : p.long_duration_lo;
    double hi = is_short ? p.short_duration_hi : p.long_duration_hi;
    auto& j = jobs[k];
    j.job_id = k;
    j.tasks.resize(n);
    for (std::uint32_t t = 0; t < n; ++t) {
      // Millisecond-granular durations keep traces readable.
      double d = std::round(rng.uniform(lo, hi) * 1000.0) / 1000.0;
      j.tasks[t] = TaskSpec{k, t, std::max(d, 0.001)};
      demand += j.tasks[t].duration;
    }
  }
  double mean_iat = demand / static_cast<double>(p.jobs) / (p.load * static_cast<double>(dc_size));
  Rng arrivals = Rng::derive(seed, 0x61727269);
  double t = 0.0;
  for (auto& j : jobs) {
    j.submit_time = t;
    t += arrivals.exponential(mean_iat);
  }
  return jobs;
}

Workload poissonize(const Workload& jobs, double mean_iat, std::uint64_t seed) {
  if (!(mean_iat > 0.0)) throw std::invalid_argument("mean_iat must be positive");
  Rng rng = Rng::derive(seed, 0x706f6973);
  Workload out = jobs;
  double t = 0.0;
  for (auto& j : out) {
    t += rng.exponential(mean_iat);
    j.submit_time = t;
  }
  return out;
}

Workload downsample(const Workload& jobs, std::uint32_t factor, std::uint64_t seed) {
  if (factor < 1) throw std::invalid_argument("downsample factor must be >= 1");
  if (factor == 1 || jobs.empty()) return jobs;
  auto n = static_cast<std::uint32_t>(jobs.size());
  std::uint32_t keep = (n + factor - 1) / factor;
  Rng rng = Rng::derive(seed, 0x646f776e);
  auto picks = rng.sample(n, keep);
  std::sort(picks.begin(), picks.end());
  Workload out;
  out.reserve(keep);
  for (auto i : picks) out.push_back(jobs[i]);
  renumber(out);
  return out;
}

void renumber(Workload& jobs) {
  for (std::uint32_t k = 0; k < jobs.size(); ++k) {
    jobs[k].job_id = k;
    for (auto& t : jobs[k].tasks) t.job_id = k;
  }
}

double compute_load(const Workload& jobs, std::uint64_t dc_size) {
  if (jobs.empty()) throw std::invalid_argument("compute_load: empty workload");
  if (dc_size == 0) throw std::invalid_argument("compute_load: dc_size must be positive");
  double demand = 0.0;
  for (const auto& j : jobs) demand += j.total_duration();
  double first = jobs.front().submit_time;
  double last = jobs.back().submit_time;
  double span = 0.0;
  if (jobs.size() > 1 && last > first) {
    double mean_iat = (last - first) / static_cast<double>(jobs.size() - 1);
    span = (last - first) + mean_iat;
  } else {
    span = demand;  // zero-span fallback
  }
  return demand / span / static_cast<double>(dc_size);
}

JobClass classify_job(const JobSpec& job, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("classification threshold must be positive");
  return job.mean_duration() > threshold ? JobClass::kLong : JobClass::kShort;
}

WorkloadStats workload_stats(const Workload& jobs) {
  WorkloadStats s;
  s.job_count = jobs.size();
  for (const auto& j : jobs) {
    s.task_count += j.tasks.size();
    s.resource_seconds += j.total_duration();
  }
  if (jobs.size() > 1) {
    s.min_iat = INFINITY;
    double sum = 0.0;
    for (std::size_t k = 1; k < jobs.size(); ++k) {
      double iat = jobs[k].submit_time - jobs[k - 1].submit_time;
      s.min_iat = std::min(s.min_iat, iat);
      s.max_iat = std::max(s.max_iat, iat);
      sum += iat;
    }
    s.mean_iat = sum / static_cast<double>(jobs.size() - 1);
  }
  return s;
}

}  // namespace meghasim
