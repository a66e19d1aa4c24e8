#include "meghasim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace meghasim {

double ideal_jct(const JobSpec& job) {
  if (job.tasks.empty()) throw std::invalid_argument("ideal_jct: job has no tasks");
  return job.max_duration();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty set");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile fraction must be in [0, 1]");
  const auto n = values.size();
  // 1e-9 keeps p*n that should be an integer (0.95*100) from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

DelayStats delay_stats(const std::vector<double>& delays) {
  DelayStats s;
  s.count = delays.size();
  if (delays.empty()) return s;
  double sum = 0.0;
  for (double d : delays) sum += d;
  s.mean = sum / static_cast<double>(delays.size());
  s.median = percentile(delays, 0.5);
  s.p95 = percentile(delays, 0.95);
  s.max = *std::max_element(delays.begin(), delays.end());
  return s;
}

DelayStats delay_stats(const std::vector<SimTime>& delays) {
  std::vector<double> secs;
  secs.reserve(delays.size());
  std::int64_t sum = 0;
  for (auto d : delays) {
    secs.push_back(d.to_seconds());
    sum += d.count();
  }
  DelayStats s = delay_stats(secs);
  // Integer sum keeps the mean free of accumulated rounding.
  if (!delays.empty())
    s.mean = static_cast<double>(sum) / static_cast<double>(delays.size()) / SimTime::kTicksPerSecond;
  return s;
}

namespace {

std::string task_name(std::uint32_t job, std::uint32_t index) {
  return "task " + std::to_string(job) + "." + std::to_string(index);
}

}  // namespace

RunMetrics finalize(const RunRecord& run) {
  if (run.tasks.empty()) throw InvariantViolation("run has no task requests");
  RunMetrics m;
  m.jobs.reserve(run.jobs.size());
  m.tasks.reserve(run.tasks.size());
  std::vector<SimTime> all, shorts, longs;
  std::int64_t qs = 0, comm = 0, qw = 0;

  for (std::uint32_t j = 0; j < run.jobs.size(); ++j) {
    const auto& jr = run.jobs[j];
    if (!jr.done) throw InvariantViolation("job " + std::to_string(j) + " never completed");
    SimTime ideal;
    for (std::uint32_t k = 0; k < jr.task_count; ++k) {
      const auto& tr = run.tasks[jr.first_task + k];
      if (tr.launches != 1)
        throw InvariantViolation(task_name(j, k) + " launched " + std::to_string(tr.launches) + " times");
      if (tr.completions != 1)
        throw InvariantViolation(task_name(j, k) + " completed " + std::to_string(tr.completions) + " times");
      if (tr.end - tr.start != tr.duration)
        throw InvariantViolation(task_name(j, k) + " ran for the wrong length of time");
      ideal = std::max(ideal, tr.duration);
      TaskMetrics t;
      t.job_id = j;
      t.index = k;
      t.worker = tr.worker;
      t.tct = tr.trt - jr.submit;
      t.delay = t.tct - tr.duration;
      t.queue_scheduler = tr.queue_scheduler;
      t.comm = tr.comm;
      t.queue_worker = tr.queue_worker;
      if (t.delay < SimTime{} || t.queue_scheduler < SimTime{} || t.comm < SimTime{} ||
          t.queue_worker < SimTime{})
        throw InvariantViolation(task_name(j, k) + " has a negative delay component");
      if (t.queue_scheduler + t.comm + t.queue_worker != t.delay)
        throw InvariantViolation(task_name(j, k) + " delay " + format_seconds(t.delay) +
                                 " != components " + format_seconds(t.queue_scheduler) + " + " +
                                 format_seconds(t.comm) + " + " + format_seconds(t.queue_worker));
      qs += t.queue_scheduler.count();
      comm += t.comm.count();
      qw += t.queue_worker.count();
      m.tasks.push_back(t);
    }
    JobMetrics jm;
    jm.job_id = j;
    jm.cls = jr.cls;
    jm.submit = jr.submit;
    jm.finish = jr.finish;
    jm.jct = jr.finish - jr.submit;
    jm.ideal_jct = ideal;
    jm.delay = jm.jct - ideal;
    jm.task_count = jr.task_count;
    if (jm.delay < SimTime{}) throw InvariantViolation("job " + std::to_string(j) + " has negative delay");
    all.push_back(jm.delay);
    (jr.cls == JobClass::kShort ? shorts : longs).push_back(jm.delay);
    m.jobs.push_back(jm);
  }

  auto& s = m.summary;
  s.scheduler = to_string(run.scheduler);
  s.workers = run.workers;
  s.jobs = run.jobs.size();
  s.tasks = run.tasks.size();
  s.job_delay = delay_stats(all);
  s.short_delay = delay_stats(shorts);
  s.long_delay = delay_stats(longs);
  s.task_requests = run.scheduler == SchedulerKind::kMegha ? run.counters.task_requests : run.tasks.size();
  s.inconsistencies = run.counters.inconsistencies;
  s.inconsistency_ratio =
      s.task_requests == 0 ? 0.0 : static_cast<double>(s.inconsistencies) / static_cast<double>(s.task_requests);
  s.makespan = run.makespan;
  const auto n = static_cast<double>(run.tasks.size());
  s.mean_queue_scheduler = static_cast<double>(qs) / n / SimTime::kTicksPerSecond;
  s.mean_comm = static_cast<double>(comm) / n / SimTime::kTicksPerSecond;
  s.mean_queue_worker = static_cast<double>(qw) / n / SimTime::kTicksPerSecond;
  s.counters = run.counters;
  return m;
}

namespace {

nlohmann::ordered_json stats_json(const DelayStats& d) {
  return nlohmann::ordered_json{
      {"count", d.count}, {"mean", d.mean}, {"median", d.median}, {"p95", d.p95}, {"max", d.max}};
}

}  // namespace

nlohmann::ordered_json summary_json(const RunSummary& s) {
  const auto& c = s.counters;
  nlohmann::ordered_json j;
  j["scheduler"] = s.scheduler;
  j["config_digest"] = s.config_digest;
  j["workers"] = s.workers;
  j["jobs"] = s.jobs;
  j["tasks"] = s.tasks;
  j["load"] = s.load;
  j["job_delay"] = stats_json(s.job_delay);
  j["short_job_delay"] = stats_json(s.short_delay);
  j["long_job_delay"] = stats_json(s.long_delay);
  j["task_delay_components"] = {{"queue_scheduler", s.mean_queue_scheduler},
                                {"comm", s.mean_comm},
                                {"queue_worker", s.mean_queue_worker}};
  j["task_requests"] = s.task_requests;
  j["inconsistencies"] = s.inconsistencies;
  j["inconsistency_ratio"] = s.inconsistency_ratio;
  j["makespan"] = s.makespan.to_seconds();
  j["counters"] = {{"requeued", c.requeued},
                   {"probes", c.probes},
                   {"cancelled_reservations", c.cancelled_reservations},
                   {"worker_queued_tasks", c.worker_queued_tasks},
                   {"reserved_low_runs", c.reserved_low_runs},
                   {"long_in_short_partition", c.long_in_short_partition},
                   {"rejected_probes", c.rejected_probes},
                   {"stale_resend_rejections", c.stale_resend_rejections},
                   {"sticky_dispatches", c.sticky_dispatches},
                   {"heartbeats", c.heartbeats},
                   {"messages_sent", c.messages_sent},
                   {"messages_delivered", c.messages_delivered},
                   {"events", c.events}};
  return j;
}

void write_summary(std::ostream& out, const RunSummary& s) { out << summary_json(s).dump(2) << '\n'; }

void write_jobs_csv(std::ostream& out, const std::vector<JobMetrics>& jobs) {
  out << "job_id,class,submit_time,finish_time,jct,ideal_jct,delay,task_count\n";
  for (const auto& j : jobs) {
    out << j.job_id << ',' << to_string(j.cls) << ',' << format_seconds(j.submit) << ','
        << format_seconds(j.finish) << ',' << format_seconds(j.jct) << ',' << format_seconds(j.ideal_jct) << ','
        << format_seconds(j.delay) << ',' << j.task_count << '\n';
  }
}

void write_events_log(std::ostream& out, const std::vector<EventLogLine>& log) {
  for (const auto& l : log) {
    out << format_seconds(l.time) << ' ' << l.entity << ' ' << l.kind;
    if (!l.detail.empty()) out << ' ' << l.detail;
    out << '\n';
  }
}

}  // namespace meghasim
