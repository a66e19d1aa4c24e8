#include "meghasim/scheduler.hpp"

#include <stdexcept>

namespace meghasim {

const char* to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::kMegha: return "megha";
    case SchedulerKind::kSparrow: return "sparrow";
    case SchedulerKind::kEagle: return "eagle";
    case SchedulerKind::kPigeon: return "pigeon";
  }
  return "?";
}

SchedulerKind parse_scheduler(const std::string& name) {
  if (name == "megha") return SchedulerKind::kMegha;
  if (name == "sparrow") return SchedulerKind::kSparrow;
  if (name == "eagle") return SchedulerKind::kEagle;
  if (name == "pigeon") return SchedulerKind::kPigeon;
  throw std::invalid_argument("unknown scheduler '" + name +
                              "' (expected megha, sparrow, eagle or pigeon)");
}

const char* to_string(OwnerNotify n) {
  return n == OwnerNotify::kImmediate ? "immediate" : "heartbeat-only";
}

OwnerNotify parse_owner_notify(const std::string& name) {
  if (name == "immediate") return OwnerNotify::kImmediate;
  if (name == "heartbeat-only") return OwnerNotify::kHeartbeatOnly;
  throw std::invalid_argument("unknown owner_notify '" + name +
                              "' (expected immediate or heartbeat-only)");
}

RunRecord RunRecord::prepare(SchedulerKind kind, const Workload& w, std::uint32_t workers,
                             double short_threshold) {
  RunRecord r;
  r.scheduler = kind;
  r.workers = workers;
  r.jobs.resize(w.size());
  std::size_t total = 0;
  for (const auto& j : w) total += j.tasks.size();
  r.tasks.resize(total);
  std::uint32_t next = 0;
  SimTime prev_submit;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto& spec = w[k];
    if (spec.tasks.empty()) throw std::invalid_argument("job " + std::to_string(k) + " has no tasks");
    auto& jr = r.jobs[k];
    jr.submit = SimTime::seconds(spec.submit_time);
    if (k > 0 && jr.submit < prev_submit)
      throw std::invalid_argument("jobs must be sorted by submit time");
    prev_submit = jr.submit;
    jr.cls = classify_job(spec, short_threshold);
    jr.first_task = next;
    jr.task_count = static_cast<std::uint32_t>(spec.tasks.size());
    jr.remaining = jr.task_count;
    for (const auto& t : spec.tasks) {
      auto d = SimTime::seconds(t.duration);
      if (d <= SimTime{}) throw std::invalid_argument("task duration rounds to zero ticks");
      r.tasks[next++].duration = d;
    }
  }
  return r;
}

void RunRecord::on_start(TaskRef t, std::uint32_t worker, SimTime now) {
  auto& tr = task(t);
  ++tr.launches;
  tr.worker = worker;
  tr.start = now;
}

void RunRecord::on_finish(TaskRef t, SimTime now) { task(t).end = now; }

bool RunRecord::on_complete(TaskRef t, SimTime now) {
  auto& tr = task(t);
  ++tr.completions;
  tr.trt = now;
  auto& jr = jobs[t.job];
  if (jr.remaining == 0) throw SimulationError("job " + std::to_string(t.job) + " completed twice");
  if (--jr.remaining == 0) {
    jr.finish = now;
    jr.done = true;
    ++completed_jobs;
    return true;
  }
  return false;
}

RunRecord simulate(SchedulerKind kind, const SimParams& params, const Topology& topo,
                   const Workload& workload) {
  switch (kind) {
    case SchedulerKind::kMegha: return simulate_megha(params, topo, workload);
    case SchedulerKind::kSparrow: return simulate_sparrow(params, topo, workload);
    case SchedulerKind::kEagle: return simulate_eagle(params, topo, workload);
    case SchedulerKind::kPigeon: return simulate_pigeon(params, topo, workload);
  }
  throw std::invalid_argument("unknown scheduler");
}

}  // namespace meghasim
