#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "meghasim/cluster.hpp"
#include "meghasim/kernel.hpp"
#include "meghasim/time.hpp"
#include "meghasim/workload.hpp"

namespace meghasim {

enum class SchedulerKind { kMegha, kSparrow, kEagle, kPigeon };
enum class OwnerNotify { kImmediate, kHeartbeatOnly };

const char* to_string(SchedulerKind k);
SchedulerKind parse_scheduler(const std::string& name);  // throws std::invalid_argument
const char* to_string(OwnerNotify n);
OwnerNotify parse_owner_notify(const std::string& name);

struct SparrowParams {
  std::uint32_t d = 2;  // probe ratio
};

struct EagleParams {
  double short_fraction = 0.1;  // share of workers reserved for short jobs
  std::uint32_t d = 2;
};

struct PigeonParams {
  std::uint32_t weight = 2;              // high picks per low pick
  std::uint32_t reserved_per_group = 2;  // high-priority-only workers
  std::uint32_t groups = 0;              // 0 = one group per LM
};

// Everything a scheduler needs besides topology and workload.
struct SimParams {
  SimTime net_delay = SimTime::ticks(500'000);
  SimTime heartbeat = SimTime::seconds(5.0);  // zero disables heartbeats
  SimTime heartbeat_offset{};
  std::uint32_t batch_limit = 50;
  OwnerNotify owner_notify = OwnerNotify::kImmediate;
  double short_threshold = 90.0;  // seconds; mean task duration above it is long
  std::uint64_t seed = 1;
  std::uint64_t event_limit = 2'000'000'000ULL;
  bool event_log = false;
  SparrowParams sparrow;
  EagleParams eagle;
  PigeonParams pigeon;
};

inline constexpr std::uint32_t kNoWorker = UINT32_MAX;

struct TaskRecord {
  SimTime duration;
  std::uint32_t worker = kNoWorker;
  std::uint16_t launches = 0;
  std::uint16_t completions = 0;
  SimTime start;  // execution start at the worker
  SimTime end;    // execution end at the worker
  SimTime trt;    // completion processed by the scheduling entity
  // Delay components; comm counts every hop on the task's critical path.
  SimTime queue_scheduler;
  SimTime comm;
  SimTime queue_worker;
};

struct JobRecord {
  SimTime submit;
  SimTime finish;
  JobClass cls = JobClass::kShort;
  std::uint32_t first_task = 0;
  std::uint32_t task_count = 0;
  std::uint32_t remaining = 0;
  std::uint32_t probes = 0;
  bool done = false;
};

struct RunCounters {
  std::uint64_t task_requests = 0;    // Megha launch mappings sent (incl. retries)
  std::uint64_t inconsistencies = 0;  // mappings rejected by an LM
  std::uint64_t requeued = 0;         // tasks put back at a GM queue front
  std::uint64_t probes = 0;
  std::uint64_t cancelled_reservations = 0;
  std::uint64_t worker_queued_tasks = 0;  // tasks or reservations queued at workers
  std::uint64_t double_bookings = 0;
  std::uint64_t reserved_low_runs = 0;
  std::uint64_t long_in_short_partition = 0;
  std::uint64_t rejected_probes = 0;
  std::uint64_t stale_resend_rejections = 0;
  std::uint64_t sticky_dispatches = 0;
  std::uint64_t heartbeats = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t messages_delivered = 0;
  std::uint64_t events = 0;
};

// Raw outcome of one simulation, consumed by metrics::finalize.
struct RunRecord {
  SchedulerKind scheduler = SchedulerKind::kMegha;
  std::uint32_t workers = 0;
  std::vector<JobRecord> jobs;
  std::vector<TaskRecord> tasks;
  RunCounters counters;
  SimTime makespan;
  // Pigeon: per group, 'H'/'L' for each dispatch from a queue onto a
  // non-reserved worker.
  std::vector<std::string> wfq_sequences;
  // Eagle: workers [0, short_partition) form the short partition.
  std::uint32_t short_partition = 0;
  std::vector<EventLogLine> log;

  TaskRecord& task(TaskRef t) { return tasks[jobs[t.job].first_task + t.index]; }
  const TaskRecord& task(TaskRef t) const { return tasks[jobs[t.job].first_task + t.index]; }

  // Builds job/task tables from the workload (durations rounded to ticks).
  static RunRecord prepare(SchedulerKind kind, const Workload& w, std::uint32_t workers,
                           double short_threshold);

  void on_start(TaskRef t, std::uint32_t worker, SimTime now);
  void on_finish(TaskRef t, SimTime now);
  // Scheduling entity processed the completion; returns true when this was
  // the job's last task.
  bool on_complete(TaskRef t, SimTime now);
  bool all_done() const { return completed_jobs == jobs.size(); }
  std::size_t completed_jobs = 0;
};

RunRecord simulate(SchedulerKind kind, const SimParams& params, const Topology& topo,
                   const Workload& workload);

RunRecord simulate_megha(const SimParams& params, const Topology& topo, const Workload& workload);
RunRecord simulate_sparrow(const SimParams& params, const Topology& topo, const Workload& workload);
RunRecord simulate_eagle(const SimParams& params, const Topology& topo, const Workload& workload);
RunRecord simulate_pigeon(const SimParams& params, const Topology& topo, const Workload& workload);

}  // namespace meghasim
