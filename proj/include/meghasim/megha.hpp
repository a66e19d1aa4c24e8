#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <variant>
#include <vector>

#include "meghasim/cluster.hpp"
#include "meghasim/kernel.hpp"
#include "meghasim/scheduler.hpp"

namespace meghasim::megha {

struct Mapping {
  TaskRef task;
  std::uint32_t worker;
};

// GM -> LM: verify and launch these task-to-worker mappings.
struct LaunchBatch {
  std::uint32_t gm;
  std::vector<Mapping> mappings;
};
// LM -> GM: verdict for every mapping of one batch. The LM's current state
// rides along whenever at least one mapping was invalid.
struct BatchResponse {
  std::vector<Mapping> launched;
  std::vector<Mapping> invalid;
  std::shared_ptr<const LmSnapshot> snapshot;
};
// LM -> worker.
struct LaunchTask {
  TaskRef task;
  std::uint32_t gm;
  bool borrowed;
};
// Worker -> scheduling GM and worker -> LM.
struct TaskDone {
  TaskRef task;
  std::uint32_t worker;
  std::uint32_t gm;
  bool borrowed;
};
// LM -> owner GM after a borrowed worker frees up.
struct AvailabilityNotice {
  std::uint32_t worker;
};
// LM -> every GM on each heartbeat.
struct StatusUpdate {
  std::shared_ptr<const LmSnapshot> snapshot;
};

using Message = std::variant<LaunchBatch, BatchResponse, LaunchTask, TaskDone, AvailabilityNotice, StatusUpdate>;

// Pending work at a GM: a job and the tasks of it still to be mapped.
struct WorkItem {
  std::uint32_t job;
  std::vector<std::uint32_t> tasks;
  std::size_t next = 0;
};

class MeghaSimulation {
 public:
  MeghaSimulation(const SimParams& params, const Topology& topo, const Workload& workload);

  RunRecord run();

  const GmGlobalState& gm_view(std::uint32_t gm) const { return views_.at(gm); }
  const LmState& lm_state(std::uint32_t lm) const { return lms_.at(lm); }
  const std::deque<WorkItem>& gm_queue(std::uint32_t gm) const { return queues_.at(gm); }

 private:
  using Sim = Simulation<Message>;

  EntityId gm_entity(std::uint32_t gm) const { return gm; }
  EntityId lm_entity(std::uint32_t lm) const { return topo_.gm_count() + lm; }
  EntityId worker_entity(std::uint32_t w) const { return topo_.gm_count() + topo_.lm_count() + w; }

  void dispatch(const Sim::Event& ev);
  void on_message(EntityId dst, const Message& msg);

  void gm_on_job_arrival(std::uint32_t gm, std::uint32_t job);
  void gm_drain(std::uint32_t gm);
  void send_batch(std::uint32_t gm, std::uint32_t lm, std::vector<Mapping> mappings);
  void lm_handle_batch(std::uint32_t lm, const LaunchBatch& batch);
  void gm_handle_response(std::uint32_t gm, const BatchResponse& resp);
  void worker_launch(std::uint32_t worker, const LaunchTask& msg);
  void on_task_finished(std::uint32_t worker, TaskRef task);
  void gm_on_task_done(std::uint32_t gm, const TaskDone& msg);
  void lm_on_task_done(std::uint32_t lm, const TaskDone& msg);
  void gm_on_availability(std::uint32_t gm, const AvailabilityNotice& msg);
  void gm_on_status(std::uint32_t gm, const StatusUpdate& msg);
  void lm_heartbeat(std::uint32_t lm);

  SimParams params_;
  Topology topo_;
  const Workload* workload_;
  Sim sim_;
  RunRecord rec_;
  std::vector<GmGlobalState> views_;
  std::vector<LmState> lms_;
  std::vector<std::deque<WorkItem>> queues_;
  std::vector<SimTime> enqueued_;  // per task: when it last entered a GM queue
  std::vector<std::uint8_t> running_;
  std::vector<TaskRef> running_task_;
  std::vector<EventId> next_tick_;
  std::uint64_t remaining_tasks_ = 0;
};

}  // namespace meghasim::megha
