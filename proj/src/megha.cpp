#include "meghasim/megha.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace meghasim {

namespace megha {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

MeghaSimulation::MeghaSimulation(const SimParams& params, const Topology& topo, const Workload& workload)
    : params_(params),
      topo_(topo),
      workload_(&workload),
      sim_(NetworkModel{params.net_delay}, params.event_limit),
      rec_(RunRecord::prepare(SchedulerKind::kMegha, workload, topo.total_workers(), params.short_threshold)) {
  if (params.batch_limit == 0) throw std::invalid_argument("batch_limit must be >= 1");
  sim_.set_tracing(params.event_log);
  for (std::uint32_t g = 0; g < topo_.gm_count(); ++g) {
    sim_.add_entity("GM_" + gm_letters(g));
    views_.emplace_back(topo_, g, params.seed);
  }
  for (std::uint32_t l = 0; l < topo_.lm_count(); ++l) {
    sim_.add_entity("LM_" + std::to_string(l + 1));
    lms_.emplace_back(topo_, l);
  }
  for (std::uint32_t w = 0; w < topo_.total_workers(); ++w) sim_.add_entity(topo_.label(w));
  queues_.resize(topo_.gm_count());
  enqueued_.resize(rec_.tasks.size());
  running_.assign(topo_.total_workers(), 0);
  running_task_.resize(topo_.total_workers());
  remaining_tasks_ = rec_.tasks.size();
}

RunRecord MeghaSimulation::run() {
  for (std::uint32_t j = 0; j < rec_.jobs.size(); ++j) sim_.schedule(rec_.jobs[j].submit, JobArrival{j});
  next_tick_.assign(topo_.lm_count(), 0);
  if (params_.heartbeat > SimTime{} && remaining_tasks_ > 0) {
    for (std::uint32_t l = 0; l < topo_.lm_count(); ++l)
      next_tick_[l] = sim_.schedule(params_.heartbeat_offset + params_.heartbeat, HeartbeatTick{l});
  }
  rec_.makespan = sim_.run_until_idle([this](const Sim::Event& ev) { dispatch(ev); });
  rec_.counters.messages_sent = sim_.messages_sent();
  rec_.counters.messages_delivered = sim_.messages_delivered();
  rec_.counters.events = sim_.processed();
  rec_.log = std::move(sim_.log());
  return std::move(rec_);
}

void MeghaSimulation::dispatch(const Sim::Event& ev) {
  std::visit(Overloaded{
                 [&](const JobArrival& a) { gm_on_job_arrival(a.job % topo_.gm_count(), a.job); },
                 [&](const MessageDelivery<Message>& m) { on_message(m.dst, m.msg); },
                 [&](const TaskFinished& f) { on_task_finished(f.worker, f.task); },
                 [&](const HeartbeatTick& h) { lm_heartbeat(h.lm); },
             },
             ev.payload);
}

void MeghaSimulation::on_message(EntityId dst, const Message& msg) {
  const std::uint32_t G = topo_.gm_count();
  const std::uint32_t L = topo_.lm_count();
  std::visit(Overloaded{
                 [&](const LaunchBatch& b) { lm_handle_batch(dst - G, b); },
                 [&](const BatchResponse& r) { gm_handle_response(dst, r); },
                 [&](const LaunchTask& t) { worker_launch(dst - G - L, t); },
                 [&](const TaskDone& d) {
                   if (dst < G)
                     gm_on_task_done(dst, d);
                   else
                     lm_on_task_done(dst - G, d);
                 },
                 [&](const AvailabilityNotice& n) { gm_on_availability(dst, n); },
                 [&](const StatusUpdate& s) { gm_on_status(dst, s); },
             },
             msg);
}

void MeghaSimulation::gm_on_job_arrival(std::uint32_t gm, std::uint32_t job) {
  const auto& jr = rec_.jobs[job];
  WorkItem item{job, std::vector<std::uint32_t>(jr.task_count), 0};
  std::iota(item.tasks.begin(), item.tasks.end(), 0U);
  for (std::uint32_t k = 0; k < jr.task_count; ++k) enqueued_[jr.first_task + k] = sim_.now();
  queues_[gm].push_back(std::move(item));
  if (sim_.tracing()) sim_.trace(gm_entity(gm), "job_arrival", "job=" + std::to_string(job) + " tasks=" + std::to_string(jr.task_count));
  gm_drain(gm);
}

void MeghaSimulation::gm_drain(std::uint32_t gm) {
  auto& queue = queues_[gm];
  auto& view = views_[gm];
  const SimTime now = sim_.now();
  // Per-LM batches for the current job, flushed in first-touch order.
  std::vector<std::vector<Mapping>> batches(topo_.lm_count());
  std::vector<std::uint32_t> touched;

  while (!queue.empty() && view.total_free() > 0) {
    WorkItem& item = queue.front();
    const auto first = rec_.jobs[item.job].first_task;
    touched.clear();
    while (item.next < item.tasks.size()) {
      auto worker = view.select_worker(now);
      if (!worker) break;
      TaskRef task{item.job, item.tasks[item.next++]};
      rec_.tasks[first + task.index].queue_scheduler += now - enqueued_[first + task.index];
      auto lm = topo_.lm_of(*worker);
      auto& batch = batches[lm];
      if (batch.empty()) touched.push_back(lm);
      batch.push_back(Mapping{task, *worker});
      if (batch.size() >= params_.batch_limit) send_batch(gm, lm, std::exchange(batch, {}));
    }
    for (auto lm : touched) {
      if (!batches[lm].empty()) send_batch(gm, lm, std::exchange(batches[lm], {}));
    }
    if (item.next < item.tasks.size()) break;  // view exhausted mid-job
    queue.pop_front();
  }
}

void MeghaSimulation::send_batch(std::uint32_t gm, std::uint32_t lm, std::vector<Mapping> mappings) {
  rec_.counters.task_requests += mappings.size();
  if (sim_.tracing())
    sim_.trace(gm_entity(gm), "launch_batch",
               "lm=" + std::to_string(lm + 1) + " n=" + std::to_string(mappings.size()));
  sim_.send(gm_entity(gm), lm_entity(lm), LaunchBatch{gm, std::move(mappings)});
}

void MeghaSimulation::lm_handle_batch(std::uint32_t lm, const LaunchBatch& batch) {
  const SimTime hop = sim_.net_delay();
  auto& state = lms_[lm];
  BatchResponse resp;
  for (const auto& m : batch.mappings) {
    rec_.task(m.task).comm += hop;
    if (state.apply_launch(m.task, m.worker, batch.gm) == LaunchResult::kLaunched) {
      bool borrowed = state.slot(m.worker).borrowed;
      sim_.send(lm_entity(lm), worker_entity(m.worker), LaunchTask{m.task, batch.gm, borrowed});
      resp.launched.push_back(m);
    } else {
      resp.invalid.push_back(m);
    }
  }
  if (!resp.invalid.empty()) resp.snapshot = std::make_shared<const LmSnapshot>(state.snapshot(sim_.now()));
  if (sim_.tracing())
    sim_.trace(lm_entity(lm), "verify_batch",
               "gm=" + gm_letters(batch.gm) + " launched=" + std::to_string(resp.launched.size()) +
                   " invalid=" + std::to_string(resp.invalid.size()));
  sim_.send(lm_entity(lm), gm_entity(batch.gm), std::move(resp));
}

void MeghaSimulation::gm_handle_response(std::uint32_t gm, const BatchResponse& resp) {
  auto& view = views_[gm];
  for (const auto& m : resp.launched) view.settle(m.worker);
  if (resp.invalid.empty()) {
    gm_drain(gm);
    return;
  }
  const SimTime now = sim_.now();
  for (const auto& m : resp.invalid) {
    view.settle(m.worker);
    auto& tr = rec_.task(m.task);
    tr.comm += sim_.net_delay();
    enqueued_[rec_.jobs[m.task.job].first_task + m.task.index] = now;
  }
  rec_.counters.inconsistencies += resp.invalid.size();
  rec_.counters.requeued += resp.invalid.size();
  if (resp.snapshot) view.apply_update(*resp.snapshot);

  // Front insertion: one work item per job, original task order kept.
  std::vector<WorkItem> items;
  for (const auto& m : resp.invalid) {
    if (items.empty() || items.back().job != m.task.job) items.push_back(WorkItem{m.task.job, {}, 0});
    items.back().tasks.push_back(m.task.index);
  }
  auto& queue = queues_[gm];
  for (auto it = items.rbegin(); it != items.rend(); ++it) queue.push_front(std::move(*it));
  if (sim_.tracing())
    sim_.trace(gm_entity(gm), "inconsistency", "requeued=" + std::to_string(resp.invalid.size()));
  gm_drain(gm);
}

void MeghaSimulation::worker_launch(std::uint32_t worker, const LaunchTask& msg) {
  auto& tr = rec_.task(msg.task);
  tr.comm += sim_.net_delay();
  if (running_[worker]) {
    ++rec_.counters.double_bookings;
    throw SimulationError("worker " + topo_.label(worker) + " double-booked");
  }
  running_[worker] = 1;
  running_task_[worker] = msg.task;
  rec_.on_start(msg.task, worker, sim_.now());
  sim_.schedule(sim_.now() + tr.duration, TaskFinished{worker, msg.task});
}

void MeghaSimulation::on_task_finished(std::uint32_t worker, TaskRef task) {
  if (!running_[worker] || !(running_task_[worker] == task))
    throw SimulationError("finish for a task not running on " + topo_.label(worker));
  running_[worker] = 0;
  rec_.on_finish(task, sim_.now());
  const auto& slot = lms_[topo_.lm_of(worker)].slot(worker);
  TaskDone done{task, worker, slot.gm, slot.borrowed};
  sim_.send(worker_entity(worker), gm_entity(slot.gm), done);
  sim_.send(worker_entity(worker), lm_entity(topo_.lm_of(worker)), done);
}

void MeghaSimulation::gm_on_task_done(std::uint32_t gm, const TaskDone& msg) {
  rec_.task(msg.task).comm += sim_.net_delay();
  bool job_done = rec_.on_complete(msg.task, sim_.now());
  --remaining_tasks_;
  if (job_done && sim_.tracing()) sim_.trace(gm_entity(gm), "job_complete", "job=" + std::to_string(msg.task.job));
  if (remaining_tasks_ == 0) {
    for (auto id : next_tick_) sim_.cancel(id);
  }
  if (msg.borrowed) return;  // the borrower is only told the task finished
  views_[gm].release(msg.worker, sim_.now());
  gm_drain(gm);
}

void MeghaSimulation::lm_on_task_done(std::uint32_t lm, const TaskDone& msg) {
  auto slot = lms_[lm].release(msg.worker, msg.task);
  if (slot.borrowed && params_.owner_notify == OwnerNotify::kImmediate) {
    sim_.send(lm_entity(lm), gm_entity(topo_.owner_of(msg.worker)), AvailabilityNotice{msg.worker});
  }
}

void MeghaSimulation::gm_on_availability(std::uint32_t gm, const AvailabilityNotice& msg) {
  views_[gm].release(msg.worker, sim_.now());
  gm_drain(gm);
}

void MeghaSimulation::gm_on_status(std::uint32_t gm, const StatusUpdate& msg) {
  views_[gm].apply_update(*msg.snapshot);
  gm_drain(gm);
}

void MeghaSimulation::lm_heartbeat(std::uint32_t lm) {
  ++rec_.counters.heartbeats;
  auto snap = std::make_shared<const LmSnapshot>(lms_[lm].snapshot(sim_.now()));
  for (std::uint32_t g = 0; g < topo_.gm_count(); ++g) sim_.send(lm_entity(lm), gm_entity(g), StatusUpdate{snap});
  if (sim_.tracing()) sim_.trace(lm_entity(lm), "heartbeat", "busy=" + std::to_string(lms_[lm].busy_count()));
  if (remaining_tasks_ > 0) next_tick_[lm] = sim_.schedule(sim_.now() + params_.heartbeat, HeartbeatTick{lm});
}

}  // namespace megha

RunRecord simulate_megha(const SimParams& params, const Topology& topo, const Workload& workload) {
  megha::MeghaSimulation sim(params, topo, workload);
  return sim.run();
}

}  // namespace meghasim
