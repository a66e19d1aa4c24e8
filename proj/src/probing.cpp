// Sparrow and Eagle: probe-based schedulers with worker-side reservation
// queues and late binding. Eagle adds a centralized scheduler for long jobs
// confined to the long partition, succinct state sharing on probe rejection,
// and sticky batch probing.

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "meghasim/random.hpp"
#include "meghasim/scheduler.hpp"

namespace meghasim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Bit vector of workers running or holding long tasks.
struct SuccinctState {
  std::vector<bool> long_busy;
  SimTime stamp;
};
using SsPtr = std::shared_ptr<const SuccinctState>;

namespace msg {
struct Probe {
  std::uint32_t job;
  std::uint32_t attempt;  // 0 initial, 1 SS-informed resend, 2 random short-partition
  SimTime path_comm;      // hops accumulated before this one
};
struct Callback {
  std::uint32_t job;
  std::uint32_t worker;
  SimTime path_comm;
  SimTime wait;
  SimTime sched_wait;
};
struct Dispatch {
  TaskRef task;
  bool rearm;  // worker keeps a reservation for the job after this task
};
struct Cancel {};
struct Reject {
  std::uint32_t job;
  std::uint32_t worker;
  std::uint32_t attempt;
  SimTime path_comm;
  SsPtr ss;
};
struct TaskDone {
  TaskRef task;
  std::uint32_t worker;
};
struct StickyRequest {
  std::uint32_t job;
  std::uint32_t worker;
};
struct StickyReply {
  std::optional<TaskRef> task;
};
struct LongTask {
  TaskRef task;
};
struct SsBroadcast {
  SsPtr ss;
};
}  // namespace msg

using Message = std::variant<msg::Probe, msg::Callback, msg::Dispatch, msg::Cancel, msg::Reject, msg::TaskDone,
                             msg::StickyRequest, msg::StickyReply, msg::LongTask, msg::SsBroadcast>;

class ProbeSimulation {
 public:
  ProbeSimulation(bool eagle, const SimParams& params, const Topology& topo, const Workload& workload)
      : eagle_(eagle),
        params_(params),
        workers_(topo.total_workers()),
        sim_(NetworkModel{params.net_delay}, params.event_limit),
        rec_(RunRecord::prepare(eagle ? SchedulerKind::kEagle : SchedulerKind::kSparrow, workload,
                                topo.total_workers(), params.short_threshold)),
        rng_(Rng::derive(params.seed, eagle ? 0xea61e : 0x5ba770)) {
    d_ = eagle ? params.eagle.d : params.sparrow.d;
    if (d_ == 0) throw std::invalid_argument("probe ratio d must be >= 1");
    sim_.set_tracing(params.event_log);
    schedulers_ = topo.gm_count();
    for (std::uint32_t s = 0; s < schedulers_; ++s) sim_.add_entity("sched_" + std::to_string(s));
    central_ = sim_.add_entity("central");
    all_workers_ = sim_.add_entity("workers");
    worker_base_ = static_cast<EntityId>(sim_.entity_count());
    for (std::uint32_t w = 0; w < workers_; ++w) sim_.add_entity(topo.label(w));
    state_.resize(workers_);
    next_task_.assign(rec_.jobs.size(), 0);
    outstanding_.assign(rec_.jobs.size(), 0);
    sched_ss_.assign(schedulers_, nullptr);

    if (eagle_) {
      double f = params.eagle.short_fraction;
      if (f < 0.0 || f >= 1.0) throw std::invalid_argument("eagle.short_fraction must be in [0, 1)");
      short_count_ = static_cast<std::uint32_t>(std::llround(f * workers_));
      if (f > 0.0 && short_count_ == 0) short_count_ = 1;
      if (short_count_ >= workers_) throw std::invalid_argument("eagle long partition would be empty");
      rec_.short_partition = short_count_;
      for (std::uint32_t w = short_count_; w < workers_; ++w) free_long_.push_back(w);
      long_bits_.assign(workers_, false);
    }
  }

  RunRecord run() {
    for (std::uint32_t j = 0; j < rec_.jobs.size(); ++j) sim_.schedule(rec_.jobs[j].submit, JobArrival{j});
    rec_.makespan = sim_.run_until_idle([this](const Simulation<Message>::Event& ev) {
      std::visit(Overloaded{
                     [&](const JobArrival& a) { on_job_arrival(a.job); },
                     [&](const MessageDelivery<Message>& m) { on_message(m.src, m.dst, m.msg); },
                     [&](const TaskFinished& f) { on_task_finished(f.worker, f.task); },
                     [&](const HeartbeatTick&) {},
                 },
                 ev.payload);
    });
    rec_.counters.messages_sent = sim_.messages_sent();
    rec_.counters.messages_delivered = sim_.messages_delivered();
    rec_.counters.events = sim_.processed();
    rec_.log = std::move(sim_.log());
    return std::move(rec_);
  }

 private:
  struct Entry {
    bool is_long = false;
    std::uint32_t job = 0;  // reservation
    SimTime path_comm;
    TaskRef task;  // long task
    SimTime arrived;
    SimTime sched_wait;  // time before arrival not covered by hops
  };
  enum class WState { kIdle, kAwaiting, kRunning, kSticky };
  struct WorkerState {
    std::deque<Entry> queue;
    WState state = WState::kIdle;
    TaskRef current;
    bool current_long = false;
    bool rearm = false;
    std::uint32_t long_held = 0;
  };

  EntityId worker_entity(std::uint32_t w) const { return worker_base_ + w; }
  EntityId sched_of(std::uint32_t job) const { return job % schedulers_; }
  bool is_long(std::uint32_t job) const { return eagle_ && rec_.jobs[job].cls == JobClass::kLong; }

  void on_job_arrival(std::uint32_t job) {
    if (is_long(job)) {
      const auto& jr = rec_.jobs[job];
      for (std::uint32_t k = 0; k < jr.task_count; ++k) long_queue_.push_back(TaskRef{job, k});
      place_long();
      return;
    }
    auto& jr = rec_.jobs[job];
    std::uint64_t want = static_cast<std::uint64_t>(d_) * jr.task_count;
    auto probes = static_cast<std::uint32_t>(std::min<std::uint64_t>(want, workers_));
    jr.probes = probes;
    outstanding_[job] = probes;
    rec_.counters.probes += probes;
    if (sim_.tracing()) sim_.trace(sched_of(job), "probe", "job=" + std::to_string(job) + " n=" + std::to_string(probes));
    for (auto w : rng_.sample(workers_, probes))
      sim_.send(sched_of(job), worker_entity(w), msg::Probe{job, 0, SimTime{}});
  }

  void on_message(EntityId src, EntityId dst, const Message& m) {
    const SimTime hop = sim_.net_delay();
    std::visit(
        Overloaded{
            [&](const msg::Probe& p) { worker_on_probe(dst - worker_base_, p); },
            [&](const msg::Callback& c) { sched_on_callback(dst, c); },
            [&](const msg::Dispatch& d) {
              rec_.task(d.task).comm += hop;
              state_[dst - worker_base_].rearm = d.rearm;
              start(dst - worker_base_, d.task, false);
            },
            [&](const msg::Cancel&) {
              auto w = dst - worker_base_;
              state_[w].state = WState::kIdle;
              advance(w);
            },
            [&](const msg::Reject& r) { sched_on_reject(dst, r); },
            [&](const msg::TaskDone& d) {
              rec_.task(d.task).comm += hop;
              rec_.on_complete(d.task, sim_.now());
              if (dst == central_) on_long_done(d.worker);
            },
            [&](const msg::StickyRequest& s) { sched_on_sticky(dst, s); },
            [&](const msg::StickyReply& r) {
              auto w = dst - worker_base_;
              if (r.task) {
                rec_.task(*r.task).comm += hop;
                start(w, *r.task, false);
              } else {
                state_[w].state = WState::kIdle;
                advance(w);
              }
            },
            [&](const msg::LongTask& l) {
              rec_.task(l.task).comm += hop;
              enqueue(dst - worker_base_, Entry{true, l.task.job, SimTime{}, l.task, sim_.now(), SimTime{}});
            },
            [&](const msg::SsBroadcast& b) {
              if (!worker_ss_ || worker_ss_->stamp <= b.ss->stamp) worker_ss_ = b.ss;
            },
        },
        m);
    (void)src;
  }

  // --- worker side -------------------------------------------------------

  void enqueue(std::uint32_t w, Entry e) {
    auto& ws = state_[w];
    if (e.is_long) ++ws.long_held;
    if (ws.state != WState::kIdle || !ws.queue.empty()) ++rec_.counters.worker_queued_tasks;
    ws.queue.push_back(std::move(e));
    advance(w);
  }

  void worker_on_probe(std::uint32_t w, const msg::Probe& p) {
    const SimTime path = p.path_comm + sim_.net_delay();
    if (eagle_ && state_[w].long_held > 0) {
      ++rec_.counters.rejected_probes;
      if (p.attempt >= 1) ++rec_.counters.stale_resend_rejections;
      sim_.send(worker_entity(w), sched_of(p.job), msg::Reject{p.job, w, p.attempt, path, worker_ss_});
      return;
    }
    enqueue(w, Entry{false, p.job, path, TaskRef{}, sim_.now(), SimTime{}});
  }

  void advance(std::uint32_t w) {
    auto& ws = state_[w];
    if (ws.state != WState::kIdle || ws.queue.empty()) return;
    Entry e = std::move(ws.queue.front());
    ws.queue.pop_front();
    if (e.is_long) {
      rec_.task(e.task).queue_worker += sim_.now() - e.arrived;
      start(w, e.task, true);
      return;
    }
    ws.state = WState::kAwaiting;
    sim_.send(worker_entity(w), sched_of(e.job),
              msg::Callback{e.job, w, e.path_comm, sim_.now() - e.arrived, e.sched_wait});
  }

  void start(std::uint32_t w, TaskRef task, bool long_task) {
    auto& ws = state_[w];
    if (ws.state == WState::kRunning) {
      ++rec_.counters.double_bookings;
      throw SimulationError("worker " + std::to_string(w) + " double-booked");
    }
    if (long_task && w < short_count_) ++rec_.counters.long_in_short_partition;
    ws.state = WState::kRunning;
    ws.current = task;
    ws.current_long = long_task;
    rec_.on_start(task, w, sim_.now());
    sim_.schedule(sim_.now() + rec_.task(task).duration, TaskFinished{w, task});
  }

  void on_task_finished(std::uint32_t w, TaskRef task) {
    auto& ws = state_[w];
    if (ws.state != WState::kRunning || !(ws.current == task))
      throw SimulationError("finish for a task not running on worker " + std::to_string(w));
    rec_.on_finish(task, sim_.now());
    if (ws.current_long) {
      --ws.long_held;
      sim_.send(worker_entity(w), central_, msg::TaskDone{task, w});
      ws.state = WState::kIdle;
      advance(w);
      return;
    }
    sim_.send(worker_entity(w), sched_of(task.job), msg::TaskDone{task, w});
    if (eagle_) {
      ws.state = WState::kSticky;
      sim_.send(worker_entity(w), sched_of(task.job), msg::StickyRequest{task.job, w});
      return;
    }
    ws.state = WState::kIdle;
    if (ws.rearm) {
      ws.rearm = false;
      enqueue(w, Entry{false, task.job, SimTime{}, TaskRef{}, sim_.now(), sim_.now() - rec_.jobs[task.job].submit});
      return;
    }
    advance(w);
  }

  // --- distributed schedulers ---------------------------------------------

  std::optional<TaskRef> take_task(std::uint32_t job) {
    if (next_task_[job] >= rec_.jobs[job].task_count) return std::nullopt;
    return TaskRef{job, next_task_[job]++};
  }

  void sched_on_callback(EntityId sched, const msg::Callback& c) {
    if (outstanding_[c.job] > 0) --outstanding_[c.job];
    auto task = take_task(c.job);
    if (!task) {
      ++rec_.counters.cancelled_reservations;
      sim_.send(sched, worker_entity(c.worker), msg::Cancel{});
      return;
    }
    auto& tr = rec_.task(*task);
    tr.queue_scheduler = c.sched_wait;
    tr.comm = c.path_comm + sim_.net_delay();
    tr.queue_worker = c.wait;
    // With probes capped at the worker count a job can have more tasks than
    // reservations; the worker then re-offers itself once this task is done.
    // Eagle's sticky probing covers the same case.
    bool rearm = !eagle_ && rec_.jobs[c.job].task_count - next_task_[c.job] > outstanding_[c.job];
    if (rearm) ++outstanding_[c.job];
    sim_.send(sched, worker_entity(c.worker), msg::Dispatch{*task, rearm});
  }

  void sched_on_sticky(EntityId sched, const msg::StickyRequest& s) {
    auto task = take_task(s.job);
    if (task) {
      ++rec_.counters.sticky_dispatches;
      auto& tr = rec_.task(*task);
      tr.queue_scheduler = sim_.now() - rec_.jobs[s.job].submit;
      tr.comm = SimTime{};
    }
    sim_.send(sched, worker_entity(s.worker), msg::StickyReply{task});
  }

  void sched_on_reject(EntityId sched, const msg::Reject& r) {
    auto& view = sched_ss_[sched];
    if (r.ss && (!view || view->stamp < r.ss->stamp)) view = r.ss;
    if (next_task_[r.job] >= rec_.jobs[r.job].task_count) {
      ++rec_.counters.cancelled_reservations;
      return;  // every task already placed; drop the probe
    }
    const SimTime path = r.path_comm + sim_.net_delay();
    std::optional<std::uint32_t> target;
    std::uint32_t attempt = 2;
    if (r.attempt == 0) {
      for (int tries = 0; tries < 64 && !target; ++tries) {
        auto w = static_cast<std::uint32_t>(rng_.below(workers_));
        if (w != r.worker && (!view || !view->long_busy[w])) target = w;
      }
      if (target) attempt = 1;
    }
    if (!target) {
      if (short_count_ == 0) {
        // No short partition: fall back to any worker the SS marks free.
        target = static_cast<std::uint32_t>(rng_.below(workers_));
      } else {
        target = static_cast<std::uint32_t>(rng_.below(short_count_));
      }
    }
    sim_.send(sched, worker_entity(*target), msg::Probe{r.job, attempt, path});
  }

  // --- Eagle centralized scheduler ----------------------------------------

  void place_long() {
    bool placed = false;
    while (!long_queue_.empty() && !free_long_.empty()) {
      TaskRef t = long_queue_.front();
      long_queue_.pop_front();
      auto w = free_long_.front();
      free_long_.pop_front();
      long_bits_[w] = true;
      rec_.task(t).queue_scheduler += sim_.now() - rec_.jobs[t.job].submit;
      sim_.send(central_, worker_entity(w), msg::LongTask{t});
      placed = true;
    }
    if (placed) {
      auto ss = std::make_shared<const SuccinctState>(SuccinctState{long_bits_, sim_.now()});
      sim_.send(central_, all_workers_, msg::SsBroadcast{ss});
    }
  }

  void on_long_done(std::uint32_t w) {
    long_bits_[w] = false;
    free_long_.push_back(w);
    place_long();
  }

  bool eagle_;
  SimParams params_;
  std::uint32_t workers_;
  Simulation<Message> sim_;
  RunRecord rec_;
  Rng rng_;
  std::uint32_t d_ = 2;
  std::uint32_t schedulers_ = 1;
  EntityId central_ = 0;
  EntityId all_workers_ = 0;
  EntityId worker_base_ = 0;
  std::vector<WorkerState> state_;
  std::vector<std::uint32_t> next_task_;
  std::vector<std::uint32_t> outstanding_;  // unanswered reservations per job
  std::vector<SsPtr> sched_ss_;
  SsPtr worker_ss_;
  std::uint32_t short_count_ = 0;
  std::deque<std::uint32_t> free_long_;
  std::deque<TaskRef> long_queue_;
  std::vector<bool> long_bits_;
};

}  // namespace

RunRecord simulate_sparrow(const SimParams& params, const Topology& topo, const Workload& workload) {
  return ProbeSimulation(false, params, topo, workload).run();
}

RunRecord simulate_eagle(const SimParams& params, const Topology& topo, const Workload& workload) {
  return ProbeSimulation(true, params, topo, workload).run();
}

}  // namespace meghasim
