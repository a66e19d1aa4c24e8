// Pigeon: state-blind distributors spread each job's tasks evenly over group
// coordinators; coordinators keep high/low priority queues and a few workers
// reserved for high-priority (short) tasks, and dequeue with weighted fair
// queuing.

#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "meghasim/scheduler.hpp"

namespace meghasim {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

namespace msg {
struct TaskBatch {
  std::vector<TaskRef> tasks;
};
struct Launch {
  TaskRef task;
};
struct Done {
  TaskRef task;
};
struct Free {
  std::uint32_t worker;
};
}  // namespace msg

using Message = std::variant<msg::TaskBatch, msg::Launch, msg::Done, msg::Free>;

class PigeonSimulation {
 public:
  PigeonSimulation(const SimParams& params, const Topology& topo, const Workload& workload)
      : params_(params),
        workers_(topo.total_workers()),
        sim_(NetworkModel{params.net_delay}, params.event_limit),
        rec_(RunRecord::prepare(SchedulerKind::kPigeon, workload, topo.total_workers(), params.short_threshold)) {
    const auto& pp = params.pigeon;
    if (pp.weight == 0) throw std::invalid_argument("pigeon.W must be >= 1");
    std::uint32_t groups = pp.groups == 0 ? topo.lm_count() : pp.groups;
    if (groups == 0 || groups > workers_) throw std::invalid_argument("pigeon.groups must be in [1, workers]");
    sim_.set_tracing(params.event_log);

    distributors_ = topo.gm_count();
    for (std::uint32_t d = 0; d < distributors_; ++d) sim_.add_entity("distributor_" + std::to_string(d));
    cursor_.assign(distributors_, 0);
    coord_base_ = static_cast<EntityId>(sim_.entity_count());
    for (std::uint32_t g = 0; g < groups; ++g) sim_.add_entity("coordinator_" + std::to_string(g));
    worker_base_ = static_cast<EntityId>(sim_.entity_count());
    for (std::uint32_t w = 0; w < workers_; ++w) sim_.add_entity(topo.label(w));

    // Contiguous, near-equal blocks; with the default this is one group per LM.
    groups_.resize(groups);
    group_of_.resize(workers_);
    reserved_.assign(workers_, false);
    for (std::uint32_t g = 0; g < groups; ++g) {
      std::uint32_t lo = static_cast<std::uint32_t>(std::uint64_t(workers_) * g / groups);
      std::uint32_t hi = static_cast<std::uint32_t>(std::uint64_t(workers_) * (g + 1) / groups);
      if (pp.reserved_per_group >= hi - lo)
        throw std::invalid_argument("pigeon.reserved_per_group must be smaller than the group size (" +
                                    std::to_string(hi - lo) + ")");
      auto& grp = groups_[g];
      for (std::uint32_t w = lo; w < hi; ++w) {
        group_of_[w] = g;
        if (w - lo < pp.reserved_per_group) {
          reserved_[w] = true;
          grp.free_reserved.push_back(w);
        } else {
          grp.free_normal.push_back(w);
        }
      }
    }
    rec_.wfq_sequences.assign(groups, std::string{});
    busy_.assign(workers_, false);
    queued_at_.assign(rec_.tasks.size(), SimTime{});
  }

  RunRecord run() {
    for (std::uint32_t j = 0; j < rec_.jobs.size(); ++j) sim_.schedule(rec_.jobs[j].submit, JobArrival{j});
    rec_.makespan = sim_.run_until_idle([this](const Simulation<Message>::Event& ev) {
      std::visit(Overloaded{
                     [&](const JobArrival& a) { on_job_arrival(a.job); },
                     [&](const MessageDelivery<Message>& m) { on_message(m.dst, m.msg); },
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
  struct Group {
    std::deque<std::uint32_t> free_normal;
    std::deque<std::uint32_t> free_reserved;
    std::deque<TaskRef> high;
    std::deque<TaskRef> low;
    std::uint32_t credit = 0;  // consecutive high picks onto non-reserved workers
  };

  EntityId distributor_of(std::uint32_t job) const { return job % distributors_; }
  bool high_priority(TaskRef t) const { return rec_.jobs[t.job].cls == JobClass::kShort; }

  void on_job_arrival(std::uint32_t job) {
    const auto d = distributor_of(job);
    const auto groups = static_cast<std::uint32_t>(groups_.size());
    std::vector<std::vector<TaskRef>> split(groups);
    for (std::uint32_t k = 0; k < rec_.jobs[job].task_count; ++k) {
      split[cursor_[d]].push_back(TaskRef{job, k});
      cursor_[d] = (cursor_[d] + 1) % groups;
    }
    for (std::uint32_t g = 0; g < groups; ++g) {
      if (split[g].empty()) continue;
      if (sim_.tracing())
        sim_.trace(d, "distribute", "job=" + std::to_string(job) + " group=" + std::to_string(g) +
                                        " n=" + std::to_string(split[g].size()));
      sim_.send(d, coord_base_ + g, msg::TaskBatch{std::move(split[g])});
    }
  }

  void on_message(EntityId dst, const Message& m) {
    const SimTime hop = sim_.net_delay();
    std::visit(Overloaded{
                   [&](const msg::TaskBatch& b) {
                     for (auto t : b.tasks) {
                       rec_.task(t).comm += hop;
                       place(dst - coord_base_, t);
                     }
                   },
                   [&](const msg::Launch& l) {
                     rec_.task(l.task).comm += hop;
                     worker_start(dst - worker_base_, l.task);
                   },
                   [&](const msg::Done& d) {
                     rec_.task(d.task).comm += hop;
                     rec_.on_complete(d.task, sim_.now());
                   },
                   [&](const msg::Free& f) { on_worker_free(dst - coord_base_, f.worker); },
               },
               m);
  }

  void place(std::uint32_t g, TaskRef t) {
    auto& grp = groups_[g];
    if (!grp.free_normal.empty()) {
      auto w = grp.free_normal.front();
      grp.free_normal.pop_front();
      launch(g, w, t);
    } else if (high_priority(t) && !grp.free_reserved.empty()) {
      auto w = grp.free_reserved.front();
      grp.free_reserved.pop_front();
      launch(g, w, t);
    } else {
      (high_priority(t) ? grp.high : grp.low).push_back(t);
      queued_at_[key(t)] = sim_.now();
    }
  }

  void on_worker_free(std::uint32_t g, std::uint32_t w) {
    auto& grp = groups_[g];
    const auto W = params_.pigeon.weight;
    std::optional<TaskRef> pick;
    if (reserved_[w]) {
      if (!grp.high.empty()) {
        pick = grp.high.front();
        grp.high.pop_front();
      }
    } else {
      bool take_low = !grp.low.empty() && (grp.high.empty() || grp.credit >= W);
      if (take_low) {
        pick = grp.low.front();
        grp.low.pop_front();
        grp.credit = 0;
        rec_.wfq_sequences[g].push_back('L');
      } else if (!grp.high.empty()) {
        pick = grp.high.front();
        grp.high.pop_front();
        grp.credit = std::min(grp.credit + 1, W);
        rec_.wfq_sequences[g].push_back('H');
      }
    }
    if (!pick) {
      (reserved_[w] ? grp.free_reserved : grp.free_normal).push_back(w);
      return;
    }
    auto& tr = rec_.task(*pick);
    tr.queue_scheduler += sim_.now() - queued_at_[key(*pick)];
    launch(g, w, *pick);
  }

  void launch(std::uint32_t g, std::uint32_t w, TaskRef t) {
    if (reserved_[w] && !high_priority(t)) ++rec_.counters.reserved_low_runs;
    sim_.send(coord_base_ + g, worker_base_ + w, msg::Launch{t});
  }

  void worker_start(std::uint32_t w, TaskRef t) {
    if (busy_[w]) {
      ++rec_.counters.double_bookings;
      throw SimulationError("worker " + std::to_string(w) + " double-booked");
    }
    busy_[w] = true;
    rec_.on_start(t, w, sim_.now());
    sim_.schedule(sim_.now() + rec_.task(t).duration, TaskFinished{w, t});
  }

  void on_task_finished(std::uint32_t w, TaskRef t) {
    busy_[w] = false;
    rec_.on_finish(t, sim_.now());
    sim_.send(worker_base_ + w, distributor_of(t.job), msg::Done{t});
    sim_.send(worker_base_ + w, coord_base_ + group_of_[w], msg::Free{w});
  }

  std::size_t key(TaskRef t) const { return rec_.jobs[t.job].first_task + t.index; }

  SimParams params_;
  std::uint32_t workers_;
  Simulation<Message> sim_;
  RunRecord rec_;
  std::uint32_t distributors_ = 1;
  std::vector<std::uint32_t> cursor_;
  EntityId coord_base_ = 0;
  EntityId worker_base_ = 0;
  std::vector<Group> groups_;
  std::vector<std::uint32_t> group_of_;
  std::vector<bool> reserved_;
  std::vector<bool> busy_;
  std::vector<SimTime> queued_at_;  // per task: when it entered a coordinator queue
};

}  // namespace

RunRecord simulate_pigeon(const SimParams& params, const Topology& topo, const Workload& workload) {
  return PigeonSimulation(params, topo, workload).run();
}

}  // namespace meghasim
