#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "meghasim/time.hpp"

namespace meghasim {

using EntityId = std::uint32_t;
using EventId = std::uint64_t;

// Thrown when a scheduler violates a kernel contract (causality, unknown
// entity, livelock guard) or a simulation invariant.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TaskRef {
  std::uint32_t job = 0;
  std::uint32_t index = 0;
  friend bool operator==(TaskRef, TaskRef) = default;
};

struct JobArrival {
  std::uint32_t job;
};
struct TaskFinished {
  std::uint32_t worker;
  TaskRef task;
};
struct HeartbeatTick {
  std::uint32_t lm;
};
template <class Message>
struct MessageDelivery {
  EntityId src;
  EntityId dst;
  Message msg;
};

// Constant-latency message fabric. Every hop costs the same delay.
struct NetworkModel {
  SimTime net_delay = SimTime::ticks(500'000);  // 0.5 ms
};

struct EventLogLine {
  SimTime time;
  std::string entity;
  std::string kind;
  std::string detail;
};

// Sequential discrete-event engine parameterised on the message type a
// scheduler exchanges between its entities. Events fire in (time, seq) order.
template <class Message>
class Simulation {
 public:
  using Payload = std::variant<JobArrival, MessageDelivery<Message>, TaskFinished, HeartbeatTick>;

  struct Event {
    SimTime fire_time;
    EventId seq;
    Payload payload;
  };

  explicit Simulation(NetworkModel net, std::uint64_t event_limit = 1'000'000'000ULL)
      : net_(net), event_limit_(event_limit) {
    if (net_.net_delay <= SimTime{}) throw std::invalid_argument("net_delay must be positive");
  }

  EntityId add_entity(std::string name) {
    names_.push_back(std::move(name));
    return static_cast<EntityId>(names_.size() - 1);
  }
  const std::string& name(EntityId id) const { return names_.at(id); }
  std::size_t entity_count() const { return names_.size(); }

  SimTime now() const { return now_; }
  SimTime net_delay() const { return net_.net_delay; }

  EventId schedule(SimTime t, Payload payload) {
    if (t < now_) {
      throw SimulationError("schedule_event: time " + format_seconds(t) + " precedes now " +
                            format_seconds(now_));
    }
    EventId id = next_seq_++;
    queue_.push(Event{t, id, std::move(payload)});
    return id;
  }

  EventId send(EntityId src, EntityId dst, Message msg) {
    if (dst >= names_.size() || src >= names_.size()) {
      throw SimulationError("send_message: unknown entity " + std::to_string(dst));
    }
    ++messages_sent_;
    return schedule(now_ + net_.net_delay, MessageDelivery<Message>{src, dst, std::move(msg)});
  }

  // Cancelled events are dropped when they reach the queue head; the clock
  // does not advance to them.
  void cancel(EventId id) { cancelled_.insert(id); }

  // Handler is invoked once per live event with (const Event&).
  template <class Handler>
  SimTime run_until_idle(Handler&& handler) {
    while (!queue_.empty()) {
      Event ev = std::move(const_cast<Event&>(queue_.top()));
      queue_.pop();
      if (!cancelled_.empty() && cancelled_.erase(ev.seq) > 0) continue;
      if (++processed_ > event_limit_) {
        throw SimulationError("event limit of " + std::to_string(event_limit_) +
                              " exceeded at t=" + format_seconds(ev.fire_time) +
                              "; scheduler is likely livelocked");
      }
      now_ = ev.fire_time;
      if (std::holds_alternative<MessageDelivery<Message>>(ev.payload)) ++messages_delivered_;
      handler(ev);
    }
    return now_;
  }

  bool tracing() const { return tracing_; }
  void set_tracing(bool on) { tracing_ = on; }
  void trace(EntityId entity, std::string kind, std::string detail = {}) {
    if (tracing_) log_.push_back(EventLogLine{now_, names_.at(entity), std::move(kind), std::move(detail)});
  }
  std::vector<EventLogLine>& log() { return log_; }

  std::uint64_t processed() const { return processed_; }
  std::uint64_t messages_sent() const { return messages_sent_; }
  std::uint64_t messages_delivered() const { return messages_delivered_; }
  bool idle() const { return queue_.empty(); }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_time != b.fire_time) return a.fire_time > b.fire_time;
      return a.seq > b.seq;
    }
  };

  NetworkModel net_;
  std::uint64_t event_limit_;
  SimTime now_{};
  EventId next_seq_ = 0;
  std::uint64_t processed_ = 0;
  std::uint64_t messages_sent_ = 0;
  std::uint64_t messages_delivered_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::unordered_set<EventId> cancelled_;
  std::vector<std::string> names_;
  bool tracing_ = false;
  std::vector<EventLogLine> log_;
};

}  // namespace meghasim
