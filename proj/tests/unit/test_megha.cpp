#include <algorithm>
#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "meghasim/metrics.hpp"
#include "meghasim/scheduler.hpp"

using namespace meghasim;
using namespace meghasim::testing;

namespace {

std::vector<EventLogLine> lines(const RunRecord& r, const std::string& kind) {
  std::vector<EventLogLine> out;
  for (const auto& l : r.log)
    if (l.kind == kind) out.push_back(l);
  return out;
}

}  // namespace

TEST_SUITE("megha") {
  TEST_CASE("single task on an idle DC costs three hops") {
    auto r = simulate_megha(params(), Topology(3, 3, 3), jobs({{0.0, {1.0}}}));
    auto m = finalize(r);
    CHECK(m.jobs[0].delay == SimTime::ticks(3 * kHop));
    CHECK(m.tasks[0].queue_scheduler == SimTime{});
    CHECK(m.tasks[0].comm == SimTime::ticks(3 * kHop));
    CHECK(m.tasks[0].queue_worker == SimTime{});
    CHECK(m.summary.inconsistency_ratio == 0.0);
  }

  TEST_CASE("jobs go round-robin to GMs") {
    auto p = params();
    p.event_log = true;
    auto r = simulate_megha(p, Topology(3, 2, 2),
                            jobs({{0, {1}}, {0.1, {1}}, {0.2, {1}}, {0.3, {1}}, {0.4, {1}}}));
    auto arrivals = lines(r, "job_arrival");
    REQUIRE(arrivals.size() == 5);
    const char* want[] = {"GM_A", "GM_B", "GM_C", "GM_A", "GM_B"};
    for (int k = 0; k < 5; ++k) CHECK(arrivals[k].entity == want[k]);
  }

  TEST_CASE("batches split at batch_limit") {
    auto p = params();
    p.event_log = true;
    p.batch_limit = 5;
    auto r = simulate_megha(p, Topology(1, 1, 10), jobs({{0, std::vector<double>(7, 1.0)}}));
    auto batches = lines(r, "launch_batch");
    REQUIRE(batches.size() == 2);
    CHECK(batches[0].detail == "lm=1 n=5");
    CHECK(batches[1].detail == "lm=1 n=2");
    CHECK(r.counters.task_requests == 7);
  }

  TEST_CASE("an idle DC gets one launch batch per touched LM") {
    auto p = params();
    p.event_log = true;
    auto r = simulate_megha(p, Topology(2, 2, 2), jobs({{0, {1.0}}}));
    CHECK(lines(r, "launch_batch").size() == 1);
  }

  TEST_CASE("saturated DC: extra tasks wait at the GM") {
    auto r = simulate_megha(params(), Topology(1, 1, 3), jobs({{0, std::vector<double>(5, 1.0)}}));
    auto m = finalize(r);
    int immediate = 0, waited = 0;
    for (const auto& t : m.tasks) {
      if (t.queue_scheduler == SimTime{})
        ++immediate;
      else
        ++waited;
      CHECK(t.queue_worker == SimTime{});
    }
    CHECK(immediate == 3);
    CHECK(waited == 2);
    // Done reaches the GM at 1.0015; the relaunch lands at 1.0025.
    std::vector<SimTime> starts;
    for (const auto& t : r.tasks) starts.push_back(t.start);
    std::sort(starts.begin(), starts.end());
    CHECK(starts[3] == SimTime::ticks(1'000'000'000 + 5 * kHop));
    CHECK(r.counters.inconsistencies == 0);
  }

  TEST_CASE("conflicting claims: one inconsistency, requeue, borrowed completion") {
    // GM A borrows B's only worker at the same instant B claims it.
    auto p = params();
    p.event_log = true;
    auto r = simulate_megha(p, Topology(2, 1, 1), jobs({{0, {2.0, 2.0}}, {0, {1.0}}}));
    CHECK(r.counters.inconsistencies == 1);
    CHECK(r.counters.requeued == 1);
    CHECK(r.counters.task_requests == 4);
    auto m = finalize(r);
    // Job 1 waits for the borrowed worker: it ends at 2.001, the LM hears at
    // 2.0015, B is notified at 2.002 and the relaunch lands at 2.003.
    CHECK(r.task(TaskRef{1, 0}).start == SimTime::ticks(2'000'000'000 + 6 * kHop));
    CHECK(m.tasks[2].comm == SimTime::ticks(5 * kHop));
    CHECK(lines(r, "inconsistency").size() == 1);
  }

  TEST_CASE("heartbeat-only notification delays reuse of borrowed workers") {
    auto p = params();
    p.owner_notify = OwnerNotify::kHeartbeatOnly;
    p.heartbeat = SimTime::seconds(5);
    auto r = simulate_megha(p, Topology(2, 1, 1), jobs({{0, {2.0, 2.0}}, {0, {1.0}}}));
    // B only learns from the 5 s heartbeat.
    CHECK(r.task(TaskRef{1, 0}).start == SimTime::ticks(5'000'000'000 + 3 * kHop));
  }

  TEST_CASE("heartbeats tick every period and stop when work is done") {
    auto p = params();
    p.event_log = true;
    auto r = simulate_megha(p, Topology(1, 2, 1), jobs({{0, {12.0}}}));
    auto beats = lines(r, "heartbeat");
    REQUIRE(beats.size() == 4);
    CHECK(beats[0].time == SimTime::seconds(5));
    CHECK(beats[2].time == SimTime::seconds(10));
    CHECK(r.counters.heartbeats == 4);
    CHECK(r.makespan < SimTime::seconds(12.01));
  }

  TEST_CASE("heartbeat offset shifts the first tick") {
    auto p = params();
    p.event_log = true;
    p.heartbeat_offset = SimTime::seconds(1.5);
    auto r = simulate_megha(p, Topology(1, 1, 1), jobs({{0, {8.0}}}));
    auto beats = lines(r, "heartbeat");
    REQUIRE(beats.size() == 1);
    CHECK(beats[0].time == SimTime::seconds(6.5));
  }

  TEST_CASE("delay floor and zero worker queuing on random workloads") {
    Rng rng(99);
    for (int rep = 0; rep < 40; ++rep) {
      auto w = random_workload(rng, 12, 10, 1.0, 0.1);
      auto g = 1 + static_cast<std::uint32_t>(rng.below(3));
      auto l = 1 + static_cast<std::uint32_t>(rng.below(3));
      auto pp = 1 + static_cast<std::uint32_t>(rng.below(3));
      auto p = params(rep + 1);
      p.heartbeat = SimTime::seconds(0.5 + rng.below(5));
      auto m = finalize(simulate_megha(p, Topology(g, l, pp), w));
      for (const auto& t : m.tasks) {
        CHECK(t.delay >= SimTime::ticks(3 * kHop));
        CHECK(t.queue_worker == SimTime{});
      }
      for (const auto& j : m.jobs) CHECK(j.delay >= SimTime::ticks(3 * kHop));
    }
  }

  TEST_CASE("rejects a zero batch limit") {
    auto p = params();
    p.batch_limit = 0;
    CHECK_THROWS_AS(simulate_megha(p, Topology(1, 1, 1), jobs({{0, {1.0}}})), std::invalid_argument);
  }
}
