#include <algorithm>
#include <map>

#include "doctest.h"
#include "helpers.hpp"
#include "meghasim/metrics.hpp"
#include "meghasim/scheduler.hpp"

using namespace meghasim;
using namespace meghasim::testing;

namespace {

std::vector<std::string> details(const RunRecord& r, const std::string& kind) {
  std::vector<std::string> out;
  for (const auto& l : r.log)
    if (l.kind == kind) out.push_back(l.detail);
  return out;
}

SimParams eagle_params(double short_fraction) {
  auto p = params();
  p.eagle.short_fraction = short_fraction;
  return p;
}

}  // namespace

TEST_SUITE("sparrow") {
  TEST_CASE("single task on an idle DC costs four hops") {
    auto m = finalize(simulate_sparrow(params(), Topology(2, 2, 2), jobs({{0.0, {1.0}}})));
    CHECK(m.jobs[0].delay == SimTime::ticks(4 * kHop));
    CHECK(m.tasks[0].comm == SimTime::ticks(4 * kHop));
  }

  TEST_CASE("probe count is min(d * tasks, workers)") {
    auto p = params();
    p.event_log = true;
    auto r = simulate_sparrow(p, Topology(1, 1, 30), jobs({{0, std::vector<double>(10, 1.0)}}));
    CHECK(r.counters.probes == 20);
    CHECK(details(r, "probe") == std::vector<std::string>{"job=0 n=20"});
    auto small = simulate_sparrow(p, Topology(1, 1, 5), jobs({{0, std::vector<double>(10, 1.0)}}));
    CHECK(small.counters.probes == 5);
    p.sparrow.d = 3;
    CHECK(simulate_sparrow(p, Topology(1, 1, 30), jobs({{0, {1.0, 1.0}}})).counters.probes == 6);
  }

  TEST_CASE("late binding cancels surplus reservations") {
    auto r = simulate_sparrow(params(), Topology(1, 1, 4), jobs({{0, {1.0}}}));
    CHECK(r.counters.probes == 2);
    CHECK(r.counters.cancelled_reservations == 1);
    finalize(r);
  }

  TEST_CASE("queued reservations wait at workers") {
    // Two workers, both probed by the first job; the second job queues behind.
    auto r = simulate_sparrow(params(), Topology(1, 1, 2), jobs({{0, {5.0, 5.0}}, {0.1, {1.0}}}));
    auto m = finalize(r);
    CHECK(r.counters.worker_queued_tasks > 0);
    CHECK(m.tasks[2].queue_worker > SimTime::seconds(4));
  }

  TEST_CASE("delay floor on random workloads") {
    Rng rng(5);
    for (int rep = 0; rep < 30; ++rep) {
      auto w = random_workload(rng, 10, 8, 1.0);
      auto m = finalize(simulate_sparrow(params(rep), Topology(1, 2, 1 + rng.below(6)), w));
      for (const auto& t : m.tasks) CHECK(t.delay >= SimTime::ticks(4 * kHop));
    }
  }
}

TEST_SUITE("eagle") {
  TEST_CASE("sticky batch probing runs a job's tasks back to back") {
    auto r = simulate_eagle(eagle_params(0.5), Topology(1, 1, 2), jobs({{0, std::vector<double>(5, 1.0)}}));
    auto m = finalize(r);
    CHECK(r.counters.sticky_dispatches == 3);
    std::map<std::uint32_t, std::vector<const TaskRecord*>> by_worker;
    for (const auto& t : r.tasks) by_worker[t.worker].push_back(&t);
    for (auto& [w, ts] : by_worker) {
      std::sort(ts.begin(), ts.end(), [](auto* a, auto* b) { return a->start < b->start; });
      for (std::size_t k = 1; k < ts.size(); ++k)
        CHECK(ts[k]->start == ts[k - 1]->end + SimTime::ticks(2 * kHop));
    }
    for (const auto& t : m.tasks) CHECK(t.queue_worker == SimTime{});
  }

  TEST_CASE("only short jobs: nothing is rejected") {
    Rng rng(8);
    auto w = random_workload(rng, 20, 10, 0.5);
    auto r = simulate_eagle(eagle_params(0.2), Topology(1, 2, 5), w);
    CHECK(r.counters.rejected_probes == 0);
    CHECK(r.counters.long_in_short_partition == 0);
    finalize(r);
  }

  TEST_CASE("probes hitting long work are rejected and resent") {
    auto p = eagle_params(0.5);
    auto w = jobs({{0, std::vector<double>(5, 100.0)}, {1.0, std::vector<double>(5, 2.0)}});
    auto r = simulate_eagle(p, Topology(1, 1, 10), w);
    CHECK(r.short_partition == 5);
    CHECK(r.counters.rejected_probes == 5);
    CHECK(r.counters.long_in_short_partition == 0);
    for (std::uint32_t k = 0; k < 5; ++k) {
      CHECK(r.task(TaskRef{0, k}).worker >= 5);
      CHECK(r.task(TaskRef{1, k}).worker < 5);
    }
    auto m = finalize(r);
    CHECK(m.jobs[1].delay < SimTime::seconds(0.01));
  }

  TEST_CASE("long partition must stay non-empty") {
    CHECK_THROWS_AS(simulate_eagle(eagle_params(0.1), Topology(1, 1, 1), jobs({{0, {1.0}}})),
                    std::invalid_argument);
  }
}

TEST_SUITE("pigeon") {
  TEST_CASE("distributors spread tasks evenly over groups") {
    auto p = params();
    p.event_log = true;
    auto r = simulate_pigeon(p, Topology(1, 3, 3),
                             jobs({{0, std::vector<double>(7, 1.0)}, {0.5, std::vector<double>(6, 1.0)}}));
    auto d = details(r, "distribute");
    REQUIRE(d.size() == 6);
    CHECK(d[0] == "job=0 group=0 n=3");
    CHECK(d[1] == "job=0 group=1 n=2");
    CHECK(d[2] == "job=0 group=2 n=2");
    for (int k = 3; k < 6; ++k) CHECK(d[k].find("n=2") != std::string::npos);
  }

  TEST_CASE("idle DC: three hops") {
    auto m = finalize(simulate_pigeon(params(), Topology(1, 1, 3), jobs({{0, {1.0}}})));
    CHECK(m.jobs[0].delay == SimTime::ticks(3 * kHop));
  }

  TEST_CASE("weighted fair queuing with W=3") {
    auto p = params();
    p.pigeon.weight = 3;
    p.pigeon.reserved_per_group = 1;
    // Worker 0 is reserved and kept busy by the 300 s task; worker 1 serves
    // the queues.
    auto w = jobs({{0, {1.0}}, {0.1, {100.0, 100.0}}, {0.2, {300.0, 1, 1, 1, 1, 1, 1}}});
    auto r = simulate_pigeon(p, Topology(1, 1, 2), w);
    REQUIRE(r.wfq_sequences.size() == 1);
    CHECK(r.wfq_sequences[0] == "HHHLHHHL");
    CHECK(r.counters.reserved_low_runs == 0);
    finalize(r);
  }

  TEST_CASE("W=1 alternates") {
    auto p = params();
    p.pigeon.weight = 1;
    p.pigeon.reserved_per_group = 1;
    auto w = jobs({{0, {1.0}}, {0.1, {100.0, 100.0}}, {0.2, {300.0, 1, 1, 1, 1}}});
    auto r = simulate_pigeon(p, Topology(1, 1, 2), w);
    CHECK(r.wfq_sequences[0] == "HLHLHH");
  }

  TEST_CASE("reserved workers idle while only low-priority work is queued") {
    auto p = params();
    p.pigeon.reserved_per_group = 1;
    auto r = simulate_pigeon(p, Topology(1, 1, 2), jobs({{0, {100.0, 100.0, 100.0}}}));
    CHECK(r.counters.reserved_low_runs == 0);
    for (const auto& t : r.tasks) CHECK(t.worker == 1);
    auto m = finalize(r);
    CHECK(m.jobs[0].jct > SimTime::seconds(300));
  }

  TEST_CASE("reserved count must leave normal workers") {
    auto p = params();
    p.pigeon.reserved_per_group = 3;
    CHECK_THROWS_AS(simulate_pigeon(p, Topology(1, 1, 3), jobs({{0, {1.0}}})), std::invalid_argument);
  }
}
