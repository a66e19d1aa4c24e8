#include <string>
#include <vector>

#include "doctest.h"
#include "meghasim/kernel.hpp"
#include "meghasim/random.hpp"

using namespace meghasim;

namespace {

using Sim = Simulation<int>;

std::vector<int> drain(Sim& sim) {
  std::vector<int> seen;
  sim.run_until_idle([&](const Sim::Event& ev) {
    if (auto* m = std::get_if<MessageDelivery<int>>(&ev.payload)) seen.push_back(m->msg);
    if (auto* a = std::get_if<JobArrival>(&ev.payload)) seen.push_back(1000 + static_cast<int>(a->job));
  });
  return seen;
}

}  // namespace

TEST_SUITE("kernel") {
  TEST_CASE("events fire by time, then insertion order") {
    Sim sim(NetworkModel{});
    sim.add_entity("a");
    sim.schedule(SimTime::seconds(2), JobArrival{2});
    sim.schedule(SimTime::seconds(1), JobArrival{0});
    sim.schedule(SimTime::seconds(1), JobArrival{1});
    CHECK(drain(sim) == std::vector<int>{1000, 1001, 1002});
    CHECK(sim.now() == SimTime::seconds(2));
  }

  TEST_CASE("send costs exactly one hop") {
    Sim sim(NetworkModel{SimTime::ticks(500'000)});
    auto a = sim.add_entity("a");
    auto b = sim.add_entity("b");
    SimTime got;
    sim.schedule(SimTime::seconds(1), JobArrival{0});
    sim.run_until_idle([&](const Sim::Event& ev) {
      if (std::holds_alternative<JobArrival>(ev.payload))
        sim.send(a, b, 7);
      else
        got = ev.fire_time;
    });
    CHECK(got == SimTime::ticks(1'000'500'000));
    CHECK(sim.messages_sent() == 1);
    CHECK(sim.messages_delivered() == 1);
  }

  TEST_CASE("scheduling in the past is rejected") {
    Sim sim(NetworkModel{});
    sim.add_entity("a");
    sim.schedule(SimTime::seconds(5), JobArrival{0});
    CHECK_THROWS_AS(sim.run_until_idle([&](const Sim::Event&) { sim.schedule(SimTime::seconds(4), JobArrival{1}); }),
                    SimulationError);
  }

  TEST_CASE("send to an unknown entity is rejected") {
    Sim sim(NetworkModel{});
    auto a = sim.add_entity("a");
    CHECK_THROWS_AS(sim.send(a, 9, 1), SimulationError);
  }

  TEST_CASE("cancelled events do not fire or advance the clock") {
    Sim sim(NetworkModel{});
    sim.add_entity("a");
    sim.schedule(SimTime::seconds(1), JobArrival{0});
    auto late = sim.schedule(SimTime::seconds(9), JobArrival{1});
    sim.cancel(late);
    CHECK(drain(sim) == std::vector<int>{1000});
    CHECK(sim.now() == SimTime::seconds(1));
    CHECK(sim.processed() == 1);
  }

  TEST_CASE("event limit stops a livelock") {
    Sim sim(NetworkModel{}, 100);
    auto a = sim.add_entity("a");
    sim.send(a, a, 0);
    CHECK_THROWS_WITH_AS(sim.run_until_idle([&](const Sim::Event&) { sim.send(a, a, 0); }),
                         doctest::Contains("event limit"), SimulationError);
  }

  TEST_CASE("non-positive net delay is refused") {
    CHECK_THROWS_AS(Sim(NetworkModel{SimTime{}}), std::invalid_argument);
  }

  TEST_CASE("trace records only when enabled") {
    Sim sim(NetworkModel{});
    auto a = sim.add_entity("GM_A");
    sim.trace(a, "x");
    CHECK(sim.log().empty());
    sim.set_tracing(true);
    sim.trace(a, "x", "d=1");
    REQUIRE(sim.log().size() == 1);
    CHECK(sim.log()[0].entity == "GM_A");
    CHECK(sim.log()[0].detail == "d=1");
  }

  TEST_CASE("format_seconds is exact") {
    CHECK(format_seconds(SimTime::ticks(1'001'500'000)) == "1.001500000");
    CHECK(format_seconds(SimTime{}) == "0.000000000");
    CHECK(format_seconds(3 * SimTime::ticks(500'000)) == "0.001500000");
  }
}

TEST_SUITE("random") {
  TEST_CASE("same seed, same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c = Rng::derive(42, 1), d = Rng::derive(42, 2);
    CHECK(c.next() != d.next());
  }

  TEST_CASE("below stays in range and covers it") {
    Rng r(3);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
      auto v = r.below(7);
      REQUIRE(v < 7);
      ++hits[v];
    }
    for (int h : hits) CHECK(h > 800);
  }

  TEST_CASE("exponential mean") {
    Rng r(5);
    double sum = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      double x = r.exponential(2.0);
      REQUIRE(x > 0.0);
      sum += x;
    }
    CHECK(sum / n == doctest::Approx(2.0).epsilon(0.03));
  }

  TEST_CASE("sample draws distinct values") {
    Rng r(9);
    for (std::uint32_t k = 0; k <= 20; ++k) {
      auto s = r.sample(20, k);
      REQUIRE(s.size() == k);
      std::vector<bool> seen(20, false);
      for (auto v : s) {
        REQUIRE(v < 20);
        CHECK_FALSE(seen[v]);
        seen[v] = true;
      }
    }
  }
}
